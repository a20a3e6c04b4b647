#include "subcap/channel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <stdexcept>

namespace subcap {

std::string scatterers_to_json(const ScattererSet& s)
{
    nlohmann::json j;
    j["P"] = s.size();
    auto gains = nlohmann::json::array();
    for (const auto& a : s.gains)
        gains.push_back({a.real(), a.imag()});
    j["gains"] = std::move(gains);
    j["dopplers"] = s.dopplers;
    if (s.angles)
        j["angles"] = *s.angles;
    j["seed"] = s.seed;
    return j.dump(2);
}

ScattererSet scatterers_from_json(const std::string& text)
{
    const auto j = nlohmann::json::parse(text);
    ScattererSet s;
    const auto count = j.at("P").get<std::size_t>();
    for (const auto& g : j.at("gains"))
        s.gains.emplace_back(g.at(0).get<double>(), g.at(1).get<double>());
    s.dopplers = j.at("dopplers").get<std::vector<double>>();
    if (j.contains("angles"))
        s.angles = j.at("angles").get<std::vector<double>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    if (s.gains.size() != count || s.dopplers.size() != count)
        throw std::invalid_argument("scatterers_from_json: P does not match array lengths");
    return s;
}

std::string channel_csv(const ChannelBlock& block, const ObservationBlock* observation)
{
    if (observation && observation->y.size() != block.h.size())
        throw std::invalid_argument("channel_csv: observation length mismatch");
    std::string out = observation ? "m,re_h,im_h,re_y,im_y\n" : "m,re_h,im_h\n";
    for (Eigen::Index m = 0; m < block.h.size(); ++m) {
        out += fmt::format("{},{:.12e},{:.12e}", m, block.h(m).real(), block.h(m).imag());
        if (observation)
            out += fmt::format(",{:.12e},{:.12e}", observation->y(m).real(), observation->y(m).imag());
        out += '\n';
    }
    return out;
}

} // namespace subcap
