#include "subcap/config.hpp"

#include "subcap/capacity.hpp"
#include "subcap/dps.hpp"
#include "subcap/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace subcap {

using nlohmann::json;

namespace {

constexpr std::size_t max_block_length = SlepianOptions{}.max_size;

struct Reader {
    const json& node;
    std::string path;

    Reader at(const std::string& key) const { return {node.at(key), path + "." + key}; }
    Reader at(std::size_t i) const { return {node.at(i), fmt::format("{}[{}]", path, i)}; }

    [[noreturn]] void fail(const std::string& message) const { throw ConfigError(path, message); }

    double real() const
    {
        if (!node.is_number())
            fail("expected a number");
        return node.get<double>();
    }
    std::uint64_t unsigned_int() const
    {
        if (node.is_number_unsigned())
            return node.get<std::uint64_t>();
        if (node.is_number_integer())
            fail("must not be negative");
        fail("expected a non-negative integer");
    }
    bool boolean() const
    {
        if (!node.is_boolean())
            fail("expected true or false");
        return node.get<bool>();
    }
    std::string string() const
    {
        if (!node.is_string())
            fail("expected a string");
        return node.get<std::string>();
    }
    template <class F>
    auto list(F&& element) const
    {
        if (!node.is_array())
            fail("expected a list");
        std::vector<decltype(element(at(std::size_t{0})))> out;
        for (std::size_t i = 0; i < node.size(); ++i)
            out.push_back(element(at(i)));
        return out;
    }
    template <class F>
    auto parsed(F&& convert) const
    {
        const std::string s = string();
        try {
            return convert(s);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
        }
    }
    void only_keys(std::initializer_list<const char*> allowed) const
    {
        if (!node.is_object())
            fail("expected an object");
        const std::set<std::string> keys(allowed.begin(), allowed.end());
        for (const auto& [key, value] : node.items())
            if (!keys.count(key))
                throw ConfigError(path + "." + key, "unknown key");
    }
};

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte)
{
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

void check(bool ok, const std::string& field, const std::string& message)
{
    if (!ok)
        throw ConfigError(field, message);
}

void check_list_nonempty(std::size_t size, const std::string& field)
{
    check(size > 0, field, "must not be empty");
}

void check_block_lengths(const ExperimentConfig& c, std::size_t min_m)
{
    check_list_nonempty(c.block_lengths.size(), "parameters.M");
    for (std::size_t i = 0; i < c.block_lengths.size(); ++i)
        check(c.block_lengths[i] >= min_m && c.block_lengths[i] <= max_block_length,
              fmt::format("parameters.M[{}]", i),
              fmt::format("must be in [{}, {}], got {}", min_m, max_block_length, c.block_lengths[i]));
}

void check_nu(const ExperimentConfig& c)
{
    check_list_nonempty(c.nu_d.size(), "parameters.nu_d");
    for (std::size_t i = 0; i < c.nu_d.size(); ++i)
        check(c.nu_d[i] > 0.0 && c.nu_d[i] <= 0.5, fmt::format("parameters.nu_d[{}]", i),
              fmt::format("must be in (0, 0.5], got {}", c.nu_d[i]));
}

void check_snr(const ExperimentConfig& c)
{
    const auto& r = c.snr_db;
    check(std::isfinite(r.start_db), "parameters.snr_db.start", "must be finite");
    check(std::isfinite(r.stop_db) && r.stop_db >= r.start_db, "parameters.snr_db.stop",
          "must be finite and >= start");
    check(std::isfinite(r.step_db) && r.step_db > 0.0, "parameters.snr_db.step", "must be positive");
    check(r.values_db().size() <= 100000, "parameters.snr_db", "more than 100000 points");
}

} // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field))
{
}

std::string to_string(ExperimentKind k)
{
    switch (k) {
    case ExperimentKind::figure1: return "figure1";
    case ExperimentKind::mse_sweep: return "mse_sweep";
    case ExperimentKind::dimension_sweep: return "dimension_sweep";
    case ExperimentKind::threshold_check: return "threshold_check";
    case ExperimentKind::dps_export: return "dps_export";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s)
{
    if (s == "figure1")
        return ExperimentKind::figure1;
    if (s == "mse_sweep" || s == "mse")
        return ExperimentKind::mse_sweep;
    if (s == "dimension_sweep" || s == "dimension")
        return ExperimentKind::dimension_sweep;
    if (s == "threshold_check" || s == "threshold")
        return ExperimentKind::threshold_check;
    if (s == "dps_export" || s == "dps")
        return ExperimentKind::dps_export;
    throw std::invalid_argument("unknown experiment '" + s + "'");
}

std::string to_string(GeneratorKind g)
{
    switch (g) {
    case GeneratorKind::gaussian: return "gaussian";
    case GeneratorKind::scatterer: return "scatterer";
    case GeneratorKind::zero: return "zero";
    }
    return "unknown";
}

GeneratorKind generator_kind_from_string(const std::string& s)
{
    if (s == "gaussian")
        return GeneratorKind::gaussian;
    if (s == "scatterer")
        return GeneratorKind::scatterer;
    if (s == "zero")
        return GeneratorKind::zero;
    throw std::invalid_argument("unknown generator '" + s + "'");
}

std::vector<double> SnrRange::values_db() const
{
    std::vector<double> out;
    if (!(step_db > 0.0) || !(stop_db >= start_db))
        return out;
    const auto n = static_cast<std::size_t>(std::floor((stop_db - start_db) / step_db + 1e-9)) + 1;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(start_db + static_cast<double>(i) * step_db);
    return out;
}

ExperimentConfig default_config(ExperimentKind kind)
{
    ExperimentConfig c;
    c.experiment = kind;
    switch (kind) {
    case ExperimentKind::figure1:
        break;
    case ExperimentKind::mse_sweep:
        c.block_lengths = {256};
        c.nu_d = {0.02};
        c.snr_db = {20.0, 20.0, 1.0};
        c.trials = 10000;
        break;
    case ExperimentKind::dimension_sweep:
        c.block_lengths = {64};
        c.nu_d = {0.05};
        c.snr_db = {0.0, 60.0, 1.0};
        break;
    case ExperimentKind::threshold_check:
        c.block_lengths = {32};
        c.nu_d = {0.1};
        c.snr_db = {5.0, 60.0, 5.0};
        break;
    case ExperimentKind::dps_export:
        c.block_lengths = {64};
        c.nu_d = {0.05};
        break;
    }
    return c;
}

ExperimentConfig parse_config(const std::string& text)
{
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, column] = line_column(text, e.byte);
        std::string what = e.what();
        if (const auto pos = what.find("syntax error"); pos != std::string::npos)
            what = what.substr(pos);
        throw ConfigError("", fmt::format("line {}, column {}: {}", line, column, what));
    }

    const Reader top{root, "config"};
    top.only_keys({"experiment", "output_dir", "parameters"});
    if (!root.contains("experiment"))
        throw ConfigError("config.experiment", "missing");
    ExperimentConfig c = default_config(top.at("experiment").parsed(experiment_kind_from_string));
    if (root.contains("output_dir"))
        c.output_dir = top.at("output_dir").string();
    if (!root.contains("parameters"))
        return c;

    const Reader p = top.at("parameters");
    p.only_keys({"M", "nu_d", "snr_db", "delta_stat", "nu_grid", "bases", "dimensions", "generator", "scatterers",
                 "spectrum", "noise", "trials", "seed", "convention", "threads", "operating_snr_db",
                 "plot_script"});
    const auto& n = p.node;
    auto size = [](const Reader& r) { return static_cast<std::size_t>(r.unsigned_int()); };
    auto real = [](const Reader& r) { return r.real(); };

    if (n.contains("M"))
        c.block_lengths = p.at("M").list(size);
    if (n.contains("nu_d"))
        c.nu_d = p.at("nu_d").list(real);
    if (n.contains("snr_db")) {
        const Reader r = p.at("snr_db");
        r.only_keys({"start", "stop", "step"});
        if (r.node.contains("start"))
            c.snr_db.start_db = r.at("start").real();
        if (r.node.contains("stop"))
            c.snr_db.stop_db = r.at("stop").real();
        if (r.node.contains("step"))
            c.snr_db.step_db = r.at("step").real();
    }
    if (n.contains("delta_stat"))
        c.delta_stat = p.at("delta_stat").list(real);
    if (n.contains("nu_grid")) {
        const Reader r = p.at("nu_grid");
        r.only_keys({"min", "max", "points"});
        if (r.node.contains("min"))
            c.nu_grid.min = r.at("min").real();
        if (r.node.contains("max"))
            c.nu_grid.max = r.at("max").real();
        if (r.node.contains("points"))
            c.nu_grid.points = size(r.at("points"));
    }
    if (n.contains("bases"))
        c.bases = p.at("bases").list([](const Reader& r) { return r.parsed(basis_kind_from_string); });
    if (n.contains("dimensions"))
        c.dimensions = p.at("dimensions").list(size);
    if (n.contains("generator"))
        c.generator = p.at("generator").parsed(generator_kind_from_string);
    if (n.contains("scatterers"))
        c.scatterers = size(p.at("scatterers"));
    if (n.contains("spectrum"))
        c.spectrum = p.at("spectrum").parsed(doppler_spectrum_from_string);
    if (n.contains("noise"))
        c.noise = p.at("noise").boolean();
    if (n.contains("trials"))
        c.trials = size(p.at("trials"));
    if (n.contains("seed"))
        c.seed = p.at("seed").unsigned_int();
    if (n.contains("convention"))
        c.convention = p.at("convention").parsed(mse_convention_from_string);
    if (n.contains("threads")) {
        const auto t = p.at("threads").unsigned_int();
        if (t > 1024)
            p.at("threads").fail("at most 1024");
        c.threads = static_cast<unsigned>(t);
    }
    if (n.contains("operating_snr_db"))
        c.operating_snr_db = p.at("operating_snr_db").real();
    if (n.contains("plot_script"))
        c.plot_script = p.at("plot_script").boolean();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("", "cannot read config file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig& c)
{
    json bases = json::array();
    for (auto b : c.bases)
        bases.push_back(to_string(b));
    json root = {
        {"experiment", to_string(c.experiment)},
        {"parameters",
         {{"M", c.block_lengths},
          {"nu_d", c.nu_d},
          {"snr_db", {{"start", c.snr_db.start_db}, {"stop", c.snr_db.stop_db}, {"step", c.snr_db.step_db}}},
          {"delta_stat", c.delta_stat},
          {"nu_grid", {{"min", c.nu_grid.min}, {"max", c.nu_grid.max}, {"points", c.nu_grid.points}}},
          {"bases", bases},
          {"dimensions", c.dimensions},
          {"generator", to_string(c.generator)},
          {"scatterers", c.scatterers},
          {"spectrum", to_string(c.spectrum)},
          {"noise", c.noise},
          {"trials", c.trials},
          {"seed", c.seed},
          {"convention", to_string(c.convention)},
          {"threads", c.threads},
          {"operating_snr_db", c.operating_snr_db},
          {"plot_script", c.plot_script}}},
    };
    if (c.output_dir)
        root["output_dir"] = *c.output_dir;
    return root.dump(2) + "\n";
}

void validate(const ExperimentConfig& c)
{
    check(c.threads >= 1, "parameters.threads", "must be at least 1");
    check(c.trials >= 1, "parameters.trials", "must be at least 1");

    switch (c.experiment) {
    case ExperimentKind::figure1: {
        check_list_nonempty(c.delta_stat.size(), "parameters.delta_stat");
        const auto& g = c.nu_grid;
        check(g.min >= 1e-3 && g.min <= 0.5, "parameters.nu_grid.min", "must be in [0.001, 0.5]");
        check(g.max >= g.min && g.max <= 0.5, "parameters.nu_grid.max", "must be in [min, 0.5]");
        check(g.points >= 1 && g.points <= 100000, "parameters.nu_grid.points", "must be in [1, 100000]");
        check(g.points == 1 || g.max > g.min, "parameters.nu_grid.points",
              "several points need max > min");
        check(std::isfinite(c.operating_snr_db), "parameters.operating_snr_db", "must be finite");
        for (std::size_t i = 0; i < c.delta_stat.size(); ++i) {
            const std::string field = fmt::format("parameters.delta_stat[{}]", i);
            check(std::isfinite(c.delta_stat[i]) && c.delta_stat[i] > 0.0, field, "must be positive");
            // M = floor(delta / nu) is smallest at the largest nu.
            std::size_t m = 0;
            try {
                m = block_length_from_stationarity(c.delta_stat[i], g.max);
            } catch (const std::exception&) {
            }
            check(m >= 2, field,
                  fmt::format("gives block length {} < 2 at nu_d = {}", m, g.max));
        }
        break;
    }
    case ExperimentKind::mse_sweep: {
        check_block_lengths(c, 1);
        check_nu(c);
        check_snr(c);
        check(c.trials >= 100, "parameters.trials", "must be at least 100 for standard errors");
        check_list_nonempty(c.bases.size(), "parameters.bases");
        for (std::size_t mi = 0; mi < c.block_lengths.size(); ++mi)
            for (std::size_t ni = 0; ni < c.nu_d.size(); ++ni) {
                const DopplerGrid grid(c.block_lengths[mi], c.nu_d[ni]);
                const std::size_t df = fourier_dimension(grid);
                for (std::size_t bi = 0; bi < c.bases.size(); ++bi) {
                    const bool fourier = c.bases[bi] == BasisKind::fourier;
                    const std::size_t d_max = fourier ? df : grid.block_length();
                    check(!fourier || df <= grid.block_length(), fmt::format("parameters.bases[{}]", bi),
                          fmt::format("Fourier dimension {} exceeds M = {} at nu_d = {}", df,
                                      grid.block_length(), grid.nu_d()));
                    const std::vector<std::size_t> dims = c.dimensions.empty() ? std::vector{df} : c.dimensions;
                    for (std::size_t di = 0; di < dims.size(); ++di)
                        check(dims[di] >= 1 && dims[di] <= d_max,
                              c.dimensions.empty() ? std::string("parameters.dimensions")
                                                   : fmt::format("parameters.dimensions[{}]", di),
                              fmt::format("d = {} outside [1, {}] for {} at M = {}, nu_d = {}", dims[di], d_max,
                                          to_string(c.bases[bi]), grid.block_length(), grid.nu_d()));
                }
            }
        break;
    }
    case ExperimentKind::dimension_sweep:
        check_block_lengths(c, 1);
        check_nu(c);
        check_snr(c);
        check(c.snr_db.stop_db - c.snr_db.start_db >= 40.0, "parameters.snr_db", "must span at least 40 dB");
        break;
    case ExperimentKind::threshold_check:
        check_block_lengths(c, 2);
        check_nu(c);
        check_snr(c);
        check(c.snr_db.start_db > 10.0 * std::log10(std::numbers::e), "parameters.snr_db.start",
              "capacity bound needs snr > e (4.343 dB)");
        break;
    case ExperimentKind::dps_export:
        check_block_lengths(c, 1);
        check_nu(c);
        break;
    }
}

} // namespace subcap
