#include "subcap/config.hpp"
#include "subcap/experiments.hpp"
#include "subcap/manifest.hpp"

#include <doctest.h>
#include <fmt/format.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace subcap;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("subcap_test_" + name);
    fs::remove_all(dir);
    return dir;
}

std::string slurp(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream l(line);
        std::string cell;
        while (std::getline(l, cell, ','))
            cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::string field_of(const std::string& text)
{
    try {
        validate(parse_config(text));
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "<valid>";
}

nlohmann::json notes(const RunResult& r)
{
    return nlohmann::json::parse(slurp(r.manifest)).at("notes");
}

int run_cli(const std::string& args)
{
    const int status = std::system((std::string(SUBCAP_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config round-trips losslessly")
{
    for (auto kind : {ExperimentKind::figure1, ExperimentKind::mse_sweep, ExperimentKind::dimension_sweep,
                      ExperimentKind::threshold_check, ExperimentKind::dps_export}) {
        const auto c = default_config(kind);
        CHECK(parse_config(dump_config(c)) == c);
        CHECK_NOTHROW(validate(c));
    }
    ExperimentConfig c = default_config(ExperimentKind::mse_sweep);
    c.output_dir = "runs/a b";
    c.block_lengths = {32, 64};
    c.nu_d = {0.1 + 0.2, 1.0 / 3.0, 0.05};
    c.snr_db = {-3.3, 17.1, 0.7};
    c.bases = {BasisKind::karhunen_loeve, BasisKind::slepian};
    c.dimensions = {1, 5};
    c.generator = GeneratorKind::scatterer;
    c.scatterers = 7;
    c.spectrum = DopplerSpectrum::jakes;
    c.noise = false;
    c.trials = 123;
    c.seed = 18446744073709551615ull;
    c.convention = MseConvention::paper;
    c.threads = 3;
    c.operating_snr_db = 27.25;
    c.plot_script = false;
    const auto back = parse_config(dump_config(c));
    CHECK(back == c);
    CHECK(back.nu_d[0] == 0.1 + 0.2);
    CHECK(back.seed == 18446744073709551615ull);
}

TEST_CASE("partial configs keep the experiment defaults")
{
    const auto c = parse_config(R"({"experiment": "dimension", "parameters": {"M": [16]}})");
    CHECK(c.experiment == ExperimentKind::dimension_sweep);
    CHECK(c.block_lengths == std::vector<std::size_t>{16});
    CHECK(c.nu_d == default_config(ExperimentKind::dimension_sweep).nu_d);
    CHECK(!c.output_dir);
}

TEST_CASE("syntax errors report line and column")
{
    try {
        parse_config("{\n  \"experiment\": \"figure1\",\n  oops\n}\n");
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3, column 3") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("validation names the offending field")
{
    CHECK(field_of(R"({"parameters": {}})") == "config.experiment");
    CHECK(field_of(R"({"experiment": "dps", "colour": 1})") == "config.colour");
    CHECK(field_of(R"({"experiment": "warp"})") == "config.experiment");
    CHECK(field_of(R"({"experiment": "dps", "parameters": {"nu_d": [0.1, 0.7]}})") == "parameters.nu_d[1]");
    CHECK(field_of(R"({"experiment": "dps", "parameters": {"nu_d": ["x"]}})") == "config.parameters.nu_d[0]");
    CHECK(field_of(R"({"experiment": "dps", "parameters": {"M": [0]}})") == "parameters.M[0]");
    CHECK(field_of(R"({"experiment": "dps", "parameters": {"M": [5000]}})") == "parameters.M[0]");
    CHECK(field_of(R"({"experiment": "dps", "parameters": {"M": [-4]}})") == "config.parameters.M[0]");
    CHECK(field_of(R"({"experiment": "dps", "parameters": {"nu_d": []}})") == "parameters.nu_d");
    CHECK(field_of(R"({"experiment": "threshold", "parameters": {"M": [1]}})") == "parameters.M[0]");
    CHECK(field_of(R"({"experiment": "threshold", "parameters": {"snr_db": {"start": 3}}})") ==
          "parameters.snr_db.start");
    CHECK(field_of(R"({"experiment": "dimension", "parameters": {"snr_db": {"start": 0, "stop": 30}}})") ==
          "parameters.snr_db");
    CHECK(field_of(R"({"experiment": "dimension", "parameters": {"snr_db": {"step": 0}}})") ==
          "parameters.snr_db.step");
    CHECK(field_of(R"({"experiment": "mse", "parameters": {"trials": 99}})") == "parameters.trials");
    CHECK(field_of(R"({"experiment": "mse", "parameters": {"dimensions": [12]}})") == "parameters.dimensions[0]");
    CHECK(field_of(R"({"experiment": "mse", "parameters": {"bases": ["wavelet"]}})") ==
          "config.parameters.bases[0]");
    CHECK(field_of(R"({"experiment": "mse", "parameters": {"M": [4], "nu_d": [0.5], "bases": ["fourier"]}})") ==
          "parameters.bases[0]");
    CHECK(field_of(R"({"experiment": "figure1", "parameters": {"delta_stat": [10, 0.5]}})") ==
          "parameters.delta_stat[1]");
    CHECK(field_of(R"({"experiment": "figure1", "parameters": {"nu_grid": {"min": 1e-4}}})") ==
          "parameters.nu_grid.min");
    CHECK(field_of(R"({"experiment": "figure1", "parameters": {"threads": 0}})") == "parameters.threads");
    CHECK(field_of(R"({"experiment": "mse", "parameters": {"dimensions": [11]}})") == "<valid>");
}

TEST_CASE("figure1 experiment")
{
    SUBCASE("default curves")
    {
        const auto dir = scratch("figure1");
        const auto r = run_experiment(default_config(ExperimentKind::figure1), dir);
        for (const char* name : {"figure1_delta1.csv", "figure1_delta10.csv", "figure1_delta100.csv"}) {
            const auto rows = read_csv(dir / name);
            REQUIRE(rows.size() == 201);
            CHECK(rows[0] == std::vector<std::string>{"delta_stat", "nu_d", "M", "log10_snr_th", "snr_th_db"});
            for (std::size_t i = 1; i < rows.size(); ++i)
                CHECK(std::isfinite(std::stod(rows[i][3])));
        }
        CHECK(fs::exists(dir / "plot_figure1.py"));
        const auto annotations = read_csv(dir / "figure1_annotations.csv");
        CHECK(annotations.size() > 1);
        for (std::size_t i = 1; i < annotations.size(); ++i) {
            CHECK(std::stod(annotations[i][1]) < 0.02);
            CHECK(std::stod(annotations[i][3]) > 30.0);
        }
        CHECK(verify_manifest(r.manifest).empty());
    }
    SUBCASE("fast-fading single point")
    {
        auto c = default_config(ExperimentKind::figure1);
        c.delta_stat = {100};
        c.nu_grid = {0.5, 0.5, 1};
        const auto dir = scratch("figure1_point");
        run_experiment(c, dir);
        const auto rows = read_csv(dir / "figure1_delta100.csv");
        REQUIRE(rows.size() == 2);
        CHECK(rows[1][2] == "200");
        CHECK(std::stod(rows[1][3]) == doctest::Approx(std::log10(1.0 / 200)).epsilon(1e-6));
        CHECK(std::stod(rows[1][4]) == doctest::Approx(-23.0103).epsilon(1e-5));
    }
}

TEST_CASE("mse experiment")
{
    SUBCASE("Slepian beats Fourier at matched dimension")
    {
        const auto dir = scratch("mse");
        const auto r = run_experiment(default_config(ExperimentKind::mse_sweep), dir);
        const auto rows = read_csv(dir / "mse_sweep.csv");
        REQUIRE(rows.size() == 3);
        CHECK(rows[0].size() == 10);
        CHECK(rows[1][0] == "slepian");
        CHECK(rows[2][0] == "fourier");
        CHECK(rows[1][4] == "11");
        CHECK(std::stod(rows[1][8]) < std::stod(rows[2][8]));
        CHECK(notes(r).at("slepian_vs_fourier").at(0).at("slepian_better").get<bool>());
    }
    SUBCASE("noiseless complete basis")
    {
        auto c = default_config(ExperimentKind::mse_sweep);
        c.block_lengths = {16};
        c.nu_d = {0.1};
        c.bases = {BasisKind::slepian, BasisKind::karhunen_loeve};
        c.dimensions = {16};
        c.noise = false;
        c.trials = 200;
        const auto dir = scratch("mse_noiseless");
        run_experiment(c, dir);
        const auto rows = read_csv(dir / "mse_sweep.csv");
        for (std::size_t i = 1; i < rows.size(); ++i)
            CHECK(std::stod(rows[i][8]) < 1e-25);
    }
    SUBCASE("zero channel gives the pure-noise variance")
    {
        auto c = default_config(ExperimentKind::mse_sweep);
        c.block_lengths = {32};
        c.nu_d = {0.1};
        c.generator = GeneratorKind::zero;
        c.dimensions = {3, 7};
        c.snr_db = {0.0, 10.0, 10.0};
        c.trials = 5000;
        const auto dir = scratch("mse_zero");
        run_experiment(c, dir);
        const auto rows = read_csv(dir / "mse_sweep.csv");
        REQUIRE(rows.size() == 9);
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const double d = std::stod(rows[i][4]);
            const double snr = std::pow(10.0, std::stod(rows[i][3]) / 10.0);
            CHECK(std::abs(std::stod(rows[i][8]) - (d / 32.0) / snr) < 3.0 * std::stod(rows[i][9]));
        }
    }
}

TEST_CASE("dimension experiment")
{
    SUBCASE("default sweep")
    {
        const auto dir = scratch("dimension");
        const auto r = run_experiment(default_config(ExperimentKind::dimension_sweep), dir);
        const auto rows = read_csv(dir / "dimension_M64_nu0.05.csv");
        REQUIRE(rows.size() == 62);
        CHECK(rows[0] == std::vector<std::string>{"snr_db", "d_opt", "mse_at_opt"});
        const auto n = notes(r).at("sweeps").at(0);
        CHECK(n.at("staircase_non_decreasing").get<bool>());
        CHECK(n.at("threshold_snr_db").get<double>() > 1000.0);
    }
    SUBCASE("crossing matches the threshold")
    {
        auto c = default_config(ExperimentKind::dimension_sweep);
        c.block_lengths = {8};
        c.nu_d = {0.4};
        c.snr_db = {-20.0, 40.0, 1.0};
        c.convention = MseConvention::paper;
        const auto r = run_experiment(c, scratch("dimension_cross"));
        const auto n = notes(r).at("sweeps").at(0);
        CHECK(n.at("final_d").get<int>() == 8);
        CHECK(n.at("crossing_within_one_step").get<bool>());
        const auto rows = read_csv(r.output_dir / "dimension_M8_nu0.4.csv");
        CHECK(rows[1][1] == "1");
    }
}

TEST_CASE("threshold and dps experiments")
{
    const auto t = run_experiment(default_config(ExperimentKind::threshold_check), scratch("threshold"));
    const auto table = read_csv(t.output_dir / "threshold.csv");
    REQUIRE(table.size() == 2);
    CHECK(std::stod(table[1][5]) < 1e-10);
    const auto bound = read_csv(t.output_dir / "capacity_bound_M32_nu0.1.csv");
    CHECK(bound[0] == std::vector<std::string>{"snr_db", "bound_nats", "bound_bits", "regime"});
    CHECK(bound.size() == 13);

    auto c = default_config(ExperimentKind::dps_export);
    c.block_lengths = {2, 64};
    c.nu_d = {0.5, 0.05};
    const auto d = run_experiment(c, scratch("dps"));
    const auto identity = read_csv(d.output_dir / "dps_lambda_M2_nu0.5.csv");
    CHECK(std::stod(identity[1][0]) == doctest::Approx(1.0));
    CHECK(std::stod(identity[2][0]) == doctest::Approx(1.0));
    double sum = 0.0;
    for (const auto& row : read_csv(d.output_dir / "dps_lambda_M64_nu0.05.csv"))
        if (row[0] != "lambda")
            sum += std::stod(row[0]);
    CHECK(sum == doctest::Approx(6.4).epsilon(1e-10));
}

TEST_CASE("runs are byte-identical across thread counts")
{
    for (auto kind : {ExperimentKind::figure1, ExperimentKind::mse_sweep, ExperimentKind::dimension_sweep,
                      ExperimentKind::threshold_check, ExperimentKind::dps_export}) {
        auto c = default_config(kind);
        c.trials = 500;
        c.seed = 99;
        c.threads = 1;
        const auto a = run_experiment(c, scratch("det_a"));
        c.threads = 3;
        const auto b = run_experiment(c, scratch("det_b"));
        REQUIRE(a.files == b.files);
        for (const auto& f : a.files)
            CHECK(slurp(a.output_dir / f) == slurp(b.output_dir / f));
    }
}

TEST_CASE("manifest checksums")
{
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const auto r = run_experiment(default_config(ExperimentKind::dps_export), scratch("manifest"));
    CHECK(verify_manifest(r.manifest).empty());
    const auto m = nlohmann::json::parse(slurp(r.manifest));
    CHECK(m.at("seed") == 1);
    CHECK(m.at("version") == tool_version());
    CHECK(m.at("outputs").size() == r.files.size());
    CHECK(parse_config(m.at("config").dump()) == default_config(ExperimentKind::dps_export));
    std::ofstream(r.output_dir / r.files.front(), std::ios::app) << "tampered\n";
    CHECK(verify_manifest(r.manifest) == std::vector<std::string>{r.files.front()});
}

TEST_CASE("command-line exit codes")
{
    const auto dir = scratch("cli");
    CHECK(run_cli("dps --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("warp") == 2);
    CHECK(run_cli("dps --threads 0") == 2);
    CHECK(run_cli("mse --convention other") == 2);
    CHECK(run_cli("mse --trials 10 --out " + dir.string()) == 2);

    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{\"experiment\": \"dps\", \"parameters\": {\"nu_d\": [0.9]}}";
    CHECK(run_cli("dps --config " + bad.string()) == 2);
    CHECK(run_cli("figure1 --config " + bad.string()) == 2);

    // The extended-precision eigensolve refuses this block as too expensive.
    const auto deep = dir / "deep.json";
    std::ofstream(deep) << R"({"experiment": "threshold", "parameters": {"M": [4096], "nu_d": [0.001]}})";
    CHECK(run_cli("threshold --config " + deep.string() + " --out " + (dir / "deep").string()) == 3);

    const auto env = scratch("cli_env");
    CHECK(std::system(fmt::format("SUBCAP_OUT_DIR={} {} dps >/dev/null", env.string(), SUBCAP_CLI).c_str()) == 0);
    CHECK(fs::exists(env / "manifest.json"));
}
