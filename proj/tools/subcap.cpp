#include "subcap/config.hpp"
#include "subcap/error.hpp"
#include "subcap/experiments.hpp"
#include "subcap/manifest.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace {

constexpr int exit_config = 2;
constexpr int exit_numerical = 3;

struct Options {
    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::string> convention;
    std::optional<unsigned> threads;
    bool dump_config = false;
};

std::filesystem::path output_dir(const Options& o, const subcap::ExperimentConfig& c)
{
    if (!o.out.empty())
        return o.out;
    if (c.output_dir)
        return *c.output_dir;
    if (const char* env = std::getenv("SUBCAP_OUT_DIR"); env && *env)
        return env;
    return "subcap_out";
}

subcap::ExperimentConfig effective_config(subcap::ExperimentKind kind, const Options& o)
{
    using namespace subcap;
    ExperimentConfig c = default_config(kind);
    if (!o.config_path.empty()) {
        c = load_config(o.config_path);
        if (c.experiment != kind)
            throw ConfigError("config.experiment", fmt::format("config is for '{}' but the subcommand is '{}'",
                                                               to_string(c.experiment), to_string(kind)));
    }
    if (o.seed)
        c.seed = *o.seed;
    if (o.trials)
        c.trials = *o.trials;
    if (o.threads)
        c.threads = *o.threads;
    if (o.convention) {
        try {
            c.convention = mse_convention_from_string(*o.convention);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("--convention", e.what());
        }
    }
    return c;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Subspace channel estimation and capacity-threshold experiments"};
    app.set_version_flag("--version", subcap::tool_version());
    app.require_subcommand(1);

    Options o;
    const std::pair<const char*, const char*> commands[] = {
        {"figure1", "SNR threshold versus Doppler bandwidth for several stationarity distances"},
        {"mse", "Analytic and Monte Carlo MSE of basis-expansion channel estimators"},
        {"dimension", "MSE-optimal subspace dimension versus SNR"},
        {"threshold", "Full-rank SNR thresholds, balance residuals and capacity bounds"},
        {"dps", "Export Slepian sequences and their concentrations"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
        sub->add_option("--out", o.out, "Output directory (default: $SUBCAP_OUT_DIR, then ./subcap_out)");
        sub->add_option("--seed", o.seed, "Master seed");
        sub->add_option("--trials", o.trials, "Monte Carlo trials");
        sub->add_option("--convention", o.convention, "MSE convention")->check(CLI::IsMember({"paper", "energy"}));
        sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
        sub->add_flag("--dump-config", o.dump_config, "Print the effective config and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_config;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        const auto config = effective_config(subcap::experiment_kind_from_string(command), o);
        if (o.dump_config) {
            std::cout << subcap::dump_config(config);
            return 0;
        }
        const auto result = subcap::run_experiment(config, output_dir(o, config));
        for (const auto& f : result.files)
            std::cout << (result.output_dir / f).string() << '\n';
        std::cout << result.manifest.string() << '\n';
        return 0;
    } catch (const subcap::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const subcap::DomainError& e) {
        std::cerr << "numerical domain error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const subcap::SizeExceededError& e) {
        std::cerr << "numerical domain error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const subcap::DimensionError& e) {
        std::cerr << "numerical domain error: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
