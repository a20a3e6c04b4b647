#pragma once

#include "subcap/channel.hpp"
#include "subcap/expansion.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace subcap {

enum class ExperimentKind { figure1, mse_sweep, dimension_sweep, threshold_check, dps_export };

std::string to_string(ExperimentKind k);
/// Accepts both the config names (mse_sweep, ...) and the CLI subcommands (mse, ...).
ExperimentKind experiment_kind_from_string(const std::string& s);

enum class GeneratorKind { gaussian, scatterer, zero };

std::string to_string(GeneratorKind g);
GeneratorKind generator_kind_from_string(const std::string& s);

/// Invalid configuration; `field` is a dotted path such as "parameters.nu_d[2]".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

struct SnrRange {
    double start_db = 0.0;
    double stop_db = 60.0;
    double step_db = 1.0;

    /// start, start + step, ... up to stop (inclusive within 1e-9 dB).
    std::vector<double> values_db() const;
    bool operator==(const SnrRange&) const = default;
};

struct NuGrid {
    double min = 1e-3;
    double max = 0.49;
    std::size_t points = 200;

    bool operator==(const NuGrid&) const = default;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::figure1;
    std::optional<std::string> output_dir;

    std::vector<std::size_t> block_lengths{64};
    std::vector<double> nu_d{0.05};
    SnrRange snr_db;
    std::vector<double> delta_stat{1.0, 10.0, 100.0};
    NuGrid nu_grid;
    std::vector<BasisKind> bases{BasisKind::slepian, BasisKind::fourier};
    /// Empty: every basis at the matched dimension D^F.
    std::vector<std::size_t> dimensions;
    GeneratorKind generator = GeneratorKind::gaussian;
    /// Paths per block for the scatterer generator; 0 means P = M.
    std::size_t scatterers = 0;
    DopplerSpectrum spectrum = DopplerSpectrum::flat;
    bool noise = true;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    MseConvention convention = MseConvention::energy;
    unsigned threads = 1;
    double operating_snr_db = 30.0;
    bool plot_script = true;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Defaults for each experiment.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses the JSON config text. Keys not given keep the experiment's defaults.
/// Throws ConfigError with line/column on syntax errors and a field path on
/// type or range errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Pretty-printed JSON that parse_config reads back to an equal config.
std::string dump_config(const ExperimentConfig& config);

/// Checks every module precondition the experiment will hit. Throws ConfigError.
void validate(const ExperimentConfig& config);

} // namespace subcap
