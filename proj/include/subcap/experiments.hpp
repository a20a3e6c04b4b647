#pragma once

#include "subcap/config.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace subcap {

struct ExperimentOutput {
    std::vector<std::string> files; // written under the output directory
    std::string notes_json;         // JSON object with experiment-specific findings
};

ExperimentOutput run_figure1(const ExperimentConfig& config, const std::filesystem::path& dir);
ExperimentOutput run_mse_sweep(const ExperimentConfig& config, const std::filesystem::path& dir);
ExperimentOutput run_dimension_sweep(const ExperimentConfig& config, const std::filesystem::path& dir);
ExperimentOutput run_threshold_check(const ExperimentConfig& config, const std::filesystem::path& dir);
ExperimentOutput run_dps_export(const ExperimentConfig& config, const std::filesystem::path& dir);

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<std::string> files;
    std::filesystem::path manifest;
};

/// Validates, creates `dir`, runs the experiment and writes manifest.json.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir);

} // namespace subcap
