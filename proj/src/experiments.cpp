#include "subcap/experiments.hpp"

#include "subcap/capacity.hpp"
#include "subcap/dps.hpp"
#include "subcap/error.hpp"
#include "subcap/expansion.hpp"
#include "subcap/manifest.hpp"
#include "subcap/parallel.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>

namespace subcap {

using nlohmann::ordered_json;

namespace {

void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                std::vector<std::string>& files)
{
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot write " + (dir / name).string());
    out << content;
    if (!out)
        throw std::runtime_error("failed writing " + (dir / name).string());
    files.push_back(name);
}

std::string point_tag(std::size_t m, double nu)
{
    return fmt::format("M{}_nu{}", m, nu);
}

double db_to_linear(double db)
{
    return std::pow(10.0, db / 10.0);
}

CovarianceModel ensemble_covariance(const DopplerGrid& grid, DopplerSpectrum spectrum, std::uint64_t seed)
{
    if (spectrum == DopplerSpectrum::flat)
        return flat_doppler_covariance(grid);
    return covariance_from_scatterers(grid, 1, spectrum, seed, CovarianceKind::ensemble);
}

std::string figure1_plot_script(const std::vector<std::string>& curves)
{
    std::string list;
    for (const auto& c : curves)
        list += fmt::format("    \"{}\",\n", c);
    return fmt::format(R"(import csv
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
CURVES = [
{}]


def load(name):
    with open(os.path.join(HERE, name), newline="") as f:
        rows = list(csv.DictReader(f))
    return [float(r["nu_d"]) for r in rows], [float(r["snr_th_db"]) for r in rows], rows[0]["delta_stat"]


fig, ax = plt.subplots(figsize=(6, 4))
for name in CURVES:
    nu, snr_db, delta = load(name)
    ax.semilogx(nu, snr_db, label=f"delta_stat = {{float(delta):g}}")
ax.set_xlabel("normalized Doppler bandwidth nu_D")
ax.set_ylabel("SNR threshold [dB]")
ax.set_yscale("symlog", linthresh=10)
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(sys.argv[1] if len(sys.argv) > 1 else os.path.join(HERE, "figure1.png"), dpi=150)
)",
                       list);
}

} // namespace

ExperimentOutput run_figure1(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    ExperimentOutput out;
    const auto grid = log_spaced(c.nu_grid.min, c.nu_grid.max, c.nu_grid.points);

    std::vector<std::vector<CurvePoint>> curves(c.delta_stat.size());
    parallel_for(c.delta_stat.size(), c.threads,
                 [&](std::size_t i) { curves[i] = threshold_curve(c.delta_stat[i], grid); });

    ordered_json notes = ordered_json::array();
    std::string annotations = "delta_stat,nu_d,M,snr_th_db,note\n";
    std::vector<std::string> curve_files;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        std::string csv = "delta_stat,nu_d,M,log10_snr_th,snr_th_db\n";
        std::size_t non_increasing = 0;
        for (std::size_t k = 0; k < curves[i].size(); ++k) {
            const auto& p = curves[i][k];
            csv += fmt::format("{:.6e},{:.6e},{},{:.6e},{:.6e}\n", p.delta_stat, p.nu_d, p.m_block, p.log10_snr_th,
                               p.snr_th_db());
            if (k > 0 && p.log10_snr_th <= curves[i][k - 1].log10_snr_th)
                ++non_increasing;
            if (p.nu_d < 0.02 && p.snr_th_db() > c.operating_snr_db)
                annotations += fmt::format("{:.6e},{:.6e},{},{:.6e},double-log regime not reached below {} dB\n",
                                           p.delta_stat, p.nu_d, p.m_block, p.snr_th_db(), c.operating_snr_db);
        }
        const std::string name = fmt::format("figure1_delta{}.csv", c.delta_stat[i]);
        write_file(dir, name, csv, out.files);
        curve_files.push_back(name);
        notes.push_back({{"delta_stat", c.delta_stat[i]},
                         {"points", curves[i].size()},
                         {"first_log10_snr_th", curves[i].front().log10_snr_th},
                         {"last_log10_snr_th", curves[i].back().log10_snr_th},
                         {"non_increasing_pairs", non_increasing}});
    }
    write_file(dir, "figure1_annotations.csv", annotations, out.files);
    if (c.plot_script)
        write_file(dir, "plot_figure1.py", figure1_plot_script(curve_files), out.files);
    out.notes_json = ordered_json{{"curves", notes}}.dump();
    return out;
}

ExperimentOutput run_mse_sweep(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    ExperimentOutput out;
    std::string csv = "basis,M,nu_d,snr_db,d,bias_sq,variance,mse_analytic,mse_empirical,stderr\n";
    ordered_json comparisons = ordered_json::array();
    const auto snrs = c.snr_db.values_db();
    const MonteCarloOptions mc{c.trials, c.seed, c.threads, c.noise ? Noise::on : Noise::suppressed};

    for (std::size_t m : c.block_lengths)
        for (double nu : c.nu_d) {
            const DopplerGrid grid(m, nu);
            const auto cov = ensemble_covariance(grid, c.spectrum, c.seed);
            const std::size_t p = c.scatterers == 0 ? m : c.scatterers;
            BlockGenerator generator;
            switch (c.generator) {
            case GeneratorKind::gaussian: generator = gaussian_generator(cov, c.seed); break;
            case GeneratorKind::scatterer: generator = scatterer_generator(grid, p, c.spectrum, c.seed); break;
            case GeneratorKind::zero: generator = zero_generator(m); break;
            }
            const std::vector<std::size_t> dims =
                c.dimensions.empty() ? std::vector{fourier_dimension(grid)} : c.dimensions;

            // (snr, d) -> empirical mse per basis, for the Slepian/Fourier comparison.
            std::map<std::pair<double, std::size_t>, std::map<BasisKind, double>> empirical;
            for (BasisKind kind : c.bases) {
                const BasisExpansion basis = kind == BasisKind::slepian   ? slepian_expansion(grid)
                                             : kind == BasisKind::fourier ? fourier_basis(grid)
                                                                          : kl_basis(cov);
                for (double db : snrs)
                    for (std::size_t d : dims) {
                        const double snr = db_to_linear(db);
                        const auto a = kind == BasisKind::karhunen_loeve
                                           ? analytic_mse(cov, d, snr, c.convention)
                                           : projection_mse(basis, cov, d, snr, c.convention);
                        const auto e = empirical_mse(basis, generator, d, snr, mc);
                        empirical[{db, d}][kind] = e.mean;
                        csv += fmt::format("{},{},{:.6e},{:.6e},{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n",
                                           to_string(kind), m, nu, db, d, a.bias_sq, a.variance, a.mse, e.mean,
                                           e.standard_error);
                    }
            }
            for (const auto& [key, by_basis] : empirical) {
                const auto s = by_basis.find(BasisKind::slepian);
                const auto f = by_basis.find(BasisKind::fourier);
                if (s == by_basis.end() || f == by_basis.end())
                    continue;
                comparisons.push_back({{"M", m},
                                       {"nu_d", nu},
                                       {"snr_db", key.first},
                                       {"d", key.second},
                                       {"slepian_mse", s->second},
                                       {"fourier_mse", f->second},
                                       {"fourier_over_slepian", f->second / s->second},
                                       {"slepian_better", s->second < f->second}});
            }
        }
    write_file(dir, "mse_sweep.csv", csv, out.files);
    out.notes_json = ordered_json{{"convention", to_string(c.convention)},
                                  {"generator", to_string(c.generator)},
                                  {"slepian_vs_fourier", comparisons}}
                         .dump();
    return out;
}

ExperimentOutput run_dimension_sweep(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    ExperimentOutput out;
    ordered_json notes = ordered_json::array();
    const auto snrs = c.snr_db.values_db();
    for (std::size_t m : c.block_lengths)
        for (double nu : c.nu_d) {
            const DopplerGrid grid(m, nu);
            const auto cov = ensemble_covariance(grid, c.spectrum, c.seed);
            std::string csv = "snr_db,d_opt,mse_at_opt\n";
            std::size_t prev = 0;
            bool monotone = true;
            std::optional<double> first_full;
            for (double db : snrs) {
                const double snr = db_to_linear(db);
                const std::size_t d = optimal_dimension(cov, snr, c.convention);
                const auto mse = analytic_mse(cov, d, snr, c.convention);
                csv += fmt::format("{:.6e},{},{:.6e}\n", db, d, mse.mse);
                monotone = monotone && d >= prev;
                prev = d;
                if (!first_full && d == m)
                    first_full = db;
            }
            const std::string name = fmt::format("dimension_{}.csv", point_tag(m, nu));
            write_file(dir, name, csv, out.files);

            // Full-rank threshold 1/(M lambda'_{M-1}); the energy convention moves it up by a factor M.
            std::optional<double> th_db;
            try {
                const auto th = c.spectrum == DopplerSpectrum::flat
                                    ? snr_threshold_flat_eigensolved(grid)
                                    : snr_threshold_general(
                                          std::span<const double>(cov.eigenvalues().data(), m), m);
                th_db = th.snr_th_db() + (c.convention == MseConvention::energy ? 10.0 * std::log10(double(m)) : 0.0);
            } catch (const DomainError&) {
            } catch (const SizeExceededError&) {
            }
            ordered_json entry{{"file", name},     {"M", m}, {"nu_d", nu}, {"staircase_non_decreasing", monotone},
                               {"final_d", prev}};
            entry["first_full_rank_snr_db"] = first_full ? ordered_json(*first_full) : ordered_json(nullptr);
            entry["threshold_snr_db"] = th_db ? ordered_json(*th_db) : ordered_json(nullptr);
            entry["crossing_within_one_step"] =
                first_full && th_db ? ordered_json(std::abs(*first_full - *th_db) <= c.snr_db.step_db)
                                    : ordered_json(nullptr);
            notes.push_back(entry);
        }
    out.notes_json = ordered_json{{"convention", to_string(c.convention)}, {"sweeps", notes}}.dump();
    return out;
}

ExperimentOutput run_threshold_check(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    ExperimentOutput out;
    struct Point {
        std::size_t m;
        double nu;
        ThresholdResult exact;
        ThresholdResult approx;
    };
    std::vector<Point> points;
    for (std::size_t m : c.block_lengths)
        for (double nu : c.nu_d)
            points.push_back({m, nu, {}, {}});
    parallel_for(points.size(), c.threads, [&](std::size_t i) {
        const DopplerGrid grid(points[i].m, points[i].nu);
        points[i].exact = snr_threshold_flat_eigensolved(grid);
        points[i].approx = snr_threshold_flat(grid);
    });

    std::string table =
        "M,nu_d,log_lambda_min,log10_snr_th_eigensolved,log10_snr_th_asymptotic,balance_residual\n";
    double worst = 0.0;
    for (const auto& p : points) {
        const double residual = balance_residual(p.exact, p.m);
        worst = std::max(worst, residual);
        table += fmt::format("{},{:.6e},{:.6e},{:.6e},{:.6e},{:.6e}\n", p.m, p.nu, p.exact.lambda_min_log,
                             p.exact.log10_snr_th, p.approx.log10_snr_th, residual);

        std::string bound = "snr_db,bound_nats,bound_bits,regime\n";
        for (double db : c.snr_db.values_db()) {
            const auto b = capacity_upper_bound(db_to_linear(db), p.exact.lambda_min_log);
            bound += fmt::format("{:.6e},{:.6e},{:.6e},{}\n", db, b.bound_nats, b.bound_bits(), to_string(b.regime));
        }
        write_file(dir, fmt::format("capacity_bound_{}.csv", point_tag(p.m, p.nu)), bound, out.files);
    }
    write_file(dir, "threshold.csv", table, out.files);
    out.notes_json = ordered_json{{"max_balance_residual", worst},
                                  {"bound", "asymptotic upper bound, o(1) omitted"}}
                         .dump();
    return out;
}

ExperimentOutput run_dps_export(const ExperimentConfig& c, const std::filesystem::path& dir)
{
    ExperimentOutput out;
    ordered_json notes = ordered_json::array();
    for (std::size_t m : c.block_lengths)
        for (double nu : c.nu_d) {
            const DopplerGrid grid(m, nu);
            const auto basis = compute_slepian_basis(grid);
            write_file(dir, fmt::format("dps_vectors_{}.csv", point_tag(m, nu)), slepian_vectors_csv(basis),
                       out.files);
            write_file(dir, fmt::format("dps_lambda_{}.csv", point_tag(m, nu)), slepian_concentrations_csv(basis),
                       out.files);
            notes.push_back({{"M", m},
                             {"nu_d", nu},
                             {"lambda_sum", basis.concentrations().sum()},
                             {"expected_sum", grid.bandwidth_product()}});
        }
    out.notes_json = ordered_json{{"points", notes}}.dump();
    return out;
}

RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir)
{
    validate(config);
    std::filesystem::create_directories(dir);
    const auto start = std::chrono::steady_clock::now();

    ExperimentOutput out;
    switch (config.experiment) {
    case ExperimentKind::figure1: out = run_figure1(config, dir); break;
    case ExperimentKind::mse_sweep: out = run_mse_sweep(config, dir); break;
    case ExperimentKind::dimension_sweep: out = run_dimension_sweep(config, dir); break;
    case ExperimentKind::threshold_check: out = run_threshold_check(config, dir); break;
    case ExperimentKind::dps_export: out = run_dps_export(config, dir); break;
    }

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    RunManifest manifest{dump_config(config), tool_version(), config.seed, checksum_outputs(dir, out.files),
                         elapsed.count(), out.notes_json};
    std::vector<std::string> ignored;
    write_file(dir, "manifest.json", manifest_to_json(manifest), ignored);
    return {dir, out.files, dir / "manifest.json"};
}

} // namespace subcap
