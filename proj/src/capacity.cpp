#include "subcap/capacity.hpp"

#include "subcap/error.hpp"
#include "subcap/numerics.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

namespace subcap {

std::string to_string(EigenMethod m) { return m == EigenMethod::eigensolve ? "eigensolve" : "asymptotic"; }

std::string to_string(CapacityRegime r)
{
    return r == CapacityRegime::double_log_full_rank ? "double_log_full_rank" : "log_prelog";
}

double tail_exponent(const DopplerGrid& grid)
{
    const std::size_t m = grid.block_length();
    if (m < 2)
        throw DomainError("tail exponent undefined for M = 1 (log M = 0)");
    const double md = static_cast<double>(m);
    return std::numbers::pi * std::numbers::pi * (md * (1.0 - 2.0 * grid.nu_d()) - 1.0) / std::log(md);
}

double smallest_eigenvalue_flat(const DopplerGrid& grid, EigenMethod method, TailApproximation approx)
{
    if (grid.block_length() < 2)
        throw DomainError("smallest_eigenvalue_flat: requires M >= 2");
    if (grid.nu_d() == 0.5)
        return 0.0;
    const double log_scale = -std::log(2.0 * grid.nu_d());
    if (method == EigenMethod::eigensolve)
        return log_scale + precise_log_concentration(grid, grid.block_length() - 1);
    const double x = tail_exponent(grid);
    return log_scale - (approx == TailApproximation::logistic ? softplus(x) : x);
}

CapacityBound capacity_upper_bound(double snr, double log_lambda_min)
{
    if (!(snr > std::numbers::e))
        throw DomainError(fmt::format("capacity bound needs snr > e (log log snr), got {}", snr));
    const double bound = std::log(std::log(snr)) - euler_gamma - 1.0 - log_lambda_min;
    return {snr, bound, CapacityRegime::double_log_full_rank};
}

CapacityBound capacity_upper_bound_full_rank(const DopplerGrid& grid, double snr, EigenMethod method,
                                             TailApproximation approx)
{
    if (!(snr > std::numbers::e))
        throw DomainError(fmt::format("capacity bound needs snr > e (log log snr), got {}", snr));
    return capacity_upper_bound(snr, smallest_eigenvalue_flat(grid, method, approx));
}

boost::rational<long long> prelog_rank_deficient(std::size_t block_length, std::size_t scatterers)
{
    if (scatterers < 1 || scatterers >= block_length)
        throw DomainError(fmt::format(
            "pre-log (M-P)/P needs 1 <= P < M (got M = {}, P = {}); full rank uses the double-log bound",
            block_length, scatterers));
    return {static_cast<long long>(block_length - scatterers), static_cast<long long>(scatterers)};
}

ThresholdResult snr_threshold_from_log(double log_lambda_min, std::size_t block_length, EigenMethod method)
{
    if (block_length < 1)
        throw std::invalid_argument("snr threshold: M must be >= 1");
    if (!std::isfinite(log_lambda_min))
        throw DomainError("snr threshold: lambda_{M-1} must be positive and finite");
    const double log_snr = -(log_lambda_min + std::log(static_cast<double>(block_length)));
    const double linear = log_snr < 709.0 ? std::exp(log_snr) : std::numeric_limits<double>::infinity();
    return {log_snr / std::numbers::ln10, linear, log_lambda_min, method};
}

ThresholdResult snr_threshold_general(std::span<const double> eigenvalues, std::size_t block_length,
                                      EigenMethod method)
{
    if (eigenvalues.empty() || !(eigenvalues.back() > 0.0))
        throw DomainError("snr_threshold_general: need lambda_{M-1} > 0");
    auto r = snr_threshold_from_log(std::log(eigenvalues.back()), block_length, method);
    r.snr_th = 1.0 / (static_cast<double>(block_length) * eigenvalues.back());
    return r;
}

double balance_residual(const ThresholdResult& threshold, std::size_t block_length)
{
    // (lambda + ((M-1)/M)/s - 1/s) / (1/s) = lambda s - 1/M
    const double lambda_s = std::exp(threshold.lambda_min_log + threshold.log10_snr_th * std::numbers::ln10);
    return std::abs(lambda_s - 1.0 / static_cast<double>(block_length));
}

ThresholdResult snr_threshold_flat(const DopplerGrid& grid)
{
    const std::size_t m = grid.block_length();
    if (m < 2)
        throw DomainError("snr_threshold_flat: requires M >= 2");
    const double md = static_cast<double>(m);
    if (grid.nu_d() == 0.5)
        return {-std::log10(md), 1.0 / md, 0.0, EigenMethod::asymptotic};

    const double x = tail_exponent(grid);
    const double scale = 2.0 * grid.nu_d() / md;
    const double log_snr = std::log(scale) + softplus(x);
    const double linear =
        log_snr < 709.0 ? scale * (1.0 + std::exp(x)) : std::numeric_limits<double>::infinity();
    const double lambda_log = std::log(1.0 / (2.0 * grid.nu_d())) - softplus(x);
    return {log_snr / std::numbers::ln10, linear, lambda_log, EigenMethod::asymptotic};
}

ThresholdResult snr_threshold_flat_eigensolved(const DopplerGrid& grid)
{
    return snr_threshold_from_log(smallest_eigenvalue_flat(grid, EigenMethod::eigensolve), grid.block_length(),
                                  EigenMethod::eigensolve);
}

std::size_t block_length_from_stationarity(double delta_stat, double nu_d)
{
    if (!(delta_stat > 0.0) || !(nu_d > 0.0))
        throw std::invalid_argument("block length: need delta_stat > 0 and nu_d > 0");
    const std::size_t m = snapped_floor(delta_stat / nu_d);
    if (m == 0)
        throw DomainError(fmt::format(
            "block length floor(delta_stat / nu_d) = 0 for delta_stat = {}, nu_d = {}", delta_stat, nu_d));
    return m;
}

StationarityModel stationarity_model(double delta_stat, double nu_d)
{
    return {delta_stat, nu_d, block_length_from_stationarity(delta_stat, nu_d)};
}

std::size_t block_length_from_mobility(double delta_stat, const MobilityParams& mobility)
{
    mobility.validate();
    return block_length_from_stationarity(delta_stat, mobility.nu_d());
}

std::vector<CurvePoint> threshold_curve(double delta_stat, std::span<const double> nu_grid)
{
    std::vector<CurvePoint> out;
    out.reserve(nu_grid.size());
    for (double nu : nu_grid) {
        const std::size_t m = block_length_from_stationarity(delta_stat, nu);
        if (m < 2)
            throw DomainError(fmt::format(
                "threshold_curve: delta_stat = {} with nu_d = {} gives M = {} (< 2)", delta_stat, nu, m));
        const auto th = snr_threshold_flat(DopplerGrid(m, nu));
        out.push_back({delta_stat, nu, m, th.log10_snr_th});
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    if (!(lo > 0.0) || !(hi >= lo) || n < 1)
        throw std::invalid_argument("log_spaced: need 0 < lo <= hi and n >= 1");
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace subcap
