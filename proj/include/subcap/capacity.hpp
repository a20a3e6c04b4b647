#pragma once

#include "subcap/channel.hpp"
#include "subcap/dps.hpp"

#include <boost/rational.hpp>

#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace subcap {

inline constexpr double euler_gamma = std::numbers::egamma;

/// How lambda_{M-1} is obtained: extended-precision eigensolve or the large-M law.
enum class EigenMethod { eigensolve, asymptotic };

/// Which of the two tail approximations to use: (1 + e^x)^-1 or e^-x.
enum class TailApproximation { logistic, exponential };

enum class CapacityRegime { double_log_full_rank, log_prelog };

std::string to_string(EigenMethod m);
std::string to_string(CapacityRegime r);

/// Asymptotic upper bound with the o(1) term omitted, in nats.
struct CapacityBound {
    double snr;
    double bound_nats;
    CapacityRegime regime;

    double bound_bits() const { return bound_nats / std::numbers::ln2; }
};

struct ThresholdResult {
    double log10_snr_th;
    double snr_th; // linear; +inf when it does not fit in a double
    double lambda_min_log;
    EigenMethod method;

    double snr_th_db() const { return 10.0 * log10_snr_th; }
};

struct StationarityModel {
    double delta_stat;
    double nu_d;
    std::size_t m_block;
};

/// x = pi^2 (M (1 - 2 nu_D) - 1) / log M. Throws DomainError for M = 1.
double tail_exponent(const DopplerGrid& grid);

/// log lambda'_{M-1} of the flat-Doppler covariance C/(2 nu_D).
/// nu_D = 1/2 gives 0 exactly (C = I). Throws DomainError for M = 1.
double smallest_eigenvalue_flat(const DopplerGrid& grid, EigenMethod method,
                                TailApproximation approx = TailApproximation::logistic);

/// log log snr - gamma - 1 - log lambda'_{M-1}. Throws DomainError if snr <= e.
CapacityBound capacity_upper_bound(double snr, double log_lambda_min);

/// Full-rank (P >= M) bound for a flat Doppler spectrum.
CapacityBound capacity_upper_bound_full_rank(const DopplerGrid& grid, double snr, EigenMethod method,
                                             TailApproximation approx = TailApproximation::logistic);

/// Pre-log (M - P)/P for P < M. Throws DomainError if P >= M or P < 1.
boost::rational<long long> prelog_rank_deficient(std::size_t block_length, std::size_t scatterers);

/// snr_th = 1/(M lambda_{M-1}) from a descending eigenvalue list (last entry used).
ThresholdResult snr_threshold_general(std::span<const double> eigenvalues, std::size_t block_length,
                                      EigenMethod method = EigenMethod::eigensolve);
/// Same, with log(lambda_{M-1}) supplied directly.
ThresholdResult snr_threshold_from_log(double log_lambda_min, std::size_t block_length,
                                       EigenMethod method = EigenMethod::eigensolve);

/// Relative residual of lambda + ((M-1)/M)/snr_th = 1/snr_th, normalized by 1/snr_th.
double balance_residual(const ThresholdResult& threshold, std::size_t block_length);

/// (2 nu_D / M)(1 + e^x), evaluated in log domain; exactly 1/M at nu_D = 1/2.
ThresholdResult snr_threshold_flat(const DopplerGrid& grid);

/// 1/(M lambda'_{M-1}) with lambda' from the extended-precision eigensolve.
ThresholdResult snr_threshold_flat_eigensolved(const DopplerGrid& grid);

/// M = floor(delta_stat / nu_D). Throws DomainError when it is 0.
std::size_t block_length_from_stationarity(double delta_stat, double nu_d);
StationarityModel stationarity_model(double delta_stat, double nu_d);
/// M = floor(delta_stat * wavelength / (v T_S)) for a physical mobility setup.
std::size_t block_length_from_mobility(double delta_stat, const MobilityParams& mobility);

struct CurvePoint {
    double delta_stat;
    double nu_d;
    std::size_t m_block;
    double log10_snr_th;

    double snr_th_db() const { return 10.0 * log10_snr_th; }
};

/// SNR threshold versus nu_D for a fixed stationarity distance.
/// Throws DomainError if any point gives M < 2.
std::vector<CurvePoint> threshold_curve(double delta_stat, std::span<const double> nu_grid);

/// n points log-spaced on [lo, hi], endpoints included.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

} // namespace subcap
