#pragma once

#include "subcap/channel.hpp"
#include "subcap/dps.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace subcap {

enum class BasisKind { slepian, fourier, karhunen_loeve };

std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

/// M x d_max matrix of orthonormal basis columns u_i.
class BasisExpansion {
public:
    /// Throws std::invalid_argument unless the columns are orthonormal to 1e-8.
    BasisExpansion(BasisKind kind, cmat columns, std::optional<DopplerGrid> grid = std::nullopt);

    BasisKind kind() const { return kind_; }
    const cmat& columns() const { return columns_; }
    std::size_t d_max() const { return static_cast<std::size_t>(columns_.cols()); }
    std::size_t block_length() const { return static_cast<std::size_t>(columns_.rows()); }
    const std::optional<DopplerGrid>& grid() const { return grid_; }

private:
    BasisKind kind_;
    cmat columns_;
    std::optional<DopplerGrid> grid_;
};

struct CoefficientEstimate {
    cvec gamma;
    std::size_t d_used;
};

enum class MseConvention {
    paper,  // bias^2 = sum_{i>=d} lambda'_i
    energy, // bias^2 = (1/M) sum_{i>=d} lambda'_i, the per-symbol average
};

std::string to_string(MseConvention c);
MseConvention mse_convention_from_string(const std::string& s);

struct MseBreakdown {
    std::size_t d;
    double snr;
    double bias_sq;
    double variance;
    double mse;
};

struct SubspacePartition {
    cmat sigma_u;
    cmat sigma_n;
    std::size_t d;
};

/// Eigenvectors of Sigma_h by descending lambda'_i; d_max = M.
BasisExpansion kl_basis(const CovarianceModel& cov);

/// D^F = 2 floor(nu_D M) + 1.
std::size_t fourier_dimension(const DopplerGrid& grid);

/// Columns (1/sqrt(M)) exp(j 2 pi (i - D^F/2 + 1/2) m / M), i < D^F.
/// Throws DimensionError if D^F > M.
BasisExpansion fourier_basis(const DopplerGrid& grid);

/// Slepian sequences as a basis; d_max = M.
BasisExpansion slepian_expansion(const DopplerGrid& grid, const SlepianOptions& options = {});

/// gamma_i = (1/sqrt(snr)) sum_m conj(u_i[m]) conj(d[m]) y[m], i < d.
/// The 1/sqrt(snr) factor makes gamma an unbiased estimate of the projection of h.
CoefficientEstimate estimate_coefficients(const BasisExpansion& basis, const ObservationBlock& obs,
                                          std::size_t d);

/// h~[m] = sum_{i<d} u_i[m] gamma_i.
ChannelBlock reconstruct_channel(const BasisExpansion& basis, const CoefficientEstimate& coeffs);

/// Karhunen-Loeve bias/variance split, bias from lambda'_d..lambda'_{Q-1}.
/// Throws DimensionError unless 1 <= d <= M, std::invalid_argument if snr <= 0.
MseBreakdown analytic_mse(const CovarianceModel& cov, std::size_t d, double snr, MseConvention convention);

/// Same split for an arbitrary orthonormal basis: bias^2 = tr(Sigma_h (I - U U^H)),
/// divided by M in the energy convention.
MseBreakdown projection_mse(const BasisExpansion& basis, const CovarianceModel& cov, std::size_t d,
                            double snr, MseConvention convention);

/// Exhaustive argmin over d in {1..Q} of analytic_mse; ties go to the smaller d.
std::size_t optimal_dimension(const CovarianceModel& cov, double snr, MseConvention convention);

/// Sigma_U = U_{0:d-1} Lambda' U^H, Sigma_N = U_{d:Q-1} Lambda' U^H + I/snr.
/// Throws DimensionError unless 1 <= d <= Q.
SubspacePartition partition_covariance(const CovarianceModel& cov, double snr, std::size_t d);

/// Channel realization for Monte Carlo trial `trial`.
using BlockGenerator = std::function<ChannelBlock(std::uint64_t trial)>;

/// Independent scatterer set per trial (block index = trial).
BlockGenerator scatterer_generator(const DopplerGrid& grid, std::size_t count, DopplerSpectrum spectrum,
                                   std::uint64_t seed);
/// Gaussian blocks with covariance Sigma_h, colored through its eigen-decomposition.
BlockGenerator gaussian_generator(const CovarianceModel& cov, std::uint64_t seed);
BlockGenerator zero_generator(std::size_t block_length);
BlockGenerator fixed_generator(ChannelBlock block);

struct MonteCarloOptions {
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    Noise noise = Noise::on;
};

struct MonteCarloEstimate {
    double mean;
    double standard_error;
    std::size_t trials;
};

/// Average of (1/M) sum_m |h[m] - h~[m]|^2 over trials with all-ones pilots.
/// Per-trial values are reduced in trial order, so the result is independent
/// of the thread count.
MonteCarloEstimate empirical_mse(const BasisExpansion& basis, const BlockGenerator& generator, std::size_t d,
                                 double snr, const MonteCarloOptions& options);

} // namespace subcap
