#include "subcap/expansion.hpp"

#include "subcap/error.hpp"
#include "subcap/numerics.hpp"
#include "subcap/parallel.hpp"
#include "subcap/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace subcap {

std::string to_string(BasisKind k)
{
    switch (k) {
    case BasisKind::slepian: return "slepian";
    case BasisKind::fourier: return "fourier";
    case BasisKind::karhunen_loeve: return "karhunen_loeve";
    }
    return "unknown";
}

BasisKind basis_kind_from_string(const std::string& s)
{
    if (s == "slepian")
        return BasisKind::slepian;
    if (s == "fourier")
        return BasisKind::fourier;
    if (s == "karhunen_loeve" || s == "kl")
        return BasisKind::karhunen_loeve;
    throw std::invalid_argument("unknown basis '" + s + "' (expected slepian, fourier or karhunen_loeve)");
}

std::string to_string(MseConvention c) { return c == MseConvention::paper ? "paper" : "energy"; }

MseConvention mse_convention_from_string(const std::string& s)
{
    if (s == "paper")
        return MseConvention::paper;
    if (s == "energy")
        return MseConvention::energy;
    throw std::invalid_argument("unknown MSE convention '" + s + "' (expected paper or energy)");
}

BasisExpansion::BasisExpansion(BasisKind kind, cmat columns, std::optional<DopplerGrid> grid)
    : kind_(kind), columns_(std::move(columns)), grid_(grid)
{
    if (columns_.cols() > columns_.rows() || columns_.cols() == 0)
        throw std::invalid_argument("BasisExpansion: need 1 <= d_max <= M columns");
    const auto d = columns_.cols();
    const double err = (columns_.adjoint() * columns_ - cmat::Identity(d, d)).cwiseAbs().maxCoeff();
    if (err > 1e-8)
        throw std::invalid_argument(fmt::format("BasisExpansion: columns not orthonormal (error {:.3e})", err));
}

BasisExpansion kl_basis(const CovarianceModel& cov)
{
    return BasisExpansion(BasisKind::karhunen_loeve, cov.eigenvectors());
}

std::size_t fourier_dimension(const DopplerGrid& grid)
{
    return 2 * snapped_floor(grid.nu_d() * static_cast<double>(grid.block_length())) + 1;
}

BasisExpansion fourier_basis(const DopplerGrid& grid)
{
    const std::size_t m = grid.block_length();
    const std::size_t d = fourier_dimension(grid);
    if (d > m)
        throw DimensionError(fmt::format("fourier_basis: D^F = {} exceeds M = {}", d, m));
    const auto ml = static_cast<long long>(m);
    const double amplitude = 1.0 / std::sqrt(static_cast<double>(m));
    cmat u(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) {
        // i - D/2 + 1/2 is an integer because D is odd.
        const long long k = static_cast<long long>(i) - static_cast<long long>(d - 1) / 2;
        for (long long n = 0; n < ml; ++n) {
            const long long r = ((k * n) % ml + ml) % ml;
            u(n, static_cast<Eigen::Index>(i)) =
                std::polar(amplitude, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(m));
        }
    }
    return BasisExpansion(BasisKind::fourier, std::move(u), grid);
}

BasisExpansion slepian_expansion(const DopplerGrid& grid, const SlepianOptions& options)
{
    const auto basis = compute_slepian_basis(grid, options);
    return BasisExpansion(BasisKind::slepian, basis.vectors().cast<std::complex<double>>(), grid);
}

CoefficientEstimate estimate_coefficients(const BasisExpansion& basis, const ObservationBlock& obs, std::size_t d)
{
    if (d < 1 || d > basis.d_max())
        throw DimensionError(fmt::format("estimate_coefficients: d = {} outside [1, {}]", d, basis.d_max()));
    if (static_cast<std::size_t>(obs.y.size()) != basis.block_length())
        throw DimensionError("estimate_coefficients: observation length differs from basis length");
    const cvec derotated = obs.symbols.conjugate().cwiseProduct(obs.y) / std::sqrt(obs.snr);
    const auto cols = basis.columns().leftCols(static_cast<Eigen::Index>(d));
    return {cols.adjoint() * derotated, d};
}

ChannelBlock reconstruct_channel(const BasisExpansion& basis, const CoefficientEstimate& coeffs)
{
    if (coeffs.d_used > basis.d_max() || static_cast<std::size_t>(coeffs.gamma.size()) != coeffs.d_used)
        throw DimensionError("reconstruct_channel: coefficient count incompatible with basis");
    return {basis.columns().leftCols(static_cast<Eigen::Index>(coeffs.d_used)) * coeffs.gamma};
}

namespace {

void check_mse_args(std::size_t d, std::size_t m, double snr)
{
    if (d < 1 || d > m)
        throw DimensionError(fmt::format("subspace dimension d = {} outside [1, {}]", d, m));
    if (!(snr > 0.0))
        throw std::invalid_argument("snr must be positive");
}

double convention_scale(MseConvention convention, std::size_t m)
{
    return convention == MseConvention::energy ? 1.0 / static_cast<double>(m) : 1.0;
}

double noise_variance(std::size_t d, std::size_t m, double snr)
{
    return static_cast<double>(d) / static_cast<double>(m) / snr;
}

} // namespace

MseBreakdown analytic_mse(const CovarianceModel& cov, std::size_t d, double snr, MseConvention convention)
{
    const std::size_t m = cov.block_length();
    check_mse_args(d, m, snr);
    const auto& lambda = cov.eigenvalues();
    // Summed from the tail so optimal_dimension's suffix sums agree bit for bit.
    double tail = 0.0;
    for (std::size_t i = cov.rank(); i-- > d;)
        tail += lambda(static_cast<Eigen::Index>(i));
    const double bias = convention_scale(convention, m) * tail;
    const double var = noise_variance(d, m, snr);
    return {d, snr, bias, var, bias + var};
}

MseBreakdown projection_mse(const BasisExpansion& basis, const CovarianceModel& cov, std::size_t d, double snr,
                            MseConvention convention)
{
    const std::size_t m = cov.block_length();
    check_mse_args(d, m, snr);
    if (d > basis.d_max() || basis.block_length() != m)
        throw DimensionError("projection_mse: basis incompatible with covariance or d");
    const auto u = basis.columns().leftCols(static_cast<Eigen::Index>(d));
    const double captured = (u.adjoint() * cov.matrix() * u).trace().real();
    const double total = cov.matrix().trace().real();
    const double bias = convention_scale(convention, m) * std::max(0.0, total - captured);
    const double var = noise_variance(d, m, snr);
    return {d, snr, bias, var, bias + var};
}

std::size_t optimal_dimension(const CovarianceModel& cov, double snr, MseConvention convention)
{
    const std::size_t m = cov.block_length();
    check_mse_args(1, m, snr);
    const std::size_t q = std::max<std::size_t>(1, cov.rank());
    const double scale = convention_scale(convention, m);
    const auto& lambda = cov.eigenvalues();

    std::vector<double> tail(q + 1, 0.0);
    for (std::size_t i = cov.rank(); i-- > 0;)
        tail[i] = tail[i + 1] + lambda(static_cast<Eigen::Index>(i));

    std::size_t best = 1;
    double best_mse = scale * tail[1] + noise_variance(1, m, snr);
    for (std::size_t d = 2; d <= q; ++d) {
        const double mse = scale * tail[d] + noise_variance(d, m, snr);
        if (mse < best_mse) {
            best_mse = mse;
            best = d;
        }
    }
    return best;
}

SubspacePartition partition_covariance(const CovarianceModel& cov, double snr, std::size_t d)
{
    const std::size_t q = cov.rank();
    if (d < 1 || d > q)
        throw DimensionError(fmt::format("partition_covariance: d = {} outside [1, Q = {}]", d, q));
    if (!(snr > 0.0))
        throw std::invalid_argument("partition_covariance: snr must be positive");
    const auto& u = cov.eigenvectors();
    const Eigen::VectorXd lambda = cov.eigenvalues();
    const auto n = static_cast<Eigen::Index>(cov.block_length());
    const auto di = static_cast<Eigen::Index>(d);
    const auto qi = static_cast<Eigen::Index>(q);

    const auto head = u.leftCols(di);
    cmat sigma_u = head * lambda.head(di).asDiagonal() * head.adjoint();
    cmat sigma_n = cmat::Identity(n, n) / snr;
    if (qi > di) {
        const auto rest = u.middleCols(di, qi - di);
        sigma_n += rest * lambda.segment(di, qi - di).asDiagonal() * rest.adjoint();
    }
    return {std::move(sigma_u), std::move(sigma_n), d};
}

BlockGenerator scatterer_generator(const DopplerGrid& grid, std::size_t count, DopplerSpectrum spectrum,
                                   std::uint64_t seed)
{
    return [grid, count, spectrum, seed](std::uint64_t trial) {
        return synthesize_block(draw_scatterers(grid, count, spectrum, seed, trial), grid.block_length());
    };
}

BlockGenerator gaussian_generator(const CovarianceModel& cov, std::uint64_t seed)
{
    const cmat coloring = cov.eigenvectors() * cov.eigenvalues().cwiseSqrt().asDiagonal();
    return [coloring, seed](std::uint64_t trial) {
        CounterRng rng(seed, trial, Stream::gaussian_channel);
        cvec w(coloring.cols());
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w(i) = complex_normal(rng, 1.0);
        return ChannelBlock{coloring * w};
    };
}

BlockGenerator zero_generator(std::size_t block_length)
{
    return [block_length](std::uint64_t) { return ChannelBlock{cvec::Zero(static_cast<Eigen::Index>(block_length))}; };
}

BlockGenerator fixed_generator(ChannelBlock block)
{
    return [block = std::move(block)](std::uint64_t) { return block; };
}

MonteCarloEstimate empirical_mse(const BasisExpansion& basis, const BlockGenerator& generator, std::size_t d,
                                 double snr, const MonteCarloOptions& options)
{
    if (options.trials < 1)
        throw std::invalid_argument("empirical_mse: need at least one trial");
    if (d < 1 || d > basis.d_max())
        throw DimensionError(fmt::format("empirical_mse: d = {} outside [1, {}]", d, basis.d_max()));
    const std::size_t m = basis.block_length();
    const cvec pilots = pilot_symbols(m);

    std::vector<double> per_trial(options.trials);
    parallel_for(options.trials, options.threads, [&](std::size_t t) {
        const ChannelBlock h = generator(t);
        if (h.size() != m)
            throw DimensionError("empirical_mse: generator block length differs from basis");
        const auto obs = simulate_observation(h, pilots, snr, options.seed, t, options.noise);
        const auto estimate = reconstruct_channel(basis, estimate_coefficients(basis, obs, d));
        per_trial[t] = (h.h - estimate.h).squaredNorm() / static_cast<double>(m);
    });

    double sum = 0.0;
    for (double v : per_trial)
        sum += v;
    const double n = static_cast<double>(options.trials);
    const double mean = sum / n;
    double sq = 0.0;
    for (double v : per_trial)
        sq += (v - mean) * (v - mean);
    const double se = options.trials > 1 ? std::sqrt(sq / (n - 1.0) / n) : 0.0;
    return {mean, se, options.trials};
}

} // namespace subcap
