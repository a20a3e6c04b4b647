#include "subcap/channel.hpp"

#include "subcap/error.hpp"
#include "subcap/random.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace subcap {

void MobilityParams::validate() const
{
    if (!(velocity >= 0.0) || !(carrier_frequency > 0.0) || !(symbol_duration > 0.0) || !(c0 > 0.0))
        throw std::invalid_argument("MobilityParams: need v >= 0, f_c > 0, T_S > 0, c0 > 0");
    if (nu_d() > 0.5)
        throw std::invalid_argument(
            fmt::format("MobilityParams: normalized Doppler bandwidth {} exceeds 1/2", nu_d()));
}

std::string to_string(DopplerSpectrum s)
{
    return s == DopplerSpectrum::flat ? "flat" : "jakes";
}

DopplerSpectrum doppler_spectrum_from_string(const std::string& s)
{
    if (s == "flat")
        return DopplerSpectrum::flat;
    if (s == "jakes")
        return DopplerSpectrum::jakes;
    throw std::invalid_argument("unknown Doppler spectrum '" + s + "' (expected flat or jakes)");
}

CovarianceModel::CovarianceModel(cmat sigma, double rank_tol) : sigma_(std::move(sigma))
{
    if (sigma_.rows() != sigma_.cols() || sigma_.rows() == 0)
        throw std::invalid_argument("CovarianceModel: matrix must be square and non-empty");
    const double scale = std::max(1.0, sigma_.cwiseAbs().maxCoeff());
    if ((sigma_ - sigma_.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw std::invalid_argument("CovarianceModel: matrix is not Hermitian");

    Eigen::SelfAdjointEigenSolver<cmat> solver(sigma_);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("CovarianceModel: eigensolver failed");
    eigenvalues_ = solver.eigenvalues().reverse();
    eigenvectors_ = solver.eigenvectors().rowwise().reverse();

    const double top = std::max(eigenvalues_(0), 0.0);
    if (eigenvalues_(eigenvalues_.size() - 1) < -1e-10 * std::max(1.0, top))
        throw std::invalid_argument("CovarianceModel: matrix is not positive semi-definite");
    eigenvalues_ = eigenvalues_.cwiseMax(0.0);

    rank_ = 0;
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i)
        if (top > 0.0 && eigenvalues_(i) > rank_tol * top)
            ++rank_;
}

CovarianceModel::CovarianceModel(cmat sigma, Eigen::VectorXd eigenvalues, cmat eigenvectors,
                                 std::size_t rank)
    : sigma_(std::move(sigma)),
      eigenvalues_(std::move(eigenvalues)),
      eigenvectors_(std::move(eigenvectors)),
      rank_(rank)
{
    const auto n = sigma_.rows();
    if (sigma_.cols() != n || eigenvalues_.size() != n || eigenvectors_.rows() != n ||
        eigenvectors_.cols() != n || rank_ > static_cast<std::size_t>(n))
        throw std::invalid_argument("CovarianceModel: inconsistent dimensions");
}

ScattererSet draw_scatterers(const DopplerGrid& grid, std::size_t count, DopplerSpectrum spectrum,
                             std::uint64_t seed, std::uint64_t block)
{
    if (count < 1)
        throw std::invalid_argument("draw_scatterers: need at least one scatterer");
    ScattererSet s;
    s.seed = seed;
    s.gains.resize(count);
    s.dopplers.resize(count);

    CounterRng gain_rng(seed, block, Stream::scatterer_gains);
    const double variance = 1.0 / static_cast<double>(count);
    for (auto& a : s.gains)
        a = complex_normal(gain_rng, variance);

    CounterRng doppler_rng(seed, block, Stream::scatterer_dopplers);
    const double nu = grid.nu_d();
    if (spectrum == DopplerSpectrum::flat) {
        std::uniform_real_distribution<double> u(-nu, nu);
        for (auto& d : s.dopplers)
            d = u(doppler_rng);
    } else {
        std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
        std::vector<double> angles(count);
        for (std::size_t p = 0; p < count; ++p) {
            angles[p] = u(doppler_rng);
            s.dopplers[p] = nu * std::cos(angles[p]);
        }
        s.angles = std::move(angles);
    }
    return s;
}

ChannelBlock synthesize_block(const ScattererSet& scatterers, std::size_t block_length)
{
    if (block_length < 1)
        throw std::invalid_argument("synthesize_block: block length must be >= 1");
    if (scatterers.gains.size() != scatterers.dopplers.size())
        throw std::invalid_argument("synthesize_block: gains and dopplers differ in length");
    ChannelBlock b{cvec::Zero(static_cast<Eigen::Index>(block_length))};
    for (std::size_t p = 0; p < scatterers.size(); ++p) {
        const double nu = scatterers.dopplers[p];
        for (std::size_t m = 0; m < block_length; ++m) {
            const double phase = 2.0 * std::numbers::pi * nu * static_cast<double>(m);
            b.h(static_cast<Eigen::Index>(m)) += scatterers.gains[p] * std::polar(1.0, phase);
        }
    }
    return b;
}

CovarianceModel conditional_covariance(const ScattererSet& scatterers, std::size_t block_length,
                                       double rank_tol)
{
    const auto n = static_cast<Eigen::Index>(block_length);
    const double weight = 1.0 / static_cast<double>(scatterers.size());
    // Toeplitz: only the lag matters.
    cvec lag = cvec::Zero(n);
    for (double nu : scatterers.dopplers)
        for (Eigen::Index k = 0; k < n; ++k)
            lag(k) += weight * std::polar(1.0, 2.0 * std::numbers::pi * nu * static_cast<double>(k));
    cmat sigma(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            sigma(i, j) = i >= j ? lag(i - j) : std::conj(lag(j - i));
    return CovarianceModel(std::move(sigma), rank_tol);
}

CovarianceModel flat_doppler_covariance(const DopplerGrid& grid, const SlepianOptions& options)
{
    const auto basis = compute_slepian_basis(grid, options);
    const double scale = 1.0 / (2.0 * grid.nu_d());
    cmat sigma = (build_c_matrix(grid) * scale).cast<std::complex<double>>();
    return CovarianceModel(std::move(sigma), basis.concentrations() * scale,
                           basis.vectors().cast<std::complex<double>>(), grid.block_length());
}

CovarianceModel covariance_from_scatterers(const DopplerGrid& grid, std::size_t count,
                                           DopplerSpectrum spectrum, std::uint64_t seed,
                                           CovarianceKind kind, double rank_tol)
{
    if (kind == CovarianceKind::conditional)
        return conditional_covariance(draw_scatterers(grid, count, spectrum, seed), grid.block_length(),
                                      rank_tol);
    if (spectrum == DopplerSpectrum::flat)
        return flat_doppler_covariance(grid);

    const auto n = static_cast<Eigen::Index>(grid.block_length());
    cmat sigma(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            sigma(i, j) = std::cyl_bessel_j(
                0.0, 2.0 * std::numbers::pi * grid.nu_d() * static_cast<double>(std::abs(i - j)));
    return CovarianceModel(std::move(sigma), rank_tol);
}

cmat effective_covariance(const CovarianceModel& cov, double snr)
{
    if (!(snr > 0.0))
        throw std::invalid_argument("effective_covariance: snr must be positive");
    const auto n = cov.matrix().rows();
    return cov.matrix() + cmat::Identity(n, n) / snr;
}

cvec pilot_symbols(std::size_t block_length)
{
    return cvec::Ones(static_cast<Eigen::Index>(block_length));
}

ObservationBlock simulate_observation(const ChannelBlock& block, const cvec& symbols, double snr,
                                      std::uint64_t seed, std::uint64_t trial, Noise noise)
{
    if (!(snr > 0.0))
        throw std::invalid_argument("simulate_observation: snr must be positive");
    if (symbols.size() != block.h.size())
        throw std::invalid_argument("simulate_observation: symbol block length mismatch");
    for (Eigen::Index m = 0; m < symbols.size(); ++m)
        if (std::abs(std::abs(symbols(m)) - 1.0) > 1e-12)
            throw std::invalid_argument(
                fmt::format("simulate_observation: |d[{}]| != 1 (peak-power constraint)", m));

    ObservationBlock obs{std::sqrt(snr) * block.h.cwiseProduct(symbols), symbols, snr};
    if (noise == Noise::on) {
        CounterRng rng(seed, trial, Stream::noise);
        for (Eigen::Index m = 0; m < obs.y.size(); ++m)
            obs.y(m) += complex_normal(rng, 1.0);
    }
    return obs;
}

} // namespace subcap
