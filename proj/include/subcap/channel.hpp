#pragma once

#include "subcap/dps.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace subcap {

using cvec = Eigen::VectorXcd;
using cmat = Eigen::MatrixXcd;

inline constexpr double speed_of_light = 299792458.0;

/// User velocity v [m/s], carrier frequency f_c [Hz], symbol duration t_s [s].
struct MobilityParams {
    double velocity;
    double carrier_frequency;
    double symbol_duration;
    double c0 = speed_of_light;

    double nu_d() const { return velocity * carrier_frequency * symbol_duration / c0; }
    double wavelength() const { return c0 / carrier_frequency; }

    /// Throws std::invalid_argument if any field is out of range or nu_d() > 1/2.
    void validate() const;
};

enum class DopplerSpectrum { flat, jakes };

std::string to_string(DopplerSpectrum s);
DopplerSpectrum doppler_spectrum_from_string(const std::string& s);

struct ScattererSet {
    std::vector<std::complex<double>> gains;
    std::vector<double> dopplers;
    // Angles of arrival, present when drawn through the Jakes route.
    std::optional<std::vector<double>> angles;
    std::uint64_t seed = 0;

    std::size_t size() const { return gains.size(); }
};

struct ChannelBlock {
    cvec h;
    std::size_t size() const { return static_cast<std::size_t>(h.size()); }
};

struct ObservationBlock {
    cvec y;
    cvec symbols;
    double snr;
};

/**
 * Covariance of one fading block with its descending eigen-decomposition.
 *
 * rank() is the numerical rank (eigenvalues above rank_tol * lambda'_0),
 * unless the covariance was built with an explicit rank.
 */
class CovarianceModel {
public:
    /// Decomposes a Hermitian PSD matrix. Throws std::invalid_argument if it
    /// is not Hermitian (1e-12) or has eigenvalues below -1e-10 * max(1, lambda'_0).
    explicit CovarianceModel(cmat sigma, double rank_tol = 1e-12);

    /// Pre-decomposed form; eigenvalues must be descending.
    CovarianceModel(cmat sigma, Eigen::VectorXd eigenvalues, cmat eigenvectors, std::size_t rank);

    const cmat& matrix() const { return sigma_; }
    const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    const cmat& eigenvectors() const { return eigenvectors_; }
    std::size_t rank() const { return rank_; }
    std::size_t block_length() const { return static_cast<std::size_t>(sigma_.rows()); }

private:
    cmat sigma_;
    Eigen::VectorXd eigenvalues_;
    cmat eigenvectors_;
    std::size_t rank_;
};

/// Gains i.i.d. CN(0, 1/P); dopplers uniform on [-nu_D, nu_D] (flat) or
/// nu_D cos(alpha), alpha uniform on [0, 2 pi) (jakes). `block` selects an
/// independent realization for the same seed.
ScattererSet draw_scatterers(const DopplerGrid& grid, std::size_t count, DopplerSpectrum spectrum,
                             std::uint64_t seed, std::uint64_t block = 0);

/// h[m] = sum_p a_p exp(j 2 pi nu_p m).
ChannelBlock synthesize_block(const ScattererSet& scatterers, std::size_t block_length);

enum class CovarianceKind {
    conditional, // fixed dopplers, averaged over the gains
    ensemble,    // averaged over gains and dopplers
};

/// Conditional: Sigma(m,n) = (1/P) sum_p exp(j 2 pi nu_p (m-n)) for the set
/// drawn with `seed`. Ensemble: C/(2 nu_D) (flat) or J0(2 pi nu_D (m-n)) (jakes).
CovarianceModel covariance_from_scatterers(const DopplerGrid& grid, std::size_t count,
                                           DopplerSpectrum spectrum, std::uint64_t seed,
                                           CovarianceKind kind = CovarianceKind::conditional,
                                           double rank_tol = 1e-12);

/// Gain-averaged covariance of a given scatterer set; gains assumed E|a_p|^2 = 1/P.
CovarianceModel conditional_covariance(const ScattererSet& scatterers, std::size_t block_length,
                                       double rank_tol = 1e-12);

/// Sigma_h = C/(2 nu_D) with eigen-pairs taken from the Slepian basis; rank M.
CovarianceModel flat_doppler_covariance(const DopplerGrid& grid, const SlepianOptions& options = {});

/// Sigma_h + I/snr.
cmat effective_covariance(const CovarianceModel& cov, double snr);

enum class Noise { on, suppressed };

/// y[m] = sqrt(snr) h[m] d[m] + z[m] with z i.i.d. CN(0, 1).
/// Throws std::invalid_argument if |d[m]| != 1 or snr <= 0.
ObservationBlock simulate_observation(const ChannelBlock& block, const cvec& symbols, double snr,
                                      std::uint64_t seed, std::uint64_t trial = 0,
                                      Noise noise = Noise::on);

/// All-ones pilot block.
cvec pilot_symbols(std::size_t block_length);

// Exports. Scatterers as {P, gains[[re,im]...], dopplers[...], seed}.
std::string scatterers_to_json(const ScattererSet& s);
ScattererSet scatterers_from_json(const std::string& text);
/// `m,re_h,im_h[,re_y,im_y]`, %.12e.
std::string channel_csv(const ChannelBlock& block, const ObservationBlock* observation = nullptr);

} // namespace subcap
