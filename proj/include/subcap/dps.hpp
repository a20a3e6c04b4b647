#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace subcap {

/// Block length M and one-sided normalized Doppler bandwidth nu_D in (0, 1/2].
class DopplerGrid {
public:
    /// Throws std::invalid_argument unless M >= 1 and 0 < nu_d <= 1/2.
    DopplerGrid(std::size_t block_length, double nu_d);

    std::size_t block_length() const { return m_; }
    double nu_d() const { return nu_d_; }

    /// 2 nu_D M, the time-bandwidth product that sets the concentration knee.
    double bandwidth_product() const { return 2.0 * nu_d_ * static_cast<double>(m_); }

    bool operator==(const DopplerGrid&) const = default;

private:
    std::size_t m_;
    double nu_d_;
};

struct SlepianOptions {
    std::size_t max_size = 4096;
    // Rayleigh quotients below this are at the double-precision noise level.
    double resolution = 1e-15;
    double floor = 1e-300;
};

/**
 * Index-limited DPS (Slepian) sequences on {0..M-1}.
 *
 * Column i of vectors() is u_i; concentrations() holds lambda_i in
 * non-increasing order. Values flagged unresolved are below the double
 * precision noise level and only carry "very small" information; use
 * precise_log_concentration() when the actual magnitude matters.
 */
class SlepianBasis {
public:
    SlepianBasis(DopplerGrid grid, Eigen::MatrixXd vectors, Eigen::VectorXd concentrations,
                 std::vector<bool> unresolved);

    const DopplerGrid& grid() const { return grid_; }
    const Eigen::MatrixXd& vectors() const { return vectors_; }
    const Eigen::VectorXd& concentrations() const { return concentrations_; }
    bool unresolved(std::size_t i) const { return unresolved_.at(i); }
    std::size_t size() const { return static_cast<std::size_t>(concentrations_.size()); }

    double log_concentration(std::size_t i) const;

private:
    DopplerGrid grid_;
    Eigen::MatrixXd vectors_;
    Eigen::VectorXd concentrations_;
    std::vector<bool> unresolved_;
};

/// Sinc-kernel matrix: 2 nu_D on the diagonal, sin(2 pi k nu_D)/(pi k) at offset k.
Eigen::MatrixXd build_c_matrix(const DopplerGrid& grid);

/// First row of the symmetric Toeplitz matrix C.
Eigen::VectorXd c_matrix_row(const DopplerGrid& grid);

/**
 * Eigen-pairs of C via the commuting symmetric tridiagonal matrix.
 *
 * Eigenvalues of C cluster exponentially at 0 and 1, so C itself cannot
 * separate its eigenvectors in floating point. The tridiagonal matrix with
 * diagonal ((M-1)/2 - m)^2 cos(2 pi nu_D) and off-diagonal m(M-m)/2 has the
 * same eigenvectors with well separated eigenvalues; lambda_i is recovered as
 * the Rayleigh quotient u_i^T C u_i.
 *
 * Throws SizeExceededError when M exceeds options.max_size.
 */
SlepianBasis compute_slepian_basis(const DopplerGrid& grid, const SlepianOptions& options = {});

/// Diagonal and off-diagonal of the commuting tridiagonal matrix.
struct CommutingTridiagonal {
    Eigen::VectorXd diagonal;
    Eigen::VectorXd off_diagonal;
};
CommutingTridiagonal commuting_tridiagonal(const DopplerGrid& grid);

struct EigAsymptotic {
    std::size_t index;
    double b;
    double lambda_approx;
    double log_lambda_approx;
};

/// 1/(1 + e^{pi b}), and its logarithm evaluated without overflow.
double logistic_concentration(double b);
double log_logistic_concentration(double b);

/**
 * Large-M eigenvalue law lambda_i ~ 1/(1 + e^{pi b}) with
 * b = pi (i - 2 nu_D M) / log M.
 *
 * Throws DomainError if i <= 2 nu_D M or M < 2.
 */
EigAsymptotic eigenvalue_asymptotic(const DopplerGrid& grid, std::size_t index);

/// D' = ceil(2 nu_D M) + 1. Not clamped to M.
std::size_t signal_space_dimension(const DopplerGrid& grid);

struct PreciseOptions {
    // Upper bound on working precision in decimal digits.
    int max_digits = 20000;
    // Significant digits required in the returned value.
    int guard_digits = 30;
    // Upper bound on M^2 * digits for one attempt (about 1 ns per unit).
    double max_work = 3e10;
};

/**
 * log(lambda_i) computed in adaptive extended precision (MPFR).
 *
 * The eigenvector of the commuting tridiagonal matrix is refined by Rayleigh
 * quotient iteration and the concentration evaluated as u^T C u at a working
 * precision that exceeds |log10 lambda_i| by options.guard_digits.
 * For nu_D = 1/2 returns 0 (C = I). Throws SizeExceededError when the
 * required precision exceeds options.max_digits or options.max_work.
 */
double precise_log_concentration(const DopplerGrid& grid, std::size_t index,
                                 const PreciseOptions& options = {});

/// CSV exports: `m,u_0,...,u_{M-1}` and `lambda`, values in %.12e.
std::string slepian_vectors_csv(const SlepianBasis& basis);
std::string slepian_concentrations_csv(const SlepianBasis& basis);

} // namespace subcap
