#include "subcap/dps.hpp"

#include "subcap/error.hpp"
#include "subcap/numerics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace subcap {

DopplerGrid::DopplerGrid(std::size_t block_length, double nu_d)
    : m_(block_length), nu_d_(nu_d)
{
    if (block_length < 1)
        throw std::invalid_argument("DopplerGrid: block length must be >= 1");
    if (!(nu_d > 0.0 && nu_d <= 0.5))
        throw std::invalid_argument(fmt::format("DopplerGrid: nu_d = {} outside (0, 1/2]", nu_d));
}

SlepianBasis::SlepianBasis(DopplerGrid grid, Eigen::MatrixXd vectors, Eigen::VectorXd concentrations,
                           std::vector<bool> unresolved)
    : grid_(grid),
      vectors_(std::move(vectors)),
      concentrations_(std::move(concentrations)),
      unresolved_(std::move(unresolved))
{
    const auto m = static_cast<Eigen::Index>(grid_.block_length());
    if (vectors_.rows() != m || vectors_.cols() != m || concentrations_.size() != m ||
        unresolved_.size() != grid_.block_length())
        throw std::invalid_argument("SlepianBasis: inconsistent dimensions");
}

double SlepianBasis::log_concentration(std::size_t i) const
{
    return std::log(concentrations_(static_cast<Eigen::Index>(i)));
}

Eigen::VectorXd c_matrix_row(const DopplerGrid& grid)
{
    const std::size_t m = grid.block_length();
    const double nu = grid.nu_d();
    Eigen::VectorXd row(static_cast<Eigen::Index>(m));
    row(0) = 2.0 * nu;
    for (std::size_t k = 1; k < m; ++k) {
        const double kd = static_cast<double>(k);
        row(static_cast<Eigen::Index>(k)) = sin_pi(2.0 * kd * nu) / (std::numbers::pi * kd);
    }
    return row;
}

Eigen::MatrixXd build_c_matrix(const DopplerGrid& grid)
{
    const auto row = c_matrix_row(grid);
    const auto m = row.size();
    Eigen::MatrixXd c(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index l = 0; l < m; ++l)
            c(i, l) = row(std::abs(i - l));
    return c;
}

CommutingTridiagonal commuting_tridiagonal(const DopplerGrid& grid)
{
    const std::size_t m = grid.block_length();
    const double c = cos_pi(2.0 * grid.nu_d());
    CommutingTridiagonal t;
    t.diagonal.resize(static_cast<Eigen::Index>(m));
    t.off_diagonal.resize(static_cast<Eigen::Index>(m > 0 ? m - 1 : 0));
    for (std::size_t i = 0; i < m; ++i) {
        const double offset = (static_cast<double>(m) - 1.0) / 2.0 - static_cast<double>(i);
        t.diagonal(static_cast<Eigen::Index>(i)) = offset * offset * c;
    }
    for (std::size_t i = 1; i < m; ++i)
        t.off_diagonal(static_cast<Eigen::Index>(i - 1)) =
            static_cast<double>(i) * static_cast<double>(m - i) / 2.0;
    return t;
}

namespace {

void normalize_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        if (std::abs(v(k)) > 1e-12) {
            if (v(k) < 0.0)
                v = -v;
            return;
        }
    }
}

} // namespace

SlepianBasis compute_slepian_basis(const DopplerGrid& grid, const SlepianOptions& options)
{
    const std::size_t m = grid.block_length();
    if (m > options.max_size)
        throw SizeExceededError(fmt::format(
            "compute_slepian_basis: M = {} exceeds eigensolve cap {}; use the asymptotic law", m,
            options.max_size));
    const auto n = static_cast<Eigen::Index>(m);

    Eigen::MatrixXd vectors(n, n);
    if (m == 1) {
        vectors(0, 0) = 1.0;
    } else {
        const auto t = commuting_tridiagonal(grid);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
        solver.computeFromTridiagonal(t.diagonal, t.off_diagonal, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success)
            throw std::runtime_error("compute_slepian_basis: tridiagonal eigensolver failed");
        // Ascending eigenvalues of T; largest T eigenvalue pairs with lambda_0.
        vectors = solver.eigenvectors().rowwise().reverse();
    }
    for (Eigen::Index i = 0; i < n; ++i)
        normalize_sign(vectors.col(i));

    const Eigen::MatrixXd cv = build_c_matrix(grid) * vectors;
    Eigen::VectorXd lambda(n);
    std::vector<bool> unresolved(m, false);
    bool in_noise = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        double rq = vectors.col(i).dot(cv.col(i));
        if (rq < options.resolution)
            in_noise = true;
        if (in_noise) {
            unresolved[static_cast<std::size_t>(i)] = true;
            rq = std::max(rq, options.floor);
        }
        // Exact values are non-increasing and <= 1; remove ulp-level jitter.
        rq = std::min(rq, i == 0 ? 1.0 : lambda(i - 1));
        lambda(i) = rq;
    }
    return SlepianBasis(grid, std::move(vectors), std::move(lambda), std::move(unresolved));
}

double logistic_concentration(double b) { return std::exp(log_logistic_concentration(b)); }

double log_logistic_concentration(double b) { return -softplus(std::numbers::pi * b); }

EigAsymptotic eigenvalue_asymptotic(const DopplerGrid& grid, std::size_t index)
{
    if (grid.block_length() < 2)
        throw DomainError("eigenvalue_asymptotic: requires M >= 2 (log M = 0)");
    const double knee = grid.bandwidth_product();
    const double i = static_cast<double>(index);
    if (!(i > knee))
        throw DomainError(
            fmt::format("eigenvalue_asymptotic: index {} must exceed 2 nu_D M = {}", index, knee));
    const double b = std::numbers::pi * (i - knee) / std::log(static_cast<double>(grid.block_length()));
    const double log_lambda = log_logistic_concentration(b);
    return {index, b, std::exp(log_lambda), log_lambda};
}

std::size_t signal_space_dimension(const DopplerGrid& grid)
{
    return snapped_ceil(grid.bandwidth_product()) + 1;
}

std::string slepian_vectors_csv(const SlepianBasis& basis)
{
    const auto& v = basis.vectors();
    std::string out = "m";
    for (Eigen::Index i = 0; i < v.cols(); ++i)
        out += fmt::format(",u_{}", i);
    out += '\n';
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        out += fmt::format("{}", r);
        for (Eigen::Index i = 0; i < v.cols(); ++i)
            out += fmt::format(",{:.12e}", v(r, i));
        out += '\n';
    }
    return out;
}

std::string slepian_concentrations_csv(const SlepianBasis& basis)
{
    std::string out = "lambda\n";
    for (Eigen::Index i = 0; i < basis.concentrations().size(); ++i)
        out += fmt::format("{:.12e}\n", basis.concentrations()(i));
    return out;
}

} // namespace subcap
