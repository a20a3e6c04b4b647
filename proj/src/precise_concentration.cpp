#include "subcap/dps.hpp"
#include "subcap/error.hpp"

#include <fmt/format.h>
#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace subcap {

namespace {

constexpr mpfr_rnd_t rnd = MPFR_RNDN;

class Big {
public:
    explicit Big(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
    ~Big() { mpfr_clear(v_); }
    Big(const Big&) = delete;
    Big& operator=(const Big&) = delete;

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }

private:
    mpfr_t v_;
};

class BigVec {
public:
    BigVec(std::size_t n, mpfr_prec_t prec) : n_(n), data_(new mpfr_t[n])
    {
        for (std::size_t i = 0; i < n_; ++i)
            mpfr_init2(data_[i], prec);
    }
    ~BigVec()
    {
        for (std::size_t i = 0; i < n_; ++i)
            mpfr_clear(data_[i]);
    }
    BigVec(const BigVec&) = delete;
    BigVec& operator=(const BigVec&) = delete;

    mpfr_ptr operator[](std::size_t i) { return data_[i]; }
    mpfr_srcptr operator[](std::size_t i) const { return data_[i]; }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::unique_ptr<mpfr_t[]> data_;
};

// Number of eigenvalues of the tridiagonal matrix strictly below x.
std::size_t sturm_count(const CommutingTridiagonal& t, double x)
{
    const auto n = t.diagonal.size();
    const double tiny = 1e-300;
    std::size_t count = 0;
    double q = t.diagonal(0) - x;
    for (Eigen::Index j = 0;; ++j) {
        if (q == 0.0)
            q = -tiny;
        if (q < 0.0)
            ++count;
        if (j + 1 == n)
            break;
        const double e = t.off_diagonal(j);
        q = t.diagonal(j + 1) - x - e * e / q;
    }
    return count;
}

// Bisection for the k-th smallest eigenvalue (0-based) in double precision.
double bisect_eigenvalue(const CommutingTridiagonal& t, std::size_t k)
{
    const auto n = t.diagonal.size();
    double lo = t.diagonal(0), hi = t.diagonal(0);
    for (Eigen::Index j = 0; j < n; ++j) {
        double radius = 0.0;
        if (j > 0)
            radius += std::abs(t.off_diagonal(j - 1));
        if (j + 1 < n)
            radius += std::abs(t.off_diagonal(j));
        lo = std::min(lo, t.diagonal(j) - radius);
        hi = std::max(hi, t.diagonal(j) + radius);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));
    lo -= 1e-9 * scale + 1.0;
    hi += 1e-9 * scale + 1.0;
    for (int it = 0; it < 300 && hi - lo > 4e-16 * scale; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_count(t, mid) > k)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

struct ExactTridiagonal {
    BigVec diagonal;
    BigVec off_diagonal;
};

/// Solves (T - shift I) x = rhs in place using tridiagonal LU without pivoting.
void shifted_solve(ExactTridiagonal& t, mpfr_srcptr shift, BigVec& x, mpfr_prec_t prec)
{
    const std::size_t n = x.size();
    BigVec cprime(n, prec);
    Big denom(prec), tmp(prec), tiny(prec);
    mpfr_set_ui_2exp(tiny.get(), 1, -static_cast<mpfr_exp_t>(prec) - 64, rnd);

    mpfr_sub(denom.get(), t.diagonal[0], shift, rnd);
    if (mpfr_zero_p(denom.get()))
        mpfr_set(denom.get(), tiny.get(), rnd);
    for (std::size_t i = 0;; ++i) {
        if (i + 1 < n)
            mpfr_div(cprime[i], t.off_diagonal[i], denom.get(), rnd);
        mpfr_div(x[i], x[i], denom.get(), rnd);
        if (i + 1 == n)
            break;
        // denom_{i+1} = d_{i+1} - shift - e_i c'_i ; x_{i+1} -= e_i x_i
        mpfr_mul(tmp.get(), t.off_diagonal[i], cprime[i], rnd);
        mpfr_sub(denom.get(), t.diagonal[i + 1], shift, rnd);
        mpfr_sub(denom.get(), denom.get(), tmp.get(), rnd);
        if (mpfr_zero_p(denom.get()))
            mpfr_set(denom.get(), tiny.get(), rnd);
        mpfr_mul(tmp.get(), t.off_diagonal[i], x[i], rnd);
        mpfr_sub(x[i + 1], x[i + 1], tmp.get(), rnd);
    }
    for (std::size_t i = n - 1; i-- > 0;) {
        mpfr_mul(tmp.get(), cprime[i], x[i + 1], rnd);
        mpfr_sub(x[i], x[i], tmp.get(), rnd);
    }
}

void normalize(BigVec& x, mpfr_prec_t prec)
{
    Big norm(prec), sq(prec);
    mpfr_set_zero(norm.get(), 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
        mpfr_sqr(sq.get(), x[i], rnd);
        mpfr_add(norm.get(), norm.get(), sq.get(), rnd);
    }
    mpfr_sqrt(norm.get(), norm.get(), rnd);
    for (std::size_t i = 0; i < x.size(); ++i)
        mpfr_div(x[i], x[i], norm.get(), rnd);
}

// Rayleigh quotient u^T T u and residual norm ||T u - rq u||.
void tridiagonal_rayleigh(ExactTridiagonal& t, BigVec& u, mpfr_ptr rq, mpfr_ptr residual,
                          mpfr_prec_t prec)
{
    const std::size_t n = u.size();
    BigVec tu(n, prec);
    Big tmp(prec);
    for (std::size_t i = 0; i < n; ++i) {
        mpfr_mul(tu[i], t.diagonal[i], u[i], rnd);
        if (i > 0) {
            mpfr_mul(tmp.get(), t.off_diagonal[i - 1], u[i - 1], rnd);
            mpfr_add(tu[i], tu[i], tmp.get(), rnd);
        }
        if (i + 1 < n) {
            mpfr_mul(tmp.get(), t.off_diagonal[i], u[i + 1], rnd);
            mpfr_add(tu[i], tu[i], tmp.get(), rnd);
        }
    }
    mpfr_set_zero(rq, 1);
    for (std::size_t i = 0; i < n; ++i) {
        mpfr_mul(tmp.get(), u[i], tu[i], rnd);
        mpfr_add(rq, rq, tmp.get(), rnd);
    }
    mpfr_set_zero(residual, 1);
    for (std::size_t i = 0; i < n; ++i) {
        mpfr_mul(tmp.get(), rq, u[i], rnd);
        mpfr_sub(tmp.get(), tu[i], tmp.get(), rnd);
        mpfr_sqr(tmp.get(), tmp.get(), rnd);
        mpfr_add(residual, residual, tmp.get(), rnd);
    }
    mpfr_sqrt(residual, residual, rnd);
}

struct Attempt {
    double log_lambda; // NaN when u^T C u was not positive
    double log10_magnitude;
};

Attempt concentration_at_precision(const DopplerGrid& grid, std::size_t index, int digits)
{
    const std::size_t m = grid.block_length();
    const auto prec = static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 32;

    Big pi(prec), w(prec), tmp(prec), cosine(prec);
    mpfr_const_pi(pi.get(), rnd);
    mpfr_set_d(w.get(), grid.nu_d(), rnd);

    ExactTridiagonal t{BigVec(m, prec), BigVec(m > 1 ? m - 1 : 0, prec)};
    mpfr_mul(tmp.get(), pi.get(), w.get(), rnd);
    mpfr_mul_2ui(tmp.get(), tmp.get(), 1, rnd);
    mpfr_cos(cosine.get(), tmp.get(), rnd);
    for (std::size_t i = 0; i < m; ++i) {
        // ((M-1)/2 - i)^2 = (M - 1 - 2i)^2 / 4
        const long offset = static_cast<long>(m) - 1 - 2 * static_cast<long>(i);
        mpfr_set_si(tmp.get(), offset, rnd);
        mpfr_sqr(tmp.get(), tmp.get(), rnd);
        mpfr_div_2ui(tmp.get(), tmp.get(), 2, rnd);
        mpfr_mul(t.diagonal[i], tmp.get(), cosine.get(), rnd);
    }
    for (std::size_t i = 1; i < m; ++i) {
        mpfr_set_ui(tmp.get(), static_cast<unsigned long>(i), rnd);
        mpfr_mul_ui(tmp.get(), tmp.get(), static_cast<unsigned long>(m - i), rnd);
        mpfr_div_2ui(t.off_diagonal[i - 1], tmp.get(), 1, rnd);
    }

    // Shift from double bisection; T is indexed ascending, lambda descending.
    const auto t_double = commuting_tridiagonal(grid);
    const std::size_t ascending = m - 1 - index;
    const double shift0 = bisect_eigenvalue(t_double, ascending);
    const double t_scale = std::max(t_double.diagonal.cwiseAbs().maxCoeff(),
                                    t_double.off_diagonal.cwiseAbs().maxCoeff());

    BigVec u(m, prec);
    for (std::size_t i = 0; i < m; ++i)
        mpfr_set_d(u[i], 1.0 + static_cast<double>(i) / static_cast<double>(m) +
                             0.25 * std::sin(static_cast<double>(3 * i + 1)),
                   rnd);
    normalize(u, prec);

    Big shift(prec), residual(prec), tolerance(prec);
    mpfr_set_d(shift.get(), shift0, rnd);
    for (int it = 0; it < 2; ++it) {
        shifted_solve(t, shift.get(), u, prec);
        normalize(u, prec);
    }
    mpfr_set_d(tolerance.get(), t_scale * static_cast<double>(m), rnd);
    mpfr_mul_2si(tolerance.get(), tolerance.get(), -static_cast<long>(prec) + 16, rnd);
    for (int it = 0; it < 40; ++it) {
        tridiagonal_rayleigh(t, u, shift.get(), residual.get(), prec);
        if (mpfr_lessequal_p(residual.get(), tolerance.get()))
            break;
        shifted_solve(t, shift.get(), u, prec);
        normalize(u, prec);
    }
    const double converged = mpfr_get_d(shift.get(), rnd);
    if (std::abs(converged - shift0) > 1e-7 * (t_scale + 1.0))
        throw std::runtime_error(fmt::format(
            "precise_log_concentration: refinement left eigenvalue {} of the commuting matrix", index));

    // c_k = sin(2 pi k W) / (pi k)
    BigVec c(m, prec);
    mpfr_mul_2ui(c[0], w.get(), 1, rnd);
    for (std::size_t k = 1; k < m; ++k) {
        mpfr_mul_ui(tmp.get(), w.get(), static_cast<unsigned long>(2 * k), rnd);
        mpfr_mul(tmp.get(), tmp.get(), pi.get(), rnd);
        mpfr_sin(c[k], tmp.get(), rnd);
        mpfr_mul_ui(tmp.get(), pi.get(), static_cast<unsigned long>(k), rnd);
        mpfr_div(c[k], c[k], tmp.get(), rnd);
    }

    // u^T C u = c_0 sum u^2 + 2 sum_k c_k r_k,  r_k = sum_i u_i u_{i+k}
    Big acc(prec), lag(prec), prod(prec);
    mpfr_set_zero(acc.get(), 1);
    for (std::size_t k = 0; k < m; ++k) {
        mpfr_set_zero(lag.get(), 1);
        for (std::size_t i = 0; i + k < m; ++i) {
            mpfr_mul(prod.get(), u[i], u[i + k], rnd);
            mpfr_add(lag.get(), lag.get(), prod.get(), rnd);
        }
        mpfr_mul(lag.get(), lag.get(), c[k], rnd);
        if (k > 0)
            mpfr_mul_2ui(lag.get(), lag.get(), 1, rnd);
        mpfr_add(acc.get(), acc.get(), lag.get(), rnd);
    }

    if (mpfr_sgn(acc.get()) <= 0)
        return {std::nan(""), -static_cast<double>(digits)};
    mpfr_log(tmp.get(), acc.get(), rnd);
    const double log_lambda = mpfr_get_d(tmp.get(), rnd);
    return {log_lambda, log_lambda / std::log(10.0)};
}

} // namespace

double precise_log_concentration(const DopplerGrid& grid, std::size_t index, const PreciseOptions& options)
{
    const std::size_t m = grid.block_length();
    if (index >= m)
        throw DimensionError(fmt::format("precise_log_concentration: index {} >= M = {}", index, m));
    if (grid.nu_d() == 0.5)
        return 0.0;
    if (m == 1)
        return std::log(2.0 * grid.nu_d());

    // The asymptotic law only gives a rough starting point; the tail can be
    // many orders of magnitude smaller, so precision adapts below.
    double estimate = 0.0;
    if (static_cast<double>(index) > grid.bandwidth_product())
        estimate = -eigenvalue_asymptotic(grid, index).log_lambda_approx / std::log(10.0);
    const int size_digits = static_cast<int>(std::ceil(std::log10(static_cast<double>(m)))) + 2;
    int digits = static_cast<int>(std::ceil(2.0 * estimate)) + options.guard_digits + size_digits;

    const double md = static_cast<double>(m);
    while (digits <= options.max_digits) {
        if (md * md * digits > options.max_work)
            throw SizeExceededError(fmt::format(
                "precise_log_concentration: lambda_{} for M = {}, nu_D = {} needs at least {} digits, "
                "beyond the work limit",
                index, m, grid.nu_d(), digits));
        const Attempt a = concentration_at_precision(grid, index, digits);
        const double needed = -a.log10_magnitude + options.guard_digits + size_digits;
        if (!std::isnan(a.log_lambda) && needed <= digits)
            return a.log_lambda;
        digits = std::max(2 * digits, static_cast<int>(std::ceil(needed)) + 16);
    }
    throw SizeExceededError(fmt::format(
        "precise_log_concentration: lambda_{} for M = {}, nu_D = {} needs more than {} digits", index, m,
        grid.nu_d(), options.max_digits));
}

} // namespace subcap
