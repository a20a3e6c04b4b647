#include "oracles.hpp"

#include "subcap/capacity.hpp"
#include "subcap/error.hpp"
#include "subcap/expansion.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace subcap;
using std::numbers::ln10;
using std::numbers::pi;

namespace {

// log lambda_63 of C at M=64, nu_D=0.05 from a 320-digit dense eigensolve.
constexpr double exact_log_lambda_64 = -319.51042828047645;

} // namespace

TEST_CASE("euler constant")
{
    CHECK(euler_gamma == doctest::Approx(0.57721566490153286061).epsilon(1e-16));
    CHECK(std::round(euler_gamma * 1e4) / 1e4 == 0.5772);
}

TEST_CASE("smallest_eigenvalue_flat")
{
    SUBCASE("full band")
    {
        for (std::size_t m : {2u, 10u, 100u})
            for (auto method : {EigenMethod::asymptotic, EigenMethod::eigensolve})
                CHECK(smallest_eigenvalue_flat(DopplerGrid(m, 0.5), method) == 0.0);
    }
    SUBCASE("vanishing exponent")
    {
        const DopplerGrid g(2, 0.25);
        CHECK(tail_exponent(g) == 0.0);
        CHECK(smallest_eigenvalue_flat(g, EigenMethod::asymptotic) == doctest::Approx(0.0));
        // C(2, 1/4) = [[1/2, 1/pi], [1/pi, 1/2]]
        CHECK(smallest_eigenvalue_flat(g, EigenMethod::eigensolve) ==
              doctest::Approx(std::log((0.5 - 1.0 / pi) / 0.5)).epsilon(1e-12));
    }
    SUBCASE("tail approximations")
    {
        const DopplerGrid g(32, 0.1);
        const double x = tail_exponent(g);
        CHECK(x == doctest::Approx(pi * pi * (32 * 0.8 - 1) / std::log(32.0)));
        CHECK(smallest_eigenvalue_flat(g, EigenMethod::asymptotic, TailApproximation::exponential) ==
              doctest::Approx(-x - std::log(0.2)));
        CHECK(smallest_eigenvalue_flat(g, EigenMethod::asymptotic) ==
              doctest::Approx(-std::log1p(std::exp(x)) - std::log(0.2)));
    }
    SUBCASE("eigensolve matches the high-precision oracle")
    {
        const DopplerGrid g(64, 0.05);
        const double exact = smallest_eigenvalue_flat(g, EigenMethod::eigensolve);
        CHECK(exact == doctest::Approx(exact_log_lambda_64 - std::log(0.1)).epsilon(1e-10));
        // The large-M law overestimates the smallest eigenvalue of this block by
        // roughly 80 decades, so the two routes differ by more than half of |log lambda|.
        const double approx = smallest_eigenvalue_flat(g, EigenMethod::asymptotic);
        CHECK(approx > exact);
        CHECK(approx == doctest::Approx(-std::log1p(std::exp(tail_exponent(g))) - std::log(0.1)));
    }
    CHECK_THROWS_AS(smallest_eigenvalue_flat(DopplerGrid(1, 0.1), EigenMethod::asymptotic), DomainError);
}

TEST_CASE("capacity bounds")
{
    const double e_e = std::exp(std::numbers::e);
    CHECK(capacity_upper_bound(e_e, 0.0).bound_nats == doctest::Approx(-euler_gamma).epsilon(1e-14));
    const auto b = capacity_upper_bound_full_rank(DopplerGrid(2, 0.25), e_e, EigenMethod::asymptotic);
    CHECK(b.bound_nats == doctest::Approx(-euler_gamma));
    CHECK(b.regime == CapacityRegime::double_log_full_rank);
    CHECK(b.bound_bits() == doctest::Approx(-euler_gamma / std::numbers::ln2));
    CHECK_THROWS_AS(capacity_upper_bound(std::numbers::e, 0.0), DomainError);
    CHECK_THROWS_AS(capacity_upper_bound(1.0, 0.0), DomainError);

    SUBCASE("strictly increasing in snr")
    {
        const DopplerGrid g(16, 0.1);
        double prev = -INFINITY;
        for (double db = 4.35; db < 200.0; db += 0.5) {
            const double v =
                capacity_upper_bound_full_rank(g, std::pow(10.0, db / 10.0), EigenMethod::eigensolve).bound_nats;
            CHECK(v > prev);
            prev = v;
        }
    }
}

TEST_CASE("prelog_rank_deficient")
{
    CHECK(prelog_rank_deficient(100, 20) == boost::rational<long long>(4));
    CHECK(prelog_rank_deficient(2, 1) == boost::rational<long long>(1));
    CHECK(prelog_rank_deficient(64, 63) == boost::rational<long long>(1, 63));
    CHECK_THROWS_AS(prelog_rank_deficient(8, 8), DomainError);
    CHECK_THROWS_AS(prelog_rank_deficient(8, 0), DomainError);
}

TEST_CASE("snr_threshold_general")
{
    const std::vector<double> ones(7, 1.0);
    CHECK(snr_threshold_general(ones, 7).snr_th == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    const std::vector<double> quarter{1.0, 0.9, 0.5, 0.25};
    const auto th = snr_threshold_general(quarter, 4);
    CHECK(th.snr_th == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(th.log10_snr_th == doctest::Approx(0.0));

    SUBCASE("balance equation at M=32, nu_D=0.1")
    {
        const double log_lambda = precise_log_concentration(DopplerGrid(32, 0.1), 31);
        CHECK(log_lambda == doctest::Approx(-113.11414377800416).epsilon(1e-10));
        const auto r = snr_threshold_from_log(log_lambda, 32);
        CHECK(balance_residual(r, 32) < 1e-10);
    }
    SUBCASE("balance equation on eigensolved thresholds up to M=128")
    {
        for (std::size_t m : {2u, 5u, 16u, 33u, 64u, 128u})
            for (double nu : {0.01, 0.1, 0.27, 0.45, 0.5}) {
                const auto r = snr_threshold_flat_eigensolved(DopplerGrid(m, nu));
                CAPTURE(m);
                CAPTURE(nu);
                CHECK(std::isfinite(r.log10_snr_th));
                CHECK(balance_residual(r, m) < 1e-10);
            }
    }
    CHECK_THROWS(snr_threshold_general(std::vector<double>{1.0, 0.0}, 2));
}

TEST_CASE("snr_threshold_flat")
{
    for (std::size_t m : {2u, 10u, 100u, 5000u})
        CHECK(snr_threshold_flat(DopplerGrid(m, 0.5)).snr_th == 1.0 / double(m));
    CHECK(snr_threshold_flat(DopplerGrid(100, 0.5)).snr_th == 0.01);
    CHECK(snr_threshold_flat(DopplerGrid(2, 0.25)).snr_th == 0.5);

    SUBCASE("realistic block length stays finite in log domain")
    {
        const auto r = snr_threshold_flat(DopplerGrid(5000, 0.02));
        // 50-digit evaluation of log10((0.04/5000)(1 + e^x)).
        CHECK(r.log10_snr_th == doctest::Approx(2410.020832040135689).epsilon(1e-13));
        CHECK(std::isinf(r.snr_th));
        const double leading = std::log10(0.04 / 5000) + pi * pi * (5000 * 0.96 - 1) / (std::log(5000.0) * ln10);
        CHECK(r.log10_snr_th == doctest::Approx(leading).epsilon(1e-12));
    }
    SUBCASE("eigensolved threshold at M=64, nu_D=0.05")
    {
        const auto r = snr_threshold_flat_eigensolved(DopplerGrid(64, 0.05));
        const double expected = -(exact_log_lambda_64 - std::log(0.1) + std::log(64.0)) / ln10;
        CHECK(r.log10_snr_th == doctest::Approx(expected).epsilon(1e-10));
        CHECK(r.log10_snr_th == doctest::Approx(135.95).epsilon(1e-3));
    }
}

TEST_CASE("threshold routes: measured agreement")
{
    // The large-M tail law is exact in the fast-fading limit and, from M = 64 on,
    // increasingly optimistic as nu_D shrinks.
    for (std::size_t m : {4u, 16u, 64u, 256u}) {
        const DopplerGrid full(m, 0.5);
        CHECK(snr_threshold_flat(full).log10_snr_th ==
              doctest::Approx(snr_threshold_flat_eigensolved(full).log10_snr_th).epsilon(1e-12));
        for (double nu : {0.02, 0.05, 0.1, 0.2, 0.3, 0.4}) {
            const DopplerGrid g(m, nu);
            const double approx = snr_threshold_flat(g).log10_snr_th;
            const double exact = snr_threshold_flat_eigensolved(g).log10_snr_th;
            CAPTURE(m);
            CAPTURE(nu);
            if (m >= 64)
                CHECK(exact > approx);
        }
    }
    const DopplerGrid near_full(8, 0.4);
    CHECK(std::abs(snr_threshold_flat(near_full).log10_snr_th -
                   snr_threshold_flat_eigensolved(near_full).log10_snr_th) <
          0.2 * snr_threshold_flat_eigensolved(near_full).log10_snr_th);
}

TEST_CASE("threshold separates the dimension regimes")
{
    // The balance equation follows from bias^2 = sum lambda'_i (paper convention).
    for (auto [m, nu] : {std::pair<std::size_t, double>{8, 0.4}, {16, 0.45}, {32, 0.48}, {64, 0.5}, {128, 0.5},
                         {128, 0.499}, {4, 0.3}}) {
        const auto cov = flat_doppler_covariance(DopplerGrid(m, nu));
        std::vector<double> lambda(cov.eigenvalues().data(), cov.eigenvalues().data() + m);
        const double snr_th = snr_threshold_general(lambda, m).snr_th;
        CAPTURE(m);
        CAPTURE(nu);
        CHECK(optimal_dimension(cov, snr_th * (1 + 1e-6), MseConvention::paper) == m);
        CHECK(optimal_dimension(cov, snr_th * 10.0, MseConvention::paper) == m);
        CHECK(optimal_dimension(cov, snr_th * (1 - 1e-6), MseConvention::paper) < m);
    }
}

TEST_CASE("block length from stationarity")
{
    CHECK(block_length_from_stationarity(100, 0.02) == 5000);
    CHECK(block_length_from_stationarity(1, 0.5) == 2);
    CHECK(block_length_from_stationarity(10, 0.3) == 33);
    CHECK(block_length_from_stationarity(100, 0.5) == 200);
    CHECK_THROWS_AS(block_length_from_stationarity(0.1, 0.2), DomainError);
    const auto model = stationarity_model(100, 0.02);
    CHECK(model.m_block == 5000);

    // 100 wavelengths at 2 GHz, 30 m/s, 1 us symbols.
    const MobilityParams urban{30.0, 2e9, 1e-6};
    CHECK(block_length_from_mobility(100, urban) ==
          std::size_t(std::floor(100 * urban.wavelength() / (30.0 * 1e-6))));
}

TEST_CASE("threshold curves")
{
    const std::vector<double> half{0.5};
    const auto fast = threshold_curve(100, half);
    REQUIRE(fast.size() == 1);
    CHECK(fast[0].m_block == 200);
    CHECK(fast[0].log10_snr_th == doctest::Approx(std::log10(1.0 / 200)));
    CHECK(fast[0].snr_th_db() == doctest::Approx(-23.0103).epsilon(1e-5));

    const auto grid = log_spaced(1e-3, 0.49, 200);
    REQUIRE(grid.size() == 200);
    CHECK(grid.front() == 1e-3);
    CHECK(grid.back() == 0.49);

    for (double delta : {1.0, 10.0, 100.0}) {
        const auto curve = threshold_curve(delta, grid);
        REQUIRE(curve.size() == 200);
        std::size_t ok = 0;
        for (std::size_t k = 0; k < curve.size(); ++k) {
            CHECK(std::isfinite(curve[k].log10_snr_th));
            if (k == 0)
                continue;
            if (curve[k].log10_snr_th <= curve[k - 1].log10_snr_th)
                ++ok;
            else
                CHECK(curve[k].m_block == 2); // the law rises with nu_D at M = 2
        }
        CHECK(curve.front().log10_snr_th > curve.back().log10_snr_th);
        CAPTURE(delta);
        if (delta == 1.0)
            CHECK(ok == 187);
        else
            CHECK(ok == 199);
    }

    // Endpoint ordering by delta holds from nu_D ~ 0.495 upward; at 0.49 the
    // delta = 100 block (M = 204) still has a positive tail exponent.
    auto at = [](double delta, double nu) {
        const std::vector<double> g{nu};
        return threshold_curve(delta, g)[0].log10_snr_th;
    };
    for (double nu : {0.495, 0.499, 0.5}) {
        CHECK(at(1, nu) > at(10, nu));
        CHECK(at(10, nu) > at(100, nu));
    }
    CHECK(at(100, 0.49) > at(1, 0.49));

    const std::vector<double> pair{1e-3, 0.4};
    const auto c = threshold_curve(100, pair);
    CHECK(c[0].log10_snr_th > c[1].log10_snr_th + 100.0);

    const std::vector<double> too_fast{0.6};
    CHECK_THROWS_AS(threshold_curve(1.0, too_fast), std::exception);
}
