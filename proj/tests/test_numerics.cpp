#include <catch_amalgamated.hpp>

#include "fockfit/numerics.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

using fockfit::scaled_legendre;
using fockfit::std_normal_cdf;
using fockfit::std_normal_quantile;

namespace {

// Reference normal CDF: Maclaurin series of erf in long double for |x| <= 3,
// Lentz continued fraction for erfc beyond.
long double erf_series(long double x)
{
    long double term = x, sum = x;
    for (int k = 1; k < 200; ++k) {
        term *= -x * x / k;
        const long double add = term / (2 * k + 1);
        sum += add;
        if (std::fabs(add) < 1e-22L)
            break;
    }
    return 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum;
}

long double erfc_continued_fraction(long double x)
{
    // erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    const long double tiny = 1e-300L;
    long double f = x, c = x, d = 0.0L;
    for (int k = 1; k < 500; ++k) {
        const long double a = k / 2.0L;
        d = x + a * d;
        if (std::fabs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0L / d;
        const long double delta = c * d;
        f *= delta;
        if (std::fabs(delta - 1.0L) < 1e-20L)
            break;
    }
    return std::exp(-x * x) / std::sqrt(std::numbers::pi_v<long double>) / f;
}

double reference_cdf(double z)
{
    const long double x = z / std::numbers::sqrt2_v<long double>;
    if (std::fabs(x) <= 3.0L)
        return static_cast<double>(0.5L * (1.0L + erf_series(x)));
    if (x > 0)
        return static_cast<double>(1.0L - 0.5L * erfc_continued_fraction(x));
    return static_cast<double>(0.5L * erfc_continued_fraction(-x));
}

double bisect_quantile(double p)
{
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (reference_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// P_n(x) = 2^{-n} sum_k (-1)^k C(n,k) C(2n-2k, n) x^{n-2k}
long double legendre_explicit(int n, long double x)
{
    auto binom = [](int a, int b) {
        long double r = 1.0L;
        for (int i = 1; i <= b; ++i)
            r = r * (a - b + i) / i;
        return r;
    };
    long double sum = 0.0L;
    for (int k = 0; 2 * k <= n; ++k)
        sum += ((k % 2) ? -1.0L : 1.0L) * binom(n, k) * binom(2 * n - 2 * k, n) *
               std::pow(x, n - 2 * k);
    return sum / std::pow(2.0L, n);
}

} // namespace

TEST_CASE("scaled_legendre: documented values", "[numerics][legendre]")
{
    SECTION("vacuum arguments give a unit impulse")
    {
        const auto g = scaled_legendre(0.0, 0.0, 3);
        REQUIRE(g.size() == 4);
        CHECK(g(0) == 1.0);
        CHECK(g(1) == 0.0);
        CHECK(g(2) == 0.0);
        CHECK(g(3) == 0.0);
    }
    SECTION("P_n(1) = 1")
    {
        const auto g = scaled_legendre(1.0, 1.0, 4);
        for (int n = 0; n <= 4; ++n)
            CHECK(g(n) == 1.0);
    }
    SECTION("negative u stays real: G_2 = -u/2 at c = 0")
    {
        const auto g = scaled_legendre(0.0, -4.0, 2);
        CHECK(g(0) == 1.0);
        CHECK(g(1) == 0.0);
        CHECK(g(2) == 2.0);
    }
    SECTION("G_0 = 1 and G_1 = c exactly")
    {
        const auto g = scaled_legendre(0.37, -12.5, 5);
        CHECK(g(0) == 1.0);
        CHECK(g(1) == 0.37);
    }
    SECTION("n_max = 0")
    {
        const auto g = scaled_legendre(3.0, 2.0, 0);
        REQUIRE(g.size() == 1);
        CHECK(g(0) == 1.0);
    }
}

TEST_CASE("scaled_legendre with u = 1 matches the explicit Legendre sum", "[numerics][legendre]")
{
    for (double x = -1.0; x <= 1.0 + 1e-12; x += 0.05) {
        const auto g = scaled_legendre(x, 1.0, 20);
        for (int n = 0; n <= 20; ++n)
            REQUIRE(g(n) == Catch::Approx(static_cast<double>(legendre_explicit(n, x)))
                                .margin(1e-12));
    }
}

TEST_CASE("scaled_legendre is homogeneous", "[numerics][legendre][property]")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> coef(-2.0, 2.0), scale(0.1, 5.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double c = coef(rng), u = 3.0 * coef(rng), s = scale(rng);
        const auto g = scaled_legendre(c, u, 30);
        const auto gs = scaled_legendre(s * c, s * s * u, 30);
        for (int n = 0; n <= 30; ++n) {
            // |G_n(c, u)| <= (|c| + sqrt|u|)^n bounds the scale of the cancellation.
            const double expected = std::pow(s, n) * g(n);
            const double scale = std::pow(s * (std::abs(c) + std::sqrt(std::abs(u))), n);
            REQUIRE(std::abs(gs(n) - expected) <= 1e-10 * std::max(scale, std::abs(expected)));
        }
    }
}

TEST_CASE("scaled_legendre stays finite across the supported envelope", "[numerics][legendre]")
{
    for (double vq : {1e-6, 1e-3, 0.5, 10.0, 1e6})
        for (double vp : {1e-6, 1e-3, 0.5, 10.0, 1e6}) {
            const double a = (2 * vq - 1) * (2 * vp - 1);
            const double b = (2 * vq + 1) * (2 * vp + 1);
            const double c = 4 * vq * vp - 1;
            const auto g = scaled_legendre(c / b, a / b, 64);
            REQUIRE(g.isFinite().all());
        }
}

TEST_CASE("std_normal_cdf", "[numerics][normal]")
{
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std_normal_cdf(1.959964) == Catch::Approx(0.975).margin(1e-6));

    SECTION("reflection identity")
    {
        for (double z = -8.0; z <= 8.0; z += 0.25)
            REQUIRE(std_normal_cdf(z) == Catch::Approx(1.0 - std_normal_cdf(-z)).margin(1e-15));
    }
    SECTION("agrees with the series / continued-fraction reference to 1e-12")
    {
        for (double z = -10.0; z <= 10.0; z += 0.037)
            REQUIRE(std::abs(std_normal_cdf(z) - reference_cdf(z)) <= 1e-12);
    }
    SECTION("monotone")
    {
        double prev = 0.0;
        for (double z = -9.0; z <= 9.0; z += 0.01) {
            const double v = std_normal_cdf(z);
            REQUIRE(v >= prev);
            prev = v;
        }
    }
}

TEST_CASE("std_normal_quantile", "[numerics][normal]")
{
    CHECK(std_normal_quantile(0.5) == 0.0);
    CHECK(std_normal_quantile(0.975) == Catch::Approx(1.959964).margin(1e-6));
    CHECK(std_normal_quantile(0.975) == Catch::Approx(bisect_quantile(0.975)).margin(1e-9));

    SECTION("domain errors")
    {
        CHECK_THROWS_AS(std_normal_quantile(0.0), std::domain_error);
        CHECK_THROWS_AS(std_normal_quantile(1.0), std::domain_error);
        CHECK_THROWS_AS(std_normal_quantile(-0.1), std::domain_error);
        CHECK_THROWS_AS(std_normal_quantile(std::nan("")), std::domain_error);
    }
    SECTION("symmetry")
    {
        for (double p = 0.001; p < 0.5; p += 0.0137)
            REQUIRE(std::abs(std_normal_quantile(p) + std_normal_quantile(1.0 - p)) <= 1e-10);
    }
    SECTION("round trip through the CDF on (1e-8, 1 - 1e-8)")
    {
        for (double lp = -8.0; lp < -0.302; lp += 0.05) {
            const double p = std::pow(10.0, lp);
            REQUIRE(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-10);
            REQUIRE(std::abs(std_normal_cdf(std_normal_quantile(1.0 - p)) - (1.0 - p)) <= 1e-10);
        }
        for (double p = 0.01; p < 1.0; p += 0.01)
            REQUIRE(std::abs(std_normal_cdf(std_normal_quantile(p)) - p) <= 1e-10);
    }
}
