#include <catch_amalgamated.hpp>

#include "fockfit/sampling.hpp"

#include <cmath>
#include <set>

using namespace fockfit;

namespace {

FockDistribution thermal(double nbar, int n_max = 20)
{
    return fock_distribution(to_variances(SqueezedThermalState{0.0, nbar}), n_max);
}

struct SampleMoments {
    double mean = 0.0;
    double var = 0.0;
};

template <typename Draw>
SampleMoments sample_moments(int reps, Draw draw)
{
    double s = 0.0, ss = 0.0;
    for (int i = 0; i < reps; ++i) {
        const double x = static_cast<double>(draw());
        s += x;
        ss += x * x;
    }
    SampleMoments m;
    m.mean = s / reps;
    m.var = (ss - reps * m.mean * m.mean) / (reps - 1);
    return m;
}

// Upper 0.1% point of chi-square with 21 degrees of freedom.
constexpr double kChiSquare21At0001 = 46.797038041561315;

} // namespace

TEST_CASE("vacuum always lands in bin 0", "[sampling]")
{
    const auto d = fock_distribution(QuadratureVariances{}, 20);
    const auto h = sample_histogram(d, 12345, SeedSpec{1, 0});
    REQUIRE(is_valid(h));
    CHECK(h.counts[0] == 12345);
    CHECK(h.overflow_count == 0);
    CHECK(h.total == 12345);
}

TEST_CASE("a single shot is a single count", "[sampling]")
{
    const auto d = thermal(2.0);
    for (std::uint64_t i = 0; i < 200; ++i) {
        const auto h = sample_histogram(d, 1, SeedSpec{5, i});
        REQUIRE(h.total == 1);
        std::int64_t sum = h.overflow_count;
        for (auto k : h.counts)
            sum += k;
        REQUIRE(sum == 1);
    }
}

TEST_CASE("bin 0 of a thermal state is within 5 sigma", "[sampling][statistical]")
{
    const auto d = thermal(1.0);
    const std::int64_t n = 100000;
    const auto h = sample_histogram(d, n, SeedSpec{77, 3});
    const double p = 0.5;
    const double sigma = std::sqrt(n * p * (1 - p));
    CHECK(std::abs(h.counts[0] - n * p) < 5 * sigma);
}

TEST_CASE("sampling is reproducible and seed-sensitive", "[sampling][determinism]")
{
    const auto d = fock_distribution(to_variances(SqueezedThermalState{1.5, 0.1}), 20);
    const auto a = sample_histogram(d, 10000, SeedSpec{42, 7});
    const auto b = sample_histogram(d, 10000, SeedSpec{42, 7});
    CHECK(a.counts == b.counts);
    CHECK(a.overflow_count == b.overflow_count);
    const auto c = sample_histogram(d, 10000, SeedSpec{42, 8});
    const auto e = sample_histogram(d, 10000, SeedSpec{43, 7});
    CHECK(a.counts != c.counts);
    CHECK(a.counts != e.counts);
}

TEST_CASE("marginal bin counts are binomial", "[sampling][statistical]")
{
    const auto d = thermal(2.0);
    const int reps = 1000;
    const std::int64_t n = 1000;
    for (int bin : {0, 1, 5, 10}) {
        const double p = d.probs(bin);
        std::uint64_t i = 0;
        const auto m = sample_moments(reps, [&] {
            return sample_histogram(d, n, SeedSpec{314, i++}).counts[bin];
        });
        const double mean = n * p, var = n * p * (1 - p);
        CAPTURE(bin);
        CHECK(std::abs(m.mean - mean) < 5 * std::sqrt(var / reps));
        // sample variance has relative sd about sqrt(2 / reps)
        CHECK(std::abs(m.var / var - 1.0) < 5 * std::sqrt(2.0 / reps));
    }
}

TEST_CASE("pooled histogram passes a chi-square test", "[sampling][statistical]")
{
    const auto d = thermal(2.0);
    const auto bins = d.bins();
    Eigen::ArrayXd pooled = Eigen::ArrayXd::Zero(bins.size());
    std::int64_t total = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        const auto h = sample_histogram(d, 1000, SeedSpec{2718, i});
        pooled += h.bin_counts();
        total += h.total;
    }
    const Eigen::ArrayXd expected = bins * static_cast<double>(total);
    REQUIRE(expected.minCoeff() >= 5.0);
    const double chi2 = ((pooled - expected).square() / expected).sum();
    CHECK(chi2 < kChiSquare21At0001);
}

TEST_CASE("distinct streams give distinct data", "[sampling]")
{
    const auto d = thermal(2.0);
    std::set<std::vector<std::int64_t>> seen;
    for (std::uint64_t i = 0; i < 100; ++i)
        seen.insert(sample_histogram(d, 10000, SeedSpec{0, i}).counts);
    CHECK(seen.size() == 100);

    const SeedSpec root{9, 0};
    CHECK(root.child(0).stream_index == 0);
    CHECK(root.child(5).stream_index == 5);
    CHECK(root.child(0).master_seed != root.master_seed);
    CHECK(root.child(3).child(2).master_seed != root.child(2).child(3).master_seed);
}

TEST_CASE("binomial sampler moments on both code paths", "[sampling][binomial]")
{
    struct Case {
        std::int64_t n;
        double p;
    };
    // n p < 10 uses inversion, larger means use the rejection sampler.
    for (const Case c : {Case{20, 0.3}, Case{1000, 0.001}, Case{100000, 0.5},
                         Case{1000000, 0.02}, Case{5000, 0.93}}) {
        RandomStream rs(SeedSpec{static_cast<std::uint64_t>(c.n), 1});
        const int reps = 20000;
        const auto m = sample_moments(reps, [&] { return rs.binomial(c.n, c.p); });
        const double mean = c.n * c.p, var = c.n * c.p * (1 - c.p);
        CAPTURE(c.n, c.p);
        CHECK(std::abs(m.mean - mean) < 5 * std::sqrt(var / reps));
        CHECK(std::abs(m.var / var - 1.0) < 5 * std::sqrt(2.0 / reps));
    }
}

TEST_CASE("binomial edge cases", "[sampling][binomial]")
{
    RandomStream rs(SeedSpec{1, 1});
    CHECK(rs.binomial(0, 0.4) == 0);
    CHECK(rs.binomial(100, 0.0) == 0);
    CHECK(rs.binomial(100, 1.0) == 100);
    for (int i = 0; i < 1000; ++i) {
        const auto k = rs.binomial(50, 0.7);
        REQUIRE(k >= 0);
        REQUIRE(k <= 50);
        const double u = rs.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("expected histogram rounds and keeps the total", "[sampling]")
{
    const auto d = thermal(1.0);
    const auto h = expected_histogram(d, 10000);
    REQUIRE(is_valid(h));
    CHECK(h.total == 10000);
    CHECK(h.counts[0] == 5000);
    CHECK(h.counts[1] == 2500);
    CHECK(h.counts[3] == 625);
}
