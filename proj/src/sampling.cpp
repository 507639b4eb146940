#include "fockfit/sampling.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fockfit {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SeedSpec SeedSpec::child(std::uint64_t index) const
{
    return {splitmix64(master_seed ^ splitmix64(stream_index + 0x5851f42d4c957f2dULL)), index};
}

RandomStream::RandomStream(const SeedSpec& seed)
    : engine_(splitmix64(seed.master_seed ^ splitmix64(~seed.stream_index)))
{
}

double RandomStream::uniform()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

namespace {

// ln(k!): tabulated below 16, Stirling series above (error < 1e-11).
double log_factorial(double k)
{
    static const std::array<double, 16> table = [] {
        std::array<double, 16> t{};
        for (int i = 2; i < 16; ++i)
            t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    if (k < 16.0)
        return table[static_cast<std::size_t>(k)];
    const double inv = 1.0 / k;
    const double inv2 = inv * inv;
    return (k + 0.5) * std::log(k) - k + 0.5 * std::log(2.0 * std::numbers::pi) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

} // namespace

std::int64_t RandomStream::binomial(std::int64_t n, double p)
{
    if (n <= 0 || p <= 0.0)
        return 0;
    if (p >= 1.0)
        return n;
    const bool flip = p > 0.5;
    const double q = flip ? 1.0 - p : p;
    const std::int64_t k = (static_cast<double>(n) * q < 10.0) ? binomial_inversion(n, q)
                                                                : binomial_btrs(n, q);
    return flip ? n - k : k;
}

std::int64_t RandomStream::binomial_inversion(std::int64_t n, double p)
{
    const double q = 1.0 - p;
    const double qn = std::exp(static_cast<double>(n) * std::log1p(-p));
    const double np = static_cast<double>(n) * p;
    const double bound = std::min(static_cast<double>(n), np + 10.0 * std::sqrt(np * q + 1.0));

    std::int64_t x = 0;
    double px = qn;
    double u = uniform();
    while (u > px) {
        ++x;
        if (static_cast<double>(x) > bound) {
            x = 0;
            px = qn;
            u = uniform();
        } else {
            u -= px;
            px *= (static_cast<double>(n - x + 1) * p) / (static_cast<double>(x) * q);
        }
    }
    return x;
}

// Hormann's transformed rejection with squeeze (BTRS), for n p >= 10, p <= 1/2.
std::int64_t RandomStream::binomial_btrs(std::int64_t n, double p)
{
    const double nd = static_cast<double>(n);
    const double spq = std::sqrt(nd * p * (1.0 - p));
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = nd * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double lpq = std::log(p / (1.0 - p));
    const double m = std::floor((nd + 1.0) * p);
    const double h = log_factorial(m) + log_factorial(nd - m);

    while (true) {
        const double u = uniform() - 0.5;
        double v = uniform();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + c);
        if (k < 0.0 || k > nd)
            continue;
        if (us >= 0.07 && v <= v_r)
            return static_cast<std::int64_t>(k);
        v = std::log(v * alpha / (a / (us * us) + b));
        const double bound = h - log_factorial(k) - log_factorial(nd - k) + (k - m) * lpq;
        if (v <= bound)
            return static_cast<std::int64_t>(k);
    }
}

FockHistogram sample_histogram(const FockDistribution& d, std::int64_t n_shots,
                               const SeedSpec& seed)
{
    if (n_shots < 1)
        throw std::invalid_argument("sample_histogram: n_shots must be >= 1");
    const Eigen::ArrayXd bins = d.bins();
    if (bins.size() != d.n_max + 2 || (bins < 0.0).any() || !bins.isFinite().all())
        throw std::invalid_argument("sample_histogram: invalid distribution");

    // Suffix sums give the conditional probability of each bin given that
    // the draw did not land in an earlier one.
    Eigen::ArrayXd suffix(bins.size());
    double acc = 0.0;
    for (Eigen::Index i = bins.size() - 1; i >= 0; --i) {
        acc += bins(i);
        suffix(i) = acc;
    }

    RandomStream rng(seed);
    FockHistogram h;
    h.n_max = d.n_max;
    h.counts.assign(static_cast<std::size_t>(d.n_max) + 1, 0);
    h.total = n_shots;
    std::int64_t remaining = n_shots;
    for (int i = 0; i <= d.n_max && remaining > 0; ++i) {
        const double p = suffix(i) > 0.0 ? std::min(1.0, bins(i) / suffix(i)) : 1.0;
        const std::int64_t k = rng.binomial(remaining, p);
        h.counts[static_cast<std::size_t>(i)] = k;
        remaining -= k;
    }
    h.overflow_count = remaining;
    return h;
}

FockHistogram expected_histogram(const FockDistribution& d, std::int64_t n_shots)
{
    if (n_shots < 1)
        throw std::invalid_argument("expected_histogram: n_shots must be >= 1");
    FockHistogram h;
    h.n_max = d.n_max;
    h.total = n_shots;
    h.counts.resize(static_cast<std::size_t>(d.n_max) + 1);
    std::int64_t used = 0;
    for (int i = 0; i <= d.n_max; ++i) {
        const auto k = std::min(n_shots - used,
                                static_cast<std::int64_t>(std::llround(n_shots * d.probs(i))));
        h.counts[static_cast<std::size_t>(i)] = k;
        used += k;
    }
    h.overflow_count = n_shots - used;
    return h;
}

} // namespace fockfit
