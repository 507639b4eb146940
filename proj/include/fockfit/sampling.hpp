#pragma once

#include "fockfit/estimation.hpp"
#include "fockfit/gaussian_model.hpp"

#include <cstdint>
#include <random>

namespace fockfit {

/// Identifies one reproducible random stream.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    /// A seed whose streams are disjoint from this one's siblings, for nested studies.
    SeedSpec child(std::uint64_t index) const;
};

std::uint64_t splitmix64(std::uint64_t x);

/** Random stream keyed by a SeedSpec.
 *
 *  mt19937_64 seeded from a hash of (master_seed, stream_index); uniform
 *  doubles are formed from the top 53 bits so results do not depend on the
 *  standard library's distribution implementations.
 */
class RandomStream {
public:
    explicit RandomStream(const SeedSpec& seed);

    /// Uniform on [0, 1).
    double uniform();

    /// Binomial(n, p) draw.
    std::int64_t binomial(std::int64_t n, double p);

private:
    std::int64_t binomial_inversion(std::int64_t n, double p);
    std::int64_t binomial_btrs(std::int64_t n, double p);

    std::mt19937_64 engine_;
};

/// Multinomial draw of n_shots Fock measurements from d by sequential binomials.
FockHistogram sample_histogram(const FockDistribution& d, std::int64_t n_shots,
                               const SeedSpec& seed);

/// Histogram of expected counts round(n_shots * P(n)) with the remainder in overflow.
FockHistogram expected_histogram(const FockDistribution& d, std::int64_t n_shots);

} // namespace fockfit
