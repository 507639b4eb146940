#pragma once

#include "fockfit/numerics.hpp"

#include <Eigen/Core>

#include <cmath>

namespace fockfit {

inline constexpr int kDefaultNMax = 20;
inline constexpr int kMaxNMax = 64;
inline constexpr double kHeisenbergSlack = 1e-12;

/// Squeezing r >= 0 and mean thermal occupation nbar >= 0.
struct SqueezedThermalState {
    double r = 0.0;
    double nbar = 0.0;
};

/// Diagonal of the covariance matrix, vacuum variance 1/2, vq <= vp.
struct QuadratureVariances {
    double vq = 0.5;
    double vp = 0.5;
};

/** Fock-number distribution truncated at n_max.
 *
 *  probs holds P(0..n_max); overflow is the total probability of n > n_max.
 */
struct FockDistribution {
    int n_max = kDefaultNMax;
    Eigen::ArrayXd probs;
    double overflow = 0.0;

    /// probs followed by the overflow bin, length n_max + 2.
    Eigen::ArrayXd bins() const;
};

bool is_valid(const SqueezedThermalState& s);
bool is_valid(const QuadratureVariances& v);

/// Throw std::invalid_argument if the state or variances violate their invariants.
void require_valid(const SqueezedThermalState& s);
void require_valid(const QuadratureVariances& v);

QuadratureVariances to_variances(const SqueezedThermalState& s);
SqueezedThermalState from_variances(const QuadratureVariances& v);

/** Fock probabilities P(0..n_max | vq, vp) of a zero-mean squeezed thermal state.
 *
 *  With A = (2vq-1)(2vp-1), B = (2vq+1)(2vp+1) and c = 4 vq vp - 1,
 *
 *      P(n) = P(0) B^{-n} G_n(c, A B),   P(0) = 2 / sqrt(B),
 *
 *  where G_n is the scaled Legendre sequence. The B^{-n} factor is folded into
 *  the recurrence arguments by homogeneity, G_n(c/B, A/B), which keeps every
 *  intermediate bounded by one in magnitude.
 */
template <typename Scalar>
ArrayX<Scalar> fock_probabilities(Scalar vq, Scalar vp, int n_max)
{
    using std::sqrt;
    const Scalar a = (Scalar(2) * vq - Scalar(1)) * (Scalar(2) * vp - Scalar(1));
    const Scalar b = (Scalar(2) * vq + Scalar(1)) * (Scalar(2) * vp + Scalar(1));
    const Scalar c = Scalar(4) * vq * vp - Scalar(1);
    ArrayX<Scalar> p = scaled_legendre<Scalar>(c / b, a / b, n_max);
    p *= Scalar(2) / sqrt(b);
    return p.max(Scalar(0));
}

/// P(n | v). Requires valid v and 0 <= n <= 64.
double fock_probability(const QuadratureVariances& v, int n);

/// Distribution over 0..n_max plus overflow. Requires 1 <= n_max <= 64.
FockDistribution fock_distribution(const QuadratureVariances& v, int n_max = kDefaultNMax);

/** P(n | v) by direct quadrature of the Wigner-function overlap
 *
 *      P(n) = 2 pi \iint W(q, p) W_n(q, p) dq dp,
 *      W_n(q, p) = (-1)^n / pi exp(-q^2 - p^2) L_n(2 q^2 + 2 p^2).
 *
 *  Slow reference path. Evaluated with a tensor Gauss-Hermite rule scaled to
 *  each quadrature's Gaussian width. Requires valid v and 0 <= n <= 30.
 */
double fock_probability_oracle(const QuadratureVariances& v, int n);

/// Fidelity between two zero-mean single-mode Gaussian states with diagonal covariances.
double fidelity(const QuadratureVariances& a, const QuadratureVariances& b);

} // namespace fockfit
