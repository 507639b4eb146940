#pragma once

#include <Eigen/Core>

#include <cassert>

namespace fockfit {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/** Scaled Legendre sequence G_k = u^{k/2} P_k(c / sqrt(u)), k = 0..n_max.
 *
 *  G_k is a polynomial in (c, u), so the sequence stays real when u < 0.
 *  It is generated by the three-term recurrence
 *
 *      (k+1) G_{k+1} = (2k+1) c G_k - k u G_{k-1},   G_0 = 1, G_1 = c,
 *
 *  and is homogeneous: G_k(s c, s^2 u) = s^k G_k(c, u).
 */
template <typename Scalar>
ArrayX<Scalar> scaled_legendre(Scalar c, Scalar u, int n_max)
{
    assert(n_max >= 0);
    ArrayX<Scalar> g(n_max + 1);
    g(0) = Scalar(1);
    if (n_max == 0)
        return g;
    g(1) = c;
    for (int k = 1; k < n_max; ++k)
        g(k + 1) = (Scalar(2 * k + 1) * c * g(k) - Scalar(k) * u * g(k - 1)) / Scalar(k + 1);
    return g;
}

/// Standard normal CDF.
double std_normal_cdf(double z);

/// Inverse of the standard normal CDF. Throws std::domain_error unless 0 < p < 1.
double std_normal_quantile(double p);

} // namespace fockfit
