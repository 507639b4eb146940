#include "fockfit/gaussian_model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fockfit {

Eigen::ArrayXd FockDistribution::bins() const
{
    Eigen::ArrayXd out(probs.size() + 1);
    out.head(probs.size()) = probs;
    out(probs.size()) = overflow;
    return out;
}

bool is_valid(const SqueezedThermalState& s)
{
    return std::isfinite(s.r) && std::isfinite(s.nbar) && s.r >= 0.0 && s.nbar >= 0.0;
}

bool is_valid(const QuadratureVariances& v)
{
    return std::isfinite(v.vq) && std::isfinite(v.vp) && v.vq > 0.0 && v.vp > 0.0 &&
           v.vq <= v.vp && v.vq * v.vp >= 0.25 - kHeisenbergSlack;
}

void require_valid(const SqueezedThermalState& s)
{
    if (!is_valid(s))
        throw std::invalid_argument("invalid squeezed thermal state: r=" + std::to_string(s.r) +
                                    " nbar=" + std::to_string(s.nbar) +
                                    " (need finite r >= 0, nbar >= 0)");
}

void require_valid(const QuadratureVariances& v)
{
    if (!is_valid(v))
        throw std::invalid_argument("invalid quadrature variances: vq=" + std::to_string(v.vq) +
                                    " vp=" + std::to_string(v.vp) +
                                    " (need 0 < vq <= vp and vq*vp >= 0.25)");
}

QuadratureVariances to_variances(const SqueezedThermalState& s)
{
    const double scale = 0.5 * (2.0 * s.nbar + 1.0);
    return {scale * std::exp(-2.0 * s.r), scale * std::exp(2.0 * s.r)};
}

SqueezedThermalState from_variances(const QuadratureVariances& v)
{
    require_valid(v);
    const double r = 0.25 * std::log(v.vp / v.vq);
    const double nbar = std::max(0.0, std::sqrt(v.vq * v.vp) - 0.5);
    return {r, nbar};
}

double fock_probability(const QuadratureVariances& v, int n)
{
    require_valid(v);
    if (n < 0 || n > kMaxNMax)
        throw std::invalid_argument("fock_probability: n must lie in [0, 64]");
    return fock_probabilities(v.vq, v.vp, n)(n);
}

FockDistribution fock_distribution(const QuadratureVariances& v, int n_max)
{
    require_valid(v);
    if (n_max < 1 || n_max > kMaxNMax)
        throw std::invalid_argument("fock_distribution: n_max must lie in [1, 64]");
    FockDistribution d;
    d.n_max = n_max;
    d.probs = fock_probabilities(v.vq, v.vp, n_max);
    d.overflow = std::max(0.0, 1.0 - d.probs.sum());
    return d;
}

namespace {

struct HermiteRule {
    std::vector<long double> nodes;
    std::vector<long double> weights;
};

// Gauss-Hermite rule for weight exp(-x^2). Nodes from the Golub-Welsch
// eigenproblem, polished by Newton on the orthonormal recurrence, which also
// yields weights with full relative accuracy in the tails.
HermiteRule make_hermite_rule(int m)
{
    using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    Mat jacobi = Mat::Zero(m, m);
    for (int k = 1; k < m; ++k) {
        const long double beta = std::sqrt(static_cast<long double>(k) / 2.0L);
        jacobi(k, k - 1) = beta;
        jacobi(k - 1, k) = beta;
    }
    Eigen::SelfAdjointEigenSolver<Mat> solver(jacobi, Eigen::EigenvaluesOnly);

    const long double pim4 = 1.0L / std::pow(std::numbers::pi_v<long double>, 0.25L);
    HermiteRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        long double x = solver.eigenvalues()(i);
        long double deriv = 0.0L;
        for (int iter = 0; iter < 4; ++iter) {
            long double p1 = pim4, p2 = 0.0L;
            for (int j = 1; j <= m; ++j) {
                const long double p3 = p2;
                p2 = p1;
                p1 = x * std::sqrt(2.0L / j) * p2 - std::sqrt((j - 1.0L) / j) * p3;
            }
            deriv = std::sqrt(2.0L * m) * p2;
            x -= p1 / deriv;
        }
        rule.nodes[i] = x;
        rule.weights[i] = 2.0L / (deriv * deriv);
    }
    return rule;
}

const HermiteRule& hermite_rule(int m)
{
    static std::mutex mutex;
    static std::map<int, HermiteRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(m);
    if (it == cache.end())
        it = cache.emplace(m, make_hermite_rule(m)).first;
    return it->second;
}

long double laguerre(int n, long double x)
{
    long double prev = 1.0L;
    if (n == 0)
        return prev;
    long double cur = 1.0L - x;
    for (int k = 1; k < n; ++k) {
        const long double next = ((2.0L * k + 1.0L - x) * cur - k * prev) / (k + 1.0L);
        prev = cur;
        cur = next;
    }
    return cur;
}

} // namespace

double fock_probability_oracle(const QuadratureVariances& v, int n)
{
    require_valid(v);
    if (n < 0 || n > 30)
        throw std::invalid_argument("fock_probability_oracle: n must lie in [0, 30]");

    // After q = x / sqrt(aq), p = y / sqrt(ap) the integrand is exp(-x^2 - y^2)
    // times a polynomial of degree 2n, so m >= n + 1 nodes integrate it exactly.
    const int m = n + 24;
    const HermiteRule& rule = hermite_rule(m);

    const long double vq = v.vq, vp = v.vp;
    const long double aq = 1.0L + 1.0L / (2.0L * vq);
    const long double ap = 1.0L + 1.0L / (2.0L * vp);

    long double sum = 0.0L;
    for (int i = 0; i < m; ++i) {
        const long double tq = 2.0L * rule.nodes[i] * rule.nodes[i] / aq;
        long double row = 0.0L;
        for (int j = 0; j < m; ++j) {
            const long double tp = 2.0L * rule.nodes[j] * rule.nodes[j] / ap;
            row += rule.weights[j] * laguerre(n, tq + tp);
        }
        sum += rule.weights[i] * row;
    }
    const long double sign = (n % 2 == 0) ? 1.0L : -1.0L;
    const long double prefactor =
        sign / (std::numbers::pi_v<long double> * std::sqrt(vq * vp * aq * ap));
    return static_cast<double>(prefactor * sum);
}

double fidelity(const QuadratureVariances& a, const QuadratureVariances& b)
{
    require_valid(a);
    require_valid(b);
    // Xi = det(S1 + S2); Lambda = 4 det(S1 + iJ/2) det(S2 + iJ/2).
    // F = 1 / (sqrt(Xi + Lambda) - sqrt(Lambda)), rationalised to avoid cancellation.
    const double xi = (a.vq + b.vq) * (a.vp + b.vp);
    const double lambda =
        std::max(0.0, 4.0 * (a.vq * a.vp - 0.25) * (b.vq * b.vp - 0.25));
    const double f = (std::sqrt(xi + lambda) + std::sqrt(lambda)) / xi;
    return std::min(f, 1.0);
}

} // namespace fockfit
