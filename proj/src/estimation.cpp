#include "fockfit/estimation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fockfit {

Eigen::ArrayXd FockHistogram::bin_counts() const
{
    Eigen::ArrayXd out(bin_count());
    for (std::size_t i = 0; i < counts.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = static_cast<double>(counts[i]);
    out(bin_count() - 1) = static_cast<double>(overflow_count);
    return out;
}

Eigen::ArrayXd FockHistogram::frequencies() const
{
    return bin_counts() / static_cast<double>(total);
}

bool is_valid(const FockHistogram& h)
{
    if (h.n_max < 1 || h.n_max > kMaxNMax)
        return false;
    if (h.counts.size() != static_cast<std::size_t>(h.n_max) + 1)
        return false;
    if (h.total < 1 || h.overflow_count < 0)
        return false;
    if (std::any_of(h.counts.begin(), h.counts.end(), [](auto k) { return k < 0; }))
        return false;
    const std::int64_t sum =
        std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}) + h.overflow_count;
    return sum == h.total;
}

void require_valid(const FockHistogram& h)
{
    if (!is_valid(h))
        throw std::invalid_argument(
            "invalid Fock histogram: need 1 <= n_max <= 64, n_max + 1 nonnegative counts, "
            "and counts + overflow == total >= 1");
}

void require_valid(const PriorShape& prior)
{
    if (!(prior.nu > 0.0 && prior.eta > 0.0 && std::isfinite(prior.nu) &&
          std::isfinite(prior.eta)))
        throw std::invalid_argument("prior shape parameters nu, eta must be positive");
}

std::string_view to_string(WeightScheme scheme)
{
    switch (scheme) {
    case WeightScheme::posterior: return "posterior";
    case WeightScheme::mle: return "mle";
    case WeightScheme::uniform: return "uniform";
    }
    return "posterior";
}

WeightScheme weight_scheme_from_string(std::string_view name)
{
    if (name == "posterior") return WeightScheme::posterior;
    if (name == "mle") return WeightScheme::mle;
    if (name == "uniform") return WeightScheme::uniform;
    throw std::invalid_argument("unknown weight scheme '" + std::string(name) +
                                "' (expected posterior, mle or uniform)");
}

WeightVector posterior_weights(const FockHistogram& h, const PriorShape& prior)
{
    require_valid(h);
    require_valid(prior);
    const Eigen::ArrayXd k = h.bin_counts();
    const double n = static_cast<double>(h.total);
    const double s = prior.nu + n + prior.eta;
    const Eigen::ArrayXd var = (k + prior.nu) * (n + prior.eta - k) / (s * s * (s + 1.0));
    return var.inverse();
}

WeightVector mle_weights(const FockHistogram& h)
{
    require_valid(h);
    const Eigen::ArrayXd k = h.bin_counts();
    const double n = static_cast<double>(h.total);
    const Eigen::ArrayXd hits = k.max(0.5);
    const Eigen::ArrayXd misses = (n - k).max(0.5);
    return (n * n * n) / (hits * misses);
}

WeightVector uniform_weights(const FockHistogram& h)
{
    require_valid(h);
    return WeightVector::Ones(h.bin_count());
}

WeightVector make_weights(const FockHistogram& h, WeightScheme scheme, const PriorShape& prior)
{
    switch (scheme) {
    case WeightScheme::posterior: return posterior_weights(h, prior);
    case WeightScheme::mle: return mle_weights(h);
    case WeightScheme::uniform: return uniform_weights(h);
    }
    return posterior_weights(h, prior);
}

namespace {

double weighted_residual(double vq, double vp, const Eigen::ArrayXd& f, const WeightVector& w)
{
    const int n_max = static_cast<int>(f.size()) - 2;
    const Eigen::ArrayXd p = fock_probabilities(vq, vp, n_max);
    const double overflow = std::max(0.0, 1.0 - p.sum());
    const double tail = overflow - f(n_max + 1);
    return (w.head(n_max + 1) * (p - f.head(n_max + 1)).square()).sum() +
           w(n_max + 1) * tail * tail;
}

void require_matching(const Eigen::ArrayXd& f, const WeightVector& w)
{
    if (f.size() < 3 || f.size() > kMaxNMax + 2)
        throw std::invalid_argument("observed frequencies must have n_max + 2 entries, 1 <= n_max <= 64");
    if (w.size() != f.size())
        throw std::invalid_argument("weight vector length does not match histogram bins");
    if (!(w > 0.0).all() || !w.isFinite().all())
        throw std::invalid_argument("weights must be positive and finite");
}

using Point = Eigen::Vector2d; // (r, nbar)

// Mirror a trial point into the quadrant. Unlike projection this never
// collapses the simplex onto a bound.
Point reflect_into_bounds(const Point& x)
{
    return x.cwiseAbs();
}

class BoundedObjective {
public:
    BoundedObjective(const Eigen::ArrayXd& f, const WeightVector& w) : f_(f), w_(w) {}

    double operator()(const Point& x)
    {
        ++evaluations;
        const QuadratureVariances v = to_variances({x(0), x(1)});
        return weighted_residual(v.vq, v.vp, f_, w_);
    }

    int evaluations = 0;

private:
    const Eigen::ArrayXd& f_;
    const WeightVector& w_;
};

struct SimplexResult {
    Point x;
    double value;
    bool converged;
};

// Nelder-Mead on the quadrant r >= 0, nbar >= 0; trial points are reflected
// across the bounds before evaluation.
SimplexResult nelder_mead(BoundedObjective& objective, const Point& start, double start_value,
                          const Point& step, double tolerance, int max_evaluations)
{
    std::array<Point, 3> x{start, reflect_into_bounds(start + Point(step(0), 0.0)),
                           reflect_into_bounds(start + Point(0.0, step(1)))};
    // A vertex mirrored back onto the start would leave a degenerate simplex.
    for (int i = 1; i < 3; ++i)
        if (x[i] == start)
            x[i](i - 1) = start(i - 1) + std::abs(step(i - 1));
    std::array<double, 3> fx{start_value, objective(x[1]), objective(x[2])};

    auto order = [&] {
        std::array<int, 3> idx{0, 1, 2};
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
        std::array<Point, 3> xs{x[idx[0]], x[idx[1]], x[idx[2]]};
        std::array<double, 3> fs{fx[idx[0]], fx[idx[1]], fx[idx[2]]};
        x = xs;
        fx = fs;
    };

    while (true) {
        order();
        const Point extent = (x[1] - x[0]).cwiseAbs().cwiseMax((x[2] - x[0]).cwiseAbs());
        if ((extent.array() < tolerance).all())
            return {x[0], fx[0], true};
        if (objective.evaluations >= max_evaluations)
            return {x[0], fx[0], false};

        const Point centroid = 0.5 * (x[0] + x[1]);
        const Point xr = reflect_into_bounds(centroid + (centroid - x[2]));
        const double fr = objective(xr);

        if (fr < fx[0]) {
            const Point xe = reflect_into_bounds(centroid + 2.0 * (centroid - x[2]));
            const double fe = objective(xe);
            if (fe < fr) {
                x[2] = xe;
                fx[2] = fe;
            } else {
                x[2] = xr;
                fx[2] = fr;
            }
            continue;
        }
        if (fr < fx[1]) {
            x[2] = xr;
            fx[2] = fr;
            continue;
        }

        const bool outside = fr < fx[2];
        const Point xc = outside ? reflect_into_bounds(centroid + 0.5 * (xr - centroid))
                                 : reflect_into_bounds(centroid + 0.5 * (x[2] - centroid));
        const double fc = objective(xc);
        if (fc < (outside ? fr : fx[2])) {
            x[2] = xc;
            fx[2] = fc;
            continue;
        }

        for (int i = 1; i < 3; ++i) {
            x[i] = x[0] + 0.5 * (x[i] - x[0]);
            fx[i] = objective(x[i]);
        }
    }
}

} // namespace

double objective(const QuadratureVariances& v, const Eigen::ArrayXd& frequencies,
                 const WeightVector& w)
{
    require_valid(v);
    require_matching(frequencies, w);
    return weighted_residual(v.vq, v.vp, frequencies, w);
}

double objective(const QuadratureVariances& v, const FockHistogram& h, const WeightVector& w)
{
    require_valid(h);
    return objective(v, h.frequencies(), w);
}

FitResult fit(const FockHistogram& h, const WeightVector& w, const FitOptions& options)
{
    require_valid(h);
    return fit(h.frequencies(), w, options);
}

FitResult fit(const Eigen::ArrayXd& frequencies, const WeightVector& w, const FitOptions& options)
{
    require_matching(frequencies, w);
    if (options.grid_r < 2 || options.grid_nbar < 2 || !(options.r_max > 0.0) ||
        !(options.one_plus_nbar_max > 1.0) || !(options.tolerance > 0.0))
        throw std::invalid_argument("invalid fit options");

    BoundedObjective objective(frequencies, w);

    // Stage 1: r linear on [0, r_max], (1 + nbar) log-spaced on [1, one_plus_nbar_max].
    const double r_step = options.r_max / (options.grid_r - 1);
    const double log_step = std::log(options.one_plus_nbar_max) / (options.grid_nbar - 1);
    Point best(0.0, 0.0);
    double best_value = objective(best);
    for (int j = 0; j < options.grid_nbar; ++j) {
        const double nbar = std::expm1(j * log_step);
        for (int i = 0; i < options.grid_r; ++i) {
            const Point x(i * r_step, nbar);
            const double value = (i == 0 && j == 0) ? best_value : objective(x);
            if (value < best_value) {
                best_value = value;
                best = x;
            }
        }
    }

    // Stage 2: simplex refinement, restarted from its own optimum with a
    // smaller simplex until a restart no longer improves the objective.
    Point step(r_step, std::max(std::expm1(log_step) * (1.0 + best(1)), 1e-3));
    bool converged = false;
    for (int run = 0; run < 6; ++run) {
        const SimplexResult result = nelder_mead(objective, best, best_value, step,
                                                 options.tolerance, options.max_evaluations);
        converged = result.converged;
        const bool improved = result.value < best_value;
        if (result.value <= best_value) {
            best = result.x;
            best_value = result.value;
        }
        if (!converged || (run > 0 && !improved))
            break;
        step *= 0.1;
    }

    // The simplex only approaches a boundary optimum to within the tolerance;
    // land on the boundary exactly when that is no worse up to rounding. Near
    // r = 0 the objective moves only at order r^2, far below double noise.
    if (converged) {
        const double tie = 1e-9 * best_value + 1e-21 * w.sum();
        for (const Point& candidate :
             {Point(0.0, best(1)), Point(best(0), 0.0), Point(0.0, 0.0)}) {
            if (candidate == best)
                continue;
            const double value = objective(candidate);
            if (value <= best_value + tie) {
                best = candidate;
                best_value = value;
            }
        }
    }

    FitResult out;
    out.state = {best(0), best(1)};
    out.variances = to_variances(out.state);
    out.objective = best_value;
    out.converged = converged;
    out.evaluations = objective.evaluations;
    return out;
}

} // namespace fockfit
