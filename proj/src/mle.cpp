#include "distfor/mle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace distfor {

namespace {

double sup_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::fmax(m, std::fabs(x));
    return m;
}

// Central-difference Hessian of an analytic gradient.
Eigen::MatrixXd fd_hessian(const std::function<std::vector<double>(std::span<const double>)>& gradient,
                           std::span<const double> x) {
    const int p = static_cast<int>(x.size());
    Eigen::MatrixXd h(p, p);
    std::vector<double> xp(x.begin(), x.end());
    for (int j = 0; j < p; ++j) {
        const double step = 1e-5 * std::fmax(1.0, std::fabs(x[j]));
        const double orig = xp[j];
        xp[j] = orig + step;
        const std::vector<double> gp = gradient(xp);
        xp[j] = orig - step;
        const std::vector<double> gm = gradient(xp);
        xp[j] = orig;
        for (int i = 0; i < p; ++i) h(i, j) = (gp[i] - gm[i]) / (2.0 * step);
    }
    return 0.5 * (h + h.transpose());
}

}  // namespace

MaximizeResult newton_maximize(const std::function<double(std::span<const double>)>& value,
                               const std::function<std::vector<double>(std::span<const double>)>& gradient,
                               std::vector<double> x0, const MaximizeOptions& opts) {
    const int p = static_cast<int>(x0.size());
    MaximizeResult res;
    res.x = std::move(x0);
    res.value = value(res.x);
    res.trace.push_back(res.value);

    const auto norm_of = [&](std::span<const double> x, std::span<const double> g) {
        return opts.convergence_norm ? opts.convergence_norm(x, g) : sup_norm(g);
    };

    std::vector<double> grad = gradient(res.x);
    res.grad_norm = norm_of(res.x, grad);

    // One extra Newton step is taken after the tolerance is first met, so the
    // returned point sits at the precision floor rather than just inside the
    // tolerance; downstream identities (weight-duplication, warm starts from
    // different initializations) then agree far below the stop threshold.
    bool polished = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (res.grad_norm <= opts.grad_tol) {
            if (polished || res.grad_norm == 0.0) {
                res.converged = true;
                return res;
            }
            polished = true;
        }

        const Eigen::Map<const Eigen::VectorXd> g(grad.data(), p);
        Eigen::VectorXd dir;
        const Eigen::MatrixXd neg_h = -fd_hessian(gradient, res.x);
        Eigen::LLT<Eigen::MatrixXd> llt(neg_h);
        if (llt.info() == Eigen::Success) dir = llt.solve(g);
        if (llt.info() != Eigen::Success || !dir.allFinite() || dir.dot(g) <= 0.0) {
            dir = g / std::fmax(1.0, g.lpNorm<Eigen::Infinity>());  // gradient-ascent fallback
        }
        const double dir_max = dir.lpNorm<Eigen::Infinity>();
        if (dir_max > opts.max_step) dir *= opts.max_step / dir_max;

        // Armijo backtracking; accepted iterates never decrease the objective.
        // Once the predicted improvement drops below the objective's
        // floating-point noise, the objective cannot discriminate between
        // candidate steps any more, so the line search switches to requiring a
        // gradient-norm contraction instead (objective still must not drop).
        const double slope = dir.dot(g);
        const double noise = 1e-13 * (1.0 + std::fabs(res.value));
        const bool endgame = 0.5 * slope < noise;
        double t = 1.0;
        bool accepted = false;
        std::vector<double> x_new(res.x);
        std::vector<double> grad_new;
        double norm_new = 0.0;
        while (t >= 1e-14) {
            for (int j = 0; j < p; ++j) x_new[j] = res.x[j] + t * dir(j);
            const double v = value(x_new);
            bool ok = false;
            if (!endgame) {
                ok = std::isfinite(v) && v >= res.value && v + noise >= res.value + 1e-4 * t * slope;
                if (ok) {
                    grad_new = gradient(x_new);
                    norm_new = norm_of(x_new, grad_new);
                }
            } else if (std::isfinite(v) && v >= res.value - noise) {
                grad_new = gradient(x_new);
                norm_new = norm_of(x_new, grad_new);
                ok = norm_new <= (1.0 - 0.1 * t) * res.grad_norm;
            }
            if (ok) {
                res.x = x_new;
                // in the endgame the objective moves below its own evaluation
                // noise; report it monotonically within that precision
                res.value = endgame ? std::fmax(v, res.value) : v;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) break;  // flat to machine precision along dir

        res.iterations = it + 1;
        res.trace.push_back(res.value);
        grad = std::move(grad_new);
        res.grad_norm = norm_new;
    }

    res.converged = res.grad_norm <= opts.grad_tol;
    return res;
}

// ------------------------------- family MLE -------------------------------

double weighted_loglik(const DistributionFamily& family, const ParamVector& theta, const WeightedSample& sample) {
    double s = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) s += sample.weight(i) * family.loglik(theta, sample.y[i]);
    return s;
}

std::vector<double> weighted_score(const DistributionFamily& family, const ParamVector& theta,
                                   const WeightedSample& sample) {
    std::vector<double> acc(static_cast<std::size_t>(family.param_count()), 0.0);
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const std::vector<double> s = family.score(theta, sample.y[i]);
        const double w = sample.weight(i);
        for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += w * s[j];
    }
    return acc;
}

namespace {

struct SampleStats {
    double total_weight = 0.0;
    double uncensored_weight = 0.0;
    double mean = 0.0;
    double sd = 0.0;
    bool constant = true;
};

SampleStats summarize(const DistributionFamily& family, const WeightedSample& sample) {
    if (sample.size() == 0) throw DataError("empty sample");
    if (!sample.w.empty() && sample.w.size() != sample.y.size())
        throw DataError("weight vector length does not match responses");
    SampleStats st;
    const double c = family.censoring_point();
    double sum = 0.0;
    double first_active = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double w = sample.weight(i);
        if (w < 0.0) throw DataError("negative row weight");
        if (!(sample.y[i] >= c)) throw DataError("response below censoring point");
        st.total_weight += w;
        if (sample.y[i] > c) st.uncensored_weight += w;
        sum += w * sample.y[i];
        if (w > 0.0) {
            if (std::isnan(first_active)) first_active = sample.y[i];
            if (sample.y[i] != first_active) st.constant = false;
        }
    }
    if (!(st.total_weight > 0.0)) throw DataError("total weight must be positive");
    st.mean = sum / st.total_weight;
    double ss = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double d = sample.y[i] - st.mean;
        ss += sample.weight(i) * d * d;
    }
    st.sd = std::sqrt(ss / st.total_weight);
    return st;
}

}  // namespace

FitResult fit(const DistributionFamily& family, const WeightedSample& sample, std::optional<ParamVector> init,
              const FitOptions& opts) {
    const SampleStats st = summarize(family, sample);
    if (st.uncensored_weight <= 0.0)
        throw DegenerateSampleError("all weighted mass on the censoring atom; location is not identified");
    if (st.constant)
        throw DegenerateSampleError("weighted sample is constant; scale estimate degenerates to zero");

    ParamVector theta0;
    if (init) {
        family.validate(*init);
        theta0 = *init;
    } else {
        const double mu0 = st.mean;
        const double sigma0 = std::max({st.sd, 0.1 * mu0 + 1e-6, 1e-3});
        theta0 = ParamVector{mu0, sigma0};
    }

    const auto value = [&](std::span<const double> x) {
        return weighted_loglik(family, family.from_internal(x), sample);
    };
    const auto gradient = [&](std::span<const double> x) {
        const ParamVector theta = family.from_internal(x);
        std::vector<double> g = weighted_score(family, theta, sample);
        const std::vector<double> jac = family.internal_jacobian(theta);
        for (std::size_t j = 0; j < g.size(); ++j) g[j] *= jac[j];
        return g;
    };

    MaximizeOptions mopts;
    mopts.grad_tol = opts.score_tol_per_weight * st.total_weight;
    mopts.max_iterations = opts.max_iterations;
    // Convergence is measured on the natural-coordinate score sum (the
    // first-order conditions). The extra max(1, sigma) factor makes the stop
    // rule scale-free above unit scale, so fits of c*y reproduce fits of y to
    // the same relative precision; it only ever tightens the criterion.
    mopts.convergence_norm = [&](std::span<const double> x, std::span<const double> g) {
        const ParamVector theta = family.from_internal(x);
        const std::vector<double> jac = family.internal_jacobian(theta);
        double m = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) m = std::fmax(m, std::fabs(g[j] / jac[j]));
        return m * std::fmax(1.0, theta.scale());
    };

    const MaximizeResult opt = newton_maximize(value, gradient, family.to_internal(theta0), mopts);

    FitResult res;
    res.theta = family.from_internal(opt.x);
    res.loglik_value = opt.value;
    res.iterations = opt.iterations;
    res.converged = opt.converged;
    res.loglik_trace = opt.trace;
    {
        const std::vector<double> s = weighted_score(family, res.theta, sample);
        double m = 0.0;
        for (double v : s) m = std::fmax(m, std::fabs(v));
        res.gradient_norm = m;
    }
    if (!res.converged)
        throw NonConvergence("maximum-likelihood fit did not reach score tolerance after " +
                                 std::to_string(opt.iterations) + " iterations",
                             res);
    return res;
}

ParamVector fit_from_weights(const DistributionFamily& family, std::span<const double> y,
                             std::span<const double> weights, std::optional<ParamVector> init) {
    if (y.size() != weights.size()) throw DataError("weight vector length does not match responses");
    std::vector<double> yg, wg;
    yg.reserve(y.size());
    wg.reserve(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (weights[i] > 0.0) {
            yg.push_back(y[i]);
            wg.push_back(weights[i]);
        }
    }
    return fit(family, WeightedSample{yg, wg}, std::move(init)).theta;
}

}  // namespace distfor
