#pragma once
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "distfor/errors.hpp"
#include "distfor/families.hpp"

namespace distfor {

// Response values with non-negative weights; empty weights mean all ones.
struct WeightedSample {
    std::span<const double> y;
    std::span<const double> w{};

    double weight(std::size_t i) const { return w.empty() ? 1.0 : w[i]; }
    std::size_t size() const { return y.size(); }
};

struct FitResult {
    ParamVector theta;
    double loglik_value = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;            // sup-norm of the weighted score sum
    std::vector<double> loglik_trace{};    // objective at accepted iterates
};

// Thrown after max_iterations without meeting the score tolerance; carries the
// best iterate so callers can degrade gracefully.
struct NonConvergence : NonConvergenceError {
    FitResult best;
    NonConvergence(const std::string& msg, FitResult b) : NonConvergenceError(msg), best(std::move(b)) {}
};

// ------------------------- generic unconstrained maximizer -------------------------

struct MaximizeOptions {
    double grad_tol = 1e-8;     // absolute sup-norm threshold on convergence_norm
    int max_iterations = 100;
    double max_step = 10.0;     // inf-norm clamp on a single Newton step
    // Optional replacement for the default sup-norm of the gradient, e.g. to
    // measure convergence in a different coordinate system.
    std::function<double(std::span<const double> x, std::span<const double> grad)> convergence_norm{};
};

struct MaximizeResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0;
    std::vector<double> trace{};
};

// Newton ascent with analytic gradient, central-difference Hessian, Armijo
// backtracking, and a gradient-ascent fallback when the Hessian step is not an
// ascent direction.
MaximizeResult newton_maximize(const std::function<double(std::span<const double>)>& value,
                               const std::function<std::vector<double>(std::span<const double>)>& gradient,
                               std::vector<double> x0, const MaximizeOptions& opts = {});

// ------------------------------- family MLE -------------------------------

struct FitOptions {
    double score_tol_per_weight = 1e-8;  // sup-norm tolerance, scaled by total weight
    int max_iterations = 100;
};

// Weighted maximum-likelihood fit of a family's parameters. Throws
// DegenerateSampleError when all weighted mass sits on the censoring atom (or
// the sample is constant with no censored mass), NonConvergence after
// max_iterations.
FitResult fit(const DistributionFamily& family, const WeightedSample& sample,
              std::optional<ParamVector> init = std::nullopt, const FitOptions& opts = {});

// Shared entry point for tree leaves and forest predictions: same data vector,
// varying weights. Rows with zero weight are skipped.
ParamVector fit_from_weights(const DistributionFamily& family, std::span<const double> y,
                             std::span<const double> weights, std::optional<ParamVector> init = std::nullopt);

// Sum of w_i * loglik(theta, y_i).
double weighted_loglik(const DistributionFamily& family, const ParamVector& theta, const WeightedSample& sample);

// Sum of w_i * score(theta, y_i), natural coordinates.
std::vector<double> weighted_score(const DistributionFamily& family, const ParamVector& theta,
                                   const WeightedSample& sample);

}  // namespace distfor
