#pragma once
#include <memory>
#include <string>

#include "distfor/dataset.hpp"
#include "distfor/families.hpp"

namespace distfor {

enum class ScaleTransform { identity, log_input };

// Censored maximum-likelihood regression with two linear predictors:
// mu = beta0 + beta1 * x_loc and log(sigma) = gamma0 + gamma1 * t(x_scale).
struct EmosModel {
    double beta0 = 0.0, beta1 = 0.0;
    double gamma0 = 0.0, gamma1 = 0.0;
    std::string loc_column;
    std::string scale_column;
    ScaleTransform scale_transform = ScaleTransform::log_input;

    double loglik = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct EmosOptions {
    ScaleTransform scale_transform = ScaleTransform::log_input;
    double grad_tol_per_obs = 1e-6;
    int max_iterations = 200;
};

EmosModel fit_emos(const Dataset& data, const DistributionFamily& family, const std::string& loc_column,
                   const std::string& scale_column, const EmosOptions& opts = {});

ParamVector predict_emos(const EmosModel& model, const Dataset& data, int row);

// The transformed scale regressor value (log inputs are floored at 1e-6).
double emos_scale_input(const EmosModel& model, double raw);

}  // namespace distfor
