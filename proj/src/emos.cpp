#include "distfor/emos.hpp"

#include <cmath>

#include "distfor/mle.hpp"

namespace distfor {

double emos_scale_input(const EmosModel& model, double raw) {
    if (model.scale_transform == ScaleTransform::identity) return raw;
    if (raw < 0.0) throw DataError("EMOS scale regressor must be non-negative under the log transform");
    return std::log(std::fmax(raw, 1e-6));
}

EmosModel fit_emos(const Dataset& data, const DistributionFamily& family, const std::string& loc_column,
                   const std::string& scale_column, const EmosOptions& opts) {
    if (family.param_count() != 2) throw ConfigError("EMOS requires a two-parameter family");
    if (!data.has_response) throw DataError("dataset has no response column");
    const int jl = data.covariate_index(loc_column);
    const int js = data.covariate_index(scale_column);
    if (jl < 0) throw DataError("EMOS location column '" + loc_column + "' not found");
    if (js < 0) throw DataError("EMOS scale column '" + scale_column + "' not found");
    const Covariate& cl = data.covariate(jl);
    const Covariate& cs = data.covariate(js);
    if (cl.kind != ColumnKind::numeric || cs.kind != ColumnKind::numeric)
        throw DataError("EMOS regressors must be numeric");

    EmosModel model;
    model.loc_column = loc_column;
    model.scale_column = scale_column;
    model.scale_transform = opts.scale_transform;

    const int n = data.n();
    std::vector<double> a(static_cast<std::size_t>(n)), b(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        if (cl.is_missing(i) || cs.is_missing(i))
            throw DataError("EMOS training rows must have both regressors observed (row " + std::to_string(i + 1) +
                            ")");
        a[static_cast<std::size_t>(i)] = cl.numeric[static_cast<std::size_t>(i)];
        b[static_cast<std::size_t>(i)] = emos_scale_input(model, cs.numeric[static_cast<std::size_t>(i)]);
    }
    const auto variance = [n](const std::vector<double>& v) {
        double mean = 0.0;
        for (double x : v) mean += x;
        mean /= n;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        return ss / n;
    };
    if (!(variance(a) > 0.0)) throw DataError("EMOS location regressor has zero variance");
    if (!(variance(b) > 0.0)) throw DataError("EMOS scale regressor has zero variance (after transform)");

    // intercept-only start: the global family MLE is a feasible interior point
    const FitResult global = fit(family, WeightedSample{data.y, data.weights});
    std::vector<double> x0 = {global.theta.location(), 0.0, std::log(global.theta.scale()), 0.0};

    double total_weight = 0.0;
    for (int i = 0; i < n; ++i) total_weight += data.weight(i);

    const auto params_at = [&](std::span<const double> x, int i) {
        const double mu = x[0] + x[1] * a[static_cast<std::size_t>(i)];
        const double sigma = std::exp(x[2] + x[3] * b[static_cast<std::size_t>(i)]);
        return ParamVector{mu, sigma};
    };
    const auto value = [&](std::span<const double> x) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            s += data.weight(i) * family.loglik(params_at(x, i), data.y[static_cast<std::size_t>(i)]);
        return s;
    };
    const auto gradient = [&](std::span<const double> x) {
        std::vector<double> g(4, 0.0);
        for (int i = 0; i < n; ++i) {
            const ParamVector theta = params_at(x, i);
            const std::vector<double> s = family.score(theta, data.y[static_cast<std::size_t>(i)]);
            const double w = data.weight(i);
            const double s_gamma = s[1] * theta.scale();  // chain rule through log sigma
            g[0] += w * s[0];
            g[1] += w * s[0] * a[static_cast<std::size_t>(i)];
            g[2] += w * s_gamma;
            g[3] += w * s_gamma * b[static_cast<std::size_t>(i)];
        }
        return g;
    };

    MaximizeOptions mopts;
    mopts.grad_tol = opts.grad_tol_per_obs * total_weight;
    mopts.max_iterations = opts.max_iterations;
    const MaximizeResult res = newton_maximize(value, gradient, std::move(x0), mopts);
    if (!res.converged)
        throw NonConvergenceError("EMOS fit did not converge after " + std::to_string(res.iterations) +
                                  " iterations (gradient sup-norm " + std::to_string(res.grad_norm) + ")");

    model.beta0 = res.x[0];
    model.beta1 = res.x[1];
    model.gamma0 = res.x[2];
    model.gamma1 = res.x[3];
    model.loglik = res.value;
    model.iterations = res.iterations;
    model.converged = res.converged;
    return model;
}

ParamVector predict_emos(const EmosModel& model, const Dataset& data, int row) {
    const int jl = data.covariate_index(model.loc_column);
    const int js = data.covariate_index(model.scale_column);
    if (jl < 0 || js < 0)
        throw SchemaMismatchError("EMOS prediction data lacks column '" +
                                  (jl < 0 ? model.loc_column : model.scale_column) + "'");
    const Covariate& cl = data.covariate(jl);
    const Covariate& cs = data.covariate(js);
    if (cl.is_missing(row) || cs.is_missing(row))
        throw DataError("EMOS prediction needs both regressors at row " + std::to_string(row + 1));
    const double mu = model.beta0 + model.beta1 * cl.numeric[static_cast<std::size_t>(row)];
    const double sigma =
        std::exp(model.gamma0 + model.gamma1 * emos_scale_input(model, cs.numeric[static_cast<std::size_t>(row)]));
    return ParamVector{mu, sigma};
}

}  // namespace distfor
