#include "distfor/families.hpp"

#include <cmath>

#include "distfor/errors.hpp"
#include "distfor/math.hpp"

namespace distfor {

void DistributionFamily::validate(const ParamVector& theta) const {
    if (theta.dim() != param_count())
        throw InvalidParameterError("parameter vector has dimension " + std::to_string(theta.dim()) + ", expected " +
                                    std::to_string(param_count()));
    for (double v : theta.values)
        if (!std::isfinite(v)) throw InvalidParameterError("non-finite distribution parameter");
    if (theta.scale() <= 0.0) throw InvalidParameterError("scale parameter must be positive");
}

void DistributionFamily::validate_response(double y) const {
    if (!(y >= censoring_point()))
        throw DataError("response " + std::to_string(y) + " below censoring point " +
                        std::to_string(censoring_point()));
}

// ------------------------------ censored Gaussian ------------------------------

double CensoredGaussian::loglik(const ParamVector& theta, double y) const {
    validate(theta);
    validate_response(y);
    const double mu = theta.location(), sigma = theta.scale();
    if (y > censor_) {
        const double z = (y - mu) / sigma;
        return norm_logpdf(z) - std::log(sigma);
    }
    return norm_logcdf((censor_ - mu) / sigma);
}

std::vector<double> CensoredGaussian::score(const ParamVector& theta, double y) const {
    validate(theta);
    validate_response(y);
    const double mu = theta.location(), sigma = theta.scale();
    if (y > censor_) {
        const double z = (y - mu) / sigma;
        return {z / sigma, (z * z - 1.0) / sigma};
    }
    const double r = (censor_ - mu) / sigma;
    const double lambda = norm_mills_ratio(r);  // phi(r)/Phi(r)
    return {-lambda / sigma, -lambda * r / sigma};
}

double CensoredGaussian::cdf(const ParamVector& theta, double y) const {
    validate(theta);
    if (y < censor_) return 0.0;
    return norm_cdf((y - theta.location()) / theta.scale());
}

double CensoredGaussian::quantile(const ParamVector& theta, double p) const {
    validate(theta);
    if (!(p > 0.0 && p < 1.0)) throw DataError("quantile probability must lie in (0, 1)");
    if (p <= prob_censored(theta)) return censor_;
    return theta.location() + theta.scale() * norm_quantile(p);
}

double CensoredGaussian::sample(const ParamVector& theta, Rng& rng) const {
    validate(theta);
    return std::fmax(censor_, theta.location() + theta.scale() * rng.normal());
}

double CensoredGaussian::prob_censored(const ParamVector& theta) const {
    return norm_cdf((censor_ - theta.location()) / theta.scale());
}

double CensoredGaussian::crps(const ParamVector& theta, double y) const {
    validate(theta);
    validate_response(y);
    const double mu = theta.location(), sigma = theta.scale();
    const double d = (y - mu) / sigma;  // standardized observation
    const double a = (censor_ - mu) / sigma;  // standardized censoring point
    // Closed form of int (F(z) - 1[y <= z])^2 dz for the left-censored normal:
    // the uncensored-normal expression plus correction terms in a.
    const double uncensored = d * (2.0 * norm_cdf(d) - 1.0) + 2.0 * norm_pdf(d) - kInvSqrtPi;
    const double pa = norm_cdf(a);
    const double censor_terms = -a * pa * pa - 2.0 * norm_pdf(a) * pa + kInvSqrtPi * norm_cdf(a * kSqrt2);
    return sigma * (uncensored + censor_terms);
}

std::vector<double> CensoredGaussian::to_internal(const ParamVector& theta) const {
    validate(theta);
    return {theta.location(), std::log(theta.scale())};
}

ParamVector CensoredGaussian::from_internal(std::span<const double> internal) const {
    return ParamVector{internal[0], std::exp(internal[1])};
}

std::vector<double> CensoredGaussian::internal_jacobian(const ParamVector& theta) const {
    return {1.0, theta.scale()};
}

// ------------------------------ censored logistic ------------------------------

double CensoredLogistic::loglik(const ParamVector& theta, double y) const {
    validate(theta);
    validate_response(y);
    const double mu = theta.location(), sigma = theta.scale();
    if (y > censor_) {
        const double z = (y - mu) / sigma;
        return -z - 2.0 * log1pexp(-z) - std::log(sigma);
    }
    const double a = (censor_ - mu) / sigma;
    return -log1pexp(-a);  // log L(a)
}

std::vector<double> CensoredLogistic::score(const ParamVector& theta, double y) const {
    validate(theta);
    validate_response(y);
    const double mu = theta.location(), sigma = theta.scale();
    if (y > censor_) {
        const double z = (y - mu) / sigma;
        const double L = logistic_cdf(z);
        return {(2.0 * L - 1.0) / sigma, ((2.0 * L - 1.0) * z - 1.0) / sigma};
    }
    const double a = (censor_ - mu) / sigma;
    const double upper = logistic_cdf(-a);  // 1 - L(a), stable for large a
    return {-upper / sigma, -upper * a / sigma};
}

double CensoredLogistic::cdf(const ParamVector& theta, double y) const {
    validate(theta);
    if (y < censor_) return 0.0;
    return logistic_cdf((y - theta.location()) / theta.scale());
}

double CensoredLogistic::quantile(const ParamVector& theta, double p) const {
    validate(theta);
    if (!(p > 0.0 && p < 1.0)) throw DataError("quantile probability must lie in (0, 1)");
    if (p <= prob_censored(theta)) return censor_;
    return theta.location() + theta.scale() * logistic_quantile(p);
}

double CensoredLogistic::sample(const ParamVector& theta, Rng& rng) const {
    validate(theta);
    return std::fmax(censor_, theta.location() + theta.scale() * logistic_quantile(rng.uniform01()));
}

double CensoredLogistic::prob_censored(const ParamVector& theta) const {
    return logistic_cdf((censor_ - theta.location()) / theta.scale());
}

double CensoredLogistic::crps(const ParamVector& theta, double y) const {
    validate(theta);
    validate_response(y);
    const double sigma = theta.scale();
    const double d = (y - theta.location()) / sigma;
    const double a = (censor_ - theta.location()) / sigma;
    // From int L(u)^2 du = softplus(u) - L(u): the uncensored logistic CRPS
    // d + 2*softplus(-d) - 1 plus the censoring correction L(a) - softplus(a).
    return sigma * (d + 2.0 * log1pexp(-d) - 1.0 + logistic_cdf(a) - log1pexp(a));
}

std::vector<double> CensoredLogistic::to_internal(const ParamVector& theta) const {
    validate(theta);
    return {theta.location(), std::log(theta.scale())};
}

ParamVector CensoredLogistic::from_internal(std::span<const double> internal) const {
    return ParamVector{internal[0], std::exp(internal[1])};
}

std::vector<double> CensoredLogistic::internal_jacobian(const ParamVector& theta) const {
    return {1.0, theta.scale()};
}

std::shared_ptr<const DistributionFamily> make_family(const std::string& name, double censor) {
    if (name == "cgaussian") return std::make_shared<CensoredGaussian>(censor);
    if (name == "clogistic") return std::make_shared<CensoredLogistic>(censor);
    throw ConfigError("unknown distribution family '" + name + "' (expected cgaussian or clogistic)");
}

}  // namespace distfor
