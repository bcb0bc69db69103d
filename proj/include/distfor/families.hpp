#pragma once
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "distfor/random.hpp"

namespace distfor {

// Distribution parameters in natural coordinates. For the two implemented
// location-scale families this is (mu, sigma) with sigma > 0.
struct ParamVector {
    std::vector<double> values;

    ParamVector() = default;
    ParamVector(std::initializer_list<double> v) : values(v) {}
    explicit ParamVector(std::vector<double> v) : values(std::move(v)) {}

    int dim() const { return static_cast<int>(values.size()); }
    double operator[](int j) const { return values[static_cast<std::size_t>(j)]; }
    double& operator[](int j) { return values[static_cast<std::size_t>(j)]; }

    double location() const { return values[0]; }
    double scale() const { return values[1]; }
};

// Contract for a k-parameter response distribution: log-likelihood, score,
// CDF, quantile, sampling, and CRPS, plus the bijection between natural and
// unconstrained internal coordinates used by the optimizer. All member
// functions are pure; instances are stateless and safe to share across
// threads.
class DistributionFamily {
  public:
    virtual ~DistributionFamily() = default;

    virtual std::string_view name() const = 0;
    virtual int param_count() const = 0;

    // Left-censoring threshold; the support is [threshold, inf) with a point
    // mass at the threshold.
    virtual double censoring_point() const = 0;

    virtual double loglik(const ParamVector& theta, double y) const = 0;

    // Gradient of loglik in natural coordinates.
    virtual std::vector<double> score(const ParamVector& theta, double y) const = 0;

    virtual double cdf(const ParamVector& theta, double y) const = 0;
    virtual double quantile(const ParamVector& theta, double p) const = 0;
    virtual double sample(const ParamVector& theta, Rng& rng) const = 0;
    virtual double crps(const ParamVector& theta, double y) const = 0;

    // Probability of landing exactly on the censoring point.
    virtual double prob_censored(const ParamVector& theta) const = 0;

    // natural <-> unconstrained internal coordinates; a bijection.
    virtual std::vector<double> to_internal(const ParamVector& theta) const = 0;
    virtual ParamVector from_internal(std::span<const double> internal) const = 0;

    // Jacobian diag d(natural_j)/d(internal_j); both families use elementwise
    // maps, so the chain rule is a per-component factor.
    virtual std::vector<double> internal_jacobian(const ParamVector& theta) const = 0;

    void validate(const ParamVector& theta) const;
    void validate_response(double y) const;
};

// Gaussian left-censored at a threshold (default 0): Y = max(c, mu + sigma*Z)
// with Z standard normal. Dry-day point mass at c is Phi((c - mu)/sigma).
class CensoredGaussian final : public DistributionFamily {
  public:
    explicit CensoredGaussian(double censor = 0.0) : censor_(censor) {}

    std::string_view name() const override { return "cgaussian"; }
    int param_count() const override { return 2; }
    double censoring_point() const override { return censor_; }

    double loglik(const ParamVector& theta, double y) const override;
    std::vector<double> score(const ParamVector& theta, double y) const override;
    double cdf(const ParamVector& theta, double y) const override;
    double quantile(const ParamVector& theta, double p) const override;
    double sample(const ParamVector& theta, Rng& rng) const override;
    double crps(const ParamVector& theta, double y) const override;
    double prob_censored(const ParamVector& theta) const override;

    std::vector<double> to_internal(const ParamVector& theta) const override;
    ParamVector from_internal(std::span<const double> internal) const override;
    std::vector<double> internal_jacobian(const ParamVector& theta) const override;

  private:
    double censor_;
};

// Logistic distribution left-censored at a threshold (default 0); heavier
// tails than the censored Gaussian, otherwise the same contract.
class CensoredLogistic final : public DistributionFamily {
  public:
    explicit CensoredLogistic(double censor = 0.0) : censor_(censor) {}

    std::string_view name() const override { return "clogistic"; }
    int param_count() const override { return 2; }
    double censoring_point() const override { return censor_; }

    double loglik(const ParamVector& theta, double y) const override;
    std::vector<double> score(const ParamVector& theta, double y) const override;
    double cdf(const ParamVector& theta, double y) const override;
    double quantile(const ParamVector& theta, double p) const override;
    double sample(const ParamVector& theta, Rng& rng) const override;
    double crps(const ParamVector& theta, double y) const override;
    double prob_censored(const ParamVector& theta) const override;

    std::vector<double> to_internal(const ParamVector& theta) const override;
    ParamVector from_internal(std::span<const double> internal) const override;
    std::vector<double> internal_jacobian(const ParamVector& theta) const override;

  private:
    double censor_;
};

// Factory by family id: "cgaussian" or "clogistic".
std::shared_ptr<const DistributionFamily> make_family(const std::string& name, double censor = 0.0);

}  // namespace distfor
