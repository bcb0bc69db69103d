#pragma once
#include <cmath>

namespace distfor {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))
inline constexpr double kInvSqrtPi = 0.56418958354775628695;   // 1/sqrt(pi)
inline constexpr double kSqrt2 = 1.41421356237309504880;

inline double norm_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

inline double norm_logpdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// log Phi(x), accurate over the whole real line. erfc covers x down to about
// -37; past that the asymptotic Mills-ratio expansion takes over, keeping the
// censored log-likelihood finite for arbitrarily deep censoring.
double norm_logcdf(double x);

// phi(x) / Phi(x); stable for arbitrarily negative x.
double norm_mills_ratio(double x);

// Inverse of norm_cdf on (0, 1). Wichura's AS241 rational approximation.
double norm_quantile(double p);

// Upper tail of the chi-squared distribution, P[X > x] with df > 0.
double chisq_sf(double x, double df);

// log(1 + exp(x)) without overflow.
double log1pexp(double x);

// Standard logistic CDF and its inverse.
inline double logistic_cdf(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logistic_quantile(double p) { return std::log(p) - std::log1p(-p); }

// Upper tail of the Kolmogorov distribution, P[sup|B| > x].
double kolmogorov_sf(double x);

// Critical value c such that kolmogorov_sf(c) == alpha.
double kolmogorov_critical(double alpha);

}  // namespace distfor
