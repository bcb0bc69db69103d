#include "distfor/math.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

namespace distfor {

double log1pexp(double x) {
    if (x > 33.3) return x;
    if (x > -37.0) return std::log1p(std::exp(x));
    return std::exp(x);
}

double norm_logcdf(double x) {
    if (x > 6.0) return -0.5 * std::erfc(x / kSqrt2);  // log(1 - eps) ~ -eps
    if (x > -37.0) return std::log(0.5 * std::erfc(-x / kSqrt2));
    // Asymptotic expansion of the Mills ratio: Phi(x) = phi(x)/(-x) * series,
    // series = 1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - 945/x^10. At x = -37 the
    // truncation error is below 1e-13 relative.
    const double r = 1.0 / (x * x);
    const double series = 1.0 + r * (-1.0 + r * (3.0 + r * (-15.0 + r * (105.0 - 945.0 * r))));
    return norm_logpdf(x) - std::log(-x) + std::log(series);
}

double norm_mills_ratio(double x) {
    // exp(log phi - log Phi) is stable everywhere since both logs are exact.
    return std::exp(norm_logpdf(x) - norm_logcdf(x));
}

double norm_quantile(double p) {
    // AS241 (Wichura 1988), double-precision branch.
    if (!(p > 0.0 && p < 1.0)) return std::numeric_limits<double>::quiet_NaN();
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2509.0809287301226727 * r + 33430.575583588128105) * r + 67265.770927008700853) * r +
                    45921.953931549871457) *
                       r +
                   13731.693765509461125) *
                      r +
                  1971.5909503065514427) *
                     r +
                 133.14166789178437745) *
                    r +
                3.387132872796366608) /
               (((((((5226.495278852545703 * r + 28729.085735721942674) * r + 39307.89580009271061) * r +
                    21213.794301586595867) *
                       r +
                   5394.1960214247511077) *
                      r +
                  687.1870074920579083) *
                     r +
                 42.313330701600911252) *
                    r +
                1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r + 0.24178072517745061177) * r +
                 1.27045825245236838258) *
                    r +
                3.64784832476320460504) *
                   r +
               5.7694972214606914055) *
                  r +
              4.6303378461565452959) *
                 r +
             1.42343711074968357734) /
            (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r + 0.0151986665636164571966) * r +
                 0.14810397642748007459) *
                    r +
                0.68976733498510000455) *
                   r +
               1.6763848301838038494) *
                  r +
              2.05319162663775882187) *
                 r +
             1.0);
    } else {
        r -= 5.0;
        v = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r + 0.0012426609473880784386) * r +
                 0.026532189526576123093) *
                    r +
                0.29656057182850489123) *
                   r +
               1.7848265399172913358) *
                  r +
              5.4637849111641143699) *
                 r +
             6.6579046435011037772) /
            (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r + 1.8463183175100546818e-5) * r +
                 7.868691311456132591e-4) *
                    r +
                0.0148753612908506148525) *
                   r +
               0.13692988092273580531) *
                  r +
              0.59983220655588793769) *
                 r +
             1.0);
    }
    return q < 0.0 ? -v : v;
}

double chisq_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, x / 2.0);
}

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    double s = 0.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * x * x);
        s += (j % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::fmin(1.0, std::fmax(0.0, 2.0 * s));
}

double kolmogorov_critical(double alpha) {
    double lo = 0.2, hi = 3.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (kolmogorov_sf(mid) > alpha ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace distfor
