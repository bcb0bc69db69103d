#include <doctest.h>

#include <cmath>

#include "distfor/errors.hpp"
#include "distfor/families.hpp"
#include "distfor/math.hpp"
#include "oracles.hpp"

using namespace distfor;

namespace {

constexpr double kPi = 3.14159265358979323846;

// shared property suite: both censored families have to satisfy these
void check_family_properties(const DistributionFamily& family, std::uint64_t seed) {
    Rng rng(seed);

    SUBCASE("score matches finite differences of the log-likelihood") {
        for (int rep = 0; rep < 250; ++rep) {
            const double mu = rng.uniform(-3.0, 12.0);
            const double sigma = rng.uniform(0.1, 4.0);
            const double y = rep % 3 == 0 ? 0.0 : rng.uniform(1e-3, 20.0);
            const ParamVector theta{mu, sigma};
            const std::vector<double> s = family.score(theta, y);
            const std::vector<double> fd = oracle::finite_difference_gradient(
                [&](std::span<const double> x) { return family.loglik(ParamVector{x[0], x[1]}, y); }, theta.values);
            for (int j = 0; j < 2; ++j) {
                CHECK(std::fabs(s[static_cast<std::size_t>(j)] - fd[static_cast<std::size_t>(j)]) <=
                      1e-6 * std::fmax(1.0, std::fabs(s[static_cast<std::size_t>(j)])));
            }
        }
    }

    SUBCASE("crps closed form matches numeric integration on a randomized grid") {
        for (int rep = 0; rep < 50; ++rep) {
            const double mu = rng.uniform(-2.0, 6.0);
            const double sigma = rng.uniform(0.3, 3.0);
            const double y = rep % 5 == 0 ? 0.0 : rng.uniform(0.0, 10.0);
            const ParamVector theta{mu, sigma};
            CHECK(std::fabs(family.crps(theta, y) - oracle::crps_numeric(family, theta, y)) <= 1e-4);
        }
    }

    SUBCASE("cdf is non-decreasing with the censoring jump at the atom") {
        const ParamVector theta{0.8, 1.3};
        double prev = -1.0;
        for (double y = -1.0; y <= 8.0; y += 0.05) {
            const double p = family.cdf(theta, y);
            CHECK(p >= prev);
            prev = p;
        }
        CHECK(family.cdf(theta, -1e-9) == 0.0);
        CHECK(family.cdf(theta, 0.0) == doctest::Approx(family.prob_censored(theta)).epsilon(1e-14));
    }

    SUBCASE("quantile is the generalized inverse of the cdf") {
        const ParamVector theta{1.0, 2.0};
        for (double p = 0.01; p < 1.0; p += 0.03) {
            const double q = family.quantile(theta, p);
            CHECK(family.cdf(theta, q) >= p - 1e-12);
            if (q > 0.0) CHECK(family.cdf(theta, q) == doctest::Approx(p).epsilon(1e-10));
        }
        for (double y : {0.3, 1.7, 4.2}) {
            CHECK(family.quantile(theta, family.cdf(theta, y)) == doctest::Approx(y).epsilon(1e-9));
        }
    }

    SUBCASE("empirical cdf of samples stays inside the DKW band") {
        const ParamVector theta{0.7, 1.4};
        const int n = 100000;
        std::vector<double> samples(n);
        for (double& v : samples) v = family.sample(theta, rng);
        const double eps = std::sqrt(std::log(2.0 / 0.001) / (2.0 * n));  // level 0.999
        for (int gi = 0; gi < 20; ++gi) {
            const double y = 0.0 + gi * (theta.location() + 4.0 * theta.scale()) / 19.0;
            int count = 0;
            for (double v : samples) count += v <= y ? 1 : 0;
            const double emp = static_cast<double>(count) / n;
            CHECK(std::fabs(emp - family.cdf(theta, y)) <= eps);
        }
    }

    SUBCASE("natural and internal coordinates are a bijection") {
        const ParamVector theta{-0.4, 0.07};
        const ParamVector back = family.from_internal(family.to_internal(theta));
        CHECK(back.location() == doctest::Approx(theta.location()).epsilon(1e-12));
        CHECK(back.scale() == doctest::Approx(theta.scale()).epsilon(1e-12));
    }

    SUBCASE("invalid inputs are rejected") {
        CHECK_THROWS_AS(family.loglik(ParamVector{0.0, -1.0}, 1.0), InvalidParameterError);
        CHECK_THROWS_AS(family.loglik(ParamVector{0.0, 0.0}, 1.0), InvalidParameterError);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(family.score(ParamVector{nan, 1.0}, 1.0), InvalidParameterError);
        CHECK_THROWS_AS(family.loglik(ParamVector{0.0, 1.0}, -0.5), DataError);
        CHECK_THROWS_AS(family.quantile(ParamVector{0.0, 1.0}, 0.0), DataError);
        CHECK_THROWS_AS(family.quantile(ParamVector{0.0, 1.0}, 1.0), DataError);
    }
}

}  // namespace

TEST_SUITE("families") {

TEST_CASE("censored gaussian log-likelihood values") {
    const CensoredGaussian fam;
    CHECK(fam.loglik(ParamVector{0.0, 1.0}, 0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-9));
    CHECK(fam.loglik(ParamVector{1.0, 1.0}, 1.0) == doctest::Approx(-0.9189385332046727).epsilon(1e-9));
    // direct evaluation -log(2 pi)/2 - z^2/2 - log sigma at z = 1.25
    const double expected = -0.5 * std::log(2.0 * kPi) - 0.78125 - std::log(2.0);
    CHECK(fam.loglik(ParamVector{0.5, 2.0}, 3.0) == doctest::Approx(expected).epsilon(1e-12));
    // stays finite under extreme censoring
    CHECK(std::isfinite(fam.loglik(ParamVector{50.0, 0.5}, 0.0)));
}

TEST_CASE("censored gaussian score values") {
    const CensoredGaussian fam;
    // stationary in mu at the observation
    for (double sigma : {0.5, 1.0, 3.0}) {
        CHECK(fam.score(ParamVector{2.5, sigma}, 2.5)[0] == doctest::Approx(0.0).epsilon(1e-14));
    }
    const std::vector<double> s = fam.score(ParamVector{0.0, 1.0}, 0.0);
    CHECK(s[0] == doctest::Approx(-0.7978845608028654).epsilon(1e-9));  // -phi(0)/Phi(0)
    CHECK(s[1] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("censored gaussian cdf values") {
    const CensoredGaussian fam;
    CHECK(fam.cdf(ParamVector{0.0, 1.0}, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fam.cdf(ParamVector{0.0, 1.0}, 60.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fam.cdf(ParamVector{2.0, 1.0}, 0.0) == doctest::Approx(0.0227501319481792).epsilon(1e-7));
}

TEST_CASE("censored gaussian quantiles") {
    const CensoredGaussian fam;
    CHECK(fam.quantile(ParamVector{0.0, 1.0}, 0.5) == 0.0);  // atom mass exactly 1/2
    CHECK(fam.quantile(ParamVector{3.0, 1.0}, 0.975) == doctest::Approx(4.959963984540054).epsilon(1e-9));
}

TEST_CASE("censored gaussian crps closed form") {
    const CensoredGaussian fam;
    // censoring negligible ten sigmas away: sigma * (2 phi(0) - 1/sqrt(pi))
    CHECK(fam.crps(ParamVector{10.0, 1.0}, 10.0) == doctest::Approx(0.2336949772551092).epsilon(1e-7));
    // farther observations score worse
    CHECK(fam.crps(ParamVector{0.0, 1.0}, 5.0) > fam.crps(ParamVector{0.0, 1.0}, 0.0));
}

TEST_CASE("censored gaussian total mass is one") {
    const CensoredGaussian fam;
    for (auto [mu, sigma] : {std::pair{1.0, 1.0}, {0.3, 2.0}, {-1.0, 0.7}}) {
        CHECK(oracle::total_mass_censored_gaussian(mu, sigma) == doctest::Approx(1.0).epsilon(1e-8));
        // and the library cdf agrees with the mass below any point
        CHECK(fam.cdf(ParamVector{mu, sigma}, mu + 40.0 * sigma) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("censored gaussian property suite") {
    const CensoredGaussian fam;
    check_family_properties(fam, 20260809);
}

TEST_CASE("censored logistic values") {
    const CensoredLogistic fam;
    // atom mass at mu = 0 is exactly 1/2
    CHECK(fam.loglik(ParamVector{0.0, 1.0}, 0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(fam.cdf(ParamVector{0.0, 1.0}, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
    // logistic density at the location is 1/(4 sigma)
    CHECK(fam.loglik(ParamVector{2.0, 0.5}, 2.0) == doctest::Approx(std::log(0.5)).epsilon(1e-12));
    CHECK(fam.quantile(ParamVector{0.0, 1.0}, 0.5) == 0.0);
    CHECK(fam.quantile(ParamVector{3.0, 1.0}, 0.75) == doctest::Approx(3.0 + std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("censored logistic total mass is one") {
    for (auto [mu, sigma] : {std::pair{1.0, 1.0}, {0.3, 2.0}, {-1.0, 0.7}}) {
        CHECK(oracle::total_mass_censored_logistic(mu, sigma) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("censored logistic property suite") {
    const CensoredLogistic fam;
    check_family_properties(fam, 777);
}

TEST_CASE("family factory") {
    CHECK(make_family("cgaussian")->name() == "cgaussian");
    CHECK(make_family("clogistic")->name() == "clogistic");
    CHECK_THROWS_AS(make_family("weibull"), ConfigError);
}

}  // TEST_SUITE
