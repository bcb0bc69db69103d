#include <doctest.h>

#include <cmath>

#include "distfor/emos.hpp"
#include "distfor/eval.hpp"
#include "distfor/mle.hpp"
#include "distfor/synthetic.hpp"

using namespace distfor;

namespace {

GeneratedData emos_data(int n, std::uint64_t seed) {
    SyntheticScenario sc;
    sc.kind = ScenarioKind::emos_linear;
    sc.n = n;
    sc.seed = seed;
    return generate(sc);
}

}  // namespace

TEST_SUITE("emos") {

TEST_CASE("zero slopes reduce to the global MLE") {
    const CensoredGaussian fam;
    const Dataset ds = emos_data(500, 61).data;
    const FitResult global = fit(fam, WeightedSample{ds.y});

    EmosModel nested;
    nested.beta0 = global.theta.location();
    nested.gamma0 = std::log(global.theta.scale());
    nested.loc_column = "x_loc";
    nested.scale_column = "x_scale";
    for (int i : {0, 100, 499}) {
        const ParamVector p = predict_emos(nested, ds, i);
        CHECK(std::fabs(p.location() - global.theta.location()) < 1e-8);
        CHECK(std::fabs(p.scale() - global.theta.scale()) < 1e-8);
    }
    // same likelihood as the global fit, and the full model can only improve
    double nested_ll = 0.0;
    for (int i = 0; i < ds.n(); ++i) nested_ll += fam.loglik(predict_emos(nested, ds, i), ds.y[static_cast<std::size_t>(i)]);
    CHECK(nested_ll == doctest::Approx(global.loglik_value).epsilon(1e-10));
    const EmosModel full = fit_emos(ds, fam, "x_loc", "x_scale");
    CHECK(full.loglik >= nested_ll - 1e-9);
}

TEST_CASE("coefficients are recovered on generated data") {
    const CensoredGaussian fam;
    const Dataset ds = emos_data(5000, 62).data;
    const EmosModel m = fit_emos(ds, fam, "x_loc", "x_scale");
    CHECK(m.converged);
    CHECK(std::fabs(m.beta0 - 0.5) < 0.05);
    CHECK(std::fabs(m.beta1 - 1.0) < 0.05);
    CHECK(std::fabs(m.gamma0 - (-0.2)) < 0.05);
    CHECK(std::fabs(m.gamma1 - 0.8) < 0.05);
}

TEST_CASE("predictions are linear in the location regressor") {
    EmosModel m;
    m.beta0 = 2.0;
    m.beta1 = 0.0;
    m.gamma0 = 0.0;
    m.gamma1 = 0.0;
    m.loc_column = "x_loc";
    m.scale_column = "x_scale";
    const Dataset ds = emos_data(10, 63).data;
    for (int i = 0; i < ds.n(); ++i) {
        const ParamVector p = predict_emos(m, ds, i);
        CHECK(p.location() == 2.0);
        CHECK(p.scale() == 1.0);
    }

    m.beta1 = 1.7;
    Dataset two = subset(ds, std::vector<int>{0, 1});
    two.covariates[0].numeric = {0.4, 0.4 + 2.5};
    two.covariates[1].numeric = {1.0, 1.0};
    const double mu_a = predict_emos(m, two, 0).location();
    const double mu_b = predict_emos(m, two, 1).location();
    CHECK(mu_b - mu_a == doctest::Approx(1.7 * 2.5).epsilon(1e-14));
}

TEST_CASE("in-sample predictions reproduce the optimizer's final parameters") {
    const CensoredGaussian fam;
    const Dataset ds = emos_data(400, 64).data;
    const EmosModel m = fit_emos(ds, fam, "x_loc", "x_scale");
    // the converged gradient norm certifies the first-order conditions at
    // exactly these per-row parameters
    double ll = 0.0;
    for (int i = 0; i < ds.n(); ++i) ll += fam.loglik(predict_emos(m, ds, i), ds.y[static_cast<std::size_t>(i)]);
    CHECK(ll == doctest::Approx(m.loglik).epsilon(1e-12));
}

TEST_CASE("emos beats the intercept model on its own data") {
    const CensoredGaussian fam;
    int wins = 0;
    for (int seed = 0; seed < 5; ++seed) {
        const Dataset train = emos_data(2000, 800 + seed).data;
        const Dataset test = emos_data(1000, 900 + seed).data;
        const EmosModel m = fit_emos(train, fam, "x_loc", "x_scale");
        std::vector<ParamVector> emos_pred, intercept_pred;
        const FitResult global = fit(fam, WeightedSample{train.y});
        for (int i = 0; i < test.n(); ++i) {
            emos_pred.push_back(predict_emos(m, test, i));
            intercept_pred.push_back(global.theta);
        }
        const double a = mean_crps(fam, emos_pred, test.y);
        const double b = mean_crps(fam, intercept_pred, test.y);
        wins += a < b ? 1 : 0;
        CHECK(crpss(a, a) == 0.0);  // self skill is exactly zero
    }
    CHECK(wins == 5);
}

TEST_CASE("degenerate regressors are rejected") {
    const CensoredGaussian fam;
    Dataset ds = emos_data(100, 65).data;
    for (double& v : ds.covariates[0].numeric) v = 1.0;
    CHECK_THROWS_WITH_AS(fit_emos(ds, fam, "x_loc", "x_scale"), doctest::Contains("zero variance"), DataError);
    CHECK_THROWS_AS(fit_emos(ds, fam, "nope", "x_scale"), DataError);

    Dataset missing = emos_data(50, 66).data;
    missing.covariates[0].numeric[3] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(fit_emos(missing, fam, "x_loc", "x_scale"), DataError);
}

TEST_CASE("missing inputs at prediction time are an error") {
    const CensoredGaussian fam;
    const Dataset ds = emos_data(50, 67).data;
    const EmosModel m = fit_emos(ds, fam, "x_loc", "x_scale");
    Dataset q = subset(ds, std::vector<int>{0});
    q.covariates[1].numeric[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(predict_emos(m, q, 0), DataError);
    Dataset renamed = subset(ds, std::vector<int>{0});
    renamed.covariates[0].name = "other";
    CHECK_THROWS_AS(predict_emos(m, renamed, 0), SchemaMismatchError);
}

TEST_CASE("log transform floors zero spread values") {
    EmosModel m;
    m.scale_transform = ScaleTransform::log_input;
    CHECK(emos_scale_input(m, 0.0) == doctest::Approx(std::log(1e-6)).epsilon(1e-12));
    CHECK(emos_scale_input(m, 2.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(emos_scale_input(m, -1.0), DataError);
    m.scale_transform = ScaleTransform::identity;
    CHECK(emos_scale_input(m, -1.0) == -1.0);
}

}  // TEST_SUITE
