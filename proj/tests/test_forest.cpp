#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "distfor/eval.hpp"
#include "distfor/forest.hpp"
#include "distfor/mle.hpp"
#include "distfor/synthetic.hpp"

using namespace distfor;

namespace {

GeneratedData step_data(int n, std::uint64_t seed, int m_noise = 1) {
    SyntheticScenario sc;
    sc.kind = ScenarioKind::step_location;
    sc.mu_low = 0.0;
    sc.mu_high = 3.0;
    sc.n = n;
    sc.m_noise = m_noise;
    sc.seed = seed;
    return generate(sc);
}

}  // namespace

TEST_SUITE("forest") {

TEST_CASE("a one-tree full-sample forest degenerates to a single tree") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const Dataset ds = step_data(300, 41).data;
    ForestConfig cfg;
    cfg.ntree = 1;
    cfg.subsample_fraction = 1.0;
    cfg.mtry = ds.m();
    cfg.minsplit = 60;
    cfg.minbucket = 25;
    cfg.alpha = 0.05;
    const DistForest forest = grow_forest(ds, fam, cfg);
    REQUIRE(forest.trees.size() == 1);

    TreeConfig tcfg = cfg.tree_config(ds.m());
    const DistTree tree = grow(ds, *fam, tcfg);
    REQUIRE(forest.trees[0].nodes.size() == tree.nodes.size());

    for (int i : {0, 50, 150, 299}) {
        const ParamVector from_forest = forest.predict_params(ds, i);
        const ParamVector from_tree = tree.leaf_for(ds, i).params;
        CHECK(std::fabs(from_forest.location() - from_tree.location()) < 1e-10);
        CHECK(std::fabs(from_forest.scale() - from_tree.scale()) < 1e-10);
    }

    SUBCASE("weights reduce to co-leaf indicators over the leaf size") {
        const std::vector<double> w = forest.weights(ds, 7);
        const TreeNode& leaf = tree.leaf_for(ds, 7);
        for (int i = 0; i < ds.n(); ++i) {
            const bool member = std::find(leaf.members.begin(), leaf.members.end(), i) != leaf.members.end();
            CHECK(w[static_cast<std::size_t>(i)] ==
                  doctest::Approx(member ? 1.0 / leaf.members.size() : 0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("forest weights sum to one") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const GeneratedData g = step_data(500, 42, 2);
    ForestConfig cfg;
    cfg.ntree = 100;
    cfg.seed = 9;
    const DistForest forest = grow_forest(g.data, fam, cfg, 2);
    SyntheticScenario qc;
    qc.kind = ScenarioKind::step_location;
    qc.n = 200;
    qc.m_noise = 2;
    qc.seed = 43;
    const Dataset query = generate(qc).data;
    for (int i = 0; i < query.n(); ++i) {
        const std::vector<double> w = forest.weights(query, i);
        double sum = 0.0;
        for (double v : w) {
            CHECK(v >= 0.0);
            sum += v;
        }
        CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
}

TEST_CASE("weights are invariant to tree order") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const Dataset ds = step_data(300, 44).data;
    ForestConfig cfg;
    cfg.ntree = 20;
    cfg.seed = 5;
    DistForest forest = grow_forest(ds, fam, cfg);
    const std::vector<double> w1 = forest.weights(ds, 11);
    std::reverse(forest.trees.begin(), forest.trees.end());
    const std::vector<double> w2 = forest.weights(ds, 11);
    for (std::size_t i = 0; i < w1.size(); ++i) CHECK(std::fabs(w1[i] - w2[i]) <= 1e-14);
}

TEST_CASE("fixed seeds reproduce the forest bit for bit") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const Dataset ds = step_data(400, 45).data;
    ForestConfig cfg;
    cfg.ntree = 30;
    cfg.seed = 77;
    const DistForest a = grow_forest(ds, fam, cfg, 2);
    const DistForest b = grow_forest(ds, fam, cfg, 1);  // worker count must not matter
    REQUIRE(a.trees.size() == b.trees.size());
    for (std::size_t t = 0; t < a.trees.size(); ++t) {
        REQUIRE(a.trees[t].nodes.size() == b.trees[t].nodes.size());
        CHECK(a.trees[t].root_rows == b.trees[t].root_rows);
        for (std::size_t i = 0; i < a.trees[t].nodes.size(); ++i) {
            const TreeNode& na = a.trees[t].nodes[i];
            const TreeNode& nb = b.trees[t].nodes[i];
            CHECK(na.is_leaf() == nb.is_leaf());
            if (na.is_leaf()) {
                CHECK(na.params.location() == nb.params.location());
                CHECK(na.params.scale() == nb.params.scale());
                CHECK(na.members == nb.members);
            } else {
                CHECK(na.split.variable == nb.split.variable);
                CHECK(na.split.threshold == nb.split.threshold);
            }
        }
    }
    for (int i : {0, 100, 399}) {
        const ParamVector pa = a.predict_params(ds, i);
        const ParamVector pb = b.predict_params(ds, i);
        CHECK(pa.location() == pb.location());
        CHECK(pa.scale() == pb.scale());
    }
}

TEST_CASE("homogeneous training data predicts the global MLE everywhere") {
    const auto fam = std::make_shared<CensoredGaussian>();
    SyntheticScenario sc;
    sc.kind = ScenarioKind::null_effect;
    sc.mu_const = 1.0;
    sc.sigma_const = 1.0;
    sc.n = 1000;
    sc.m_noise = 3;
    sc.seed = 46;
    const Dataset ds = generate(sc).data;
    ForestConfig cfg;
    cfg.ntree = 100;
    cfg.alpha = 0.05;  // let the association tests stop the trees on null data
    cfg.seed = 3;
    const DistForest forest = grow_forest(ds, fam, cfg, 2);
    const FitResult global = fit(*fam, WeightedSample{ds.y});

    SyntheticScenario qc = sc;
    qc.n = 50;
    qc.seed = 47;
    const Dataset query = generate(qc).data;
    double sup = 0.0;
    for (int i = 0; i < query.n(); ++i) {
        const ParamVector p = forest.predict_params(query, i);
        sup = std::fmax(sup, std::fabs(p.location() - global.theta.location()));
        sup = std::fmax(sup, std::fabs(p.scale() - global.theta.scale()));
    }
    CHECK(sup < 0.1);
}

TEST_CASE("step data predictions recover the regime parameters") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const GeneratedData g = step_data(800, 48, 1);
    ForestConfig cfg;
    cfg.ntree = 100;
    cfg.seed = 21;
    const DistForest forest = grow_forest(g.data, fam, cfg, 2);

    Dataset query = subset(g.data, std::vector<int>{0, 1});
    query.covariates[0].numeric = {0.15, 0.85};  // deep inside each regime
    query.covariates[1].numeric = {0.5, 0.5};
    const ParamVector lo = forest.predict_params(query, 0);
    const ParamVector hi = forest.predict_params(query, 1);
    CHECK(std::fabs(lo.location() - 0.0) < 0.2);
    CHECK(std::fabs(lo.scale() - 1.0) < 0.2);
    CHECK(std::fabs(hi.location() - 3.0) < 0.2);
    CHECK(std::fabs(hi.scale() - 1.0) < 0.2);
}

TEST_CASE("the forest smooths the tree's step") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const GeneratedData g = step_data(800, 49, 1);
    ForestConfig cfg;
    cfg.ntree = 100;
    cfg.seed = 31;
    const DistForest forest = grow_forest(g.data, fam, cfg, 2);
    TreeConfig tcfg = cfg.tree_config(g.data.m());
    tcfg.alpha = 0.05;  // a pre-pruned tree keeps its step sharp
    const DistTree tree = grow(g.data, *fam, tcfg);

    const int grid_n = 201;
    Dataset grid = subset(g.data, std::vector<int>(static_cast<std::size_t>(grid_n), 0));
    for (int i = 0; i < grid_n; ++i) {
        grid.covariates[0].numeric[static_cast<std::size_t>(i)] = static_cast<double>(i) / (grid_n - 1);
        grid.covariates[1].numeric[static_cast<std::size_t>(i)] = 0.5;
    }
    const auto transition_width = [&](const std::function<double(int)>& mu_at) {
        // width of the region where mu is not within 10% of either plateau
        const double lo = 0.0, hi = 3.0, band = 0.1 * (hi - lo);
        int count = 0;
        for (int i = 0; i < grid_n; ++i) {
            const double m = mu_at(i);
            if (std::fabs(m - lo) > band && std::fabs(m - hi) > band) ++count;
        }
        return static_cast<double>(count) / (grid_n - 1);
    };
    const std::vector<ParamVector> fp = forest.predict_batch(grid, 2);
    const double forest_width = transition_width([&](int i) { return fp[static_cast<std::size_t>(i)].location(); });
    const double tree_width =
        transition_width([&](int i) { return tree.leaf_for(grid, i).params.location(); });
    CHECK(forest_width > tree_width);
}

TEST_CASE("irrelevant covariates degrade the CRPS only mildly") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const GeneratedData train_base = step_data(800, 50, 1);
    const GeneratedData test_base = step_data(400, 51, 1);

    SyntheticScenario noisy;
    noisy.kind = ScenarioKind::step_location;
    noisy.mu_low = 0.0;
    noisy.mu_high = 3.0;
    noisy.n = 800;
    noisy.m_noise = 11;
    noisy.seed = 50;
    const GeneratedData train_noisy = generate(noisy);
    noisy.n = 400;
    noisy.seed = 51;
    const GeneratedData test_noisy = generate(noisy);

    ForestConfig cfg;
    cfg.ntree = 100;
    cfg.seed = 8;
    const DistForest base = grow_forest(train_base.data, fam, cfg, 2);
    const DistForest wide = grow_forest(train_noisy.data, fam, cfg, 2);
    const double crps_base = mean_crps(*fam, base.predict_batch(test_base.data, 2), test_base.data.y);
    const double crps_wide = mean_crps(*fam, wide.predict_batch(test_noisy.data, 2), test_noisy.data.y);
    CHECK(crps_wide < 1.10 * crps_base);
}

TEST_CASE("out-of-sample CRPS beats the intercept model on step data") {
    const auto fam = std::make_shared<CensoredGaussian>();
    int wins = 0;
    for (int seed = 0; seed < 5; ++seed) {
        const GeneratedData train = step_data(800, 600 + seed, 1);
        const GeneratedData test = step_data(400, 700 + seed, 1);
        ForestConfig cfg;
        cfg.seed = static_cast<std::uint64_t>(seed);
        const DistForest forest = grow_forest(train.data, fam, cfg, 2);
        const double forest_crps = mean_crps(*fam, forest.predict_batch(test.data, 2), test.data.y);
        const FitResult global = fit(*fam, WeightedSample{train.data.y});
        const std::vector<ParamVector> intercept(static_cast<std::size_t>(test.data.n()), global.theta);
        const double intercept_crps = mean_crps(*fam, intercept, test.data.y);
        wins += forest_crps < intercept_crps ? 1 : 0;
    }
    CHECK(wins == 5);
}

TEST_CASE("degenerate training data fails loudly") {
    const auto fam = std::make_shared<CensoredGaussian>();
    Dataset ds = step_data(100, 52).data;
    for (double& v : ds.y) v = 0.0;
    ForestConfig cfg;
    cfg.ntree = 3;
    CHECK_THROWS_AS(grow_forest(ds, fam, cfg), FitError);
}

TEST_CASE("degenerate subsamples are retried and then skipped with a count") {
    const auto fam = std::make_shared<CensoredGaussian>();
    // two uncensored rows in forty: small subsamples are often all-censored
    Dataset ds = step_data(40, 54).data;
    Rng rng(1);
    for (int i = 0; i < ds.n(); ++i)
        ds.y[static_cast<std::size_t>(i)] = i < 2 ? 1.0 + rng.uniform01() : 0.0;
    ForestConfig cfg;
    cfg.ntree = 12;
    cfg.subsample_fraction = 0.2;
    cfg.minsplit = 8;
    cfg.minbucket = 4;
    cfg.seed = 3;
    const DistForest forest = grow_forest(ds, fam, cfg);
    CHECK(static_cast<int>(forest.trees.size()) + forest.skipped_trees == cfg.ntree);
    CHECK(forest.skipped_trees > 0);
    CHECK(!forest.trees.empty());
    // predictions still work off the surviving trees
    const ParamVector p = forest.predict_params(ds, 0);
    CHECK(p.scale() > 0.0);
}

TEST_CASE("schema mismatches are rejected at prediction time") {
    const auto fam = std::make_shared<CensoredGaussian>();
    const Dataset ds = step_data(200, 53, 1).data;
    ForestConfig cfg;
    cfg.ntree = 5;
    const DistForest forest = grow_forest(ds, fam, cfg);
    Dataset other = ds;
    other.covariates[0].name = "renamed";
    CHECK_THROWS_AS(forest.weights(other, 0), SchemaMismatchError);
    Dataset fewer = ds;
    fewer.covariates.pop_back();
    CHECK_THROWS_AS(forest.predict_params(fewer, 0), SchemaMismatchError);
}

}  // TEST_SUITE
