#pragma once
#include <memory>
#include <optional>
#include <vector>

#include "distfor/dataset.hpp"
#include "distfor/families.hpp"
#include "distfor/tree.hpp"

namespace distfor {

struct ForestConfig {
    int ntree = 100;
    int mtry = 0;  // <= 0: ceil(m / 3)
    double subsample_fraction = 0.632;
    int minsplit = 50;
    int minbucket = 20;
    double alpha = 1.0;  // no pre-pruning by default
    TestStatistic statistic = TestStatistic::quad;
    SplitObjective split_objective = SplitObjective::max_statistic;
    int min_uncensored_per_child = 1;
    std::uint64_t seed = 1;
    int max_tree_retries = 3;

    TreeConfig tree_config(int resolved_mtry) const {
        TreeConfig tc;
        tc.minsplit = minsplit;
        tc.minbucket = minbucket;
        tc.alpha = alpha;
        tc.mtry = resolved_mtry;
        tc.statistic = statistic;
        tc.split_objective = split_objective;
        tc.min_uncensored_per_child = min_uncensored_per_child;
        return tc;
    }
};

// Ensemble of distributional trees grown on independent subsamples. Keeps the
// training responses and weights so predictions can refit the weighted MLE
// under the forest weights of any query point.
class DistForest {
  public:
    std::vector<DistTree> trees;
    ForestConfig config{};
    int resolved_mtry = 0;
    std::shared_ptr<const DistributionFamily> family;
    std::vector<ColumnSpec> schema;
    std::string response_name;
    std::vector<double> train_y;
    std::vector<double> train_w;  // empty means all ones
    ParamVector global_params;    // full-sample MLE, used as a warm start
    int skipped_trees = 0;

    int n_training() const { return static_cast<int>(train_y.size()); }
    bool slim() const { return train_y.empty(); }

    // Averaged nearest-neighbor weights of the query row: each tree spreads
    // total weight 1 over the members of the leaf the query lands in, so the
    // result sums to 1.
    std::vector<double> weights(const Dataset& query, int row) const;

    // Adaptive local likelihood estimate: weighted MLE under weights(query, row).
    ParamVector predict_params(const Dataset& query, int row) const;

    std::vector<ParamVector> predict_batch(const Dataset& query, int workers = 1) const;

    double mean_depth() const;
    double mean_leaves() const;

  private:
    std::vector<double> weights_unchecked(const Dataset& query, int row) const;
    ParamVector predict_unchecked(const Dataset& query, int row) const;
};

// Predicted distribution at one query point; wraps the family evaluated at
// the local parameter estimate.
struct PredictiveDistribution {
    std::shared_ptr<const DistributionFamily> family;
    ParamVector params;

    double cdf(double y) const { return family->cdf(params, y); }
    double quantile(double p) const { return family->quantile(params, p); }
    double crps(double y) const { return family->crps(params, y); }
    double prob_censored() const { return family->prob_censored(params); }
};

DistForest grow_forest(const Dataset& data, std::shared_ptr<const DistributionFamily> family,
                       const ForestConfig& config, int workers = 1);

std::vector<double> forest_weights(const DistForest& forest, const Dataset& query, int row);

ParamVector predict(const DistForest& forest, const Dataset& query, int row);
PredictiveDistribution predict_distribution(const DistForest& forest, const Dataset& query, int row);

}  // namespace distfor
