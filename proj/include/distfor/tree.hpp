#pragma once
#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "distfor/dataset.hpp"
#include "distfor/families.hpp"
#include "distfor/mle.hpp"
#include "distfor/random.hpp"

namespace distfor {

enum class TestStatistic { quad, max };

// The split point maximizes the standardized two-sample score statistic by
// default; min_statistic mirrors the alternative argmin reading.
enum class SplitObjective { max_statistic, min_statistic };

struct TreeConfig {
    int minsplit = 50;
    int minbucket = 20;
    double alpha = 1.0;  // 1 disables pre-pruning: split whenever admissible
    int mtry = -1;       // variables tested per node; -1 or >= m tests all
    TestStatistic statistic = TestStatistic::quad;
    SplitObjective split_objective = SplitObjective::max_statistic;
    int max_split_candidates = 50;   // numeric thresholds examined per variable
    int max_exhaustive_levels = 10;  // exhaustive level-subset search up to here
    int min_uncensored_per_child = 1;
    std::uint64_t seed = 0;  // drives mtry draws when mtry < m
};

// Score-vs-covariate independence test built on the permutation-test linear
// statistic t = vec(sum_i v(Z_i) s_i') with its conditional moments.
struct AssociationTest {
    double statistic = 0.0;
    double p_value = 1.0;
    int df = 0;
    Eigen::VectorXd linear_statistic;
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
    bool degenerate = true;
};

struct SplitRecord {
    int variable = -1;
    double threshold = std::numeric_limits<double>::quiet_NaN();  // numeric: Z <= threshold goes left
    std::uint64_t left_levels = 0;  // categorical: level codes routed left (bitmask)
    bool missing_left = true;
    double statistic = 0.0;  // split-point statistic at the chosen point
};

struct TreeNode {
    SplitRecord split{};
    int left = -1, right = -1;
    ParamVector params{};           // node MLE (kept for leaves and diagnostics)
    std::vector<int> members{};     // leaf only: training row ids, ascending
    bool fit_converged = true;
    double p_value = std::numeric_limits<double>::quiet_NaN();  // winning adjusted p
    int size = 0;
    int depth = 0;

    bool is_leaf() const { return left < 0; }
};

class DistTree {
  public:
    std::vector<TreeNode> nodes;
    TreeConfig config{};
    std::vector<int> root_rows;  // rows of the training dataset this tree saw
    int n_training = 0;          // total rows in the training dataset

    const TreeNode& root() const { return nodes.front(); }

    // Leaf node index reached by the given row of a schema-compatible dataset.
    int route(const Dataset& data, int row) const;

    const TreeNode& leaf_for(const Dataset& data, int row) const { return nodes[static_cast<std::size_t>(route(data, row))]; }

    // 0/1 co-membership weights over the n_training rows.
    std::vector<double> weights_for(const Dataset& data, int row) const;

    int depth() const;
    int leaf_count() const;
};

// Independence test between a score matrix (rows aligned with `rows`) and one
// covariate column. Rows with a missing covariate value are excluded.
AssociationTest test_association(const Eigen::MatrixXd& scores, const Covariate& column, std::span<const int> rows,
                                 TestStatistic statistic = TestStatistic::quad);

// Index of the winner under Bonferroni adjustment, or nullopt to stop. Tests
// must be aligned with `variables`.
std::optional<int> select_variable(const std::vector<AssociationTest>& tests, double alpha);

// Best split point on one variable; nullopt when no candidate satisfies
// minbucket (and the uncensored-rows guard) on both sides. `uncensored` is
// aligned with `rows`.
std::optional<SplitRecord> select_split(const Eigen::MatrixXd& scores, const Covariate& column,
                                        std::span<const int> rows, std::span<const std::uint8_t> uncensored,
                                        const TreeConfig& config);

// Grows a distributional tree: refit the node MLE, test score-covariate
// associations over an mtry subset, Bonferroni-select, split at the most
// discrepant point, recurse until minsplit/alpha/admissibility stops.
DistTree grow(const Dataset& data, const DistributionFamily& family, const TreeConfig& config);

// Same, restricted to a row subset (forest subsamples).
DistTree grow_on_rows(const Dataset& data, const DistributionFamily& family, const TreeConfig& config,
                      std::vector<int> rows, Rng& rng);

}  // namespace distfor
