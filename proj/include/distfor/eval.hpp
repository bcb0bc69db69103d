#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "distfor/dataset.hpp"
#include "distfor/families.hpp"
#include "distfor/forest.hpp"
#include "distfor/random.hpp"

namespace distfor {

// ------------------------------- CRPS / CRPSS -------------------------------

std::vector<double> per_observation_crps(const DistributionFamily& family, std::span<const ParamVector> predictions,
                                         std::span<const double> observations);

double mean_crps(const DistributionFamily& family, std::span<const ParamVector> predictions,
                 std::span<const double> observations);

// 1 - method/reference; positive means the method improves on the reference.
double crpss(double method_mean_crps, double reference_mean_crps);

struct EvalReport {
    std::vector<double> per_obs_crps;
    double mean_crps = 0.0;
    std::optional<double> crpss_vs_reference{};
};

EvalReport evaluate(const DistributionFamily& family, std::span<const ParamVector> predictions,
                    std::span<const double> observations, std::optional<double> reference_mean_crps = std::nullopt);

// --------------------------- permutation importance ---------------------------

struct ImportanceEntry {
    std::string variable;
    double delta_crps = 0.0;  // permuted minus baseline; larger = more important
};

// Breaks each covariate's association with the response by permuting its
// column in the evaluation data (n_permutations independent draws, averaged)
// and reports the CRPS increase. Entries come back in covariate order.
std::vector<ImportanceEntry> variable_importance(const DistForest& forest, const Dataset& test, Rng& rng,
                                                 int n_permutations = 5, int workers = 1);

// ------------------------ randomized quantile residuals ------------------------

struct QuantileResidualReport {
    // [observation][draw]; off the censoring atom all draws coincide
    std::vector<std::vector<double>> residuals;
    std::vector<std::vector<double>> pit;
    bool clamped = false;  // some PIT value hit the [1e-12, 1 - 1e-12] clamp
};

QuantileResidualReport quantile_residuals(const DistributionFamily& family, std::span<const ParamVector> predictions,
                                          std::span<const double> observations, Rng& rng, int n_draws = 100);

// Kolmogorov-Smirnov distance between sorted values and the uniform CDF.
double ks_statistic_uniform(std::vector<double> values);

// ------------------------------ cross-validation ------------------------------

// Grouped R x K fold plan: within each repetition the groups are shuffled and
// dealt round-robin, so folds partition the groups with sizes differing by at
// most one.
struct CvPlan {
    int repetitions = 1;
    int folds = 2;
    std::vector<std::string> group_labels;
    std::vector<int> group_of_row;
    std::vector<std::vector<int>> fold_of_group;  // [repetition][group]

    static CvPlan make(const Dataset& data, int repetitions, int folds, std::uint64_t seed);

    std::vector<int> fold_rows(int repetition, int fold) const;
};

// Fits on a training subset, returns a batch predictor usable on any
// schema-compatible dataset. Must be re-entrant.
struct ModelFactory {
    std::string name;
    std::function<std::function<std::vector<ParamVector>(const Dataset&)>(const Dataset& train)> fit;
};

struct CvCell {
    std::optional<double> mean_crps{};
    std::optional<double> crpss{};
};

struct CvResult {
    std::vector<std::string> models;
    int reference_index = 0;
    std::vector<std::vector<CvCell>> cells;  // [repetition][model]
};

// Out-of-fold evaluation of every factory, pooled per repetition; CRPSS is
// computed against the named reference factory. A factory that fails in any
// fold gets a missing entry for that repetition.
CvResult cross_validate(const Dataset& data, const DistributionFamily& family,
                        const std::vector<ModelFactory>& factories, const CvPlan& plan,
                        const std::string& reference_name);

}  // namespace distfor
