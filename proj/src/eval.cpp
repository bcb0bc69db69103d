#include "distfor/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "distfor/math.hpp"
#include "distfor/parallel.hpp"

namespace distfor {

std::vector<double> per_observation_crps(const DistributionFamily& family, std::span<const ParamVector> predictions,
                                         std::span<const double> observations) {
    if (predictions.size() != observations.size())
        throw DataError("prediction and observation lengths differ");
    std::vector<double> out(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i) out[i] = family.crps(predictions[i], observations[i]);
    return out;
}

double mean_crps(const DistributionFamily& family, std::span<const ParamVector> predictions,
                 std::span<const double> observations) {
    const std::vector<double> c = per_observation_crps(family, predictions, observations);
    double s = 0.0;
    for (double v : c) s += v;
    return s / static_cast<double>(c.size());
}

double crpss(double method_mean_crps, double reference_mean_crps) {
    if (reference_mean_crps == 0.0) throw DataError("reference mean CRPS is zero; skill score undefined");
    return 1.0 - method_mean_crps / reference_mean_crps;
}

EvalReport evaluate(const DistributionFamily& family, std::span<const ParamVector> predictions,
                    std::span<const double> observations, std::optional<double> reference_mean_crps) {
    EvalReport rep;
    rep.per_obs_crps = per_observation_crps(family, predictions, observations);
    double s = 0.0;
    for (double v : rep.per_obs_crps) s += v;
    rep.mean_crps = s / static_cast<double>(rep.per_obs_crps.size());
    if (reference_mean_crps) rep.crpss_vs_reference = crpss(rep.mean_crps, *reference_mean_crps);
    return rep;
}

// --------------------------- permutation importance ---------------------------

namespace {

void apply_permutation_to_column(Covariate& col, const std::vector<int>& perm) {
    if (col.kind == ColumnKind::numeric) {
        std::vector<double> v(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) v[i] = col.numeric[static_cast<std::size_t>(perm[i])];
        col.numeric = std::move(v);
    } else {
        std::vector<int> v(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) v[i] = col.codes[static_cast<std::size_t>(perm[i])];
        col.codes = std::move(v);
    }
}

}  // namespace

std::vector<ImportanceEntry> variable_importance(const DistForest& forest, const Dataset& test, Rng& rng,
                                                 int n_permutations, int workers) {
    if (test.n() == 0) throw DataError("empty evaluation data");
    if (n_permutations < 1) throw ConfigError("n_permutations must be at least 1");
    check_schema_match(forest.schema, test);

    const std::vector<ParamVector> base_pred = forest.predict_batch(test, workers);
    const double baseline = mean_crps(*forest.family, base_pred, test.y);

    std::vector<ImportanceEntry> out(static_cast<std::size_t>(test.m()));
    for (int j = 0; j < test.m(); ++j) {
        out[static_cast<std::size_t>(j)].variable = test.covariate(j).name;
        double acc = 0.0;
        for (int p = 0; p < n_permutations; ++p) {
            // streams keyed by (variable, permutation): evaluation order never
            // changes which permutations are drawn
            Rng stream = rng.spawn(static_cast<std::uint64_t>(j) * 1009 + static_cast<std::uint64_t>(p));
            Dataset permuted = test;
            apply_permutation_to_column(permuted.covariates[static_cast<std::size_t>(j)], stream.permutation(test.n()));
            const std::vector<ParamVector> pred = forest.predict_batch(permuted, workers);
            acc += mean_crps(*forest.family, pred, test.y);
        }
        out[static_cast<std::size_t>(j)].delta_crps = acc / n_permutations - baseline;
    }
    return out;
}

// ------------------------ randomized quantile residuals ------------------------

QuantileResidualReport quantile_residuals(const DistributionFamily& family, std::span<const ParamVector> predictions,
                                          std::span<const double> observations, Rng& rng, int n_draws) {
    if (n_draws < 1) throw ConfigError("n_draws must be at least 1");
    if (predictions.size() != observations.size())
        throw DataError("prediction and observation lengths differ");

    QuantileResidualReport rep;
    const std::size_t n = observations.size();
    rep.residuals.assign(n, std::vector<double>(static_cast<std::size_t>(n_draws)));
    rep.pit.assign(n, std::vector<double>(static_cast<std::size_t>(n_draws)));
    const double censor = family.censoring_point();

    for (std::size_t i = 0; i < n; ++i) {
        const double y = observations[i];
        if (y > censor) {
            // deterministic off the atom
            double p = family.cdf(predictions[i], y);
            if (p < 1e-12 || p > 1.0 - 1e-12) {
                p = std::clamp(p, 1e-12, 1.0 - 1e-12);
                rep.clamped = true;
            }
            const double r = norm_quantile(p);
            for (int d = 0; d < n_draws; ++d) {
                rep.pit[i][static_cast<std::size_t>(d)] = p;
                rep.residuals[i][static_cast<std::size_t>(d)] = r;
            }
        } else {
            // randomize over the censoring atom: PIT uniform on (0, F(censor)]
            const double atom = family.prob_censored(predictions[i]);
            for (int d = 0; d < n_draws; ++d) {
                double p = rng.uniform01() * atom;
                if (p < 1e-12 || p > 1.0 - 1e-12) {
                    p = std::clamp(p, 1e-12, 1.0 - 1e-12);
                    rep.clamped = true;
                }
                rep.pit[i][static_cast<std::size_t>(d)] = p;
                rep.residuals[i][static_cast<std::size_t>(d)] = norm_quantile(p);
            }
        }
    }
    return rep;
}

double ks_statistic_uniform(std::vector<double> values) {
    if (values.empty()) throw DataError("empty sample for the KS statistic");
    std::sort(values.begin(), values.end());
    const double n = static_cast<double>(values.size());
    double d = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        d = std::fmax(d, std::fabs((static_cast<double>(i) + 1.0) / n - values[i]));
        d = std::fmax(d, std::fabs(values[i] - static_cast<double>(i) / n));
    }
    return d;
}

// ------------------------------ cross-validation ------------------------------

CvPlan CvPlan::make(const Dataset& data, int repetitions, int folds, std::uint64_t seed) {
    if (repetitions < 1) throw ConfigError("repetitions must be at least 1");
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");

    CvPlan plan;
    plan.repetitions = repetitions;
    plan.folds = folds;

    // groups from the group key; without one, every row is its own group
    std::map<std::string, int> index;
    plan.group_of_row.resize(static_cast<std::size_t>(data.n()));
    if (data.groups.empty()) {
        plan.group_labels.resize(static_cast<std::size_t>(data.n()));
        for (int i = 0; i < data.n(); ++i) {
            plan.group_labels[static_cast<std::size_t>(i)] = "row" + std::to_string(i + 1);
            plan.group_of_row[static_cast<std::size_t>(i)] = i;
        }
    } else {
        std::vector<std::string> sorted(data.groups);
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        plan.group_labels = sorted;
        for (std::size_t g = 0; g < sorted.size(); ++g) index[sorted[g]] = static_cast<int>(g);
        for (int i = 0; i < data.n(); ++i)
            plan.group_of_row[static_cast<std::size_t>(i)] = index[data.groups[static_cast<std::size_t>(i)]];
    }

    const int n_groups = static_cast<int>(plan.group_labels.size());
    if (folds > n_groups)
        throw ConfigError("cannot form " + std::to_string(folds) + " folds from " + std::to_string(n_groups) +
                          " groups");

    Rng rng(seed);
    plan.fold_of_group.resize(static_cast<std::size_t>(repetitions));
    for (int r = 0; r < repetitions; ++r) {
        std::vector<int> order = rng.permutation(n_groups);
        std::vector<int>& assignment = plan.fold_of_group[static_cast<std::size_t>(r)];
        assignment.resize(static_cast<std::size_t>(n_groups));
        for (int g = 0; g < n_groups; ++g) assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(g)])] = g % folds;
    }
    return plan;
}

std::vector<int> CvPlan::fold_rows(int repetition, int fold) const {
    std::vector<int> rows;
    const std::vector<int>& assignment = fold_of_group[static_cast<std::size_t>(repetition)];
    for (std::size_t i = 0; i < group_of_row.size(); ++i)
        if (assignment[static_cast<std::size_t>(group_of_row[i])] == fold) rows.push_back(static_cast<int>(i));
    return rows;
}

CvResult cross_validate(const Dataset& data, const DistributionFamily& family,
                        const std::vector<ModelFactory>& factories, const CvPlan& plan,
                        const std::string& reference_name) {
    if (factories.empty()) throw ConfigError("cross-validation needs at least one model factory");
    CvResult result;
    result.reference_index = -1;
    for (std::size_t f = 0; f < factories.size(); ++f) {
        result.models.push_back(factories[f].name);
        if (factories[f].name == reference_name) result.reference_index = static_cast<int>(f);
    }
    if (result.reference_index < 0) throw ConfigError("reference model '" + reference_name + "' is not among the factories");

    const int n_models = static_cast<int>(factories.size());
    result.cells.assign(static_cast<std::size_t>(plan.repetitions),
                        std::vector<CvCell>(static_cast<std::size_t>(n_models)));

    for (int r = 0; r < plan.repetitions; ++r) {
        std::vector<double> crps_sum(static_cast<std::size_t>(n_models), 0.0);
        std::vector<long> crps_count(static_cast<std::size_t>(n_models), 0);
        std::vector<bool> failed(static_cast<std::size_t>(n_models), false);

        for (int f = 0; f < plan.folds; ++f) {
            const std::vector<int> test_rows = plan.fold_rows(r, f);
            if (test_rows.empty()) throw ConfigError("empty fold in the cross-validation plan");
            std::vector<int> train_rows;
            train_rows.reserve(static_cast<std::size_t>(data.n()));
            for (int i = 0; i < data.n(); ++i)
                if (plan.fold_of_group[static_cast<std::size_t>(r)][static_cast<std::size_t>(
                        plan.group_of_row[static_cast<std::size_t>(i)])] != f)
                    train_rows.push_back(i);

            const Dataset train = subset(data, train_rows);
            const Dataset test = subset(data, test_rows);

            for (int mdl = 0; mdl < n_models; ++mdl) {
                if (failed[static_cast<std::size_t>(mdl)]) continue;
                try {
                    const auto predictor = factories[static_cast<std::size_t>(mdl)].fit(train);
                    const std::vector<ParamVector> pred = predictor(test);
                    const std::vector<double> c = per_observation_crps(family, pred, test.y);
                    for (double v : c) crps_sum[static_cast<std::size_t>(mdl)] += v;
                    crps_count[static_cast<std::size_t>(mdl)] += static_cast<long>(c.size());
                } catch (const Error&) {
                    failed[static_cast<std::size_t>(mdl)] = true;  // entry goes missing for this repetition
                }
            }
        }

        for (int mdl = 0; mdl < n_models; ++mdl) {
            if (failed[static_cast<std::size_t>(mdl)] || crps_count[static_cast<std::size_t>(mdl)] == 0) continue;
            result.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(mdl)].mean_crps =
                crps_sum[static_cast<std::size_t>(mdl)] / static_cast<double>(crps_count[static_cast<std::size_t>(mdl)]);
        }
        const CvCell& ref = result.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(result.reference_index)];
        if (ref.mean_crps) {
            for (int mdl = 0; mdl < n_models; ++mdl) {
                CvCell& cell = result.cells[static_cast<std::size_t>(r)][static_cast<std::size_t>(mdl)];
                if (cell.mean_crps) cell.crpss = crpss(*cell.mean_crps, *ref.mean_crps);
            }
        }
    }
    return result;
}

}  // namespace distfor
