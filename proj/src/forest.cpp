#include "distfor/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "distfor/mle.hpp"
#include "distfor/parallel.hpp"

namespace distfor {

int default_workers() {
    if (const char* env = std::getenv("DISTFOR_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

DistForest grow_forest(const Dataset& data, std::shared_ptr<const DistributionFamily> family,
                       const ForestConfig& config, int workers) {
    if (!family) throw ConfigError("forest needs a distribution family");
    if (config.ntree < 1) throw ConfigError("ntree must be at least 1");
    if (!(config.subsample_fraction > 0.0 && config.subsample_fraction <= 1.0))
        throw ConfigError("subsample_fraction must lie in (0, 1]");
    if (data.n() < 1) throw DataError("empty dataset");
    if (!data.has_response) throw DataError("dataset has no response column");

    DistForest forest;
    forest.config = config;
    forest.family = family;
    forest.schema = data.column_specs();
    forest.response_name = data.response_name;
    forest.train_y = data.y;
    forest.train_w = data.weights;
    forest.resolved_mtry =
        config.mtry > 0 ? std::min(config.mtry, data.m())
                        : std::max(1, static_cast<int>(std::ceil(data.m() / 3.0)));

    forest.global_params = fit(*family, WeightedSample{data.y, data.weights}).theta;

    const int n = data.n();
    const int subsample_size = std::max(1, std::min(n, static_cast<int>(std::llround(config.subsample_fraction * n))));
    const TreeConfig tree_config = config.tree_config(forest.resolved_mtry);

    forest.trees.resize(static_cast<std::size_t>(config.ntree));
    std::vector<bool> grown(static_cast<std::size_t>(config.ntree), false);
    std::mutex failures_mutex;
    int skipped = 0;

    parallel_for(config.ntree, workers, [&](int t) {
        // per-tree streams keyed by (seed, tree, attempt): growth order and
        // ntree changes do not perturb other trees' randomness
        for (int attempt = 0; attempt <= config.max_tree_retries; ++attempt) {
            Rng stream(Rng::mix(config.seed, static_cast<std::uint64_t>(t) * 17 + attempt));
            std::vector<int> rows;
            if (subsample_size == n) {
                rows.resize(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
            } else {
                rows = stream.sample_without_replacement(n, subsample_size);
            }
            try {
                forest.trees[static_cast<std::size_t>(t)] =
                    grow_on_rows(data, *family, tree_config, std::move(rows), stream);
                grown[static_cast<std::size_t>(t)] = true;
                return;
            } catch (const FitError&) {
                // degenerate subsample; retry with fresh rows
            }
        }
        std::lock_guard<std::mutex> lock(failures_mutex);
        ++skipped;
    });

    if (skipped > 0) {
        std::vector<DistTree> kept;
        kept.reserve(forest.trees.size());
        for (std::size_t t = 0; t < forest.trees.size(); ++t)
            if (grown[t]) kept.push_back(std::move(forest.trees[t]));
        forest.trees = std::move(kept);
        forest.skipped_trees = skipped;
    }
    if (forest.trees.empty()) throw FitError("all trees failed to grow (degenerate subsamples)");
    return forest;
}

std::vector<double> DistForest::weights_unchecked(const Dataset& query, int row) const {
    std::vector<double> w(static_cast<std::size_t>(n_training()), 0.0);
    for (const DistTree& tree : trees) {
        const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree.route(query, row))];
        const double share = 1.0 / static_cast<double>(leaf.members.size());
        for (int i : leaf.members) w[static_cast<std::size_t>(i)] += share;
    }
    const double inv_t = 1.0 / static_cast<double>(trees.size());
    for (double& v : w) v *= inv_t;
    return w;
}

std::vector<double> DistForest::weights(const Dataset& query, int row) const {
    check_schema_match(schema, query);
    return weights_unchecked(query, row);
}

ParamVector DistForest::predict_params(const Dataset& query, int row) const {
    check_schema_match(schema, query);
    return predict_unchecked(query, row);
}

ParamVector DistForest::predict_unchecked(const Dataset& query, int row) const {
    if (slim())
        throw FitError("slim archive stores no training responses; forest predictions need the full archive");
    const std::vector<double> w = weights_unchecked(query, row);
    std::vector<double> combined;
    const std::vector<double>* wp = &w;
    if (!train_w.empty()) {
        combined.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) combined[i] = w[i] * train_w[i];
        wp = &combined;
    }
    try {
        return fit_from_weights(*family, train_y, *wp, global_params);
    } catch (const DegenerateSampleError& e) {
        throw DegenerateSampleError(std::string(e.what()) + " (forest weights at query row " + std::to_string(row) +
                                    ")");
    }
}

std::vector<ParamVector> DistForest::predict_batch(const Dataset& query, int workers) const {
    check_schema_match(schema, query);
    std::vector<ParamVector> out(static_cast<std::size_t>(query.n()));
    parallel_for(query.n(), workers, [&](int i) { out[static_cast<std::size_t>(i)] = predict_unchecked(query, i); });
    return out;
}

double DistForest::mean_depth() const {
    double s = 0.0;
    for (const DistTree& t : trees) s += t.depth();
    return s / static_cast<double>(trees.size());
}

double DistForest::mean_leaves() const {
    double s = 0.0;
    for (const DistTree& t : trees) s += t.leaf_count();
    return s / static_cast<double>(trees.size());
}

std::vector<double> forest_weights(const DistForest& forest, const Dataset& query, int row) {
    return forest.weights(query, row);
}

ParamVector predict(const DistForest& forest, const Dataset& query, int row) {
    return forest.predict_params(query, row);
}

PredictiveDistribution predict_distribution(const DistForest& forest, const Dataset& query, int row) {
    return PredictiveDistribution{forest.family, forest.predict_params(query, row)};
}

}  // namespace distfor
