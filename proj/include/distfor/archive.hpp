#pragma once
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "distfor/emos.hpp"
#include "distfor/forest.hpp"

namespace distfor {

enum class ModelKind { forest, tree, emos, intercept };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// A fitted model plus everything needed to reproduce its predictions: family,
// training schema, and (for forests) the training responses and leaf
// memberships behind the weighted-MLE predictions. Slim archives drop the
// training data; tree/emos/intercept predictions survive that, forest
// predictions do not.
struct FittedModel {
    int format_version = 1;
    ModelKind kind = ModelKind::forest;
    std::string created{};  // informational; excluded from reproducibility checks
    std::shared_ptr<const DistributionFamily> family;
    std::vector<ColumnSpec> schema;
    std::string response_name = "y";
    std::uint64_t data_fingerprint = 0;
    bool slim = false;

    std::optional<DistForest> forest{};      // forest and tree kinds
    std::optional<EmosModel> emos{};
    std::optional<ParamVector> intercept{};

    ParamVector predict_row(const Dataset& query, int row) const;
    std::vector<ParamVector> predict(const Dataset& query, int workers = 1) const;

    const ForestConfig& forest_config() const { return forest->config; }
};

// Field-tagged text encoding; doubles use shortest round-trip decimals so a
// save/load cycle reproduces predictions bit-exactly.
std::string serialize_model(const FittedModel& model);
FittedModel parse_model(const std::string& text);

void save_model(const FittedModel& model, const std::string& path);
FittedModel load_model(const std::string& path);

// Drops training responses and leaf memberships (see FittedModel docs).
FittedModel make_slim(FittedModel model);

}  // namespace distfor
