#pragma once
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "distfor/errors.hpp"

namespace distfor {

enum class ColumnKind { numeric, categorical };

// One covariate column. Numeric columns mark missing entries with NaN,
// categorical columns with code -1; categorical codes index into `levels`.
struct Covariate {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<double> numeric{};
    std::vector<int> codes{};
    std::vector<std::string> levels{};

    int level_count() const { return static_cast<int>(levels.size()); }
    bool is_missing(int row) const {
        return kind == ColumnKind::numeric ? std::isnan(numeric[static_cast<std::size_t>(row)])
                                           : codes[static_cast<std::size_t>(row)] < 0;
    }
};

// Name/kind/levels triple used to check that a prediction dataset matches the
// schema a model was trained on.
struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;
    std::vector<std::string> levels{};

    bool operator==(const ColumnSpec&) const = default;
};

struct PowerTransform {
    std::vector<std::string> columns{};
    double exponent = 1.0 / 1.6;
};

// Parsing instructions for delimited text files. Columns not named as
// response, group key, or weight become covariates; covariates listed in
// `categorical` are parsed as factors, everything else as numeric.
struct Schema {
    std::string response{};
    std::vector<std::string> categorical{};
    std::string missing_token = "NA";
    char delimiter = ',';
    std::string group_key{};
    std::string weight_column{};
    PowerTransform transform{};
    // Pinned level sets per categorical column; values outside the list are an
    // error. Unpinned columns infer levels from the data (sorted).
    std::vector<std::pair<std::string, std::vector<std::string>>> declared_levels{};
};

class Dataset {
  public:
    std::vector<double> y;
    std::vector<Covariate> covariates;
    std::vector<double> weights;        // empty means all ones
    std::vector<std::string> groups;    // empty if no group key
    std::string response_name = "y";
    std::string group_key_name{};
    bool has_response = true;

    int n() const { return static_cast<int>(y.size()); }
    int m() const { return static_cast<int>(covariates.size()); }

    double weight(int row) const { return weights.empty() ? 1.0 : weights[static_cast<std::size_t>(row)]; }

    const Covariate& covariate(int j) const { return covariates[static_cast<std::size_t>(j)]; }

    int covariate_index(const std::string& name) const;  // -1 if absent

    std::vector<ColumnSpec> column_specs() const;
};

// Raises SchemaMismatchError unless the dataset's covariates match the specs
// exactly (names, kinds, level sets, order).
void check_schema_match(const std::vector<ColumnSpec>& expected, const Dataset& data);

// Row-subset copy (same schema, categorical levels preserved).
Dataset subset(const Dataset& data, std::span<const int> rows);

// y -> y^exponent for y >= 0; negative input is a DataError.
double power_transform_value(double value, double exponent);

Dataset load_csv(const std::string& path, const Schema& schema, bool require_response = true);
Dataset parse_csv(const std::string& text, const Schema& schema, bool require_response = true,
                  const std::string& origin = "<memory>");

void save_csv(const Dataset& data, const std::string& path, char delimiter = ',',
              const std::string& missing_token = "NA");
std::string format_csv(const Dataset& data, char delimiter = ',', const std::string& missing_token = "NA");

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

// FNV-1a over the canonical byte representation of responses, covariates,
// weights, and column metadata; archives store it so a model can be matched
// to the data it was trained on.
std::uint64_t dataset_fingerprint(const Dataset& data);

}  // namespace distfor
