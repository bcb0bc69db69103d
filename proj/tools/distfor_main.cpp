// distfor: distributional regression forests for censored responses.
//
// Subcommands: generate, fit, predict, evaluate, cv, importance.
// Exit codes: 0 ok, 2 configuration error, 3 data/schema error, 4 fit error.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "distfor/archive.hpp"
#include "distfor/emos.hpp"
#include "distfor/eval.hpp"
#include "distfor/forest.hpp"
#include "distfor/mle.hpp"
#include "distfor/parallel.hpp"
#include "distfor/synthetic.hpp"

using namespace distfor;

namespace {

struct CliOptions {
    // data / schema
    std::string data_path;
    std::string response = "y";
    std::string categorical;  // comma-separated
    std::string missing_token = "NA";
    std::string delimiter = ",";
    std::string group_key;
    std::string weight_column;
    std::string transform_columns;
    double transform_exponent = 1.0 / 1.6;

    // model
    std::string model_kind = "forest";
    std::string family = "cgaussian";
    double censoring = 0.0;
    int ntree = 100;
    int mtry = 0;  // 0: ceil(m/3)
    double subsample_fraction = 0.632;
    int minsplit = 50;
    int minbucket = 20;
    double alpha = 1.0;
    std::string statistic = "quad";
    std::string split_objective = "max";
    std::uint64_t seed = 1;
    bool slim = false;

    // emos
    std::string emos_loc_col;
    std::string emos_scale_col;
    std::string emos_scale_transform = "log";

    // io / misc
    std::string model_path;
    std::string out_path;
    std::string reference_path;
    std::string config_path;
    std::string quantiles = "0.1,0.5,0.9";
    std::string models = "forest";
    std::string reference_model = "emos";
    int repetitions = 10;
    int folds = 7;
    int permutations = 5;
    std::string scenario_path;
    std::string truth_out;
    int workers = 0;  // 0: DISTFOR_WORKERS or hardware
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

char delimiter_char(const CliOptions& opt) {
    if (opt.delimiter == "\\t" || opt.delimiter == "tab") return '\t';
    if (opt.delimiter.size() != 1) throw ConfigError("delimiter must be a single character");
    return opt.delimiter[0];
}

int effective_workers(const CliOptions& opt) { return opt.workers > 0 ? opt.workers : default_workers(); }

Schema schema_from_options(const CliOptions& opt) {
    Schema schema;
    schema.response = opt.response;
    schema.categorical = split_list(opt.categorical);
    schema.missing_token = opt.missing_token;
    schema.delimiter = delimiter_char(opt);
    schema.group_key = opt.group_key;
    schema.weight_column = opt.weight_column;
    schema.transform.columns = split_list(opt.transform_columns);
    schema.transform.exponent = opt.transform_exponent;
    return schema;
}

// schema for reading prediction/evaluation data of a fitted model: covariate
// names, kinds, and level sets come from the archive
Schema schema_from_model(const FittedModel& model, const CliOptions& opt, bool need_response) {
    (void)need_response;
    Schema schema;
    // named even when optional so a response column present in the file is
    // excluded from the covariates
    schema.response = model.response_name;
    schema.missing_token = opt.missing_token;
    schema.delimiter = delimiter_char(opt);
    schema.group_key = opt.group_key;
    for (const ColumnSpec& spec : model.schema) {
        if (spec.kind == ColumnKind::categorical) {
            schema.categorical.push_back(spec.name);
            schema.declared_levels.emplace_back(spec.name, spec.levels);
        }
    }
    schema.transform.columns = split_list(opt.transform_columns);
    schema.transform.exponent = opt.transform_exponent;
    return schema;
}

// Reorders loaded covariates into the model's column order; extra or missing
// columns are schema errors.
Dataset align_to_schema(Dataset ds, const std::vector<ColumnSpec>& specs) {
    if (ds.covariates.size() != specs.size())
        throw SchemaMismatchError("data has " + std::to_string(ds.covariates.size()) +
                                  " covariates, the model was trained on " + std::to_string(specs.size()));
    std::vector<Covariate> ordered;
    ordered.reserve(specs.size());
    for (const ColumnSpec& spec : specs) {
        const int j = ds.covariate_index(spec.name);
        if (j < 0) throw SchemaMismatchError("data lacks covariate '" + spec.name + "' the model was trained on");
        ordered.push_back(std::move(ds.covariates[static_cast<std::size_t>(j)]));
    }
    ds.covariates = std::move(ordered);
    check_schema_match(specs, ds);
    return ds;
}

ForestConfig forest_config_from_options(const CliOptions& opt) {
    ForestConfig cfg;
    cfg.ntree = opt.ntree;
    cfg.mtry = opt.mtry;
    cfg.subsample_fraction = opt.subsample_fraction;
    cfg.minsplit = opt.minsplit;
    cfg.minbucket = opt.minbucket;
    cfg.alpha = opt.alpha;
    if (opt.statistic == "quad") cfg.statistic = TestStatistic::quad;
    else if (opt.statistic == "max") cfg.statistic = TestStatistic::max;
    else throw ConfigError("statistic must be quad or max");
    if (opt.split_objective == "max") cfg.split_objective = SplitObjective::max_statistic;
    else if (opt.split_objective == "min") cfg.split_objective = SplitObjective::min_statistic;
    else throw ConfigError("split-objective must be max or min");
    cfg.seed = opt.seed;
    return cfg;
}

// `key = value` lines; keys are the long option names. Values from the file
// override command-line flags.
void apply_config_file(CliOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw ConfigError("cannot open config file '" + opt.config_path + "'");

    const std::map<std::string, std::function<void(const std::string&)>> setters = {
        {"data", [&](const std::string& v) { opt.data_path = v; }},
        {"response", [&](const std::string& v) { opt.response = v; }},
        {"categorical", [&](const std::string& v) { opt.categorical = v; }},
        {"missing", [&](const std::string& v) { opt.missing_token = v; }},
        {"delimiter", [&](const std::string& v) { opt.delimiter = v; }},
        {"group-key", [&](const std::string& v) { opt.group_key = v; }},
        {"weight-col", [&](const std::string& v) { opt.weight_column = v; }},
        {"transform-cols", [&](const std::string& v) { opt.transform_columns = v; }},
        {"transform-exponent", [&](const std::string& v) { opt.transform_exponent = std::stod(v); }},
        {"model", [&](const std::string& v) { opt.model_kind = v; }},
        {"family", [&](const std::string& v) { opt.family = v; }},
        {"censoring", [&](const std::string& v) { opt.censoring = std::stod(v); }},
        {"ntree", [&](const std::string& v) { opt.ntree = std::stoi(v); }},
        {"mtry", [&](const std::string& v) { opt.mtry = std::stoi(v); }},
        {"subsample", [&](const std::string& v) { opt.subsample_fraction = std::stod(v); }},
        {"minsplit", [&](const std::string& v) { opt.minsplit = std::stoi(v); }},
        {"minbucket", [&](const std::string& v) { opt.minbucket = std::stoi(v); }},
        {"alpha", [&](const std::string& v) { opt.alpha = std::stod(v); }},
        {"statistic", [&](const std::string& v) { opt.statistic = v; }},
        {"split-objective", [&](const std::string& v) { opt.split_objective = v; }},
        {"seed", [&](const std::string& v) { opt.seed = std::stoull(v); }},
        {"emos-loc-col", [&](const std::string& v) { opt.emos_loc_col = v; }},
        {"emos-scale-col", [&](const std::string& v) { opt.emos_scale_col = v; }},
        {"emos-scale-transform", [&](const std::string& v) { opt.emos_scale_transform = v; }},
        {"quantiles", [&](const std::string& v) { opt.quantiles = v; }},
        {"models", [&](const std::string& v) { opt.models = v; }},
        {"reference-model", [&](const std::string& v) { opt.reference_model = v; }},
        {"repetitions", [&](const std::string& v) { opt.repetitions = std::stoi(v); }},
        {"folds", [&](const std::string& v) { opt.folds = std::stoi(v); }},
        {"permutations", [&](const std::string& v) { opt.permutations = std::stoi(v); }},
        {"workers", [&](const std::string& v) { opt.workers = std::stoi(v); }},
    };

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        if (trim(line).empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(opt.config_path + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end())
            throw ConfigError(opt.config_path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(value);
    }
}

// ---------------------------------- fitting ----------------------------------

FittedModel fit_model(const CliOptions& opt, const Dataset& ds) {
    FittedModel model;
    model.kind = model_kind_from_string(opt.model_kind);
    model.family = make_family(opt.family, opt.censoring);
    model.schema = ds.column_specs();
    model.response_name = ds.response_name;
    model.data_fingerprint = dataset_fingerprint(ds);

    switch (model.kind) {
        case ModelKind::forest: {
            model.forest = grow_forest(ds, model.family, forest_config_from_options(opt), effective_workers(opt));
            break;
        }
        case ModelKind::tree: {
            ForestConfig cfg = forest_config_from_options(opt);
            cfg.ntree = 1;
            cfg.subsample_fraction = 1.0;
            if (cfg.mtry <= 0) cfg.mtry = ds.m();  // standalone trees test all variables
            model.forest = grow_forest(ds, model.family, cfg, 1);
            break;
        }
        case ModelKind::emos: {
            if (opt.emos_loc_col.empty() || opt.emos_scale_col.empty())
                throw ConfigError("emos needs --emos-loc-col and --emos-scale-col");
            EmosOptions eopts;
            if (opt.emos_scale_transform == "log") eopts.scale_transform = ScaleTransform::log_input;
            else if (opt.emos_scale_transform == "identity") eopts.scale_transform = ScaleTransform::identity;
            else throw ConfigError("emos-scale-transform must be log or identity");
            model.emos = fit_emos(ds, *model.family, opt.emos_loc_col, opt.emos_scale_col, eopts);
            break;
        }
        case ModelKind::intercept: {
            model.intercept = fit(*model.family, WeightedSample{ds.y, ds.weights}).theta;
            break;
        }
    }
    return model;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << text;
}

int cmd_fit(const CliOptions& opt) {
    const Dataset ds = load_csv(opt.data_path, schema_from_options(opt));
    FittedModel model = fit_model(opt, ds);

    // in-sample summary, computed before any slimming drops the forest data
    const std::vector<ParamVector> preds = model.predict(ds, effective_workers(opt));
    const double crps = mean_crps(*model.family, preds, ds.y);
    if (opt.slim) model = make_slim(std::move(model));

    save_model(model, opt.out_path);
    std::cout << "model: " << to_string(model.kind) << " (" << model.family->name() << ")\n";
    if (model.forest) {
        std::cout << "trees: " << model.forest->trees.size() << "\n";
        std::cout << "mean_depth: " << model.forest->mean_depth() << "\n";
        std::cout << "mean_leaves: " << model.forest->mean_leaves() << "\n";
        if (model.forest->skipped_trees > 0)
            std::cout << "warning: skipped_trees: " << model.forest->skipped_trees << "\n";
    }
    std::cout << "n: " << ds.n() << "\nin_sample_mean_crps: " << format_double(crps) << "\n";
    std::cout << "written: " << opt.out_path << "\n";
    return 0;
}

int cmd_predict(const CliOptions& opt) {
    const FittedModel model = load_model(opt.model_path);
    Dataset ds = load_csv(opt.data_path, schema_from_model(model, opt, false), false);
    ds = align_to_schema(std::move(ds), model.schema);

    std::vector<double> qs;
    for (const std::string& q : split_list(opt.quantiles)) qs.push_back(std::stod(q));

    const std::vector<ParamVector> preds = model.predict(ds, effective_workers(opt));
    std::ostringstream out;
    const char d = delimiter_char(opt);
    out << "mu" << d << "sigma" << d << "p_zero";
    for (double q : qs) out << d << "q_" << format_double(q);
    out << '\n';
    for (int i = 0; i < ds.n(); ++i) {
        const ParamVector& p = preds[static_cast<std::size_t>(i)];
        out << format_double(p.location()) << d << format_double(p.scale()) << d
            << format_double(model.family->prob_censored(p));
        for (double q : qs) out << d << format_double(model.family->quantile(p, q));
        out << '\n';
    }
    write_text(opt.out_path, out.str());
    std::cout << "predictions: " << ds.n() << " rows -> " << opt.out_path << "\n";
    return 0;
}

int cmd_evaluate(const CliOptions& opt) {
    const FittedModel model = load_model(opt.model_path);
    Dataset ds = load_csv(opt.data_path, schema_from_model(model, opt, true));
    ds = align_to_schema(std::move(ds), model.schema);

    const std::vector<ParamVector> preds = model.predict(ds, effective_workers(opt));
    std::optional<double> reference_crps;
    if (!opt.reference_path.empty()) {
        const FittedModel reference = load_model(opt.reference_path);
        Dataset rds =
            align_to_schema(load_csv(opt.data_path, schema_from_model(reference, opt, true)), reference.schema);
        reference_crps = mean_crps(*reference.family, reference.predict(rds, effective_workers(opt)), rds.y);
    }
    const EvalReport report = evaluate(*model.family, preds, ds.y, reference_crps);

    if (!opt.out_path.empty()) {
        std::ostringstream out;
        const char d = delimiter_char(opt);
        out << "row" << d << "observed" << d << "mu" << d << "sigma" << d << "crps\n";
        for (int i = 0; i < ds.n(); ++i) {
            const ParamVector& p = preds[static_cast<std::size_t>(i)];
            out << (i + 1) << d << format_double(ds.y[static_cast<std::size_t>(i)]) << d
                << format_double(p.location()) << d << format_double(p.scale()) << d
                << format_double(report.per_obs_crps[static_cast<std::size_t>(i)]) << '\n';
        }
        write_text(opt.out_path, out.str());
    }
    std::cout << "n: " << ds.n() << "\nmean_crps: " << format_double(report.mean_crps) << "\n";
    if (report.crpss_vs_reference)
        std::cout << "crpss_vs_reference: " << format_double(*report.crpss_vs_reference) << "\n";
    return 0;
}

int cmd_cv(const CliOptions& opt) {
    const Dataset ds = load_csv(opt.data_path, schema_from_options(opt));
    const auto family = make_family(opt.family, opt.censoring);
    const int workers = effective_workers(opt);

    std::vector<ModelFactory> factories;
    for (const std::string& name : split_list(opt.models)) {
        if (name == "forest" || name == "tree") {
            ForestConfig cfg = forest_config_from_options(opt);
            const bool leaf_predict = name == "tree";
            if (leaf_predict) {
                cfg.ntree = 1;
                cfg.subsample_fraction = 1.0;
            }
            factories.push_back({name, [family, cfg, workers, leaf_predict](const Dataset& train) {
                ForestConfig local = cfg;
                if (leaf_predict && local.mtry <= 0) local.mtry = train.m();
                auto forest = std::make_shared<DistForest>(grow_forest(train, family, local, workers));
                return std::function<std::vector<ParamVector>(const Dataset&)>(
                    [forest, workers, leaf_predict](const Dataset& test) {
                        if (!leaf_predict) return forest->predict_batch(test, workers);
                        std::vector<ParamVector> out(static_cast<std::size_t>(test.n()));
                        for (int i = 0; i < test.n(); ++i)
                            out[static_cast<std::size_t>(i)] = forest->trees.front().leaf_for(test, i).params;
                        return out;
                    });
            }});
        } else if (name == "emos") {
            if (opt.emos_loc_col.empty() || opt.emos_scale_col.empty())
                throw ConfigError("emos needs --emos-loc-col and --emos-scale-col");
            EmosOptions eopts;
            eopts.scale_transform =
                opt.emos_scale_transform == "identity" ? ScaleTransform::identity : ScaleTransform::log_input;
            const std::string loc = opt.emos_loc_col, scale = opt.emos_scale_col;
            factories.push_back({name, [family, loc, scale, eopts](const Dataset& train) {
                const EmosModel m = fit_emos(train, *family, loc, scale, eopts);
                return std::function<std::vector<ParamVector>(const Dataset&)>([family, m](const Dataset& test) {
                    std::vector<ParamVector> out;
                    out.reserve(static_cast<std::size_t>(test.n()));
                    for (int i = 0; i < test.n(); ++i) out.push_back(predict_emos(m, test, i));
                    return out;
                });
            }});
        } else if (name == "intercept") {
            factories.push_back({name, [family](const Dataset& train) {
                const ParamVector theta = fit(*family, WeightedSample{train.y, train.weights}).theta;
                return std::function<std::vector<ParamVector>(const Dataset&)>([theta](const Dataset& test) {
                    return std::vector<ParamVector>(static_cast<std::size_t>(test.n()), theta);
                });
            }});
        } else {
            throw ConfigError("unknown model '" + name + "' in --models");
        }
    }

    const CvPlan plan = CvPlan::make(ds, opt.repetitions, opt.folds, opt.seed);
    const CvResult res = cross_validate(ds, *family, factories, plan, opt.reference_model);

    std::ostringstream out;
    const char d = delimiter_char(opt);
    out << "repetition" << d << "model" << d << "mean_crps" << d << "crpss\n";
    for (int r = 0; r < plan.repetitions; ++r) {
        for (std::size_t mdl = 0; mdl < res.models.size(); ++mdl) {
            const CvCell& cell = res.cells[static_cast<std::size_t>(r)][mdl];
            out << (r + 1) << d << res.models[mdl] << d
                << (cell.mean_crps ? format_double(*cell.mean_crps) : "NA") << d
                << (cell.crpss ? format_double(*cell.crpss) : "NA") << '\n';
        }
    }
    if (!opt.out_path.empty()) write_text(opt.out_path, out.str());
    std::cout << out.str();
    return 0;
}

int cmd_importance(const CliOptions& opt) {
    const FittedModel model = load_model(opt.model_path);
    if (!model.forest || model.forest->slim())
        throw ConfigError("importance needs a full (non-slim) forest or tree archive");
    Dataset ds = load_csv(opt.data_path, schema_from_model(model, opt, true));
    ds = align_to_schema(std::move(ds), model.schema);

    Rng rng(opt.seed);
    std::vector<ImportanceEntry> imp =
        variable_importance(*model.forest, ds, rng, opt.permutations, effective_workers(opt));
    std::stable_sort(imp.begin(), imp.end(),
                     [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.delta_crps > b.delta_crps; });

    std::ostringstream out;
    const char d = delimiter_char(opt);
    out << "variable" << d << "delta_crps\n";
    for (const ImportanceEntry& e : imp) out << e.variable << d << format_double(e.delta_crps) << '\n';
    if (!opt.out_path.empty()) write_text(opt.out_path, out.str());
    std::cout << out.str();
    return 0;
}

int cmd_generate(const CliOptions& opt) {
    const SyntheticScenario sc = load_scenario_file(opt.scenario_path);
    const GeneratedData g = generate(sc);
    save_csv(g.data, opt.out_path, delimiter_char(opt), opt.missing_token);
    if (!opt.truth_out.empty()) {
        std::ostringstream out;
        const char d = delimiter_char(opt);
        out << "true_mu" << d << "true_sigma\n";
        for (std::size_t i = 0; i < g.true_mu.size(); ++i)
            out << format_double(g.true_mu[i]) << d << format_double(g.true_sigma[i]) << '\n';
        write_text(opt.truth_out, out.str());
    }
    std::cout << "scenario: " << to_string(sc.kind) << "\nrows: " << g.data.n() << "\ncolumns: " << g.data.m()
              << "\nwritten: " << opt.out_path << "\n";
    return 0;
}

void add_schema_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--response", opt.response, "response column name");
    cmd->add_option("--categorical", opt.categorical, "comma-separated categorical covariates");
    cmd->add_option("--missing", opt.missing_token, "missing-value token (default NA)");
    cmd->add_option("--group-key", opt.group_key, "group column (e.g. year) for grouped splitting");
    cmd->add_option("--weight-col", opt.weight_column, "row-weight column");
    cmd->add_option("--transform-cols", opt.transform_columns,
                    "columns (response included by name) to power-transform at load");
    cmd->add_option("--transform-exponent", opt.transform_exponent, "power-transform exponent (default 1/1.6)");
}

void add_model_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--family", opt.family, "cgaussian or clogistic");
    cmd->add_option("--censoring", opt.censoring, "left-censoring threshold (default 0)");
    cmd->add_option("--ntree", opt.ntree, "number of trees");
    cmd->add_option("--mtry", opt.mtry, "variables tested per split (0 = m/3 rounded up)");
    cmd->add_option("--subsample", opt.subsample_fraction, "per-tree subsample fraction");
    cmd->add_option("--minsplit", opt.minsplit, "minimum node size to attempt a split");
    cmd->add_option("--minbucket", opt.minbucket, "minimum leaf size");
    cmd->add_option("--alpha", opt.alpha, "significance level for pre-pruning (1 disables)");
    cmd->add_option("--statistic", opt.statistic, "association statistic: quad or max");
    cmd->add_option("--split-objective", opt.split_objective, "split-point objective: max or min");
    cmd->add_option("--seed", opt.seed, "random seed");
    cmd->add_option("--emos-loc-col", opt.emos_loc_col, "EMOS location regressor");
    cmd->add_option("--emos-scale-col", opt.emos_scale_col, "EMOS scale regressor");
    cmd->add_option("--emos-scale-transform", opt.emos_scale_transform, "log or identity");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"distributional regression forests for zero-censored responses"};
    app.require_subcommand(1);
    CliOptions opt;

    app.add_option("--workers", opt.workers, "worker threads (default: DISTFOR_WORKERS or cores)");
    app.add_option("--delimiter", opt.delimiter, "field delimiter (default ,)");
    app.add_option("--config", opt.config_path, "key = value file; overrides flags");

    CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model and write its archive");
    fit_cmd->add_option("--data", opt.data_path, "training data CSV")->required();
    fit_cmd->add_option("--out", opt.out_path, "output model archive")->required();
    fit_cmd->add_option("--model", opt.model_kind, "forest | tree | emos | intercept");
    fit_cmd->add_flag("--slim", opt.slim, "drop training data from the archive (forest prediction disabled)");
    add_schema_flags(fit_cmd, opt);
    add_model_flags(fit_cmd, opt);

    CLI::App* predict_cmd = app.add_subcommand("predict", "predict distribution parameters and quantiles");
    predict_cmd->add_option("--model", opt.model_path, "model archive")->required();
    predict_cmd->add_option("--data", opt.data_path, "input CSV")->required();
    predict_cmd->add_option("--out", opt.out_path, "output CSV")->required();
    predict_cmd->add_option("--quantiles", opt.quantiles, "comma-separated probabilities");
    predict_cmd->add_option("--missing", opt.missing_token, "missing-value token");
    predict_cmd->add_option("--transform-cols", opt.transform_columns, "columns to power-transform at load");
    predict_cmd->add_option("--transform-exponent", opt.transform_exponent, "power-transform exponent");

    CLI::App* eval_cmd = app.add_subcommand("evaluate", "out-of-sample CRPS for a fitted model");
    eval_cmd->add_option("--model", opt.model_path, "model archive")->required();
    eval_cmd->add_option("--data", opt.data_path, "evaluation CSV with the response")->required();
    eval_cmd->add_option("--out", opt.out_path, "per-observation CRPS table");
    eval_cmd->add_option("--reference", opt.reference_path, "reference model archive for the skill score");
    eval_cmd->add_option("--missing", opt.missing_token, "missing-value token");
    eval_cmd->add_option("--transform-cols", opt.transform_columns, "columns to power-transform at load");
    eval_cmd->add_option("--transform-exponent", opt.transform_exponent, "power-transform exponent");

    CLI::App* cv_cmd = app.add_subcommand("cv", "repeated grouped cross-validation");
    cv_cmd->add_option("--data", opt.data_path, "data CSV")->required();
    cv_cmd->add_option("--models", opt.models, "comma-separated: forest,tree,emos,intercept");
    cv_cmd->add_option("--reference-model", opt.reference_model, "reference for the skill score");
    cv_cmd->add_option("--repetitions", opt.repetitions, "number of repetitions");
    cv_cmd->add_option("--folds", opt.folds, "folds per repetition");
    cv_cmd->add_option("--out", opt.out_path, "output table");
    add_schema_flags(cv_cmd, opt);
    add_model_flags(cv_cmd, opt);

    CLI::App* imp_cmd = app.add_subcommand("importance", "permutation variable importance");
    imp_cmd->add_option("--model", opt.model_path, "forest archive")->required();
    imp_cmd->add_option("--data", opt.data_path, "evaluation CSV with the response")->required();
    imp_cmd->add_option("--permutations", opt.permutations, "permutations per variable");
    imp_cmd->add_option("--seed", opt.seed, "random seed");
    imp_cmd->add_option("--out", opt.out_path, "output table");
    imp_cmd->add_option("--missing", opt.missing_token, "missing-value token");
    imp_cmd->add_option("--transform-cols", opt.transform_columns, "columns to power-transform at load");
    imp_cmd->add_option("--transform-exponent", opt.transform_exponent, "power-transform exponent");

    CLI::App* gen_cmd = app.add_subcommand("generate", "write a synthetic benchmark dataset");
    gen_cmd->add_option("--scenario", opt.scenario_path, "scenario description file")->required();
    gen_cmd->add_option("--out", opt.out_path, "output CSV")->required();
    gen_cmd->add_option("--true-params-out", opt.truth_out, "also write the generating (mu, sigma) per row");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        apply_config_file(opt);
        if (fit_cmd->parsed()) return cmd_fit(opt);
        if (predict_cmd->parsed()) return cmd_predict(opt);
        if (eval_cmd->parsed()) return cmd_evaluate(opt);
        if (cv_cmd->parsed()) return cmd_cv(opt);
        if (imp_cmd->parsed()) return cmd_importance(opt);
        if (gen_cmd->parsed()) return cmd_generate(opt);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::config: return 2;
            case ErrorKind::data: return 3;
            case ErrorKind::fit: return 4;
            case ErrorKind::internal: return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
