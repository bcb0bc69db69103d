#include "distfor/archive.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <sstream>

#include "distfor/parallel.hpp"

namespace distfor {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::forest: return "forest";
        case ModelKind::tree: return "tree";
        case ModelKind::emos: return "emos";
        case ModelKind::intercept: return "intercept";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& name) {
    for (ModelKind k : {ModelKind::forest, ModelKind::tree, ModelKind::emos, ModelKind::intercept})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown model kind '" + name + "'");
}

// ------------------------------- predictions -------------------------------

ParamVector FittedModel::predict_row(const Dataset& query, int row) const {
    switch (kind) {
        case ModelKind::intercept: return *intercept;
        case ModelKind::emos: return predict_emos(*emos, query, row);
        case ModelKind::tree: {
            check_schema_match(schema, query);
            return forest->trees.front().leaf_for(query, row).params;
        }
        case ModelKind::forest: return forest->predict_params(query, row);
    }
    throw Error(ErrorKind::internal, "unreachable model kind");
}

std::vector<ParamVector> FittedModel::predict(const Dataset& query, int workers) const {
    if (kind == ModelKind::forest) return forest->predict_batch(query, workers);
    if (kind == ModelKind::tree) check_schema_match(schema, query);
    std::vector<ParamVector> out(static_cast<std::size_t>(query.n()));
    for (int i = 0; i < query.n(); ++i) out[static_cast<std::size_t>(i)] = predict_row(query, i);
    return out;
}

// -------------------------------- encoding --------------------------------

namespace {

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    static const char* hex = "0123456789ABCDEF";
    for (unsigned char c : s) {
        if (c == '%' || c == '|' || c == ',' || c == ' ' || c < 0x21) {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

std::string unescape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '%') {
            out += s[i];
            continue;
        }
        if (i + 2 >= s.size()) throw DataError("truncated escape in archive string");
        const auto nib = [](char c) -> int {
            if (c >= '0' && c <= '9') return c - '0';
            if (c >= 'A' && c <= 'F') return c - 'A' + 10;
            if (c >= 'a' && c <= 'f') return c - 'a' + 10;
            throw DataError("bad escape in archive string");
        };
        out += static_cast<char>(nib(s[i + 1]) * 16 + nib(s[i + 2]));
        i += 2;
    }
    return out;
}

std::string now_iso8601() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_doubles(std::ostringstream& out, const std::string& key, std::span<const double> values) {
    // chunked so archives stay diffable
    constexpr std::size_t per_line = 16;
    for (std::size_t i = 0; i < values.size(); i += per_line) {
        out << key;
        for (std::size_t j = i; j < std::min(values.size(), i + per_line); ++j) out << ' ' << format_double(values[j]);
        out << '\n';
    }
}

void write_ints(std::ostringstream& out, const std::string& key, std::span<const int> values) {
    constexpr std::size_t per_line = 32;
    for (std::size_t i = 0; i < values.size(); i += per_line) {
        out << key;
        for (std::size_t j = i; j < std::min(values.size(), i + per_line); ++j) out << ' ' << values[j];
        out << '\n';
    }
}

void write_params(std::ostringstream& out, const ParamVector& p) {
    out << p.dim();
    for (double v : p.values) out << ' ' << format_double(v);
}

void write_forest(std::ostringstream& out, const DistForest& forest, bool slim) {
    const ForestConfig& c = forest.config;
    out << "[config]\n";
    out << "ntree = " << c.ntree << '\n';
    out << "mtry = " << c.mtry << '\n';
    out << "resolved_mtry = " << forest.resolved_mtry << '\n';
    out << "subsample_fraction = " << format_double(c.subsample_fraction) << '\n';
    out << "minsplit = " << c.minsplit << '\n';
    out << "minbucket = " << c.minbucket << '\n';
    out << "alpha = " << format_double(c.alpha) << '\n';
    out << "statistic = " << (c.statistic == TestStatistic::quad ? "quad" : "max") << '\n';
    out << "objective = " << (c.split_objective == SplitObjective::max_statistic ? "max" : "min") << '\n';
    out << "min_uncensored = " << c.min_uncensored_per_child << '\n';
    out << "seed = " << c.seed << '\n';
    out << "skipped_trees = " << forest.skipped_trees << '\n';
    out << "[global]\nparams ";
    write_params(out, forest.global_params);
    out << '\n';
    if (!slim) {
        out << "[data]\n";
        out << "n = " << forest.n_training() << '\n';
        write_doubles(out, "y", forest.train_y);
        if (!forest.train_w.empty()) write_doubles(out, "w", forest.train_w);
    }
    for (const DistTree& tree : forest.trees) {
        out << "[tree]\n";
        out << "n_nodes = " << tree.nodes.size() << '\n';
        if (!slim) write_ints(out, "rows", tree.root_rows);
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) {
                out << "node leaf " << (node.fit_converged ? 1 : 0) << ' ' << node.size << ' ' << node.depth
                    << " params ";
                write_params(out, node.params);
                out << " members " << (slim ? 0 : static_cast<int>(node.members.size()));
                if (!slim)
                    for (int i : node.members) out << ' ' << i;
                out << '\n';
            } else {
                const SplitRecord& s = node.split;
                out << "node split " << s.variable << ' ';
                if (std::isnan(s.threshold))
                    out << "cat " << s.left_levels;
                else
                    out << "num " << format_double(s.threshold);
                out << ' ' << (s.missing_left ? 'L' : 'R') << ' ' << node.left << ' ' << node.right << ' '
                    << format_double(s.statistic) << ' ' << format_double(node.p_value) << ' ' << node.size << ' '
                    << node.depth << " params ";
                write_params(out, node.params);
                out << '\n';
            }
        }
    }
}

}  // namespace

std::string serialize_model(const FittedModel& model) {
    std::ostringstream out;
    out << "distfor-archive\n";
    out << "version = " << model.format_version << '\n';
    out << "created = " << (model.created.empty() ? now_iso8601() : model.created) << '\n';
    out << "kind = " << to_string(model.kind) << '\n';
    out << "family = " << (model.family ? std::string(model.family->name()) : "cgaussian") << '\n';
    out << "censoring = " << format_double(model.family ? model.family->censoring_point() : 0.0) << '\n';
    out << "response = " << escape(model.response_name) << '\n';
    for (const ColumnSpec& c : model.schema) {
        out << "covariate = " << escape(c.name) << '|' << (c.kind == ColumnKind::numeric ? "numeric" : "categorical");
        if (c.kind == ColumnKind::categorical) {
            out << '|';
            for (std::size_t l = 0; l < c.levels.size(); ++l) {
                if (l > 0) out << ',';
                out << escape(c.levels[l]);
            }
        }
        out << '\n';
    }
    out << "slim = " << (model.slim ? 1 : 0) << '\n';
    out << "fingerprint = " << model.data_fingerprint << '\n';

    switch (model.kind) {
        case ModelKind::forest:
        case ModelKind::tree: write_forest(out, *model.forest, model.slim); break;
        case ModelKind::emos: {
            const EmosModel& e = *model.emos;
            out << "[emos]\n";
            out << "beta = " << format_double(e.beta0) << ' ' << format_double(e.beta1) << '\n';
            out << "gamma = " << format_double(e.gamma0) << ' ' << format_double(e.gamma1) << '\n';
            out << "loc_column = " << escape(e.loc_column) << '\n';
            out << "scale_column = " << escape(e.scale_column) << '\n';
            out << "scale_transform = " << (e.scale_transform == ScaleTransform::log_input ? "log" : "identity")
                << '\n';
            break;
        }
        case ModelKind::intercept: {
            out << "[intercept]\nparams ";
            write_params(out, *model.intercept);
            out << '\n';
            break;
        }
    }
    return out.str();
}

// --------------------------------- parsing ---------------------------------

namespace {

struct Tokens {
    std::vector<std::string> parts;
    const std::string& line;
    std::size_t next = 0;

    explicit Tokens(const std::string& l) : line(l) {
        std::istringstream in(l);
        std::string t;
        while (in >> t) parts.push_back(t);
    }
    const std::string& get() {
        if (next >= parts.size()) throw DataError("archive: truncated line '" + line + "'");
        return parts[next++];
    }
    double real() {
        const std::string& t = get();
        double v = 0.0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            throw DataError("archive: bad number '" + t + "'");
        return v;
    }
    long long integer() {
        const std::string& t = get();
        long long v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            throw DataError("archive: bad integer '" + t + "'");
        return v;
    }
    std::uint64_t u64() {
        const std::string& t = get();
        std::uint64_t v = 0;
        const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc{} || p != t.data() + t.size())
            throw DataError("archive: bad unsigned integer '" + t + "'");
        return v;
    }
    bool done() const { return next >= parts.size(); }
};

ParamVector read_params(Tokens& tok) {
    const int k = static_cast<int>(tok.integer());
    ParamVector p;
    p.values.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j) p.values[static_cast<std::size_t>(j)] = tok.real();
    return p;
}

std::pair<std::string, std::string> key_value(const std::string& line) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("archive: expected 'key = value' but got '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto trim = [](std::string& s) {
        s.erase(0, s.find_first_not_of(" \t"));
        s.erase(s.find_last_not_of(" \t\r") + 1);
    };
    trim(key);
    trim(value);
    return {key, value};
}

}  // namespace

FittedModel parse_model(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "distfor-archive")
        throw DataError("not a distfor model archive");

    FittedModel model;
    std::string family_name = "cgaussian";
    double censoring = 0.0;
    enum class Section { header, config, global, data, tree, emos, intercept } section = Section::header;
    DistForest forest;
    DistTree* tree = nullptr;
    std::vector<double> train_y, train_w;

    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;

        if (line[0] == '[') {
            if (line == "[config]") section = Section::config;
            else if (line == "[global]") section = Section::global;
            else if (line == "[data]") section = Section::data;
            else if (line == "[tree]") {
                section = Section::tree;
                forest.trees.emplace_back();
                tree = &forest.trees.back();
            } else if (line == "[emos]") {
                section = Section::emos;
                model.emos.emplace();
            } else if (line == "[intercept]") {
                section = Section::intercept;
            } else {
                throw DataError("archive: unknown section " + line);
            }
            continue;
        }

        if (section == Section::global || section == Section::tree || section == Section::intercept ||
            section == Section::data) {
            Tokens tok(line);
            const std::string& head = tok.get();
            if (head == "params" && section == Section::global) {
                forest.global_params = read_params(tok);
                continue;
            }
            if (head == "params" && section == Section::intercept) {
                model.intercept = read_params(tok);
                continue;
            }
            if (head == "y" && section == Section::data) {
                while (!tok.done()) train_y.push_back(tok.real());
                continue;
            }
            if (head == "w" && section == Section::data) {
                while (!tok.done()) train_w.push_back(tok.real());
                continue;
            }
            if (head == "n" && section == Section::data) {
                tok.get();  // '='
                continue;
            }
            if (head == "rows" && section == Section::tree) {
                while (!tok.done()) tree->root_rows.push_back(static_cast<int>(tok.integer()));
                continue;
            }
            if (head == "n_nodes" && section == Section::tree) {
                tok.get();  // '='
                tree->nodes.reserve(static_cast<std::size_t>(tok.integer()));
                continue;
            }
            if (head == "node" && section == Section::tree) {
                TreeNode node;
                const std::string& what = tok.get();
                if (what == "leaf") {
                    node.fit_converged = tok.integer() != 0;
                    node.size = static_cast<int>(tok.integer());
                    node.depth = static_cast<int>(tok.integer());
                    if (tok.get() != "params") throw DataError("archive: malformed leaf node line");
                    node.params = read_params(tok);
                    if (tok.get() != "members") throw DataError("archive: malformed leaf node line");
                    const int count = static_cast<int>(tok.integer());
                    node.members.reserve(static_cast<std::size_t>(count));
                    for (int i = 0; i < count; ++i) node.members.push_back(static_cast<int>(tok.integer()));
                } else if (what == "split") {
                    node.split.variable = static_cast<int>(tok.integer());
                    const std::string& type = tok.get();
                    if (type == "num")
                        node.split.threshold = tok.real();
                    else
                        node.split.left_levels = tok.u64();
                    node.split.missing_left = tok.get() == "L";
                    node.left = static_cast<int>(tok.integer());
                    node.right = static_cast<int>(tok.integer());
                    node.split.statistic = tok.real();
                    node.p_value = tok.real();
                    node.size = static_cast<int>(tok.integer());
                    node.depth = static_cast<int>(tok.integer());
                    if (tok.get() != "params") throw DataError("archive: malformed split node line");
                    node.params = read_params(tok);
                } else {
                    throw DataError("archive: unknown node type '" + what + "'");
                }
                tree->nodes.push_back(std::move(node));
                continue;
            }
            throw DataError("archive: unexpected line '" + line + "'");
        }

        const auto [key, value] = key_value(line);
        if (section == Section::header) {
            if (key == "version") {
                model.format_version = std::stoi(value);
                if (model.format_version > 1)
                    throw ConfigError("archive version " + value + " is newer than this build supports (1)");
            } else if (key == "created") {
                model.created = value;
            } else if (key == "kind") {
                model.kind = model_kind_from_string(value);
            } else if (key == "family") {
                family_name = value;
            } else if (key == "censoring") {
                censoring = std::stod(value);
            } else if (key == "response") {
                model.response_name = unescape(value);
            } else if (key == "covariate") {
                ColumnSpec spec;
                const std::size_t bar = value.find('|');
                if (bar == std::string::npos) throw DataError("archive: malformed covariate line");
                spec.name = unescape(value.substr(0, bar));
                std::string rest = value.substr(bar + 1);
                const std::size_t bar2 = rest.find('|');
                const std::string kind_str = rest.substr(0, bar2);
                spec.kind = kind_str == "numeric" ? ColumnKind::numeric : ColumnKind::categorical;
                if (spec.kind == ColumnKind::categorical && bar2 != std::string::npos) {
                    std::istringstream ls(rest.substr(bar2 + 1));
                    std::string level;
                    while (std::getline(ls, level, ',')) spec.levels.push_back(unescape(level));
                }
                model.schema.push_back(std::move(spec));
            } else if (key == "slim") {
                model.slim = value == "1";
            } else if (key == "fingerprint") {
                model.data_fingerprint = std::stoull(value);
            } else {
                throw DataError("archive: unknown header key '" + key + "'");
            }
        } else if (section == Section::config) {
            ForestConfig& c = forest.config;
            if (key == "ntree") c.ntree = std::stoi(value);
            else if (key == "mtry") c.mtry = std::stoi(value);
            else if (key == "resolved_mtry") forest.resolved_mtry = std::stoi(value);
            else if (key == "subsample_fraction") c.subsample_fraction = std::stod(value);
            else if (key == "minsplit") c.minsplit = std::stoi(value);
            else if (key == "minbucket") c.minbucket = std::stoi(value);
            else if (key == "alpha") c.alpha = std::stod(value);
            else if (key == "statistic") c.statistic = value == "max" ? TestStatistic::max : TestStatistic::quad;
            else if (key == "objective")
                c.split_objective = value == "min" ? SplitObjective::min_statistic : SplitObjective::max_statistic;
            else if (key == "min_uncensored") c.min_uncensored_per_child = std::stoi(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else if (key == "skipped_trees") forest.skipped_trees = std::stoi(value);
            else throw DataError("archive: unknown config key '" + key + "'");
        } else if (section == Section::emos) {
            EmosModel& e = *model.emos;
            Tokens tok(value);
            if (key == "beta") {
                e.beta0 = tok.real();
                e.beta1 = tok.real();
            } else if (key == "gamma") {
                e.gamma0 = tok.real();
                e.gamma1 = tok.real();
            } else if (key == "loc_column") {
                e.loc_column = unescape(value);
            } else if (key == "scale_column") {
                e.scale_column = unescape(value);
            } else if (key == "scale_transform") {
                e.scale_transform = value == "log" ? ScaleTransform::log_input : ScaleTransform::identity;
            } else {
                throw DataError("archive: unknown emos key '" + key + "'");
            }
        } else {
            throw DataError("archive: unexpected line '" + line + "'");
        }
    }

    model.family = make_family(family_name, censoring);
    if (model.kind == ModelKind::forest || model.kind == ModelKind::tree) {
        if (forest.trees.empty()) throw DataError("archive: model kind needs at least one tree section");
        forest.family = model.family;
        forest.schema = model.schema;
        forest.response_name = model.response_name;
        forest.train_y = std::move(train_y);
        forest.train_w = std::move(train_w);
        const int n = forest.n_training();
        const TreeConfig tc = forest.config.tree_config(forest.resolved_mtry);
        for (DistTree& t : forest.trees) {
            t.config = tc;
            t.n_training = n;
        }
        model.forest = std::move(forest);
    } else if (model.kind == ModelKind::emos) {
        if (!model.emos) throw DataError("archive: emos model lacks its coefficient section");
    } else if (model.kind == ModelKind::intercept) {
        if (!model.intercept) throw DataError("archive: intercept model lacks its parameter section");
    }
    return model;
}

void save_model(const FittedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << serialize_model(model);
}

FittedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model archive '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

FittedModel make_slim(FittedModel model) {
    model.slim = true;
    if (model.forest) {
        model.forest->train_y.clear();
        model.forest->train_w.clear();
        for (DistTree& tree : model.forest->trees) {
            tree.root_rows.clear();
            for (TreeNode& node : tree.nodes) node.members.clear();
        }
    }
    return model;
}

}  // namespace distfor
