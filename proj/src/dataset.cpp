#include "distfor/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace distfor {

int Dataset::covariate_index(const std::string& name) const {
    for (int j = 0; j < m(); ++j)
        if (covariates[static_cast<std::size_t>(j)].name == name) return j;
    return -1;
}

std::vector<ColumnSpec> Dataset::column_specs() const {
    std::vector<ColumnSpec> specs;
    specs.reserve(covariates.size());
    for (const Covariate& c : covariates) specs.push_back({c.name, c.kind, c.levels});
    return specs;
}

void check_schema_match(const std::vector<ColumnSpec>& expected, const Dataset& data) {
    const std::vector<ColumnSpec> got = data.column_specs();
    if (got.size() != expected.size())
        throw SchemaMismatchError("dataset has " + std::to_string(got.size()) + " covariates, model expects " +
                                  std::to_string(expected.size()));
    for (std::size_t j = 0; j < expected.size(); ++j) {
        if (got[j].name != expected[j].name)
            throw SchemaMismatchError("covariate " + std::to_string(j + 1) + " is '" + got[j].name +
                                      "', model expects '" + expected[j].name + "'");
        if (got[j].kind != expected[j].kind)
            throw SchemaMismatchError("covariate '" + got[j].name + "' has a different type than the model expects");
        if (got[j].levels != expected[j].levels)
            throw SchemaMismatchError("categorical covariate '" + got[j].name + "' has a different level set");
    }
}

Dataset subset(const Dataset& data, std::span<const int> rows) {
    Dataset out;
    out.response_name = data.response_name;
    out.group_key_name = data.group_key_name;
    out.has_response = data.has_response;
    out.y.reserve(rows.size());
    for (int r : rows) out.y.push_back(data.y[static_cast<std::size_t>(r)]);
    if (!data.weights.empty()) {
        out.weights.reserve(rows.size());
        for (int r : rows) out.weights.push_back(data.weights[static_cast<std::size_t>(r)]);
    }
    if (!data.groups.empty()) {
        out.groups.reserve(rows.size());
        for (int r : rows) out.groups.push_back(data.groups[static_cast<std::size_t>(r)]);
    }
    for (const Covariate& c : data.covariates) {
        Covariate cc;
        cc.name = c.name;
        cc.kind = c.kind;
        cc.levels = c.levels;
        if (c.kind == ColumnKind::numeric) {
            cc.numeric.reserve(rows.size());
            for (int r : rows) cc.numeric.push_back(c.numeric[static_cast<std::size_t>(r)]);
        } else {
            cc.codes.reserve(rows.size());
            for (int r : rows) cc.codes.push_back(c.codes[static_cast<std::size_t>(r)]);
        }
        out.covariates.push_back(std::move(cc));
    }
    return out;
}

double power_transform_value(double value, double exponent) {
    if (std::isnan(value)) return value;
    if (value < 0.0) throw DataError("negative value under power transform");
    return std::pow(value, exponent);
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

// ------------------------------- CSV parsing -------------------------------

namespace {

// Minimal RFC-4180 style splitting: fields may be quoted, doubled quotes escape.
std::vector<std::string> split_line(const std::string& line, char delim, int line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"' && cur.empty()) {
            quoted = true;
        } else if (ch == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (quoted) throw DataError("line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

double parse_number(const std::string& field, int line_no, const std::string& column) {
    const char* begin = field.c_str();
    const char* end = begin + field.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t' || end[-1] == '\r')) --end;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        throw DataError("line " + std::to_string(line_no) + ", column '" + column + "': cannot parse '" + field +
                        "' as a number");
    return v;
}

std::string trimmed(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

}  // namespace

Dataset parse_csv(const std::string& text, const Schema& schema, bool require_response, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw DataError(origin + ": empty file");
    const std::vector<std::string> raw_header = split_line(line, schema.delimiter, 1);
    std::vector<std::string> header;
    header.reserve(raw_header.size());
    for (const std::string& h : raw_header) header.push_back(trimmed(h));

    const auto col_of = [&](const std::string& name) {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    };

    const int response_col = schema.response.empty() ? -1 : col_of(schema.response);
    if (require_response && response_col < 0)
        throw DataError(origin + ": response column '" + schema.response + "' not found");
    const int group_col = schema.group_key.empty() ? -1 : col_of(schema.group_key);
    if (!schema.group_key.empty() && group_col < 0)
        throw DataError(origin + ": group column '" + schema.group_key + "' not found");
    const int weight_col = schema.weight_column.empty() ? -1 : col_of(schema.weight_column);
    if (!schema.weight_column.empty() && weight_col < 0)
        throw DataError(origin + ": weight column '" + schema.weight_column + "' not found");

    const auto is_categorical = [&](const std::string& name) {
        return std::find(schema.categorical.begin(), schema.categorical.end(), name) != schema.categorical.end();
    };

    Dataset ds;
    ds.has_response = response_col >= 0;
    ds.response_name = schema.response.empty() ? "y" : schema.response;
    ds.group_key_name = schema.group_key;

    struct RawColumn {
        int file_index;
        bool categorical;
        std::vector<double> numeric;
        std::vector<std::string> labels;  // categorical raw values ("" = missing)
    };
    std::vector<RawColumn> raw;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const int fj = static_cast<int>(j);
        if (fj == response_col || fj == group_col || fj == weight_col) continue;
        Covariate cov;
        cov.name = header[j];
        cov.kind = is_categorical(header[j]) ? ColumnKind::categorical : ColumnKind::numeric;
        ds.covariates.push_back(std::move(cov));
        raw.push_back({fj, is_categorical(header[j]), {}, {}});
    }

    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trimmed(line).empty()) continue;
        const std::vector<std::string> fields = split_line(line, schema.delimiter, line_no);
        if (fields.size() != header.size())
            throw DataError(origin + ": line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                            " fields, header has " + std::to_string(header.size()));
        const auto field_at = [&](int j) { return trimmed(fields[static_cast<std::size_t>(j)]); };

        if (response_col >= 0) {
            const std::string f = field_at(response_col);
            if (f == schema.missing_token)
                throw DataError(origin + ": line " + std::to_string(line_no) + ": missing response value");
            ds.y.push_back(parse_number(f, line_no, ds.response_name));
        } else {
            ds.y.push_back(std::numeric_limits<double>::quiet_NaN());
        }
        if (group_col >= 0) ds.groups.push_back(field_at(group_col));
        if (weight_col >= 0) ds.weights.push_back(parse_number(field_at(weight_col), line_no, schema.weight_column));

        for (std::size_t c = 0; c < raw.size(); ++c) {
            const std::string f = field_at(raw[c].file_index);
            if (raw[c].categorical) {
                raw[c].labels.push_back(f == schema.missing_token ? std::string{} : f);
            } else {
                raw[c].numeric.push_back(f == schema.missing_token
                                             ? std::numeric_limits<double>::quiet_NaN()
                                             : parse_number(f, line_no, ds.covariates[c].name));
            }
        }
    }
    if (ds.y.empty()) throw DataError(origin + ": no data rows");

    // Resolve categorical codes: declared level sets are authoritative,
    // otherwise levels are the sorted distinct values seen.
    for (std::size_t c = 0; c < raw.size(); ++c) {
        Covariate& cov = ds.covariates[c];
        if (!raw[c].categorical) {
            cov.numeric = std::move(raw[c].numeric);
            continue;
        }
        std::vector<std::string> levels;
        for (const auto& [name, lv] : schema.declared_levels)
            if (name == cov.name) levels = lv;
        if (levels.empty()) {
            std::set<std::string> uniq;
            for (const std::string& v : raw[c].labels)
                if (!v.empty()) uniq.insert(v);
            levels.assign(uniq.begin(), uniq.end());
        }
        cov.levels = levels;
        cov.codes.reserve(raw[c].labels.size());
        for (std::size_t i = 0; i < raw[c].labels.size(); ++i) {
            const std::string& v = raw[c].labels[i];
            if (v.empty()) {
                cov.codes.push_back(-1);
                continue;
            }
            const auto it = std::find(levels.begin(), levels.end(), v);
            if (it == levels.end())
                throw DataError(origin + ": column '" + cov.name + "': unknown category '" + v + "'");
            cov.codes.push_back(static_cast<int>(it - levels.begin()));
        }
    }

    // Power transform on configured columns.
    if (!schema.transform.columns.empty()) {
        if (!(schema.transform.exponent > 0.0)) throw ConfigError("power-transform exponent must be positive");
        for (const std::string& name : schema.transform.columns) {
            if (name == ds.response_name && ds.has_response) {
                for (double& v : ds.y) v = power_transform_value(v, schema.transform.exponent);
                continue;
            }
            const int j = ds.covariate_index(name);
            if (j < 0) throw DataError(origin + ": power-transform column '" + name + "' not found");
            Covariate& cov = ds.covariates[static_cast<std::size_t>(j)];
            if (cov.kind != ColumnKind::numeric)
                throw DataError(origin + ": power-transform column '" + name + "' is categorical");
            for (double& v : cov.numeric) v = power_transform_value(v, schema.transform.exponent);
        }
    }
    return ds;
}

Dataset load_csv(const std::string& path, const Schema& schema, bool require_response) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), schema, require_response, path);
}

std::string format_csv(const Dataset& data, char delimiter, const std::string& missing_token) {
    std::ostringstream out;
    if (data.has_response) out << data.response_name << delimiter;
    for (int j = 0; j < data.m(); ++j) {
        if (j > 0) out << delimiter;
        out << data.covariate(j).name;
    }
    if (!data.groups.empty()) out << delimiter << (data.group_key_name.empty() ? "group" : data.group_key_name);
    if (!data.weights.empty()) out << delimiter << "weight";
    out << '\n';
    for (int i = 0; i < data.n(); ++i) {
        if (data.has_response) out << format_double(data.y[static_cast<std::size_t>(i)]) << delimiter;
        for (int j = 0; j < data.m(); ++j) {
            if (j > 0) out << delimiter;
            const Covariate& c = data.covariate(j);
            if (c.is_missing(i)) {
                out << missing_token;
            } else if (c.kind == ColumnKind::numeric) {
                out << format_double(c.numeric[static_cast<std::size_t>(i)]);
            } else {
                out << c.levels[static_cast<std::size_t>(c.codes[static_cast<std::size_t>(i)])];
            }
        }
        if (!data.groups.empty()) out << delimiter << data.groups[static_cast<std::size_t>(i)];
        if (!data.weights.empty()) out << delimiter << format_double(data.weights[static_cast<std::size_t>(i)]);
        out << '\n';
    }
    return out.str();
}

void save_csv(const Dataset& data, const std::string& path, char delimiter, const std::string& missing_token) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << format_csv(data, delimiter, missing_token);
}

// ------------------------------- fingerprint -------------------------------

namespace {

struct Fnv1a {
    std::uint64_t h = 14695981039346656037ULL;
    void bytes(const void* p, std::size_t len) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    }
    void real(double v) {
        // canonicalize NaN so missing values hash identically
        const std::uint64_t bits = std::isnan(v) ? 0x7ff8000000000000ULL : std::bit_cast<std::uint64_t>(v);
        bytes(&bits, sizeof bits);
    }
    void str(const std::string& s) {
        const std::uint64_t len = s.size();
        bytes(&len, sizeof len);
        bytes(s.data(), s.size());
    }
    void integer(std::int64_t v) { bytes(&v, sizeof v); }
};

}  // namespace

std::uint64_t dataset_fingerprint(const Dataset& data) {
    Fnv1a f;
    f.str(data.response_name);
    for (double v : data.y) f.real(v);
    f.integer(data.m());
    for (int j = 0; j < data.m(); ++j) {
        const Covariate& c = data.covariate(j);
        f.str(c.name);
        f.integer(static_cast<std::int64_t>(c.kind));
        if (c.kind == ColumnKind::numeric) {
            for (double v : c.numeric) f.real(v);
        } else {
            for (const std::string& l : c.levels) f.str(l);
            for (int code : c.codes) f.integer(code);
        }
    }
    for (double w : data.weights) f.real(w);
    for (const std::string& g : data.groups) f.str(g);
    return f.h;
}

}  // namespace distfor
