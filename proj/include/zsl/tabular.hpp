#pragma once

// Typed tabular data model: schema declaration, dataset storage, one-hot +
// z-score encoding, stratified splitting, and CSV round-trip I/O.
// All types are immutable in spirit: build once, then share freely.

#include "linalg.hpp"
#include "rng.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <unordered_set>
#include <variant>
#include <vector>

namespace zsl {

enum class FeatureKind { continuous, categorical };

struct Feature {
    std::string name;
    FeatureKind kind = FeatureKind::continuous;
    std::vector<std::string> levels; // categorical only

    bool operator==(const Feature&) const = default;
};

struct FeatureSchema {
    std::vector<Feature> features;
    std::vector<std::string> target_metrics;
    std::string class_column;
    std::vector<std::string> class_labels;

    bool operator==(const FeatureSchema&) const = default;

    void validate() const {
        std::unordered_set<std::string> names;
        for (const auto& f : features) {
            if (f.name.empty()) throw std::invalid_argument("schema: empty feature name");
            if (!names.insert(f.name).second)
                throw std::invalid_argument("schema: duplicate feature name '" + f.name + "'");
            if (f.kind == FeatureKind::categorical) {
                if (f.levels.empty())
                    throw std::invalid_argument("schema: categorical feature '" + f.name +
                                                "' has an empty level set");
                std::unordered_set<std::string> lv;
                for (const auto& l : f.levels)
                    if (!lv.insert(l).second)
                        throw std::invalid_argument("schema: duplicate level '" + l +
                                                    "' in feature '" + f.name + "'");
            } else if (!f.levels.empty()) {
                throw std::invalid_argument("schema: continuous feature '" + f.name +
                                            "' must not declare levels");
            }
        }
        if (target_metrics.empty())
            throw std::invalid_argument("schema: at least one target metric is required");
        std::unordered_set<std::string> metrics;
        for (const auto& m : target_metrics) {
            if (!metrics.insert(m).second)
                throw std::invalid_argument("schema: duplicate target metric '" + m + "'");
            if (names.count(m))
                throw std::invalid_argument("schema: target metric '" + m +
                                            "' collides with a feature name");
        }
        if (class_column.empty()) throw std::invalid_argument("schema: class column name is empty");
        if (names.count(class_column) || metrics.count(class_column))
            throw std::invalid_argument("schema: class column '" + class_column +
                                        "' collides with a feature or metric");
        if (class_labels.empty())
            throw std::invalid_argument("schema: class label set is empty");
        std::unordered_set<std::string> labels;
        for (const auto& l : class_labels)
            if (!labels.insert(l).second)
                throw std::invalid_argument("schema: duplicate class label '" + l + "'");
    }

    int feature_index(const std::string& name) const {
        for (std::size_t i = 0; i < features.size(); ++i)
            if (features[i].name == name) return static_cast<int>(i);
        return -1;
    }
    int metric_index(const std::string& name) const {
        for (std::size_t i = 0; i < target_metrics.size(); ++i)
            if (target_metrics[i] == name) return static_cast<int>(i);
        return -1;
    }
    int class_index(const std::string& label) const {
        for (std::size_t i = 0; i < class_labels.size(); ++i)
            if (class_labels[i] == label) return static_cast<int>(i);
        return -1;
    }
    static int level_index(const Feature& f, const std::string& level) {
        for (std::size_t i = 0; i < f.levels.size(); ++i)
            if (f.levels[i] == level) return static_cast<int>(i);
        return -1;
    }
};

// One cell of a raw record: a number for continuous features, a level name
// for categorical ones.
using Cell = std::variant<double, std::string>;

struct Dataset {
    struct FeatureColumn {
        std::vector<double> cont;        // continuous values
        std::vector<std::int32_t> cat;   // level indices
    };

    FeatureSchema schema;
    std::vector<FeatureColumn> columns;       // one per schema feature
    std::vector<std::int32_t> labels;         // index into schema.class_labels
    std::vector<std::vector<double>> targets; // one vector per target metric

    Dataset() = default;
    explicit Dataset(FeatureSchema s) : schema(std::move(s)) {
        schema.validate();
        columns.resize(schema.features.size());
        targets.resize(schema.target_metrics.size());
    }

    std::size_t size() const { return labels.size(); }

    void add_row(const std::vector<Cell>& cells, const std::string& label,
                 const std::vector<double>& metric_values) {
        if (cells.size() != schema.features.size())
            throw std::invalid_argument("dataset: row has " + std::to_string(cells.size()) +
                                        " feature values, schema expects " +
                                        std::to_string(schema.features.size()));
        if (metric_values.size() != schema.target_metrics.size())
            throw std::invalid_argument("dataset: row has " + std::to_string(metric_values.size()) +
                                        " metric values, schema expects " +
                                        std::to_string(schema.target_metrics.size()));
        const int cls = schema.class_index(label);
        if (cls < 0) throw std::invalid_argument("dataset: unknown class label '" + label + "'");

        for (std::size_t f = 0; f < cells.size(); ++f) {
            const Feature& feat = schema.features[f];
            if (feat.kind == FeatureKind::continuous) {
                const double* v = std::get_if<double>(&cells[f]);
                if (!v) throw std::invalid_argument("dataset: feature '" + feat.name +
                                                    "' expects a numeric value");
                if (!std::isfinite(*v))
                    throw std::invalid_argument("dataset: non-finite value for feature '" +
                                                feat.name + "'");
            } else {
                const std::string* s = std::get_if<std::string>(&cells[f]);
                if (!s) throw std::invalid_argument("dataset: feature '" + feat.name +
                                                    "' expects a level name");
                if (FeatureSchema::level_index(feat, *s) < 0)
                    throw std::invalid_argument("dataset: value '" + *s +
                                                "' is not a declared level of feature '" +
                                                feat.name + "'");
            }
        }
        for (std::size_t m = 0; m < metric_values.size(); ++m)
            if (!std::isfinite(metric_values[m]))
                throw std::invalid_argument("dataset: non-finite value for metric '" +
                                            schema.target_metrics[m] + "'");

        // validated; commit
        for (std::size_t f = 0; f < cells.size(); ++f) {
            const Feature& feat = schema.features[f];
            if (feat.kind == FeatureKind::continuous)
                columns[f].cont.push_back(std::get<double>(cells[f]));
            else
                columns[f].cat.push_back(
                    FeatureSchema::level_index(feat, std::get<std::string>(cells[f])));
        }
        labels.push_back(cls);
        for (std::size_t m = 0; m < metric_values.size(); ++m)
            targets[m].push_back(metric_values[m]);
    }

    Dataset subset(const std::vector<std::size_t>& rows) const {
        Dataset out(schema);
        for (std::size_t f = 0; f < columns.size(); ++f) {
            const bool cont = schema.features[f].kind == FeatureKind::continuous;
            for (std::size_t r : rows) {
                if (r >= size()) throw std::out_of_range("dataset subset: row index out of range");
                if (cont)
                    out.columns[f].cont.push_back(columns[f].cont[r]);
                else
                    out.columns[f].cat.push_back(columns[f].cat[r]);
            }
        }
        for (std::size_t r : rows) out.labels.push_back(labels[r]);
        for (std::size_t m = 0; m < targets.size(); ++m)
            for (std::size_t r : rows) out.targets[m].push_back(targets[m][r]);
        return out;
    }

    std::vector<std::size_t> rows_with_label(std::int32_t cls) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) out.push_back(i);
        return out;
    }

    const std::string& label_name(std::size_t row) const {
        return schema.class_labels[labels[row]];
    }

    bool operator==(const Dataset& o) const {
        if (!(schema == o.schema) || labels != o.labels || targets != o.targets) return false;
        for (std::size_t f = 0; f < columns.size(); ++f)
            if (columns[f].cont != o.columns[f].cont || columns[f].cat != o.columns[f].cat)
                return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Encoding

struct EncodedColumn {
    std::string feature;
    int level = -1;     // >= 0 for one-hot columns
    double mean = 0.0;  // standardization applied: (v - mean) / scale
    double scale = 1.0;

    bool operator==(const EncodedColumn&) const = default;
};

struct Encoder {
    FeatureSchema schema;
    std::vector<EncodedColumn> columns;

    bool operator==(const Encoder&) const = default;

    static Encoder fit(const Dataset& data, const std::vector<std::size_t>& fit_rows) {
        if (fit_rows.empty())
            throw std::invalid_argument("encode: fit_stats_on must be non-empty");
        for (std::size_t r : fit_rows)
            if (r >= data.size())
                throw std::invalid_argument("encode: fit row index out of range");

        Encoder enc;
        enc.schema = data.schema;
        for (std::size_t f = 0; f < data.schema.features.size(); ++f) {
            const Feature& feat = data.schema.features[f];
            if (feat.kind == FeatureKind::continuous) {
                double mean = 0.0;
                for (std::size_t r : fit_rows) mean += data.columns[f].cont[r];
                mean /= static_cast<double>(fit_rows.size());
                double var = 0.0;
                for (std::size_t r : fit_rows) {
                    const double d = data.columns[f].cont[r] - mean;
                    var += d * d;
                }
                var /= static_cast<double>(fit_rows.size()); // population variance
                const double sd = std::sqrt(var);
                EncodedColumn col;
                col.feature = feat.name;
                col.mean = mean;
                col.scale = sd > 0.0 ? sd : 1.0; // zero variance: centered, scale 1
                enc.columns.push_back(col);
            } else {
                for (std::size_t l = 0; l < feat.levels.size(); ++l) {
                    EncodedColumn col;
                    col.feature = feat.name;
                    col.level = static_cast<int>(l);
                    enc.columns.push_back(col);
                }
            }
        }
        return enc;
    }

    std::size_t encoded_width() const { return columns.size(); }

    // Row-major matrix of encoded feature values. The dataset must carry the
    // same feature declarations the encoder was fitted on; categorical values
    // are matched by level name so a dataset with a wider level set fails only
    // when an out-of-vocabulary level is actually used.
    Matrix transform(const Dataset& data) const {
        if (data.schema.features.size() != schema.features.size())
            throw std::invalid_argument("encoder: feature count differs from fitted schema");
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            if (data.schema.features[f].name != schema.features[f].name ||
                data.schema.features[f].kind != schema.features[f].kind)
                throw std::invalid_argument("encoder: feature '" + data.schema.features[f].name +
                                            "' does not match the fitted schema");
        }

        Matrix out(data.size(), columns.size(), 0.0);
        std::size_t c = 0;
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            const Feature& feat = schema.features[f];
            if (feat.kind == FeatureKind::continuous) {
                const auto& col = columns[c];
                const auto& vals = data.columns[f].cont;
                for (std::size_t i = 0; i < vals.size(); ++i)
                    out(i, c) = (vals[i] - col.mean) / col.scale;
                ++c;
            } else {
                const auto& dataFeat = data.schema.features[f];
                // map the dataset's level indices onto the fitted level order
                std::vector<int> remap(dataFeat.levels.size(), -1);
                for (std::size_t l = 0; l < dataFeat.levels.size(); ++l)
                    remap[l] = FeatureSchema::level_index(feat, dataFeat.levels[l]);
                const auto& vals = data.columns[f].cat;
                for (std::size_t i = 0; i < vals.size(); ++i) {
                    const int mapped = remap[vals[i]];
                    if (mapped < 0)
                        throw std::invalid_argument(
                            "encoder: unknown level '" + dataFeat.levels[vals[i]] +
                            "' for feature '" + feat.name + "'");
                    out(i, c + static_cast<std::size_t>(mapped)) = 1.0;
                }
                c += feat.levels.size();
            }
        }
        return out;
    }
};

struct EncodedMatrix {
    Matrix values;
    Encoder encoder;
};

inline EncodedMatrix encode(const Dataset& data, const std::vector<std::size_t>& fit_rows) {
    EncodedMatrix em;
    em.encoder = Encoder::fit(data, fit_rows);
    em.values = em.encoder.transform(data);
    return em;
}

inline EncodedMatrix encode(const Dataset& data) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return encode(data, all);
}

// ---------------------------------------------------------------------------
// Splitting

struct SplitResult {
    Dataset train;
    Dataset test;
};

// Stratified per-class partition: |train| = round-half-up(ratio * n) per class.
inline SplitResult split(const Dataset& data, double ratio, std::uint64_t seed) {
    if (data.size() == 0) throw std::invalid_argument("split: dataset is empty");
    if (!(ratio > 0.0 && ratio < 1.0))
        throw std::invalid_argument("split: ratio must be in (0, 1)");

    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t cls = 0; cls < data.schema.class_labels.size(); ++cls) {
        auto rows = data.rows_with_label(static_cast<std::int32_t>(cls));
        if (rows.empty()) continue;
        if (rows.size() < 2)
            throw std::invalid_argument("split: class '" + data.schema.class_labels[cls] +
                                        "' has fewer than 2 records");
        Rng rng(mix_seed(seed, "split:" + data.schema.class_labels[cls]));
        shuffle(rows, rng);
        const std::size_t n_train = static_cast<std::size_t>(
            std::floor(ratio * static_cast<double>(rows.size()) + 0.5));
        for (std::size_t i = 0; i < rows.size(); ++i)
            (i < n_train ? train_rows : test_rows).push_back(rows[i]);
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return SplitResult{data.subset(train_rows), data.subset(test_rows)};
}

// ---------------------------------------------------------------------------
// CSV I/O

namespace detail {

inline std::string render_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& field, std::size_t line_no,
                           const std::string& column) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                    ": unparsable numeric value '" + field + "' in column '" +
                                    column + "'");
    return v;
}

inline std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace detail

// Atomic file write: write to a sibling temp file, then rename into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

// Comma-delimited, header row, one record per line. Numeric fields use the
// shortest representation that reparses to the same double.
inline void save_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ostringstream out;
    bool first = true;
    for (const auto& f : data.schema.features) {
        if (!first) out << ',';
        out << f.name;
        first = false;
    }
    out << ',' << data.schema.class_column;
    for (const auto& m : data.schema.target_metrics) out << ',' << m;
    out << '\n';

    for (std::size_t i = 0; i < data.size(); ++i) {
        first = true;
        for (std::size_t f = 0; f < data.schema.features.size(); ++f) {
            if (!first) out << ',';
            first = false;
            const Feature& feat = data.schema.features[f];
            if (feat.kind == FeatureKind::continuous)
                out << detail::render_double(data.columns[f].cont[i]);
            else
                out << feat.levels[data.columns[f].cat[i]];
        }
        out << ',' << data.schema.class_labels[data.labels[i]];
        for (std::size_t m = 0; m < data.targets.size(); ++m)
            out << ',' << detail::render_double(data.targets[m][i]);
        out << '\n';
    }
    write_file_atomic(path, out.str());
}

inline Dataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
    schema.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: '" + path.string() + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const auto header = detail::split_fields(line);
    std::vector<int> col_of_feature(schema.features.size(), -1);
    std::vector<int> col_of_metric(schema.target_metrics.size(), -1);
    int col_of_class = -1;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string& name = header[c];
        const int f = schema.feature_index(name);
        const int m = schema.metric_index(name);
        if (f >= 0)
            col_of_feature[f] = static_cast<int>(c);
        else if (m >= 0)
            col_of_metric[m] = static_cast<int>(c);
        else if (name == schema.class_column)
            col_of_class = static_cast<int>(c);
        else
            throw std::invalid_argument("csv: header column '" + name +
                                        "' is not declared in the schema");
    }
    for (std::size_t f = 0; f < schema.features.size(); ++f)
        if (col_of_feature[f] < 0)
            throw std::invalid_argument("csv: missing feature column '" +
                                        schema.features[f].name + "'");
    for (std::size_t m = 0; m < schema.target_metrics.size(); ++m)
        if (col_of_metric[m] < 0)
            throw std::invalid_argument("csv: missing metric column '" +
                                        schema.target_metrics[m] + "'");
    if (col_of_class < 0)
        throw std::invalid_argument("csv: missing class column '" + schema.class_column + "'");

    Dataset data(schema);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != header.size())
            throw std::invalid_argument("csv line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(header.size()) + " fields, found " +
                                        std::to_string(fields.size()));

        std::vector<Cell> cells;
        cells.reserve(schema.features.size());
        for (std::size_t f = 0; f < schema.features.size(); ++f) {
            const Feature& feat = schema.features[f];
            const std::string& field = fields[col_of_feature[f]];
            if (feat.kind == FeatureKind::continuous) {
                cells.emplace_back(detail::parse_double(field, line_no, feat.name));
            } else {
                if (FeatureSchema::level_index(feat, field) < 0)
                    throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                                ": value '" + field +
                                                "' is not a declared level of feature '" +
                                                feat.name + "'");
                cells.emplace_back(field);
            }
        }
        const std::string& label = fields[col_of_class];
        if (schema.class_index(label) < 0)
            throw std::invalid_argument("csv line " + std::to_string(line_no) +
                                        ": unknown class label '" + label + "'");
        std::vector<double> metrics(schema.target_metrics.size());
        for (std::size_t m = 0; m < metrics.size(); ++m)
            metrics[m] = detail::parse_double(fields[col_of_metric[m]], line_no,
                                              schema.target_metrics[m]);
        data.add_row(cells, label, metrics);
    }
    return data;
}

} // namespace zsl
