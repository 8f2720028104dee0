#pragma once

// Leave-one-type-out evaluation. Each building type takes a turn as the
// unseen target: the pipeline trains on the remaining types, predicts the
// held-out type's energy metrics through both signature variants, and a
// supervised regressor trained directly on the fold provides the baseline.
// Results aggregate into a report that renders as a text table or as a
// versioned JSON document.

#include "persist.hpp"
#include "zsl.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsl {

// Mean clipped relative accuracy in percent: a prediction matching the
// actual value scores 100, one off by the actual's magnitude or more scores 0.
inline double accuracy(const std::vector<double>& predicted,
                       const std::vector<double>& actual) {
    if (predicted.size() != actual.size())
        throw std::invalid_argument("accuracy: prediction and actual lengths differ");
    if (predicted.empty()) throw std::invalid_argument("accuracy: no values");
    double acc = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double rel =
            std::abs(predicted[i] - actual[i]) / std::max(std::abs(actual[i]), 1e-9);
        acc += std::max(0.0, 1.0 - rel);
    }
    return acc / static_cast<double>(predicted.size()) * 100.0;
}

struct EvalConfig {
    double holdout_ratio = 0.9; // per-type share of rows used for training
    std::size_t k = 0;          // closest types blended; 0 means all knowns
    std::size_t n_params = 0;   // spectral signature length; 0 matches expert
    std::uint64_t seed = 0;
    std::vector<Hyperparams> grid = default_grid();
    std::size_t tune_folds = 5;
    double l2 = 0.01;
    bool capture_predictions = false; // keep per-instance predictions in memory
};

struct TypeResult {
    std::string type;
    std::size_t test_rows = 0;
    std::vector<double> baseline; // one accuracy per metric
    std::vector<double> zsl_expert;
    std::vector<double> zsl_svd;
    double baseline_avg = 0.0;
    double zsl_expert_avg = 0.0;
    double zsl_svd_avg = 0.0;
};

// Raw per-instance predictions for one held-out type. Only populated when
// EvalConfig::capture_predictions is set; never serialized.
struct FoldCapture {
    std::string type;
    std::vector<ScoredPrediction> expert;
    std::vector<ScoredPrediction> svd;
};

struct EvalReport {
    EvalConfig config;
    std::vector<std::string> metrics;
    std::size_t instances = 0;     // dataset rows evaluated over
    std::vector<TypeResult> rows;  // one per held-out type, signature order
    std::vector<FoldCapture> captures;
};

inline EvalReport leave_one_type_out(const Dataset& data, const SignatureMatrix& expert,
                                     const EvalConfig& config = {}) {
    expert.validate();
    if (config.holdout_ratio <= 0.0 || config.holdout_ratio >= 1.0)
        throw std::invalid_argument("evaluate: holdout ratio must lie strictly inside (0,1)");
    if (data.size() == 0) throw std::invalid_argument("evaluate: dataset is empty");
    for (const auto& t : expert.types) {
        const int cls = data.schema.class_index(t);
        if (cls < 0 || data.rows_with_label(cls).empty())
            throw std::invalid_argument("evaluate: type '" + t + "' has no instances");
    }

    const std::size_t n_params =
        config.n_params == 0 ? expert.parameters.size() : config.n_params;

    EvalReport report;
    report.config = config;
    report.metrics = data.schema.target_metrics;
    report.instances = data.size();

    const SplitResult sp = split(data, config.holdout_ratio, mix_seed(config.seed, "holdout"));

    auto rows_of = [](const Dataset& d, const std::string& type, bool invert) {
        const int cls = d.schema.class_index(type);
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < d.size(); ++i)
            if ((d.labels[i] == cls) != invert) keep.push_back(i);
        return d.subset(keep);
    };

    for (const auto& b : expert.types) {
        const Dataset fold_train = rows_of(sp.train, b, true);
        const Dataset fold_test = rows_of(sp.test, b, false);
        if (fold_test.size() == 0)
            throw std::runtime_error("evaluate: holdout for type '" + b +
                                     "' is empty; the dataset is too small");

        std::vector<std::string> knowns;
        for (const auto& t : expert.types)
            if (t != b) knowns.push_back(t);

        TrainConfig tc;
        tc.grid = config.grid;
        tc.tune_folds = config.tune_folds;
        tc.l2 = config.l2;
        tc.seed = mix_seed(config.seed, "fold:" + b);
        const TrainCore core = train_core(fold_train, knowns, tc);
        const ZslEnsemble ens_expert = attach_signatures(core, expert, {b});

        // Spectral signatures: known types from their fold training rows, the
        // held-out type from its own training-split rows (features only), all
        // standardized by the fold encoder and laid out in expert type order.
        const Matrix enc_train = core.encoder.transform(fold_train);
        std::vector<std::pair<std::string, Matrix>> sources;
        for (const auto& t : expert.types) {
            if (t == b) {
                sources.emplace_back(t, core.encoder.transform(rows_of(sp.train, b, false)));
            } else {
                const auto rows =
                    fold_train.rows_with_label(fold_train.schema.class_index(t));
                sources.emplace_back(t, take_rows(enc_train, rows));
            }
        }
        const SignatureMatrix spectral = svd_signatures(sources, n_params);
        const ZslEnsemble ens_svd = attach_signatures(core, spectral, {b});

        const std::size_t k = config.k == 0 ? knowns.size() : config.k;
        const auto pred_expert = predict(ens_expert, fold_test, b, k);
        const auto pred_svd = predict(ens_svd, fold_test, b, k);

        TypeResult row;
        row.type = b;
        row.test_rows = fold_test.size();
        for (std::size_t m = 0; m < report.metrics.size(); ++m) {
            std::vector<double> ve(pred_expert.size());
            std::vector<double> vs(pred_svd.size());
            for (std::size_t i = 0; i < pred_expert.size(); ++i) {
                ve[i] = pred_expert[i].values[m];
                vs[i] = pred_svd[i].values[m];
            }
            const BaselineModel bl = fit_baseline(fold_train, report.metrics[m], config.grid,
                                                  config.tune_folds, mix_seed(tc.seed, "bl"));
            row.baseline.push_back(accuracy(bl.predict(fold_test), fold_test.targets[m]));
            row.zsl_expert.push_back(accuracy(ve, fold_test.targets[m]));
            row.zsl_svd.push_back(accuracy(vs, fold_test.targets[m]));
        }
        const double m = static_cast<double>(report.metrics.size());
        for (std::size_t i = 0; i < report.metrics.size(); ++i) {
            row.baseline_avg += row.baseline[i] / m;
            row.zsl_expert_avg += row.zsl_expert[i] / m;
            row.zsl_svd_avg += row.zsl_svd[i] / m;
        }
        report.rows.push_back(std::move(row));

        if (config.capture_predictions)
            report.captures.push_back({b, pred_expert, pred_svd});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Rendering

// Aligned text table: one row per held-out type, one column group per metric
// plus the per-type average, the best of the three methods starred.
inline std::string render_table(const EvalReport& report) {
    std::size_t tw = 4;
    for (const auto& r : report.rows) tw = std::max(tw, r.type.size());

    auto value = [](double v, bool best) {
        char buf[16];
        std::snprintf(buf, sizeof buf, " %6.2f%c", v, best ? '*' : ' ');
        return std::string(buf);
    };
    auto heading = [](const char* s) {
        char buf[16];
        std::snprintf(buf, sizeof buf, " %6s ", s);
        return std::string(buf);
    };
    auto centered = [](const std::string& s, std::size_t width) {
        if (s.size() >= width) return s;
        const std::size_t left = (width - s.size()) / 2;
        return std::string(left, ' ') + s + std::string(width - s.size() - left, ' ');
    };

    std::vector<std::string> groups = report.metrics;
    groups.push_back("average");
    const std::size_t gw = 3 * 8;

    std::ostringstream out;
    out << std::string(tw + 6, ' ');
    for (const auto& g : groups) out << " |" << centered(g, gw);
    out << '\n';

    out << "type" << std::string(tw - 4, ' ') << "  rows";
    for (std::size_t g = 0; g < groups.size(); ++g)
        out << " |" << heading("base") << heading("zsl-e") << heading("zsl-s");
    out << '\n';

    for (const auto& r : report.rows) {
        char rows[16];
        std::snprintf(rows, sizeof rows, "%6zu", r.test_rows);
        out << r.type << std::string(tw - r.type.size(), ' ') << rows;
        for (std::size_t m = 0; m <= report.metrics.size(); ++m) {
            double vb, ve, vs;
            if (m < report.metrics.size()) {
                vb = r.baseline[m];
                ve = r.zsl_expert[m];
                vs = r.zsl_svd[m];
            } else {
                vb = r.baseline_avg;
                ve = r.zsl_expert_avg;
                vs = r.zsl_svd_avg;
            }
            const double best = std::max({vb, ve, vs});
            out << " |" << value(vb, vb == best) << value(ve, ve == best)
                << value(vs, vs == best);
        }
        out << '\n';
    }
    out << "* best of the three methods\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// JSON report document

inline void to_json(json& j, const EvalConfig& c) {
    j = json{{"holdout_ratio", c.holdout_ratio}, {"k", c.k},
             {"n_params", c.n_params},           {"seed", c.seed},
             {"grid", c.grid},                   {"tune_folds", c.tune_folds},
             {"l2", c.l2}};
}
inline void from_json(const json& j, EvalConfig& c) {
    j.at("holdout_ratio").get_to(c.holdout_ratio);
    j.at("k").get_to(c.k);
    j.at("n_params").get_to(c.n_params);
    j.at("seed").get_to(c.seed);
    j.at("grid").get_to(c.grid);
    j.at("tune_folds").get_to(c.tune_folds);
    j.at("l2").get_to(c.l2);
}

inline void to_json(json& j, const TypeResult& r) {
    j = json{{"type", r.type},
             {"test_rows", r.test_rows},
             {"baseline", r.baseline},
             {"zsl_expert", r.zsl_expert},
             {"zsl_svd", r.zsl_svd},
             {"baseline_avg", r.baseline_avg},
             {"zsl_expert_avg", r.zsl_expert_avg},
             {"zsl_svd_avg", r.zsl_svd_avg}};
}
inline void from_json(const json& j, TypeResult& r) {
    j.at("type").get_to(r.type);
    j.at("test_rows").get_to(r.test_rows);
    j.at("baseline").get_to(r.baseline);
    j.at("zsl_expert").get_to(r.zsl_expert);
    j.at("zsl_svd").get_to(r.zsl_svd);
    j.at("baseline_avg").get_to(r.baseline_avg);
    j.at("zsl_expert_avg").get_to(r.zsl_expert_avg);
    j.at("zsl_svd_avg").get_to(r.zsl_svd_avg);
}

inline json report_to_json(const EvalReport& report) {
    json j = detail::document("eval_report");
    j["config"] = report.config;
    j["metrics"] = report.metrics;
    j["instances"] = report.instances;
    j["results"] = report.rows;
    return j;
}

inline void save_report(const EvalReport& report, const std::filesystem::path& path) {
    detail::save_document(path, report_to_json(report));
}

inline EvalReport load_report(const std::filesystem::path& path) {
    const json j = detail::load_document(path, "eval_report");
    EvalReport report;
    j.at("config").get_to(report.config);
    j.at("metrics").get_to(report.metrics);
    j.at("instances").get_to(report.instances);
    j.at("results").get_to(report.rows);
    return report;
}

} // namespace zsl
