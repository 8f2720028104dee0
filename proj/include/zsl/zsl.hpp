#pragma once

// Zero-shot pipeline core. Training: fit a type classifier on the known
// types, factor its weights through the known-type signature columns into a
// compatibility map V, and fit per-(type, metric) regressors. Inference for
// an unseen type: score its instances against every signature column via
// V, pick the k closest known types, and blend their regressor outputs with
// softmax weights.

#include "linalg.hpp"
#include "models.hpp"
#include "rng.hpp"
#include "signature.hpp"
#include "tabular.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace zsl {

struct CompatibilityModel {
    Matrix v; // (encoded dim + 1) x |parameters|; the +1 carries the bias row
    std::vector<std::string> class_order; // known types, signature-matrix order
    Encoder encoder;
};

struct TrainConfig {
    double l2 = 0.01;
    std::vector<Hyperparams> grid = default_grid();
    std::size_t tune_folds = 5;
    std::uint64_t seed = 0;
    LogisticOptions logistic{};
};

struct ZslEnsemble {
    CompatibilityModel compat;
    std::vector<std::vector<GbrtModel>> regressors; // [known type][metric]
    SignatureMatrix signatures;                     // full matrix, unknowns included
    std::vector<std::string> unknown_types;
    std::size_t default_k = 0; // preferred blend width; 0 means all known types

    const std::vector<std::string>& metrics() const {
        return compat.encoder.schema.target_metrics;
    }

    const GbrtModel& regressor(const std::string& type, const std::string& metric) const {
        const auto it = std::find(compat.class_order.begin(), compat.class_order.end(), type);
        if (it == compat.class_order.end())
            throw std::invalid_argument("ensemble: no regressors for type '" + type + "'");
        const int mi = compat.encoder.schema.metric_index(metric);
        if (mi < 0) throw std::invalid_argument("ensemble: unknown metric '" + metric + "'");
        return regressors[static_cast<std::size_t>(it - compat.class_order.begin())]
                         [static_cast<std::size_t>(mi)];
    }
};

// The signature-independent part of training: the type classifier, the
// shared encoder, and the per-(type, metric) regressors. Several signature
// matrices can then be attached without refitting any of it.
struct TrainCore {
    LogisticModel classifier; // class_order holds the known types
    Encoder encoder;
    std::vector<std::vector<GbrtModel>> regressors; // [known type][metric]
};

inline TrainCore train_core(const Dataset& train_data,
                            const std::vector<std::string>& knowns, const TrainConfig& config,
                            const std::unordered_set<std::string>& unknown = {}) {
    if (knowns.size() < 2)
        throw std::invalid_argument("train: need at least 2 known types");
    if (train_data.size() == 0) throw std::invalid_argument("train: empty training data");

    // class label -> position in the known-type order; -2 marks unknown types
    const auto& class_labels = train_data.schema.class_labels;
    std::vector<std::int32_t> known_of_class(class_labels.size(), -1);
    for (std::size_t c = 0; c < class_labels.size(); ++c) {
        if (unknown.count(class_labels[c])) {
            known_of_class[c] = -2;
            continue;
        }
        const auto it = std::find(knowns.begin(), knowns.end(), class_labels[c]);
        if (it != knowns.end()) known_of_class[c] = static_cast<std::int32_t>(it - knowns.begin());
    }

    std::vector<std::int32_t> y(train_data.size());
    for (std::size_t i = 0; i < train_data.size(); ++i) {
        const std::int32_t mapped = known_of_class[static_cast<std::size_t>(train_data.labels[i])];
        if (mapped == -2)
            throw std::invalid_argument("train: instance of unknown type '" +
                                        train_data.label_name(i) + "' in training data");
        if (mapped < 0)
            throw std::invalid_argument("train: type '" + train_data.label_name(i) +
                                        "' is not among the known types");
        y[i] = mapped;
    }
    for (std::size_t t = 0; t < knowns.size(); ++t)
        if (std::count(y.begin(), y.end(), static_cast<std::int32_t>(t)) == 0)
            throw std::invalid_argument("train: known type '" + knowns[t] +
                                        "' has no training instances");

    const EncodedMatrix em = encode(train_data);
    TrainCore core;
    core.classifier = fit_logistic(em.values, y, knowns, config.l2, config.logistic);
    core.encoder = em.encoder;

    const auto& metric_names = train_data.schema.target_metrics;
    core.regressors.resize(knowns.size());
    for (std::size_t t = 0; t < knowns.size(); ++t) {
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == static_cast<std::int32_t>(t)) rows.push_back(i);
        const Matrix xt = take_rows(em.values, rows);
        core.regressors[t].reserve(metric_names.size());
        for (std::size_t m = 0; m < metric_names.size(); ++m) {
            std::vector<double> yt(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                yt[i] = train_data.targets[m][rows[i]];
            const std::uint64_t seed =
                mix_seed(config.seed, "regressor:" + knowns[t] + ":" + metric_names[m]);
            const Hyperparams hp = tune_gbrt(xt, yt, config.grid, config.tune_folds, seed);
            core.regressors[t].push_back(fit_gbrt(xt, yt, hp, seed));
        }
    }
    return core;
}

// Computes V against one signature matrix and assembles the full ensemble.
// The known types derived from the signatures must match the core's class
// order exactly; otherwise W's columns would pair with the wrong signatures.
inline ZslEnsemble attach_signatures(const TrainCore& core, const SignatureMatrix& signatures,
                                     const std::vector<std::string>& unknown_types) {
    signatures.validate();
    std::unordered_set<std::string> unknown;
    for (const auto& t : unknown_types) {
        if (signatures.type_index(t) < 0)
            throw std::invalid_argument("train: unknown type '" + t + "' has no signature column");
        if (!unknown.insert(t).second)
            throw std::invalid_argument("train: duplicate unknown type '" + t + "'");
    }
    const SignatureMatrix s =
        unknown_types.empty() ? signatures : signatures.drop_columns(unknown_types);
    if (s.types != core.classifier.class_order)
        throw std::invalid_argument(
            "train: signature known types do not match the trained class order");

    ZslEnsemble out;
    out.compat.v = solve_right_factor(core.classifier.w, s.values);
    out.compat.class_order = core.classifier.class_order;
    out.compat.encoder = core.encoder;
    out.regressors = core.regressors;
    out.signatures = signatures;
    out.unknown_types = unknown_types;
    return out;
}

inline ZslEnsemble train(const Dataset& train_data, const SignatureMatrix& signatures,
                         const std::vector<std::string>& unknown_types,
                         const TrainConfig& config = {}) {
    signatures.validate();
    std::unordered_set<std::string> unknown;
    for (const auto& t : unknown_types) {
        if (signatures.type_index(t) < 0)
            throw std::invalid_argument("train: unknown type '" + t + "' has no signature column");
        if (!unknown.insert(t).second)
            throw std::invalid_argument("train: duplicate unknown type '" + t + "'");
    }
    std::vector<std::string> knowns;
    for (const auto& t : signatures.types)
        if (!unknown.count(t)) knowns.push_back(t);
    return attach_signatures(train_core(train_data, knowns, config, unknown), signatures,
                             unknown_types);
}

// S' for unknown type b_i: known columns in signature order, b_i appended last.
inline SignatureMatrix s_prime(const ZslEnsemble& ensemble, const std::string& b_i) {
    return ensemble.signatures.restrict_to(ensemble.compat.class_order)
        .with_column(b_i, ensemble.signatures.column(b_i));
}

// Scores every test instance against every column of S': Y' = X'·(V·S'),
// one row per instance, one column per S' type.
inline Matrix score_types(const ZslEnsemble& ensemble, const EncodedMatrix& test,
                          const std::string& b_i) {
    if (std::find(ensemble.unknown_types.begin(), ensemble.unknown_types.end(), b_i) ==
        ensemble.unknown_types.end())
        throw std::invalid_argument("score: type '" + b_i +
                                    "' is not an unknown type of this ensemble");
    if (ensemble.signatures.type_index(b_i) < 0)
        throw std::invalid_argument("score: type '" + b_i + "' has no signature column");
    if (!(test.encoder == ensemble.compat.encoder))
        throw std::invalid_argument(
            "score: test instances were encoded with different statistics than training");
    const SignatureMatrix sp = s_prime(ensemble, b_i);
    return matmul(with_bias(test.values), matmul(ensemble.compat.v, sp.values));
}

struct TypeScore {
    std::string type;
    double score;

    bool operator==(const TypeScore&) const = default;
};

// Top-k known types by score, descending; b_i's own entry is ignored and ties
// keep the earlier position in type_order.
inline std::vector<TypeScore> k_closest(const std::vector<double>& scores,
                                        const std::vector<std::string>& type_order,
                                        const std::string& b_i, std::size_t k) {
    if (scores.size() != type_order.size())
        throw std::invalid_argument("k_closest: scores and type order differ in length");
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < type_order.size(); ++i)
        if (type_order[i] != b_i) idx.push_back(i);
    if (k < 1 || k > idx.size())
        throw std::invalid_argument("k_closest: k must be in [1, " + std::to_string(idx.size()) +
                                    "], got " + std::to_string(k));
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<TypeScore> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({type_order[idx[i]], scores[idx[i]]});
    return out;
}

struct RankedType {
    std::string type;
    double score;
    std::vector<double> metric_values; // this type's regressor outputs, metric order
};

struct ScoredPrediction {
    std::vector<RankedType> ranked; // k entries, best first
    std::vector<double> weights;    // softmax over the ranked scores; sums to 1
    std::vector<double> values;     // blended prediction per metric
};

// Algorithm 2 end to end for every instance of the unknown type b_i. Labels
// and target metrics of the test rows are never read.
inline std::vector<ScoredPrediction> predict(const ZslEnsemble& ensemble, const Dataset& test,
                                             const std::string& b_i, std::size_t k) {
    const Matrix x = ensemble.compat.encoder.transform(test);
    const Matrix scores = score_types(ensemble, {x, ensemble.compat.encoder}, b_i);
    const SignatureMatrix sp = s_prime(ensemble, b_i);
    const auto& metric_names = ensemble.metrics();

    std::vector<ScoredPrediction> out;
    out.reserve(scores.rows);
    std::vector<double> row(scores.cols);
    for (std::size_t r = 0; r < scores.rows; ++r) {
        for (std::size_t c = 0; c < scores.cols; ++c) row[c] = scores(r, c);
        const auto ranked = k_closest(row, sp.types, b_i, k);

        ScoredPrediction pred;
        std::vector<double> raw(ranked.size());
        for (std::size_t j = 0; j < ranked.size(); ++j) raw[j] = ranked[j].score;
        pred.weights = softmax(raw);
        pred.values.assign(metric_names.size(), 0.0);
        pred.ranked.reserve(ranked.size());
        for (std::size_t j = 0; j < ranked.size(); ++j) {
            RankedType rt{ranked[j].type, ranked[j].score, {}};
            rt.metric_values.reserve(metric_names.size());
            for (std::size_t m = 0; m < metric_names.size(); ++m) {
                const double e =
                    ensemble.regressor(ranked[j].type, metric_names[m]).predict_row(x, r);
                rt.metric_values.push_back(e);
                pred.values[m] += pred.weights[j] * e;
            }
            pred.ranked.push_back(std::move(rt));
        }
        out.push_back(std::move(pred));
    }
    return out;
}

// Data-driven signature column: top n_params singular values of one type's
// standardized encoded feature matrix, zero-padded past the spectrum.
inline Matrix svd_signature(const Matrix& encoded, std::size_t n_params) {
    if (encoded.rows == 0) throw std::invalid_argument("svd signature: empty data");
    if (n_params < 1) throw std::invalid_argument("svd signature: need at least one parameter");
    const SvdResult d = svd(encoded);
    Matrix col(n_params, 1, 0.0);
    for (std::size_t i = 0; i < n_params && i < d.sigma.size(); ++i) col(i, 0) = d.sigma[i];
    return col;
}

// Assembles per-type singular-value columns into a full signature matrix with
// synthetic parameter names sv1..svN.
inline SignatureMatrix svd_signatures(const std::vector<std::pair<std::string, Matrix>>& per_type,
                                      std::size_t n_params) {
    if (per_type.empty()) throw std::invalid_argument("svd signature: no types given");
    SignatureMatrix out;
    out.source = SignatureSource::svd;
    for (std::size_t p = 1; p <= n_params; ++p) out.parameters.push_back("sv" + std::to_string(p));
    out.values = Matrix(n_params, per_type.size());
    for (std::size_t c = 0; c < per_type.size(); ++c) {
        out.types.push_back(per_type[c].first);
        const Matrix col = svd_signature(per_type[c].second, n_params);
        for (std::size_t r = 0; r < n_params; ++r) out.values(r, c) = col(r, 0);
    }
    out.validate();
    return out;
}

} // namespace zsl
