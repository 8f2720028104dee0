#pragma once

// Versioned JSON persistence for every artifact the pipeline reads or
// writes: schemas, generator profiles, signature matrices, fitted models,
// and whole ensembles. Serialization is byte-deterministic (sorted keys,
// shortest round-trip numerals), loads validate a version and kind tag, and
// all file writes go through the atomic temp-then-rename path.

#include "models.hpp"
#include "signature.hpp"
#include "synthgen.hpp"
#include "tabular.hpp"
#include "zsl.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsl {

using json = nlohmann::json;

inline constexpr int format_version = 1;

NLOHMANN_JSON_SERIALIZE_ENUM(FeatureKind, {{FeatureKind::continuous, "continuous"},
                                           {FeatureKind::categorical, "categorical"}})
NLOHMANN_JSON_SERIALIZE_ENUM(SignatureSource,
                             {{SignatureSource::expert, "expert"}, {SignatureSource::svd, "svd"}})

// ---------------------------------------------------------------------------
// ADL serializers for the core value types

inline void to_json(json& j, const Matrix& m) {
    j = json{{"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}
inline void from_json(const json& j, Matrix& m) {
    m = Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
    j.at("data").get_to(m.data);
    if (m.data.size() != m.rows * m.cols)
        throw std::runtime_error("persist: matrix data length does not match its shape");
}

inline void to_json(json& j, const Feature& f) {
    j = json{{"name", f.name}, {"kind", f.kind}};
    if (f.kind == FeatureKind::categorical) j["levels"] = f.levels;
}
inline void from_json(const json& j, Feature& f) {
    j.at("name").get_to(f.name);
    j.at("kind").get_to(f.kind);
    f.levels.clear();
    if (f.kind == FeatureKind::categorical) j.at("levels").get_to(f.levels);
}

inline void to_json(json& j, const FeatureSchema& s) {
    j = json{{"features", s.features},
             {"target_metrics", s.target_metrics},
             {"class_column", s.class_column},
             {"class_labels", s.class_labels}};
}
inline void from_json(const json& j, FeatureSchema& s) {
    j.at("features").get_to(s.features);
    j.at("target_metrics").get_to(s.target_metrics);
    j.at("class_column").get_to(s.class_column);
    j.at("class_labels").get_to(s.class_labels);
    s.validate();
}

inline void to_json(json& j, const EncodedColumn& c) {
    j = json{{"feature", c.feature}, {"level", c.level}, {"mean", c.mean}, {"scale", c.scale}};
}
inline void from_json(const json& j, EncodedColumn& c) {
    j.at("feature").get_to(c.feature);
    j.at("level").get_to(c.level);
    j.at("mean").get_to(c.mean);
    j.at("scale").get_to(c.scale);
}

inline void to_json(json& j, const Encoder& e) {
    j = json{{"schema", e.schema}, {"columns", e.columns}};
}
inline void from_json(const json& j, Encoder& e) {
    j.at("schema").get_to(e.schema);
    j.at("columns").get_to(e.columns);
}

// Signature values are stored column-major: one array of |P| entries per type.
inline void to_json(json& j, const SignatureMatrix& s) {
    json cols = json::array();
    for (std::size_t c = 0; c < s.types.size(); ++c) {
        json col = json::array();
        for (std::size_t r = 0; r < s.parameters.size(); ++r) col.push_back(s.values(r, c));
        cols.push_back(std::move(col));
    }
    j = json{{"parameters", s.parameters},
             {"types", s.types},
             {"values", std::move(cols)},
             {"source", s.source}};
}
inline void from_json(const json& j, SignatureMatrix& s) {
    j.at("parameters").get_to(s.parameters);
    j.at("types").get_to(s.types);
    j.at("source").get_to(s.source);
    const auto& cols = j.at("values");
    if (!cols.is_array() || cols.size() != s.types.size())
        throw std::runtime_error("persist: signature values must hold one column per type");
    s.values = Matrix(s.parameters.size(), s.types.size());
    for (std::size_t c = 0; c < s.types.size(); ++c) {
        const auto& col = cols[c];
        if (!col.is_array() || col.size() != s.parameters.size())
            throw std::runtime_error("persist: signature column length must match parameters");
        for (std::size_t r = 0; r < s.parameters.size(); ++r)
            s.values(r, c) = col[r].get<double>();
    }
    s.validate();
}

inline void to_json(json& j, const ContinuousDist& d) {
    j = json{{"mean", d.mean}, {"sd", d.sd}};
}
inline void from_json(const json& j, ContinuousDist& d) {
    j.at("mean").get_to(d.mean);
    j.at("sd").get_to(d.sd);
}

inline void to_json(json& j, const TargetFunction::Interaction& x) {
    j = json{{"a", x.a}, {"b", x.b}, {"coef", x.coef}};
}
inline void from_json(const json& j, TargetFunction::Interaction& x) {
    j.at("a").get_to(x.a);
    j.at("b").get_to(x.b);
    j.at("coef").get_to(x.coef);
}

inline void to_json(json& j, const TargetFunction& f) {
    j = json{{"intercept", f.intercept},
             {"linear", f.linear},
             {"interactions", f.interactions},
             {"level_effects", f.level_effects},
             {"noise_sd", f.noise_sd}};
}
inline void from_json(const json& j, TargetFunction& f) {
    j.at("intercept").get_to(f.intercept);
    j.at("linear").get_to(f.linear);
    j.at("interactions").get_to(f.interactions);
    j.at("level_effects").get_to(f.level_effects);
    j.at("noise_sd").get_to(f.noise_sd);
}

inline void to_json(json& j, const Hyperparams& h) {
    j = json{{"max_depth", h.max_depth},
             {"learning_rate", h.learning_rate},
             {"n_rounds", h.n_rounds}};
}
inline void from_json(const json& j, Hyperparams& h) {
    j.at("max_depth").get_to(h.max_depth);
    j.at("learning_rate").get_to(h.learning_rate);
    j.at("n_rounds").get_to(h.n_rounds);
    h.validate();
}

// Tree nodes: leaves carry only their value, splits carry the routing fields.
inline void to_json(json& j, const Tree& t) {
    j = json::array();
    for (const auto& n : t.nodes) {
        if (n.feature < 0) {
            j.push_back(json{{"value", n.value}});
        } else {
            j.push_back(json{{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right}});
        }
    }
}
inline void from_json(const json& j, Tree& t) {
    t.nodes.clear();
    for (const auto& jn : j) {
        TreeNode n;
        if (jn.contains("feature")) {
            jn.at("feature").get_to(n.feature);
            jn.at("threshold").get_to(n.threshold);
            jn.at("left").get_to(n.left);
            jn.at("right").get_to(n.right);
        } else {
            jn.at("value").get_to(n.value);
        }
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) throw std::runtime_error("persist: tree without nodes");
}

inline void to_json(json& j, const GbrtModel& m) {
    j = json{{"base_score", m.base_score},
             {"learning_rate", m.learning_rate},
             {"hyperparams", m.hp},
             {"trees", m.trees}};
}
inline void from_json(const json& j, GbrtModel& m) {
    j.at("base_score").get_to(m.base_score);
    j.at("learning_rate").get_to(m.learning_rate);
    j.at("hyperparams").get_to(m.hp);
    j.at("trees").get_to(m.trees);
}

// ---------------------------------------------------------------------------
// Versioned documents

namespace detail {

inline json document(const char* kind) {
    return json{{"version", format_version}, {"kind", kind}};
}

inline void check_document(const json& j, const char* kind) {
    if (!j.is_object() || !j.contains("kind") || !j.contains("version"))
        throw std::runtime_error(std::string("persist: not a versioned '") + kind +
                                 "' document");
    if (j.at("kind").get<std::string>() != kind)
        throw std::runtime_error("persist: expected a '" + std::string(kind) +
                                 "' document, found '" + j.at("kind").get<std::string>() + "'");
    const int v = j.at("version").get<int>();
    if (v != format_version)
        throw std::runtime_error("persist: unsupported '" + std::string(kind) + "' version " +
                                 std::to_string(v));
}

inline json load_document(const std::filesystem::path& path, const char* kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("persist: cannot open '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error("persist: cannot parse '" + path.string() + "': " + e.what());
    }
    check_document(j, kind);
    return j;
}

inline void save_document(const std::filesystem::path& path, const json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

} // namespace detail

inline void save_schema(const FeatureSchema& s, const std::filesystem::path& path) {
    json j = detail::document("feature_schema");
    j["schema"] = s;
    detail::save_document(path, j);
}
inline FeatureSchema load_schema(const std::filesystem::path& path) {
    return detail::load_document(path, "feature_schema").at("schema").get<FeatureSchema>();
}

inline void save_signatures(const SignatureMatrix& s, const std::filesystem::path& path) {
    json j = detail::document("signature_matrix");
    j["signatures"] = s;
    detail::save_document(path, j);
}
inline SignatureMatrix load_signatures(const std::filesystem::path& path) {
    return detail::load_document(path, "signature_matrix")
        .at("signatures")
        .get<SignatureMatrix>();
}

// Generator profiles share one schema; each profile carries its draws and
// target functions in schema feature order.
inline void save_profiles(const std::vector<TypeProfile>& profiles,
                          const std::filesystem::path& path) {
    if (profiles.empty()) throw std::invalid_argument("persist: no profiles to save");
    json arr = json::array();
    for (const auto& p : profiles) {
        arr.push_back(json{{"class_id", p.class_id},
                           {"continuous", p.cont_dists},
                           {"categorical", p.cat_probs},
                           {"targets", p.target_fns}});
    }
    json j = detail::document("generator_profiles");
    j["schema"] = profiles.front().schema;
    j["profiles"] = std::move(arr);
    detail::save_document(path, j);
}
inline std::vector<TypeProfile> load_profiles(const std::filesystem::path& path) {
    const json j = detail::load_document(path, "generator_profiles");
    const FeatureSchema schema = j.at("schema").get<FeatureSchema>();
    std::vector<TypeProfile> out;
    for (const auto& jp : j.at("profiles")) {
        TypeProfile p;
        p.schema = schema;
        jp.at("class_id").get_to(p.class_id);
        jp.at("continuous").get_to(p.cont_dists);
        jp.at("categorical").get_to(p.cat_probs);
        jp.at("targets").get_to(p.target_fns);
        p.validate();
        out.push_back(std::move(p));
    }
    if (out.empty()) throw std::runtime_error("persist: profile file lists no profiles");
    return out;
}

// ---------------------------------------------------------------------------
// Ensemble directory: config, compatibility model, signatures, regressors.

inline void save_ensemble(const ZslEnsemble& e, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    json config = detail::document("ensemble_config");
    config["unknown_types"] = e.unknown_types;
    config["metrics"] = e.metrics();
    config["default_k"] = e.default_k;
    detail::save_document(dir / "config.json", config);

    json compat = detail::document("compatibility");
    compat["class_order"] = e.compat.class_order;
    compat["v"] = e.compat.v;
    compat["encoder"] = e.compat.encoder;
    detail::save_document(dir / "compat.json", compat);

    save_signatures(e.signatures, dir / "signatures.json");

    json regs = detail::document("regressors");
    regs["models"] = e.regressors; // [known type][metric], matching config order
    detail::save_document(dir / "regressors.json", regs);
}

inline ZslEnsemble load_ensemble(const std::filesystem::path& dir) {
    const json config = detail::load_document(dir / "config.json", "ensemble_config");
    const json compat = detail::load_document(dir / "compat.json", "compatibility");
    const json regs = detail::load_document(dir / "regressors.json", "regressors");

    ZslEnsemble e;
    config.at("unknown_types").get_to(e.unknown_types);
    config.at("default_k").get_to(e.default_k);
    compat.at("class_order").get_to(e.compat.class_order);
    compat.at("v").get_to(e.compat.v);
    compat.at("encoder").get_to(e.compat.encoder);
    e.signatures = load_signatures(dir / "signatures.json");
    regs.at("models").get_to(e.regressors);

    e.compat.encoder.schema.validate();
    e.signatures.validate();
    const std::vector<std::string> metrics =
        config.at("metrics").get<std::vector<std::string>>();
    if (metrics != e.metrics())
        throw std::runtime_error("persist: ensemble metrics do not match the encoder schema");
    if (e.regressors.size() != e.compat.class_order.size())
        throw std::runtime_error("persist: regressor count does not match the class order");
    for (const auto& per_type : e.regressors)
        if (per_type.size() != metrics.size())
            throw std::runtime_error("persist: regressor metrics are incomplete");
    for (const auto& t : e.compat.class_order)
        if (e.signatures.type_index(t) < 0)
            throw std::runtime_error("persist: known type '" + t + "' lacks a signature column");
    return e;
}

} // namespace zsl
