#pragma once

// Command-line surface: generate synthetic corpora, train an ensemble for
// one or more unseen types, predict their metrics instance by instance, and
// run the leave-one-type-out evaluation. Every command takes --seed and every
// output file is written atomically, so equal invocations produce equal bytes.

#include "eval.hpp"
#include "persist.hpp"
#include "synthgen.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace zsl {

namespace detail {

inline std::filesystem::path sibling(const std::filesystem::path& base, const char* suffix) {
    std::filesystem::path p = base;
    p.replace_extension();
    p += suffix;
    return p;
}

} // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"zero-shot prediction of building energy metrics"};
    app.require_subcommand(1);

    // generate
    std::string gen_profiles;
    std::size_t gen_n = 100;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "data.csv";
    std::string gen_schema;
    std::string gen_sigs;
    CLI::App* gen = app.add_subcommand("generate", "write a synthetic corpus as CSV");
    gen->add_option("--profiles", gen_profiles, "generator profile JSON (defaults built in)");
    gen->add_option("--n", gen_n, "instances per building type")->check(CLI::PositiveNumber);
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--out", gen_out, "CSV output path");
    gen->add_option("--schema", gen_schema, "schema sidecar path (default <out>.schema.json)");
    gen->add_option("--signatures", gen_sigs,
                    "expert signature output path (default <out>.signatures.json)");

    // train
    std::string tr_data, tr_schema, tr_sigs, tr_out;
    std::vector<std::string> tr_unknown;
    std::size_t tr_k = 0;
    std::uint64_t tr_seed = 0;
    double tr_l2 = 0.01;
    std::size_t tr_folds = 5;
    CLI::App* tr = app.add_subcommand("train", "fit an ensemble for unseen types");
    tr->add_option("--data", tr_data, "training CSV")->required();
    tr->add_option("--schema", tr_schema, "schema sidecar")->required();
    tr->add_option("--signatures", tr_sigs, "signature matrix JSON")->required();
    tr->add_option("--unknown", tr_unknown, "type to treat as unseen (repeatable)")->required();
    tr->add_option("--k", tr_k, "stored blend width, 0 blends all known types");
    tr->add_option("--seed", tr_seed, "tuning seed");
    tr->add_option("--l2", tr_l2, "classifier ridge strength")->check(CLI::NonNegativeNumber);
    tr->add_option("--tune-folds", tr_folds, "cross-validation folds")
        ->check(CLI::PositiveNumber);
    tr->add_option("--out", tr_out, "ensemble output directory")->required();

    // predict
    std::string pr_ensemble, pr_data, pr_schema, pr_type, pr_out;
    std::size_t pr_k = 0;
    std::uint64_t pr_seed = 0;
    CLI::App* pr = app.add_subcommand("predict", "score instances of an unseen type");
    pr->add_option("--ensemble", pr_ensemble, "ensemble directory")->required();
    pr->add_option("--data", pr_data, "instance CSV")->required();
    pr->add_option("--schema", pr_schema, "schema sidecar")->required();
    pr->add_option("--type", pr_type, "unseen type the instances belong to")->required();
    pr->add_option("--k", pr_k, "blend width override, 0 uses the stored width");
    pr->add_option("--seed", pr_seed, "accepted for uniformity; prediction is deterministic");
    pr->add_option("--out", pr_out, "JSON-lines output path (default stdout)");

    // evaluate
    std::string ev_data, ev_schema, ev_sigs;
    std::string ev_json = "eval_report.json";
    EvalConfig ev_config;
    CLI::App* ev = app.add_subcommand("evaluate", "leave-one-type-out comparison");
    ev->add_option("--data", ev_data, "corpus CSV")->required();
    ev->add_option("--schema", ev_schema, "schema sidecar")->required();
    ev->add_option("--signatures", ev_sigs, "expert signature JSON")->required();
    ev->add_option("--ratio", ev_config.holdout_ratio, "per-type training share")
        ->check(CLI::Range(0.0, 1.0));
    ev->add_option("--k", ev_config.k, "blend width, 0 blends all known types");
    ev->add_option("--n-params", ev_config.n_params,
                   "spectral signature length, 0 matches the expert matrix");
    ev->add_option("--seed", ev_config.seed, "split and tuning seed");
    ev->add_option("--tune-folds", ev_config.tune_folds, "cross-validation folds")
        ->check(CLI::PositiveNumber);
    ev->add_option("--l2", ev_config.l2, "classifier ridge strength")
        ->check(CLI::NonNegativeNumber);
    ev->add_option("--json", ev_json, "report JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (gen->parsed()) {
            const bool custom = !gen_profiles.empty();
            const std::vector<TypeProfile> profiles =
                custom ? load_profiles(gen_profiles) : default_profiles();
            const Dataset data = generate(profiles, gen_n, gen_seed);

            const std::filesystem::path out_path = gen_out;
            const std::filesystem::path schema_path = gen_schema.empty()
                                                          ? detail::sibling(out_path, ".schema.json")
                                                          : std::filesystem::path(gen_schema);
            save_csv(data, out_path);
            save_schema(data.schema, schema_path);
            out << "data: " << out_path.string() << " (" << data.size() << " instances)\n";
            out << "schema: " << schema_path.string() << "\n";
            if (custom) {
                out << "signatures: skipped (no expert matrix for custom profiles)\n";
            } else {
                const std::filesystem::path sig_path =
                    gen_sigs.empty() ? detail::sibling(out_path, ".signatures.json")
                                     : std::filesystem::path(gen_sigs);
                save_signatures(default_signatures(), sig_path);
                out << "signatures: " << sig_path.string() << "\n";
            }
        } else if (tr->parsed()) {
            const FeatureSchema schema = load_schema(tr_schema);
            const Dataset data = load_csv(tr_data, schema);
            const SignatureMatrix sig = load_signatures(tr_sigs);
            TrainConfig tc;
            tc.seed = tr_seed;
            tc.l2 = tr_l2;
            tc.tune_folds = tr_folds;
            ZslEnsemble ensemble = train(data, sig, tr_unknown, tc);
            ensemble.default_k = tr_k;
            save_ensemble(ensemble, tr_out);
            out << "ensemble: " << tr_out << " (" << ensemble.compat.class_order.size()
                << " known types, " << ensemble.unknown_types.size() << " unseen)\n";
        } else if (pr->parsed()) {
            const ZslEnsemble ensemble = load_ensemble(pr_ensemble);
            const FeatureSchema schema = load_schema(pr_schema);
            if (schema != ensemble.compat.encoder.schema)
                throw std::runtime_error(
                    "predict: schema does not match the one the ensemble was trained with");
            const Dataset data = load_csv(pr_data, schema);
            const std::size_t k = pr_k != 0          ? pr_k
                                  : ensemble.default_k != 0
                                      ? ensemble.default_k
                                      : ensemble.compat.class_order.size();

            const auto preds = predict(ensemble, data, pr_type, k);
            std::string lines;
            for (const auto& p : preds) {
                json ranked = json::array();
                for (const auto& r : p.ranked)
                    ranked.push_back(json{
                        {"type", r.type}, {"score", r.score}, {"values", r.metric_values}});
                const json j{{"ranked", std::move(ranked)},
                             {"weights", p.weights},
                             {"prediction", p.values}};
                lines += j.dump();
                lines += '\n';
            }
            if (pr_out.empty()) {
                out << lines;
            } else {
                write_file_atomic(pr_out, lines);
                out << "predictions: " << pr_out << " (" << preds.size() << " instances)\n";
            }
        } else if (ev->parsed()) {
            const FeatureSchema schema = load_schema(ev_schema);
            const Dataset data = load_csv(ev_data, schema);
            const SignatureMatrix sig = load_signatures(ev_sigs);
            const EvalReport report = leave_one_type_out(data, sig, ev_config);
            out << render_table(report);
            save_report(report, ev_json);
            out << "report: " << ev_json << "\n";
        }
    } catch (const std::exception& e) {
        err << "zsep " << app.get_subcommands().front()->get_name() << ": " << e.what()
            << "\n";
        return 1;
    }
    return 0;
}

} // namespace zsl
