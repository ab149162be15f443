// loadrank: rank tabular features by PCA loading scores and factor-analysis
// priority scores, then evaluate rankings with a repeated random-forest
// accuracy-curve harness.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "loadrank/errors.hpp"
#include "loadrank/pipeline.hpp"
#include "loadrank/synth.hpp"

namespace {

using loadrank::Json;
using loadrank::RunConfig;
using loadrank::RunReport;

enum class LogLevel { Debug = 0, Info = 1, Warn = 2, Error = 3 };

LogLevel log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("LOADRANK_LOG");
        std::string v = env ? env : "info";
        if (v == "debug") return LogLevel::Debug;
        if (v == "warn") return LogLevel::Warn;
        if (v == "error") return LogLevel::Error;
        return LogLevel::Info;
    }();
    return level;
}

void log(LogLevel level, const std::string& message) {
    static const char* names[] = {"debug", "info", "warn", "error"};
    if (level < log_level()) return;
    std::fprintf(stderr, "[%s] %s\n", names[static_cast<int>(level)], message.c_str());
}

void add_dataset_options(CLI::App* cmd, RunConfig& config, std::string& mapping,
                         std::string& policy) {
    cmd->add_option("-i,--input", config.input, "Delimited input file (header row)")
        ->required();
    cmd->add_option("-t,--target", config.target_column, "Target column name")
        ->capture_default_str();
    cmd->add_option("--mapping", mapping, "Rating mapping: detailed or coarse")
        ->check(CLI::IsMember({"detailed", "coarse"}))
        ->capture_default_str();
    cmd->add_option("--missing-policy", policy, "Missing cells: drop_row or fail")
        ->check(CLI::IsMember({"drop_row", "fail"}))
        ->capture_default_str();
}

void add_rank_options(CLI::App* cmd, RunConfig& config) {
    cmd->add_option("--alpha", config.alpha, "Chi-square prefilter significance level")
        ->capture_default_str();
    cmd->add_option("--bins", config.n_bins, "Quantile bins for the chi-square test")
        ->capture_default_str();
    cmd->add_option("--variance-threshold", config.variance_threshold,
                    "Cumulative-variance rule for component/factor count")
        ->capture_default_str();
    cmd->add_option("--loading-threshold", config.loading_threshold,
                    "Minimum |rotated loading| to keep a feature in a factor")
        ->capture_default_str();
}

void add_eval_options(CLI::App* cmd, RunConfig& config, std::string& max_features,
                      int& max_depth) {
    cmd->add_option("--test-fraction", config.test_fraction,
                    "Held-out fraction per stratified split")
        ->capture_default_str();
    cmd->add_option("--repeats", config.repeats, "Train/test repetitions per prefix")
        ->capture_default_str();
    cmd->add_option("--shuffles", config.shuffles, "Random orderings in the baseline")
        ->capture_default_str();
    cmd->add_option("--delta", config.delta, "Steady-point tolerance (relative)")
        ->capture_default_str();
    cmd->add_option("--seed", config.base_seed, "Base seed; all randomness derives from it")
        ->capture_default_str();
    cmd->add_option("--trees", config.forest.n_trees, "Trees per forest")
        ->capture_default_str();
    cmd->add_option("--max-features", max_features,
                    "Features tried per split: sqrt, all, or an integer")
        ->capture_default_str();
    cmd->add_option("--min-samples-split", config.forest.min_samples_split,
                    "Minimum node size eligible for a split")
        ->capture_default_str();
    cmd->add_option("--max-depth", max_depth, "Tree depth cap (0 = unlimited)")
        ->capture_default_str();
    cmd->add_option("--threads", config.threads,
                    "Worker threads (0 = hardware); never changes results")
        ->capture_default_str();
}

void apply_string_options(RunConfig& config, const std::string& mapping,
                          const std::string& policy, const std::string& max_features,
                          int max_depth) {
    config.mapping = mapping == "coarse" ? loadrank::MappingScheme::Coarse
                                         : loadrank::MappingScheme::Detailed;
    config.missing_policy = policy == "fail" ? loadrank::MissingPolicy::Fail
                                             : loadrank::MissingPolicy::DropRow;
    if (max_features == "sqrt") {
        config.forest.max_features = loadrank::MaxFeatures::Sqrt;
    } else if (max_features == "all") {
        config.forest.max_features = loadrank::MaxFeatures::All;
    } else {
        config.forest.max_features = loadrank::MaxFeatures::Fixed;
        config.forest.fixed_features = std::stoi(max_features);
    }
    config.forest.max_depth = max_depth == 0 ? std::nullopt : std::optional<int>(max_depth);
}

void print_summary(const RunReport& report) {
    for (const loadrank::FeatureRanking& ranking : report.rankings) {
        std::cout << "\n" << loadrank::ranking_to_text(ranking);
    }
    if (!report.top_k.empty()) {
        std::cout << "\nmethod            k    mean_accuracy\n";
        for (const loadrank::TopKRow& row : report.top_k) {
            std::printf("%-16s  %3zu  %.5f%s\n", row.method.c_str(), row.k_used,
                        row.mean_accuracy, row.truncated ? "  (truncated)" : "");
        }
    }
    for (const std::string& warning : report.warnings) {
        log(LogLevel::Warn, warning);
    }
}

std::string error_kind(const loadrank::Error& e) {
    if (dynamic_cast<const loadrank::IoError*>(&e)) return "io";
    if (dynamic_cast<const loadrank::ParseError*>(&e)) return "parse";
    if (dynamic_cast<const loadrank::UnmappedRating*>(&e)) return "unmapped_rating";
    if (dynamic_cast<const loadrank::MissingTarget*>(&e)) return "missing_target";
    if (dynamic_cast<const loadrank::DegenerateData*>(&e)) return "degenerate_data";
    if (dynamic_cast<const loadrank::StratificationError*>(&e)) return "stratification";
    if (dynamic_cast<const loadrank::NumericalFailure*>(&e)) return "numerical";
    if (dynamic_cast<const loadrank::EmptySelection*>(&e)) return "empty_selection";
    if (dynamic_cast<const loadrank::ConfigError*>(&e)) return "config";
    if (dynamic_cast<const loadrank::ValidationError*>(&e)) return "validation";
    return "error";
}

int run_guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const loadrank::Error& e) {
        Json err;
        err["error"] = true;
        err["type"] = error_kind(e);
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        Json err;
        err["error"] = true;
        err["type"] = "unexpected";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature ranking by PCA/FA loading scores with a random-forest "
                 "accuracy-curve evaluation harness"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Key-value config file; command-line flags win");

    RunConfig config;
    std::string mapping = "detailed";
    std::string policy = "drop_row";
    std::string max_features = "sqrt";
    int max_depth = 0;

    // run: the full pipeline.
    CLI::App* run_cmd = app.add_subcommand("run", "Ingest, rank, evaluate, report");
    add_dataset_options(run_cmd, config, mapping, policy);
    add_rank_options(run_cmd, config);
    add_eval_options(run_cmd, config, max_features, max_depth);
    run_cmd->add_option("-o,--out", config.out_dir, "Output directory")
        ->capture_default_str();

    // rank: rankings only.
    CLI::App* rank_cmd = app.add_subcommand("rank", "Compute rankings without curves");
    add_dataset_options(rank_cmd, config, mapping, policy);
    add_rank_options(rank_cmd, config);
    rank_cmd->add_option("-o,--out", config.out_dir, "Output directory")
        ->capture_default_str();

    // eval: curves for an externally supplied ranking.
    std::string ranking_path;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Accuracy curve for a ranking file");
    add_dataset_options(eval_cmd, config, mapping, policy);
    add_eval_options(eval_cmd, config, max_features, max_depth);
    eval_cmd->add_option("-r,--ranking", ranking_path,
                         "Ranking JSON: [{rank, feature, score}, ...]")
        ->required();
    eval_cmd->add_option("-o,--out", config.out_dir, "Output directory")
        ->capture_default_str();

    // synth: fixture generation.
    loadrank::SynthSpec synth_spec;
    std::string synth_out = "synthetic.csv";
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a latent-factor fixture");
    synth_cmd->add_option("--samples", synth_spec.n_samples, "Rows")->capture_default_str();
    synth_cmd->add_option("--informative", synth_spec.n_informative,
                          "Features driven by the latent factors")
        ->capture_default_str();
    synth_cmd->add_option("--noise", synth_spec.n_noise, "Independent noise features")
        ->capture_default_str();
    synth_cmd->add_option("--factors", synth_spec.n_factors, "Latent factors")
        ->capture_default_str();
    synth_cmd->add_option("--classes", synth_spec.n_classes, "Target classes (2..21)")
        ->capture_default_str();
    synth_cmd->add_option("--loading", synth_spec.loading,
                          "Feature-factor correlation in (0, 1)")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_spec.seed, "Generator seed")->capture_default_str();
    synth_cmd->add_option("-o,--out", synth_out, "Output CSV path")->capture_default_str();

    // inspect: pretty-print a report.
    std::string report_path;
    CLI::App* inspect_cmd = app.add_subcommand("inspect", "Pretty-print a report.json");
    inspect_cmd->add_option("-r,--report", report_path, "Path to report.json")->required();

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) {
        return run_guarded([&] {
            apply_string_options(config, mapping, policy, max_features, max_depth);
            log(LogLevel::Info, "running full pipeline on " + config.input);
            RunReport report = loadrank::run_pipeline(config);
            print_summary(report);
            log(LogLevel::Info, "report written to " + config.out_dir + "/report.json");
            return 0;
        });
    }
    if (rank_cmd->parsed()) {
        return run_guarded([&] {
            apply_string_options(config, mapping, policy, max_features, max_depth);
            RunReport report = loadrank::rank_pipeline(config);
            loadrank::write_report_files(report);
            print_summary(report);
            return 0;
        });
    }
    if (eval_cmd->parsed()) {
        return run_guarded([&] {
            apply_string_options(config, mapping, policy, max_features, max_depth);
            std::ifstream in(ranking_path);
            if (!in) throw loadrank::IoError("cannot open ranking file " + ranking_path);
            Json j = Json::parse(in);
            std::vector<std::string> features;
            for (const Json& row : j) {
                features.push_back(row.at("feature").get<std::string>());
            }
            RunReport report;
            loadrank::AccuracyCurve curve = loadrank::eval_ranking(config, features, report);
            loadrank::write_file_atomic(config.out_dir + "/curves/external.csv",
                                        loadrank::curve_to_csv(curve));
            Json out;
            out["curve"] = loadrank::curve_to_json(curve);
            out["shortlist"] = {{"k_steady", report.shortlists[0].k_steady},
                                {"delta", report.shortlists[0].delta},
                                {"reference_accuracy", report.shortlists[0].reference_accuracy}};
            loadrank::write_file_atomic(config.out_dir + "/eval.json", out.dump(2) + "\n");
            std::cout << out.dump(2) << "\n";
            return 0;
        });
    }
    if (synth_cmd->parsed()) {
        return run_guarded([&] {
            loadrank::write_synthetic(synth_spec, synth_out);
            log(LogLevel::Info, "fixture written to " + synth_out);
            return 0;
        });
    }
    if (inspect_cmd->parsed()) {
        return run_guarded([&] {
            std::ifstream in(report_path);
            if (!in) throw loadrank::IoError("cannot open report " + report_path);
            Json j = Json::parse(in);
            std::cout << "tool: " << j.value("tool", "?") << "\n";
            const Json& data = j.at("data");
            std::cout << "rows: " << data.at("rows") << ", features: "
                      << data.at("features_total") << " -> prefiltered "
                      << data.at("features_prefiltered") << "\n";
            const Json& gate = j.at("gate");
            std::cout << "gate: kmo=" << gate.at("kmo").dump()
                      << ", bartlett p=" << gate.at("bartlett").at("p_value").dump()
                      << ", passed=" << gate.at("passed").dump() << "\n";
            if (j.contains("shortlists")) {
                for (const auto& [method, s] : j.at("shortlists").items()) {
                    std::cout << "shortlist " << method << ": k_steady="
                              << s.at("k_steady") << " (ref "
                              << s.at("reference_accuracy").dump() << ")\n";
                }
            }
            if (j.contains("top_k")) {
                for (const Json& row : j.at("top_k")) {
                    std::cout << "top-k " << row.at("method").get<std::string>() << ": "
                              << row.at("mean_accuracy").dump() << " at k="
                              << row.at("k_used") << "\n";
                }
            }
            for (const Json& w : j.at("warnings")) {
                std::cout << "warning: " << w.get<std::string>() << "\n";
            }
            return 0;
        });
    }
    return 1;
}
