#ifndef LOADRANK_PIPELINE_HPP
#define LOADRANK_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "loadrank/dataset.hpp"
#include "loadrank/eval.hpp"
#include "loadrank/fa.hpp"
#include "loadrank/forest.hpp"
#include "loadrank/pca.hpp"

namespace loadrank {

using Json = nlohmann::ordered_json;

/// Everything an experiment depends on. `threads` is an execution detail:
/// it never changes any output byte and is not part of the config echo.
struct RunConfig {
    std::string input;
    std::string target_column = "rating";
    MappingScheme mapping = MappingScheme::Detailed;
    MissingPolicy missing_policy = MissingPolicy::DropRow;
    double alpha = 0.05;
    int n_bins = 5;
    double variance_threshold = 0.85;
    double loading_threshold = 0.5;
    double test_fraction = 0.25;
    int repeats = 100;
    int shuffles = 10;
    double delta = 0.005;
    std::uint64_t base_seed = 0;
    TrainConfig forest;
    std::string out_dir = "out";
    int threads = 0;  // 0: one worker per hardware thread

    void validate() const;
    Json echo() const;                      // round-trip stable
    static RunConfig from_json(const Json& j);
};

struct OutputFile {
    std::string path;  // relative to out_dir
    std::string fnv1a64;
};

struct RunReport {
    RunConfig config;
    std::size_t n_rows = 0;
    std::vector<int> classes;
    Standardization standardization;
    std::vector<PrefilterRecord> prefilter_records;
    std::vector<std::string> prefiltered_features;
    ComponentSelection selection;
    FactorModel factor_model;
    std::vector<std::string> fa_feature_names;  // names behind FA indices
    std::vector<FeatureRanking> rankings;
    std::vector<AccuracyCurve> curves;
    std::vector<ShortlistResult> shortlists;  // aligned with curves
    std::vector<TopKRow> top_k;
    std::vector<std::string> warnings;
    std::vector<OutputFile> manifest;

    Json to_json() const;
};

/// Rankings only: ingest, standardize, prefilter, PCA scores, gated FA.
RunReport rank_pipeline(const RunConfig& config);

/// Full flow: rank_pipeline plus accuracy curves, baseline, shortlists and
/// the top-k table, then writes report.json, curves/<method>.csv,
/// factors.json and standardization.json under config.out_dir.
RunReport run_pipeline(const RunConfig& config);

/// Curve + shortlist for an externally supplied feature order.
AccuracyCurve eval_ranking(const RunConfig& config,
                           const std::vector<std::string>& ordered_features,
                           RunReport& report_out);

/// Writes standardization.json, factors.json, curves/<method>.csv (when
/// curves exist) and report.json under report.config.out_dir, atomically,
/// and fills the report manifest with content hashes.
void write_report_files(RunReport& report);

// Serialization helpers shared by the CLI and the tests.
Json test_result_to_json(const TestResult& result, const std::string& verdict);
Json ranking_to_json(const FeatureRanking& ranking);
FeatureRanking ranking_from_json(const Json& j);
Json curve_to_json(const AccuracyCurve& curve);
Json standardization_to_json(const Standardization& scale);
Json factor_model_to_json(const FactorModel& model,
                          const std::vector<std::string>& feature_names);
Json forest_to_json(const RandomForest& forest);
std::string ranking_to_text(const FeatureRanking& ranking, std::size_t top_k = 20);

std::string fnv1a64_hex(const std::string& bytes);
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace loadrank

#endif
