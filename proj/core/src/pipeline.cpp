#include "loadrank/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <thread>

#include "loadrank/errors.hpp"
#include "loadrank/synth.hpp"
#include "loadrank/table.hpp"

namespace loadrank {

namespace {

std::string mapping_name(MappingScheme scheme) {
    return scheme == MappingScheme::Detailed ? "detailed" : "coarse";
}

MappingScheme mapping_from_name(const std::string& name) {
    if (name == "detailed") return MappingScheme::Detailed;
    if (name == "coarse") return MappingScheme::Coarse;
    throw ConfigError("unknown mapping scheme \"" + name + "\"");
}

std::string policy_name(MissingPolicy policy) {
    return policy == MissingPolicy::DropRow ? "drop_row" : "fail";
}

MissingPolicy policy_from_name(const std::string& name) {
    if (name == "drop_row") return MissingPolicy::DropRow;
    if (name == "fail") return MissingPolicy::Fail;
    throw ConfigError("unknown missing policy \"" + name + "\"");
}

Json max_features_to_json(const TrainConfig& cfg) {
    switch (cfg.max_features) {
        case MaxFeatures::Sqrt: return "sqrt";
        case MaxFeatures::All: return "all";
        case MaxFeatures::Fixed: return cfg.fixed_features;
    }
    return "sqrt";
}

void max_features_from_json(const Json& j, TrainConfig& cfg) {
    if (j.is_number_integer()) {
        cfg.max_features = MaxFeatures::Fixed;
        cfg.fixed_features = j.get<int>();
        return;
    }
    std::string name = j.get<std::string>();
    if (name == "sqrt") {
        cfg.max_features = MaxFeatures::Sqrt;
    } else if (name == "all") {
        cfg.max_features = MaxFeatures::All;
    } else {
        throw ConfigError("max_features must be \"sqrt\", \"all\" or an integer");
    }
}

int resolve_threads(int configured) {
    if (configured > 0) return configured;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

void RunConfig::validate() const {
    if (input.empty()) throw ConfigError("input path is required");
    if (target_column.empty()) throw ConfigError("target column is required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
    if (n_bins < 2) throw ConfigError("n_bins must be >= 2");
    if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
        throw ConfigError("variance_threshold must be in (0, 1]");
    }
    if (!(loading_threshold > 0.0 && loading_threshold <= 1.0)) {
        throw ConfigError("loading_threshold must be in (0, 1]");
    }
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test_fraction must be in (0, 1)");
    }
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (shuffles < 1) throw ConfigError("shuffles must be >= 1");
    if (delta < 0.0) throw ConfigError("delta must be >= 0");
    if (forest.n_trees < 1) throw ConfigError("forest trees must be >= 1");
    if (forest.min_samples_split < 2) {
        throw ConfigError("min_samples_split must be >= 2");
    }
    if (forest.max_features == MaxFeatures::Fixed && forest.fixed_features < 1) {
        throw ConfigError("fixed max_features must be >= 1");
    }
    if (out_dir.empty()) throw ConfigError("output directory is required");
}

Json RunConfig::echo() const {
    Json j;
    j["input"] = input;
    j["target_column"] = target_column;
    j["mapping"] = mapping_name(mapping);
    j["missing_policy"] = policy_name(missing_policy);
    j["alpha"] = alpha;
    j["n_bins"] = n_bins;
    j["variance_threshold"] = variance_threshold;
    j["loading_threshold"] = loading_threshold;
    j["test_fraction"] = test_fraction;
    j["repeats"] = repeats;
    j["shuffles"] = shuffles;
    j["delta"] = delta;
    j["base_seed"] = base_seed;
    Json f;
    f["trees"] = forest.n_trees;
    f["max_features"] = max_features_to_json(forest);
    f["min_samples_split"] = forest.min_samples_split;
    f["max_depth"] = forest.max_depth.value_or(0);
    j["forest"] = f;
    j["out_dir"] = out_dir;
    return j;
}

RunConfig RunConfig::from_json(const Json& j) {
    RunConfig c;
    c.input = j.at("input").get<std::string>();
    c.target_column = j.at("target_column").get<std::string>();
    c.mapping = mapping_from_name(j.at("mapping").get<std::string>());
    c.missing_policy = policy_from_name(j.at("missing_policy").get<std::string>());
    c.alpha = j.at("alpha").get<double>();
    c.n_bins = j.at("n_bins").get<int>();
    c.variance_threshold = j.at("variance_threshold").get<double>();
    c.loading_threshold = j.at("loading_threshold").get<double>();
    c.test_fraction = j.at("test_fraction").get<double>();
    c.repeats = j.at("repeats").get<int>();
    c.shuffles = j.at("shuffles").get<int>();
    c.delta = j.at("delta").get<double>();
    c.base_seed = j.at("base_seed").get<std::uint64_t>();
    const Json& f = j.at("forest");
    c.forest.n_trees = f.at("trees").get<int>();
    max_features_from_json(f.at("max_features"), c.forest);
    c.forest.min_samples_split = f.at("min_samples_split").get<int>();
    int depth = f.at("max_depth").get<int>();
    c.forest.max_depth = depth == 0 ? std::nullopt : std::optional<int>(depth);
    c.out_dir = j.at("out_dir").get<std::string>();
    c.validate();
    return c;
}

Json test_result_to_json(const TestResult& result, const std::string& verdict) {
    Json j;
    if (std::isfinite(result.statistic)) {
        j["statistic"] = result.statistic;
    } else {
        j["statistic"] = nullptr;  // singular-matrix convention
    }
    j["p_value"] = result.p_value;
    j["dof"] = result.dof;
    j["verdict"] = verdict;
    return j;
}

Json ranking_to_json(const FeatureRanking& ranking) {
    Json j = Json::array();
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        Json row;
        row["rank"] = r + 1;
        row["feature"] = ranking.feature_names[r];
        row["score"] = ranking.scores[r];
        j.push_back(std::move(row));
    }
    return j;
}

FeatureRanking ranking_from_json(const Json& j) {
    FeatureRanking out;
    for (const Json& row : j) {
        out.feature_names.push_back(row.at("feature").get<std::string>());
        out.scores.push_back(row.value("score", 0.0));
        out.indices.push_back(out.indices.size());
    }
    return out;
}

Json curve_to_json(const AccuracyCurve& curve) {
    Json j;
    j["method"] = curve.method;
    j["repeats"] = curve.repeats;
    j["mean_accuracy"] = curve.mean_accuracy;
    j["seeds"] = curve.seeds;
    return j;
}

Json standardization_to_json(const Standardization& scale) {
    Json j = Json::array();
    for (const ColumnScale& col : scale.columns) {
        Json row;
        row["feature"] = col.feature;
        row["mean"] = col.mean;
        row["std"] = col.std;
        row["dropped"] = col.dropped;
        j.push_back(std::move(row));
    }
    return j;
}

Json factor_model_to_json(const FactorModel& model,
                          const std::vector<std::string>& feature_names) {
    Json j;
    Json gate;
    if (model.gate.kmo_value.has_value()) {
        gate["kmo"] = *model.gate.kmo_value;
    } else {
        gate["kmo"] = nullptr;
    }
    gate["bartlett"] = test_result_to_json(
        model.gate.bartlett,
        model.gate.bartlett.p_value < 0.05 ? "non_spherical" : "spherical");
    gate["passed"] = model.gate.passed;
    j["gate"] = std::move(gate);
    j["available"] = model.available();
    if (!model.available()) return j;

    j["m"] = model.m;
    j["rotation_converged"] = model.rotation_converged;
    Json rotated = Json::array();
    for (std::size_t i = 0; i < model.rotated_loadings.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t f = 0; f < model.rotated_loadings.cols(); ++f) {
            row.push_back(model.rotated_loadings(i, f));
        }
        rotated.push_back(std::move(row));
    }
    j["rotated_loadings"] = std::move(rotated);

    Json factors = Json::array();
    for (std::size_t f = 1; f <= model.m; ++f) {
        Json group;
        group["factor"] = f;
        Json members = Json::array();
        for (const FactorAssignment& a : model.assignments) {
            if (a.factor != f) continue;
            Json entry;
            entry["feature"] = feature_names.at(a.feature);
            entry["loading"] = a.loading;
            members.push_back(std::move(entry));
        }
        group["features"] = std::move(members);
        factors.push_back(std::move(group));
    }
    j["assignments"] = std::move(factors);
    return j;
}

Json forest_to_json(const RandomForest& forest) {
    Json j;
    j["trees"] = forest.config.n_trees;
    j["classes"] = forest.classes;
    j["n_features"] = forest.n_features;
    Json trees = Json::array();
    for (const DecisionTree& tree : forest.trees) {
        Json nodes = Json::array();
        for (const TreeNode& node : tree.nodes) {
            Json n;
            if (node.feature >= 0) {
                n["feature"] = node.feature;
                n["threshold"] = node.threshold;
                n["left"] = node.left;
                n["right"] = node.right;
            } else {
                n["class"] = forest.classes.at(static_cast<std::size_t>(node.klass));
                n["count"] = node.count;
                n["class_counts"] = node.class_counts;
            }
            nodes.push_back(std::move(n));
        }
        Json t;
        t["nodes"] = std::move(nodes);
        trees.push_back(std::move(t));
    }
    j["forest"] = std::move(trees);
    return j;
}

std::string ranking_to_text(const FeatureRanking& ranking, std::size_t top_k) {
    std::ostringstream out;
    out << "rank  score      feature (" << rank_method_name(ranking.method) << ")\n";
    std::size_t limit = std::min(top_k, ranking.size());
    char buf[64];
    for (std::size_t r = 0; r < limit; ++r) {
        std::snprintf(buf, sizeof(buf), "%4zu  %-9.4f  ", r + 1, ranking.scores[r]);
        out << buf << ranking.feature_names[r] << "\n";
    }
    return out.str();
}

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) {
        fs::create_directories(target.parent_path());
    }
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::FILE* f = std::fopen(tmp.string().c_str(), "wb");
        if (!f) throw IoError("cannot open \"" + tmp.string() + "\" for writing");
        std::size_t written = std::fwrite(content.data(), 1, content.size(), f);
        if (std::fclose(f) != 0 || written != content.size()) {
            throw IoError("write failure on \"" + tmp.string() + "\"");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) throw IoError("cannot rename \"" + tmp.string() + "\": " + ec.message());
}

RunReport rank_pipeline(const RunConfig& config) {
    config.validate();

    RunReport report;
    report.config = config;

    RawTable table = load_table(config.input);
    RatingMapping mapping = RatingMapping::for_scheme(config.mapping);
    Dataset raw = build_dataset(table, config.target_column, mapping,
                                config.missing_policy);
    report.n_rows = raw.n_samples();
    {
        std::set<int> classes(raw.y.begin(), raw.y.end());
        report.classes.assign(classes.begin(), classes.end());
    }

    auto [standardized, scale] = standardize(raw);
    report.standardization = scale;
    for (const ColumnScale& col : scale.columns) {
        if (col.dropped) {
            report.warnings.push_back("standardize: dropped constant column \"" +
                                      col.feature + "\"");
        }
    }

    PrefilterResult filtered = prefilter(standardized, config.alpha, config.n_bins);
    report.prefilter_records = filtered.records;
    report.prefiltered_features = filtered.dataset.feature_names;
    const Dataset& work = filtered.dataset;

    CorrelationMatrix R = correlation_matrix(work.X);
    EigenDecomposition eig = eigen_sym(R);
    LoadingMatrix loadings = pca_loadings(eig, work.feature_names);
    report.selection = select_components(eig.eigenvalues, config.variance_threshold);
    report.rankings.push_back(score_abs(loadings, report.selection));
    report.rankings.push_back(score_square(loadings, report.selection));

    report.factor_model = fit_factor_model(R, work.n_samples(),
                                           config.variance_threshold,
                                           config.loading_threshold);
    report.fa_feature_names = work.feature_names;
    if (!report.factor_model.available()) {
        report.warnings.push_back(
            "fa: adequacy gate failed (KMO/Bartlett); factor outputs are NA");
    } else {
        if (!report.factor_model.rotation_converged) {
            report.warnings.push_back("fa: varimax hit the sweep limit; using best-so-far");
        }
        if (report.factor_model.assignments.empty()) {
            report.warnings.push_back(
                "fa: no feature reached the loading threshold; factor ranking empty");
        } else {
            report.rankings.push_back(fa_priority_rank(report.factor_model.assignments,
                                                       report.factor_model.m,
                                                       work.feature_names));
        }
    }
    return report;
}

namespace {

const FeatureRanking* find_ranking(const RunReport& report, RankMethod method) {
    for (const FeatureRanking& r : report.rankings) {
        if (r.method == method) return &r;
    }
    return nullptr;
}

}  // namespace

RunReport run_pipeline(const RunConfig& config) {
    RunReport report = rank_pipeline(config);

    // Rebuild the working dataset the rankings refer to.
    RawTable table = load_table(config.input);
    RatingMapping mapping = RatingMapping::for_scheme(config.mapping);
    Dataset raw = build_dataset(table, config.target_column, mapping,
                                config.missing_policy);
    auto [standardized, scale] = standardize(raw);
    PrefilterResult filtered = prefilter(standardized, config.alpha, config.n_bins);
    const Dataset& work = filtered.dataset;

    EvalOptions options;
    options.repeats = config.repeats;
    options.test_fraction = config.test_fraction;
    options.base_seed = config.base_seed;
    options.forest = config.forest;
    options.threads = resolve_threads(config.threads);

    for (const FeatureRanking& ranking : report.rankings) {
        report.curves.push_back(accuracy_curve(work, ranking, options));
    }
    std::vector<std::size_t> all_features(work.n_features());
    for (std::size_t j = 0; j < all_features.size(); ++j) all_features[j] = j;
    report.curves.push_back(
        random_baseline(work, all_features, config.shuffles, options));

    for (const AccuracyCurve& curve : report.curves) {
        report.shortlists.push_back(steady_point(curve, config.delta));
    }
    report.top_k = top_k_summary(report.curves);

    write_report_files(report);
    return report;
}

void write_report_files(RunReport& report) {
    // Manifest records a content hash per auxiliary file; report.json is the
    // manifest's carrier and cannot hash itself.
    namespace fs = std::filesystem;
    fs::path out_dir(report.config.out_dir);
    report.manifest.clear();
    auto emit = [&](const std::string& rel, const std::string& content) {
        write_file_atomic((out_dir / rel).string(), content);
        report.manifest.push_back(OutputFile{rel, fnv1a64_hex(content)});
    };
    emit("standardization.json",
         standardization_to_json(report.standardization).dump(2) + "\n");
    emit("factors.json",
         factor_model_to_json(report.factor_model, report.fa_feature_names).dump(2) + "\n");
    for (const FeatureRanking& ranking : report.rankings) {
        emit("rankings/" + std::string(rank_method_name(ranking.method)) + ".json",
             ranking_to_json(ranking).dump(2) + "\n");
    }
    for (const AccuracyCurve& curve : report.curves) {
        emit("curves/" + curve.method + ".csv", curve_to_csv(curve));
    }
    write_file_atomic((out_dir / "report.json").string(), report.to_json().dump(2) + "\n");
}

AccuracyCurve eval_ranking(const RunConfig& config,
                           const std::vector<std::string>& ordered_features,
                           RunReport& report_out) {
    config.validate();
    if (ordered_features.empty()) throw ValidationError("ranking file lists no features");

    RawTable table = load_table(config.input);
    RatingMapping mapping = RatingMapping::for_scheme(config.mapping);
    Dataset raw = build_dataset(table, config.target_column, mapping,
                                config.missing_policy);
    auto [standardized, scale] = standardize(raw);

    FeatureRanking ranking;
    ranking.method = RankMethod::PcaSquare;  // tag replaced below
    for (const std::string& name : ordered_features) {
        auto it = std::find(standardized.feature_names.begin(),
                            standardized.feature_names.end(), name);
        if (it == standardized.feature_names.end()) {
            throw ValidationError("ranked feature \"" + name + "\" not in dataset");
        }
        ranking.indices.push_back(
            static_cast<std::size_t>(it - standardized.feature_names.begin()));
        ranking.feature_names.push_back(name);
        ranking.scores.push_back(0.0);
    }

    EvalOptions options;
    options.repeats = config.repeats;
    options.test_fraction = config.test_fraction;
    options.base_seed = config.base_seed;
    options.forest = config.forest;
    options.threads = resolve_threads(config.threads);

    AccuracyCurve curve = accuracy_curve(standardized, ranking, options);
    curve.method = "external";
    report_out.config = config;
    report_out.curves.push_back(curve);
    report_out.shortlists.push_back(steady_point(curve, config.delta));
    return curve;
}

Json RunReport::to_json() const {
    Json j;
    j["tool"] = "loadrank";
    j["config"] = config.echo();

    Json data;
    data["rows"] = n_rows;
    data["classes"] = classes;
    data["features_total"] = standardization.columns.size();
    data["features_standardized"] =
        standardization.columns.size() - standardization.dropped_count();
    data["features_prefiltered"] = prefiltered_features.size();
    j["data"] = std::move(data);

    Json pre;
    pre["alpha"] = config.alpha;
    pre["n_bins"] = config.n_bins;
    pre["kept"] = prefiltered_features;
    Json records = Json::array();
    for (const PrefilterRecord& rec : prefilter_records) {
        Json r;
        r["feature"] = rec.feature;
        if (rec.test.has_value()) {
            r["test"] = test_result_to_json(*rec.test,
                                            rec.kept ? "selected" : "not_selected");
        } else {
            r["test"] = test_result_to_json(TestResult{0.0, 1.0, 0}, "not_testable");
        }
        records.push_back(std::move(r));
    }
    pre["records"] = std::move(records);
    j["prefilter"] = std::move(pre);

    Json comp;
    comp["count"] = selection.count;
    comp["cumulative_variance"] = selection.cumulative_variance;
    j["components"] = std::move(comp);

    Json fa = factor_model_to_json(factor_model, fa_feature_names);
    j["gate"] = fa.at("gate");
    j["gate"]["computed_on"] = "prefiltered_features";

    Json ranks;
    for (const FeatureRanking& ranking : rankings) {
        ranks[rank_method_name(ranking.method)] = ranking_to_json(ranking);
    }
    if (!factor_model.available()) ranks["fa_priority"] = nullptr;
    j["rankings"] = std::move(ranks);

    if (!curves.empty()) {
        Json cj;
        for (const AccuracyCurve& curve : curves) cj[curve.method] = curve_to_json(curve);
        j["curves"] = std::move(cj);

        Json sj;
        for (std::size_t i = 0; i < shortlists.size(); ++i) {
            Json s;
            s["k_steady"] = shortlists[i].k_steady;
            s["delta"] = shortlists[i].delta;
            s["reference_accuracy"] = shortlists[i].reference_accuracy;
            sj[curves[i].method] = std::move(s);
        }
        j["shortlists"] = std::move(sj);

        Json tk = Json::array();
        for (const TopKRow& row : top_k) {
            Json r;
            r["method"] = row.method;
            r["k_used"] = row.k_used;
            r["mean_accuracy"] = row.mean_accuracy;
            r["truncated"] = row.truncated;
            tk.push_back(std::move(r));
        }
        j["top_k"] = std::move(tk);
    }

    j["warnings"] = warnings;

    Json manifest_json = Json::array();
    for (const OutputFile& file : manifest) {
        Json m;
        m["path"] = file.path;
        m["fnv1a64"] = file.fnv1a64;
        manifest_json.push_back(std::move(m));
    }
    j["manifest"] = std::move(manifest_json);
    return j;
}

}  // namespace loadrank
