#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "loadrank/errors.hpp"
#include "loadrank/pipeline.hpp"
#include "loadrank/synth.hpp"

using namespace loadrank;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag)
        : path(fs::temp_directory_path() / ("loadrank_test_" + tag)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& rel = "") const {
        return rel.empty() ? path.string() : (path / rel).string();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunConfig fixture_config(const TempDir& dir, std::uint64_t data_seed) {
    SynthSpec spec;
    spec.n_samples = 220;
    spec.n_informative = 6;
    spec.n_noise = 4;
    spec.n_factors = 2;
    spec.n_classes = 3;
    spec.seed = data_seed;
    write_synthetic(spec, dir.str("fixture.csv"));

    RunConfig config;
    config.input = dir.str("fixture.csv");
    config.repeats = 4;
    config.shuffles = 3;
    config.forest.n_trees = 10;
    config.base_seed = 424242;
    config.out_dir = dir.str("out");
    config.threads = 2;
    return config;
}

}  // namespace

TEST_CASE("config echo round-trips") {
    TempDir dir("config");
    RunConfig config = fixture_config(dir, 1);
    config.mapping = MappingScheme::Coarse;
    config.forest.max_features = MaxFeatures::Fixed;
    config.forest.fixed_features = 3;
    config.forest.max_depth = 12;
    Json echoed = config.echo();
    RunConfig back = RunConfig::from_json(echoed);
    CHECK(back.echo().dump() == echoed.dump());
    CHECK(back.mapping == MappingScheme::Coarse);
    CHECK(back.forest.fixed_features == 3);
    CHECK(back.forest.max_depth == std::optional<int>(12));
}

TEST_CASE("config validation rejects out-of-range fields") {
    TempDir dir("badcfg");
    RunConfig config = fixture_config(dir, 2);
    config.alpha = 1.5;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = fixture_config(dir, 2);
    config.test_fraction = 0.0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
    config = fixture_config(dir, 2);
    config.forest.n_trees = 0;
    CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("synthetic fixture bytes are seed-deterministic") {
    SynthSpec spec;
    spec.n_samples = 50;
    spec.n_informative = 3;
    spec.n_noise = 2;
    spec.n_factors = 1;
    spec.n_classes = 2;
    spec.seed = 9;
    std::string a = synthetic_to_csv(generate_synthetic(spec));
    std::string b = synthetic_to_csv(generate_synthetic(spec));
    CHECK(a == b);
    spec.seed = 10;
    CHECK(a != synthetic_to_csv(generate_synthetic(spec)));
}

TEST_CASE("synthetic spec validation") {
    SynthSpec spec;
    spec.n_informative = 1;
    spec.n_factors = 2;
    CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
    spec = SynthSpec{};
    spec.n_classes = 25;
    CHECK_THROWS_AS(generate_synthetic(spec), ValidationError);
}

TEST_CASE("run_pipeline produces the full report with all four curves") {
    TempDir dir("run");
    RunConfig config = fixture_config(dir, 3);
    RunReport report = run_pipeline(config);

    REQUIRE(report.rankings.size() == 3);  // pca_abs, pca_square, fa_priority
    CHECK(report.rankings[0].method == RankMethod::PcaAbs);
    CHECK(report.rankings[1].method == RankMethod::PcaSquare);
    CHECK(report.rankings[2].method == RankMethod::FaPriority);
    REQUIRE(report.curves.size() == 4);
    CHECK(report.curves[3].method == "random_baseline");
    CHECK(report.factor_model.available());
    CHECK(report.shortlists.size() == 4);
    CHECK(report.top_k.size() == 4);

    for (const char* rel : {"report.json", "standardization.json", "factors.json"}) {
        CHECK(fs::exists(dir.path / "out" / rel));
    }
    for (const AccuracyCurve& curve : report.curves) {
        CHECK(fs::exists(dir.path / "out" / "curves" / (curve.method + ".csv")));
    }

    // Manifest hashes match the bytes on disk.
    for (const OutputFile& file : report.manifest) {
        CHECK(fnv1a64_hex(slurp(dir.str("out/" + file.path))) == file.fnv1a64);
    }

    // The echoed config reproduces the run byte-for-byte.
    Json echoed = Json::parse(slurp(dir.str("out/report.json")))["config"];
    RunConfig again = RunConfig::from_json(echoed);
    again.threads = 1;  // execution detail; must not affect bytes
    std::string first = slurp(dir.str("out/report.json"));
    run_pipeline(again);
    CHECK(slurp(dir.str("out/report.json")) == first);
}

TEST_CASE("near-diagonal correlation turns the FA section into NA, not an error") {
    TempDir dir("na");
    SynthSpec spec;
    spec.n_samples = 400;
    spec.n_informative = 2;
    spec.n_noise = 6;
    spec.n_factors = 2;
    spec.n_classes = 2;
    spec.seed = 21;
    spec.loading = 0.72;  // informative pair correlates with y but weakly together
    write_synthetic(spec, dir.str("weak.csv"));

    RunConfig config;
    config.input = dir.str("weak.csv");
    config.repeats = 2;
    config.shuffles = 2;
    config.forest.n_trees = 5;
    config.out_dir = dir.str("out");
    config.alpha = 0.9999;  // keep the noise features: correlation ~ diagonal
    config.threads = 2;
    RunReport report = run_pipeline(config);

    CHECK_FALSE(report.factor_model.available());
    CHECK(report.rankings.size() == 2);  // no fa_priority ranking
    CHECK(report.curves.size() == 3);    // pca_abs, pca_square, baseline
    bool warned = false;
    for (const std::string& w : report.warnings) {
        if (w.find("gate failed") != std::string::npos) warned = true;
    }
    CHECK(warned);
    Json factors = Json::parse(slurp(dir.str("out/factors.json")));
    CHECK(factors.at("available") == false);
}

TEST_CASE("rank_pipeline stops before curves") {
    TempDir dir("rank");
    RunConfig config = fixture_config(dir, 5);
    RunReport report = rank_pipeline(config);
    CHECK(report.curves.empty());
    CHECK(report.rankings.size() >= 2);
    write_report_files(report);
    CHECK(fs::exists(dir.path / "out" / "report.json"));
    Json j = Json::parse(slurp(dir.str("out/report.json")));
    CHECK_FALSE(j.contains("curves"));
}

TEST_CASE("ranking JSON round-trips through serialization") {
    FeatureRanking r;
    r.method = RankMethod::PcaSquare;
    r.indices = {2, 0, 1};
    r.scores = {0.9, 0.5, 0.25};
    r.feature_names = {"c", "a", "b"};
    Json j = ranking_to_json(r);
    FeatureRanking back = ranking_from_json(j);
    CHECK(back.feature_names == r.feature_names);
    CHECK(back.scores == r.scores);
}

TEST_CASE("eval_ranking runs an external feature order") {
    TempDir dir("eval");
    RunConfig config = fixture_config(dir, 6);
    config.repeats = 3;
    RunReport scratch;
    AccuracyCurve curve = eval_ranking(config, {"inf_02", "inf_01"}, scratch);
    CHECK(curve.method == "external");
    CHECK(curve.mean_accuracy.size() == 2);
    CHECK(scratch.shortlists.size() == 1);
    CHECK_THROWS_AS(eval_ranking(config, {"missing_feature"}, scratch),
                    ValidationError);
}

TEST_CASE("pure-noise fixture aborts with EmptySelection") {
    TempDir dir("noise");
    SynthSpec spec;
    spec.n_samples = 300;
    spec.n_informative = 0;
    spec.n_noise = 3;
    spec.n_factors = 0;
    spec.n_classes = 3;
    spec.seed = 11;
    write_synthetic(spec, dir.str("noise.csv"));
    RunConfig config;
    config.input = dir.str("noise.csv");
    config.out_dir = dir.str("out");
    config.repeats = 2;
    config.forest.n_trees = 5;
    CHECK_THROWS_AS(run_pipeline(config), EmptySelection);
}

TEST_CASE("test_result serialization uses null for an infinite statistic") {
    TestResult singular{std::numeric_limits<double>::infinity(), 0.0, 3};
    Json j = test_result_to_json(singular, "non_spherical");
    CHECK(j.at("statistic").is_null());
    CHECK(j.at("p_value") == 0.0);
    TestResult normal{1.5, 0.3, 2};
    CHECK(test_result_to_json(normal, "x").at("statistic") == 1.5);
}

TEST_CASE("fnv1a64 matches known vectors") {
    CHECK(fnv1a64_hex("") == "cbf29ce484222325");
    CHECK(fnv1a64_hex("a") == "af63dc4c8601ec8c");
    CHECK(fnv1a64_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("write_file_atomic creates parents and replaces content") {
    TempDir dir("atomic");
    std::string path = dir.str("nested/deep/file.txt");
    write_file_atomic(path, "one");
    CHECK(slurp(path) == "one");
    write_file_atomic(path, "two");
    CHECK(slurp(path) == "two");
    CHECK_FALSE(fs::exists(path + ".tmp"));
}
