#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "ransomtrack/matrix_io.hpp"
#include "ransomtrack/pipeline.hpp"
#include "ransomtrack/synth.hpp"

using namespace ransomtrack;
namespace fs = std::filesystem;

namespace {

nlohmann::json strip_timing(nlohmann::json j) {
    if (j.is_object()) {
        j.erase("timing");
        for (auto& [key, value] : j.items()) value = strip_timing(value);
    } else if (j.is_array()) {
        for (auto& value : j) value = strip_timing(value);
    }
    return j;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

PipelineConfig small_config(const std::string& out_dir) {
    SynthPlan plan;
    plan.n_per_class = 120;
    plan.n_features = 12;
    plan.neutral_blocks = {{0, 1, 2}};
    plan.benign_blocks = {{3, 4}};
    plan.ransom_blocks = {{5, 6}};
    plan.signal_features = {7, 8};
    plan.margin = 3.0;
    plan.seed = 42;

    PipelineConfig config;
    config.seed = 42;
    config.synth_plan = plan;
    config.hyperparams.forest.n_trees = 15;
    config.hyperparams.boosted.rounds = 15;
    config.explain_top_k = 5;
    config.background_per_class = 10;
    config.report_dir = out_dir;
    return config;
}

} // namespace

TEST_CASE("matrix files round-trip") {
    SynthPlan plan;
    plan.n_per_class = 20;
    plan.n_features = 5;
    plan.signal_features = {0};
    plan.margin = 2.0;
    auto data = generate(plan);
    const auto path = fs::temp_directory_path() / "rt_matrix.json";
    save_matrix(data.matrix, path.string());
    const auto loaded = load_matrix(path.string());
    CHECK(loaded.space() == data.matrix.space());
    CHECK(loaded.values() == data.matrix.values());
    CHECK(loaded.ids() == data.matrix.ids());
    CHECK(loaded.labels() == data.matrix.labels());
    fs::remove(path);
}

TEST_CASE("pipeline config round-trips through json") {
    const auto config = small_config("x");
    const auto j = config.to_json();
    const auto back = PipelineConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.seed == 42);
    CHECK(back.models.size() == 6);
    CHECK(back.synth_plan->n_per_class == 120);
}

TEST_CASE("two pipeline runs are byte-identical apart from timing") {
    const auto dir = fs::temp_directory_path() / "rt_pipe_det";
    fs::remove_all(dir);
    const auto config = small_config(dir.string());

    run_pipeline(config);
    std::map<std::string, std::string> first;
    for (const auto& entry : fs::directory_iterator(dir))
        first[entry.path().filename().string()] = slurp(entry.path());
    fs::remove_all(dir);
    run_pipeline(config);

    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        REQUIRE(first.count(name) == 1);
        INFO(name);
        if (entry.path().extension() == ".json") {
            const auto ja = strip_timing(nlohmann::json::parse(first.at(name)));
            const auto jb = strip_timing(nlohmann::json::parse(slurp(entry.path())));
            CHECK(ja.dump() == jb.dump());
            ++compared;
        } else if (name == "rankings.csv" || name == "taxonomy.txt") {
            CHECK(first.at(name) == slurp(entry.path()));
            ++compared;
        }
    }
    CHECK(compared >= 15);  // model + report files for six models, plus bundles
    fs::remove_all(dir);
}

TEST_CASE("stage timings are accounted against the total") {
    const auto dir = fs::temp_directory_path() / "rt_pipe_t";
    fs::remove_all(dir);
    const auto result = run_pipeline(small_config(dir.string()));
    const double stage_sum = result.timing.extraction_s + result.timing.preprocessing_s +
                             result.timing.train_s + result.timing.classify_s +
                             result.timing.explain_s;
    CHECK(stage_sum <= result.timing.total_s * 1.05);
    CHECK(result.timing.total_s > 0.0);
    CHECK(result.reports.size() == 6);
    // the planted taxonomy surfaced
    CHECK(result.taxonomy.clusters.size() == 3);
    REQUIRE(result.reduction.has_value());
    CHECK(result.reduction->dropped.size() == 2);  // neutral triple collapses to one
    fs::remove_all(dir);
}

TEST_CASE("pipeline diagnostics name the failing stage") {
    PipelineConfig config;
    config.dataset_csv = "/nonexistent/input.csv";
    config.report_dir = (fs::temp_directory_path() / "rt_pipe_fail").string();
    try {
        run_pipeline(config);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("stage extraction") != std::string::npos);
    }
    fs::remove_all(config.report_dir);
}

TEST_CASE("extraction cache short-circuits repeated parsing") {
    const auto dir = fs::temp_directory_path() / "rt_cache";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto listing_path = dir / "sample.txt";
    {
        std::ofstream out(listing_path);
        out << emit_listing({{"mov", 3}, {"xor", 2}});
    }
    OpcodeLexicon lexicon({"mov", "xor"});
    const std::string cache = (dir / "cache").string();

    const auto first = extract_listing(listing_path.string(), lexicon, cache);
    CHECK_FALSE(first.from_cache);
    CHECK(first.opcode_counts.at("mov") == 3);

    const auto second = extract_listing(listing_path.string(), lexicon, cache);
    CHECK(second.from_cache);
    CHECK(second.opcode_counts == first.opcode_counts);

    SECTION("corrupt cache entries are re-extracted") {
        std::ofstream(fs::path(cache) / (first.digest + ".json")) << "not json";
        const auto third = extract_listing(listing_path.string(), lexicon, cache);
        CHECK_FALSE(third.from_cache);
        CHECK(third.opcode_counts == first.opcode_counts);
    }
    fs::remove_all(dir);
}

TEST_CASE("cli drives the whole flow end to end") {
    const auto dir = fs::temp_directory_path() / "rt_cli_smoke";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = RANSOMTRACK_CLI;
    auto run = [&](const std::string& args) {
        const std::string cmd =
            "cd " + dir.string() + " && " + cli + " " + args + " > cli.log 2>&1";
        return std::system(cmd.c_str());
    };

    // plan file for synth
    SynthPlan plan;
    plan.n_per_class = 80;
    plan.n_features = 8;
    plan.neutral_blocks = {{0, 1}};
    plan.signal_features = {2, 3};
    plan.margin = 3.0;
    plan.seed = 42;
    {
        std::ofstream out(dir / "plan.json");
        out << plan.to_json().dump() << '\n';
    }

    CHECK(run("synth --plan plan.json --out syn") == 0);
    CHECK(fs::exists(dir / "syn" / "matrix.json"));
    CHECK(run("group --matrix syn/matrix.json --reduce --out grp") == 0);
    CHECK(fs::exists(dir / "grp" / "taxonomy.json"));
    CHECK(fs::exists(dir / "grp" / "reduced.json"));
    CHECK(run("eval --matrix syn/matrix.json --models dt boosted --seed 42 --report rep") == 0);
    CHECK(fs::exists(dir / "rep" / "comparison.txt"));
    CHECK(run("report --dir rep") == 0);
    CHECK(run("train --matrix syn/matrix.json --model dt --seed 42 --out model.json") == 0);
    CHECK(run("explain --model model.json --matrix syn/matrix.json --top 3 --out expl") == 0);
    CHECK(fs::exists(dir / "expl" / "rankings.csv"));
    CHECK(fs::exists(dir / "expl" / "attributions.jsonl"));

    // usage error -> 1; data error -> 2
    CHECK(run("group") != 0);
    const int missing = run("eval --matrix missing.json --report rep2");
    CHECK(WEXITSTATUS(missing) == 2);

    fs::remove_all(dir);
}

TEST_CASE("predict drops features outside the model's space") {
    // train a model on a tiny space, then predict from artifacts containing
    // APIs the space has never seen
    const auto dir = fs::temp_directory_path() / "rt_predict";
    fs::remove_all(dir);
    fs::create_directories(dir);

    std::vector<std::string> names = {"mov", "xor", "createfilew", "page_execute_readwrite"};
    std::vector<FeatureKind> kinds = {FeatureKind::StaticOpcode, FeatureKind::StaticOpcode,
                                      FeatureKind::DynamicApi, FeatureKind::PageProtection};
    FeatureSpace space(std::move(names), std::move(kinds));
    std::vector<SampleRecord> records;
    Rng gen(3);
    for (int i = 0; i < 40; ++i) {
        SampleRecord rec;
        rec.id = sha_like_id("p" + std::to_string(i));
        rec.label = i % 2 == 0 ? Label::Ransomware : Label::Benign;
        rec.counts["mov"] = 5 + gen.below(5);
        rec.counts["xor"] = rec.label == Label::Ransomware ? 10 + gen.below(5) : gen.below(3);
        rec.counts["createfilew"] = 1 + gen.below(4);
        records.push_back(rec);
    }
    auto m = bind_records(records, space);
    Rng rng(7);
    auto model = fit(ModelKind::DecisionTree, m, {}, rng);

    const auto listing_path = dir / "sample.txt";
    std::ofstream(listing_path) << emit_listing({{"mov", 6}, {"xor", 12}, {"nop", 4}});
    const auto trace_path = dir / "sample.log";
    TraceCounts counters;
    counters.api = {{"createfilew", 2}, {"neverseenapi", 9}, {"virtualprotect", 1}};
    counters.page["page_execute_readwrite"] = 1;
    std::ofstream(trace_path) << emit_trace(counters);

    OpcodeLexicon lexicon({"mov", "xor", "nop"});
    const auto result = predict_sample(model, listing_path.string(), trace_path.string(), lexicon);
    CHECK(result.probability >= 0.0);
    CHECK(result.probability <= 1.0);
    CHECK(result.predicted == Label::Ransomware);  // xor-heavy listing
    CHECK(result.extraction_s > 0.0);
    fs::remove_all(dir);
}
