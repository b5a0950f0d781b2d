#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ransomtrack/dataset_io.hpp"
#include "ransomtrack/digest.hpp"
#include "ransomtrack/disasm.hpp"
#include "ransomtrack/matrix_io.hpp"
#include "ransomtrack/metrics.hpp"
#include "ransomtrack/model_io.hpp"
#include "ransomtrack/report.hpp"
#include "ransomtrack/shapley.hpp"
#include "ransomtrack/synth.hpp"
#include "ransomtrack/taxonomy.hpp"
#include "ransomtrack/trace.hpp"

namespace ransomtrack {

// Declarative run description. Exactly one input source must be set.
struct PipelineConfig {
    std::uint64_t seed = kDefaultSeed;
    int jobs = 1;

    std::optional<std::string> dataset_csv;
    std::optional<SynthPlan> synth_plan;
    std::optional<std::string> disasm_dir;
    std::optional<std::string> trace_dir;
    std::optional<std::string> labels_csv;   // id,label pairs for directory ingest
    std::optional<std::string> cache_dir;    // digest-keyed extraction cache
    std::string lexicon_path = "data/opcodes.txt";

    CorrelationThresholds thresholds;
    bool reduce_features = true;
    double split_ratio = 0.8;
    std::vector<ModelKind> models = {kAllModelKinds.begin(), kAllModelKinds.end()};
    Hyperparams hyperparams;

    std::optional<ModelKind> explain_model = ModelKind::BoostedTrees;
    std::size_t explain_top_k = 20;
    std::size_t background_per_class = 50;

    std::string report_dir = "reports";

    static PipelineConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

namespace detail {

inline void apply_hyperparam_overrides(Hyperparams& h, const nlohmann::json& j) {
    if (j.contains("tree")) {
        const auto& t = j["tree"];
        if (t.contains("max_depth")) h.tree.max_depth = t["max_depth"].get<int>();
        if (t.contains("min_samples_split"))
            h.tree.min_samples_split = t["min_samples_split"].get<int>();
    }
    if (j.contains("forest")) {
        const auto& t = j["forest"];
        if (t.contains("n_trees")) h.forest.n_trees = t["n_trees"].get<int>();
        if (t.contains("bootstrap")) h.forest.bootstrap = t["bootstrap"].get<bool>();
    }
    if (j.contains("logistic")) {
        const auto& t = j["logistic"];
        if (t.contains("learning_rate")) h.logistic.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("epochs")) h.logistic.epochs = t["epochs"].get<int>();
        if (t.contains("l2")) h.logistic.l2 = t["l2"].get<double>();
    }
    if (j.contains("knn") && j["knn"].contains("k")) h.knn.k = j["knn"]["k"].get<int>();
    if (j.contains("boosted")) {
        const auto& t = j["boosted"];
        if (t.contains("rounds")) h.boosted.rounds = t["rounds"].get<int>();
        if (t.contains("learning_rate")) h.boosted.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("max_depth")) h.boosted.max_depth = t["max_depth"].get<int>();
        if (t.contains("lambda")) h.boosted.lambda = t["lambda"].get<double>();
        if (t.contains("min_child_weight"))
            h.boosted.min_child_weight = t["min_child_weight"].get<double>();
    }
    if (j.contains("voting") && j["voting"].contains("weights"))
        h.voting.weights = j["voting"]["weights"].get<std::array<double, 5>>();
}

} // namespace detail

inline PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    PipelineConfig c;
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs")) c.jobs = j["jobs"].get<int>();
    if (j.contains("input")) {
        const auto& in = j["input"];
        if (in.contains("dataset")) c.dataset_csv = in["dataset"].get<std::string>();
        if (in.contains("synth_plan")) c.synth_plan = SynthPlan::from_json(in["synth_plan"]);
        if (in.contains("disasm_dir")) c.disasm_dir = in["disasm_dir"].get<std::string>();
        if (in.contains("trace_dir")) c.trace_dir = in["trace_dir"].get<std::string>();
        if (in.contains("labels")) c.labels_csv = in["labels"].get<std::string>();
    }
    if (j.contains("cache_dir")) c.cache_dir = j["cache_dir"].get<std::string>();
    if (j.contains("lexicon")) c.lexicon_path = j["lexicon"].get<std::string>();
    if (j.contains("thresholds")) {
        const auto& t = j["thresholds"];
        if (t.contains("neutral")) c.thresholds.neutral = t["neutral"].get<double>();
        if (t.contains("specific")) c.thresholds.specific = t["specific"].get<double>();
        if (t.contains("anti")) c.thresholds.anti = t["anti"].get<double>();
    }
    if (j.contains("reduce")) c.reduce_features = j["reduce"].get<bool>();
    if (j.contains("split_ratio")) c.split_ratio = j["split_ratio"].get<double>();
    if (j.contains("models")) {
        c.models.clear();
        for (const auto& name : j["models"]) {
            const std::string s = name.get<std::string>();
            if (s == "all") {
                c.models.assign(kAllModelKinds.begin(), kAllModelKinds.end());
                break;
            }
            c.models.push_back(model_kind_from_string(s));
        }
    }
    if (j.contains("hyperparams")) detail::apply_hyperparam_overrides(c.hyperparams, j["hyperparams"]);
    if (j.contains("explain")) {
        const auto& e = j["explain"];
        if (e.contains("model")) {
            const std::string s = e["model"].get<std::string>();
            c.explain_model = s == "none" ? std::nullopt
                                          : std::optional<ModelKind>(model_kind_from_string(s));
        }
        if (e.contains("top_k")) c.explain_top_k = e["top_k"].get<std::size_t>();
        if (e.contains("background_per_class"))
            c.background_per_class = e["background_per_class"].get<std::size_t>();
    }
    if (j.contains("report_dir")) c.report_dir = j["report_dir"].get<std::string>();
    return c;
}

inline nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json j;
    j["seed"] = seed;
    j["jobs"] = jobs;
    nlohmann::json in;
    if (dataset_csv) in["dataset"] = *dataset_csv;
    if (synth_plan) in["synth_plan"] = synth_plan->to_json();
    if (disasm_dir) in["disasm_dir"] = *disasm_dir;
    if (trace_dir) in["trace_dir"] = *trace_dir;
    if (labels_csv) in["labels"] = *labels_csv;
    j["input"] = in;
    if (cache_dir) j["cache_dir"] = *cache_dir;
    j["lexicon"] = lexicon_path;
    j["thresholds"] = {{"neutral", thresholds.neutral},
                       {"specific", thresholds.specific},
                       {"anti", thresholds.anti}};
    j["reduce"] = reduce_features;
    j["split_ratio"] = split_ratio;
    nlohmann::json models_json = nlohmann::json::array();
    for (ModelKind k : models) models_json.push_back(to_string(k));
    j["models"] = models_json;
    j["hyperparams"] = detail::hyperparams_to_json(hyperparams);
    nlohmann::json e;
    e["model"] = explain_model ? to_string(*explain_model) : "none";
    e["top_k"] = explain_top_k;
    e["background_per_class"] = background_per_class;
    j["explain"] = e;
    j["report_dir"] = report_dir;
    return j;
}

// --- directory ingest with the digest-keyed cache ----------------------------

namespace detail {

inline std::optional<nlohmann::json> cache_lookup(const std::optional<std::string>& cache_dir,
                                                  const std::string& digest, const char* kind) {
    if (!cache_dir) return std::nullopt;
    const auto path = std::filesystem::path(*cache_dir) / (digest + ".json");
    std::ifstream in(path);
    if (!in) return std::nullopt;
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception&) {
        return std::nullopt;  // stale or corrupt entry, re-extract
    }
    if (!j.contains("kind") || j["kind"] != kind) return std::nullopt;
    return j;
}

// Single-writer discipline: write to a temp file, then rename into place.
inline void cache_store(const std::optional<std::string>& cache_dir, const std::string& digest,
                        const nlohmann::json& j) {
    if (!cache_dir) return;
    std::filesystem::create_directories(*cache_dir);
    const auto path = std::filesystem::path(*cache_dir) / (digest + ".json");
    const auto tmp = std::filesystem::path(*cache_dir) / (digest + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        out << j.dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
}

inline std::map<std::string, std::uint64_t> json_to_counts(const nlohmann::json& j) {
    std::map<std::string, std::uint64_t> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<std::uint64_t>();
    return out;
}

} // namespace detail

// Counts extracted from one sample's listing and/or trace.
struct ExtractedSample {
    std::string digest;
    std::map<std::string, std::uint64_t> opcode_counts;
    std::map<std::string, std::uint64_t> api_counts;
    std::map<std::string, std::uint64_t> page_counts;
    bool from_cache = false;
    bool empty_listing = false;  // instruction lines present but none retained
};

inline ExtractedSample extract_listing(const std::string& path, const OpcodeLexicon& lexicon,
                                       const std::optional<std::string>& cache_dir = std::nullopt) {
    ExtractedSample out;
    out.digest = sha256_file_hex(path);
    if (auto cached = detail::cache_lookup(cache_dir, out.digest, "disasm")) {
        out.opcode_counts = detail::json_to_counts((*cached)["counts"]);
        out.from_cache = true;
        return out;
    }
    const DisasmCounts counts = parse_disassembly_file(path, lexicon);
    out.opcode_counts = counts.counts;
    out.empty_listing = counts.empty_listing();
    detail::cache_store(cache_dir, out.digest,
                        {{"kind", "disasm"}, {"counts", counts.counts}});
    return out;
}

inline ExtractedSample extract_trace(const std::string& path,
                                     const std::optional<std::string>& cache_dir = std::nullopt) {
    ExtractedSample out;
    out.digest = sha256_file_hex(path);
    if (auto cached = detail::cache_lookup(cache_dir, out.digest, "trace")) {
        out.api_counts = detail::json_to_counts((*cached)["api"]);
        out.page_counts = detail::json_to_counts((*cached)["page"]);
        out.from_cache = true;
        return out;
    }
    const TraceCounts counts = parse_trace_file(path);
    out.api_counts = counts.api;
    out.page_counts = counts.page;
    detail::cache_store(cache_dir, out.digest,
                        {{"kind", "trace"}, {"api", counts.api}, {"page", counts.page}});
    return out;
}

// --- stage accounting ---------------------------------------------------------

struct StageTiming {
    double extraction_s = 0.0;
    double preprocessing_s = 0.0;
    double train_s = 0.0;
    double classify_s = 0.0;
    double explain_s = 0.0;
    double total_s = 0.0;
    std::size_t n_samples = 0;

    nlohmann::json to_json() const {
        auto per_sample = [&](double s) {
            return n_samples == 0 ? 0.0 : s / static_cast<double>(n_samples);
        };
        return {{"n_samples", n_samples},
                {"extraction_s", extraction_s},
                {"preprocessing_s", preprocessing_s},
                {"train_s", train_s},
                {"classify_s", classify_s},
                {"explain_s", explain_s},
                {"total_s", total_s},
                {"per_sample",
                 {{"extraction_s", per_sample(extraction_s)},
                  {"preprocessing_s", per_sample(preprocessing_s)},
                  {"train_s", per_sample(train_s)},
                  {"classify_s", per_sample(classify_s)}}}};
    }
};

struct PipelineResult {
    StageTiming timing;
    std::vector<std::pair<ModelKind, EvaluationReport>> reports;
    GroupTaxonomy taxonomy;
    std::optional<ReductionPlan> reduction;
    std::size_t n_features_used = 0;
};

namespace detail {

class StageClock {
  public:
    StageClock() : start_(std::chrono::steady_clock::now()) {}
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - start_).count();
        start_ = now;
        return s;
    }

  private:
    std::chrono::steady_clock::time_point start_;
};

inline FeatureMatrix load_input_matrix(const PipelineConfig& config, StageTiming& timing) {
    StageClock clock;
    FeatureMatrix hybrid;
    if (config.dataset_csv) {
        DatasetSchema schema;
        auto [stat, dyn] = read_dataset(*config.dataset_csv, schema);
        hybrid = concat_columns(stat, dyn);
    } else if (config.synth_plan) {
        hybrid = generate(*config.synth_plan).matrix;
    } else if (config.disasm_dir || config.trace_dir) {
        throw ConfigError("directory ingest requires the ingest subcommand; point the "
                          "pipeline at its matrix output instead");
    } else {
        throw ConfigError("no input configured (dataset, synth_plan, or matrix)");
    }
    timing.extraction_s = clock.lap();
    return hybrid;
}

} // namespace detail

// End-to-end run: ingest -> correlation taxonomy (-> reduce) -> stratified
// split -> fit/evaluate every configured model -> optional SHAP rankings.
// Writes the report bundle under config.report_dir; returns the in-memory
// summary. Everything written is deterministic for a fixed config and seed
// except fields under "timing" keys.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
    const auto t_begin = std::chrono::steady_clock::now();
    PipelineResult result;
    std::filesystem::create_directories(config.report_dir);
    const auto out_path = [&](const std::string& name) {
        return (std::filesystem::path(config.report_dir) / name).string();
    };
    // diagnostics carry the failing stage's name
    const char* stage = "extraction";
    try {

    FeatureMatrix hybrid = detail::load_input_matrix(config, result.timing);
    result.timing.n_samples = hybrid.n_rows();
    stage = "preprocessing";

    // preprocessing: per-class correlation taxonomy, optional reduction
    detail::StageClock clock;
    const auto [r0, r1] = pearson_by_class(hybrid);
    GroupTaxonomy taxonomy = cluster(classify_pairs(r0, r1, config.thresholds));
    FeatureMatrix working = hybrid;
    if (config.reduce_features) {
        auto [reduced, plan] = reduce(hybrid, taxonomy, r0, r1);
        working = std::move(reduced);
        result.reduction = std::move(plan);
    }
    result.timing.preprocessing_s = clock.lap();
    result.taxonomy = taxonomy;
    result.n_features_used = working.n_features();

    write_json_file(out_path("taxonomy.json"), taxonomy_to_json(taxonomy, hybrid.space()));
    write_text_file(out_path("taxonomy.txt"), taxonomy_text(taxonomy, hybrid.space()));
    if (result.reduction)
        write_json_file(out_path("reduction.json"),
                        reduction_to_json(*result.reduction, hybrid.space()));

    // split once; all models see the same partition
    stage = "train";
    Rng split_rng(config.seed);
    const SplitPlan split = stratified_split(working.labels(), config.split_ratio, split_rng);
    const FeatureMatrix train = working.select_rows(split.train_idx);
    const FeatureMatrix test = working.select_rows(split.test_idx);

    // train + classify per model
    std::map<ModelKind, TrainedModel> fitted;
    for (ModelKind kind : config.models) {
        Rng model_rng(config.seed);
        detail::StageClock model_clock;
        TrainedModel model = fit(kind, train, config.hyperparams, model_rng, config.jobs);
        const double fit_s = model_clock.lap();
        stage = "classify";
        const std::vector<double> probs = model.predict_proba(test);
        const double predict_s = model_clock.lap();
        stage = "train";
        result.timing.train_s += fit_s;
        result.timing.classify_s += predict_s;

        EvaluationReport report =
            metrics(confusion_from_probs(probs, test.labels()), probs, test.labels());
        report.train_time_per_sample = fit_s / static_cast<double>(train.n_rows());
        report.test_time_per_sample = predict_s / static_cast<double>(test.n_rows());
        fitted.emplace(kind, std::move(model));
        result.reports.emplace_back(kind, report);
    }

    for (const auto& [kind, report] : result.reports) {
        write_json_file(out_path(std::string(to_string(kind)) + ".report.json"),
                        report_to_json(kind, report, config.hyperparams, config.seed));
        save_model(fitted.at(kind), out_path(std::string(to_string(kind)) + ".model.json"));
    }
    write_text_file(out_path("comparison.txt"), comparison_table(result.reports));

    // explain
    stage = "explain";
    if (config.explain_model) {
        detail::StageClock explain_clock;
        const auto it = fitted.find(*config.explain_model);
        if (it != fitted.end()) {
            Rng bg_rng(config.seed ^ 0xb06ULL);
            const auto background = sample_background(train, bg_rng, config.background_per_class);
            Rng rank_rng(config.seed ^ 0xa77ULL);
            const auto [benign, ransom] = class_rankings(it->second, test, config.explain_top_k,
                                                         background, rank_rng, config.jobs);
            write_text_file(out_path("rankings.csv"), rankings_csv(benign, ransom));
        }
        result.timing.explain_s = explain_clock.lap();
    }

    result.timing.total_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

    nlohmann::json pipeline_json;
    pipeline_json["config"] = config.to_json();
    pipeline_json["n_features_input"] = hybrid.n_features();
    pipeline_json["n_features_used"] = result.n_features_used;
    pipeline_json["split"] = {{"train_rows", train.n_rows()}, {"test_rows", test.n_rows()}};
    pipeline_json["timing"] = result.timing.to_json();
    write_json_file(out_path("pipeline.json"), pipeline_json);
    return result;

    } catch (const Error& e) {
        throw Error("stage " + std::string(stage) + ": " + e.what());
    }
}

// --- single-sample prediction --------------------------------------------------

struct PredictionResult {
    std::string digest;
    double probability = 0.0;
    Label predicted = Label::Benign;
    double extraction_s = 0.0;
    double preprocessing_s = 0.0;
    double classification_s = 0.0;

    nlohmann::json to_json() const {
        return {{"digest", digest},
                {"probability", probability},
                {"predicted_label", to_int(predicted)},
                {"timing",
                 {{"extraction_s", extraction_s},
                  {"preprocessing_s", preprocessing_s},
                  {"classification_s", classification_s}}}};
    }
};

// Score one sample from its trace log and disassembly listing with a saved
// model. Features outside the model's space are dropped (open vocabulary);
// missing ones default to zero.
inline PredictionResult predict_sample(const TrainedModel& model, const std::string& listing_path,
                                       const std::string& trace_path,
                                       const OpcodeLexicon& lexicon,
                                       const std::optional<std::string>& cache_dir = std::nullopt) {
    PredictionResult out;
    detail::StageClock clock;

    const ExtractedSample listing = extract_listing(listing_path, lexicon, cache_dir);
    const ExtractedSample trace = extract_trace(trace_path, cache_dir);
    out.digest = listing.digest;
    out.extraction_s = clock.lap();

    SampleRecord record;
    record.id = listing.digest;
    record.label = Label::Benign;  // placeholder, not used for scoring
    for (const auto& [name, count] : listing.opcode_counts) record.counts[name] += count;
    for (const auto& [name, count] : trace.api_counts) record.counts[name] += count;
    for (const auto& [name, count] : trace.page_counts) record.counts[name] += count;
    const SampleRecord bound = restrict_to_space(record, model.space());
    const FeatureMatrix row = bind_records({bound}, model.space());
    out.preprocessing_s = clock.lap();

    out.probability = model.predict_one(row.row(0));
    out.predicted = out.probability >= kDecisionThreshold ? Label::Ransomware : Label::Benign;
    out.classification_s = clock.lap();
    return out;
}

} // namespace ransomtrack
