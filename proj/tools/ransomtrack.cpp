// ransomtrack: hybrid ransomware-detection pipeline over static opcode and
// dynamic behavioral features. Subcommands cover ingestion, synthetic data,
// correlation grouping, training, evaluation, SHAP explanation, single-sample
// prediction and report regeneration; `pipeline` chains the stages from one
// config file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ransomtrack/dataset_io.hpp"
#include "ransomtrack/digest.hpp"
#include "ransomtrack/disasm.hpp"
#include "ransomtrack/matrix_io.hpp"
#include "ransomtrack/metrics.hpp"
#include "ransomtrack/model_io.hpp"
#include "ransomtrack/pipeline.hpp"
#include "ransomtrack/report.hpp"
#include "ransomtrack/shapley.hpp"
#include "ransomtrack/synth.hpp"
#include "ransomtrack/trace.hpp"

namespace rt = ransomtrack;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rt::IoError(path, "cannot open");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw rt::Error("cannot parse " + path + ": " + e.what());
    }
    return j;
}

std::vector<rt::ModelKind> parse_model_list(const std::vector<std::string>& names) {
    std::vector<rt::ModelKind> out;
    for (const auto& name : names) {
        if (name == "all")
            return {rt::kAllModelKinds.begin(), rt::kAllModelKinds.end()};
        out.push_back(rt::model_kind_from_string(name));
    }
    return out;
}

// label file for directory ingest: `sample,label` per line, keyed by file stem
std::map<std::string, rt::Label> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw rt::IoError(path, "cannot open labels file");
    std::map<std::string, rt::Label> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line == "sample,label") continue;
        const auto comma = line.rfind(',');
        if (comma == std::string::npos)
            throw rt::SchemaViolationError(line_no, 0, "labels file expects 'sample,label'");
        out[line.substr(0, comma)] = rt::label_from_int(std::stoll(line.substr(comma + 1)));
    }
    return out;
}

std::vector<fs::path> sorted_files(const std::string& dir) {
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

struct IngestDirsArgs {
    std::string disasm_dir, trace_dir, labels_csv, lexicon_path, cache_dir;
    int uniform_label = -1;
};

rt::FeatureMatrix ingest_directories(const IngestDirsArgs& args) {
    const rt::OpcodeLexicon lexicon = rt::OpcodeLexicon::load(args.lexicon_path);
    std::map<std::string, rt::Label> labels;
    if (!args.labels_csv.empty()) labels = load_labels_csv(args.labels_csv);

    struct PendingSample {
        rt::SampleRecord record;
        bool has_source = false;
    };
    std::map<std::string, PendingSample> samples;  // keyed by file stem
    const std::optional<std::string> cache =
        args.cache_dir.empty() ? std::nullopt : std::optional(args.cache_dir);

    auto label_for = [&](const std::string& stem) {
        if (args.uniform_label >= 0) return rt::label_from_int(args.uniform_label);
        const auto it = labels.find(stem);
        if (it == labels.end()) throw rt::ConfigError("no label for sample '" + stem + "'");
        return it->second;
    };

    std::set<std::string> api_names;
    if (!args.disasm_dir.empty()) {
        for (const auto& path : sorted_files(args.disasm_dir)) {
            const auto extracted = rt::extract_listing(path.string(), lexicon, cache);
            if (extracted.empty_listing)
                std::fprintf(stderr, "warning: %s retained no known opcodes\n",
                             path.string().c_str());
            auto& sample = samples[path.stem().string()];
            sample.record.id = extracted.digest;
            sample.has_source = true;
            for (const auto& [name, count] : extracted.opcode_counts)
                sample.record.counts[name] += count;
        }
    }
    if (!args.trace_dir.empty()) {
        for (const auto& path : sorted_files(args.trace_dir)) {
            const auto extracted = rt::extract_trace(path.string(), cache);
            auto& sample = samples[path.stem().string()];
            if (sample.record.id.empty()) sample.record.id = extracted.digest;
            sample.has_source = true;
            for (const auto& [name, count] : extracted.api_counts) {
                sample.record.counts[name] += count;
                api_names.insert(name);
            }
            for (const auto& [name, count] : extracted.page_counts)
                sample.record.counts[name] += count;
        }
    }
    if (samples.empty()) throw rt::ConfigError("no samples found to ingest");

    // column universe: lexicon opcodes, then observed APIs, then page flags
    std::vector<std::string> names;
    std::vector<rt::FeatureKind> kinds;
    for (const auto& op : lexicon.known()) {
        names.push_back(op);
        kinds.push_back(rt::FeatureKind::StaticOpcode);
    }
    for (const auto& api : api_names) {
        names.push_back(api);
        kinds.push_back(rt::FeatureKind::DynamicApi);
    }
    for (const char* flag : rt::kPageFlagNames) {
        names.push_back(flag);
        kinds.push_back(rt::FeatureKind::PageProtection);
    }
    rt::FeatureSpace space(std::move(names), std::move(kinds));

    std::vector<rt::SampleRecord> records;
    for (auto& [stem, sample] : samples) {
        if (!sample.has_source) continue;
        sample.record.label = label_for(stem);
        records.push_back(std::move(sample.record));
    }
    return rt::bind_records(records, space);
}

void print_stage_accounting(const rt::StageTiming& t) {
    const double n = t.n_samples == 0 ? 1.0 : static_cast<double>(t.n_samples);
    std::printf("stage accounting (%zu samples):\n", t.n_samples);
    std::printf("  extraction     %10.4f s   %12.6f s/sample\n", t.extraction_s,
                t.extraction_s / n);
    std::printf("  preprocessing  %10.4f s   %12.6f s/sample\n", t.preprocessing_s,
                t.preprocessing_s / n);
    std::printf("  train          %10.4f s   %12.6f s/sample\n", t.train_s, t.train_s / n);
    std::printf("  classify       %10.4f s   %12.6f s/sample\n", t.classify_s, t.classify_s / n);
    if (t.explain_s > 0.0)
        std::printf("  explain        %10.4f s\n", t.explain_s);
    std::printf("  total          %10.4f s\n", t.total_s);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RansomTrack hybrid ransomware-detection pipeline"};
    app.require_subcommand(1);

    std::uint64_t seed = rt::kDefaultSeed;
    int jobs = 1;
    std::string config_path;
    app.add_option("--seed", seed, "deterministic run seed")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads for parallel stages")->capture_default_str();
    app.add_option("--config", config_path, "pipeline config file (JSON)");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "parse raw inputs into the matrix format");
    std::string in_dataset, in_out = "ingested";
    IngestDirsArgs in_dirs;
    in_dirs.lexicon_path = "data/opcodes.txt";
    ingest->add_option("--dataset", in_dataset, "hybrid dataset CSV (published 6029-column layout)");
    ingest->add_option("--disasm-dir", in_dirs.disasm_dir, "directory of disassembly listings");
    ingest->add_option("--trace-dir", in_dirs.trace_dir, "directory of trace logs");
    ingest->add_option("--labels", in_dirs.labels_csv, "sample,label CSV for directory ingest");
    ingest->add_option("--label", in_dirs.uniform_label, "uniform label for directory ingest");
    ingest->add_option("--lexicon", in_dirs.lexicon_path, "opcode lexicon file")
        ->capture_default_str();
    ingest->add_option("--cache-dir", in_dirs.cache_dir, "digest-keyed extraction cache");
    ingest->add_option("--out", in_out, "output directory")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate a planted synthetic dataset");
    std::string sy_plan, sy_out = "synth";
    synth->add_option("--plan", sy_plan, "synth plan JSON file");
    synth->add_option("--out", sy_out, "output directory")->capture_default_str();

    // group
    auto* group = app.add_subcommand("group", "correlation taxonomy and optional reduction");
    std::string gr_matrix, gr_out = "grouped";
    rt::CorrelationThresholds gr_thresholds;
    bool gr_reduce = false;
    group->add_option("--matrix", gr_matrix, "input matrix file")->required();
    group->add_option("--t-neutral", gr_thresholds.neutral, "class-neutral threshold")
        ->capture_default_str();
    group->add_option("--t-specific", gr_thresholds.specific, "class-specific threshold")
        ->capture_default_str();
    group->add_option("--t-anti", gr_thresholds.anti, "opposite-class ceiling")
        ->capture_default_str();
    group->add_flag("--reduce", gr_reduce, "drop redundant neutral-cluster members");
    group->add_option("--out", gr_out, "output directory")->capture_default_str();

    // train
    auto* train = app.add_subcommand("train", "fit one model on a matrix");
    std::string tr_matrix, tr_model = "boosted", tr_out = "model.json";
    train->add_option("--matrix", tr_matrix, "training matrix file")->required();
    train->add_option("--model", tr_model, "dt|rf|lr|knn|boosted|voting")->capture_default_str();
    train->add_option("--out", tr_out, "model output file")->capture_default_str();

    // eval
    auto* eval = app.add_subcommand("eval", "split, fit and score models");
    std::string ev_matrix, ev_report = "reports";
    std::vector<std::string> ev_models = {"all"};
    double ev_split = 0.8;
    eval->add_option("--matrix", ev_matrix, "matrix file")->required();
    eval->add_option("--models", ev_models, "model kinds or 'all'")->capture_default_str();
    eval->add_option("--split", ev_split, "train fraction")->capture_default_str();
    eval->add_option("--report", ev_report, "report directory")->capture_default_str();

    // explain
    auto* explain = app.add_subcommand("explain", "SHAP rankings for a saved model");
    std::string ex_model, ex_matrix, ex_out = "explained";
    std::size_t ex_top = 20, ex_background = 50;
    bool ex_per_class = false;
    explain->add_option("--model", ex_model, "model file")->required();
    explain->add_option("--matrix", ex_matrix, "rows to explain")->required();
    explain->add_option("--top", ex_top, "top-k features per class")->capture_default_str();
    explain->add_flag("--per-class", ex_per_class, "rank separately per class (always on)");
    explain->add_option("--background-per-class", ex_background, "background rows per class")
        ->capture_default_str();
    explain->add_option("--out", ex_out, "output directory")->capture_default_str();

    // predict
    auto* predict = app.add_subcommand("predict", "score one sample from its artifacts");
    std::string pr_model, pr_listing, pr_trace, pr_lexicon = "data/opcodes.txt", pr_cache;
    bool pr_json = false;
    predict->add_option("--model", pr_model, "model file")->required();
    predict->add_option("--listing", pr_listing, "disassembly listing")->required();
    predict->add_option("--trace", pr_trace, "trace log")->required();
    predict->add_option("--lexicon", pr_lexicon, "opcode lexicon")->capture_default_str();
    predict->add_option("--cache-dir", pr_cache, "digest-keyed extraction cache");
    predict->add_flag("--json", pr_json, "emit JSON instead of text");

    // report
    auto* report = app.add_subcommand("report", "print the comparison table for a report dir");
    std::string rp_dir = "reports";
    report->add_option("--dir", rp_dir, "report directory")->capture_default_str();

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "run the full configured pipeline");

    // accept the global flags after the subcommand name as well
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*ingest) {
            fs::create_directories(in_out);
            if (!in_dataset.empty()) {
                rt::DatasetSchema schema;
                auto [stat, dyn] = rt::read_dataset(in_dataset, schema);
                rt::save_matrix(stat, (fs::path(in_out) / "static.json").string());
                rt::save_matrix(dyn, (fs::path(in_out) / "dynamic.json").string());
                rt::save_matrix(rt::concat_columns(stat, dyn),
                                (fs::path(in_out) / "hybrid.json").string());
                std::printf("ingest: %zu rows, %zu static + %zu dynamic features -> %s\n",
                            stat.n_rows(), stat.n_features(), dyn.n_features(), in_out.c_str());
            } else if (!in_dirs.disasm_dir.empty() || !in_dirs.trace_dir.empty()) {
                const auto hybrid = ingest_directories(in_dirs);
                rt::save_matrix(hybrid, (fs::path(in_out) / "hybrid.json").string());
                std::printf("ingest: %zu samples, %zu features -> %s\n", hybrid.n_rows(),
                            hybrid.n_features(), in_out.c_str());
            } else {
                throw rt::ConfigError("ingest needs --dataset or --disasm-dir/--trace-dir");
            }
        } else if (*synth) {
            rt::SynthPlan plan;
            if (!sy_plan.empty()) plan = rt::SynthPlan::from_json(load_json_file(sy_plan));
            if (app.count("--seed")) plan.seed = seed;
            const auto data = rt::generate(plan);
            fs::create_directories(sy_out);
            rt::save_matrix(data.matrix, (fs::path(sy_out) / "matrix.json").string());
            nlohmann::json truth;
            truth["plan"] = plan.to_json();
            truth["bayes_accuracy"] = data.bayes_accuracy;
            truth["taxonomy"] = rt::taxonomy_to_json(data.truth, data.matrix.space());
            rt::write_json_file((fs::path(sy_out) / "truth.json").string(), truth);
            std::printf("synth: %zu rows, %zu features (bayes accuracy %.4f) -> %s\n",
                        data.matrix.n_rows(), data.matrix.n_features(), data.bayes_accuracy,
                        sy_out.c_str());
        } else if (*group) {
            const auto m = rt::load_matrix(gr_matrix);
            const auto [r0, r1] = rt::pearson_by_class(m);
            const auto taxonomy = rt::cluster(rt::classify_pairs(r0, r1, gr_thresholds));
            fs::create_directories(gr_out);
            rt::write_json_file((fs::path(gr_out) / "taxonomy.json").string(),
                                rt::taxonomy_to_json(taxonomy, m.space()));
            rt::write_text_file((fs::path(gr_out) / "taxonomy.txt").string(),
                                rt::taxonomy_text(taxonomy, m.space()));
            std::printf("%s", rt::taxonomy_text(taxonomy, m.space()).c_str());
            if (gr_reduce) {
                const auto [reduced, plan] = rt::reduce(m, taxonomy, r0, r1);
                rt::save_matrix(reduced, (fs::path(gr_out) / "reduced.json").string());
                rt::write_json_file((fs::path(gr_out) / "reduction.json").string(),
                                    rt::reduction_to_json(plan, m.space()));
                std::printf("reduce: kept %zu of %zu features\n", plan.kept.size(),
                            m.n_features());
            }
        } else if (*train) {
            const auto m = rt::load_matrix(tr_matrix);
            rt::Rng rng(seed);
            const auto model = rt::fit(rt::model_kind_from_string(tr_model), m, {}, rng, jobs);
            rt::save_model(model, tr_out);
            std::printf("train: %s on %zu rows, %zu features -> %s\n",
                        rt::to_string(model.kind()), m.n_rows(), m.n_features(), tr_out.c_str());
        } else if (*eval) {
            const auto m = rt::load_matrix(ev_matrix);
            rt::Rng split_rng(seed);
            const auto split = rt::stratified_split(m.labels(), ev_split, split_rng);
            const auto train_m = m.select_rows(split.train_idx);
            const auto test_m = m.select_rows(split.test_idx);
            fs::create_directories(ev_report);
            std::vector<std::pair<rt::ModelKind, rt::EvaluationReport>> rows;
            for (rt::ModelKind kind : parse_model_list(ev_models)) {
                rt::Rng rng(seed);
                auto run = rt::timed_run(kind, train_m, test_m, {}, rng, jobs);
                rt::write_json_file(
                    (fs::path(ev_report) / (std::string(rt::to_string(kind)) + ".report.json"))
                        .string(),
                    rt::report_to_json(kind, run.report, run.model.hyperparams(), seed));
                rt::save_model(run.model,
                               (fs::path(ev_report) / (std::string(rt::to_string(kind)) +
                                                       ".model.json")).string());
                rows.emplace_back(kind, run.report);
            }
            const std::string table = rt::comparison_table(rows);
            rt::write_text_file((fs::path(ev_report) / "comparison.txt").string(), table);
            std::printf("%s", table.c_str());
        } else if (*explain) {
            const auto model = rt::load_model(ex_model);
            const auto m = rt::load_matrix(ex_matrix);
            (void)ex_per_class;  // rankings are always emitted per class
            rt::Rng bg_rng(seed ^ 0xb06ULL);
            const auto background = rt::sample_background(m, bg_rng, ex_background);
            rt::Rng rank_rng(seed ^ 0xa77ULL);
            const auto [benign, ransom] =
                rt::class_rankings(model, m, ex_top, background, rank_rng, jobs);
            fs::create_directories(ex_out);
            rt::write_text_file((fs::path(ex_out) / "rankings.csv").string(),
                                rt::rankings_csv(benign, ransom));
            {
                std::ofstream out(fs::path(ex_out) / "attributions.jsonl");
                rt::Rng attr_rng(seed ^ 0x5a17ULL);
                for (std::size_t i = 0; i < m.n_rows(); ++i) {
                    auto a = rt::shapley_for_model(model, m.row(i), background, attr_rng);
                    a.id = m.ids()[i];
                    out << rt::attribution_to_json(a, m.space()).dump() << '\n';
                }
            }
            std::printf("explain: top-%zu rankings -> %s\n", ex_top, ex_out.c_str());
        } else if (*predict) {
            const auto model = rt::load_model(pr_model);
            const auto lexicon = rt::OpcodeLexicon::load(pr_lexicon);
            const std::optional<std::string> cache =
                pr_cache.empty() ? std::nullopt : std::optional(pr_cache);
            const auto result = rt::predict_sample(model, pr_listing, pr_trace, lexicon, cache);
            if (pr_json) {
                std::printf("%s\n", result.to_json().dump(2).c_str());
            } else {
                std::printf("sample  %s\n", result.digest.c_str());
                std::printf("p(ransomware) = %.6f -> %s\n", result.probability,
                            result.predicted == rt::Label::Ransomware ? "ransomware" : "benignware");
                std::printf("latency: extraction %.6f s, preprocessing %.6f s, classification %.6f s\n",
                            result.extraction_s, result.preprocessing_s, result.classification_s);
            }
        } else if (*report) {
            std::vector<std::pair<rt::ModelKind, rt::EvaluationReport>> rows;
            for (const auto& path : sorted_files(rp_dir)) {
                if (path.extension() != ".json" ||
                    path.filename().string().find(".report.json") == std::string::npos)
                    continue;
                const auto j = load_json_file(path.string());
                rt::EvaluationReport r;
                r.accuracy = j["metrics"]["accuracy"].get<double>();
                r.precision = j["metrics"]["precision"].get<double>();
                r.recall = j["metrics"]["recall"].get<double>();
                r.specificity = j["metrics"]["specificity"].get<double>();
                r.g_mean = j["metrics"]["g_mean"].get<double>();
                r.f1 = j["metrics"]["f1"].get<double>();
                if (j["metrics"].contains("roc_auc")) r.roc_auc = j["metrics"]["roc_auc"].get<double>();
                if (j["metrics"].contains("log_loss"))
                    r.log_loss = j["metrics"]["log_loss"].get<double>();
                r.balanced_accuracy = j["metrics"]["balanced_accuracy"].get<double>();
                r.fnr_percent = j["metrics"]["fnr_percent"].get<double>();
                r.train_time_per_sample = j["timing"]["train_time_per_sample_s"].get<double>();
                r.test_time_per_sample = j["timing"]["test_time_per_sample_s"].get<double>();
                rows.emplace_back(rt::model_kind_from_string(j["model"].get<std::string>()), r);
            }
            if (rows.empty()) throw rt::ConfigError("no .report.json files in " + rp_dir);
            std::printf("%s", rt::comparison_table(rows).c_str());
        } else if (*pipeline) {
            if (config_path.empty()) throw rt::ConfigError("pipeline requires --config");
            auto config = rt::PipelineConfig::from_json(load_json_file(config_path));
            if (app.count("--seed")) config.seed = seed;
            if (app.count("--jobs")) config.jobs = jobs;
            const auto result = rt::run_pipeline(config);
            print_stage_accounting(result.timing);
            std::printf("reports -> %s\n", config.report_dir.c_str());
        }
    } catch (const rt::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kExitInternal;
    }
    return kExitOk;
}
