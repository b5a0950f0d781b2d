#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ransomtrack/metrics.hpp"
#include "ransomtrack/model.hpp"
#include "ransomtrack/model_io.hpp"
#include "ransomtrack/shapley.hpp"
#include "ransomtrack/taxonomy.hpp"

namespace ransomtrack {

// All wall-clock fields live under keys named "timing" so consumers can strip
// them when comparing otherwise deterministic reports.

inline nlohmann::json report_to_json(ModelKind kind, const EvaluationReport& r,
                                     const Hyperparams& h, std::uint64_t seed) {
    nlohmann::json j;
    j["model"] = to_string(kind);
    j["seed"] = seed;
    j["hyperparams"] = detail::hyperparams_to_json(h);
    j["confusion"] = {{"tp", r.confusion.tp},
                      {"fn", r.confusion.fn},
                      {"fp", r.confusion.fp},
                      {"tn", r.confusion.tn}};
    nlohmann::json m;
    m["accuracy"] = r.accuracy;
    m["precision"] = r.precision;
    m["recall"] = r.recall;
    m["specificity"] = r.specificity;
    m["g_mean"] = r.g_mean;
    m["f1"] = r.f1;
    if (r.roc_auc) m["roc_auc"] = *r.roc_auc;
    if (r.log_loss) m["log_loss"] = *r.log_loss;
    m["balanced_accuracy"] = r.balanced_accuracy;
    m["fnr_percent"] = r.fnr_percent;
    m["degenerate"] = r.degenerate;
    j["metrics"] = m;
    j["timing"] = {{"train_time_per_sample_s", r.train_time_per_sample},
                   {"test_time_per_sample_s", r.test_time_per_sample}};
    return j;
}

// Fixed-width comparison table over the hybrid runs, one row per model, in
// the published column order.
inline std::string comparison_table(const std::vector<std::pair<ModelKind, EvaluationReport>>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-20s %6s %6s %6s %6s %7s %6s %8s %9s %9s %12s %12s\n",
                  "Model", "Acc.", "Prec.", "Rec.", "Spec.", "G-Mean", "F1", "ROC-AUC",
                  "Bal. Acc.", "Log Loss", "Train(s/sm)", "Test(s/sm)");
    out << line;
    for (const auto& [kind, r] : rows) {
        std::snprintf(line, sizeof line,
                      "%-20s %6.2f %6.2f %6.2f %6.2f %7.2f %6.2f %8.2f %9.2f %9.2f %12.6f %12.6f\n",
                      to_string(kind), r.accuracy, r.precision, r.recall, r.specificity, r.g_mean,
                      r.f1, r.roc_auc.value_or(0.0), r.balanced_accuracy, r.log_loss.value_or(0.0),
                      r.train_time_per_sample, r.test_time_per_sample);
        out << line;
    }
    return out.str();
}

inline nlohmann::json taxonomy_to_json(const GroupTaxonomy& t, const FeatureSpace& space) {
    nlohmann::json j;
    j["thresholds"] = {{"neutral", t.thresholds.neutral},
                       {"specific", t.thresholds.specific},
                       {"anti", t.thresholds.anti}};
    j["n_features"] = t.n_features;
    j["pair_counts"] = {{"class_neutral", t.neutral_pairs.size()},
                        {"benign_specific", t.benign_pairs.size()},
                        {"ransomware_specific", t.ransom_pairs.size()}};
    nlohmann::json clusters = nlohmann::json::array();
    std::size_t mixed_kind_clusters = 0;
    for (const FeatureCluster& c : t.clusters) {
        nlohmann::json members = nlohmann::json::array();
        bool has_static = false, has_dynamic = false;
        for (std::size_t m : c.members) {
            members.push_back(space.name(m));
            if (space.kind(m) == FeatureKind::StaticOpcode) has_static = true;
            else has_dynamic = true;
        }
        if (has_static && has_dynamic) ++mixed_kind_clusters;
        clusters.push_back({{"type", to_string(c.type)}, {"members", members}});
    }
    j["clusters"] = clusters;
    // empirical statistic, not an invariant: how many clusters mix static and
    // dynamic features
    j["clusters_mixing_static_and_dynamic"] = mixed_kind_clusters;
    return j;
}

// Member lists per group type, the shape of the published cluster tables.
inline std::string taxonomy_text(const GroupTaxonomy& t, const FeatureSpace& space) {
    std::ostringstream out;
    for (GroupType type :
         {GroupType::Neutral, GroupType::BenignSpecific, GroupType::RansomSpecific}) {
        out << "== " << to_string(type) << " ==\n";
        bool any = false;
        for (const FeatureCluster& c : t.clusters) {
            if (c.type != type) continue;
            any = true;
            out << "  {";
            for (std::size_t k = 0; k < c.members.size(); ++k) {
                if (k) out << ", ";
                out << space.name(c.members[k]);
            }
            out << "}\n";
        }
        if (!any) out << "  (none)\n";
    }
    return out.str();
}

inline nlohmann::json reduction_to_json(const ReductionPlan& plan, const FeatureSpace& space) {
    nlohmann::json j;
    nlohmann::json kept = nlohmann::json::array();
    for (std::size_t k : plan.kept) kept.push_back(space.name(k));
    j["kept"] = kept;
    nlohmann::json dropped = nlohmann::json::array();
    for (const auto& d : plan.dropped)
        dropped.push_back({{"feature", space.name(d.feature)},
                           {"representative", space.name(d.representative)}});
    j["dropped"] = dropped;
    j["kept_count"] = plan.kept.size();
    j["dropped_count"] = plan.dropped.size();
    return j;
}

// Plot-ready ranking table: class,rank,feature,mean_abs_shap.
inline std::string rankings_csv(const ClassRanking& benign, const ClassRanking& ransom) {
    std::ostringstream out;
    out << "class,rank,feature,mean_abs_shap\n";
    for (const ClassRanking* r : {&benign, &ransom}) {
        for (std::size_t i = 0; i < r->ranked.size(); ++i)
            out << to_int(r->label) << ',' << (i + 1) << ',' << r->ranked[i].first << ','
                << r->ranked[i].second << '\n';
    }
    return out.str();
}

inline nlohmann::json attribution_to_json(const Attribution& a, const FeatureSpace& space) {
    nlohmann::json j;
    j["id"] = a.id;
    j["base_value"] = a.base_value;
    nlohmann::json phi;
    for (std::size_t k = 0; k < a.phi.size(); ++k) phi[space.name(k)] = a.phi[k];
    j["phi"] = phi;
    j["prediction"] = a.total();
    if (a.mc_stderr) {
        nlohmann::json se;
        for (std::size_t k = 0; k < a.mc_stderr->size(); ++k)
            se[space.name(k)] = (*a.mc_stderr)[k];
        j["mc_stderr"] = se;
    }
    return j;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << content;
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << j.dump(2) << '\n';
}

} // namespace ransomtrack
