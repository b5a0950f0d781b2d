#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "ransomtrack/correlation.hpp"
#include "ransomtrack/matrix.hpp"
#include "ransomtrack/union_find.hpp"

namespace ransomtrack {

enum class GroupType : std::uint8_t { Neutral = 0, BenignSpecific = 1, RansomSpecific = 2 };

inline const char* to_string(GroupType t) {
    switch (t) {
        case GroupType::Neutral: return "class_neutral";
        case GroupType::BenignSpecific: return "benign_specific";
        case GroupType::RansomSpecific: return "ransomware_specific";
    }
    return "?";
}

// Pair-classification thresholds. Defaults follow the conventional reading of
// Pearson strength: >= 0.9 strong in both classes for neutral groups, >= 0.7
// in one class with <= 0.0 in the other for class-specific groups.
struct CorrelationThresholds {
    double neutral = 0.9;
    double specific = 0.7;
    double anti = 0.0;
};

struct FeatureCluster {
    GroupType type = GroupType::Neutral;
    std::vector<std::size_t> members;  // ascending
};

using FeaturePair = std::pair<std::size_t, std::size_t>;  // i < j

// Output of the per-class correlation taxonomy: qualifying pairs per group
// type, and their connected components once cluster() has run.
struct GroupTaxonomy {
    std::set<FeaturePair> neutral_pairs;
    std::set<FeaturePair> benign_pairs;
    std::set<FeaturePair> ransom_pairs;
    std::vector<FeatureCluster> clusters;
    CorrelationThresholds thresholds;
    std::size_t n_features = 0;

    const std::set<FeaturePair>& pairs(GroupType t) const {
        switch (t) {
            case GroupType::BenignSpecific: return benign_pairs;
            case GroupType::RansomSpecific: return ransom_pairs;
            default: return neutral_pairs;
        }
    }

    // Features appearing in at least one class-specific pair; these survive
    // every reduction.
    std::set<std::size_t> specific_features() const {
        std::set<std::size_t> out;
        for (const auto& [i, j] : benign_pairs) {
            out.insert(i);
            out.insert(j);
        }
        for (const auto& [i, j] : ransom_pairs) {
            out.insert(i);
            out.insert(j);
        }
        return out;
    }
};

// Tag feature pairs by the per-class correlation rules:
//   neutral            r0 >= t.neutral  and r1 >= t.neutral
//   benign-specific    r0 >= t.specific and r1 <= t.anti
//   ransomware-specific r1 >= t.specific and r0 <= t.anti
// Anything else stays untagged. The arms are checked in that order, so a pair
// can never carry two tags even under exotic threshold settings.
inline GroupTaxonomy classify_pairs(const ClassCorrelation& r0, const ClassCorrelation& r1,
                                    const CorrelationThresholds& t = {}) {
    if (r0.n_features() != r1.n_features())
        throw LengthMismatchError(r0.n_features(), r1.n_features());
    GroupTaxonomy out;
    out.thresholds = t;
    out.n_features = r0.n_features();
    const std::size_t f = r0.n_features();
    for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t j = i + 1; j < f; ++j) {
            const double c0 = r0.at(i, j);
            const double c1 = r1.at(i, j);
            if (c0 >= t.neutral && c1 >= t.neutral)
                out.neutral_pairs.insert({i, j});
            else if (c0 >= t.specific && c1 <= t.anti)
                out.benign_pairs.insert({i, j});
            else if (c1 >= t.specific && c0 <= t.anti)
                out.ransom_pairs.insert({i, j});
        }
    }
    return out;
}

// Populate clusters as connected components of each group type's pair graph.
// Components are ordered by group type, then by smallest member index.
inline GroupTaxonomy cluster(GroupTaxonomy taxonomy) {
    taxonomy.clusters.clear();
    for (GroupType type :
         {GroupType::Neutral, GroupType::BenignSpecific, GroupType::RansomSpecific}) {
        const auto& pairs = taxonomy.pairs(type);
        if (pairs.empty()) continue;
        UnionFind uf(taxonomy.n_features);
        std::set<std::size_t> touched;
        for (const auto& [i, j] : pairs) {
            uf.merge(i, j);
            touched.insert(i);
            touched.insert(j);
        }
        std::map<std::size_t, std::vector<std::size_t>> by_root;
        for (std::size_t v : touched) by_root[uf.find(v)].push_back(v);
        std::vector<FeatureCluster> found;
        for (auto& [root, members] : by_root) {
            std::sort(members.begin(), members.end());
            found.push_back(FeatureCluster{type, std::move(members)});
        }
        std::sort(found.begin(), found.end(), [](const FeatureCluster& a, const FeatureCluster& b) {
            return a.members.front() < b.members.front();
        });
        for (auto& c : found) taxonomy.clusters.push_back(std::move(c));
    }
    return taxonomy;
}

struct ReductionPlan {
    struct DroppedFeature {
        std::size_t feature;
        std::size_t representative;
    };
    std::vector<std::size_t> kept;          // ascending
    std::vector<DroppedFeature> dropped;    // ascending by feature
};

// Collapse each class-neutral cluster onto its most central member: the one
// with the largest within-cluster sum of |r| averaged over the two classes
// (ties -> lowest index). Class-specific and untagged features always
// survive.
inline std::pair<FeatureMatrix, ReductionPlan> reduce(const FeatureMatrix& m,
                                                      const GroupTaxonomy& taxonomy,
                                                      const ClassCorrelation& r0,
                                                      const ClassCorrelation& r1) {
    const std::size_t f = m.n_features();
    const std::set<std::size_t> protected_features = taxonomy.specific_features();
    std::vector<bool> drop(f, false);
    std::map<std::size_t, std::size_t> representative_of;

    for (const FeatureCluster& c : taxonomy.clusters) {
        if (c.type != GroupType::Neutral) continue;
        double best_score = -1.0;
        std::size_t best = c.members.front();
        for (std::size_t i : c.members) {
            double score = 0.0;
            for (std::size_t j : c.members) {
                if (i == j) continue;
                score += 0.5 * (std::abs(r0.at(i, j)) + std::abs(r1.at(i, j)));
            }
            if (score > best_score) {
                best_score = score;
                best = i;
            }
        }
        for (std::size_t i : c.members) {
            if (i == best || protected_features.count(i)) continue;
            drop[i] = true;
            representative_of[i] = best;
        }
    }

    ReductionPlan plan;
    for (std::size_t j = 0; j < f; ++j) {
        if (drop[j])
            plan.dropped.push_back({j, representative_of[j]});
        else
            plan.kept.push_back(j);
    }
    return {m.select_columns(plan.kept), std::move(plan)};
}

// Overload matching the operation signature; recomputes the per-class
// correlations the centrality scores need.
inline std::pair<FeatureMatrix, ReductionPlan> reduce(const FeatureMatrix& m,
                                                      const GroupTaxonomy& taxonomy) {
    const auto [r0, r1] = pearson_by_class(m);
    return reduce(m, taxonomy, r0, r1);
}

// Adjusted Rand index between two partitions of [0, n). Elements absent from
// every group are treated as singletons, so ARI == 1 exactly when the
// partitions agree including on what was left unclustered.
inline double adjusted_rand_index(const std::vector<std::vector<std::size_t>>& a,
                                  const std::vector<std::vector<std::size_t>>& b, std::size_t n) {
    std::vector<std::size_t> la(n), lb(n);
    std::size_t next = a.size();
    for (std::size_t g = 0; g < a.size(); ++g)
        for (std::size_t v : a[g]) la[v] = g;
    std::vector<bool> seen(n, false);
    for (const auto& g : a)
        for (std::size_t v : g) seen[v] = true;
    for (std::size_t v = 0; v < n; ++v)
        if (!seen[v]) la[v] = next++;

    next = b.size();
    std::fill(seen.begin(), seen.end(), false);
    for (std::size_t g = 0; g < b.size(); ++g)
        for (std::size_t v : b[g]) lb[v] = g;
    for (const auto& g : b)
        for (std::size_t v : g) seen[v] = true;
    for (std::size_t v = 0; v < n; ++v)
        if (!seen[v]) lb[v] = next++;

    std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
    std::map<std::size_t, std::size_t> ca, cb;
    for (std::size_t v = 0; v < n; ++v) {
        ++joint[{la[v], lb[v]}];
        ++ca[la[v]];
        ++cb[lb[v]];
    }
    auto choose2 = [](std::size_t k) { return 0.5 * static_cast<double>(k) * (k - 1); };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [_, c] : joint) sum_joint += choose2(c);
    for (const auto& [_, c] : ca) sum_a += choose2(c);
    for (const auto& [_, c] : cb) sum_b += choose2(c);
    const double total = choose2(n);
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_joint - expected) / (max_index - expected);
}

} // namespace ransomtrack
