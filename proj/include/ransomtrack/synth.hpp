#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"
#include "ransomtrack/rng.hpp"
#include "ransomtrack/taxonomy.hpp"
#include "ransomtrack/trace.hpp"

namespace ransomtrack {

// Blueprint for a synthetic dataset with known structure: correlated feature
// blocks per taxonomy group, class-separating signal features with a margin
// expressed in noise-sigma units, everything else independent noise.
struct SynthPlan {
    std::size_t n_per_class = 500;
    std::size_t n_features = 16;
    std::vector<std::vector<std::size_t>> neutral_blocks;
    std::vector<std::vector<std::size_t>> benign_blocks;
    std::vector<std::vector<std::size_t>> ransom_blocks;
    std::vector<std::size_t> signal_features;
    double margin = 0.0;       // class shift in units of noise_sigma
    double noise_sigma = 1.0;
    std::uint64_t seed = kDefaultSeed;

    void validate() const {
        if (n_per_class < 2) throw PlanInvalidError("need at least 2 samples per class");
        if (n_features == 0) throw PlanInvalidError("need at least 1 feature");
        if (noise_sigma <= 0.0) throw PlanInvalidError("noise_sigma must be positive");
        if (margin < 0.0) throw PlanInvalidError("margin must be non-negative");
        std::set<std::size_t> used;
        auto check_blocks = [&](const std::vector<std::vector<std::size_t>>& blocks,
                                const char* what) {
            for (const auto& block : blocks) {
                if (block.size() < 2)
                    throw PlanInvalidError(std::string(what) + " block needs >= 2 members");
                for (std::size_t j : block) {
                    if (j >= n_features) throw PlanInvalidError("feature index out of range");
                    if (!used.insert(j).second)
                        throw PlanInvalidError("blocks must be disjoint, feature " +
                                               std::to_string(j) + " reused");
                }
            }
        };
        check_blocks(neutral_blocks, "neutral");
        check_blocks(benign_blocks, "benign");
        check_blocks(ransom_blocks, "ransom");
        for (std::size_t j : signal_features) {
            if (j >= n_features) throw PlanInvalidError("signal feature index out of range");
            if (used.count(j))
                throw PlanInvalidError("signal features must not sit inside blocks");
        }
    }

    static SynthPlan from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SynthData {
    FeatureMatrix matrix;
    GroupTaxonomy truth;        // planted blocks as clusters
    double bayes_accuracy;      // upper bound for any classifier on this data
};

namespace detail {

// Latent construction constants. The within-block latent correlation is set
// high enough that integer rounding cannot pull empirical pairwise r below
// the 0.9 neutral threshold at default sigma.
inline constexpr double kLatentCorrelation = 0.98;
inline constexpr double kBlockScaleFactor = 20.0;  // block amplitude, in sigmas
inline constexpr double kBaseline = 100.0;         // keeps counts away from zero

// Standard normal CDF.
inline double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Mixing weight that gives mildly negative exchangeable correlation
// (about -0.2 pairwise) inside a block of size m: members are eps_j minus
// gamma times the block's mean noise. The off-class half of a specific block
// must land reliably at or below 0.0 so the tagging rule fires for every
// seed; independent noise would leave the empirical sign a coin flip.
inline double anti_mix_weight(std::size_t m) {
    const double md = static_cast<double>(m);
    const double inside = 1.0 - md / 6.0;
    if (inside <= 0.0) return 1.0;
    return 1.0 - std::sqrt(inside);
}

} // namespace detail

// Deterministic 64-hex pseudo-digest for synthetic ids.
inline std::string sha_like_id(const std::string& tag) {
    // FNV-1a over the tag, stretched to 64 hex chars.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 1099511628211ull;
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(64);
    std::uint64_t x = h;
    for (int i = 0; i < 64; ++i) {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        out += hex[x & 0xf];
    }
    return out;
}

// Generate the planted dataset. Rows are all ransomware samples first, then
// all benignware, mirroring the published file layout. Values are shifted,
// scaled normals rounded to non-negative integer counts.
inline SynthData generate(const SynthPlan& plan) {
    plan.validate();
    Rng rng(plan.seed);
    const std::size_t n = 2 * plan.n_per_class;
    const std::size_t f = plan.n_features;
    const double sigma = plan.noise_sigma;
    const double block_scale = detail::kBlockScaleFactor * sigma;

    std::vector<double> raw(n * f);
    std::vector<Label> labels(n);
    for (std::size_t i = 0; i < n; ++i)
        labels[i] = i < plan.n_per_class ? Label::Ransomware : Label::Benign;

    // Baseline: independent noise everywhere.
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j)
            raw[i * f + j] = detail::kBaseline + rng.normal(0.0, sigma);

    // Signal features: shift the ransomware rows.
    for (std::size_t j : plan.signal_features)
        for (std::size_t i = 0; i < n; ++i)
            if (labels[i] == Label::Ransomware) raw[i * f + j] += plan.margin * sigma;

    const double rho = detail::kLatentCorrelation;
    const double latent_w = std::sqrt(rho);
    const double noise_w = std::sqrt(1.0 - rho);

    // Correlated block: shared latent plus member noise, pairwise r = rho.
    auto fill_correlated_row = [&](std::size_t i, const std::vector<std::size_t>& block) {
        const double latent = rng.normal();
        for (std::size_t j : block)
            raw[i * f + j] =
                detail::kBaseline + block_scale * (latent_w * latent + noise_w * rng.normal());
    };
    // Anti-correlated block half: exchangeable noise with mildly negative
    // pairwise correlation.
    auto fill_anti_row = [&](std::size_t i, const std::vector<std::size_t>& block) {
        const double gamma = detail::anti_mix_weight(block.size());
        std::vector<double> eps(block.size());
        double mean = 0.0;
        for (double& e : eps) {
            e = rng.normal();
            mean += e;
        }
        mean /= static_cast<double>(block.size());
        for (std::size_t k = 0; k < block.size(); ++k)
            raw[i * f + block[k]] = detail::kBaseline + block_scale * (eps[k] - gamma * mean);
    };

    for (const auto& block : plan.neutral_blocks)
        for (std::size_t i = 0; i < n; ++i) fill_correlated_row(i, block);
    for (const auto& block : plan.benign_blocks)
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == Label::Benign)
                fill_correlated_row(i, block);
            else
                fill_anti_row(i, block);
        }
    for (const auto& block : plan.ransom_blocks)
        for (std::size_t i = 0; i < n; ++i) {
            if (labels[i] == Label::Ransomware)
                fill_correlated_row(i, block);
            else
                fill_anti_row(i, block);
        }

    // Discretize to counts by shifted rounding.
    std::vector<double> values(n * f);
    for (std::size_t k = 0; k < n * f; ++k)
        values[k] = std::max(0.0, std::round(raw[k]));

    std::vector<std::string> names;
    names.reserve(f);
    for (std::size_t j = 0; j < f; ++j) {
        std::ostringstream os;
        os << "feat_" << j;
        names.push_back(os.str());
    }
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::ostringstream os;
        os << "synth-" << plan.seed << "-" << i;
        ids.push_back(sha_like_id(os.str()));
    }

    GroupTaxonomy truth;
    truth.n_features = f;
    auto plant = [&](const std::vector<std::vector<std::size_t>>& blocks, GroupType type) {
        for (const auto& block : blocks) {
            std::vector<std::size_t> members = block;
            std::sort(members.begin(), members.end());
            for (std::size_t a = 0; a < members.size(); ++a)
                for (std::size_t b = a + 1; b < members.size(); ++b) {
                    const FeaturePair p{members[a], members[b]};
                    if (type == GroupType::Neutral) truth.neutral_pairs.insert(p);
                    if (type == GroupType::BenignSpecific) truth.benign_pairs.insert(p);
                    if (type == GroupType::RansomSpecific) truth.ransom_pairs.insert(p);
                }
            truth.clusters.push_back(FeatureCluster{type, std::move(members)});
        }
    };
    plant(plan.neutral_blocks, GroupType::Neutral);
    plant(plan.benign_blocks, GroupType::BenignSpecific);
    plant(plan.ransom_blocks, GroupType::RansomSpecific);

    // Independent unit-variance signals combine into one d' = sqrt(k) * margin
    // discriminant; the optimal rule sits at half that distance.
    const double k_signals = static_cast<double>(plan.signal_features.size());
    const double bayes =
        k_signals == 0 ? 0.5 : detail::phi(std::sqrt(k_signals) * plan.margin / 2.0);

    FeatureMatrix matrix(FeatureSpace::uniform(std::move(names), FeatureKind::StaticOpcode),
                         std::move(values), std::move(labels), std::move(ids));
    return SynthData{std::move(matrix), std::move(truth), bayes};
}

// --- round-trip emitters ---------------------------------------------------

// Render a counts map as a parseable disassembly listing; the inverse of
// parse_disassembly for counts drawn from the lexicon.
inline std::string emit_listing(const std::map<std::string, std::uint64_t>& counts) {
    std::ostringstream out;
    out << "# synthetic listing\n";
    std::uint64_t address = 0x401000;
    for (const auto& [mnemonic, count] : counts) {
        for (std::uint64_t k = 0; k < count; ++k) {
            out << "0x" << std::hex << address << std::dec << ' ' << mnemonic << '\n';
            address += 5;
        }
    }
    return out.str();
}

// Render counters as a trace log; the inverse of parse_trace. Memory events
// are emitted as virtualprotect calls, so the api map must already carry at
// least sum(page) under "virtualprotect" (a protection change implies the
// call that made it).
inline std::string emit_trace(const TraceCounts& counters) {
    std::uint64_t page_total = 0;
    for (const auto& [_, c] : counters.page) page_total += c;
    std::uint64_t vp_available = 0;
    if (auto it = counters.api.find("virtualprotect"); it != counters.api.end())
        vp_available = it->second;
    if (page_total > vp_available)
        throw PlanInvalidError("page counters exceed virtualprotect api count");

    auto category_for = [](const std::string& api) -> const char* {
        if (api.rfind("reg", 0) == 0) return "registry";
        if (api.rfind("createmutex", 0) == 0) return "mutex";
        if (api.rfind("internet", 0) == 0 || api.rfind("getaddrinfo", 0) == 0) return "internet";
        if (api.rfind("wsasend", 0) == 0 || api.rfind("shellexecute", 0) == 0) return "netshell";
        return "file";
    };

    std::ostringstream out;
    std::uint64_t seq = 0;
    auto emit = [&](const char* cat, const std::string& api, const char* detail) {
        nlohmann::ordered_json line;
        line["seq"] = seq++;
        line["cat"] = cat;
        line["api"] = api;
        if (detail) line["detail"] = detail;
        out << line.dump() << '\n';
    };

    for (const char* flag : kPageFlagNames) {
        auto it = counters.page.find(flag);
        const std::uint64_t c = it == counters.page.end() ? 0 : it->second;
        for (std::uint64_t k = 0; k < c; ++k) emit("memory", "virtualprotect", flag);
    }
    for (const auto& [api, count] : counters.api) {
        std::uint64_t remaining = count;
        if (api == "virtualprotect") remaining -= page_total;
        for (std::uint64_t k = 0; k < remaining; ++k)
            emit(category_for(api), api, nullptr);
    }
    return out.str();
}

inline SynthPlan SynthPlan::from_json(const nlohmann::json& j) {
    SynthPlan plan;
    if (j.contains("n_per_class")) plan.n_per_class = j["n_per_class"].get<std::size_t>();
    if (j.contains("n_features")) plan.n_features = j["n_features"].get<std::size_t>();
    if (j.contains("neutral_blocks"))
        plan.neutral_blocks = j["neutral_blocks"].get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("benign_blocks"))
        plan.benign_blocks = j["benign_blocks"].get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("ransom_blocks"))
        plan.ransom_blocks = j["ransom_blocks"].get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("signal_features"))
        plan.signal_features = j["signal_features"].get<std::vector<std::size_t>>();
    if (j.contains("margin")) plan.margin = j["margin"].get<double>();
    if (j.contains("noise_sigma")) plan.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("seed")) plan.seed = j["seed"].get<std::uint64_t>();
    plan.validate();
    return plan;
}

inline nlohmann::json SynthPlan::to_json() const {
    nlohmann::json j;
    j["n_per_class"] = n_per_class;
    j["n_features"] = n_features;
    j["neutral_blocks"] = neutral_blocks;
    j["benign_blocks"] = benign_blocks;
    j["ransom_blocks"] = ransom_blocks;
    j["signal_features"] = signal_features;
    j["margin"] = margin;
    j["noise_sigma"] = noise_sigma;
    j["seed"] = seed;
    return j;
}

} // namespace ransomtrack
