#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"
#include "ransomtrack/metrics.hpp"
#include "ransomtrack/model.hpp"
#include "ransomtrack/rng.hpp"

namespace ransomtrack {

// Per-feature contributions for one prediction. base_value is the expected
// model output over the background set; base_value + sum(phi) equals the
// model probability for the explained row (efficiency).
struct Attribution {
    std::string id;
    double base_value = 0.0;
    std::vector<double> phi;
    std::optional<std::vector<double>> mc_stderr;  // set by the sampled estimator

    double total() const {
        double s = base_value;
        for (double p : phi) s += p;
        return s;
    }
};

// Mean |phi| ranking for one class.
struct ClassRanking {
    Label label = Label::Benign;
    std::vector<std::pair<std::string, double>> ranked;  // non-increasing mean |phi|
};

using RowEvalFn = std::function<double(std::span<const double>)>;

inline constexpr std::size_t kExactShapleyCap = 15;

namespace detail {

inline const std::vector<long double>& factorial_table() {
    static const std::vector<long double> table = [] {
        std::vector<long double> t(131, 1.0L);
        for (std::size_t i = 1; i < t.size(); ++i) t[i] = t[i - 1] * static_cast<long double>(i);
        return t;
    }();
    return table;
}

// Shapley weight of a coalition of size s among f players.
inline double subset_weight(std::size_t s, std::size_t f) {
    const auto& fact = factorial_table();
    return static_cast<double>(fact[s] * fact[f - 1 - s] / fact[f]);
}

// Interventional hybrid-game weights for one leaf path: a features forced to
// the explained row (in S), b features forced to the background row (out of
// S). Derived from the unanimity-game expansion of the path indicator.
inline double path_weight_present(std::size_t a, std::size_t b) {
    const auto& fact = factorial_table();
    return static_cast<double>(fact[a - 1] * fact[b] / fact[a + b]);
}

inline double path_weight_absent(std::size_t a, std::size_t b) {
    const auto& fact = factorial_table();
    return static_cast<double>(fact[a] * fact[b - 1] / fact[a + b]);
}

struct PathState {
    std::vector<int> forced_x;  // features that must be in S
    std::vector<int> forced_z;  // features that must be out of S

    bool has_x(int j) const {
        return std::find(forced_x.begin(), forced_x.end(), j) != forced_x.end();
    }
    bool has_z(int j) const {
        return std::find(forced_z.begin(), forced_z.end(), j) != forced_z.end();
    }
};

// Recurse over the paths a hybrid of (x, z) can reach; accumulate the exact
// Shapley contribution of each reachable leaf.
inline void tree_paths(const Tree& tree, int at, std::span<const double> x,
                       std::span<const double> z, PathState& state, double scale,
                       std::vector<double>& phi) {
    const TreeNode& node = tree.nodes[at];
    if (node.is_leaf()) {
        const std::size_t a = state.forced_x.size();
        const std::size_t b = state.forced_z.size();
        if (a == 0 && b == 0) return;  // common path, no marginal effect
        const double val = scale * node.value;
        if (a > 0) {
            const double w = path_weight_present(a, b);
            for (int j : state.forced_x) phi[static_cast<std::size_t>(j)] += val * w;
        }
        if (b > 0) {
            const double w = path_weight_absent(a, b);
            for (int j : state.forced_z) phi[static_cast<std::size_t>(j)] -= val * w;
        }
        return;
    }

    const int j = node.feature;
    const bool x_left = x[static_cast<std::size_t>(j)] <= node.threshold;
    const bool z_left = z[static_cast<std::size_t>(j)] <= node.threshold;
    if (x_left == z_left) {
        tree_paths(tree, x_left ? node.left : node.right, x, z, state, scale, phi);
        return;
    }
    if (state.has_x(j)) {
        tree_paths(tree, x_left ? node.left : node.right, x, z, state, scale, phi);
        return;
    }
    if (state.has_z(j)) {
        tree_paths(tree, z_left ? node.left : node.right, x, z, state, scale, phi);
        return;
    }
    state.forced_x.push_back(j);
    tree_paths(tree, x_left ? node.left : node.right, x, z, state, scale, phi);
    state.forced_x.pop_back();
    state.forced_z.push_back(j);
    tree_paths(tree, z_left ? node.left : node.right, x, z, state, scale, phi);
    state.forced_z.pop_back();
}

// Features on which x and z can actually take different branches somewhere in
// the ensemble. Everything else is a null player of the hybrid game.
inline std::vector<std::size_t> divergent_features(const std::vector<const Tree*>& trees,
                                                   std::span<const double> x,
                                                   std::span<const double> z) {
    std::set<std::size_t> out;
    for (const Tree* tree : trees)
        for (const TreeNode& node : tree->nodes) {
            if (node.is_leaf()) continue;
            const auto j = static_cast<std::size_t>(node.feature);
            if (x[j] == z[j]) continue;
            if ((x[j] <= node.threshold) != (z[j] <= node.threshold)) out.insert(j);
        }
    return {out.begin(), out.end()};
}

// Sigmoid-linked ensemble evaluated incrementally: flipping one feature only
// re-traverses the trees that split on it.
class EnsembleFlipEvaluator {
  public:
    EnsembleFlipEvaluator(const std::vector<const Tree*>& trees, double base, double lr)
        : trees_(&trees), base_(base), lr_(lr), tree_values_(trees.size(), 0.0) {
        std::size_t max_feature = 0;
        for (const Tree* tree : trees)
            for (const TreeNode& node : tree->nodes)
                if (!node.is_leaf())
                    max_feature = std::max(max_feature, static_cast<std::size_t>(node.feature));
        trees_by_feature_.assign(max_feature + 1, {});
        for (std::size_t t = 0; t < trees.size(); ++t) {
            std::set<int> used;
            for (const TreeNode& node : trees[t]->nodes)
                if (!node.is_leaf()) used.insert(node.feature);
            for (int j : used) trees_by_feature_[static_cast<std::size_t>(j)].push_back(t);
        }
    }

    void reset(std::span<const double> start) {
        hybrid_.assign(start.begin(), start.end());
        margin_ = base_;
        for (std::size_t t = 0; t < trees_->size(); ++t) {
            tree_values_[t] = (*trees_)[t]->predict(hybrid_);
            margin_ += lr_ * tree_values_[t];
        }
    }

    void set(std::size_t j, double value) {
        if (hybrid_[j] == value) return;
        hybrid_[j] = value;
        if (j >= trees_by_feature_.size()) return;
        for (std::size_t t : trees_by_feature_[j]) {
            margin_ -= lr_ * tree_values_[t];
            tree_values_[t] = (*trees_)[t]->predict(hybrid_);
            margin_ += lr_ * tree_values_[t];
        }
    }

    double proba() const { return sigmoid(margin_); }

  private:
    const std::vector<const Tree*>* trees_;
    double base_;
    double lr_;
    std::vector<double> hybrid_;
    std::vector<double> tree_values_;
    double margin_ = 0.0;
    std::vector<std::vector<std::size_t>> trees_by_feature_;
};

// Exact Shapley over the divergent player subset by Gray-code mask
// enumeration (one flip per step). Non-players keep the x value throughout,
// which is sound because they cannot change any traversal.
inline void exact_over_players(EnsembleFlipEvaluator& eval, std::span<const double> x,
                               std::span<const double> z,
                               const std::vector<std::size_t>& players, std::vector<double>& phi) {
    const std::size_t d = players.size();
    std::vector<double> start(x.begin(), x.end());
    for (std::size_t p : players) start[p] = z[p];  // S = empty set
    eval.reset(start);

    std::vector<double> value(std::size_t{1} << d);
    value[0] = eval.proba();
    std::size_t gray = 0;
    for (std::size_t k = 1; k < value.size(); ++k) {
        const auto bit = static_cast<std::size_t>(std::countr_zero(k));
        const std::size_t next = gray ^ (std::size_t{1} << bit);
        const std::size_t player = players[bit];
        eval.set(player, (next >> bit) & 1 ? x[player] : z[player]);
        gray = next;
        value[gray] = eval.proba();
    }
    for (std::size_t k = 0; k < d; ++k) {
        double contribution = 0.0;
        for (std::size_t mask = 0; mask < value.size(); ++mask) {
            if ((mask >> k) & 1) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            contribution += subset_weight(s, d) * (value[mask | (std::size_t{1} << k)] - value[mask]);
        }
        phi[players[k]] += contribution;
    }
}

// Antithetic permutation sampling over the divergent players for one
// background row; marginal contributions telescope, so the estimate is
// exactly efficient at any sample count.
inline void sampled_over_players(EnsembleFlipEvaluator& eval, std::span<const double> x,
                                 std::span<const double> z,
                                 const std::vector<std::size_t>& players, Rng& rng,
                                 std::size_t n_permutations, std::vector<double>& phi,
                                 std::vector<double>& stderr_sq) {
    const std::size_t d = players.size();
    std::vector<double> start(x.begin(), x.end());
    for (std::size_t p : players) start[p] = z[p];

    std::vector<double> sum(d, 0.0), sum_sq(d, 0.0);
    std::vector<std::size_t> order(d);
    for (std::size_t k = 0; k < d; ++k) order[k] = k;

    const std::size_t pairs = (n_permutations + 1) / 2;
    std::size_t done = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
        rng.shuffle(order);
        for (int direction = 0; direction < 2 && done < n_permutations; ++direction, ++done) {
            eval.reset(start);
            double prev = eval.proba();
            auto visit = [&](std::size_t k) {
                eval.set(players[k], x[players[k]]);
                const double now = eval.proba();
                sum[k] += now - prev;
                sum_sq[k] += (now - prev) * (now - prev);
                prev = now;
            };
            if (direction == 0)
                for (std::size_t k = 0; k < d; ++k) visit(order[k]);
            else
                for (std::size_t k = d; k-- > 0;) visit(order[k]);
        }
    }
    const double np = static_cast<double>(done);
    for (std::size_t k = 0; k < d; ++k) {
        const double mean = sum[k] / np;
        phi[players[k]] += mean;
        const double var = std::max(0.0, sum_sq[k] / np - mean * mean);
        stderr_sq[players[k]] += var / np;
    }
}

} // namespace detail

// Exact Shapley values by subset enumeration: the definition, runnable up to
// 15 features. v(S) replaces the features outside S with background values
// and averages the model output over the background rows (interventional
// marginalization).
inline Attribution shapley_exact(const RowEvalFn& eval, std::span<const double> row,
                                 const std::vector<std::vector<double>>& background) {
    const std::size_t f = row.size();
    if (f > kExactShapleyCap) throw TooManyFeaturesError(f);
    if (background.empty()) throw Error("background set must be non-empty");

    const std::size_t n_masks = std::size_t{1} << f;
    std::vector<double> value(n_masks, 0.0);
    std::vector<double> hybrid(f);
    for (const auto& z : background) {
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            for (std::size_t j = 0; j < f; ++j)
                hybrid[j] = (mask >> j) & 1 ? row[j] : z[j];
            value[mask] += eval(hybrid);
        }
    }
    for (double& v : value) v /= static_cast<double>(background.size());

    Attribution out;
    out.base_value = value[0];
    out.phi.assign(f, 0.0);
    for (std::size_t j = 0; j < f; ++j) {
        double contribution = 0.0;
        for (std::size_t mask = 0; mask < n_masks; ++mask) {
            if ((mask >> j) & 1) continue;
            const auto s = static_cast<std::size_t>(std::popcount(mask));
            contribution +=
                detail::subset_weight(s, f) * (value[mask | (std::size_t{1} << j)] - value[mask]);
        }
        out.phi[j] = contribution;
    }
    return out;
}

inline Attribution shapley_exact(const TrainedModel& model, std::span<const double> row,
                                 const std::vector<std::vector<double>>& background) {
    if (row.size() != model.space().size()) throw SpaceMismatchError();
    return shapley_exact([&](std::span<const double> r) { return model.predict_one(r); }, row,
                         background);
}

// Sampled permutation estimator for kinds without a specialized algorithm.
// Each sampled permutation's marginal contributions telescope, so efficiency
// holds exactly even at small sample counts; the Monte-Carlo standard error
// per feature is reported alongside.
inline Attribution permutation_shapley(const RowEvalFn& eval, std::span<const double> row,
                                       const std::vector<std::vector<double>>& background,
                                       Rng& rng, std::size_t n_permutations = 64) {
    const std::size_t f = row.size();
    const std::size_t nb = background.size();
    if (nb == 0) throw Error("background set must be non-empty");

    // mean model output over a batch of hybrids, one per background row
    std::vector<double> hybrids(nb * f);
    for (std::size_t b = 0; b < nb; ++b)
        std::copy(background[b].begin(), background[b].end(), hybrids.begin() + static_cast<long>(b * f));
    auto mean_eval = [&] {
        double sum = 0.0;
        for (std::size_t b = 0; b < nb; ++b)
            sum += eval(std::span<const double>(hybrids.data() + b * f, f));
        return sum / static_cast<double>(nb);
    };

    const double base = mean_eval();

    std::vector<double> phi(f, 0.0), phi_sq(f, 0.0);
    std::vector<std::size_t> order(f);
    for (std::size_t j = 0; j < f; ++j) order[j] = j;

    const std::size_t pairs = (n_permutations + 1) / 2;
    std::size_t done = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
        rng.shuffle(order);
        for (int direction = 0; direction < 2 && done < n_permutations; ++direction, ++done) {
            // reset hybrids to the background
            for (std::size_t b = 0; b < nb; ++b)
                std::copy(background[b].begin(), background[b].end(),
                          hybrids.begin() + static_cast<long>(b * f));
            double prev = base;
            auto visit = [&](std::size_t j) {
                for (std::size_t b = 0; b < nb; ++b) hybrids[b * f + j] = row[j];
                const double now = mean_eval();
                const double marginal = now - prev;
                phi[j] += marginal;
                phi_sq[j] += marginal * marginal;
                prev = now;
            };
            if (direction == 0)
                for (std::size_t k = 0; k < f; ++k) visit(order[k]);
            else
                for (std::size_t k = f; k-- > 0;) visit(order[k]);
        }
    }

    Attribution out;
    out.base_value = base;
    out.phi.assign(f, 0.0);
    std::vector<double> stderr_out(f, 0.0);
    const double np = static_cast<double>(done);
    for (std::size_t j = 0; j < f; ++j) {
        out.phi[j] = phi[j] / np;
        const double var = std::max(0.0, phi_sq[j] / np - out.phi[j] * out.phi[j]);
        stderr_out[j] = std::sqrt(var / np);
    }
    out.mc_stderr = std::move(stderr_out);
    return out;
}

inline Attribution permutation_shapley(const TrainedModel& model, std::span<const double> row,
                                       const std::vector<std::vector<double>>& background,
                                       Rng& rng, std::size_t n_permutations = 64) {
    if (row.size() != model.space().size()) throw SpaceMismatchError();
    return permutation_shapley([&](std::span<const double> r) { return model.predict_one(r); },
                               row, background, rng, n_permutations);
}

// Interventional Shapley for tree ensembles.
//
// Identity-link ensembles (single tree, forest) use the polynomial leaf-path
// recursion, which is exact. The boosted ensemble's probability passes the
// margin through a sigmoid, so its game is not per-tree additive; there the
// computation enumerates coalitions of the features that actually diverge
// between the row and each background row (exact, and cheap while that set is
// small) and falls back to seeded permutation sampling over that set beyond
// the cap. Non-tree kinds are rejected; callers fall back to the sampled
// estimator.
inline Attribution shapley_tree(const TrainedModel& model, std::span<const double> row,
                                const std::vector<std::vector<double>>& background,
                                std::size_t boosted_exact_cap = kExactShapleyCap,
                                std::size_t n_permutations = 128) {
    if (background.empty()) throw Error("background set must be non-empty");
    if (row.size() != model.space().size()) throw SpaceMismatchError();
    const std::size_t f = row.size();
    Attribution out;
    out.phi.assign(f, 0.0);

    if (model.kind() == ModelKind::DecisionTree || model.kind() == ModelKind::RandomForest) {
        std::vector<const Tree*> trees;
        double scale = 1.0;
        if (model.kind() == ModelKind::DecisionTree) {
            trees.push_back(&std::get<DecisionTreeState>(model.state()).tree);
        } else {
            const auto& forest = std::get<RandomForestState>(model.state());
            for (const Tree& t : forest.trees) trees.push_back(&t);
            scale = 1.0 / static_cast<double>(trees.size());
        }
        double base = 0.0;
        detail::PathState state;
        for (const auto& z : background) {
            for (const Tree* tree : trees) {
                base += scale * tree->predict(z);
                detail::tree_paths(*tree, 0, row, z, state, scale, out.phi);
            }
        }
        const double nb = static_cast<double>(background.size());
        for (double& p : out.phi) p /= nb;
        out.base_value = base / nb;
        return out;
    }

    if (model.kind() == ModelKind::BoostedTrees) {
        const auto& boosted = std::get<BoostedTreesState>(model.state());
        std::vector<const Tree*> trees;
        for (const Tree& t : boosted.trees) trees.push_back(&t);
        detail::EnsembleFlipEvaluator eval(trees, boosted.base_score, boosted.learning_rate);

        double base = 0.0;
        Rng perm_rng(model.seed() ^ 0x5eed5eedULL);
        std::vector<double> stderr_sq(f, 0.0);
        bool sampled = false;
        for (const auto& z : background) {
            base += boosted.predict(z);
            const std::vector<std::size_t> players = detail::divergent_features(trees, row, z);
            if (players.empty()) continue;
            if (players.size() <= boosted_exact_cap) {
                detail::exact_over_players(eval, row, z, players, out.phi);
            } else {
                sampled = true;
                detail::sampled_over_players(eval, row, z, players, perm_rng, n_permutations,
                                             out.phi, stderr_sq);
            }
        }
        const double nb = static_cast<double>(background.size());
        for (double& p : out.phi) p /= nb;
        out.base_value = base / nb;
        if (sampled) {
            for (double& s : stderr_sq) s = std::sqrt(s) / nb;
            out.mc_stderr = std::move(stderr_sq);
        }
        return out;
    }

    throw UnsupportedModelError(to_string(model.kind()));
}

// Attribution with the best available algorithm for the model kind.
inline Attribution shapley_for_model(const TrainedModel& model, std::span<const double> row,
                                     const std::vector<std::vector<double>>& background,
                                     Rng& rng, std::size_t n_permutations = 64) {
    switch (model.kind()) {
        case ModelKind::DecisionTree:
        case ModelKind::RandomForest:
        case ModelKind::BoostedTrees:
            return shapley_tree(model, row, background);
        default:
            return permutation_shapley(model, row, background, rng, n_permutations);
    }
}

// Class-balanced background sample of training rows (defaults to 50 + 50).
inline std::vector<std::vector<double>> sample_background(const FeatureMatrix& train, Rng& rng,
                                                          std::size_t per_class = 50) {
    std::vector<std::vector<double>> out;
    for (Label label : {Label::Benign, Label::Ransomware}) {
        std::vector<std::size_t> rows = train.rows_with_label(label);
        rng.shuffle(rows);
        const std::size_t take = std::min(per_class, rows.size());
        for (std::size_t i = 0; i < take; ++i) {
            const auto r = train.row(rows[i]);
            out.emplace_back(r.begin(), r.end());
        }
    }
    return out;
}

// Mean |phi| per feature over each class's rows, ranked non-increasing.
// k = 0 means the full ranking.
inline std::pair<ClassRanking, ClassRanking> class_rankings(const TrainedModel& model,
                                                            const FeatureMatrix& test,
                                                            std::size_t top_k,
                                                            const std::vector<std::vector<double>>& background,
                                                            Rng& rng, int jobs = 1) {
    if (test.space() != model.space()) throw SpaceMismatchError();
    const std::size_t f = test.n_features();
    const std::size_t n = test.n_rows();
    std::vector<std::vector<double>> all_phi(n);

    // per-row seeds drawn up front: results do not depend on scheduling
    std::vector<std::uint64_t> seeds(n);
    for (auto& s : seeds) s = rng.next_u64();

    auto attribute_row = [&](std::size_t i) {
        Rng row_rng(seeds[i]);
        Attribution a = shapley_for_model(model, test.row(i), background, row_rng);
        all_phi[i] = std::move(a.phi);
    };
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) attribute_row(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    attribute_row(i);
            });
        for (auto& th : pool) th.join();
    }

    auto build = [&](Label label) {
        ClassRanking ranking;
        ranking.label = label;
        std::vector<double> mean_abs(f, 0.0);
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (test.labels()[i] != label) continue;
            ++count;
            for (std::size_t j = 0; j < f; ++j) mean_abs[j] += std::abs(all_phi[i][j]);
        }
        if (count > 0)
            for (double& v : mean_abs) v /= static_cast<double>(count);
        std::vector<std::size_t> order(f);
        for (std::size_t j = 0; j < f; ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (mean_abs[a] != mean_abs[b]) return mean_abs[a] > mean_abs[b];
            return a < b;
        });
        const std::size_t keep = top_k == 0 ? f : std::min(top_k, f);
        for (std::size_t r = 0; r < keep; ++r)
            ranking.ranked.emplace_back(test.space().name(order[r]), mean_abs[order[r]]);
        return ranking;
    };
    return {build(Label::Benign), build(Label::Ransomware)};
}

} // namespace ransomtrack
