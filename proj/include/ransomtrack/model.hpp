#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ransomtrack/boosted_trees.hpp"
#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"
#include "ransomtrack/rng.hpp"
#include "ransomtrack/standardizer.hpp"
#include "ransomtrack/tree.hpp"

namespace ransomtrack {

enum class ModelKind : std::uint8_t {
    DecisionTree,
    RandomForest,
    LogisticRegression,
    KNearest,
    BoostedTrees,
    SoftVoting
};

inline const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::LogisticRegression: return "logistic_regression";
        case ModelKind::KNearest: return "k_nearest";
        case ModelKind::BoostedTrees: return "boosted_trees";
        case ModelKind::SoftVoting: return "soft_voting";
    }
    return "?";
}

inline ModelKind model_kind_from_string(const std::string& s) {
    if (s == "decision_tree" || s == "dt") return ModelKind::DecisionTree;
    if (s == "random_forest" || s == "rf") return ModelKind::RandomForest;
    if (s == "logistic_regression" || s == "lr") return ModelKind::LogisticRegression;
    if (s == "k_nearest" || s == "knn") return ModelKind::KNearest;
    if (s == "boosted_trees" || s == "boosted" || s == "xgb") return ModelKind::BoostedTrees;
    if (s == "soft_voting" || s == "voting") return ModelKind::SoftVoting;
    throw ConfigError("unknown model kind '" + s + "'");
}

inline const std::array<ModelKind, 6> kAllModelKinds = {
    ModelKind::DecisionTree,  ModelKind::RandomForest, ModelKind::LogisticRegression,
    ModelKind::KNearest,      ModelKind::BoostedTrees, ModelKind::SoftVoting};

// All training knobs, with their defaults. Reports echo these verbatim: none
// of the defaults is prescribed by the evaluation protocol, so runs must
// record what they actually used.
struct Hyperparams {
    struct TreeParams {
        int max_depth = 32;
        int min_samples_split = 2;  // criterion is Gini
    } tree;
    struct ForestParams {
        int n_trees = 100;
        bool bootstrap = true;  // feature subsample per node is sqrt(f)
    } forest;
    struct LogisticParams {
        double learning_rate = 0.1;
        int epochs = 500;
        double l2 = 1e-4;
    } logistic;
    struct KnnParams {
        int k = 5;  // Euclidean on standardized features
    } knn;
    BoostConfig boosted;  // rounds 100, lr 0.1, depth 6, lambda 1, min_child_weight 1
    struct VotingParams {
        std::array<double, 5> weights = {1.0, 1.0, 1.0, 1.0, 1.0};
    } voting;
};

// Decision threshold for class assignment.
inline constexpr double kDecisionThreshold = 0.5;

// --- per-kind fitted state ---------------------------------------------------

struct DecisionTreeState {
    Tree tree;
    double predict(std::span<const double> row) const { return tree.predict(row); }
};

struct RandomForestState {
    std::vector<Tree> trees;
    double predict(std::span<const double> row) const {
        double sum = 0.0;
        for (const Tree& t : trees) sum += t.predict(row);
        return sum / static_cast<double>(trees.size());
    }
};

struct LogisticState {
    Standardizer standardizer;
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> loss_history;  // training loss per epoch, non-increasing

    double predict(std::span<const double> row) const {
        const std::vector<double> z = standardizer.transform(row);
        double score = bias;
        for (std::size_t j = 0; j < z.size(); ++j) score += weights[j] * z[j];
        return sigmoid(score);
    }
};

struct KnnState {
    Standardizer standardizer;
    std::vector<double> train_z;  // row-major standardized training rows
    std::vector<int> train_y;
    int k = 5;

    double predict(std::span<const double> row) const {
        const std::size_t n = train_y.size();
        const std::size_t f = standardizer.n_features();
        const std::vector<double> z = standardizer.transform(row);
        // distance ties resolve to the lower training-row index
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < f; ++j) {
                const double d = train_z[i * f + j] - z[j];
                d2 += d * d;
            }
            dist[i] = {d2, i};
        }
        const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
        std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(kk), dist.end());
        std::size_t pos = 0;
        for (std::size_t i = 0; i < kk; ++i) pos += static_cast<std::size_t>(train_y[dist[i].second]);
        return static_cast<double>(pos) / static_cast<double>(kk);
    }
};

// The five base members in fixed order, combined by normalized weights.
struct SoftVotingState {
    DecisionTreeState dt;
    RandomForestState rf;
    LogisticState lr;
    KnnState knn;
    BoostedTreesState boosted;
    std::array<double, 5> weights = {1.0, 1.0, 1.0, 1.0, 1.0};

    double predict(std::span<const double> row) const {
        const std::array<double, 5> p = {dt.predict(row), rf.predict(row), lr.predict(row),
                                         knn.predict(row), boosted.predict(row)};
        return combine(p, weights);
    }

    static double combine(const std::array<double, 5>& probs, const std::array<double, 5>& w) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            num += w[i] * probs[i];
            den += w[i];
        }
        return num / den;
    }
};

using ModelState = std::variant<DecisionTreeState, RandomForestState, LogisticState, KnnState,
                                BoostedTreesState, SoftVotingState>;

// An immutable fitted classifier exposing probability prediction.
class TrainedModel {
  public:
    TrainedModel() = default;
    TrainedModel(ModelKind kind, FeatureSpace space, Hyperparams hyperparams, std::uint64_t seed,
                 ModelState state)
        : kind_(kind), space_(std::move(space)), hyperparams_(hyperparams), seed_(seed),
          state_(std::move(state)) {}

    ModelKind kind() const { return kind_; }
    const FeatureSpace& space() const { return space_; }
    const Hyperparams& hyperparams() const { return hyperparams_; }
    std::uint64_t seed() const { return seed_; }
    const ModelState& state() const { return state_; }

    double predict_one(std::span<const double> row) const {
        return std::visit([&](const auto& s) { return s.predict(row); }, state_);
    }

    std::vector<double> predict_proba(const FeatureMatrix& rows) const {
        if (rows.space() != space_) throw SpaceMismatchError();
        std::vector<double> out;
        out.reserve(rows.n_rows());
        for (std::size_t i = 0; i < rows.n_rows(); ++i) out.push_back(predict_one(rows.row(i)));
        return out;
    }

  private:
    ModelKind kind_ = ModelKind::DecisionTree;
    FeatureSpace space_;
    Hyperparams hyperparams_;
    std::uint64_t seed_ = 0;
    ModelState state_;
};

inline std::vector<Label> classify(const std::vector<double>& probs,
                                   double threshold = kDecisionThreshold) {
    std::vector<Label> out;
    out.reserve(probs.size());
    for (double p : probs) out.push_back(p >= threshold ? Label::Ransomware : Label::Benign);
    return out;
}

// --- fitting -----------------------------------------------------------------

namespace detail {

inline std::vector<int> int_labels(const FeatureMatrix& m) {
    std::vector<int> y;
    y.reserve(m.n_rows());
    for (Label l : m.labels()) y.push_back(to_int(l));
    return y;
}

inline void require_both_classes(const std::vector<int>& y) {
    bool has0 = false, has1 = false;
    for (int v : y) (v == 0 ? has0 : has1) = true;
    if (!has0 || !has1) throw DegenerateTrainingError();
}

inline DecisionTreeState fit_decision_tree(const FeatureMatrix& m, const std::vector<int>& y,
                                           const Hyperparams& h) {
    CartConfig config;
    config.max_depth = h.tree.max_depth;
    config.min_samples_split = h.tree.min_samples_split;
    std::vector<std::size_t> idx(m.n_rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return DecisionTreeState{
        fit_cart(RowsView{m.values().data(), m.n_features()}, y, std::move(idx), config)};
}

inline RandomForestState fit_random_forest(const FeatureMatrix& m, const std::vector<int>& y,
                                           const Hyperparams& h, Rng& rng, int jobs) {
    const std::size_t n = m.n_rows();
    const std::size_t f = m.n_features();
    CartConfig config;
    config.max_depth = h.tree.max_depth;
    config.min_samples_split = h.tree.min_samples_split;
    config.feature_subsample =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(f))));

    // Per-tree seeds are drawn up front so the result is identical no matter
    // how the trees are scheduled.
    const int n_trees = h.forest.n_trees;
    std::vector<std::uint64_t> seeds;
    seeds.reserve(static_cast<std::size_t>(n_trees));
    for (int t = 0; t < n_trees; ++t) seeds.push_back(rng.next_u64());

    RandomForestState state;
    state.trees.resize(static_cast<std::size_t>(n_trees));
    const RowsView view{m.values().data(), f};

    auto build_tree = [&](int t) {
        Rng tree_rng(seeds[static_cast<std::size_t>(t)]);
        std::vector<std::size_t> idx(n);
        if (h.forest.bootstrap) {
            for (std::size_t i = 0; i < n; ++i) idx[i] = tree_rng.below(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        }
        state.trees[static_cast<std::size_t>(t)] = fit_cart(view, y, std::move(idx), config, &tree_rng);
    };

    if (jobs <= 1) {
        for (int t = 0; t < n_trees; ++t) build_tree(t);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < jobs; ++w)
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < n_trees; t = next.fetch_add(1)) build_tree(t);
            });
        for (auto& th : pool) th.join();
    }
    return state;
}

inline LogisticState fit_logistic(const FeatureMatrix& m, const std::vector<int>& y,
                                  const Hyperparams& h) {
    const std::size_t n = m.n_rows();
    const std::size_t f = m.n_features();
    LogisticState state;
    state.standardizer = Standardizer::fit(m);
    const std::vector<double> z = state.standardizer.transform_all(m);
    state.weights.assign(f, 0.0);

    auto loss_and_grad = [&](const std::vector<double>& w, double b, std::vector<double>& gw,
                             double& gb) {
        double loss = 0.0;
        gw.assign(f, 0.0);
        gb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double score = b;
            for (std::size_t j = 0; j < f; ++j) score += w[j] * z[i * f + j];
            const double p = sigmoid(score);
            const double yi = static_cast<double>(y[i]);
            const double pc = std::clamp(p, 1e-15, 1.0 - 1e-15);
            loss += -(yi * std::log(pc) + (1.0 - yi) * std::log(1.0 - pc));
            const double err = p - yi;
            for (std::size_t j = 0; j < f; ++j) gw[j] += err * z[i * f + j];
            gb += err;
        }
        loss /= static_cast<double>(n);
        for (std::size_t j = 0; j < f; ++j) {
            gw[j] = gw[j] / static_cast<double>(n) + h.logistic.l2 * w[j];
            loss += 0.5 * h.logistic.l2 * w[j] * w[j];
        }
        gb /= static_cast<double>(n);
        return loss;
    };

    std::vector<double> gw;
    double gb = 0.0;
    double loss = loss_and_grad(state.weights, state.bias, gw, gb);
    for (int epoch = 0; epoch < h.logistic.epochs; ++epoch) {
        // Backtracking keeps the recorded loss curve non-increasing even when
        // the base step overshoots.
        double step = h.logistic.learning_rate;
        std::vector<double> w_try(f);
        double b_try = 0.0;
        std::vector<double> gw_try;
        double gb_try = 0.0;
        double loss_try = loss;
        for (int halving = 0; halving < 60; ++halving) {
            for (std::size_t j = 0; j < f; ++j) w_try[j] = state.weights[j] - step * gw[j];
            b_try = state.bias - step * gb;
            loss_try = loss_and_grad(w_try, b_try, gw_try, gb_try);
            if (loss_try <= loss) break;
            step *= 0.5;
        }
        if (loss_try > loss) {
            // gradient no longer improves at any representable step
            state.loss_history.push_back(loss);
            continue;
        }
        state.weights = w_try;
        state.bias = b_try;
        gw = std::move(gw_try);
        gb = gb_try;
        loss = loss_try;
        state.loss_history.push_back(loss);
    }
    return state;
}

inline KnnState fit_knn(const FeatureMatrix& m, const std::vector<int>& y, const Hyperparams& h) {
    KnnState state;
    state.standardizer = Standardizer::fit(m);
    state.train_z = state.standardizer.transform_all(m);
    state.train_y = y;
    state.k = h.knn.k;
    return state;
}

} // namespace detail

// Fit a classifier of the given kind. Deterministic given (kind, data,
// hyperparams, seed). Standardization is internal to the kinds that need it;
// tree ensembles operate on raw counts.
inline TrainedModel fit(ModelKind kind, const FeatureMatrix& m, const Hyperparams& h, Rng& rng,
                        int jobs = 1) {
    const std::vector<int> y = detail::int_labels(m);
    detail::require_both_classes(y);

    ModelState state = DecisionTreeState{};
    switch (kind) {
        case ModelKind::DecisionTree:
            state = detail::fit_decision_tree(m, y, h);
            break;
        case ModelKind::RandomForest:
            state = detail::fit_random_forest(m, y, h, rng, jobs);
            break;
        case ModelKind::LogisticRegression:
            state = detail::fit_logistic(m, y, h);
            break;
        case ModelKind::KNearest:
            state = detail::fit_knn(m, y, h);
            break;
        case ModelKind::BoostedTrees:
            state = fit_boosted(detail::RowsView{m.values().data(), m.n_features()}, y, h.boosted);
            break;
        case ModelKind::SoftVoting: {
            SoftVotingState voting;
            voting.weights = h.voting.weights;
            Rng rf_rng = rng.fork();  // the forest is the only member that draws
            voting.dt = detail::fit_decision_tree(m, y, h);
            voting.rf = detail::fit_random_forest(m, y, h, rf_rng, jobs);
            voting.lr = detail::fit_logistic(m, y, h);
            voting.knn = detail::fit_knn(m, y, h);
            voting.boosted =
                fit_boosted(detail::RowsView{m.values().data(), m.n_features()}, y, h.boosted);
            state = std::move(voting);
            break;
        }
    }
    return TrainedModel(kind, m.space(), h, rng.seed(), std::move(state));
}

} // namespace ransomtrack
