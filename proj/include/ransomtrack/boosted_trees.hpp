#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ransomtrack/tree.hpp"

namespace ransomtrack {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Second-order (Newton) boosting round settings.
struct BoostConfig {
    int rounds = 100;
    double learning_rate = 0.1;
    int max_depth = 6;
    double lambda = 1.0;            // L2 on leaf weights
    double min_child_weight = 1.0;  // minimum hessian sum per child
};

namespace detail {

struct NewtonBuilder {
    RowsView x;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    BoostConfig config;
    Tree tree;

    struct BestSplit {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double gain = 0.0;
    };

    static double leaf_objective(double g, double h, double lambda) {
        return g * g / (h + lambda);
    }

    int build(std::vector<std::size_t>& idx, int depth) {
        double g_sum = 0.0, h_sum = 0.0;
        for (std::size_t i : idx) {
            g_sum += grad[i];
            h_sum += hess[i];
        }

        TreeNode node;
        node.n_samples = idx.size();
        node.value = -g_sum / (h_sum + config.lambda);

        BestSplit best;
        if (depth < config.max_depth && idx.size() >= 2) best = find_split(idx, g_sum, h_sum);
        if (!best.found) {
            tree.nodes.push_back(node);
            return static_cast<int>(tree.nodes.size() - 1);
        }

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (std::size_t i : idx)
            (x.at(i, best.feature) <= best.threshold ? left_idx : right_idx).push_back(i);

        node.feature = static_cast<int>(best.feature);
        node.threshold = best.threshold;
        const int self = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(node);
        const int left = build(left_idx, depth + 1);
        const int right = build(right_idx, depth + 1);
        tree.nodes[self].left = left;
        tree.nodes[self].right = right;
        return self;
    }

    // gain = 1/2 [ GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l) ], children rejected
    // below the hessian floor. Scan order (ascending feature, then ascending
    // threshold) with a strict comparison implements the tie break.
    BestSplit find_split(const std::vector<std::size_t>& idx, double g_sum, double h_sum) {
        const std::size_t n = idx.size();
        const double parent_obj = leaf_objective(g_sum, h_sum, config.lambda);

        BestSplit best;
        std::vector<std::pair<double, std::size_t>> column(n);
        for (std::size_t j = 0; j < x.n_features; ++j) {
            for (std::size_t k = 0; k < n; ++k) column[k] = {x.at(idx[k], j), idx[k]};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            double gl = 0.0, hl = 0.0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                gl += grad[column[k].second];
                hl += hess[column[k].second];
                if (column[k].first == column[k + 1].first) continue;
                const double gr = g_sum - gl;
                const double hr = h_sum - hl;
                if (hl < config.min_child_weight || hr < config.min_child_weight) continue;
                const double gain = 0.5 * (leaf_objective(gl, hl, config.lambda) +
                                           leaf_objective(gr, hr, config.lambda) - parent_obj);
                if (gain > 0.0 && (!best.found || gain > best.gain)) {
                    best.found = true;
                    best.feature = j;
                    best.threshold = 0.5 * (column[k].first + column[k + 1].first);
                    best.gain = gain;
                }
            }
        }
        return best;
    }
};

} // namespace detail

// One Newton boosting round: grow the greedy depth-limited tree for the
// current gradient/hessian state. Exposed on its own so the round mechanics
// can be checked against hand-computed leaf weights.
inline Tree boosted_round(detail::RowsView x, const std::vector<double>& grad,
                          const std::vector<double>& hess, const BoostConfig& config) {
    std::vector<std::size_t> idx(grad.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    detail::NewtonBuilder builder{x, grad, hess, config, {}};
    builder.build(idx, 0);
    return std::move(builder.tree);
}

// Fitted ensemble: probability = sigmoid(base + lr * sum of tree outputs).
struct BoostedTreesState {
    double base_score = 0.0;
    double learning_rate = 0.1;
    std::vector<Tree> trees;

    double margin(std::span<const double> row) const {
        double m = base_score;
        for (const Tree& t : trees) m += learning_rate * t.predict(row);
        return m;
    }
    double predict(std::span<const double> row) const { return sigmoid(margin(row)); }
};

inline BoostedTreesState fit_boosted(detail::RowsView x, const std::vector<int>& y,
                                     const BoostConfig& config) {
    const std::size_t n = y.size();
    BoostedTreesState model;
    model.learning_rate = config.learning_rate;

    double prior = 0.0;
    for (int v : y) prior += v;
    prior /= static_cast<double>(n);
    model.base_score = std::log(prior / (1.0 - prior));

    std::vector<double> margin(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    for (int round = 0; round < config.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            grad[i] = p - static_cast<double>(y[i]);
            hess[i] = p * (1.0 - p);
        }
        Tree tree = boosted_round(x, grad, hess, config);
        for (std::size_t i = 0; i < n; ++i)
            margin[i] += config.learning_rate * tree.predict({&x.data[i * x.n_features],
                                                              x.n_features});
        model.trees.push_back(std::move(tree));
    }
    return model;
}

} // namespace ransomtrack
