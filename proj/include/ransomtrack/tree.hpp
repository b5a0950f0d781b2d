#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "ransomtrack/rng.hpp"

namespace ransomtrack {

// Axis-aligned binary tree shared by the CART classifier, the forest and the
// boosted ensemble. Leaf payload semantics depend on the owner: class-1
// frequency for classification trees, additive weight for boosted trees.
struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    double value = 0.0;
    std::size_t n_samples = 0;

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // node 0 is the root

    double predict(std::span<const double> row) const {
        int at = 0;
        while (!nodes[at].is_leaf())
            at = row[nodes[at].feature] <= nodes[at].threshold ? nodes[at].left : nodes[at].right;
        return nodes[at].value;
    }

    std::size_t n_leaves() const {
        std::size_t n = 0;
        for (const auto& node : nodes)
            if (node.is_leaf()) ++n;
        return n;
    }

    int max_depth() const {
        int best = 0;
        depth_walk(0, 0, best);
        return best;
    }

  private:
    void depth_walk(int at, int depth, int& best) const {
        best = std::max(best, depth);
        if (nodes[at].is_leaf()) return;
        depth_walk(nodes[at].left, depth + 1, best);
        depth_walk(nodes[at].right, depth + 1, best);
    }
};

namespace detail {

// Raw row-major accessor used by the tree builders so they can run on either
// a FeatureMatrix's storage or a scratch buffer.
struct RowsView {
    const double* data;
    std::size_t n_features;
    double at(std::size_t i, std::size_t j) const { return data[i * n_features + j]; }
};

// Deterministic sample of `k` distinct feature indices, returned ascending.
inline std::vector<std::size_t> sample_features(std::size_t f, std::size_t k, Rng& rng) {
    if (k >= f) {
        std::vector<std::size_t> all(f);
        for (std::size_t j = 0; j < f; ++j) all[j] = j;
        return all;
    }
    std::vector<std::size_t> pool(f);
    for (std::size_t j = 0; j < f; ++j) pool[j] = j;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(f - i));
        std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> out(pool.begin(), pool.begin() + static_cast<long>(k));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace detail

// CART growth parameters for classification trees.
struct CartConfig {
    int max_depth = 32;
    int min_samples_split = 2;
    std::size_t feature_subsample = 0;  // 0 = all features; otherwise per-node mtry
};

namespace detail {

struct CartBuilder {
    RowsView x;
    const std::vector<int>& y;  // 0/1
    CartConfig config;
    Rng* rng;  // only consulted when feature_subsample > 0
    Tree tree;

    // Split candidates maximize sum over children of (pos^2 + neg^2) / n,
    // which is equivalent to minimizing weighted Gini impurity but stays a
    // ratio of exact integers: symmetric candidates produce bit-identical
    // scores, so the lowest-feature-then-lowest-threshold tie break is exact.
    struct BestSplit {
        bool found = false;
        std::size_t feature = 0;
        double threshold = 0.0;
        double score = 0.0;
    };

    int build(std::vector<std::size_t>& idx, int depth) {
        const std::size_t n = idx.size();
        std::size_t pos = 0;
        for (std::size_t i : idx) pos += static_cast<std::size_t>(y[i]);

        TreeNode node;
        node.n_samples = n;
        node.value = static_cast<double>(pos) / static_cast<double>(n);

        const bool pure = pos == 0 || pos == n;
        if (pure || depth >= config.max_depth ||
            n < static_cast<std::size_t>(config.min_samples_split)) {
            tree.nodes.push_back(node);
            return static_cast<int>(tree.nodes.size() - 1);
        }

        const BestSplit best = find_split(idx, pos);
        if (!best.found) {
            tree.nodes.push_back(node);
            return static_cast<int>(tree.nodes.size() - 1);
        }

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(n);
        right_idx.reserve(n);
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

    BestSplit find_split(const std::vector<std::size_t>& idx, std::size_t pos_total) {
        const std::size_t n = idx.size();
        const double parent_score =
            (static_cast<double>(pos_total) * pos_total +
             static_cast<double>(n - pos_total) * (n - pos_total)) /
            static_cast<double>(n);

        std::vector<std::size_t> features;
        if (config.feature_subsample > 0 && rng)
            features = sample_features(x.n_features, config.feature_subsample, *rng);
        else {
            features.resize(x.n_features);
            for (std::size_t j = 0; j < x.n_features; ++j) features[j] = j;
        }

        BestSplit best;
        std::vector<std::pair<double, int>> column(n);
        for (std::size_t j : features) {
            for (std::size_t k = 0; k < n; ++k)
                column[k] = {x.at(idx[k], j), y[idx[k]]};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t k = 0; k + 1 < n; ++k) {
                ++left_n;
                left_pos += static_cast<std::size_t>(column[k].second);
                if (column[k].first == column[k + 1].first) continue;
                const std::size_t right_n = n - left_n;
                const std::size_t right_pos = pos_total - left_pos;
                const double score =
                    (static_cast<double>(left_pos) * left_pos +
                     static_cast<double>(left_n - left_pos) * (left_n - left_pos)) /
                        static_cast<double>(left_n) +
                    (static_cast<double>(right_pos) * right_pos +
                     static_cast<double>(right_n - right_pos) * (right_n - right_pos)) /
                        static_cast<double>(right_n);
                if (score > parent_score && (!best.found || score > best.score)) {
                    best.found = true;
                    best.feature = j;
                    best.threshold = 0.5 * (column[k].first + column[k + 1].first);
                    best.score = score;
                }
            }
        }
        return best;
    }
};

} // namespace detail

// Grow a Gini CART classification tree over the rows in `idx`. Leaf values
// are class-1 frequencies.
inline Tree fit_cart(detail::RowsView x, const std::vector<int>& y, std::vector<std::size_t> idx,
                     const CartConfig& config, Rng* rng = nullptr) {
    detail::CartBuilder builder{x, y, config, rng, {}};
    builder.build(idx, 0);
    return std::move(builder.tree);
}

} // namespace ransomtrack
