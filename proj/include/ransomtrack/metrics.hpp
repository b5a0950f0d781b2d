#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"
#include "ransomtrack/model.hpp"
#include "ransomtrack/rng.hpp"

namespace ransomtrack {

// Row indices for one train/test partition. Deterministic per seed.
struct SplitPlan {
    std::vector<std::size_t> train_idx;
    std::vector<std::size_t> test_idx;
    double ratio = 0.8;
    std::uint64_t seed = 0;
};

// Shuffle each class separately, cut at floor(ratio * n_class). Keeps the
// class balance of the full set in both partitions.
inline SplitPlan stratified_split(const std::vector<Label>& labels, double ratio, Rng& rng) {
    std::vector<std::size_t> class0, class1;
    for (std::size_t i = 0; i < labels.size(); ++i)
        (labels[i] == Label::Benign ? class0 : class1).push_back(i);
    if (class0.empty() || class1.empty()) throw SingleClassError();

    SplitPlan plan;
    plan.ratio = ratio;
    plan.seed = rng.seed();
    for (auto* cls : {&class0, &class1}) {
        rng.shuffle(*cls);
        const std::size_t n_train =
            static_cast<std::size_t>(std::floor(ratio * static_cast<double>(cls->size())));
        plan.train_idx.insert(plan.train_idx.end(), cls->begin(), cls->begin() + static_cast<long>(n_train));
        plan.test_idx.insert(plan.test_idx.end(), cls->begin() + static_cast<long>(n_train), cls->end());
    }
    std::sort(plan.train_idx.begin(), plan.train_idx.end());
    std::sort(plan.test_idx.begin(), plan.test_idx.end());
    return plan;
}

// Positive class = ransomware.
struct ConfusionMatrix {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fn + fp + tn; }
};

inline ConfusionMatrix confusion_from_probs(const std::vector<double>& probs,
                                            const std::vector<Label>& labels,
                                            double threshold = kDecisionThreshold) {
    if (probs.size() != labels.size()) throw LengthMismatchError(probs.size(), labels.size());
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool predicted = probs[i] >= threshold;
        const bool actual = labels[i] == Label::Ransomware;
        if (actual && predicted) ++cm.tp;
        else if (actual && !predicted) ++cm.fn;
        else if (!actual && predicted) ++cm.fp;
        else ++cm.tn;
    }
    return cm;
}

// Confusion-matrix metrics plus the rank metrics when probabilities are
// available. Zero-denominator rates fall back to 0 with the degenerate flag
// set; tiny synthetic sets do hit those cells.
struct EvaluationReport {
    ConfusionMatrix confusion;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double specificity = 0.0;
    double g_mean = 0.0;
    double f1 = 0.0;
    double balanced_accuracy = 0.0;
    double fnr_percent = 0.0;
    std::optional<double> roc_auc;
    std::optional<double> log_loss;
    bool degenerate = false;
    double train_time_per_sample = 0.0;
    double test_time_per_sample = 0.0;
};

// Midrank ROC-AUC: ties between scores receive half credit, matching the
// brute-force count over (positive, negative) pairs.
inline double roc_auc_midrank(const std::vector<double>& probs, const std::vector<Label>& labels) {
    const std::size_t n = probs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return probs[a] < probs[b]; });

    std::vector<double> rank(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && probs[order[j + 1]] == probs[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;  // ranks are 1-based
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = midrank;
        i = j + 1;
    }

    double rank_sum_pos = 0.0;
    std::uint64_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (labels[k] == Label::Ransomware) {
            rank_sum_pos += rank[k];
            ++n_pos;
        }
    const std::uint64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) return 0.0;
    const double np = static_cast<double>(n_pos);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

inline double log_loss_clipped(const std::vector<double>& probs, const std::vector<Label>& labels) {
    double loss = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
        loss += labels[i] == Label::Ransomware ? -std::log(p) : -std::log(1.0 - p);
    }
    return loss / static_cast<double>(probs.size());
}

// Metrics derivable from the confusion matrix alone.
inline EvaluationReport metrics(const ConfusionMatrix& cm) {
    EvaluationReport r;
    r.confusion = cm;
    const double tp = static_cast<double>(cm.tp), fn = static_cast<double>(cm.fn);
    const double fp = static_cast<double>(cm.fp), tn = static_cast<double>(cm.tn);
    const double n = tp + fn + fp + tn;

    auto rate = [&r](double num, double den) {
        if (den == 0.0) {
            r.degenerate = true;
            return 0.0;
        }
        return num / den;
    };
    r.accuracy = rate(tp + tn, n);
    r.precision = rate(tp, tp + fp);
    r.recall = rate(tp, tp + fn);
    r.specificity = rate(tn, tn + fp);
    r.g_mean = std::sqrt(r.recall * r.specificity);
    r.f1 = r.precision + r.recall == 0.0 ? 0.0
                                         : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.balanced_accuracy = 0.5 * (r.recall + r.specificity);
    r.fnr_percent = rate(fn, tp + fn) * 100.0;
    return r;
}

// Full battery including the probability-rank metrics.
inline EvaluationReport metrics(const ConfusionMatrix& cm, const std::vector<double>& probs,
                                const std::vector<Label>& labels) {
    if (probs.size() != labels.size()) throw LengthMismatchError(probs.size(), labels.size());
    EvaluationReport r = metrics(cm);
    r.roc_auc = roc_auc_midrank(probs, labels);
    r.log_loss = log_loss_clipped(probs, labels);
    return r;
}

struct TimedRun {
    TrainedModel model;
    EvaluationReport report;
};

// Fit on the train rows, score the test rows, and record wall-clock time per
// sample for both phases (monotonic clock). Everything except the timing
// fields is deterministic per seed.
inline TimedRun timed_run(ModelKind kind, const FeatureMatrix& train, const FeatureMatrix& test,
                          const Hyperparams& h, Rng& rng, int jobs = 1) {
    using clock = std::chrono::steady_clock;

    const auto t0 = clock::now();
    TrainedModel model = fit(kind, train, h, rng, jobs);
    const auto t1 = clock::now();
    const std::vector<double> probs = model.predict_proba(test);
    const auto t2 = clock::now();

    EvaluationReport report =
        metrics(confusion_from_probs(probs, test.labels()), probs, test.labels());
    report.train_time_per_sample = std::chrono::duration<double>(t1 - t0).count() /
                                   static_cast<double>(train.n_rows());
    report.test_time_per_sample = std::chrono::duration<double>(t2 - t1).count() /
                                  static_cast<double>(test.n_rows());
    return TimedRun{std::move(model), report};
}

} // namespace ransomtrack
