#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"

namespace ransomtrack {

// Symmetric f x f Pearson matrix computed over the samples of one class only.
// Zero-variance features are flagged degenerate and correlate 0 with
// everything, including themselves; for all other features the diagonal is 1.
class ClassCorrelation {
  public:
    ClassCorrelation() = default;

    ClassCorrelation(Label label, std::size_t n_features)
        : label_(label), f_(n_features), r_(n_features * n_features, 0.0),
          degenerate_(n_features, false) {}

    Label label() const { return label_; }
    std::size_t n_features() const { return f_; }
    double at(std::size_t i, std::size_t j) const { return r_[i * f_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        r_[i * f_ + j] = v;
        r_[j * f_ + i] = v;
    }
    bool degenerate(std::size_t j) const { return degenerate_[j]; }
    void mark_degenerate(std::size_t j) { degenerate_[j] = true; }

  private:
    Label label_ = Label::Benign;
    std::size_t f_ = 0;
    std::vector<double> r_;
    std::vector<bool> degenerate_;
};

namespace detail {

inline ClassCorrelation pearson_over_rows(const FeatureMatrix& m,
                                          const std::vector<std::size_t>& rows, Label label) {
    const std::size_t f = m.n_features();
    const std::size_t n = rows.size();
    ClassCorrelation out(label, f);

    std::vector<double> mean(f, 0.0);
    for (std::size_t i : rows)
        for (std::size_t j = 0; j < f; ++j) mean[j] += m.at(i, j);
    for (std::size_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(n);

    // Centered columns, then pairwise dot products.
    std::vector<double> centered(n * f);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < f; ++j) centered[k * f + j] = m.at(rows[k], j) - mean[j];

    std::vector<double> norm(f, 0.0);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < f; ++j) norm[j] += centered[k * f + j] * centered[k * f + j];

    for (std::size_t j = 0; j < f; ++j) {
        if (norm[j] == 0.0)
            out.mark_degenerate(j);
        else
            out.set(j, j, 1.0);
    }
    for (std::size_t i = 0; i < f; ++i) {
        if (out.degenerate(i)) continue;
        for (std::size_t j = i + 1; j < f; ++j) {
            if (out.degenerate(j)) continue;
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += centered[k * f + i] * centered[k * f + j];
            out.set(i, j, dot / std::sqrt(norm[i] * norm[j]));
        }
    }
    return out;
}

} // namespace detail

// Intra-class Pearson correlation, independently for each class. Requires at
// least two samples per class.
inline std::pair<ClassCorrelation, ClassCorrelation> pearson_by_class(const FeatureMatrix& m) {
    const std::vector<std::size_t> rows0 = m.rows_with_label(Label::Benign);
    const std::vector<std::size_t> rows1 = m.rows_with_label(Label::Ransomware);
    if (rows0.size() < 2) throw InsufficientSamplesError(0);
    if (rows1.size() < 2) throw InsufficientSamplesError(1);
    return {detail::pearson_over_rows(m, rows0, Label::Benign),
            detail::pearson_over_rows(m, rows1, Label::Ransomware)};
}

} // namespace ransomtrack
