#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ransomtrack/matrix.hpp"

namespace ransomtrack {

// Per-feature zero-mean unit-variance scaling, learned on training rows only.
// Constant columns (std 0) map to 0.
class Standardizer {
  public:
    Standardizer() = default;

    Standardizer(std::vector<double> mean, std::vector<double> stddev)
        : mean_(std::move(mean)), std_(std::move(stddev)) {
        if (mean_.size() != std_.size()) throw LengthMismatchError(mean_.size(), std_.size());
    }

    static Standardizer fit(const FeatureMatrix& m) {
        const std::size_t n = m.n_rows();
        const std::size_t f = m.n_features();
        std::vector<double> mean(f, 0.0), stddev(f, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) mean[j] += m.at(i, j);
        for (std::size_t j = 0; j < f; ++j) mean[j] /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < f; ++j) {
                const double d = m.at(i, j) - mean[j];
                stddev[j] += d * d;
            }
        for (std::size_t j = 0; j < f; ++j)
            stddev[j] = std::sqrt(stddev[j] / static_cast<double>(n));
        return Standardizer(std::move(mean), std::move(stddev));
    }

    std::size_t n_features() const { return mean_.size(); }
    const std::vector<double>& mean() const { return mean_; }
    const std::vector<double>& stddev() const { return std_; }

    std::vector<double> transform(std::span<const double> row) const {
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j)
            out[j] = std_[j] == 0.0 ? 0.0 : (row[j] - mean_[j]) / std_[j];
        return out;
    }

    // Row-major transform of a whole matrix.
    std::vector<double> transform_all(const FeatureMatrix& m) const {
        std::vector<double> out;
        out.reserve(m.n_rows() * m.n_features());
        for (std::size_t i = 0; i < m.n_rows(); ++i) {
            auto z = transform(m.row(i));
            out.insert(out.end(), z.begin(), z.end());
        }
        return out;
    }

  private:
    std::vector<double> mean_;
    std::vector<double> std_;
};

} // namespace ransomtrack
