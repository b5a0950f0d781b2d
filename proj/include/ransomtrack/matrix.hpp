#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ransomtrack/error.hpp"
#include "ransomtrack/feature_space.hpp"

namespace ransomtrack {

// One executable's identity, label and sparse feature counts. Counts are kept
// sparse per record and densified only at bind time; the full column space is
// mostly zeros per sample.
struct SampleRecord {
    std::string id;                                // 64-hex SHA-256 digest
    Label label = Label::Benign;
    std::map<std::string, std::uint64_t> counts;   // feature name -> count
};

// Dense n_samples x n_features matrix bound to a FeatureSpace, with aligned
// labels and ids. Immutable after construction.
class FeatureMatrix {
  public:
    FeatureMatrix() = default;

    FeatureMatrix(FeatureSpace space, std::vector<double> values,
                  std::vector<Label> labels, std::vector<std::string> ids)
        : space_(std::move(space)), values_(std::move(values)),
          labels_(std::move(labels)), ids_(std::move(ids)) {
        if (labels_.size() != ids_.size())
            throw LengthMismatchError(labels_.size(), ids_.size());
        if (values_.size() != labels_.size() * space_.size())
            throw LengthMismatchError(values_.size(), labels_.size() * space_.size());
        for (double v : values_)
            if (!std::isfinite(v)) throw Error("feature matrix contains a non-finite value");
    }

    const FeatureSpace& space() const { return space_; }
    std::size_t n_rows() const { return labels_.size(); }
    std::size_t n_features() const { return space_.size(); }
    const std::vector<Label>& labels() const { return labels_; }
    const std::vector<std::string>& ids() const { return ids_; }
    const std::vector<double>& values() const { return values_; }

    double at(std::size_t i, std::size_t j) const { return values_[i * space_.size() + j]; }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * space_.size(), space_.size()};
    }

    std::vector<std::size_t> rows_with_label(Label l) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i] == l) out.push_back(i);
        return out;
    }

    // Row subset, preserving the given order.
    FeatureMatrix select_rows(const std::vector<std::size_t>& idx) const {
        const std::size_t f = space_.size();
        std::vector<double> vals;
        vals.reserve(idx.size() * f);
        std::vector<Label> labels;
        std::vector<std::string> ids;
        labels.reserve(idx.size());
        ids.reserve(idx.size());
        for (std::size_t i : idx) {
            const auto r = row(i);
            vals.insert(vals.end(), r.begin(), r.end());
            labels.push_back(labels_[i]);
            ids.push_back(ids_[i]);
        }
        return FeatureMatrix(space_, std::move(vals), std::move(labels), std::move(ids));
    }

    // Column projection onto `keep`, order preserved from `keep`.
    FeatureMatrix select_columns(const std::vector<std::size_t>& keep) const {
        FeatureSpace sub = space_.project(keep);
        std::vector<double> vals;
        vals.reserve(n_rows() * keep.size());
        for (std::size_t i = 0; i < n_rows(); ++i)
            for (std::size_t j : keep) vals.push_back(at(i, j));
        return FeatureMatrix(std::move(sub), std::move(vals), labels_, ids_);
    }

  private:
    FeatureSpace space_;
    std::vector<double> values_;   // row-major
    std::vector<Label> labels_;
    std::vector<std::string> ids_;
};

// Densify records against a space. Cell (i, j) is records[i].counts[name(j)],
// 0 when absent; row order preserves input order.
inline FeatureMatrix bind_records(const std::vector<SampleRecord>& records, const FeatureSpace& space) {
    const std::size_t f = space.size();
    std::vector<double> values(records.size() * f, 0.0);
    std::vector<Label> labels;
    std::vector<std::string> ids;
    labels.reserve(records.size());
    ids.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const SampleRecord& rec = records[i];
        for (const auto& [name, count] : rec.counts) {
            const auto j = space.index_of(name);
            if (!j) throw UnknownFeatureError(name, rec.id);
            values[i * f + *j] = static_cast<double>(count);
        }
        labels.push_back(rec.label);
        ids.push_back(rec.id);
    }
    return FeatureMatrix(space, std::move(values), std::move(labels), std::move(ids));
}

// Inverse of bind_records up to zero counts: zero cells are not materialized as keys.
inline std::vector<SampleRecord> unbind_records(const FeatureMatrix& m) {
    std::vector<SampleRecord> out;
    out.reserve(m.n_rows());
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        SampleRecord rec;
        rec.id = m.ids()[i];
        rec.label = m.labels()[i];
        for (std::size_t j = 0; j < m.n_features(); ++j) {
            const double v = m.at(i, j);
            if (v != 0.0) rec.counts[m.space().name(j)] = static_cast<std::uint64_t>(v);
        }
        out.push_back(std::move(rec));
    }
    return out;
}

// Drop count keys that are not part of `space` (open-vocabulary traces may
// contain APIs outside the fitted column universe).
inline SampleRecord restrict_to_space(const SampleRecord& rec, const FeatureSpace& space) {
    SampleRecord out;
    out.id = rec.id;
    out.label = rec.label;
    for (const auto& [name, count] : rec.counts)
        if (space.contains(name)) out.counts.emplace(name, count);
    return out;
}

// Column-wise join of two matrices over the same samples. Ids must agree in
// order (order-sensitive join), labels must agree, feature names must be
// disjoint.
inline FeatureMatrix concat_columns(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (a.n_rows() != b.n_rows()) throw LengthMismatchError(a.n_rows(), b.n_rows());
    for (std::size_t i = 0; i < a.n_rows(); ++i)
        if (a.ids()[i] != b.ids()[i] || a.labels()[i] != b.labels()[i])
            throw IdMismatchError(i);
    FeatureSpace space = FeatureSpace::concat(a.space(), b.space());
    const std::size_t fa = a.n_features();
    const std::size_t fb = b.n_features();
    std::vector<double> values;
    values.reserve(a.n_rows() * (fa + fb));
    for (std::size_t i = 0; i < a.n_rows(); ++i) {
        const auto ra = a.row(i);
        const auto rb = b.row(i);
        values.insert(values.end(), ra.begin(), ra.end());
        values.insert(values.end(), rb.begin(), rb.end());
    }
    return FeatureMatrix(std::move(space), std::move(values),
                         a.labels(), a.ids());
}

} // namespace ransomtrack
