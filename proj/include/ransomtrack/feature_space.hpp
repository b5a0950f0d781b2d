#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ransomtrack/error.hpp"

namespace ransomtrack {

// Binary class label: 0 = benignware, 1 = ransomware.
enum class Label : std::uint8_t { Benign = 0, Ransomware = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

inline Label label_from_int(long long v) {
    if (v != 0 && v != 1) throw Error("label must be 0 or 1, got " + std::to_string(v));
    return v == 0 ? Label::Benign : Label::Ransomware;
}

enum class FeatureKind : std::uint8_t { StaticOpcode = 0, DynamicApi = 1, PageProtection = 2 };

inline const char* to_string(FeatureKind k) {
    switch (k) {
        case FeatureKind::StaticOpcode: return "static_opcode";
        case FeatureKind::DynamicApi: return "dynamic_api";
        case FeatureKind::PageProtection: return "page_protection";
    }
    return "?";
}

inline FeatureKind feature_kind_from_string(const std::string& s) {
    if (s == "static_opcode") return FeatureKind::StaticOpcode;
    if (s == "dynamic_api") return FeatureKind::DynamicApi;
    if (s == "page_protection") return FeatureKind::PageProtection;
    throw Error("unknown feature kind '" + s + "'");
}

inline std::string to_lower_ascii(std::string s) {
    for (char& c : s)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return s;
}

// The ordered universe of named features. Names are normalized to lowercase
// ASCII on construction (logs mix cases for the same API; one canonical form
// prevents silent column duplication). Order is the column order and is
// stable across runs.
class FeatureSpace {
  public:
    FeatureSpace() = default;

    FeatureSpace(std::vector<std::string> names, std::vector<FeatureKind> kinds)
        : names_(std::move(names)), kinds_(std::move(kinds)) {
        if (names_.size() != kinds_.size())
            throw LengthMismatchError(names_.size(), kinds_.size());
        index_.reserve(names_.size());
        for (std::size_t j = 0; j < names_.size(); ++j) {
            names_[j] = to_lower_ascii(names_[j]);
            auto [it, inserted] = index_.emplace(names_[j], j);
            if (!inserted) throw DuplicateFeatureError(names_[j]);
        }
    }

    // Convenience: all features share one kind.
    static FeatureSpace uniform(std::vector<std::string> names, FeatureKind kind) {
        std::vector<FeatureKind> kinds(names.size(), kind);
        return FeatureSpace(std::move(names), std::move(kinds));
    }

    std::size_t size() const { return names_.size(); }
    const std::string& name(std::size_t j) const { return names_[j]; }
    FeatureKind kind(std::size_t j) const { return kinds_[j]; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<FeatureKind>& kinds() const { return kinds_; }

    std::optional<std::size_t> index_of(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    bool operator==(const FeatureSpace& other) const {
        return names_ == other.names_ && kinds_ == other.kinds_;
    }
    bool operator!=(const FeatureSpace& other) const { return !(*this == other); }

    // Column-wise concatenation; throws DuplicateFeatureError on overlap.
    static FeatureSpace concat(const FeatureSpace& a, const FeatureSpace& b) {
        std::vector<std::string> names = a.names_;
        names.insert(names.end(), b.names_.begin(), b.names_.end());
        std::vector<FeatureKind> kinds = a.kinds_;
        kinds.insert(kinds.end(), b.kinds_.begin(), b.kinds_.end());
        return FeatureSpace(std::move(names), std::move(kinds));
    }

    // Projection onto a subset of columns, order given by `keep`.
    FeatureSpace project(const std::vector<std::size_t>& keep) const {
        std::vector<std::string> names;
        std::vector<FeatureKind> kinds;
        names.reserve(keep.size());
        kinds.reserve(keep.size());
        for (std::size_t j : keep) {
            names.push_back(names_[j]);
            kinds.push_back(kinds_[j]);
        }
        return FeatureSpace(std::move(names), std::move(kinds));
    }

  private:
    std::vector<std::string> names_;
    std::vector<FeatureKind> kinds_;
    std::unordered_map<std::string, std::size_t> index_;
};

inline bool is_valid_digest(const std::string& id) {
    if (id.size() != 64) return false;
    for (char c : id)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

} // namespace ransomtrack
