#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"

namespace ransomtrack {

// Internal matrix bundle written by `ingest` and `synth` and consumed by the
// downstream stages. JSON with integer-valued cells.
inline constexpr const char* kMatrixFormatName = "ransomtrack-matrix";
inline constexpr int kMatrixFormatVersion = 1;

inline nlohmann::json matrix_to_json(const FeatureMatrix& m) {
    nlohmann::json j;
    j["format"] = kMatrixFormatName;
    j["version"] = kMatrixFormatVersion;
    j["names"] = m.space().names();
    nlohmann::json kinds = nlohmann::json::array();
    for (FeatureKind k : m.space().kinds()) kinds.push_back(to_string(k));
    j["kinds"] = kinds;
    j["ids"] = m.ids();
    nlohmann::json labels = nlohmann::json::array();
    for (Label l : m.labels()) labels.push_back(to_int(l));
    j["labels"] = labels;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.n_rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t jj = 0; jj < m.n_features(); ++jj) row.push_back(m.at(i, jj));
        rows.push_back(std::move(row));
    }
    j["rows"] = rows;
    return j;
}

inline FeatureMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j.at("format").get<std::string>() != kMatrixFormatName)
        throw Error("not a ransomtrack matrix file");
    if (j.at("version").get<int>() != kMatrixFormatVersion)
        throw Error("unsupported matrix file version");
    std::vector<std::string> names = j.at("names").get<std::vector<std::string>>();
    std::vector<FeatureKind> kinds;
    for (const auto& k : j.at("kinds")) kinds.push_back(feature_kind_from_string(k.get<std::string>()));
    FeatureSpace space(std::move(names), std::move(kinds));

    std::vector<std::string> ids = j.at("ids").get<std::vector<std::string>>();
    std::vector<Label> labels;
    for (const auto& l : j.at("labels")) labels.push_back(label_from_int(l.get<long long>()));
    std::vector<double> values;
    values.reserve(ids.size() * space.size());
    for (const auto& row : j.at("rows")) {
        if (row.size() != space.size()) throw LengthMismatchError(row.size(), space.size());
        for (const auto& cell : row) values.push_back(cell.get<double>());
    }
    return FeatureMatrix(std::move(space), std::move(values), std::move(labels), std::move(ids));
}

inline void save_matrix(const FeatureMatrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    out << matrix_to_json(m).dump() << '\n';
}

inline FeatureMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open matrix file");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("cannot parse matrix file " + path + ": " + e.what());
    }
    return matrix_from_json(j);
}

} // namespace ransomtrack
