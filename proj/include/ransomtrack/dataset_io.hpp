#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ransomtrack/error.hpp"
#include "ransomtrack/matrix.hpp"
#include "ransomtrack/schema.hpp"

namespace ransomtrack {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    out.push_back(cell);
    return out;
}

inline bool parse_count(const std::string& cell, std::uint64_t& out) {
    if (cell.empty() || cell.size() > 19) return false;
    std::uint64_t v = 0;
    for (char c : cell) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    out = v;
    return true;
}

} // namespace detail

// Header names of the non-feature columns; fixed so that a read/write cycle
// is byte-stable.
inline constexpr const char* kIdColumnName = "sha256";
inline constexpr const char* kLabelColumnName = "label";

struct DatasetMatrices {
    FeatureMatrix static_features;
    FeatureMatrix dynamic_features;
};

// Parse a hybrid dataset CSV into a static matrix (opcode columns) and a
// dynamic matrix (API columns around the page-protection block, in file
// order). Both share ids and labels. Cells must be non-negative integers,
// labels 0/1, ids 64-char lowercase hex.
inline DatasetMatrices read_dataset(const std::string& path, const DatasetSchema& schema) {
    schema.validate();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open for reading");

    std::string line;
    if (!std::getline(in, line)) throw SchemaViolationError(0, 0, "missing header row");
    const std::vector<std::string> header = detail::split_csv_line(line);
    if (header.size() != schema.total_columns())
        throw SchemaViolationError(0, header.size(),
                                   "header has " + std::to_string(header.size()) +
                                       " columns, expected " +
                                       std::to_string(schema.total_columns()));
    if (to_lower_ascii(header[schema.id_col]) != kIdColumnName)
        throw SchemaViolationError(0, schema.id_col, "id column must be named 'sha256'");
    if (to_lower_ascii(header[schema.label_col]) != kLabelColumnName)
        throw SchemaViolationError(0, schema.label_col, "label column must be named 'label'");

    std::vector<std::string> static_names;
    std::vector<std::string> dynamic_names;
    std::vector<FeatureKind> dynamic_kinds;
    for (std::size_t c = schema.static_cols.first; c <= schema.static_cols.second; ++c)
        static_names.push_back(header[c]);
    for (std::size_t c = schema.dynamic_cols_a.first; c <= schema.dynamic_cols_b.second; ++c) {
        dynamic_names.push_back(header[c]);
        const bool is_page = c >= schema.page_cols.first && c <= schema.page_cols.second;
        dynamic_kinds.push_back(is_page ? FeatureKind::PageProtection : FeatureKind::DynamicApi);
    }
    FeatureSpace static_space =
        FeatureSpace::uniform(std::move(static_names), FeatureKind::StaticOpcode);
    FeatureSpace dynamic_space(std::move(dynamic_names), std::move(dynamic_kinds));

    std::vector<double> static_values;
    std::vector<double> dynamic_values;
    std::vector<Label> labels;
    std::vector<std::string> ids;

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() && in.eof()) break;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != schema.total_columns())
            throw SchemaViolationError(row, cells.size(),
                                       "row has " + std::to_string(cells.size()) +
                                           " columns, expected " +
                                           std::to_string(schema.total_columns()));
        const std::string& id = cells[schema.id_col];
        if (!is_valid_digest(id)) throw BadDigestError(row);

        std::uint64_t label_val = 0;
        if (!detail::parse_count(cells[schema.label_col], label_val) || label_val > 1)
            throw SchemaViolationError(row, schema.label_col,
                                       "label must be 0 or 1, got '" +
                                           cells[schema.label_col] + "'");

        for (std::size_t c = schema.static_cols.first; c <= schema.static_cols.second; ++c) {
            std::uint64_t v = 0;
            if (!detail::parse_count(cells[c], v))
                throw SchemaViolationError(row, c, "cell is not a non-negative integer");
            static_values.push_back(static_cast<double>(v));
        }
        for (std::size_t c = schema.dynamic_cols_a.first; c <= schema.dynamic_cols_b.second; ++c) {
            std::uint64_t v = 0;
            if (!detail::parse_count(cells[c], v))
                throw SchemaViolationError(row, c, "cell is not a non-negative integer");
            dynamic_values.push_back(static_cast<double>(v));
        }
        labels.push_back(label_val == 0 ? Label::Benign : Label::Ransomware);
        ids.push_back(id);
    }

    return DatasetMatrices{
        FeatureMatrix(std::move(static_space), std::move(static_values), labels, ids),
        FeatureMatrix(std::move(dynamic_space), std::move(dynamic_values), std::move(labels),
                      std::move(ids))};
}

// Serialize back to the dataset CSV layout. Values are written as plain
// integers; with canonical (lowercase) inputs a read/write cycle reproduces
// the file byte-for-byte apart from line endings.
inline void write_dataset(std::ostream& out, const FeatureMatrix& static_features,
                          const FeatureMatrix& dynamic_features) {
    if (static_features.n_rows() != dynamic_features.n_rows())
        throw LengthMismatchError(static_features.n_rows(), dynamic_features.n_rows());
    out << kIdColumnName;
    for (const auto& n : static_features.space().names()) out << ',' << n;
    for (const auto& n : dynamic_features.space().names()) out << ',' << n;
    out << ',' << kLabelColumnName << '\n';
    for (std::size_t i = 0; i < static_features.n_rows(); ++i) {
        if (static_features.ids()[i] != dynamic_features.ids()[i] ||
            static_features.labels()[i] != dynamic_features.labels()[i])
            throw IdMismatchError(i);
        out << static_features.ids()[i];
        for (std::size_t j = 0; j < static_features.n_features(); ++j)
            out << ',' << static_cast<std::uint64_t>(static_features.at(i, j));
        for (std::size_t j = 0; j < dynamic_features.n_features(); ++j)
            out << ',' << static_cast<std::uint64_t>(dynamic_features.at(i, j));
        out << ',' << to_int(static_features.labels()[i]) << '\n';
    }
}

inline void write_dataset(const std::string& path, const FeatureMatrix& static_features,
                          const FeatureMatrix& dynamic_features) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path, "cannot open for writing");
    write_dataset(out, static_features, dynamic_features);
}

} // namespace ransomtrack
