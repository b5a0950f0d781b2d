#pragma once

#include <cstddef>
#include <utility>

#include "ransomtrack/error.hpp"

namespace ransomtrack {

// Column layout of a hybrid dataset CSV. Inclusive ranges. The default is the
// published 6029-column layout: hash, 1002 static opcode columns, two API
// blocks split around 4 page-protection columns, and the label.
//
// Known discrepancy, left unresolved: the dynamic ranges below total 5025
// columns while the prose count for the dynamic set is 5024; the explicit
// column ranges are treated as authoritative.
struct DatasetSchema {
    std::size_t id_col = 0;
    std::pair<std::size_t, std::size_t> static_cols{1, 1002};
    std::pair<std::size_t, std::size_t> dynamic_cols_a{1003, 2737};
    std::pair<std::size_t, std::size_t> page_cols{2738, 2741};
    std::pair<std::size_t, std::size_t> dynamic_cols_b{2742, 6027};
    std::size_t label_col = 6028;

    std::size_t total_columns() const { return label_col + 1; }
    std::size_t n_static() const { return static_cols.second - static_cols.first + 1; }
    std::size_t n_page() const { return page_cols.second - page_cols.first + 1; }
    std::size_t n_dynamic() const {
        return (dynamic_cols_a.second - dynamic_cols_a.first + 1) + n_page() +
               (dynamic_cols_b.second - dynamic_cols_b.first + 1);
    }

    // Ranges must be disjoint, in order, and cover 0..label_col exactly;
    // exactly 4 page-protection columns.
    void validate() const {
        auto contiguous = [](std::size_t prev_end, const std::pair<std::size_t, std::size_t>& r) {
            return r.first == prev_end + 1 && r.second >= r.first;
        };
        if (id_col != 0) throw SchemaViolationError(0, id_col, "id column must be column 0");
        if (!contiguous(id_col, static_cols) || !contiguous(static_cols.second, dynamic_cols_a) ||
            !contiguous(dynamic_cols_a.second, page_cols) ||
            !contiguous(page_cols.second, dynamic_cols_b) ||
            label_col != dynamic_cols_b.second + 1)
            throw SchemaViolationError(0, 0, "column ranges must be disjoint and cover the file");
        if (n_page() != 4)
            throw SchemaViolationError(0, page_cols.first, "expected exactly 4 page columns");
    }
};

// A small layout for fixtures: id, 3 static, 2 api, 4 page, 2 api, label.
inline DatasetSchema tiny_schema() {
    DatasetSchema s;
    s.static_cols = {1, 3};
    s.dynamic_cols_a = {4, 5};
    s.page_cols = {6, 9};
    s.dynamic_cols_b = {10, 11};
    s.label_col = 12;
    return s;
}

} // namespace ransomtrack
