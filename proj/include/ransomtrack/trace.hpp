#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "ransomtrack/error.hpp"
#include "ransomtrack/feature_space.hpp"

namespace ransomtrack {

// The six monitored behavioral categories.
enum class TraceCategory : std::uint8_t { Mutex, Memory, Registry, Netshell, Internet, File };

inline const char* to_string(TraceCategory c) {
    switch (c) {
        case TraceCategory::Mutex: return "mutex";
        case TraceCategory::Memory: return "memory";
        case TraceCategory::Registry: return "registry";
        case TraceCategory::Netshell: return "netshell";
        case TraceCategory::Internet: return "internet";
        case TraceCategory::File: return "file";
    }
    return "?";
}

inline std::optional<TraceCategory> trace_category_from_string(const std::string& s) {
    if (s == "mutex") return TraceCategory::Mutex;
    if (s == "memory") return TraceCategory::Memory;
    if (s == "registry") return TraceCategory::Registry;
    if (s == "netshell") return TraceCategory::Netshell;
    if (s == "internet") return TraceCategory::Internet;
    if (s == "file") return TraceCategory::File;
    return std::nullopt;
}

// One hooked API invocation, as read from a trace log line.
struct TraceEvent {
    std::uint64_t sequence = 0;
    TraceCategory category = TraceCategory::File;
    std::string api;                    // lowercase function name
    std::optional<std::string> detail;  // mutex name, registry key, protection label, path, host
};

// The dataset's four page-protection columns, in schema order.
inline constexpr std::array<const char*, 4> kPageFlagNames = {
    "page_readonly", "page_readwrite", "page_execute", "page_execute_readwrite"};

// Decoded protection label -> page column. The execute-read family
// (page_execute_read / page_execute_readwrite / page_execute_writecopy /
// page_execute_write) shares the fourth column. Unmappable labels are a
// malformed event: a memory event must land in exactly one column.
inline std::optional<std::size_t> page_flag_column(const std::string& detail_lower) {
    if (detail_lower == "page_readonly") return 0;
    if (detail_lower == "page_readwrite") return 1;
    if (detail_lower == "page_execute") return 2;
    if (detail_lower == "page_execute_read" || detail_lower == "page_execute_readwrite" ||
        detail_lower == "page_execute_write" || detail_lower == "page_execute_writecopy")
        return 3;
    return std::nullopt;
}

struct TraceCounts {
    std::map<std::string, std::uint64_t> api;   // all six categories
    std::map<std::string, std::uint64_t> page;  // always the four canonical keys

    TraceCounts() {
        for (const char* name : kPageFlagNames) page[name] = 0;
    }
};

namespace detail {

inline TraceEvent parse_trace_line(const std::string& line, std::size_t line_no) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw MalformedEventError(line_no, e.what());
    }
    if (!obj.is_object()) throw MalformedEventError(line_no, "event is not an object");
    if (!obj.contains("seq") || !obj["seq"].is_number_unsigned())
        throw MalformedEventError(line_no, "missing or non-integer 'seq'");
    if (!obj.contains("cat") || !obj["cat"].is_string())
        throw MalformedEventError(line_no, "missing 'cat'");
    if (!obj.contains("api") || !obj["api"].is_string())
        throw MalformedEventError(line_no, "missing 'api'");

    TraceEvent ev;
    ev.sequence = obj["seq"].get<std::uint64_t>();
    const auto cat = trace_category_from_string(obj["cat"].get<std::string>());
    if (!cat)
        throw MalformedEventError(line_no, "unknown category '" + obj["cat"].get<std::string>() + "'");
    ev.category = *cat;
    ev.api = to_lower_ascii(obj["api"].get<std::string>());
    if (ev.api.empty()) throw MalformedEventError(line_no, "empty api name");
    if (obj.contains("detail")) {
        if (!obj["detail"].is_string()) throw MalformedEventError(line_no, "non-string 'detail'");
        ev.detail = obj["detail"].get<std::string>();
    }
    return ev;
}

} // namespace detail

// Parse a line-delimited trace log into API counters and the four
// page-protection counters. Event order never affects the output. A malformed
// event aborts the whole file: trace integrity is security-relevant, so there
// is no silent skipping.
inline TraceCounts parse_trace(std::istream& log) {
    TraceCounts out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(log, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const TraceEvent ev = detail::parse_trace_line(line, line_no);
        ++out.api[ev.api];
        if (ev.category == TraceCategory::Memory) {
            if (!ev.detail)
                throw MalformedEventError(line_no, "memory event without protection label");
            const auto col = page_flag_column(to_lower_ascii(*ev.detail));
            if (!col)
                throw MalformedEventError(line_no, "unknown protection label '" + *ev.detail + "'");
            ++out.page[kPageFlagNames[*col]];
        }
    }
    return out;
}

inline TraceCounts parse_trace_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open trace log");
    return parse_trace(in);
}

} // namespace ransomtrack
