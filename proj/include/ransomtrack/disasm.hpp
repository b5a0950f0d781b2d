#pragma once

#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "ransomtrack/error.hpp"
#include "ransomtrack/feature_space.hpp"

namespace ransomtrack {

// The set of instruction mnemonics that count as static features. Shipped as
// a plain text file, one lowercase mnemonic per line (1002 entries for the
// published column universe).
class OpcodeLexicon {
  public:
    OpcodeLexicon() = default;

    explicit OpcodeLexicon(std::set<std::string> known) : known_(std::move(known)) {
        for (const auto& m : known_)
            if (m != to_lower_ascii(m)) throw Error("lexicon entry not lowercase: " + m);
    }

    static OpcodeLexicon load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError(path, "cannot open lexicon");
        std::set<std::string> known;
        std::string line;
        std::size_t lines = 0;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            ++lines;
            if (!known.insert(to_lower_ascii(line)).second)
                throw Error("duplicate lexicon entry: " + line);
        }
        (void)lines;
        return OpcodeLexicon(std::move(known));
    }

    bool contains(const std::string& mnemonic) const { return known_.count(mnemonic) != 0; }
    std::size_t size() const { return known_.size(); }
    const std::set<std::string>& known() const { return known_; }

    // The lexicon in its stable (sorted) order, as a static feature space.
    FeatureSpace space() const {
        std::vector<std::string> names(known_.begin(), known_.end());
        return FeatureSpace::uniform(std::move(names), FeatureKind::StaticOpcode);
    }

  private:
    std::set<std::string> known_;
};

struct DisasmCounts {
    std::map<std::string, std::uint64_t> counts;  // lexicon members only
    std::uint64_t skipped_lines = 0;              // unknown mnemonic or malformed line
    std::uint64_t instruction_lines = 0;          // non-blank, non-comment lines

    std::uint64_t retained() const {
        std::uint64_t total = 0;
        for (const auto& [_, c] : counts) total += c;
        return total;
    }
    bool empty_listing() const { return instruction_lines > 0 && retained() == 0; }
};

namespace detail {

inline bool is_hex_address(const std::string& tok) {
    std::size_t start = 0;
    if (tok.size() > 2 && tok[0] == '0' && (tok[1] == 'x' || tok[1] == 'X')) start = 2;
    if (start >= tok.size()) return false;
    for (std::size_t i = start; i < tok.size(); ++i) {
        const char c = tok[i];
        const bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
        if (!hex) return false;
    }
    return true;
}

} // namespace detail

// Count instruction mnemonics in a textual disassembly listing. Line format:
// `<hex-address> <mnemonic> [operands...]`; `#` comment lines and blank lines
// are ignored. The parser is total: malformed lines and mnemonics outside the
// lexicon land in the skip counter, so
// retained() + skipped_lines == instruction_lines always holds.
inline DisasmCounts parse_disassembly(std::istream& listing, const OpcodeLexicon& lexicon) {
    DisasmCounts out;
    std::string line;
    while (std::getline(listing, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        ++out.instruction_lines;

        std::istringstream tokens(line);
        std::string address, mnemonic;
        tokens >> address >> mnemonic;
        if (mnemonic.empty() || !detail::is_hex_address(address)) {
            ++out.skipped_lines;
            continue;
        }
        mnemonic = to_lower_ascii(mnemonic);
        if (!lexicon.contains(mnemonic)) {
            ++out.skipped_lines;
            continue;
        }
        ++out.counts[mnemonic];
    }
    return out;
}

inline DisasmCounts parse_disassembly_file(const std::string& path, const OpcodeLexicon& lexicon) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(path, "cannot open listing");
    return parse_disassembly(in, lexicon);
}

} // namespace ransomtrack
