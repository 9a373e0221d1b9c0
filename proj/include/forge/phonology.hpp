#pragma once
// Segments, phoneme inventories, phonotactic validation and the weighted
// random root generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

enum class SegmentClass { consonant, vowel, archiphoneme };

inline std::string_view class_name(SegmentClass c) {
    switch (c) {
        case SegmentClass::consonant: return "consonant";
        case SegmentClass::vowel: return "vowel";
        case SegmentClass::archiphoneme: return "archiphoneme";
    }
    return "?";
}

struct Segment {
    std::string symbol;
    SegmentClass cls = SegmentClass::consonant;
    std::set<std::string> tags;

    bool has(const std::string& tag) const { return tags.count(tag) > 0; }

    // Archiphonemes carry `vocalic` or `consonantal` to say which slot they fill.
    bool is_vowel_like() const {
        return cls == SegmentClass::vowel || (cls == SegmentClass::archiphoneme && has("vocalic"));
    }
    bool is_consonant_like() const { return !is_vowel_like(); }
};

class PhonemeInventory {
public:
    void add(Segment s) {
        if (s.symbol.empty()) throw Error(ErrorKind::load, "segment symbol is empty");
        if (index_.count(s.symbol))
            throw Error(ErrorKind::load, "duplicate segment symbol '" + s.symbol + "'");
        if (s.cls == SegmentClass::archiphoneme) {
            bool underspecified = std::any_of(s.tags.begin(), s.tags.end(), [](const std::string& t) {
                return text::starts_with(t, "underspecified");
            });
            if (!underspecified)
                throw Error(ErrorKind::load,
                            "archiphoneme '" + s.symbol + "' lacks an underspecified-* tag");
            if (!s.has("vocalic") && !s.has("consonantal")) s.tags.insert("vocalic");
        }
        if (s.has("native") && s.cls == SegmentClass::archiphoneme)
            throw Error(ErrorKind::load,
                        "archiphoneme '" + s.symbol + "' cannot be in the native citation subset");
        index_[s.symbol] = segments_.size();
        max_symbol_len_ = std::max(max_symbol_len_, s.symbol.size());
        segments_.push_back(std::move(s));
    }

    const Segment* find(std::string_view symbol) const {
        auto it = index_.find(std::string(symbol));
        return it == index_.end() ? nullptr : &segments_[it->second];
    }

    bool contains(std::string_view symbol) const { return find(symbol) != nullptr; }

    const std::vector<Segment>& segments() const { return segments_; }

    std::vector<const Segment*> of_class(SegmentClass c) const {
        std::vector<const Segment*> out;
        for (auto& s : segments_)
            if (s.cls == c) out.push_back(&s);
        return out;
    }

    std::set<std::string> native_citation_subset() const {
        std::set<std::string> out;
        for (auto& s : segments_)
            if (s.has("native")) out.insert(s.symbol);
        return out;
    }

    // Greedy longest-match segmentation. Returns false and the byte offset of
    // the first unmatched character when the string cannot be segmented.
    bool tokenize(std::string_view word, std::vector<std::string>& out,
                  std::size_t* bad_offset = nullptr) const {
        out.clear();
        std::size_t i = 0;
        while (i < word.size()) {
            std::size_t best = 0;
            for (std::size_t len = std::min(max_symbol_len_, word.size() - i); len > 0; --len) {
                if (index_.count(std::string(word.substr(i, len)))) {
                    best = len;
                    break;
                }
            }
            if (best == 0) {
                if (bad_offset) *bad_offset = i;
                return false;
            }
            out.emplace_back(word.substr(i, best));
            i += best;
        }
        return true;
    }

    std::vector<std::string> tokenize_or_throw(std::string_view word) const {
        std::vector<std::string> out;
        std::size_t bad = 0;
        if (!tokenize(word, out, &bad)) {
            auto ch = text::utf8_chars(word.substr(bad));
            throw Error(ErrorKind::unknown_symbol,
                        "unknown symbol '" + (ch.empty() ? std::string() : ch.front()) + "' in '" +
                            std::string(word) + "'",
                        bad);
        }
        return out;
    }

    // Format: `<symbol>\t<class>\t<comma-separated tags>`, `#` comments.
    static PhonemeInventory parse(std::string_view content) {
        PhonemeInventory inv;
        std::size_t lineno = 0;
        for (auto& raw : text::split(content, '\n')) {
            ++lineno;
            auto line = std::string(text::trim(raw));
            if (line.empty() || line[0] == '#') continue;
            auto cols = text::split(raw, '\t');
            if (cols.size() < 2)
                throw Error(ErrorKind::load, "inventory line " + std::to_string(lineno) +
                                                 ": expected <symbol>\\t<class>[\\t<tags>]",
                            lineno);
            Segment s;
            s.symbol = std::string(text::trim(cols[0]));
            auto cls = std::string(text::trim(cols[1]));
            if (cls == "consonant") s.cls = SegmentClass::consonant;
            else if (cls == "vowel") s.cls = SegmentClass::vowel;
            else if (cls == "archiphoneme") s.cls = SegmentClass::archiphoneme;
            else
                throw Error(ErrorKind::load,
                            "inventory line " + std::to_string(lineno) + ": unknown class '" + cls + "'",
                            lineno);
            if (cols.size() > 2)
                for (auto& t : text::split(cols[2], ','))
                    if (auto tt = text::trim(t); !tt.empty()) s.tags.insert(std::string(tt));
            try {
                inv.add(std::move(s));
            } catch (const Error& e) {
                throw Error(ErrorKind::load, "inventory line " + std::to_string(lineno) + ": " + e.what(),
                            lineno);
            }
        }
        return inv;
    }

    static PhonemeInventory load(const std::filesystem::path& p) { return parse(text::read_file(p)); }

private:
    std::vector<Segment> segments_;
    std::map<std::string, std::size_t> index_;
    std::size_t max_symbol_len_ = 0;
};

// ---------------------------------------------------------------------------
// Phonotactics

struct Violation {
    std::size_t position = 0;  // index into the segment list
    std::string kind;          // adjacent-vowels, onset-cluster, coda-cluster, cluster, no-nucleus, unknown-segment
    std::string detail;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Strict (C)V(C): no vowel hiatus, at most one consonant at each word edge,
// at most two between vowels (coda + onset).
inline ValidationResult validate_phonotactics(const std::vector<std::string>& word,
                                              const PhonemeInventory& inv) {
    if (word.empty()) throw Error(ErrorKind::empty_input, "cannot validate an empty word");
    ValidationResult r;
    enum Kind { C, V, Unknown };
    std::vector<Kind> kinds;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const Segment* s = inv.find(word[i]);
        if (!s) {
            r.violations.push_back({i, "unknown-segment", word[i]});
            kinds.push_back(Unknown);
        } else {
            kinds.push_back(s->is_vowel_like() ? V : C);
        }
    }
    bool any_vowel = false;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (kinds[i] != V) continue;
        any_vowel = true;
        if (i > 0 && kinds[i - 1] == V)
            r.violations.push_back({i, "adjacent-vowels", word[i - 1] + word[i]});
    }
    if (!any_vowel) {
        r.violations.push_back({0, "no-nucleus", "no vowel"});
    } else {
        // Consonant runs; unknown segments break runs but are already flagged.
        std::size_t i = 0;
        while (i < kinds.size()) {
            if (kinds[i] != C) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < kinds.size() && kinds[j] == C) ++j;
            std::size_t len = j - i;
            bool initial = (i == 0);
            bool final = (j == kinds.size());
            if (initial && len > 1)
                r.violations.push_back({i + 1, "onset-cluster", "more than one onset consonant"});
            else if (final && len > 1)
                r.violations.push_back({i + 1, "coda-cluster", "more than one coda consonant"});
            else if (!initial && !final && len > 2)
                r.violations.push_back({i + 2, "cluster", "more than two consonants between vowels"});
            i = j;
        }
    }
    std::sort(r.violations.begin(), r.violations.end(),
              [](const Violation& a, const Violation& b) { return a.position < b.position; });
    return r;
}

inline ValidationResult validate_phonotactics(std::string_view word, const PhonemeInventory& inv) {
    if (word.empty()) throw Error(ErrorKind::empty_input, "cannot validate an empty word");
    std::vector<std::string> segs;
    std::size_t bad = 0;
    if (!inv.tokenize(word, segs, &bad)) {
        // Segment what we can, then report the rest character by character.
        std::vector<std::string> head;
        inv.tokenize(word.substr(0, bad), head);
        auto rest = text::utf8_chars(word.substr(bad));
        segs = head;
        for (auto& ch : rest) {
            std::vector<std::string> one;
            if (inv.tokenize(ch, one)) segs.insert(segs.end(), one.begin(), one.end());
            else segs.push_back(ch);
        }
    }
    return validate_phonotactics(segs, inv);
}

// ---------------------------------------------------------------------------
// Weighted sampling and root generation

// Marks an empty slot (optional onset or coda) in a frequency table.
inline constexpr std::string_view kEmptySlot = "∅";

struct SlotFrequencyTable {
    std::string slot_id;
    std::vector<std::pair<std::string, double>> entries;  // file order is sampling order

    double total() const {
        double t = 0;
        for (auto& [sym, w] : entries) t += w;
        return t;
    }

    void check() const {
        if (entries.empty()) throw Error(ErrorKind::invalid_table, "slot '" + slot_id + "' has no entries");
        for (auto& [sym, w] : entries)
            if (!std::isfinite(w) || w < 0)
                throw Error(ErrorKind::invalid_table,
                            "slot '" + slot_id + "': weight of '" + sym + "' is not a non-negative number");
        if (!(total() > 0))
            throw Error(ErrorKind::invalid_table, "slot '" + slot_id + "' has no positive weight");
    }
};

// Uniform double in [0,1) from the top 53 bits, identical on every platform
// (std::uniform_real_distribution is implementation-defined).
inline double unit_draw(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline const std::string& weighted_choice(const SlotFrequencyTable& table, std::mt19937_64& rng) {
    table.check();
    double target = unit_draw(rng) * table.total();
    double acc = 0;
    const std::string* last_positive = nullptr;
    for (auto& [sym, w] : table.entries) {
        if (w <= 0) continue;
        last_positive = &sym;
        acc += w;
        if (target < acc) return sym;
    }
    return *last_positive;  // rounding slack at the top end
}

// `[slot <id>]` headers followed by `<symbol>\t<weight>` lines.
inline std::vector<SlotFrequencyTable> parse_tables(std::string_view content) {
    std::vector<SlotFrequencyTable> tables;
    std::size_t lineno = 0;
    for (auto& raw : text::split(content, '\n')) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']' || !text::starts_with(line, "[slot "))
                throw Error(ErrorKind::load, "tables line " + std::to_string(lineno) + ": bad section header",
                            lineno);
            SlotFrequencyTable t;
            t.slot_id = std::string(text::trim(line.substr(6, line.size() - 7)));
            if (t.slot_id.empty())
                throw Error(ErrorKind::load, "tables line " + std::to_string(lineno) + ": empty slot id", lineno);
            tables.push_back(std::move(t));
            continue;
        }
        if (tables.empty())
            throw Error(ErrorKind::load, "tables line " + std::to_string(lineno) + ": entry before any [slot]",
                        lineno);
        auto cols = text::split_ws(line);
        if (cols.size() != 2)
            throw Error(ErrorKind::load,
                        "tables line " + std::to_string(lineno) + ": expected <symbol> <weight>", lineno);
        double w = 0;
        try {
            std::size_t used = 0;
            w = std::stod(cols[1], &used);
            if (used != cols[1].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorKind::load, "tables line " + std::to_string(lineno) + ": bad weight '" + cols[1] + "'",
                        lineno);
        }
        tables.back().entries.emplace_back(cols[0], w);
    }
    return tables;
}

inline std::vector<SlotFrequencyTable> load_tables(const std::filesystem::path& p) {
    return parse_tables(text::read_file(p));
}

enum class SyllableShape { monosyllabic, bisyllabic };

inline std::size_t slot_count(SyllableShape s) { return s == SyllableShape::monosyllabic ? 3 : 6; }

struct Root {
    std::vector<std::string> segments;  // empty slots omitted
    std::vector<std::string> slots;     // one drawn symbol per slot, "" for an empty slot
    SyllableShape shape = SyllableShape::monosyllabic;

    std::string text() const { return text::join(segments, ""); }
};

struct RootGenOptions {
    std::size_t attempts_per_root = 1000;
};

// Draws one symbol per slot, discarding draws that violate phonotactics, that
// re-segment ambiguously (e.g. c+h read back as ch), or that repeat an earlier
// root or one in dedup_against.
inline std::vector<Root> generate_root(const PhonemeInventory& inv,
                                       const std::vector<SlotFrequencyTable>& tables,
                                       SyllableShape shape, std::size_t n, std::uint64_t seed,
                                       const std::unordered_set<std::string>& dedup_against = {},
                                       RootGenOptions opts = {}) {
    if (n == 0) throw Error(ErrorKind::invalid_table, "root count must be at least 1");
    if (tables.size() != slot_count(shape))
        throw Error(ErrorKind::invalid_table,
                    "expected " + std::to_string(slot_count(shape)) + " slot tables, got " +
                        std::to_string(tables.size()));
    for (auto& t : tables) {
        t.check();
        for (auto& [sym, w] : t.entries)
            if (sym != kEmptySlot && !inv.contains(sym))
                throw Error(ErrorKind::invalid_table,
                            "slot '" + t.slot_id + "' names unknown segment '" + sym + "'");
    }

    std::mt19937_64 rng(seed);
    std::unordered_set<std::string> seen;
    std::vector<Root> out;
    const std::size_t budget = opts.attempts_per_root * n;
    std::size_t attempts = 0;
    std::vector<std::string> retok;
    while (out.size() < n) {
        if (attempts >= budget)
            throw Error(ErrorKind::exhaustion,
                        "produced " + std::to_string(out.size()) + " of " + std::to_string(n) +
                            " unique roots after " + std::to_string(attempts) + " attempts",
                        attempts);
        ++attempts;
        Root r;
        r.shape = shape;
        for (auto& t : tables) {
            const std::string& sym = weighted_choice(t, rng);
            if (sym == kEmptySlot) {
                r.slots.emplace_back();
            } else {
                r.slots.push_back(sym);
                r.segments.push_back(sym);
            }
        }
        if (r.segments.empty()) continue;
        if (!validate_phonotactics(r.segments, inv).ok()) continue;
        auto s = r.text();
        if (!inv.tokenize(s, retok) || retok != r.segments) continue;
        if (dedup_against.count(s) || seen.count(s)) continue;
        seen.insert(s);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace forge
