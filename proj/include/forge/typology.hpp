#pragma once
// WALS-style typological profiles, pairwise similarity over shared features,
// nearest neighbours and feature-richness percentile.

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

struct WalsProfile {
    std::string code;
    std::string name;
    std::string genus;
    std::string family;
    std::map<std::string, int> features;  // feature id -> categorical value
};

struct SimilarityResult {
    std::string x, y;
    std::size_t overlap = 0;
    std::size_t matches = 0;
    double similarity = 0;
};

struct BelowThreshold {
    std::string x, y;
    std::size_t overlap = 0;
    std::size_t min_overlap = 0;
};

using SimilarityOutcome = std::variant<SimilarityResult, BelowThreshold>;

class WalsCorpus {
public:
    std::size_t duplicate_rows = 0;  // (language, feature) repeats resolved last-wins

    const std::vector<WalsProfile>& languages() const { return langs_; }
    bool empty() const { return langs_.empty(); }
    std::size_t size() const { return langs_.size(); }

    const WalsProfile* find(std::string_view code) const {
        auto it = index_.find(std::string(code));
        return it == index_.end() ? nullptr : &langs_[it->second];
    }

    const WalsProfile& at(std::string_view code) const {
        if (auto* p = find(code)) return *p;
        throw Error(ErrorKind::missing_resource, "language '" + std::string(code) + "' is not in the corpus");
    }

    WalsProfile& upsert(const std::string& code) {
        auto it = index_.find(code);
        if (it != index_.end()) return langs_[it->second];
        index_[code] = langs_.size();
        langs_.push_back({code, {}, {}, {}, {}});
        return langs_.back();
    }

    void set_value(const std::string& code, const std::string& feature, int value) {
        auto& p = upsert(code);
        auto [it, inserted] = p.features.insert_or_assign(feature, value);
        if (!inserted) ++duplicate_rows;
    }

    // Merge another corpus; its rows win on conflicts.
    void merge(const WalsCorpus& other) {
        for (auto& l : other.langs_) {
            auto& p = upsert(l.code);
            if (!l.name.empty()) p.name = l.name;
            if (!l.genus.empty()) p.genus = l.genus;
            if (!l.family.empty()) p.family = l.family;
            for (auto& [f, v] : l.features) set_value(l.code, f, v);
        }
        duplicate_rows += other.duplicate_rows;
    }

private:
    std::vector<WalsProfile> langs_;
    std::map<std::string, std::size_t> index_;
};

namespace csv {

// One RFC-4180 record; quotes may wrap fields containing commas or quotes.
inline bool parse_record(std::string_view line, std::vector<std::string>& out) {
    out.clear();
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) return false;
    out.push_back(std::move(cur));
    return true;
}

inline std::string quote(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

// Records of a CSV text with the header mapped to column indices.
struct Table {
    std::map<std::string, std::size_t> columns;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)

    std::optional<std::size_t> col(std::initializer_list<std::string_view> names) const {
        for (auto n : names)
            if (auto it = columns.find(std::string(n)); it != columns.end()) return it->second;
        return std::nullopt;
    }
};

inline Table read(std::string_view content, std::string_view what) {
    Table t;
    bool header = false;
    std::size_t lineno = 0;
    std::vector<std::string> fields;
    for (auto raw : text::split(content, '\n')) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (text::trim(raw).empty() || raw[0] == '#') continue;
        if (!parse_record(raw, fields))
            throw Error(ErrorKind::load, std::string(what) + " line " + std::to_string(lineno) + ": unbalanced quote",
                        lineno);
        if (!header) {
            for (std::size_t i = 0; i < fields.size(); ++i) t.columns[std::string(text::trim(fields[i]))] = i;
            header = true;
            continue;
        }
        t.rows.emplace_back(lineno, fields);
    }
    return t;
}

}  // namespace csv

namespace detail {

inline int parse_value(const std::string& s, std::size_t lineno, std::string_view what) {
    try {
        std::size_t used = 0;
        int v = std::stoi(s, &used);
        if (used != s.size() || v <= 0) throw std::invalid_argument("bad");
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorKind::load,
                    std::string(what) + " line " + std::to_string(lineno) + ": value '" + s + "' is not a positive integer",
                    lineno);
    }
}

}  // namespace detail

// Long format: language_code,feature_id,value[,name,genus,family] with a header row.
inline WalsCorpus parse_corpus(std::string_view content) {
    auto t = csv::read(content, "wals");
    auto lc = t.col({"language_code", "Language_ID", "wals_code"});
    auto fc = t.col({"feature_id", "Parameter_ID"});
    auto vc = t.col({"value", "Value"});
    if (!lc || !fc || !vc)
        throw Error(ErrorKind::load, "wals header must name language_code, feature_id and value columns", 1);
    auto nc = t.col({"name", "Name"});
    auto gc = t.col({"genus", "Genus"});
    auto fam = t.col({"family", "Family"});
    WalsCorpus c;
    for (auto& [lineno, f] : t.rows) {
        std::size_t need = std::max({*lc, *fc, *vc});
        if (f.size() <= need)
            throw Error(ErrorKind::load, "wals line " + std::to_string(lineno) + ": too few fields", lineno);
        auto code = std::string(text::trim(f[*lc]));
        auto feat = std::string(text::trim(f[*fc]));
        if (code.empty() || feat.empty())
            throw Error(ErrorKind::load, "wals line " + std::to_string(lineno) + ": empty language or feature",
                        lineno);
        c.set_value(code, feat, detail::parse_value(std::string(text::trim(f[*vc])), lineno, "wals"));
        auto& p = c.upsert(code);
        if (nc && *nc < f.size() && !f[*nc].empty()) p.name = f[*nc];
        if (gc && *gc < f.size() && !f[*gc].empty()) p.genus = f[*gc];
        if (fam && *fam < f.size() && !f[*fam].empty()) p.family = f[*fam];
    }
    return c;
}

// CLDF dataset directory: values.csv plus optional languages.csv.
inline WalsCorpus load_cldf(const std::filesystem::path& dir) {
    WalsCorpus c = parse_corpus(text::read_file(dir / "values.csv"));
    auto langs = dir / "languages.csv";
    if (std::filesystem::exists(langs)) {
        auto t = csv::read(text::read_file(langs), "languages");
        auto id = t.col({"ID"});
        auto nc = t.col({"Name"});
        auto gc = t.col({"Genus"});
        auto fc = t.col({"Family"});
        if (id)
            for (auto& [lineno, f] : t.rows) {
                if (*id >= f.size()) continue;
                auto* p = c.find(f[*id]);
                if (!p) continue;
                auto& m = c.upsert(f[*id]);
                if (nc && *nc < f.size()) m.name = f[*nc];
                if (gc && *gc < f.size()) m.genus = f[*gc];
                if (fc && *fc < f.size()) m.family = f[*fc];
            }
    }
    return c;
}

inline WalsCorpus load_corpus(const std::filesystem::path& p) {
    if (std::filesystem::is_directory(p)) {
        if (std::filesystem::exists(p / "values.csv")) return load_cldf(p);
        if (std::filesystem::exists(p / "cldf" / "values.csv")) return load_cldf(p / "cldf");
        throw Error(ErrorKind::load, "no values.csv under " + p.string());
    }
    return parse_corpus(text::read_file(p));
}

inline SimilarityOutcome similarity(const WalsProfile& x, const WalsProfile& y, std::size_t min_overlap) {
    if (min_overlap < 1) throw Error(ErrorKind::contract_violation, "min_overlap must be at least 1");
    std::size_t overlap = 0, matches = 0;
    auto i = x.features.begin();
    auto j = y.features.begin();
    while (i != x.features.end() && j != y.features.end()) {
        if (i->first < j->first) ++i;
        else if (j->first < i->first) ++j;
        else {
            ++overlap;
            if (i->second == j->second) ++matches;
            ++i;
            ++j;
        }
    }
    if (overlap < min_overlap) return BelowThreshold{x.code, y.code, overlap, min_overlap};
    return SimilarityResult{x.code, y.code, overlap, matches,
                            static_cast<double>(matches) / static_cast<double>(overlap)};
}

// Ranked by similarity, then overlap, then language code; target excluded.
inline std::vector<SimilarityResult> neighbours(const WalsProfile& target, const WalsCorpus& corpus,
                                                std::size_t min_overlap, std::size_t k) {
    if (k < 1) throw Error(ErrorKind::contract_violation, "k must be at least 1");
    std::vector<SimilarityResult> out;
    for (auto& l : corpus.languages()) {
        if (l.code == target.code) continue;
        auto r = similarity(target, l, min_overlap);
        if (auto* s = std::get_if<SimilarityResult>(&r)) out.push_back(*s);
    }
    std::sort(out.begin(), out.end(), [](const SimilarityResult& a, const SimilarityResult& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        if (a.overlap != b.overlap) return a.overlap > b.overlap;
        return a.y < b.y;
    });
    if (out.size() > k) out.resize(k);
    return out;
}

// Fraction of corpus languages (other than the target itself) with strictly
// fewer valued features than the target.
inline double richness_percentile(const WalsProfile& target, const WalsCorpus& corpus) {
    std::size_t n = 0, below = 0;
    for (auto& l : corpus.languages()) {
        if (l.code == target.code) continue;
        ++n;
        if (l.features.size() < target.features.size()) ++below;
    }
    if (n == 0) throw Error(ErrorKind::empty_input, "richness percentile needs a non-empty corpus");
    return static_cast<double>(below) / static_cast<double>(n);
}

}  // namespace forge
