#pragma once
// Dictionary entries keyed by underlying form, the functional-morpheme
// inventory, derivation, compounding and sourcing reports.

#include <algorithm>
#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/rules.hpp"
#include "forge/text.hpp"
#include "forge/underlying.hpp"

namespace forge {

enum class Sourcing { native, derived, compound, opaque_loan, transparent_loan };
enum class Honorific { ordinary, honorific };

inline constexpr std::array<Sourcing, 5> kAllSourcing = {Sourcing::native, Sourcing::derived, Sourcing::compound,
                                                        Sourcing::opaque_loan, Sourcing::transparent_loan};

inline std::string_view sourcing_name(Sourcing s) {
    switch (s) {
        case Sourcing::native: return "native";
        case Sourcing::derived: return "derived";
        case Sourcing::compound: return "compound";
        case Sourcing::opaque_loan: return "opaque_loan";
        case Sourcing::transparent_loan: return "transparent_loan";
    }
    return "?";
}

inline std::optional<Sourcing> parse_sourcing(std::string_view s) {
    for (auto c : kAllSourcing)
        if (sourcing_name(c) == s) return c;
    return std::nullopt;
}

struct LexEntry {
    std::string underlying;
    std::string citation;
    std::string gloss;
    std::string pos;
    Honorific honorific = Honorific::ordinary;
    Sourcing sourcing = Sourcing::native;
    std::string etymology;  // never leaves through the model-facing export
    bool homonym = false;
    bool citation_override = false;

    // English headword: the gloss up to the first comma or parenthesis.
    std::string headword() const {
        auto cut = gloss.find_first_of(",(");
        return std::string(text::trim(std::string_view(gloss).substr(0, cut)));
    }

    // Single bare root, e.g. "cak" (not "cak -mA4" or "kityb + cog").
    bool is_bare_root() const {
        try {
            auto uf = parse_underlying(underlying);
            return uf.morphemes.size() == 1 && uf.morphemes[0].boundary == Boundary::root;
        } catch (const Error&) {
            return false;
        }
    }

    bool operator==(const LexEntry& o) const {
        return underlying == o.underlying && citation == o.citation && gloss == o.gloss && pos == o.pos &&
               honorific == o.honorific && sourcing == o.sourcing && etymology == o.etymology &&
               homonym == o.homonym && citation_override == o.citation_override;
    }
};

// An affix or clitic with ordering slot and part-of-speech behaviour.
struct FunctionalMorpheme {
    Morpheme morpheme;           // form, boundary, gloss_tag
    int slot = 0;                // strictly increasing within a word
    std::set<std::string> attaches;  // "*" = any
    std::string yields = "*";        // "*" = unchanged

    bool accepts(const std::string& pos) const { return attaches.count("*") || attaches.count(pos); }
    std::string result_pos(const std::string& pos) const { return yields == "*" ? pos : yields; }
};

inline constexpr std::string_view kLexiconHeader = "underlying\tcitation\tgloss\tpos\thonorific\tsourcing\tetymology";
inline constexpr std::string_view kModelHeader = "underlying\tcitation\tgloss\tpos\thonorific\tsourcing";

class Lexicon {
public:
    std::vector<LexEntry> entries;
    std::vector<FunctionalMorpheme> functional;

    void add(LexEntry e) {
        if (e.underlying.empty()) throw Error(ErrorKind::load, "entry with empty underlying form");
        parse_underlying(e.underlying);  // must be valid notation
        for (auto& x : entries)
            if (x.underlying == e.underlying && !(x.homonym && e.homonym))
                throw Error(ErrorKind::load,
                            "duplicate underlying form '" + e.underlying + "' (flag both entries as homonym)");
        entries.push_back(std::move(e));
    }

    std::vector<const LexEntry*> by_underlying(std::string_view key) const {
        std::vector<const LexEntry*> out;
        for (auto& e : entries)
            if (e.underlying == key) out.push_back(&e);
        return out;
    }

    std::vector<const LexEntry*> by_citation(std::string_view key) const {
        std::vector<const LexEntry*> out;
        for (auto& e : entries)
            if (e.citation == key) out.push_back(&e);
        return out;
    }

    const FunctionalMorpheme* find_functional(std::string_view form, Boundary b) const {
        for (auto& f : functional)
            if (f.morpheme.form == form && f.morpheme.boundary == b) return &f;
        return nullptr;
    }

    // Full or model-facing TSV, stably sorted by underlying form.
    std::string export_tsv(bool model_facing = false) const {
        std::vector<const LexEntry*> sorted;
        for (auto& e : entries) sorted.push_back(&e);
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const LexEntry* a, const LexEntry* b) { return a->underlying < b->underlying; });
        bool any_flags = std::any_of(entries.begin(), entries.end(),
                                     [](const LexEntry& e) { return e.homonym || e.citation_override; });
        std::string out(model_facing ? kModelHeader : kLexiconHeader);
        if (!model_facing && any_flags) out += "\tflags";
        out += '\n';
        for (auto* e : sorted) {
            out += e->underlying + '\t' + e->citation + '\t' + e->gloss + '\t' + e->pos + '\t' +
                   (e->honorific == Honorific::honorific ? "honorific" : "ordinary") + '\t' +
                   std::string(sourcing_name(e->sourcing));
            if (!model_facing) {
                out += '\t' + e->etymology;
                if (any_flags) {
                    std::vector<std::string> f;
                    if (e->homonym) f.push_back("homonym");
                    if (e->citation_override) f.push_back("citation-override");
                    out += '\t' + text::join(f, ",");
                }
            }
            out += '\n';
        }
        return out;
    }

    static Lexicon parse(std::string_view lexicon_tsv, std::string_view morphemes_tsv = {}) {
        Lexicon lx;
        std::size_t lineno = 0;
        for (auto& raw : text::split(lexicon_tsv, '\n')) {
            ++lineno;
            std::string line = raw;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (text::trim(line).empty() || line[0] == '#') continue;
            if (text::starts_with(line, "underlying\t")) continue;
            auto cols = text::split(line, '\t');
            auto fail = [&](const std::string& m) {
                return Error(ErrorKind::load, "lexicon line " + std::to_string(lineno) + ": " + m, lineno);
            };
            if (cols.size() < 6 || cols.size() > 8) throw fail("expected 6 to 8 tab-separated columns");
            LexEntry e;
            e.underlying = cols[0];
            e.citation = cols[1];
            e.gloss = cols[2];
            e.pos = cols[3];
            if (cols[4] == "honorific") e.honorific = Honorific::honorific;
            else if (cols[4] == "ordinary") e.honorific = Honorific::ordinary;
            else throw fail("honorific must be ordinary or honorific");
            auto s = parse_sourcing(cols[5]);
            if (!s) throw fail("unknown sourcing category '" + cols[5] + "'");
            e.sourcing = *s;
            if (cols.size() > 6) e.etymology = cols[6];
            if (cols.size() > 7)
                for (auto& f : text::split(cols[7], ',')) {
                    auto t = text::trim(f);
                    if (t == "homonym") e.homonym = true;
                    else if (t == "citation-override") e.citation_override = true;
                    else if (!t.empty()) throw fail("unknown flag '" + std::string(t) + "'");
                }
            try {
                lx.add(std::move(e));
            } catch (const Error& err) {
                throw fail(err.what());
            }
        }
        lx.functional = parse_morphemes(morphemes_tsv);
        return lx;
    }

    // Morphemes TSV: form, boundary, tag, slot, attaches (comma list or *), yields.
    static std::vector<FunctionalMorpheme> parse_morphemes(std::string_view tsv) {
        std::vector<FunctionalMorpheme> out;
        std::size_t lineno = 0;
        for (auto& raw : text::split(tsv, '\n')) {
            ++lineno;
            std::string line = raw;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (text::trim(line).empty() || line[0] == '#' || text::starts_with(line, "form\t")) continue;
            auto cols = text::split(line, '\t');
            auto fail = [&](const std::string& m) {
                return Error(ErrorKind::load, "morphemes line " + std::to_string(lineno) + ": " + m, lineno);
            };
            if (cols.size() != 6) throw fail("expected 6 tab-separated columns");
            FunctionalMorpheme f;
            f.morpheme.form = cols[0];
            if (!parse_boundary_name(cols[1], f.morpheme.boundary) || f.morpheme.boundary == Boundary::root ||
                f.morpheme.boundary == Boundary::none)
                throw fail("bad boundary '" + cols[1] + "'");
            if (cols[2].empty()) throw fail("functional morpheme needs a gloss tag");
            f.morpheme.gloss_tag = cols[2];
            try {
                f.slot = std::stoi(cols[3]);
            } catch (const std::exception&) {
                throw fail("bad slot '" + cols[3] + "'");
            }
            for (auto& a : text::split(cols[4], ','))
                if (auto t = text::trim(a); !t.empty()) f.attaches.insert(std::string(t));
            if (f.attaches.empty()) throw fail("attaches is empty");
            f.yields = cols[5];
            if ((f.morpheme.boundary == Boundary::reduplicant) != (f.morpheme.form == kRed))
                throw fail("RED must be the reduplicant and only the reduplicant");
            out.push_back(std::move(f));
        }
        return out;
    }

    static Lexicon load(const std::filesystem::path& lexicon,
                        const std::optional<std::filesystem::path>& morphemes = std::nullopt) {
        std::string m;
        if (morphemes) m = text::read_file(*morphemes);
        else if (auto sib = lexicon.parent_path() / "morphemes.tsv"; std::filesystem::exists(sib))
            m = text::read_file(sib);
        return parse(text::read_file(lexicon), m);
    }

    // Entries whose citation disagrees with the cascade, as "underlying: expected X, derived Y".
    // Loans and entries flagged citation-override are skipped.
    std::vector<std::string> check_citations(const RuleCascade& rc) const {
        std::vector<std::string> problems;
        for (auto& e : entries) {
            if (e.citation_override || e.sourcing == Sourcing::opaque_loan ||
                e.sourcing == Sourcing::transparent_loan)
                continue;
            try {
                auto got = generate(e.underlying, rc).text;
                if (got != e.citation)
                    problems.push_back(e.underlying + ": citation '" + e.citation + "', derived '" + got + "'");
            } catch (const Error& err) {
                problems.push_back(e.underlying + ": " + err.what());
            }
        }
        return problems;
    }
};

namespace detail {

// Insert an affix into an underlying form at its zone.
inline UnderlyingForm attach(UnderlyingForm uf, const Morpheme& affix) {
    auto& ms = uf.morphemes;
    auto zone = zone_of(affix.boundary);
    auto it = ms.begin();
    if (affix.boundary == Boundary::proclitic) {
        it = ms.begin();
    } else if (affix.boundary == Boundary::prefix) {
        while (it != ms.end() && zone_of(it->boundary) < zone) ++it;
    } else {
        it = ms.end();
        while (it != ms.begin() && zone_of(std::prev(it)->boundary) > zone) --it;
    }
    ms.insert(it, affix);
    return uf;
}

}  // namespace detail

// Candidate entry for stem + affix; the gloss is left for curation.
inline LexEntry derive(const LexEntry& stem, const Morpheme& affix, const Lexicon& lx, const RuleCascade& rc) {
    const FunctionalMorpheme* f = lx.find_functional(affix.form, affix.boundary);
    if (!f)
        throw Error(ErrorKind::derivation_refused,
                    "affix '" + affix.notation() + "' is not in the functional-morpheme inventory");
    if (f->morpheme.boundary == Boundary::linker)
        throw Error(ErrorKind::derivation_refused, "linkers do not derive lexemes");
    if (!f->accepts(stem.pos))
        throw Error(ErrorKind::derivation_refused, "affix '" + affix.notation() + "' does not attach to pos '" +
                                                       stem.pos + "' of '" + stem.underlying + "'");
    auto uf = detail::attach(parse_underlying(stem.underlying), f->morpheme);
    check_structure(uf);
    LexEntry out;
    out.underlying = uf.notation();
    out.citation = generate(uf, rc).text;
    out.pos = f->result_pos(stem.pos);
    out.honorific = stem.honorific;
    out.sourcing = Sourcing::derived;
    return out;
}

// Compound candidate: parts joined by "+", head = last part.
inline LexEntry compound(const std::vector<LexEntry>& parts, const RuleCascade& rc) {
    if (parts.size() < 2)
        throw Error(ErrorKind::arity, "compound needs at least 2 parts, got " + std::to_string(parts.size()));
    std::vector<std::string> forms;
    for (auto& p : parts) {
        if (!p.is_bare_root())
            throw Error(ErrorKind::derivation_refused, "compound part '" + p.underlying + "' is not a bare root");
        forms.push_back(p.underlying);
    }
    LexEntry out;
    out.underlying = text::join(forms, " + ");
    out.citation = generate(out.underlying, rc).text;
    out.pos = parts.back().pos;
    out.honorific = parts.back().honorific;
    out.sourcing = Sourcing::compound;
    return out;
}

struct SourcingRow {
    Sourcing category;
    std::size_t count = 0;
    double percent = 0;  // unrounded
};

struct SourcingReport {
    std::vector<SourcingRow> rows;  // fixed category order
    std::size_t total = 0;
};

inline SourcingReport sourcing_report(const std::map<Sourcing, std::size_t>& counts) {
    SourcingReport r;
    for (auto c : kAllSourcing) {
        auto it = counts.find(c);
        r.total += it == counts.end() ? 0 : it->second;
    }
    if (r.total == 0) throw Error(ErrorKind::empty_lexicon, "sourcing report on an empty lexicon");
    for (auto c : kAllSourcing) {
        auto it = counts.find(c);
        std::size_t n = it == counts.end() ? 0 : it->second;
        r.rows.push_back({c, n, 100.0 * static_cast<double>(n) / static_cast<double>(r.total)});
    }
    return r;
}

inline SourcingReport sourcing_report(const Lexicon& lx) {
    std::map<Sourcing, std::size_t> counts;
    for (auto& e : lx.entries) ++counts[e.sourcing];
    return sourcing_report(counts);
}

}  // namespace forge
