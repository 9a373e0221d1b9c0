#pragma once
// Surface-to-underlying analysis by generate-and-test, interlinear glossing
// and lexicon lookup by surface form.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/lexicon.hpp"
#include "forge/rules.hpp"
#include "forge/text.hpp"
#include "forge/underlying.hpp"

namespace forge {

struct AnalyzeLimits {
    std::size_t max_affixes = 8;     // non-root morphemes per word
    std::size_t max_candidates = 50;
    std::size_t max_compound_parts = 2;
    // Filter affix chains by their realisation next to the bare core before
    // testing full combinations. Assumes left and right affix material do not
    // interact; set false to test every combination.
    bool prune = true;
};

namespace detail {

struct Chain {
    std::vector<const FunctionalMorpheme*> items;
    std::string pos;  // part of speech after the chain (suffix side)
};

struct WordCandidate {
    std::vector<Morpheme> morphemes;  // may start with a linker
    std::string final_pos;
    std::size_t weight = 0;           // non-zero morphemes
};

// All strictly slot-increasing chains over `pool`, with pos threading.
inline void enumerate_chains(const std::vector<const FunctionalMorpheme*>& pool, std::size_t start,
                             Chain& cur, std::size_t max_len, bool thread_pos, std::vector<Chain>& out) {
    out.push_back(cur);
    if (cur.items.size() >= max_len) return;
    for (std::size_t i = start; i < pool.size(); ++i) {
        auto* f = pool[i];
        if (!cur.items.empty() && f->slot <= cur.items.back()->slot) continue;
        if (thread_pos && !f->accepts(cur.pos)) continue;
        auto saved = cur.pos;
        if (thread_pos) cur.pos = f->result_pos(cur.pos);
        cur.items.push_back(f);
        enumerate_chains(pool, i + 1, cur, max_len, thread_pos, out);
        cur.items.pop_back();
        cur.pos = saved;
    }
}

inline std::vector<std::string> chars(const std::string& s) { return text::utf8_chars(s); }

inline bool ends_with_chars(const std::vector<std::string>& s, const std::vector<std::string>& tail) {
    return tail.size() <= s.size() && std::equal(tail.rbegin(), tail.rend(), s.rbegin());
}

inline bool starts_with_chars(const std::vector<std::string>& s, const std::vector<std::string>& head) {
    return head.size() <= s.size() && std::equal(head.begin(), head.end(), s.begin());
}

inline std::size_t morpheme_weight(const std::vector<Morpheme>& ms) {
    return static_cast<std::size_t>(
        std::count_if(ms.begin(), ms.end(), [](const Morpheme& m) { return !m.is_zero(); }));
}

inline bool try_generate(const std::vector<Morpheme>& ms, const RuleCascade& rc, std::string& out) {
    try {
        out = generate(UnderlyingForm{ms}, rc).text;
        return true;
    } catch (const Error&) {
        return false;
    }
}

struct Core {
    std::vector<Morpheme> roots;
    std::string pos;
};

}  // namespace detail

// Candidate underlying forms whose generated surface equals `surface`,
// ranked by morpheme count then notation.
inline std::vector<UnderlyingForm> analyze(std::string_view surface, const RuleCascade& rc, const Lexicon& lx,
                                           AnalyzeLimits limits = {}) {
    using namespace detail;
    if (limits.max_candidates == 0 || limits.max_compound_parts == 0)
        throw Error(ErrorKind::contract_violation, "analysis limits must be positive");
    const auto& inv = rc.inventory();
    auto words = text::split_ws(surface);
    if (words.empty()) throw Error(ErrorKind::empty_input, "nothing to analyze");
    for (auto& w : words)
        for (auto& part : text::split(w, '-'))
            if (!part.empty()) inv.tokenize_or_throw(part);

    // Lexical roots with their parts of speech.
    std::vector<std::pair<std::string, std::string>> roots;
    for (auto& e : lx.entries)
        if (e.is_bare_root()) {
            std::pair<std::string, std::string> r{e.underlying, e.pos};
            if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
        }

    std::vector<const FunctionalMorpheme*> procl, pref, suff, encl, linkers;
    for (auto& f : lx.functional) {
        if (f.morpheme.is_zero()) continue;  // unobservable; never proposed
        switch (f.morpheme.boundary) {
            case Boundary::proclitic: procl.push_back(&f); break;
            case Boundary::prefix: pref.push_back(&f); break;
            case Boundary::suffix:
            case Boundary::reduplicant: suff.push_back(&f); break;
            case Boundary::enclitic: encl.push_back(&f); break;
            case Boundary::linker: linkers.push_back(&f); break;
            default: break;
        }
    }
    auto by_slot = [](const FunctionalMorpheme* a, const FunctionalMorpheme* b) { return a->slot < b->slot; };
    for (auto* v : {&procl, &pref, &suff, &encl}) std::stable_sort(v->begin(), v->end(), by_slot);

    std::vector<std::vector<WordCandidate>> per_word(words.size());
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        const auto word_chars = chars(words[wi]);
        std::size_t hyphens = static_cast<std::size_t>(std::count(words[wi].begin(), words[wi].end(), '-'));
        std::size_t nparts = hyphens + 1;
        if (nparts > limits.max_compound_parts) continue;

        // Cores: one root, or a compound of nparts roots.
        std::vector<Core> cores;
        std::vector<std::vector<std::size_t>> combos{{}};
        for (std::size_t k = 0; k < nparts; ++k) {
            std::vector<std::vector<std::size_t>> next;
            for (auto& c : combos)
                for (std::size_t r = 0; r < roots.size(); ++r) {
                    auto c2 = c;
                    c2.push_back(r);
                    next.push_back(std::move(c2));
                }
            combos = std::move(next);
        }
        for (auto& c : combos) {
            Core core;
            for (std::size_t k = 0; k < c.size(); ++k) {
                Morpheme m;
                m.form = roots[c[k]].first;
                m.boundary = Boundary::root;
                m.compound_joint = k > 0;
                core.roots.push_back(m);
            }
            core.pos = roots[c.back()].second;
            cores.push_back(std::move(core));
        }

        for (auto& core : cores) {
            std::string bare;
            if (!try_generate(core.roots, rc, bare)) continue;
            const auto bare_chars = chars(bare);
            if (nparts > 1) {
                auto bparts = text::split(bare, '-');
                auto sparts = text::split(words[wi], '-');
                if (bparts.size() != sparts.size()) continue;
                if (limits.prune) {
                    // Affixes only extend the outer edges of a compound.
                    bool ok = true;
                    for (std::size_t k = 0; k < bparts.size() && ok; ++k) {
                        auto b = chars(bparts[k]), s = chars(sparts[k]);
                        if (k == 0 && k + 1 < bparts.size()) ok = ends_with_chars(s, b);
                        else if (k + 1 == bparts.size() && k > 0) ok = starts_with_chars(s, b);
                        else ok = (b == s);
                    }
                    if (!ok) continue;
                }
            }

            // Right side: suffix chain (pos-threaded) then enclitic chain.
            std::vector<Chain> suffix_chains, enclitic_chains;
            Chain c0;
            c0.pos = core.pos;
            enumerate_chains(suff, 0, c0, limits.max_affixes, true, suffix_chains);
            Chain e0;
            enumerate_chains(encl, 0, e0, limits.max_affixes, false, enclitic_chains);

            struct Side {
                std::vector<Morpheme> ms;
                std::string pos;
            };
            std::vector<Side> rights;
            for (auto& sc : suffix_chains)
                for (auto& ec : enclitic_chains) {
                    if (sc.items.size() + ec.items.size() > limits.max_affixes) continue;
                    Side s;
                    s.pos = sc.pos;
                    for (auto* f : sc.items) s.ms.push_back(f->morpheme);
                    for (auto* f : ec.items) s.ms.push_back(f->morpheme);
                    if (limits.prune && !s.ms.empty()) {
                        auto ms = core.roots;
                        ms.insert(ms.end(), s.ms.begin(), s.ms.end());
                        std::string out;
                        if (!try_generate(ms, rc, out)) continue;
                        auto oc = chars(out);
                        std::size_t lcp = 0;
                        while (lcp < oc.size() && lcp < bare_chars.size() && oc[lcp] == bare_chars[lcp]) ++lcp;
                        std::vector<std::string> tail(oc.begin() + static_cast<long>(lcp), oc.end());
                        if (!ends_with_chars(word_chars, tail)) continue;
                    }
                    rights.push_back(std::move(s));
                }

            // Left side: optional linker (not on the first word), proclitics, prefixes.
            std::vector<Chain> pc, fc;
            Chain p0;
            enumerate_chains(procl, 0, p0, limits.max_affixes, false, pc);
            Chain f0;
            enumerate_chains(pref, 0, f0, limits.max_affixes, false, fc);
            std::vector<const FunctionalMorpheme*> lead{nullptr};
            if (wi > 0) lead.insert(lead.end(), linkers.begin(), linkers.end());
            std::vector<std::vector<Morpheme>> lefts;
            for (auto* lk : lead)
                for (auto& p : pc)
                    for (auto& f : fc) {
                        std::size_t n = (lk ? 1 : 0) + p.items.size() + f.items.size();
                        if (n > limits.max_affixes) continue;
                        bool ok = true;
                        for (auto* x : f.items) ok = ok && x->accepts(core.pos);
                        if (!ok) continue;
                        std::vector<Morpheme> ms;
                        if (lk) ms.push_back(lk->morpheme);
                        for (auto* x : p.items) ms.push_back(x->morpheme);
                        for (auto* x : f.items) ms.push_back(x->morpheme);
                        if (limits.prune && !ms.empty()) {
                            auto full = ms;
                            full.insert(full.end(), core.roots.begin(), core.roots.end());
                            std::string out;
                            if (!try_generate(full, rc, out)) continue;
                            auto oc = chars(out);
                            // Strip a leading space left by a linker's word edge.
                            while (!oc.empty() && oc.front() == " ") oc.erase(oc.begin());
                            std::size_t lcs = 0;
                            while (lcs < oc.size() && lcs < bare_chars.size() &&
                                   oc[oc.size() - 1 - lcs] == bare_chars[bare_chars.size() - 1 - lcs])
                                ++lcs;
                            std::vector<std::string> head(oc.begin(), oc.end() - static_cast<long>(lcs));
                            if (!starts_with_chars(word_chars, head)) continue;
                        }
                        lefts.push_back(std::move(ms));
                    }

            for (auto& l : lefts)
                for (auto& r : rights) {
                    if (l.size() + r.ms.size() > limits.max_affixes) continue;
                    std::vector<Morpheme> ms = l;
                    ms.insert(ms.end(), core.roots.begin(), core.roots.end());
                    ms.insert(ms.end(), r.ms.begin(), r.ms.end());
                    std::string out;
                    if (!try_generate(ms, rc, out)) continue;
                    if (text::trim(out) != words[wi]) continue;
                    per_word[wi].push_back({std::move(ms), r.pos, 0});
                }
        }
        for (auto& c : per_word[wi]) c.weight = morpheme_weight(c.morphemes);
        if (per_word[wi].empty()) return {};
    }

    // Join words: word i+1 must open with a linker that attaches to word i.
    std::vector<std::vector<Morpheme>> combined;
    std::vector<std::string> combined_pos;
    for (auto& c : per_word[0]) {
        if (!c.morphemes.empty() && c.morphemes.front().boundary == Boundary::linker) continue;
        combined.push_back(c.morphemes);
        combined_pos.push_back(c.final_pos);
    }
    for (std::size_t wi = 1; wi < words.size(); ++wi) {
        std::vector<std::vector<Morpheme>> next;
        std::vector<std::string> next_pos;
        for (std::size_t a = 0; a < combined.size(); ++a)
            for (auto& c : per_word[wi]) {
                if (c.morphemes.empty() || c.morphemes.front().boundary != Boundary::linker) continue;
                auto* lk = lx.find_functional(c.morphemes.front().form, Boundary::linker);
                if (!lk || !lk->accepts(combined_pos[a])) continue;
                auto ms = combined[a];
                ms.insert(ms.end(), c.morphemes.begin(), c.morphemes.end());
                next.push_back(std::move(ms));
                next_pos.push_back(c.final_pos);
            }
        combined = std::move(next);
        combined_pos = std::move(next_pos);
    }

    // Forward verification of the whole form, then ranking.
    const std::string target = text::join(words, " ");
    std::vector<std::pair<std::size_t, std::string>> keyed;
    std::map<std::string, UnderlyingForm> by_notation;
    for (auto& ms : combined) {
        UnderlyingForm uf{ms};
        try {
            check_structure(uf);
            if (generate(uf, rc).text != target) continue;
        } catch (const Error&) {
            continue;
        }
        auto key = uf.notation();
        if (by_notation.count(key)) continue;
        keyed.emplace_back(morpheme_weight(ms), key);
        by_notation.emplace(key, std::move(uf));
    }
    std::sort(keyed.begin(), keyed.end());
    std::vector<UnderlyingForm> out;
    for (auto& [w, key] : keyed) {
        if (out.size() >= limits.max_candidates) break;
        auto uf = by_notation.at(key);
        for (auto& m : uf.morphemes)
            if (m.boundary != Boundary::root)
                if (auto* f = lx.find_functional(m.form, m.boundary)) m.gloss_tag = f->morpheme.gloss_tag;
        out.push_back(std::move(uf));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Glossing

enum class GlossStyle {
    spaced,   // "2SG= EZ= answer -PROG -NMLS -GEN =at"
    compact,  // "child=TOP", "live-INF=want"
};

inline std::string gloss(const UnderlyingForm& uf, const Lexicon& lx, GlossStyle style = GlossStyle::spaced) {
    std::vector<std::string> parts;
    for (auto& m : uf.morphemes) {
        std::string g;
        if (m.boundary == Boundary::root) {
            const LexEntry* hit = nullptr;
            for (auto* e : lx.by_underlying(m.form))
                if (e->is_bare_root()) {
                    hit = e;
                    break;
                }
            if (!hit) throw Error(ErrorKind::missing_lexeme, "no lexicon entry for root '" + m.form + "'");
            g = hit->headword();
            if (style == GlossStyle::compact) std::replace(g.begin(), g.end(), ' ', '.');
        } else {
            g = m.gloss_tag;
            if (g.empty())
                if (auto* f = lx.find_functional(m.form, m.boundary)) g = f->morpheme.gloss_tag;
            if (g.empty())
                throw Error(ErrorKind::missing_lexeme, "no gloss tag for morpheme '" + m.notation() + "'");
        }
        switch (m.boundary) {
            case Boundary::proclitic: g += "="; break;
            case Boundary::prefix: g += "-"; break;
            case Boundary::suffix:
            case Boundary::reduplicant: g = "-" + g; break;
            case Boundary::enclitic: g = "=" + g; break;
            case Boundary::linker: g = "-" + g + "="; break;
            case Boundary::root:
                if (m.compound_joint) g = (style == GlossStyle::spaced ? "+ " : "+") + g;
                break;
            default: break;
        }
        parts.push_back(g);
    }
    return text::join(parts, style == GlossStyle::spaced ? " " : "");
}

// ---------------------------------------------------------------------------
// Lookup

enum class LookupMode { by_underlying, by_citation, by_surface };

// by_surface returns entries whose underlying form is a root of, or the whole
// of, some analysis of the key.
inline std::vector<LexEntry> lookup(std::string_view key, LookupMode mode, const Lexicon& lx,
                                    const RuleCascade* rc = nullptr, AnalyzeLimits limits = {}) {
    std::vector<LexEntry> out;
    if (mode == LookupMode::by_underlying) {
        for (auto* e : lx.by_underlying(key)) out.push_back(*e);
        return out;
    }
    if (mode == LookupMode::by_citation) {
        for (auto* e : lx.by_citation(key)) out.push_back(*e);
        return out;
    }
    if (!rc) throw Error(ErrorKind::contract_violation, "surface lookup needs a rule cascade");
    std::set<std::string> lemmas;
    for (auto& uf : analyze(key, *rc, lx, limits)) {
        lemmas.insert(uf.notation());
        for (auto* r : uf.roots()) lemmas.insert(r->form);
    }
    for (auto& e : lx.entries)
        if (lemmas.count(e.underlying)) out.push_back(e);
    return out;
}

}  // namespace forge
