#pragma once
// ROUGE-N / ROUGE-L on token sequences (scores on a 0-100 scale) and
// cross-annotator consistency reports.

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

using Tokens = std::vector<std::string>;

struct PRF {
    double precision = 0;
    double recall = 0;
    double f = 0;
    bool empty_reference = false;  // reference empty, candidate not
};

namespace detail {

inline PRF from_counts(double hit, double cand_total, double ref_total) {
    PRF r;
    r.precision = cand_total > 0 ? 100.0 * hit / cand_total : 0;
    r.recall = ref_total > 0 ? 100.0 * hit / ref_total : 0;
    r.f = (r.precision + r.recall) > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0;
    return r;
}

// Shared conventions for degenerate inputs; returns true when handled.
inline bool degenerate(const Tokens& cand, const Tokens& ref, PRF& out) {
    if (cand.empty() && ref.empty()) {
        out = {100, 100, 100, false};
        return true;
    }
    if (ref.empty()) {
        out = {0, 0, 0, true};
        return true;
    }
    if (cand.empty()) {
        out = {0, 0, 0, false};
        return true;
    }
    return false;
}

inline std::map<Tokens, std::size_t> ngrams(const Tokens& t, std::size_t n) {
    std::map<Tokens, std::size_t> out;
    for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
    return out;
}

}  // namespace detail

// Clipped n-gram overlap. When neither side is long enough to contain an
// n-gram, identical sequences score 100 and different ones 0.
inline PRF rouge_n(const Tokens& cand, const Tokens& ref, std::size_t n) {
    if (n < 1) throw Error(ErrorKind::contract_violation, "ROUGE-N needs n >= 1");
    PRF out;
    if (detail::degenerate(cand, ref, out)) return out;
    auto cg = detail::ngrams(cand, n);
    auto rg = detail::ngrams(ref, n);
    std::size_t ctot = cand.size() >= n ? cand.size() - n + 1 : 0;
    std::size_t rtot = ref.size() >= n ? ref.size() - n + 1 : 0;
    if (ctot == 0 && rtot == 0) {
        double v = cand == ref ? 100 : 0;
        return {v, v, v, false};
    }
    std::size_t hit = 0;
    for (auto& [g, c] : cg)
        if (auto it = rg.find(g); it != rg.end()) hit += std::min(c, it->second);
    return detail::from_counts(static_cast<double>(hit), static_cast<double>(ctot), static_cast<double>(rtot));
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline PRF rouge_l(const Tokens& cand, const Tokens& ref) {
    PRF out;
    if (detail::degenerate(cand, ref, out)) return out;
    return detail::from_counts(static_cast<double>(lcs_length(cand, ref)), static_cast<double>(cand.size()),
                               static_cast<double>(ref.size()));
}

struct RougeScores {
    double r1 = 0, r2 = 0, rl = 0;
};

enum class Granularity { word, morpheme };

inline std::string_view granularity_name(Granularity g) { return g == Granularity::word ? "word" : "morpheme"; }

struct TranslationSet {
    int round = 0;
    std::string annotator_id;
    Granularity granularity = Granularity::word;
    std::map<std::string, Tokens> sentences;  // sentence id -> tokens
};

struct ConsistencyReport {
    RougeScores scores;
    std::size_t pairs = 0;
    std::size_t sentences = 0;
};

// F scores per unordered annotator pair, averaged over sentences, then over pairs.
inline ConsistencyReport consistency_report(const std::vector<TranslationSet>& sets) {
    if (sets.size() < 2) throw Error(ErrorKind::contract_violation, "consistency needs at least 2 annotators");
    std::set<std::string> ids;
    for (auto& s : sets)
        for (auto& [id, t] : s.sentences) ids.insert(id);
    std::vector<std::string> missing;
    for (auto& s : sets)
        for (auto& id : ids)
            if (!s.sentences.count(id)) missing.push_back(s.annotator_id + ":" + id);
    if (!missing.empty())
        throw Error(ErrorKind::alignment, "sentence ids not covered by every annotator: " + text::join(missing, ", "));
    if (ids.empty()) throw Error(ErrorKind::empty_input, "no sentences to compare");

    ConsistencyReport rep;
    rep.sentences = ids.size();
    for (std::size_t a = 0; a < sets.size(); ++a)
        for (std::size_t b = a + 1; b < sets.size(); ++b) {
            RougeScores pair;
            for (auto& id : ids) {
                auto& x = sets[a].sentences.at(id);
                auto& y = sets[b].sentences.at(id);
                pair.r1 += rouge_n(x, y, 1).f;
                pair.r2 += rouge_n(x, y, 2).f;
                pair.rl += rouge_l(x, y).f;
            }
            double n = static_cast<double>(ids.size());
            rep.scores.r1 += pair.r1 / n;
            rep.scores.r2 += pair.r2 / n;
            rep.scores.rl += pair.rl / n;
            ++rep.pairs;
        }
    double p = static_cast<double>(rep.pairs);
    rep.scores.r1 /= p;
    rep.scores.r2 /= p;
    rep.scores.rl /= p;
    return rep;
}

// Corpus lines: <sentence_id>\t<annotator_id>\t<round>\t<granularity>\t<tokens>.
// Returns the sets of one round and granularity, ordered by annotator id.
inline std::vector<TranslationSet> parse_rouge_corpus(std::string_view content, int round, Granularity g) {
    std::map<std::string, TranslationSet> by_annotator;
    std::size_t lineno = 0;
    for (auto raw : text::split(content, '\n')) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (text::trim(raw).empty() || raw[0] == '#') continue;
        auto cols = text::split(raw, '\t');
        auto fail = [&](const std::string& m) {
            return Error(ErrorKind::load, "corpus line " + std::to_string(lineno) + ": " + m, lineno);
        };
        if (cols.size() != 5) throw fail("expected 5 tab-separated columns");
        int r = 0;
        try {
            r = std::stoi(cols[2]);
        } catch (const std::exception&) {
            throw fail("bad round '" + cols[2] + "'");
        }
        Granularity lg;
        if (cols[3] == "word") lg = Granularity::word;
        else if (cols[3] == "morpheme") lg = Granularity::morpheme;
        else throw fail("granularity must be word or morpheme");
        if (r != round || lg != g) continue;
        auto& set = by_annotator[cols[1]];
        set.annotator_id = cols[1];
        set.round = r;
        set.granularity = lg;
        if (set.sentences.count(cols[0])) throw fail("duplicate sentence '" + cols[0] + "' for " + cols[1]);
        set.sentences[cols[0]] = text::split_ws(cols[4]);
    }
    std::vector<TranslationSet> out;
    for (auto& [k, v] : by_annotator) out.push_back(std::move(v));
    return out;
}

}  // namespace forge
