#pragma once
// Human-verification labels over em-correct model outputs; strict, moderate
// and lenient verified accuracy plus per-aspect label distributions.

#include <array>
#include <filesystem>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

enum class AspectLabel { crt_com, crt_incom, incrt_com, incrt_incom };

inline constexpr std::array<AspectLabel, 4> kAllLabels = {AspectLabel::crt_com, AspectLabel::crt_incom,
                                                          AspectLabel::incrt_com, AspectLabel::incrt_incom};

inline std::string_view label_name(AspectLabel l) {
    switch (l) {
        case AspectLabel::crt_com: return "Crt+Com+";
        case AspectLabel::crt_incom: return "Crt+Com-";
        case AspectLabel::incrt_com: return "Crt-Com+";
        case AspectLabel::incrt_incom: return "Crt-Com-";
    }
    return "?";
}

// Accepts "Crt+Com-", "Crt+&Com-" and the Unicode minus sign.
inline std::optional<AspectLabel> parse_label(std::string_view raw) {
    std::string s;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (raw.compare(i, 3, "\xE2\x88\x92") == 0) {  // U+2212
            s += '-';
            i += 2;
        } else if (raw[i] == '&' || raw[i] == ' ') {
            continue;
        } else {
            s += raw[i];
        }
    }
    for (auto l : kAllLabels)
        if (s == label_name(l)) return l;
    return std::nullopt;
}

inline bool is_correct(AspectLabel l) { return l == AspectLabel::crt_com || l == AspectLabel::crt_incom; }

struct VerificationRecord {
    std::string instance_id;
    std::string system_id;
    bool em_correct = true;
    AspectLabel parsing = AspectLabel::crt_com;
    AspectLabel q_meaning = AspectLabel::crt_com;
    AspectLabel o_meaning = AspectLabel::crt_com;
};

inline bool satisfies_shv(const VerificationRecord& r) {
    return r.parsing == AspectLabel::crt_com && r.q_meaning == AspectLabel::crt_com &&
           r.o_meaning == AspectLabel::crt_com;
}
inline bool satisfies_lhv(const VerificationRecord& r) { return is_correct(r.q_meaning) && is_correct(r.o_meaning); }
inline bool satisfies_mhv(const VerificationRecord& r) { return r.parsing == AspectLabel::crt_com && satisfies_lhv(r); }

struct VerifiedMetrics {
    double shv = 0, mhv = 0, lhv = 0, em = 0;
    std::size_t n_total = 0;
};

// With allow_em_incorrect, em-incorrect records are tolerated but never counted.
inline VerifiedMetrics compute_metrics(const std::vector<VerificationRecord>& records, std::size_t n_total,
                                       bool allow_em_incorrect = false) {
    if (n_total == 0) throw Error(ErrorKind::contract_violation, "n_total must be positive");
    if (records.size() > n_total)
        throw Error(ErrorKind::contract_violation, std::to_string(records.size()) + " records exceed n_total " +
                                                       std::to_string(n_total));
    std::size_t s = 0, m = 0, l = 0, em = 0;
    for (auto& r : records) {
        if (!r.em_correct) {
            if (allow_em_incorrect) continue;
            throw Error(ErrorKind::contract_violation, "record " + r.instance_id + " is not em-correct");
        }
        ++em;
        s += satisfies_shv(r);
        m += satisfies_mhv(r);
        l += satisfies_lhv(r);
    }
    double n = static_cast<double>(n_total);
    return {s / n, m / n, l / n, static_cast<double>(em) / n, n_total};
}

struct AspectDistribution {
    std::string aspect;
    std::array<std::size_t, 4> counts{};
    std::array<double, 4> percent{};  // rounded to 2 decimals
};

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

inline std::vector<AspectDistribution> distribution_report(const std::vector<VerificationRecord>& records) {
    if (records.empty()) throw Error(ErrorKind::empty_input, "distribution report needs at least one record");
    std::vector<AspectDistribution> out = {{"parsing", {}, {}}, {"q_meaning", {}, {}}, {"o_meaning", {}, {}}};
    for (auto& r : records) {
        ++out[0].counts[static_cast<std::size_t>(r.parsing)];
        ++out[1].counts[static_cast<std::size_t>(r.q_meaning)];
        ++out[2].counts[static_cast<std::size_t>(r.o_meaning)];
    }
    for (auto& d : out)
        for (std::size_t i = 0; i < 4; ++i)
            d.percent[i] = round2(100.0 * static_cast<double>(d.counts[i]) / static_cast<double>(records.size()));
    return out;
}

// instance_id  system_id  em_correct  parsing  q_meaning  o_meaning
// An optional header row starting with "instance_id" is skipped.
inline std::vector<VerificationRecord> parse_labels(std::string_view content, bool allow_em_incorrect = false) {
    std::vector<VerificationRecord> out;
    std::size_t lineno = 0;
    for (auto raw : text::split(content, '\n')) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (text::trim(raw).empty() || raw[0] == '#') continue;
        auto cols = text::split(raw, '\t');
        if (!cols.empty() && cols[0] == "instance_id") continue;
        auto fail = [&](const std::string& m) {
            return Error(ErrorKind::load, "labels line " + std::to_string(lineno) + ": " + m, lineno);
        };
        if (cols.size() != 6) throw fail("expected 6 tab-separated columns");
        VerificationRecord r;
        r.instance_id = cols[0];
        r.system_id = cols[1];
        auto em = text::trim(cols[2]);
        if (em == "true" || em == "1") r.em_correct = true;
        else if (em == "false" || em == "0") r.em_correct = false;
        else throw fail("em_correct must be true or false");
        if (!r.em_correct && !allow_em_incorrect)
            throw Error(ErrorKind::contract_violation,
                        "labels line " + std::to_string(lineno) + ": record " + r.instance_id +
                            " is not em-correct; labels apply only to em-correct instances",
                        lineno);
        AspectLabel* dst[3] = {&r.parsing, &r.q_meaning, &r.o_meaning};
        for (int k = 0; k < 3; ++k) {
            auto l = parse_label(text::trim(cols[3 + k]));
            if (!l) throw fail("unknown label '" + cols[3 + k] + "'");
            *dst[k] = *l;
        }
        out.push_back(std::move(r));
    }
    return out;
}

inline std::vector<VerificationRecord> load_labels(const std::filesystem::path& p, bool allow_em_incorrect = false) {
    return parse_labels(text::read_file(p), allow_em_incorrect);
}

}  // namespace forge
