#pragma once
// Underlying morphological forms in the linear clitic/affix notation:
//   X=  proclitic      =X  enclitic      X-  prefix      -X  suffix
//   -RED  reduplicant  bare  root        +   compound joint
//   -X=   linker: a suffix of the word on its left that surfaces as a
//         proclitic on the next word ("müś -m= jer").
// A morpheme written ∅ is a zero morph (glossable, no segments).

#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/phonology.hpp"
#include "forge/text.hpp"

namespace forge {

enum class Boundary { root, prefix, suffix, proclitic, enclitic, reduplicant, linker, none };

inline std::string_view boundary_name(Boundary b) {
    switch (b) {
        case Boundary::root: return "root";
        case Boundary::prefix: return "prefix";
        case Boundary::suffix: return "suffix";
        case Boundary::proclitic: return "proclitic";
        case Boundary::enclitic: return "enclitic";
        case Boundary::reduplicant: return "reduplicant";
        case Boundary::linker: return "linker";
        case Boundary::none: return "none";
    }
    return "?";
}

inline bool parse_boundary_name(std::string_view s, Boundary& out) {
    for (auto b : {Boundary::root, Boundary::prefix, Boundary::suffix, Boundary::proclitic,
                   Boundary::enclitic, Boundary::reduplicant, Boundary::linker, Boundary::none}) {
        if (boundary_name(b) == s) {
            out = b;
            return true;
        }
    }
    return false;
}

inline constexpr std::string_view kRed = "RED";
inline constexpr std::string_view kZero = "∅";

struct Morpheme {
    std::string form;                   // as written, e.g. "mA4", "RED", "∅"
    Boundary boundary = Boundary::root;
    std::string gloss_tag;              // filled from the functional inventory when known
    bool compound_joint = false;        // root joined to the previous root by "+"

    bool is_zero() const { return form == kZero; }

    // Segment the form against an inventory; RED stays a single placeholder.
    std::vector<std::string> segments(const PhonemeInventory& inv) const {
        if (boundary == Boundary::reduplicant) return {std::string(kRed)};
        if (is_zero()) return {};
        return inv.tokenize_or_throw(form);
    }

    std::string notation() const {
        switch (boundary) {
            case Boundary::proclitic: return form + "=";
            case Boundary::enclitic: return "=" + form;
            case Boundary::prefix: return form + "-";
            case Boundary::suffix: return "-" + form;
            case Boundary::reduplicant: return "-RED";
            case Boundary::linker: return "-" + form + "=";
            default: return compound_joint ? "+ " + form : form;
        }
    }

    bool operator==(const Morpheme& o) const {
        return form == o.form && boundary == o.boundary && compound_joint == o.compound_joint;
    }
};

struct UnderlyingForm {
    std::vector<Morpheme> morphemes;

    std::string notation() const {
        std::vector<std::string> parts;
        for (auto& m : morphemes) parts.push_back(m.notation());
        return text::join(parts, " ");
    }

    std::vector<const Morpheme*> roots() const {
        std::vector<const Morpheme*> out;
        for (auto& m : morphemes)
            if (m.boundary == Boundary::root) out.push_back(&m);
        return out;
    }

    // Number of orthographic words (linkers start a new one).
    std::size_t word_count() const {
        std::size_t n = morphemes.empty() ? 0 : 1;
        for (auto& m : morphemes)
            if (m.boundary == Boundary::linker) ++n;
        return n;
    }

    bool operator==(const UnderlyingForm& o) const { return morphemes == o.morphemes; }
};

namespace detail {

// Linear order inside one word.
inline int zone_of(Boundary b) {
    switch (b) {
        case Boundary::proclitic: return 0;
        case Boundary::prefix: return 1;
        case Boundary::root: return 2;
        case Boundary::suffix:
        case Boundary::reduplicant: return 3;
        case Boundary::enclitic: return 4;
        case Boundary::linker: return 5;
        default: return -1;
    }
}

inline bool valid_form(std::string_view f) {
    return !f.empty() && f.find('=') == std::string_view::npos && f.find('-') == std::string_view::npos &&
           f.find('+') == std::string_view::npos;
}

}  // namespace detail

// Check the word-internal ordering and core constraints of a morpheme list.
inline void check_structure(const UnderlyingForm& uf, std::size_t position_hint = 0) {
    if (uf.morphemes.empty()) throw Error(ErrorKind::parse, "empty underlying form", 0);
    int zone = 0;
    bool core = false;
    bool prev_root = false;
    for (std::size_t i = 0; i < uf.morphemes.size(); ++i) {
        auto& m = uf.morphemes[i];
        int z = detail::zone_of(m.boundary);
        if (z < 0) throw Error(ErrorKind::parse, "morpheme with no boundary type", position_hint);
        if (m.boundary == Boundary::root) {
            if (m.compound_joint) {
                if (!prev_root)
                    throw Error(ErrorKind::parse, "'+' must join two roots", position_hint);
            } else if (core) {
                throw Error(ErrorKind::parse, "two root cores in one word at '" + m.form + "'", position_hint);
            }
            core = true;
        } else if (!core && z >= 3 && z <= 4) {
            throw Error(ErrorKind::parse, "morpheme '" + m.notation() + "' has no host before it", position_hint);
        } else if (z < zone) {
            throw Error(ErrorKind::parse,
                        "morpheme '" + m.notation() + "' is out of order", position_hint);
        }
        if (m.boundary == Boundary::linker) {
            if (!core) throw Error(ErrorKind::parse, "linker '" + m.notation() + "' has no host", position_hint);
            zone = 0;
            core = false;
            prev_root = false;
            continue;
        }
        zone = z;
        prev_root = (m.boundary == Boundary::root);
    }
    if (!core) throw Error(ErrorKind::parse, "word has no root", position_hint);
}

inline UnderlyingForm parse_underlying(std::string_view notation) {
    UnderlyingForm uf;
    // Tokens with their byte offsets, for error positions.
    std::vector<std::pair<std::string, std::size_t>> toks;
    for (std::size_t i = 0; i < notation.size();) {
        if (notation[i] == ' ' || notation[i] == '\t') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < notation.size() && notation[j] != ' ' && notation[j] != '\t') ++j;
        toks.emplace_back(std::string(notation.substr(i, j - i)), i);
        i = j;
    }
    if (toks.empty()) throw Error(ErrorKind::parse, "empty underlying notation", 0);

    bool pending_joint = false;
    std::size_t joint_pos = 0;
    for (auto& [tok, pos] : toks) {
        if (tok == "+") {
            if (pending_joint) throw Error(ErrorKind::parse, "doubled '+'", pos);
            pending_joint = true;
            joint_pos = pos;
            continue;
        }
        Morpheme m;
        bool lead_eq = tok.front() == '=';
        bool lead_dash = tok.front() == '-';
        bool trail_eq = tok.back() == '=';
        bool trail_dash = tok.back() == '-';
        if (tok == "=" || tok == "-")
            throw Error(ErrorKind::parse, "dangling boundary marker '" + tok + "'", pos);
        std::string body = tok;
        if (lead_dash && trail_eq) {
            m.boundary = Boundary::linker;
            body = tok.substr(1, tok.size() - 2);
        } else if (lead_eq && !trail_eq && !trail_dash) {
            m.boundary = Boundary::enclitic;
            body = tok.substr(1);
        } else if (lead_dash && !trail_eq && !trail_dash) {
            body = tok.substr(1);
            m.boundary = body == kRed ? Boundary::reduplicant : Boundary::suffix;
        } else if (trail_eq && !lead_eq && !lead_dash) {
            m.boundary = Boundary::proclitic;
            body = tok.substr(0, tok.size() - 1);
        } else if (trail_dash && !lead_eq && !lead_dash) {
            m.boundary = Boundary::prefix;
            body = tok.substr(0, tok.size() - 1);
        } else if (!lead_eq && !lead_dash && !trail_eq && !trail_dash) {
            m.boundary = Boundary::root;
        } else {
            throw Error(ErrorKind::parse, "malformed morpheme '" + tok + "'", pos);
        }
        if (!detail::valid_form(body))
            throw Error(ErrorKind::parse,
                        body.empty() ? "empty morpheme in '" + tok + "'" : "malformed morpheme '" + tok + "'",
                        pos);
        if (m.boundary == Boundary::root && body == kRed)
            throw Error(ErrorKind::parse, "RED must be written as a suffix '-RED'", pos);
        m.form = body;
        if (pending_joint) {
            if (m.boundary != Boundary::root)
                throw Error(ErrorKind::parse, "'+' must be followed by a root", joint_pos);
            m.compound_joint = true;
            pending_joint = false;
        }
        uf.morphemes.push_back(std::move(m));
        try {
            check_structure(UnderlyingForm{uf}, pos);
        } catch (const Error& e) {
            // "word has no root" is expected until the core arrives.
            std::string msg = e.what();
            if (msg != "word has no root") throw;
        }
    }
    if (pending_joint) throw Error(ErrorKind::parse, "dangling '+'", joint_pos);
    check_structure(uf, notation.size());
    return uf;
}

}  // namespace forge
