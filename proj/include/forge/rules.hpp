#pragma once
// Ordered contextual rewrite rules over segment streams, and the cascade that
// derives surface forms from underlying forms.
//
// Rules file directives (one per line; lines starting "# " are comments, "##" ends a line):
//   INVENTORY: <path>                      inventory file, relative to the rules file
//   PHASES: p1,p2,...                      phase order
//   CLASS <Name> : sym sym ...             named segment/boundary class, used as {Name}
//   RULE <id> <phase> <mode> : <target> -> <replacement> [/ <left> _ <right>]
//   HARMONY <id> <phase> <archiphoneme> : tag,tag=vowel ...
//
// Pattern atoms: literal symbol, boundary (# = - +), C, V, . (any segment),
// B (any boundary), {Name}; each may carry @role,role and a * or ? quantifier.
// Parentheses capture; groups are numbered left context, target, right context.
// Replacement items: literal[@role], boundary, \N (capture), \0 (whole target),
// {Name} (maps the k-th class atom of the target by member index), 0 or ∅ (nothing).
// Modes: single, fixpoint(length), fixpoint(matches), fixpoint(count:SYM).

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/phonology.hpp"
#include "forge/text.hpp"
#include "forge/underlying.hpp"

namespace forge {

struct Token {
    std::string sym;
    Boundary role = Boundary::none;

    bool operator==(const Token& o) const { return sym == o.sym && role == o.role; }
};

using Word = std::vector<Token>;

inline bool is_boundary_symbol(std::string_view s) { return s == "#" || s == "=" || s == "-" || s == "+"; }

// Debug rendering with boundaries kept, e.g. "#li=chew-RED#".
inline std::string render_raw(const Word& w) {
    std::string out;
    for (auto& t : w) out += t.sym;
    return out;
}

// Orthographic rendering: word edges become spaces, compound joints hyphens,
// clitic/affix boundaries vanish.
inline std::string render_surface(const Word& w) {
    std::string out;
    bool pending_space = false;
    for (auto& t : w) {
        if (t.sym == "#") {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (t.sym == "=" || t.sym == "-") continue;
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += t.sym == "+" ? "-" : t.sym;
    }
    return out;
}

// Token stream for an underlying form: "#" at both edges and between words.
inline Word to_tokens(const UnderlyingForm& uf, const PhonemeInventory& inv) {
    Word w{{"#", Boundary::none}};
    auto push_segs = [&](const Morpheme& m, Boundary role) {
        for (auto& s : m.segments(inv)) w.push_back({s, role});
    };
    for (auto& m : uf.morphemes) {
        if (m.is_zero()) continue;
        switch (m.boundary) {
            case Boundary::proclitic:
                push_segs(m, m.boundary);
                w.push_back({"=", m.boundary});
                break;
            case Boundary::prefix:
                push_segs(m, m.boundary);
                w.push_back({"-", m.boundary});
                break;
            case Boundary::root:
                if (m.compound_joint) w.push_back({"+", Boundary::root});
                push_segs(m, m.boundary);
                break;
            case Boundary::suffix:
            case Boundary::reduplicant:
                w.push_back({"-", m.boundary});
                push_segs(m, m.boundary);
                break;
            case Boundary::enclitic:
                w.push_back({"=", m.boundary});
                push_segs(m, m.boundary);
                break;
            case Boundary::linker:
                w.push_back({"#", Boundary::none});
                push_segs(m, m.boundary);
                w.push_back({"=", m.boundary});
                break;
            case Boundary::none: break;
        }
    }
    w.push_back({"#", Boundary::none});
    return w;
}

// ---------------------------------------------------------------------------
// Patterns

struct Atom {
    enum Kind { literal, consonant, vowel, any_segment, any_boundary, cls } kind = literal;
    std::string sym;                 // literal symbol or class name
    const std::vector<std::string>* members = nullptr;
    std::vector<Boundary> roles;     // empty = any role
    char quant = 0;                  // 0, '*', '?'
    int class_index = -1;            // k-th class atom of a target, for {Class} mapping
};

struct Elem {
    enum Type { atom, open, close } type = atom;
    Atom a;
    int group = 0;
};

struct Pattern {
    std::vector<Elem> elems;

    std::size_t min_length() const {
        std::size_t n = 0;
        for (auto& e : elems)
            if (e.type == Elem::atom && e.a.quant == 0) ++n;
        return n;
    }
    bool has_quantifier() const {
        return std::any_of(elems.begin(), elems.end(),
                           [](const Elem& e) { return e.type == Elem::atom && e.a.quant != 0; });
    }
    bool empty() const { return elems.empty(); }
};

struct ReplItem {
    enum Kind { literal, capture, mapped } kind = literal;
    std::string sym;
    std::optional<Boundary> role;
    int group = 0;        // capture index, 0 = whole target
    const std::vector<std::string>* to = nullptr;
    int class_index = 0;  // k-th class atom of the target
};

enum class RuleMode { single, fixpoint };
enum class Measure { none, length, matches, count };

struct RewriteRule {
    std::string id;
    std::string phase;
    RuleMode mode = RuleMode::single;
    Measure measure = Measure::none;
    std::string measure_symbol;
    Pattern left, target, right;
    std::vector<ReplItem> replacement;
    std::string source;  // original line, for diagnostics
};

struct HarmonyRule {
    std::string id;
    std::string phase;
    std::string archiphoneme;
    std::vector<std::pair<std::vector<std::string>, std::string>> table;  // trigger tags -> vowel
};

// One step of a cascade: either a rewrite rule or a harmony table.
struct CascadeStep {
    std::shared_ptr<RewriteRule> rule;
    std::shared_ptr<HarmonyRule> harmony;

    const std::string& id() const { return rule ? rule->id : harmony->id; }
    const std::string& phase() const { return rule ? rule->phase : harmony->phase; }
};

struct TraceStep {
    std::string rule_id;
    std::string phase;
    std::string before;
    std::string after;
};

struct SurfaceForm {
    std::string text;
    std::vector<TraceStep> trace;
};

namespace detail {

struct Span {
    long a = -1, b = -1;
    bool set() const { return a >= 0 && b >= 0; }
    long lo() const { return std::min(a, b); }
    long hi() const { return std::max(a, b); }
};

struct MatchState {
    std::vector<Span> groups;          // index = group number
    std::vector<long> class_positions; // token index matched by the k-th target class atom
};

class Matcher {
public:
    Matcher(const Word& w, const PhonemeInventory& inv) : w_(w), inv_(inv) {}

    bool atom_matches(const Atom& a, const Token& t) const {
        if (!a.roles.empty() && std::find(a.roles.begin(), a.roles.end(), t.role) == a.roles.end())
            return false;
        bool bnd = is_boundary_symbol(t.sym);
        switch (a.kind) {
            case Atom::literal: return t.sym == a.sym;
            case Atom::any_boundary: return bnd;
            case Atom::any_segment: return !bnd;
            case Atom::consonant:
            case Atom::vowel: {
                if (bnd) return false;
                const Segment* s = inv_.find(t.sym);
                if (!s) return false;
                return a.kind == Atom::vowel ? s->is_vowel_like() : s->is_consonant_like();
            }
            case Atom::cls:
                return std::find(a.members->begin(), a.members->end(), t.sym) != a.members->end();
        }
        return false;
    }

    // Match elems[ei..] starting at pos moving in direction dir (+1 forward,
    // -1 backward over w_[pos-1]). Calls k(end_pos) on each complete match;
    // stops at the first k that returns true.
    bool run(const std::vector<Elem>& elems, std::size_t ei, long pos, int dir, MatchState& st,
             const std::function<bool(long)>& k) const {
        if (ei == elems.size()) return k(pos);
        const Elem& e = elems[ei];
        if (e.type != Elem::atom) {
            Span saved = st.groups[e.group];
            if (e.type == Elem::open) st.groups[e.group].a = pos;
            else st.groups[e.group].b = pos;
            if (run(elems, ei + 1, pos, dir, st, k)) return true;
            st.groups[e.group] = saved;
            return false;
        }
        auto token_at = [&](long p) -> const Token* {
            long idx = dir > 0 ? p : p - 1;
            if (idx < 0 || idx >= static_cast<long>(w_.size())) return nullptr;
            return &w_[idx];
        };
        if (e.a.quant == 0) {
            const Token* t = token_at(pos);
            if (!t || !atom_matches(e.a, *t)) return false;
            long saved = -1;
            if (e.a.class_index >= 0) {
                saved = st.class_positions[e.a.class_index];
                st.class_positions[e.a.class_index] = dir > 0 ? pos : pos - 1;
            }
            if (run(elems, ei + 1, pos + dir, dir, st, k)) return true;
            if (e.a.class_index >= 0) st.class_positions[e.a.class_index] = saved;
            return false;
        }
        long maxn = 0;
        for (long p = pos;; p += dir) {
            const Token* t = token_at(p);
            if (!t || !atom_matches(e.a, *t)) break;
            ++maxn;
            if (e.a.quant == '?') break;
        }
        for (long n = maxn; n >= 0; --n)
            if (run(elems, ei + 1, pos + n * dir, dir, st, k)) return true;
        return false;
    }

private:
    const Word& w_;
    const PhonemeInventory& inv_;
};

inline std::vector<Elem> reversed(const std::vector<Elem>& elems) {
    std::vector<Elem> out(elems.rbegin(), elems.rend());
    for (auto& e : out) {
        if (e.type == Elem::open) e.type = Elem::close;
        else if (e.type == Elem::close) e.type = Elem::open;
    }
    return out;
}

struct Match {
    long start = 0, end = 0;
    MatchState st;
};

}  // namespace detail

class RuleCascade {
public:
    std::vector<std::string> phases;
    std::map<std::string, std::vector<std::string>> classes;
    std::vector<CascadeStep> steps;  // in application order after finalize()

    const PhonemeInventory& inventory() const {
        if (!inventory_) throw Error(ErrorKind::load, "rule cascade has no inventory");
        return *inventory_;
    }
    void set_inventory(PhonemeInventory inv) { inventory_ = std::make_shared<PhonemeInventory>(std::move(inv)); }
    bool has_inventory() const { return inventory_ != nullptr; }

    const CascadeStep* find(std::string_view id) const {
        for (auto& s : steps)
            if (s.id() == id) return &s;
        return nullptr;
    }

    // Parse a rules file. `base` resolves the INVENTORY directive; `inv`
    // overrides it when given.
    static RuleCascade parse(std::string_view content, const std::filesystem::path& base = {},
                             const PhonemeInventory* inv = nullptr) {
        RuleCascade rc;
        if (inv) rc.set_inventory(*inv);
        struct Pending {
            std::size_t line;
            std::string text;
        };
        std::vector<Pending> rule_lines;
        std::size_t lineno = 0;
        // First pass: header directives, so rules may precede CLASS lines.
        for (auto& raw : text::split(content, '\n')) {
            ++lineno;
            auto line = std::string(text::trim(strip_comment(raw)));
            if (line.empty()) continue;
            auto fail = [&](const std::string& msg) -> Error {
                return Error(ErrorKind::load, "rules line " + std::to_string(lineno) + ": " + msg, lineno);
            };
            if (text::starts_with(line, "PHASES:")) {
                if (!rc.phases.empty()) throw fail("PHASES declared twice");
                for (auto& p : text::split(line.substr(7), ','))
                    if (auto t = text::trim(p); !t.empty()) rc.phases.emplace_back(t);
                if (rc.phases.empty()) throw fail("PHASES is empty");
            } else if (text::starts_with(line, "INVENTORY:")) {
                if (inv) continue;
                auto rel = std::string(text::trim(line.substr(10)));
                auto path = base.empty() ? std::filesystem::path(rel) : base / rel;
                try {
                    rc.set_inventory(PhonemeInventory::load(path));
                } catch (const Error& e) {
                    throw fail(std::string("inventory: ") + e.what());
                }
            } else if (text::starts_with(line, "CLASS ")) {
                auto colon = line.find(':');
                if (colon == std::string::npos) throw fail("CLASS needs ':'");
                auto name = std::string(text::trim(line.substr(6, colon - 6)));
                if (name.empty()) throw fail("CLASS needs a name");
                if (rc.classes.count(name)) throw fail("class '" + name + "' declared twice");
                auto members = text::split_ws(line.substr(colon + 1));
                if (members.empty()) throw fail("class '" + name + "' is empty");
                rc.classes[name] = members;
            } else if (text::starts_with(line, "RULE ") || text::starts_with(line, "HARMONY ")) {
                rule_lines.push_back({lineno, line});
            } else {
                throw fail("unrecognised directive");
            }
        }
        if (!rc.inventory_) throw Error(ErrorKind::load, "rules file declares no INVENTORY");
        if (rc.phases.empty()) throw Error(ErrorKind::load, "rules file declares no PHASES");
        for (auto& [name, members] : rc.classes)
            for (auto& m : members)
                if (!is_boundary_symbol(m) && !rc.inventory_->contains(m) && m != kRed)
                    throw Error(ErrorKind::load, "class '" + name + "' names unknown symbol '" + m + "'");

        std::vector<CascadeStep> listed;
        for (auto& [ln, line] : rule_lines) {
            try {
                if (text::starts_with(line, "RULE ")) listed.push_back({rc.parse_rule(line), nullptr});
                else listed.push_back({nullptr, rc.parse_harmony(line)});
            } catch (const Error& e) {
                throw Error(e.kind(), "rules line " + std::to_string(ln) + ": " + e.what(), ln);
            }
        }
        std::map<std::string, int> ids;
        for (auto& s : listed)
            if (ids[s.id()]++) throw Error(ErrorKind::load, "duplicate rule id '" + s.id() + "'");
        for (auto& s : listed)
            if (std::find(rc.phases.begin(), rc.phases.end(), s.phase()) == rc.phases.end())
                throw Error(ErrorKind::load, "rule '" + s.id() + "' names undeclared phase '" + s.phase() + "'");
        // Phase order, then listing order within a phase.
        for (auto& p : rc.phases)
            for (auto& s : listed)
                if (s.phase() == p) rc.steps.push_back(s);
        return rc;
    }

    static RuleCascade load(const std::filesystem::path& p, const PhonemeInventory* inv = nullptr) {
        return parse(text::read_file(p), p.parent_path(), inv);
    }

    // Parse one RULE line against this cascade's classes and inventory.
    std::shared_ptr<RewriteRule> parse_rule(const std::string& line) const {
        auto r = std::make_shared<RewriteRule>();
        r->source = line;
        auto colon = line.find(" : ");
        if (colon == std::string::npos) throw Error(ErrorKind::load, "RULE needs ' : '");
        auto head = text::split_ws(line.substr(0, colon));
        if (head.size() != 4) throw Error(ErrorKind::load, "expected RULE <id> <phase> <mode> :");
        r->id = head[1];
        r->phase = head[2];
        parse_mode(head[3], *r);

        auto toks = text::split_ws(line.substr(colon + 3));
        auto arrow = std::find(toks.begin(), toks.end(), "->");
        if (arrow == toks.end()) throw Error(ErrorKind::load, "rule '" + r->id + "' has no '->'");
        auto slash = std::find(arrow, toks.end(), "/");
        std::vector<std::string> target(toks.begin(), arrow), repl(arrow + 1, slash), left, right;
        if (slash != toks.end()) {
            auto us = std::find(slash, toks.end(), "_");
            if (us == toks.end()) throw Error(ErrorKind::load, "rule '" + r->id + "' context lacks '_'");
            left.assign(slash + 1, us);
            right.assign(us + 1, toks.end());
        }
        int group = 1;
        int class_counter = 0;
        int dummy = 0;
        r->left = parse_pattern(left, group, dummy, false);
        r->target = parse_pattern(target, group, class_counter, true);
        r->right = parse_pattern(right, group, dummy, false);
        if (r->target.empty() || r->target.min_length() == 0)
            throw Error(ErrorKind::load, "rule '" + r->id + "' has an empty target");
        r->replacement = parse_replacement(repl, group - 1, *r);

        if (r->mode == RuleMode::fixpoint) check_measure(*r);
        return r;
    }

private:
    std::shared_ptr<PhonemeInventory> inventory_;

    // Whole-line comments start with '#'; '##' starts a trailing comment
    // ('#' alone is the word-edge boundary inside patterns).
    static std::string strip_comment(std::string_view raw) {
        auto t = text::trim(raw);
        if (!t.empty() && t.front() == '#' && (t.size() == 1 || t[1] == ' ' || t[1] == '#'))
            return {};
        auto h = raw.find("##");
        return std::string(h == std::string_view::npos ? raw : raw.substr(0, h));
    }

    static void parse_mode(const std::string& m, RewriteRule& r) {
        if (m == "single") {
            r.mode = RuleMode::single;
            return;
        }
        if (m == "fixpoint")
            throw Error(ErrorKind::derivation_refused,
                        "fixpoint rule '" + r.id + "' declares no termination measure");
        if (!text::starts_with(m, "fixpoint(") || m.back() != ')')
            throw Error(ErrorKind::load, "rule '" + r.id + "': unknown mode '" + m + "'");
        r.mode = RuleMode::fixpoint;
        auto inner = m.substr(9, m.size() - 10);
        if (inner == "length") r.measure = Measure::length;
        else if (inner == "matches") r.measure = Measure::matches;
        else if (text::starts_with(inner, "count:") && inner.size() > 6) {
            r.measure = Measure::count;
            r.measure_symbol = inner.substr(6);
        } else
            throw Error(ErrorKind::derivation_refused,
                        "fixpoint rule '" + r.id + "' has unknown measure '" + inner + "'");
    }

    // Refuse fixpoint rules whose measure provably cannot decrease.
    void check_measure(const RewriteRule& r) const {
        bool has_capture = std::any_of(r.replacement.begin(), r.replacement.end(),
                                       [](const ReplItem& i) { return i.kind == ReplItem::capture; });
        if (r.measure == Measure::length && !r.target.has_quantifier() && !has_capture &&
            r.replacement.size() >= r.target.min_length())
            throw Error(ErrorKind::derivation_refused,
                        "fixpoint rule '" + r.id + "' cannot shorten the word (replacement not shorter than target)");
        if (r.measure == Measure::count) {
            for (auto& i : r.replacement)
                if (i.kind == ReplItem::literal && i.sym == r.measure_symbol)
                    throw Error(ErrorKind::derivation_refused,
                                "fixpoint rule '" + r.id + "' reintroduces its measured symbol '" +
                                    r.measure_symbol + "'");
            bool target_has = false;
            for (auto& e : r.target.elems)
                if (e.type == Elem::atom &&
                    (e.a.kind != Atom::literal || e.a.sym == r.measure_symbol))
                    target_has = true;
            if (!target_has)
                throw Error(ErrorKind::derivation_refused,
                            "fixpoint rule '" + r.id + "' target can never remove '" + r.measure_symbol + "'");
        }
    }

    static bool parse_roles(const std::string& s, std::vector<Boundary>& roles) {
        for (auto& part : text::split(s, ',')) {
            Boundary b;
            if (!parse_boundary_name(part, b)) return false;
            roles.push_back(b);
        }
        return true;
    }

    const std::vector<std::string>* class_members(const std::string& name) const {
        auto it = classes.find(name);
        if (it == classes.end()) throw Error(ErrorKind::load, "unknown class '{" + name + "}'");
        return &it->second;
    }

    Pattern parse_pattern(const std::vector<std::string>& toks, int& group, int& class_counter,
                          bool is_target) const {
        Pattern p;
        std::vector<int> open_groups;
        for (auto tok : toks) {
            while (!tok.empty() && tok.front() == '(') {
                open_groups.push_back(group);
                p.elems.push_back({Elem::open, {}, group++});
                tok.erase(tok.begin());
            }
            int closes = 0;
            while (!tok.empty() && tok.back() == ')') {
                ++closes;
                tok.pop_back();
            }
            if (!tok.empty()) p.elems.push_back({Elem::atom, parse_atom(tok, class_counter, is_target), 0});
            for (int i = 0; i < closes; ++i) {
                if (open_groups.empty()) throw Error(ErrorKind::load, "unbalanced ')' in pattern");
                p.elems.push_back({Elem::close, {}, open_groups.back()});
                open_groups.pop_back();
            }
        }
        if (!open_groups.empty()) throw Error(ErrorKind::load, "unbalanced '(' in pattern");
        return p;
    }

    Atom parse_atom(std::string tok, int& class_counter, bool is_target) const {
        Atom a;
        if (tok.size() > 1 && (tok.back() == '*' || tok.back() == '?')) {
            a.quant = tok.back();
            tok.pop_back();
        }
        if (auto at = tok.find('@'); at != std::string::npos && at > 0) {
            if (!parse_roles(tok.substr(at + 1), a.roles))
                throw Error(ErrorKind::load, "bad role filter in '" + tok + "'");
            tok = tok.substr(0, at);
        }
        if (tok == "C") a.kind = Atom::consonant;
        else if (tok == "V") a.kind = Atom::vowel;
        else if (tok == ".") a.kind = Atom::any_segment;
        else if (tok == "B") a.kind = Atom::any_boundary;
        else if (tok.size() > 2 && tok.front() == '{' && tok.back() == '}') {
            a.kind = Atom::cls;
            a.sym = tok.substr(1, tok.size() - 2);
            a.members = class_members(a.sym);
            if (is_target && a.quant == 0) a.class_index = class_counter++;
        } else {
            if (!is_boundary_symbol(tok) && tok != kRed && !inventory().contains(tok))
                throw Error(ErrorKind::unknown_symbol, "unknown symbol '" + tok + "' in pattern");
            a.kind = Atom::literal;
            a.sym = tok;
        }
        return a;
    }

    std::vector<ReplItem> parse_replacement(const std::vector<std::string>& toks, int max_group,
                                            const RewriteRule& r) const {
        std::vector<ReplItem> out;
        if (toks.empty()) throw Error(ErrorKind::load, "rule '" + r.id + "' has no replacement (use 0)");
        if (toks.size() == 1 && (toks[0] == "0" || toks[0] == kZero)) return out;
        int class_k = 0;
        std::vector<const std::vector<std::string>*> target_classes;
        for (auto& e : r.target.elems)
            if (e.type == Elem::atom && e.a.class_index >= 0) target_classes.push_back(e.a.members);
        for (auto tok : toks) {
            ReplItem it;
            if (tok.size() >= 2 && tok[0] == '\\') {
                it.kind = ReplItem::capture;
                try {
                    it.group = std::stoi(tok.substr(1));
                } catch (const std::exception&) {
                    throw Error(ErrorKind::load, "bad capture reference '" + tok + "'");
                }
                if (it.group < 0 || it.group > max_group)
                    throw Error(ErrorKind::load, "rule '" + r.id + "' references missing group " + tok);
            } else if (tok.size() > 2 && tok.front() == '{' && tok.back() == '}') {
                it.kind = ReplItem::mapped;
                it.to = class_members(tok.substr(1, tok.size() - 2));
                it.class_index = class_k++;
                if (it.class_index >= static_cast<int>(target_classes.size()))
                    throw Error(ErrorKind::load,
                                "rule '" + r.id + "': replacement class " + tok + " has no target class to map from");
                if (target_classes[it.class_index]->size() != it.to->size())
                    throw Error(ErrorKind::load,
                                "rule '" + r.id + "': class " + tok + " size differs from its target class");
            } else {
                if (auto at = tok.find('@'); at != std::string::npos && at > 0) {
                    Boundary b;
                    if (!parse_boundary_name(tok.substr(at + 1), b))
                        throw Error(ErrorKind::load, "bad role in '" + tok + "'");
                    it.role = b;
                    tok = tok.substr(0, at);
                }
                if (!is_boundary_symbol(tok) && tok != kRed && !inventory().contains(tok))
                    throw Error(ErrorKind::unknown_symbol, "unknown symbol '" + tok + "' in replacement");
                it.kind = ReplItem::literal;
                it.sym = tok;
            }
            out.push_back(std::move(it));
        }
        return out;
    }

    std::shared_ptr<HarmonyRule> parse_harmony(const std::string& line) const {
        auto h = std::make_shared<HarmonyRule>();
        auto colon = line.find(" : ");
        if (colon == std::string::npos) throw Error(ErrorKind::load, "HARMONY needs ' : '");
        auto head = text::split_ws(line.substr(0, colon));
        if (head.size() != 4) throw Error(ErrorKind::load, "expected HARMONY <id> <phase> <archiphoneme> :");
        h->id = head[1];
        h->phase = head[2];
        h->archiphoneme = head[3];
        const Segment* s = inventory().find(h->archiphoneme);
        if (!s || s->cls != SegmentClass::archiphoneme)
            throw Error(ErrorKind::load, "harmony '" + h->id + "': '" + h->archiphoneme + "' is not an archiphoneme");
        for (auto& entry : text::split_ws(line.substr(colon + 3))) {
            auto eq = entry.rfind('=');
            if (eq == std::string::npos || eq == 0 || eq + 1 == entry.size())
                throw Error(ErrorKind::load, "harmony '" + h->id + "': bad entry '" + entry + "'");
            auto vowel = entry.substr(eq + 1);
            if (!inventory().contains(vowel))
                throw Error(ErrorKind::unknown_symbol, "harmony '" + h->id + "': unknown vowel '" + vowel + "'");
            h->table.emplace_back(text::split(entry.substr(0, eq), ','), vowel);
        }
        if (h->table.empty()) throw Error(ErrorKind::load, "harmony '" + h->id + "' has no entries");
        return h;
    }
};

// ---------------------------------------------------------------------------
// Application

namespace detail {

inline std::vector<Match> find_matches(const RewriteRule& r, const Word& w, const PhonemeInventory& inv) {
    std::vector<Match> out;
    Matcher m(w, inv);
    int ngroups = 1;
    for (auto* p : {&r.left, &r.target, &r.right})
        for (auto& e : p->elems)
            if (e.type != Elem::atom) ngroups = std::max(ngroups, e.group + 1);
    int nclasses = 0;
    for (auto& e : r.target.elems)
        if (e.type == Elem::atom && e.a.class_index >= 0) ++nclasses;
    auto left_rev = reversed(r.left.elems);

    // Cheap filter on the first target atom before any backtracking.
    const Atom* first = nullptr;
    for (auto& e : r.target.elems)
        if (e.type == Elem::atom) {
            if (e.a.quant == 0) first = &e.a;
            break;
        }

    long i = 0;
    const long n = static_cast<long>(w.size());
    while (i < n) {
        if (first && !m.atom_matches(*first, w[i])) {
            ++i;
            continue;
        }
        MatchState st;
        st.groups.assign(ngroups, {});
        st.class_positions.assign(nclasses, -1);
        bool left_ok = m.run(left_rev, 0, i, -1, st, [](long) { return true; });
        long found_end = -1;
        if (left_ok) {
            m.run(r.target.elems, 0, i, +1, st, [&](long end) {
                if (end <= i) return false;
                bool right_ok = m.run(r.right.elems, 0, end, +1, st, [](long) { return true; });
                if (right_ok) found_end = end;
                return right_ok;
            });
        }
        if (found_end > i) {
            out.push_back({i, found_end, st});
            i = found_end;
        } else {
            ++i;
        }
    }
    return out;
}

inline Boundary default_role(const Word& w, long start, long end) {
    for (long p = end - 1; p >= start; --p)
        if (!is_boundary_symbol(w[p].sym)) return w[p].role;
    return end > start ? w[end - 1].role : Boundary::none;
}

inline Word rewrite(const RewriteRule& r, const Word& w, const std::vector<Match>& matches) {
    Word out;
    long pos = 0;
    for (auto& mt : matches) {
        out.insert(out.end(), w.begin() + pos, w.begin() + mt.start);
        Boundary role = default_role(w, mt.start, mt.end);
        for (auto& it : r.replacement) {
            switch (it.kind) {
                case ReplItem::literal: out.push_back({it.sym, it.role.value_or(role)}); break;
                case ReplItem::capture: {
                    long a = mt.start, b = mt.end;
                    if (it.group > 0) {
                        auto& sp = mt.st.groups[it.group];
                        if (!sp.set()) break;
                        a = sp.lo();
                        b = sp.hi();
                    }
                    bool inside = a >= mt.start && b <= mt.end;
                    for (long p = a; p < b; ++p)
                        out.push_back({w[p].sym, inside ? w[p].role : role});
                    break;
                }
                case ReplItem::mapped: {
                    long p = mt.st.class_positions[it.class_index];
                    if (p < 0) break;
                    const std::vector<std::string>* from = nullptr;
                    for (auto& e : r.target.elems)
                        if (e.type == Elem::atom && e.a.class_index == it.class_index) from = e.a.members;
                    auto idx = std::find(from->begin(), from->end(), w[p].sym) - from->begin();
                    out.push_back({(*it.to)[idx], w[p].role});
                    break;
                }
            }
        }
        pos = mt.end;
    }
    out.insert(out.end(), w.begin() + pos, w.end());
    return out;
}

inline long measure_of(const RewriteRule& r, const Word& w, std::size_t matches) {
    switch (r.measure) {
        case Measure::length: return static_cast<long>(w.size());
        case Measure::matches: return static_cast<long>(matches);
        case Measure::count:
            return std::count_if(w.begin(), w.end(), [&](const Token& t) { return t.sym == r.measure_symbol; });
        case Measure::none: break;
    }
    return 0;
}

}  // namespace detail

// Apply a rewrite rule: simultaneous non-overlapping left-to-right rewriting
// with contexts read from the input, or iteration of that to a fixpoint.
inline Word apply_rule(const RewriteRule& r, const Word& w, const PhonemeInventory& inv) {
    if (r.mode == RuleMode::single) {
        auto ms = detail::find_matches(r, w, inv);
        return ms.empty() ? w : detail::rewrite(r, w, ms);
    }
    // Every measure is a non-negative integer, so strict decrease terminates.
    Word cur = w;
    auto ms = detail::find_matches(r, cur, inv);
    long prev = detail::measure_of(r, cur, ms.size());
    while (!ms.empty()) {
        cur = detail::rewrite(r, cur, ms);
        ms = detail::find_matches(r, cur, inv);
        long now = detail::measure_of(r, cur, ms.size());
        if (now >= prev)
            throw Error(ErrorKind::non_termination,
                        "rule '" + r.id + "' did not decrease its termination measure");
        prev = now;
    }
    return cur;
}

// Resolve an archiphoneme from the nearest root vowel in the same word,
// looking left first.
inline Word apply_harmony(const HarmonyRule& h, const Word& w, const PhonemeInventory& inv) {
    Word out = w;
    auto is_root_vowel = [&](const Token& t) {
        if (t.role != Boundary::root) return false;
        const Segment* s = inv.find(t.sym);
        return s && s->cls == SegmentClass::vowel;
    };
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (w[i].sym != h.archiphoneme) continue;
        const Segment* trigger = nullptr;
        for (long p = static_cast<long>(i) - 1; p >= 0 && w[p].sym != "#"; --p)
            if (is_root_vowel(w[p])) {
                trigger = inv.find(w[p].sym);
                break;
            }
        if (!trigger)
            for (std::size_t p = i + 1; p < w.size() && w[p].sym != "#"; ++p)
                if (is_root_vowel(w[p])) {
                    trigger = inv.find(w[p].sym);
                    break;
                }
        if (!trigger) continue;
        for (auto& [tags, vowel] : h.table) {
            bool all = std::all_of(tags.begin(), tags.end(), [&](const std::string& t) { return trigger->has(t); });
            if (all) {
                out[i].sym = vowel;
                break;
            }
        }
    }
    return out;
}

inline Word apply_step(const CascadeStep& s, const Word& w, const PhonemeInventory& inv) {
    return s.rule ? apply_rule(*s.rule, w, inv) : apply_harmony(*s.harmony, w, inv);
}

// Fail on leftover archiphonemes/RED, then check (C)V(C) per phonological
// word (between word edges and compound joints).
inline void check_output(const Word& w, const PhonemeInventory& inv) {
    for (auto& t : w) {
        if (t.sym == kRed) throw Error(ErrorKind::resolution, "unresolved reduplicant RED");
        const Segment* s = inv.find(t.sym);
        if (s && s->cls == SegmentClass::archiphoneme)
            throw Error(ErrorKind::resolution, "unresolved archiphoneme " + t.sym);
        if (!s && !is_boundary_symbol(t.sym))
            throw Error(ErrorKind::unknown_symbol, "derived unknown symbol '" + t.sym + "'");
    }
    std::vector<std::string> segs;
    auto flush = [&] {
        if (segs.empty()) return;
        auto v = validate_phonotactics(segs, inv);
        if (!v.ok()) {
            auto& first = v.violations.front();
            throw Error(ErrorKind::derivation_failure,
                        "phonotactic violation (" + first.kind + ") in '" + text::join(segs, "") +
                            "' at segment " + std::to_string(first.position));
        }
        segs.clear();
    };
    for (auto& t : w) {
        if (t.sym == "#" || t.sym == "+") flush();
        else if (!is_boundary_symbol(t.sym)) segs.push_back(t.sym);
    }
    flush();
}

inline Word derive_tokens(const Word& start, const RuleCascade& rc, std::vector<TraceStep>* trace) {
    const auto& inv = rc.inventory();
    Word w = start;
    for (auto& s : rc.steps) {
        Word next = apply_step(s, w, inv);
        if (trace && !(next == w)) trace->push_back({s.id(), s.phase(), render_raw(w), render_raw(next)});
        w = std::move(next);
    }
    check_output(w, inv);
    return w;
}

inline SurfaceForm generate(const UnderlyingForm& uf, const RuleCascade& rc, bool keep_trace = false) {
    SurfaceForm sf;
    Word w = derive_tokens(to_tokens(uf, rc.inventory()), rc, keep_trace ? &sf.trace : nullptr);
    sf.text = render_surface(w);
    return sf;
}

inline SurfaceForm generate(std::string_view notation, const RuleCascade& rc, bool keep_trace = false) {
    return generate(parse_underlying(notation), rc, keep_trace);
}

// Re-run only the steps named in a trace, in trace order.
inline std::string replay_trace(const UnderlyingForm& uf, const RuleCascade& rc,
                                const std::vector<TraceStep>& trace) {
    const auto& inv = rc.inventory();
    Word w = to_tokens(uf, inv);
    for (auto& t : trace) {
        const CascadeStep* s = rc.find(t.rule_id);
        if (!s) throw Error(ErrorKind::resolution, "trace names unknown rule '" + t.rule_id + "'");
        w = apply_step(*s, w, inv);
    }
    check_output(w, inv);
    return render_surface(w);
}

}  // namespace forge
