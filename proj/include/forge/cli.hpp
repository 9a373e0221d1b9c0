#pragma once
// `forge` command-line front end. dispatch() parses an argument vector, runs
// one subcommand and returns the process exit status.

#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "forge/analyze.hpp"
#include "forge/bench.hpp"
#include "forge/http.hpp"
#include "forge/lexicon.hpp"
#include "forge/metrics.hpp"
#include "forge/phonology.hpp"
#include "forge/rules.hpp"
#include "forge/typology.hpp"
#include "forge/verify.hpp"

#ifndef FORGE_DATA_DIR
#define FORGE_DATA_DIR "data"
#endif

namespace forge::cli {

namespace fs = std::filesystem;

inline fs::path data_dir() {
    if (const char* d = std::getenv("FORGE_DATA"); d && *d) return d;
    return FORGE_DATA_DIR;
}

inline fs::path demo_path(const std::string& name) { return data_dir() / "demo" / name; }

// Fails before any side effect when an input path is missing.
inline void require(const fs::path& p, std::string_view what) {
    if (!fs::exists(p)) throw Error(ErrorKind::missing_resource, std::string(what) + " " + p.string() + " not found");
}

enum class Format { rows, pretty };

// Tab-separated rows with a header, or a space-aligned table.
inline void emit(std::ostream& out, Format fmt, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    if (fmt == Format::rows) {
        out << text::join(header, "\t") << '\n';
        for (auto& r : rows) out << text::join(r, "\t") << '\n';
        return;
    }
    std::vector<std::size_t> w(header.size(), 0);
    auto widen = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], text::utf8_length(r[i]));
    };
    widen(header);
    for (auto& r : rows) widen(r);
    auto line = [&](const std::vector<std::string>& r) {
        std::string s;
        for (std::size_t i = 0; i < r.size(); ++i) {
            s += r[i];
            if (i + 1 < r.size()) s += std::string(w[i] - text::utf8_length(r[i]) + 2, ' ');
        }
        out << s << '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (auto n : w) rule.emplace_back(n, '-');
    line(rule);
    for (auto& r : rows) line(r);
}

struct Context {
    std::ostream& out;
    std::ostream& err;
    Format format = Format::rows;
};

inline RuleCascade load_rules(const std::string& path) {
    fs::path p = path.empty() ? demo_path("camlang.rules") : fs::path(path);
    require(p, "rules file");
    return RuleCascade::load(p);
}

inline Lexicon load_lexicon(const std::string& path) {
    fs::path p = path.empty() ? demo_path("lexicon.tsv") : fs::path(path);
    require(p, "lexicon");
    return Lexicon::load(p);
}

inline std::string entry_row(const LexEntry& e, bool model_facing) {
    std::vector<std::string> cols = {e.underlying, e.citation, e.gloss, e.pos,
                                     e.honorific == Honorific::honorific ? "honorific" : "ordinary",
                                     std::string(sourcing_name(e.sourcing))};
    if (!model_facing) cols.push_back(e.etymology);
    return text::join(cols, "\t");
}

inline void print_entries(Context& c, const std::vector<LexEntry>& es) {
    std::vector<std::vector<std::string>> rows;
    for (auto& e : es)
        rows.push_back({e.underlying, e.citation, e.gloss, e.pos,
                        e.honorific == Honorific::honorific ? "honorific" : "ordinary",
                        std::string(sourcing_name(e.sourcing))});
    emit(c.out, c.format, {"underlying", "citation", "gloss", "pos", "honorific", "sourcing"}, rows);
}

// Functional morpheme by its notation, e.g. "-mA4" or "pI4-".
inline Morpheme find_affix(const Lexicon& lx, std::string_view notation) {
    for (auto& f : lx.functional)
        if (f.morpheme.notation() == notation) return f.morpheme;
    throw Error(ErrorKind::derivation_refused,
                "affix '" + std::string(notation) + "' is not in the functional-morpheme inventory");
}

inline const LexEntry& find_entry(const Lexicon& lx, std::string_view underlying) {
    auto hits = lx.by_underlying(underlying);
    if (hits.empty()) throw Error(ErrorKind::missing_lexeme, "no lexicon entry '" + std::string(underlying) + "'");
    return *hits.front();
}

inline WalsCorpus load_typology(const std::string& wals) {
    auto own = data_dir() / "camlang.wals";
    require(own, "Camlang profile");
    WalsCorpus corpus;
    fs::path ext;
    if (!wals.empty()) ext = wals;
    else if (const char* e = std::getenv("FORGE_WALS_DATA"); e && *e) ext = e;
    else if (fs::exists(data_dir() / "wals")) ext = data_dir() / "wals";
    if (!ext.empty()) {
        require(ext, "WALS data");
        corpus = load_corpus(ext);
    }
    corpus.merge(parse_corpus(text::read_file(own)));
    return corpus;
}

inline std::string usage() {
    return "usage: forge [--format rows|pretty] <command> [options]\n"
           "commands:\n"
           "  rootgen    generate native roots from slot frequency tables\n"
           "  derive     run the rule cascade on an underlying form\n"
           "  analyze    propose underlying forms for a surface form\n"
           "  gloss      interlinear gloss of an underlying or surface form\n"
           "  lex        lexicon lookup | derive | compound | report | export\n"
           "  typo       typological similarity: sim | neighbours | richness\n"
           "  rouge      cross-annotator ROUGE consistency\n"
           "  bench      benchmark run | stats\n"
           "  verify     human-verified accuracy: score | dist\n"
           "run 'forge <command> --help' for options\n";
}

inline int dispatch(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    Context c{out, err};
    CLI::App app{"forge: constructed-language toolkit", "forge"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string format = "rows";
    app.add_option("--format", format, "output format")->check(CLI::IsMember({"rows", "pretty"}));

    // rootgen
    auto* rootgen = app.add_subcommand("rootgen", "generate native roots");
    std::string shape = "mono", inv_path, tables_path, dedup_path, out_path;
    std::size_t count = 1;
    std::optional<std::uint64_t> seed;
    rootgen->add_option("--shape", shape)->check(CLI::IsMember({"mono", "bi"}));
    rootgen->add_option("--n", count, "number of roots")->required();
    rootgen->add_option("--seed", seed);
    rootgen->add_option("--inventory", inv_path);
    rootgen->add_option("--tables", tables_path);
    rootgen->add_option("--dedup", dedup_path, "lexicon whose roots are excluded");
    rootgen->add_option("--out", out_path);

    // derive / analyze / gloss
    std::string rules_path, lexicon_path, input, style = "spaced";
    bool trace = false, from_surface = false;
    auto* derive_cmd = app.add_subcommand("derive", "underlying form to surface");
    derive_cmd->add_option("--rules", rules_path);
    derive_cmd->add_flag("--trace", trace);
    derive_cmd->add_option("form", input)->required();
    auto* analyze_cmd = app.add_subcommand("analyze", "surface form to candidate underlying forms");
    analyze_cmd->add_option("--rules", rules_path);
    analyze_cmd->add_option("--lexicon", lexicon_path);
    analyze_cmd->add_option("surface", input)->required();
    auto* gloss_cmd = app.add_subcommand("gloss", "interlinear gloss");
    gloss_cmd->add_option("--rules", rules_path);
    gloss_cmd->add_option("--lexicon", lexicon_path);
    gloss_cmd->add_option("--style", style)->check(CLI::IsMember({"spaced", "compact"}));
    gloss_cmd->add_flag("--surface", from_surface, "analyze the input first");
    gloss_cmd->add_option("form", input)->required();

    // lex
    auto* lex = app.add_subcommand("lex", "lexicon operations");
    lex->require_subcommand(1);
    lex->add_option("--lexicon", lexicon_path);
    lex->add_option("--rules", rules_path);
    std::string by = "underlying", counts_arg;
    std::vector<std::string> items;
    bool model_facing = false;
    auto* lex_lookup = lex->add_subcommand("lookup", "find entries");
    lex_lookup->add_option("--by", by)->check(CLI::IsMember({"underlying", "citation", "surface"}));
    lex_lookup->add_option("key", input)->required();
    auto* lex_derive = lex->add_subcommand("derive", "derived candidates from <stem> <affix> pairs");
    lex_derive->add_option("--out", out_path);
    auto* lex_compound = lex->add_subcommand("compound", "compound candidate from bare roots");
    lex_compound->add_option("parts", items)->required();
    auto* lex_report = lex->add_subcommand("report", "sourcing distribution");
    lex_report->add_option("--counts", counts_arg, "category=count,... instead of a lexicon");
    auto* lex_export = lex->add_subcommand("export", "sorted TSV export");
    lex_export->add_flag("--model", model_facing, "model-facing (no etymology)");
    lex_export->add_option("--out", out_path);

    // typo
    auto* typo = app.add_subcommand("typo", "typological comparison");
    typo->require_subcommand(1);
    std::string wals_path, lang_x, lang_y;
    std::size_t min_overlap = 1, k = 5;
    typo->add_option("--wals", wals_path, "WALS export (long CSV or CLDF directory)");
    auto* typo_sim = typo->add_subcommand("sim", "pairwise similarity");
    typo_sim->add_option("x", lang_x)->required();
    typo_sim->add_option("y", lang_y)->required();
    typo_sim->add_option("--min-overlap", min_overlap);
    auto* typo_nb = typo->add_subcommand("neighbours", "nearest languages");
    typo_nb->add_option("x", lang_x)->required();
    typo_nb->add_option("--min-overlap", min_overlap);
    typo_nb->add_option("-k", k);
    auto* typo_rich = typo->add_subcommand("richness", "feature-richness percentile");
    typo_rich->add_option("x", lang_x)->required();
    for (auto* s : {typo_sim, typo_nb, typo_rich}) s->add_option("--wals", wals_path);

    // rouge
    auto* rouge = app.add_subcommand("rouge", "cross-annotator consistency");
    int round = 1;
    std::string granularity = "word";
    rouge->add_option("--round", round)->required();
    rouge->add_option("--granularity", granularity)->check(CLI::IsMember({"word", "morpheme"}));
    rouge->add_option("corpus", input)->required();

    // bench
    auto* bench = app.add_subcommand("bench", "multiple-choice benchmark");
    bench->require_subcommand(1);
    std::string tasks_path, resources_path, mode = "context", replay_dir, field = "camlang";
    ClientConfig client;
    std::size_t parallelism = 1;
    auto* bench_run = bench->add_subcommand("run", "evaluate a task file");
    bench_run->add_option("--tasks", tasks_path)->required();
    bench_run->add_option("--resources", resources_path);
    bench_run->add_option("--mode", mode)->check(CLI::IsMember({"context"}));
    bench_run->add_option("--parallelism", parallelism);
    bench_run->add_option("--replay", replay_dir, "transcript directory instead of an endpoint");
    bench_run->add_option("--out", out_path, "run report (JSON)");
    bench_run->add_option("--model", client.model_name);
    bench_run->add_option("--api-base", client.base_url);
    bench_run->add_option("--timeout", client.timeout_seconds);
    bench_run->add_option("--retries", client.retry_budget);
    auto* bench_stats = bench->add_subcommand("stats", "question length statistics");
    bench_stats->add_option("--tasks", tasks_path)->required();
    bench_stats->add_option("--field", field)->check(CLI::IsMember({"camlang", "english_source"}));

    // verify
    auto* verify = app.add_subcommand("verify", "human-verified accuracy");
    verify->require_subcommand(1);
    std::string labels_path;
    std::size_t n_total = 0;
    bool allow_incorrect = false;
    auto* verify_score = verify->add_subcommand("score", "SHV / MHV / LHV / EM");
    verify_score->add_option("--labels", labels_path)->required();
    verify_score->add_option("--n-total", n_total)->required();
    verify_score->add_flag("--allow-em-incorrect", allow_incorrect);
    auto* verify_dist = verify->add_subcommand("dist", "label distribution");
    verify_dist->add_option("--labels", labels_path)->required();
    verify_dist->add_flag("--allow-em-incorrect", allow_incorrect);

    for (std::size_t i = 0; i < args.size(); ++i) {
        const auto& a = args[i];
        if (a == "--format") {
            ++i;
            continue;
        }
        if (a.empty() || a[0] == '-') continue;
        if (!app.get_subcommand_no_throw(a)) {
            err << "error: usage: unknown command '" << a << "'\n" << usage();
            return 2;
        }
        break;
    }

    // Affixes such as "-mA4" look like options, so `lex derive` pairs are
    // lifted out before CLI11 sees them.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "lex") continue;
        std::size_t j = i + 1;
        while (j < args.size() && args[j] != "derive") j += (args[j] == "--lexicon" || args[j] == "--rules") ? 2 : 1;
        if (j >= args.size()) break;
        std::vector<std::string> kept(args.begin(), args.begin() + static_cast<long>(j) + 1);
        for (std::size_t m = j + 1; m < args.size(); ++m) {
            if (args[m] == "--out" && m + 1 < args.size()) {
                kept.push_back(args[m]);
                kept.push_back(args[++m]);
            } else if (args[m] == "-h" || args[m] == "--help") {
                kept.push_back(args[m]);
            } else {
                items.push_back(args[m]);
            }
        }
        args = std::move(kept);
        break;
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << '\n' << usage();
        return 2;
    }
    c.format = format == "pretty" ? Format::pretty : Format::rows;

    try {
        if (rootgen->parsed()) {
            auto sh = shape == "bi" ? SyllableShape::bisyllabic : SyllableShape::monosyllabic;
            fs::path ip = inv_path.empty() ? demo_path("inventory.tsv") : fs::path(inv_path);
            fs::path tp = tables_path.empty() ? demo_path(shape == "bi" ? "bi.tables" : "mono.tables")
                                              : fs::path(tables_path);
            require(ip, "inventory");
            require(tp, "tables");
            std::unordered_set<std::string> dedup;
            if (!dedup_path.empty()) {
                require(dedup_path, "lexicon");
                for (auto& e : Lexicon::load(dedup_path).entries) {
                    dedup.insert(e.citation);
                    if (e.is_bare_root()) dedup.insert(e.underlying);
                }
            }
            if (!seed) {
                seed = (static_cast<std::uint64_t>(std::random_device{}()) << 32) ^ std::random_device{}();
                err << "seed: " << *seed << '\n';
            }
            auto roots = generate_root(PhonemeInventory::load(ip), load_tables(tp), sh, count, *seed, dedup);
            std::vector<std::vector<std::string>> rows;
            for (auto& r : roots) {
                std::vector<std::string> slots;
                for (auto& s : r.slots) slots.push_back(s.empty() ? std::string(kEmptySlot) : s);
                rows.push_back({r.text(), text::join(slots, ".")});
            }
            std::ostringstream buf;
            emit(buf, c.format, {"root", "slots"}, rows);
            if (!out_path.empty()) text::atomic_write(out_path, buf.str());
            else out << buf.str();
            return 0;
        }
        if (derive_cmd->parsed()) {
            auto rc = load_rules(rules_path);
            auto sf = generate(input, rc, trace);
            if (trace) {
                std::vector<std::vector<std::string>> rows;
                for (auto& t : sf.trace) rows.push_back({t.rule_id, t.before, t.after});
                emit(err, c.format, {"rule", "before", "after"}, rows);
            }
            out << sf.text << '\n';
            return 0;
        }
        if (analyze_cmd->parsed()) {
            auto rc = load_rules(rules_path);
            auto lx = load_lexicon(lexicon_path);
            std::vector<std::vector<std::string>> rows;
            for (auto& uf : analyze(input, rc, lx)) rows.push_back({uf.notation(), gloss(uf, lx, GlossStyle::spaced)});
            emit(out, c.format, {"underlying", "gloss"}, rows);
            return 0;
        }
        if (gloss_cmd->parsed()) {
            auto lx = load_lexicon(lexicon_path);
            auto st = style == "compact" ? GlossStyle::compact : GlossStyle::spaced;
            if (!from_surface) {
                out << gloss(parse_underlying(input), lx, st) << '\n';
                return 0;
            }
            auto rc = load_rules(rules_path);
            auto parses = analyze(input, rc, lx);
            if (parses.empty()) throw Error(ErrorKind::missing_lexeme, "no analysis of '" + input + "'");
            std::vector<std::vector<std::string>> rows;
            for (auto& uf : parses) rows.push_back({uf.notation(), gloss(uf, lx, st)});
            emit(out, c.format, {"underlying", "gloss"}, rows);
            return 0;
        }
        if (lex->parsed()) {
            if (lex_report->parsed() && !counts_arg.empty()) {
                std::map<Sourcing, std::size_t> counts;
                for (auto& kv : text::split(counts_arg, ',')) {
                    auto eq = kv.find('=');
                    auto cat = eq == std::string::npos ? std::nullopt : parse_sourcing(text::trim(kv.substr(0, eq)));
                    if (!cat) throw Error(ErrorKind::usage, "bad --counts item '" + kv + "'");
                    try {
                        counts[*cat] += std::stoul(kv.substr(eq + 1));
                    } catch (const std::exception&) {
                        throw Error(ErrorKind::usage, "bad --counts item '" + kv + "'");
                    }
                }
                auto rep = sourcing_report(counts);
                std::vector<std::vector<std::string>> rows;
                for (auto& r : rep.rows)
                    rows.push_back({std::string(sourcing_name(r.category)), std::to_string(r.count),
                                    text::fixed(r.percent, 2)});
                emit(out, c.format, {"sourcing", "count", "percent"}, rows);
                return 0;
            }
            auto lx = load_lexicon(lexicon_path);
            if (lex_lookup->parsed()) {
                if (by == "surface") {
                    auto rc = load_rules(rules_path);
                    print_entries(c, lookup(input, LookupMode::by_surface, lx, &rc));
                } else {
                    print_entries(c, lookup(input, by == "citation" ? LookupMode::by_citation
                                                                     : LookupMode::by_underlying, lx));
                }
                return 0;
            }
            if (lex_report->parsed()) {
                auto rep = sourcing_report(lx);
                std::vector<std::vector<std::string>> rows;
                for (auto& r : rep.rows)
                    rows.push_back({std::string(sourcing_name(r.category)), std::to_string(r.count),
                                    text::fixed(r.percent, 2)});
                emit(out, c.format, {"sourcing", "count", "percent"}, rows);
                return 0;
            }
            if (lex_export->parsed()) {
                auto tsv = lx.export_tsv(model_facing);
                if (!out_path.empty()) text::atomic_write(out_path, tsv);
                else out << tsv;
                return 0;
            }
            auto rc = load_rules(rules_path);
            std::vector<LexEntry> made;
            if (lex_derive->parsed()) {
                if (items.empty() || items.size() % 2 != 0) throw Error(ErrorKind::usage, "lex derive takes <stem> <affix> pairs");
                for (std::size_t i = 0; i < items.size(); i += 2)
                    made.push_back(derive(find_entry(lx, items[i]), find_affix(lx, items[i + 1]), lx, rc));
            } else {
                std::vector<LexEntry> parts;
                for (auto& p : items) parts.push_back(find_entry(lx, p));
                made.push_back(compound(parts, rc));
            }
            if (!out_path.empty()) {
                std::string tsv = std::string(kLexiconHeader) + "\n";
                for (auto& e : made) tsv += entry_row(e, false) + "\n";
                text::atomic_write(out_path, tsv);
            }
            print_entries(c, made);
            return 0;
        }
        if (typo->parsed()) {
            auto corpus = load_typology(wals_path);
            const auto& x = corpus.at(lang_x);
            if (typo_sim->parsed()) {
                auto r = similarity(x, corpus.at(lang_y), min_overlap);
                if (auto* b = std::get_if<BelowThreshold>(&r)) {
                    emit(out, c.format, {"x", "y", "overlap", "status"},
                         {{b->x, b->y, std::to_string(b->overlap),
                           "below-threshold (min " + std::to_string(b->min_overlap) + ")"}});
                    return 0;
                }
                auto& s = std::get<SimilarityResult>(r);
                emit(out, c.format, {"x", "y", "overlap", "matches", "similarity"},
                     {{s.x, s.y, std::to_string(s.overlap), std::to_string(s.matches), text::fixed(s.similarity, 4)}});
                return 0;
            }
            if (typo_nb->parsed()) {
                std::vector<std::vector<std::string>> rows;
                std::size_t rank = 0;
                for (auto& s : neighbours(x, corpus, min_overlap, k)) {
                    auto& p = corpus.at(s.y);
                    rows.push_back({std::to_string(++rank), s.y, p.name, std::to_string(s.overlap),
                                    std::to_string(s.matches), text::fixed(s.similarity, 4)});
                }
                emit(out, c.format, {"rank", "code", "name", "overlap", "matches", "similarity"}, rows);
                return 0;
            }
            emit(out, c.format, {"code", "features", "corpus", "percentile"},
                 {{x.code, std::to_string(x.features.size()), std::to_string(corpus.size()),
                   text::fixed(richness_percentile(x, corpus), 4)}});
            return 0;
        }
        if (rouge->parsed()) {
            require(input, "corpus");
            auto g = granularity == "morpheme" ? Granularity::morpheme : Granularity::word;
            auto sets = parse_rouge_corpus(text::read_file(input), round, g);
            auto rep = consistency_report(sets);
            emit(out, c.format, {"round", "granularity", "pairs", "sentences", "rouge1", "rouge2", "rougeL"},
                 {{std::to_string(round), granularity, std::to_string(rep.pairs), std::to_string(rep.sentences),
                   text::fixed(rep.scores.r1, 2), text::fixed(rep.scores.r2, 2), text::fixed(rep.scores.rl, 2)}});
            return 0;
        }
        if (bench_run->parsed()) {
            require(tasks_path, "task file");
            fs::path rp = resources_path.empty() ? data_dir() / "demo" : fs::path(resources_path);
            require(rp, "resource directory");
            auto tasks = load_tasks(tasks_path);
            auto res = ResourceBundle::load(rp);
            std::unique_ptr<ResponseSource> src;
            if (!replay_dir.empty()) {
                src = std::make_unique<ReplaySource>(replay_dir);
            } else {
                client.apply_env();
                src = std::make_unique<HttpSource>(client);
            }
            RunOptions opts;
            opts.parallelism = parallelism;
            if (!out_path.empty()) opts.output = out_path;
            auto rep = run_eval(tasks, *src, res, opts);
            std::vector<std::vector<std::string>> rows;
            for (auto& r : rep.instances)
                rows.push_back({r.id, std::string(1, r.gold), r.extracted ? std::string(1, *r.extracted) : "-",
                                r.correct ? "1" : "0", text::fixed(r.latency_seconds, 3),
                                r.transport_error ? "transport-error" : ""});
            rows.push_back({"ALL", "", "", text::fixed(rep.em, 4), text::fixed(rep.mean_latency, 3),
                            std::to_string(rep.transport_errors) + " transport errors"});
            emit(out, c.format, {"id", "gold", "extracted", "correct", "latency_s", "note"}, rows);
            return 0;
        }
        if (bench_stats->parsed()) {
            require(tasks_path, "task file");
            auto st = length_stats(load_tasks(tasks_path),
                                   field == "english_source" ? LengthField::english_source : LengthField::camlang);
            std::vector<std::vector<std::string>> rows;
            for (auto& [bin, n] : st.bins) rows.push_back({bin, std::to_string(n)});
            rows.push_back({"mean", text::fixed(st.mean, 2)});
            emit(out, c.format, {"words", "questions"}, rows);
            return 0;
        }
        if (verify->parsed()) {
            require(labels_path, "label file");
            auto records = load_labels(labels_path, allow_incorrect);
            std::map<std::string, std::vector<VerificationRecord>> by_system;
            for (auto& r : records) by_system[r.system_id].push_back(r);
            if (by_system.empty()) throw Error(ErrorKind::empty_input, "label file has no records");
            std::vector<std::vector<std::string>> rows;
            if (verify_score->parsed()) {
                for (auto& [sys, rs] : by_system) {
                    auto m = compute_metrics(rs, n_total, allow_incorrect);
                    rows.push_back({sys, std::to_string(m.n_total), text::fixed(100 * m.shv, 2),
                                    text::fixed(100 * m.mhv, 2), text::fixed(100 * m.lhv, 2),
                                    text::fixed(100 * m.em, 2)});
                }
                emit(out, c.format, {"system", "n_total", "SHV", "MHV", "LHV", "EM"}, rows);
                return 0;
            }
            for (auto& [sys, rs] : by_system)
                for (auto& d : distribution_report(rs))
                    for (std::size_t i = 0; i < 4; ++i)
                        rows.push_back({sys, d.aspect, std::string(label_name(kAllLabels[i])),
                                        std::to_string(d.counts[i]), text::fixed(d.percent[i], 2)});
            emit(out, c.format, {"system", "aspect", "label", "count", "percent"}, rows);
            return 0;
        }
    } catch (const Error& e) {
        err << "error: " << kind_name(e.kind()) << ": " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return 1;
    }
    err << usage();
    return 2;
}

}  // namespace forge::cli
