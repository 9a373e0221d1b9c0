#pragma once
// Multiple-choice benchmark harness: task loading, context-only prompt
// assembly, answer extraction, evaluation runs and question length stats.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "forge/error.hpp"
#include "forge/text.hpp"

namespace forge {

inline constexpr std::string_view kOptionLabels = "ABCDEF";

struct TaskInstance {
    std::string id;
    std::string question;
    std::vector<std::string> options;  // exactly 6, A..F
    char gold = 'A';
    std::optional<std::string> english_source;
    std::optional<std::string> gloss;
};

struct ResourceBundle {
    std::string grammar_text;
    std::string vocab_table;

    // grammar.md and vocab.tsv from a directory.
    static ResourceBundle load(const std::filesystem::path& dir) {
        ResourceBundle r;
        auto g = dir / "grammar.md";
        auto v = dir / "vocab.tsv";
        if (!std::filesystem::exists(g)) throw Error(ErrorKind::missing_resource, "missing " + g.string());
        if (!std::filesystem::exists(v)) throw Error(ErrorKind::missing_resource, "missing " + v.string());
        r.grammar_text = text::read_file(g);
        r.vocab_table = text::read_file(v);
        r.check();
        return r;
    }

    void check() const {
        if (text::trim(grammar_text).empty()) throw Error(ErrorKind::missing_resource, "grammar text is empty");
        if (text::trim(vocab_table).empty()) throw Error(ErrorKind::missing_resource, "vocabulary table is empty");
        auto header = vocab_table.substr(0, vocab_table.find('\n'));
        for (auto& col : text::split(header, '\t'))
            if (text::trim(col) == "etymology")
                throw Error(ErrorKind::contract_violation, "vocabulary table must not carry an etymology column");
    }
};

enum class PromptMode { context_only };

// ---------------------------------------------------------------------------
// Tasks

inline TaskInstance task_from_json(const nlohmann::json& j, std::size_t lineno) {
    auto fail = [&](const std::string& id, const std::string& m) {
        return Error(ErrorKind::load,
                     "tasks line " + std::to_string(lineno) + (id.empty() ? "" : " (" + id + ")") + ": " + m, lineno);
    };
    if (!j.is_object()) throw fail("", "record is not an object");
    TaskInstance t;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
        throw fail("", "missing id");
    t.id = j["id"].get<std::string>();
    if (!j.contains("question") || !j["question"].is_string()) throw fail(t.id, "missing question");
    t.question = j["question"].get<std::string>();
    if (!j.contains("options")) throw fail(t.id, "missing options");
    const auto& o = j["options"];
    if (o.is_array()) {
        if (o.size() != 6) throw fail(t.id, "expected 6 options, got " + std::to_string(o.size()));
        for (auto& x : o) {
            if (!x.is_string()) throw fail(t.id, "option is not a string");
            t.options.push_back(x.get<std::string>());
        }
    } else if (o.is_object()) {
        if (o.size() != 6) throw fail(t.id, "expected 6 options, got " + std::to_string(o.size()));
        for (char L : kOptionLabels) {
            std::string key(1, L);
            if (!o.contains(key) || !o[key].is_string()) throw fail(t.id, "missing option " + key);
            t.options.push_back(o[key].get<std::string>());
        }
    } else {
        throw fail(t.id, "options must be an array or an object");
    }
    if (!j.contains("gold") || !j["gold"].is_string()) throw fail(t.id, "missing gold label");
    auto gold = j["gold"].get<std::string>();
    if (gold.size() != 1 || kOptionLabels.find(gold[0]) == std::string_view::npos)
        throw fail(t.id, "gold label '" + gold + "' is not one of A-F");
    t.gold = gold[0];
    if (j.contains("english_source") && j["english_source"].is_string())
        t.english_source = j["english_source"].get<std::string>();
    if (j.contains("gloss") && j["gloss"].is_string()) t.gloss = j["gloss"].get<std::string>();
    return t;
}

inline nlohmann::json task_to_json(const TaskInstance& t) {
    nlohmann::json o = nlohmann::json::object();
    for (std::size_t i = 0; i < 6; ++i) o[std::string(1, kOptionLabels[i])] = t.options[i];
    nlohmann::json j = {{"id", t.id}, {"question", t.question}, {"options", o}, {"gold", std::string(1, t.gold)}};
    if (t.english_source) j["english_source"] = *t.english_source;
    if (t.gloss) j["gloss"] = *t.gloss;
    return j;
}

// One JSON object per line; blank lines and lines starting with '#' are skipped.
inline std::vector<TaskInstance> parse_tasks(std::string_view content) {
    std::vector<TaskInstance> out;
    std::set<std::string> seen;
    std::size_t lineno = 0;
    for (auto& raw : text::split(content, '\n')) {
        ++lineno;
        auto line = text::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorKind::load, "tasks line " + std::to_string(lineno) + ": " + e.what(), lineno);
        }
        auto t = task_from_json(j, lineno);
        if (!seen.insert(t.id).second)
            throw Error(ErrorKind::load, "tasks line " + std::to_string(lineno) + " (" + t.id + "): duplicate id",
                        lineno);
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<TaskInstance> load_tasks(const std::filesystem::path& p) { return parse_tasks(text::read_file(p)); }

// ---------------------------------------------------------------------------
// Prompt

inline constexpr std::string_view kContextPreamble =
    "You are given the Camlang grammar book (Camlang.md) and English-Camlang vocabulary (Vocab.xlsx) for the "
    "Camlang language. You are asked to use these two resources to understand and answer the question in Camlang.";
inline constexpr std::string_view kGrammarHeader = "=== Camlang Grammar ===";
inline constexpr std::string_view kVocabHeader = "=== English-Camlang Vocabulary ===";
inline constexpr std::string_view kAnswerInstruction =
    "Below is a multiple-choice question written in Camlang. You are allowed to generate reasoning steps and an "
    "explanation to demonstrate your choice. However, the final line of your response must be exactly in this "
    "format, where {your_answer} is the option letter (A, B, C, D, E, or F): The final answer is {your_answer}.";

inline std::string build_prompt(const TaskInstance& t, const ResourceBundle& res,
                                PromptMode mode = PromptMode::context_only) {
    (void)mode;  // context_only is the only mode
    res.check();
    std::string p;
    p += kContextPreamble;
    p += "\n\n";
    p += kGrammarHeader;
    p += "\n\n";
    p += res.grammar_text;
    p += "\n\n";
    p += kVocabHeader;
    p += "\n\n";
    p += res.vocab_table;
    p += "\n\n";
    p += kAnswerInstruction;
    p += "\n\n";
    p += t.question;
    for (std::size_t i = 0; i < t.options.size(); ++i) {
        p += '\n';
        p += kOptionLabels[i];
        p += ". ";
        p += t.options[i];
    }
    return p;
}

// ---------------------------------------------------------------------------
// Answer extraction

// Last "The final answer is X" (phrase case-insensitive, optional colon,
// bold/italic markers, quotes or brackets around the letter).
inline std::optional<char> extract_answer(std::string_view response) {
    static const std::regex re(R"(the\s+final\s+answer\s+is\s*:?\s*[\*_"'`\(\[]*\s*([A-Fa-f])(?![A-Za-z]))",
                               std::regex::icase | std::regex::ECMAScript);
    std::optional<char> last;
    std::string s(response);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
        char c = (*it)[1].str()[0];
        last = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return last;
}

// ---------------------------------------------------------------------------
// Runs

class TransportError : public Error {
public:
    explicit TransportError(const std::string& m) : Error(ErrorKind::transport, m) {}
};

// Produces a model response for one instance.
class ResponseSource {
public:
    virtual ~ResponseSource() = default;
    virtual std::string respond(const TaskInstance& task, const std::string& prompt) = 0;
};

// Reads <dir>/<id>.txt.
class ReplaySource : public ResponseSource {
public:
    explicit ReplaySource(std::filesystem::path dir) : dir_(std::move(dir)) {
        if (!std::filesystem::is_directory(dir_))
            throw Error(ErrorKind::missing_resource, "replay directory " + dir_.string() + " does not exist");
    }
    std::string respond(const TaskInstance& task, const std::string&) override {
        auto p = dir_ / (task.id + ".txt");
        if (!std::filesystem::exists(p)) throw TransportError("no transcript " + p.string());
        return text::read_file(p);
    }

private:
    std::filesystem::path dir_;
};

// In-memory responses keyed by instance id.
class MapSource : public ResponseSource {
public:
    explicit MapSource(std::map<std::string, std::string> m) : m_(std::move(m)) {}
    std::string respond(const TaskInstance& task, const std::string&) override {
        auto it = m_.find(task.id);
        if (it == m_.end()) throw TransportError("no response for " + task.id);
        return it->second;
    }

private:
    std::map<std::string, std::string> m_;
};

struct InstanceResult {
    std::string id;
    std::string response;
    std::optional<char> extracted;
    char gold = 'A';
    bool correct = false;
    double latency_seconds = 0;
    std::optional<std::string> transport_error;
};

struct RunReport {
    std::vector<InstanceResult> instances;  // sorted by id
    std::size_t correct = 0;
    std::size_t transport_errors = 0;
    double em = 0;
    double mean_latency = 0;

    nlohmann::json to_json() const {
        nlohmann::json arr = nlohmann::json::array();
        for (auto& r : instances) {
            nlohmann::json j = {{"id", r.id},
                                {"gold", std::string(1, r.gold)},
                                {"extracted", r.extracted ? nlohmann::json(std::string(1, *r.extracted)) : nlohmann::json()},
                                {"correct", r.correct},
                                {"latency_seconds", r.latency_seconds},
                                {"response", r.response}};
            if (r.transport_error) j["transport_error"] = *r.transport_error;
            arr.push_back(std::move(j));
        }
        return {{"instances", arr},
                {"aggregate",
                 {{"n", instances.size()},
                  {"correct", correct},
                  {"em", em},
                  {"mean_latency_seconds", mean_latency},
                  {"transport_errors", transport_errors}}}};
    }
};

inline RunReport summarize(std::vector<InstanceResult> results) {
    RunReport rep;
    std::sort(results.begin(), results.end(), [](const InstanceResult& a, const InstanceResult& b) { return a.id < b.id; });
    double lat = 0;
    for (auto& r : results) {
        rep.correct += r.correct ? 1 : 0;
        rep.transport_errors += r.transport_error ? 1 : 0;
        lat += r.latency_seconds;
    }
    if (!results.empty()) {
        rep.em = static_cast<double>(rep.correct) / static_cast<double>(results.size());
        rep.mean_latency = lat / static_cast<double>(results.size());
    }
    rep.instances = std::move(results);
    return rep;
}

struct RunOptions {
    PromptMode mode = PromptMode::context_only;
    std::size_t parallelism = 1;
    std::optional<std::filesystem::path> output;  // written atomically as JSON
};

// One request per instance; failures after the source's own retries become
// transport-error records scored incorrect.
inline RunReport run_eval(const std::vector<TaskInstance>& tasks, ResponseSource& source, const ResourceBundle& res,
                          const RunOptions& opts = {}) {
    std::vector<InstanceResult> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const auto& t = tasks[i];
            auto& r = results[i];
            r.id = t.id;
            r.gold = t.gold;
            auto prompt = build_prompt(t, res, opts.mode);
            auto t0 = std::chrono::steady_clock::now();
            try {
                r.response = source.respond(t, prompt);
                r.extracted = extract_answer(r.response);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::transport) throw;
                r.transport_error = e.what();
            }
            r.latency_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            r.correct = r.extracted && *r.extracted == t.gold;
        }
    };
    std::size_t n = std::max<std::size_t>(1, std::min(opts.parallelism, tasks.size()));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        std::mutex err_mu;
        std::exception_ptr first_error;
        for (std::size_t k = 0; k < n; ++k)
            pool.emplace_back([&] {
                try {
                    worker();
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                    next = tasks.size();
                }
            });
        for (auto& th : pool) th.join();
        if (first_error) std::rethrow_exception(first_error);
    }
    auto rep = summarize(std::move(results));
    if (opts.output) text::atomic_write(*opts.output, rep.to_json().dump(2) + "\n");
    return rep;
}

// ---------------------------------------------------------------------------
// Length statistics

enum class LengthField { english_source, camlang };

struct LengthStats {
    std::size_t n = 0;
    double mean = 0;
    std::vector<std::pair<std::string, std::size_t>> bins;  // "1-5", "6-10", ...
};

inline LengthStats length_stats(const std::vector<TaskInstance>& tasks, LengthField field) {
    LengthStats s;
    std::vector<std::size_t> counts;
    double total = 0;
    for (auto& t : tasks) {
        const std::string* text_ptr = &t.question;
        if (field == LengthField::english_source) {
            if (!t.english_source)
                throw Error(ErrorKind::contract_violation, "instance " + t.id + " has no english_source");
            text_ptr = &*t.english_source;
        }
        std::size_t len = text::split_ws(*text_ptr).size();
        total += static_cast<double>(len);
        std::size_t bin = len == 0 ? 0 : (len - 1) / 5;
        if (counts.size() <= bin) counts.resize(bin + 1, 0);
        ++counts[bin];
        ++s.n;
    }
    s.mean = s.n ? total / static_cast<double>(s.n) : 0;
    for (std::size_t b = 0; b < counts.size(); ++b)
        s.bins.emplace_back(std::to_string(b * 5 + 1) + "-" + std::to_string(b * 5 + 5), counts[b]);
    return s;
}

}  // namespace forge
