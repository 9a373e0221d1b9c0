#include <gtest/gtest.h>

#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "forge/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out, err;
    Run r;
    r.code = forge::cli::dispatch(std::move(args), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("forge_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

const fs::path kDemo = fs::path(FORGE_DATA_DIR) / "demo";

}  // namespace

TEST(Cli, DeriveSurface) {
    auto r = run({"derive", "cak -mA4"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "cakma\n");
}

TEST(Cli, DeriveTraceGoesToStderr) {
    auto r = run({"derive", "--trace", "lI= x= cew -RED -mA4 -s =jUr"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "lichéwcymyśür\n");
    EXPECT_FALSE(r.err.empty());
}

TEST(Cli, UnknownCommandIsUsageError) {
    auto r = run({"nosuch"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("unknown command 'nosuch'"), std::string::npos);
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"rootgen"}).code, 2);  // --n is required
}

TEST(Cli, RuntimeErrorLine) {
    auto r = run({"derive", "= cew"});
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.err.rfind("error: parse: ", 0), 0u) << r.err;
    auto m = run({"verify", "score", "--labels", "/nonexistent/labels.tsv", "--n-total", "3"});
    EXPECT_EQ(m.code, 1);
    EXPECT_EQ(m.err.rfind("error: ", 0), 0u);
}

TEST(Cli, RootgenReportsSeedWhenUnset) {
    auto r = run({"rootgen", "--n", "3"});
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.err.rfind("seed: ", 0), 0u);
    EXPECT_EQ(lines(r.out).size(), 4u);  // header + 3 rows

    auto a = run({"rootgen", "--shape", "bi", "--n", "5", "--seed", "9"});
    auto b = run({"rootgen", "--shape", "bi", "--n", "5", "--seed", "9"});
    EXPECT_EQ(a.out, b.out);
    EXPECT_TRUE(a.err.empty());
}

TEST(Cli, PrettyFormat) {
    auto rows = run({"lex", "lookup", "--by", "underlying", "xöt"});
    auto pretty = run({"--format", "pretty", "lex", "lookup", "--by", "underlying", "xöt"});
    ASSERT_EQ(rows.code, 0);
    ASSERT_EQ(pretty.code, 0);
    EXPECT_NE(rows.out.find('\t'), std::string::npos);
    EXPECT_EQ(pretty.out.find('\t'), std::string::npos);
    EXPECT_NE(pretty.out.find("---"), std::string::npos);
    EXPECT_NE(pretty.out.find("must, need, require"), std::string::npos);
    EXPECT_EQ(run({"--format", "xml", "derive", "cak"}).code, 2);
}

TEST(Cli, LexDeriveWithDashArguments) {
    auto r = run({"lex", "derive", "cak", "-mA4", "kök", "-GA4s", "soruk", "pI4-"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("cakma"), std::string::npos);
    EXPECT_NE(r.out.find("kökkys"), std::string::npos);
    EXPECT_NE(r.out.find("pusóruk"), std::string::npos);
}

TEST(Cli, TypologyWithSyntheticCorpus) {
    TempDir dir;
    auto camlang = forge::load_corpus(fs::path(FORGE_DATA_DIR) / "camlang.wals").at("camlang");
    // "eng" agrees on every other Camlang feature.
    std::ofstream f(dir.path / "wals.csv");
    f << "language_code,feature_id,value,name\n";
    std::size_t i = 0, same = 0, n = 0;
    for (auto& [feat, v] : camlang.features) {
        if (n == 40) break;
        bool agree = i++ % 2 == 0;
        same += agree;
        ++n;
        f << "eng," << feat << "," << (agree ? v : v + 1) << ",English\n";
    }
    f.close();
    auto r = run({"typo", "--wals", (dir.path / "wals.csv").string(), "sim", "camlang", "eng", "--min-overlap",
                  "20"});
    ASSERT_EQ(r.code, 0) << r.err;
    char row[96];
    std::snprintf(row, sizeof row, "camlang\teng\t%zu\t%zu\t%.4f", n, same,
                  static_cast<double>(same) / static_cast<double>(n));
    EXPECT_EQ(lines(r.out).at(1), row);

    auto below = run({"typo", "--wals", (dir.path / "wals.csv").string(), "sim", "camlang", "eng",
                      "--min-overlap", "50"});
    EXPECT_EQ(below.code, 0);
    EXPECT_NE(below.out.find("below"), std::string::npos) << below.out;
}

TEST(Cli, AtomicOutFile) {
    TempDir dir;
    auto out = dir.path / "roots.tsv";
    std::ofstream(out) << "previous";
    auto r = run({"rootgen", "--n", "4", "--seed", "1", "--out", out.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    auto content = forge::text::read_file(out);
    EXPECT_EQ(lines(content).size(), 5u);
    std::size_t files = 0;
    for ([[maybe_unused]] auto& e : fs::directory_iterator(dir.path)) ++files;
    EXPECT_EQ(files, 1u);
}

TEST(Cli, BenchReplayAndVerify) {
    TempDir dir;
    auto report = dir.path / "report.json";
    auto r = run({"bench", "run", "--tasks", (kDemo / "task.jsonl").string(), "--replay", (kDemo / "replay").string(),
                  "--out", report.string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("ALL"), std::string::npos);
    auto j = nlohmann::json::parse(forge::text::read_file(report));
    EXPECT_EQ(j["aggregate"]["em"], 1.0);

    auto v = run({"verify", "score", "--labels", (kDemo / "labels.tsv").string(), "--n-total", "1"});
    ASSERT_EQ(v.code, 0) << v.err;
    EXPECT_NE(v.out.find("demo-model"), std::string::npos);
    EXPECT_NE(v.out.find("100.00"), std::string::npos);
}
