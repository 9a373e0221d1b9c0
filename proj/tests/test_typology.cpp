#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include <unistd.h>

#include "forge/typology.hpp"

using namespace forge;
namespace fs = std::filesystem;

namespace {

// Dense synthetic corpus: value 0 means "not coded".
struct Dense {
    std::vector<std::string> codes;
    std::vector<std::vector<int>> values;  // [lang][feature]
};

Dense make_dense(std::uint32_t seed, int langs, int feats) {
    std::mt19937 rng(seed);
    Dense d;
    for (int l = 0; l < langs; ++l) {
        d.codes.push_back("l" + std::to_string(l));
        std::vector<int> row(feats);
        double coverage = 0.2 + 0.8 * (rng() % 100) / 100.0;
        for (auto& v : row) v = (rng() % 1000) / 1000.0 < coverage ? 1 + static_cast<int>(rng() % 4) : 0;
        d.values.push_back(row);
    }
    return d;
}

std::string to_csv(const Dense& d) {
    std::string s = "language_code,feature_id,value\n";
    for (std::size_t l = 0; l < d.codes.size(); ++l)
        for (std::size_t f = 0; f < d.values[l].size(); ++f)
            if (d.values[l][f]) s += d.codes[l] + ",F" + std::to_string(f) + "," + std::to_string(d.values[l][f]) + "\n";
    return s;
}

// Oracle: positional scan over the dense matrix.
std::pair<std::size_t, std::size_t> oracle_counts(const Dense& d, std::size_t a, std::size_t b) {
    std::size_t overlap = 0, same = 0;
    for (std::size_t f = 0; f < d.values[a].size(); ++f)
        if (d.values[a][f] && d.values[b][f]) {
            ++overlap;
            same += d.values[a][f] == d.values[b][f];
        }
    return {overlap, same};
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("forge_typo_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    void write(const std::string& name, const std::string& content) const {
        fs::create_directories((path / name).parent_path());
        std::ofstream(path / name) << content;
    }
};

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::usage;
}

}  // namespace

TEST(Similarity, MatchesOracle) {
    auto d = make_dense(5, 40, 60);
    auto c = parse_corpus(to_csv(d));
    ASSERT_EQ(c.size(), d.codes.size());
    for (std::size_t a = 0; a < d.codes.size(); ++a)
        for (std::size_t b = 0; b < d.codes.size(); ++b) {
            auto [ov, same] = oracle_counts(d, a, b);
            auto r = similarity(c.at(d.codes[a]), c.at(d.codes[b]), 10);
            if (ov < 10) {
                auto* bt = std::get_if<BelowThreshold>(&r);
                ASSERT_NE(bt, nullptr);
                EXPECT_EQ(bt->overlap, ov);
                EXPECT_EQ(bt->min_overlap, 10u);
            } else {
                auto* s = std::get_if<SimilarityResult>(&r);
                ASSERT_NE(s, nullptr);
                EXPECT_EQ(s->overlap, ov);
                EXPECT_EQ(s->matches, same);
                EXPECT_DOUBLE_EQ(s->similarity, static_cast<double>(same) / ov);
            }
        }
}

TEST(Similarity, SymmetricAndSelfIsOne) {
    auto d = make_dense(9, 12, 50);
    auto c = parse_corpus(to_csv(d));
    for (auto& x : c.languages())
        for (auto& y : c.languages()) {
            auto a = similarity(x, y, 1), b = similarity(y, x, 1);
            ASSERT_EQ(a.index(), b.index());
            if (auto* s = std::get_if<SimilarityResult>(&a)) {
                EXPECT_DOUBLE_EQ(s->similarity, std::get<SimilarityResult>(b).similarity);
                if (x.code == y.code) EXPECT_DOUBLE_EQ(s->similarity, 1.0);
            }
        }
}

TEST(Similarity, HandExample) {
    auto c = parse_corpus("language_code,feature_id,value\n"
                          "x,1A,1\nx,2A,2\nx,3A,3\nx,4A,1\n"
                          "y,1A,1\ny,2A,2\ny,3A,1\ny,9A,1\n");
    auto r = std::get<SimilarityResult>(similarity(c.at("x"), c.at("y"), 3));
    EXPECT_EQ(r.overlap, 3u);
    EXPECT_EQ(r.matches, 2u);
    EXPECT_NEAR(r.similarity, 2.0 / 3.0, 1e-12);
    EXPECT_TRUE(std::holds_alternative<BelowThreshold>(similarity(c.at("x"), c.at("y"), 4)));
}

TEST(Similarity, ZeroMinOverlapIsContractViolation) {
    WalsProfile a{"a", {}, {}, {}, {{"1A", 1}}};
    EXPECT_EQ(kind_of([&] { similarity(a, a, 0); }), ErrorKind::contract_violation);
}

TEST(Neighbours, RankedAndExcludesTarget) {
    auto d = make_dense(13, 60, 80);
    auto c = parse_corpus(to_csv(d));
    auto& target = c.at("l0");
    auto top = neighbours(target, c, 15, 1000);
    // Oracle ranking over every eligible language.
    std::vector<std::tuple<double, std::size_t, std::string>> want;
    for (std::size_t b = 1; b < d.codes.size(); ++b) {
        auto [ov, same] = oracle_counts(d, 0, b);
        if (ov >= 15) want.emplace_back(static_cast<double>(same) / ov, ov, d.codes[b]);
    }
    std::sort(want.begin(), want.end(), [](auto& p, auto& q) {
        if (std::get<0>(p) != std::get<0>(q)) return std::get<0>(p) > std::get<0>(q);
        if (std::get<1>(p) != std::get<1>(q)) return std::get<1>(p) > std::get<1>(q);
        return std::get<2>(p) < std::get<2>(q);
    });
    ASSERT_EQ(top.size(), want.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
        EXPECT_EQ(top[i].y, std::get<2>(want[i]));
        EXPECT_NE(top[i].y, "l0");
    }
    EXPECT_EQ(neighbours(target, c, 15, 3).size(), std::min<std::size_t>(3, want.size()));
    EXPECT_EQ(kind_of([&] { neighbours(target, c, 15, 0); }), ErrorKind::contract_violation);
}

TEST(Neighbours, TiesBrokenByOverlapThenCode) {
    auto c = parse_corpus("language_code,feature_id,value\n"
                          "t,1A,1\nt,2A,1\nt,3A,1\nt,4A,1\n"
                          "b,1A,1\nb,2A,2\n"                  // 1/2
                          "a,1A,1\na,2A,2\n"                  // 1/2, same overlap as b
                          "z,1A,1\nz,2A,1\nz,3A,2\nz,4A,2\n"  // 2/4
                          "q,1A,1\nq,2A,1\nq,3A,1\n");        // 3/3
    auto r = neighbours(c.at("t"), c, 1, 10);
    ASSERT_EQ(r.size(), 4u);
    EXPECT_EQ(r[0].y, "q");
    EXPECT_EQ(r[1].y, "z");
    EXPECT_EQ(r[2].y, "a");
    EXPECT_EQ(r[3].y, "b");
}

TEST(Richness, StrictlyFewerExcludingSelf) {
    auto c = parse_corpus("language_code,feature_id,value\n"
                          "t,1A,1\nt,2A,1\nt,3A,1\n"
                          "a,1A,1\n"
                          "b,1A,1\nb,2A,1\n"
                          "c,1A,1\nc,2A,1\nc,3A,1\n"
                          "d,1A,1\nd,2A,1\nd,3A,1\nd,4A,1\n");
    EXPECT_DOUBLE_EQ(richness_percentile(c.at("t"), c), 2.0 / 4.0);
    EXPECT_DOUBLE_EQ(richness_percentile(c.at("d"), c), 1.0);
    EXPECT_DOUBLE_EQ(richness_percentile(c.at("a"), c), 0.0);

    auto solo = parse_corpus("language_code,feature_id,value\nt,1A,1\n");
    EXPECT_EQ(kind_of([&] { richness_percentile(solo.at("t"), solo); }), ErrorKind::empty_input);
}

TEST(Corpus, DuplicateRowsLastWins) {
    auto c = parse_corpus("language_code,feature_id,value\nx,1A,1\nx,1A,3\n");
    EXPECT_EQ(c.at("x").features.at("1A"), 3);
    EXPECT_EQ(c.duplicate_rows, 1u);
}

TEST(Corpus, LoadErrors) {
    try {
        parse_corpus("language_code,feature_id,value\nx,1A,1\nx,2A,big\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::load);
        EXPECT_EQ(e.position(), 3u);
    }
    EXPECT_EQ(kind_of([] { parse_corpus("lang,feat,val\nx,1A,1\n"); }), ErrorKind::load);
    EXPECT_EQ(kind_of([] { parse_corpus("language_code,feature_id,value\nx,1A\n"); }), ErrorKind::load);
    EXPECT_EQ(kind_of([] { parse_corpus("language_code,feature_id,value\n,1A,2\n"); }), ErrorKind::load);
    EXPECT_EQ(kind_of([] { load_corpus("/nonexistent/wals.csv"); }), ErrorKind::io);
    EXPECT_EQ(kind_of([] { parse_corpus("language_code,feature_id,value\n").at("x"); }), ErrorKind::missing_resource);
}

TEST(Corpus, CldfDirectory) {
    TempDir dir;
    dir.write("cldf/values.csv", "ID,Language_ID,Parameter_ID,Value,Code_ID\n"
                                 "1,eng,1A,2,1A-2\n2,eng,2A,1,2A-1\n3,tur,1A,2,1A-2\n4,tur,2A,3,2A-3\n");
    dir.write("cldf/languages.csv", "ID,Name,Genus,Family\n"
                                    "eng,English,Germanic,Indo-European\n"
                                    "tur,\"Turkish, Standard\",Turkic,Altaic\n"
                                    "xxx,Unused,None,None\n");
    auto c = load_corpus(dir.path);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c.at("eng").name, "English");
    EXPECT_EQ(c.at("tur").name, "Turkish, Standard");
    EXPECT_EQ(c.at("tur").family, "Altaic");
    auto r = std::get<SimilarityResult>(similarity(c.at("eng"), c.at("tur"), 2));
    EXPECT_DOUBLE_EQ(r.similarity, 0.5);

    TempDir empty;
    EXPECT_EQ(kind_of([&] { load_corpus(empty.path); }), ErrorKind::load);
}

TEST(Corpus, MergeOtherWins) {
    auto a = parse_corpus("language_code,feature_id,value,name\nx,1A,1,Ex\nx,2A,2,Ex\n");
    auto b = parse_corpus("language_code,feature_id,value\nx,2A,4\ny,1A,1\n");
    a.merge(b);
    EXPECT_EQ(a.size(), 2u);
    EXPECT_EQ(a.at("x").features.at("2A"), 4);
    EXPECT_EQ(a.at("x").name, "Ex");
}

TEST(Camlang, ProfileHasAllCodedFeatures) {
    auto c = load_corpus(fs::path(FORGE_DATA_DIR) / "camlang.wals");
    auto& p = c.at("camlang");
    EXPECT_EQ(p.features.size(), 141u);
    EXPECT_EQ(p.name, "Camlang");
    EXPECT_EQ(c.duplicate_rows, 0u);
}
