#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "wordbound/errors.hpp"
#include "wordbound/morpho.hpp"
#include "wordbound/rng.hpp"
#include "wordbound/vocabulary.hpp"

using namespace wordbound;
using namespace wordbound::morpho;

namespace {

using Gold = std::vector<GoldSegmentation>;
using Preds = std::map<std::string, std::vector<std::string>>;

// Independent scorer: counts codepoints byte-pattern-wise and intersects
// offset sets with std::set_intersection instead of per-element lookups.
SegEvalResult oracle_evaluate(const Preds& predictions, const Gold& gold) {
    auto offsets = [](const std::vector<std::string>& pieces) {
        std::set<int> out;
        int total = 0;
        for (size_t i = 0; i < pieces.size(); ++i) {
            std::string p = pieces[i];
            if (p.size() >= 2 && p[0] == '#' && p[1] == '#') {
                p = p.substr(2);
            }
            for (unsigned char c : p) {
                total += (c & 0xC0) != 0x80 ? 1 : 0;
            }
            if (i + 1 < pieces.size()) {
                out.insert(total);
            }
        }
        return out;
    };
    SegEvalResult r;
    long long matched = 0, np = 0, ng = 0, pieces = 0;
    for (const auto& g : gold) {
        std::string concat;
        for (const auto& m : g.morphs) {
            concat += m;
        }
        if (g.morphs.empty() || concat != g.word) {
            ++r.n_skipped;
            continue;
        }
        const auto& pred_pieces = predictions.at(g.word);
        std::set<int> p = offsets(pred_pieces), q = offsets(g.morphs);
        std::vector<int> both;
        std::set_intersection(p.begin(), p.end(), q.begin(), q.end(), std::back_inserter(both));
        matched += static_cast<long long>(both.size());
        np += static_cast<long long>(p.size());
        ng += static_cast<long long>(q.size());
        pieces += static_cast<long long>(pred_pieces.size());
        ++r.n_words;
    }
    r.precision = np > 0 ? static_cast<double>(matched) / static_cast<double>(np)
                         : (ng == 0 ? 1.0 : 0.0);
    r.recall = ng > 0 ? static_cast<double>(matched) / static_cast<double>(ng)
                      : (np == 0 ? 1.0 : 0.0);
    r.f1 = r.precision + r.recall == 0.0
               ? 0.0
               : 2.0 * r.precision * r.recall / (r.precision + r.recall);
    r.avg_len = static_cast<double>(pieces) / static_cast<double>(r.n_words);
    return r;
}

void check_matches_oracle(const Preds& preds, const Gold& gold) {
    SegEvalResult got = evaluate(preds, gold);
    SegEvalResult want = oracle_evaluate(preds, gold);
    CHECK(got.precision == doctest::Approx(want.precision).epsilon(1e-12));
    CHECK(got.recall == doctest::Approx(want.recall).epsilon(1e-12));
    CHECK(got.f1 == doctest::Approx(want.f1).epsilon(1e-12));
    CHECK(got.avg_len == doctest::Approx(want.avg_len).epsilon(1e-12));
    CHECK(got.n_words == want.n_words);
    CHECK(got.n_skipped == want.n_skipped);
}

}  // namespace

TEST_CASE("boundary_set lists internal cumulative offsets") {
    CHECK(boundary_set({"un", "beat", "able"}) == std::set<int>{2, 6});
    CHECK(boundary_set({"unbeatable"}) == std::set<int>{});
    CHECK(boundary_set({"a", "b"}) == std::set<int>{1});
    CHECK(boundary_set({"un", "##beat", "##able"}) == std::set<int>{2, 6});
    // offsets count codepoints, not bytes: "é" is two bytes, one character
    CHECK(boundary_set({"\xC3\xA9", "a"}) == std::set<int>{1});
}

TEST_CASE("evaluate reproduces the worked single-word examples") {
    {
        Gold gold{{"hyporesponsiveness", {"hypo", "respons", "iveness"}}};
        Preds preds{{"hyporesponsiveness", {"hypo", "respons", "iveness"}}};
        SegEvalResult r = evaluate(preds, gold);
        CHECK(r.precision == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.recall == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.f1 == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.avg_len == doctest::Approx(3.0).epsilon(1e-12));
    }
    {
        // pred offsets {3,5,8} share nothing with gold {2,7}
        Gold gold{{"undesirable", {"un", "desir", "able"}}};
        Preds preds{{"undesirable", {"und", "es", "ira", "ble"}}};
        SegEvalResult r = evaluate(preds, gold);
        CHECK(r.precision == 0.0);
        CHECK(r.recall == 0.0);
        CHECK(r.f1 == 0.0);
        CHECK(r.avg_len == doctest::Approx(4.0).epsilon(1e-12));
    }
    {
        // pred {6} vs gold {2,6}
        Gold gold{{"unbeatable", {"un", "beat", "able"}}};
        Preds preds{{"unbeatable", {"unbeat", "able"}}};
        SegEvalResult r = evaluate(preds, gold);
        CHECK(r.precision == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.recall == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(r.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(r.avg_len == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("evaluate micro-averages across the dataset") {
    Gold gold{{"hyporesponsiveness", {"hypo", "respons", "iveness"}},
              {"undesirable", {"un", "desir", "able"}},
              {"unbeatable", {"un", "beat", "able"}}};
    Preds preds{{"hyporesponsiveness", {"hypo", "respons", "iveness"}},
                {"undesirable", {"und", "es", "ira", "ble"}},
                {"unbeatable", {"unbeat", "able"}}};
    SegEvalResult r = evaluate(preds, gold);
    // matched 2+0+1 = 3 of pred 2+3+1 = 6 and gold 2+2+2 = 6
    CHECK(r.precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.recall == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.f1 == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.avg_len == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.n_words == 3);
    check_matches_oracle(preds, gold);
}

TEST_CASE("evaluate conventions for empty boundary sets") {
    // no boundaries anywhere: vacuously perfect
    Gold gold{{"cat", {"cat"}}, {"dog", {"dog"}}};
    Preds preds{{"cat", {"cat"}}, {"dog", {"dog"}}};
    SegEvalResult r = evaluate(preds, gold);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.f1 == 1.0);
    CHECK(r.avg_len == 1.0);

    // predictions carry boundaries, gold has none
    Preds over{{"cat", {"c", "at"}}, {"dog", {"dog"}}};
    SegEvalResult r2 = evaluate(over, gold);
    CHECK(r2.precision == 0.0);
    CHECK(r2.recall == 0.0);
    CHECK(r2.f1 == 0.0);

    // gold has boundaries, predictions none
    Gold split{{"cat", {"c", "at"}}};
    Preds none{{"cat", {"cat"}}};
    SegEvalResult r3 = evaluate(none, split);
    CHECK(r3.precision == 0.0);
    CHECK(r3.recall == 0.0);
}

TEST_CASE("evaluate skips mismatched gold rows and errors when all skip") {
    Gold gold{{"unbeatable", {"un", "beat", "ably"}},  // concat mismatch
              {"cat", {"c", "at"}}};
    Preds preds{{"cat", {"c", "at"}}, {"unbeatable", {"unbeat", "able"}}};
    SegEvalResult r = evaluate(preds, gold);
    CHECK(r.n_skipped == 1);
    CHECK(r.n_words == 1);
    CHECK(r.precision == 1.0);

    Gold all_bad{{"unbeatable", {"nope"}}};
    CHECK_THROWS_AS(evaluate(preds, all_bad), EmptyGold);
    CHECK_THROWS_AS(evaluate(preds, Gold{}), EmptyGold);

    Gold unknown{{"zebra", {"zeb", "ra"}}};
    CHECK_THROWS_AS(evaluate(preds, unknown), MissingPrediction);
}

TEST_CASE("adding a correct boundary never lowers recall") {
    Gold gold{{"unbeatable", {"un", "beat", "able"}}, {"replays", {"re", "play", "s"}}};
    Preds before{{"unbeatable", {"unbeat", "able"}}, {"replays", {"replay", "s"}}};
    Preds after = before;
    after["unbeatable"] = {"un", "beat", "able"};  // adds the correct offset 2
    CHECK(evaluate(after, gold).recall >= evaluate(before, gold).recall);
    check_matches_oracle(before, gold);
    check_matches_oracle(after, gold);
}

TEST_CASE("evaluate agrees with the oracle on randomized small datasets") {
    DetRng rng(99);
    const std::string alpha = "abcde";
    for (int trial = 0; trial < 40; ++trial) {
        Gold gold;
        Preds preds;
        int n = 1 + static_cast<int>(rng.below(12));
        for (int w = 0; w < n; ++w) {
            int len = 2 + static_cast<int>(rng.below(7));
            std::string word;
            for (int i = 0; i < len; ++i) {
                word += alpha[rng.below(alpha.size())];
            }
            word += static_cast<char>('0' + w);  // force distinct words
            auto random_split = [&](std::vector<std::string>& out) {
                out.clear();
               size_t start = 0;
                for (size_t i = 1; i < word.size(); ++i) {
                    if (rng.below(3) == 0) {
                        out.push_back(word.substr(start, i - start));
                        start = i;
                    }
                }
                out.push_back(word.substr(start));
            };
            GoldSegmentation g;
            g.word = word;
            random_split(g.morphs);
            if (rng.below(8) == 0) {
                g.morphs[0] += "x";  // poison one row so skipping is exercised
            }
            gold.push_back(g);
            std::vector<std::string> p;
            random_split(p);
            preds[word] = p;
        }
        bool any_usable = false;
        for (const auto& g : gold) {
            std::string c;
            for (const auto& m : g.morphs) {
                c += m;
            }
            any_usable |= c == g.word;
        }
        if (!any_usable) {
            CHECK_THROWS_AS(evaluate(preds, gold), EmptyGold);
            continue;
        }
        check_matches_oracle(preds, gold);
    }
}

TEST_CASE("vocab_redundancy counts both members of dual pairs") {
    Vocabulary v = make_base_vocabulary(MarkerMode::Marked);
    for (const char* t : {"beat", "##beat", "able", "##able", "un"}) {
        v.add(t);
    }
    CHECK(vocab_redundancy(v) == doctest::Approx(0.8).epsilon(1e-12));

    Vocabulary plain = make_base_vocabulary(MarkerMode::Marked);
    for (const char* t : {"un", "beat", "able"}) {
        plain.add(t);
    }
    CHECK(vocab_redundancy(plain) == 0.0);

    Vocabulary boundless = make_base_vocabulary(MarkerMode::Boundless);
    for (const char* t : {"un", "beat", "able"}) {
        boundless.add(t);
    }
    CHECK(vocab_redundancy(boundless) == 0.0);
    CHECK(vocab_redundancy(make_base_vocabulary(MarkerMode::Marked)) == 0.0);
}

TEST_CASE("avg_seq_len averages encode_word piece counts") {
    Vocabulary v1 = make_base_vocabulary(MarkerMode::Marked);
    for (const char* t : {"un", "beat", "able", "##beat", "##able", "##b"}) {
        v1.add(t);
    }
    CHECK(avg_seq_len(v1, {"unbeatable"}) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(avg_seq_len(v1, {"un", "beat"}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(avg_seq_len(v1, {"un", "unbeatable"}) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK_THROWS_AS(avg_seq_len(v1, {}), EmptyInput);
}

TEST_CASE("load_gold_tsv parses and lowercases rows") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "wordbound_gold_test.tsv";
    {
        std::ofstream out(path);
        out << "Unbeatable\tUn beat able\n";
        out << "\n";
        out << "replays\tre play s\r\n";
    }
    auto gold = load_gold_tsv(path.string());
    REQUIRE(gold.size() == 2);
    CHECK(gold[0].word == "unbeatable");
    CHECK(gold[0].morphs == std::vector<std::string>{"un", "beat", "able"});
    CHECK(gold[1].morphs == std::vector<std::string>{"re", "play", "s"});

    auto kept = load_gold_tsv(path.string(), false);
    CHECK(kept[0].word == "Unbeatable");
    fs::remove(path);
}

TEST_CASE("report_tsv includes a macro average across datasets") {
    SegEvalResult a;
    a.precision = 1.0;
    a.recall = 0.5;
    a.f1 = 2.0 / 3.0;
    a.avg_len = 2.0;
    a.n_words = 1;
    SegEvalResult b;
    b.precision = 0.0;
    b.recall = 0.0;
    b.f1 = 0.0;
    b.avg_len = 4.0;
    b.n_words = 1;
    std::string tsv = report_tsv({{"one", a}, {"two", b}});
    CHECK(tsv.find("dataset\tprecision\trecall\tf1\tavg_len\tn_words\tn_skipped\n") == 0);
    CHECK(tsv.find("one\t1.000000\t0.500000\t0.666667\t2.000000\t1\t0\n") != std::string::npos);
    CHECK(tsv.find("macro_avg\t0.500000\t0.250000\t0.333333\t3.000000\t-\t-\n") !=
          std::string::npos);
    // single dataset: no macro row
    CHECK(report_tsv({{"one", a}}).find("macro_avg") == std::string::npos);
}
