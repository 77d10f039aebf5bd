// End-to-end checks over the full toolkit: tokenizer oracle, segmentation
// scoring, model arithmetic, gradients, training behaviour, CLI determinism.
// Prints one line per criterion and exits nonzero if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wordbound/boundary.hpp"
#include "wordbound/errors.hpp"
#include "wordbound/morpho.hpp"
#include "wordbound/nn/checkpoint.hpp"
#include "wordbound/nn/gradcheck.hpp"
#include "wordbound/nn/model.hpp"
#include "wordbound/rng.hpp"
#include "wordbound/tokenizer.hpp"
#include "wordbound/train/data.hpp"
#include "wordbound/train/finetune.hpp"
#include "wordbound/train/masking.hpp"
#include "wordbound/train/pretrain.hpp"
#include "wordbound/train/schedule.hpp"
#include "wordbound/vocabulary.hpp"
#include "wordbound/wordpiece_trainer.hpp"

namespace fs = std::filesystem;
using namespace wordbound;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string format(const char* fmt, ...) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof(buf), fmt, args);
    va_end(args);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

// ---------------------------------------------------------------------------
// shared corpora

const std::vector<std::string> kPool = {
    "waterfall", "notebook",   "sunlight", "mountain", "retrain", "unbeatable",
    "sandstone", "riverbed",   "footpath", "overcast", "daybreak", "understate",
    "replay",    "longing",    "outward",  "insight",  "granite",  "meadow",
    "lantern",   "harvest",    "orchard",  "bramble",  "thicket",  "juniper"};

// A memorizable pretraining corpus: a few distinct sentences, each opening
// with its own marker word and continuing with a fixed tail, repeated to n
// lines and shuffled so the held-out split sees every sentence.
std::vector<std::string> make_template_corpus(int n, int n_templates, uint64_t seed) {
    DetRng rng(seed);
    std::vector<std::string> templates;
    for (int t = 0; t < n_templates; ++t) {
        std::string line = kPool[t % kPool.size()];
        int len = 5 + static_cast<int>(rng.below(4));
        for (int w = 1; w < len; ++w) {
            line += ' ';
            line += kPool[rng.below(kPool.size())];
        }
        templates.push_back(std::move(line));
    }
    std::vector<std::string> corpus;
    corpus.reserve(n);
    for (int i = 0; i < n; ++i) {
        corpus.push_back(templates[i % n_templates]);
    }
    for (size_t i = corpus.size(); i > 1; --i) {  // Fisher-Yates
        std::swap(corpus[i - 1], corpus[rng.below(i)]);
    }
    return corpus;
}

std::vector<std::string> make_sentences(int n, uint64_t seed, bool punctuation) {
    DetRng rng(seed);
    std::vector<std::string> lines;
    lines.reserve(n);
    for (int i = 0; i < n; ++i) {
        int len = 5 + static_cast<int>(rng.below(5));
        std::string line;
        for (int w = 0; w < len; ++w) {
            if (!line.empty()) {
                line += ' ';
            }
            line += kPool[rng.below(kPool.size())];
            if (punctuation && w + 1 < len && rng.below(8) == 0) {
                line += " ,";
            }
        }
        if (punctuation && rng.below(3) != 0) {
            line += rng.below(2) == 0 ? " ." : " ?";
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

// ---------------------------------------------------------------------------
// criterion 1: greedy encoder vs a brute-force longest-match oracle

constexpr const char* kLetters = "abuntel";
constexpr int kAlpha = 7;

Vocabulary toy_vocab(MarkerMode mode, const std::vector<std::string>& entries) {
    Vocabulary v = make_base_vocabulary(mode);
    for (const auto& e : entries) {
        v.add(e);
    }
    return v;
}

// Membership for the oracle lives in dense bitmaps keyed by 3-bit packed
// letters (codes 1..7), so any word of length <= 8 fits in 24 bits. Nothing
// here shares code with the library's hash-map lookup.
struct OracleVocab {
    std::vector<bool> initial = std::vector<bool>(1u << 24, false);
    std::vector<bool> cont = std::vector<bool>(1u << 24, false);
    int max_initial = 0;
    int max_cont = 0;
    bool marked = false;
};

uint32_t pack_letters(const char* s, int len, const int* code) {
    uint32_t key = 0;
    for (int i = 0; i < len; ++i) {
        key |= static_cast<uint32_t>(code[static_cast<unsigned char>(s[i])]) << (3 * i);
    }
    return key;
}

OracleVocab make_oracle(const std::vector<std::string>& entries, bool marked, const int* code) {
    OracleVocab ov;
    ov.marked = marked;
    for (const auto& e : entries) {
        if (marked && e.rfind("##", 0) == 0) {
            int len = static_cast<int>(e.size()) - 2;
            ov.cont[pack_letters(e.data() + 2, len, code)] = true;
            ov.max_cont = std::max(ov.max_cont, len);
        } else {
            int len = static_cast<int>(e.size());
            ov.initial[pack_letters(e.data(), len, code)] = true;
            ov.max_initial = std::max(ov.max_initial, len);
            if (!marked) {  // position-free: usable anywhere in the word
                ov.cont[pack_letters(e.data(), len, code)] = true;
                ov.max_cont = std::max(ov.max_cont, len);
            }
        }
    }
    return ov;
}

// Longest match at each cursor, trying every candidate length; false means
// some cursor had no match, i.e. the whole word becomes [UNK].
bool oracle_segment(const char* w, int n, const OracleVocab& ov, const int* code,
                    std::vector<std::pair<int, int>>& spans) {
    spans.clear();
    int pos = 0;
    while (pos < n) {
        const bool first = pos == 0;
        const auto& set = first ? ov.initial : ov.cont;
        int cap = std::min(first ? ov.max_initial : ov.max_cont, n - pos);
        int best = 0;
        uint32_t key = 0;
        for (int len = 1; len <= cap; ++len) {
            key |= static_cast<uint32_t>(code[static_cast<unsigned char>(w[pos + len - 1])])
                   << (3 * (len - 1));
            if (set[key]) {
                best = len;
            }
        }
        if (best == 0) {
            return false;
        }
        spans.emplace_back(pos, best);
        pos += best;
    }
    return true;
}

bool pieces_match(const std::vector<std::string>& pieces, const char* w,
                  const std::vector<std::pair<int, int>>& spans, bool marked) {
    if (pieces.size() != spans.size()) {
        return false;
    }
    for (size_t i = 0; i < spans.size(); ++i) {
        const std::string& p = pieces[i];
        auto [pos, len] = spans[i];
        size_t n = static_cast<size_t>(len);
        if (marked && pos > 0) {
            if (p.size() != n + 2 || p[0] != '#' || p[1] != '#' ||
                p.compare(2, n, w + pos, n) != 0) {
                return false;
            }
        } else if (p.size() != n || p.compare(0, n, w + pos, n) != 0) {
            return false;
        }
    }
    return true;
}

Outcome criterion_greedy_oracle() {
    int code[256] = {};
    for (int i = 0; i < kAlpha; ++i) {
        code[static_cast<unsigned char>(kLetters[i])] = i + 1;
    }
    // 15 content entries per mode. Marked: no initial "e"/"l" entry, so words
    // starting with those letters fall back to [UNK]. The boundless side has
    // "e"/"l" only inside two-letter pieces, so unpairable contexts do too.
    const std::vector<std::string> marked_entries = {"##a", "##b", "##u", "##n", "##t",
                                                     "##e", "##l", "a",   "b",   "u",
                                                     "n",   "t",   "un",  "unt", "##at"};
    const std::vector<std::string> boundless_entries = {"a",  "b",  "u",  "n",  "t",
                                                        "un", "be", "at", "ta", "ea",
                                                        "le", "el", "bl", "ab", "nt"};
    Vocabulary vm = toy_vocab(MarkerMode::Marked, marked_entries);
    Vocabulary vb = toy_vocab(MarkerMode::Boundless, boundless_entries);
    OracleVocab om = make_oracle(marked_entries, true, code);
    OracleVocab ob = make_oracle(boundless_entries, false, code);

    char word[9] = {};
    int digits[8] = {};
    long long words = 0, mismatches = 0, unk_marked = 0, unk_boundless = 0;
    std::vector<std::pair<int, int>> spans;
    auto t0 = std::chrono::steady_clock::now();
    for (int len = 1; len <= 8; ++len) {
        for (int i = 0; i < len; ++i) {
            digits[i] = 0;
            word[i] = kLetters[0];
        }
        word[len] = '\0';
        while (true) {
            ++words;
            std::string_view sv(word, static_cast<size_t>(len));

            auto pm = encode_word(sv, vm);
            if (oracle_segment(word, len, om, code, spans)) {
                mismatches += !pieces_match(pm, word, spans, true);
            } else {
                ++unk_marked;
                mismatches += !(pm.size() == 1 && pm[0] == "[UNK]");
            }

            auto pb = encode_word(sv, vb);
            if (oracle_segment(word, len, ob, code, spans)) {
                mismatches += !pieces_match(pb, word, spans, false);
            } else {
                ++unk_boundless;
                mismatches += !(pb.size() == 1 && pb[0] == "[UNK]");
            }

            int d = len - 1;
            while (d >= 0 && digits[d] == kAlpha - 1) {
                digits[d] = 0;
                word[d] = kLetters[0];
                --d;
            }
            if (d < 0) {
                break;
            }
            ++digits[d];
            word[d] = kLetters[digits[d]];
        }
    }
    double dt = seconds_since(t0);

    Outcome o;
    o.pass = words == 6725600 && mismatches == 0 && unk_marked > 0 && unk_boundless > 0 &&
             dt < 5.0;
    o.detail = format("%lld words x 2 modes, %lld mismatches, %.2f s (budget 5 s)", words,
                      mismatches, dt);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 2: segmentation scoring vs independent boundary-set enumeration

long long codepoints(std::string_view s) {
    long long n = 0;
    for (char c : s) {
        n += (static_cast<unsigned char>(c) & 0xC0) != 0x80;
    }
    return n;
}

std::set<long long> split_offsets(const std::vector<std::string>& pieces) {
    std::set<long long> out;
    long long cum = 0;
    for (size_t i = 0; i < pieces.size(); ++i) {
        std::string_view p = pieces[i];
        if (p.rfind("##", 0) == 0) {
            p.remove_prefix(2);
        }
        cum += codepoints(p);
        if (i + 1 < pieces.size()) {
            out.insert(cum);
        }
    }
    return out;
}

morpho::SegEvalResult enumerate_boundaries(
    const std::map<std::string, std::vector<std::string>>& preds,
    const std::vector<morpho::GoldSegmentation>& gold) {
    long long matched = 0, np = 0, ng = 0, pieces_total = 0, n = 0;
    for (const auto& g : gold) {
        const auto& pieces = preds.at(g.word);
        std::set<long long> po = split_offsets(pieces);
        std::set<long long> go = split_offsets(g.morphs);
        for (long long off : po) {
            matched += go.count(off);
        }
        np += static_cast<long long>(po.size());
        ng += static_cast<long long>(go.size());
        pieces_total += static_cast<long long>(pieces.size());
        ++n;
    }
    morpho::SegEvalResult r;
    r.precision = np > 0 ? static_cast<double>(matched) / static_cast<double>(np)
                         : (ng == 0 ? 1.0 : 0.0);
    r.recall = ng > 0 ? static_cast<double>(matched) / static_cast<double>(ng)
                      : (np == 0 ? 1.0 : 0.0);
    r.f1 = r.precision + r.recall > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    r.avg_len = n > 0 ? static_cast<double>(pieces_total) / static_cast<double>(n) : 0.0;
    r.n_words = n;
    return r;
}

Outcome criterion_morph_oracle() {
    using Row = std::pair<std::vector<std::string>, std::vector<std::string>>;  // pred, morphs
    const std::vector<std::pair<std::string, Row>> data = {
        {"unbeatable", {{"un", "##beat", "##able"}, {"un", "beat", "able"}}},
        {"hyporesponsiveness",
         {{"hypo", "##respons", "##ive", "##ness"}, {"hypo", "respons", "ive", "ness"}}},
        {"undesirable", {{"und", "es", "ira", "ble"}, {"un", "desir", "able"}}},
        {"walked", {{"walked"}, {"walk", "ed"}}},
        {"walking", {{"walk", "##ing"}, {"walk", "ing"}}},
        {"runner", {{"runn", "##er"}, {"run", "ner"}}},
        {"cats", {{"c", "##a", "##t", "##s"}, {"cat", "s"}}},
        {"preheat", {{"pre", "##heat"}, {"pre", "heat"}}},
        {"rebuild", {{"reb", "##uild"}, {"re", "build"}}},
        {"builder", {{"build", "##er"}, {"build", "er"}}},
        {"unhelpful", {{"un", "##helpful"}, {"un", "help", "ful"}}},
        {"helpless", {{"help", "##less"}, {"help", "less"}}},
        {"overcast", {{"overcast"}, {"over", "cast"}}},
        {"daylight", {{"day", "##light"}, {"day", "light"}}},
        {"notebooks", {{"note", "##books"}, {"note", "book", "s"}}},
        {"waterfall", {{"water", "##fall"}, {"water", "fall"}}},
        {"footpath", {{"foot", "##path"}, {"foot", "path"}}},
        {"misread", {{"mis", "##read"}, {"mis", "read"}}},
        {"outward", {{"out", "##ward"}, {"out", "ward"}}},
        {"understatement", {{"under", "##state", "##ment"}, {"under", "state", "ment"}}},
    };
    std::map<std::string, std::vector<std::string>> preds;
    std::vector<morpho::GoldSegmentation> gold;
    for (const auto& [word, row] : data) {
        preds[word] = row.first;
        gold.push_back({word, row.second});
    }

    morpho::SegEvalResult lib = morpho::evaluate(preds, gold);
    morpho::SegEvalResult ind = enumerate_boundaries(preds, gold);
    const double tol = 1e-12;
    bool agree = std::fabs(lib.precision - ind.precision) <= tol &&
                 std::fabs(lib.recall - ind.recall) <= tol &&
                 std::fabs(lib.f1 - ind.f1) <= tol &&
                 std::fabs(lib.avg_len - ind.avg_len) <= tol && lib.n_words == 20 &&
                 lib.n_skipped == 0;

    // worked examples, each as its own single-word dataset
    auto single = [](const std::string& word, std::vector<std::string> pieces,
                     std::vector<std::string> morphs) {
        std::map<std::string, std::vector<std::string>> p{{word, std::move(pieces)}};
        std::vector<morpho::GoldSegmentation> g{{word, std::move(morphs)}};
        return morpho::evaluate(p, g);
    };
    auto perfect = single("hyporesponsiveness", {"hypo", "respons", "ive", "ness"},
                          {"hypo", "respons", "ive", "ness"});
    auto zero = single("undesirable", {"und", "es", "ira", "ble"}, {"un", "desir", "able"});
    auto half = single("unbeatable", {"unbeat", "able"}, {"un", "beat", "able"});
    bool examples =
        perfect.precision == 1.0 && perfect.recall == 1.0 && perfect.f1 == 1.0 &&
        perfect.avg_len == 4.0 && zero.precision == 0.0 && zero.recall == 0.0 &&
        zero.f1 == 0.0 && zero.avg_len == 4.0 && half.precision == 1.0 && half.recall == 0.5 &&
        std::fabs(half.f1 - 2.0 / 3.0) <= tol && half.avg_len == 2.0;

    Outcome o;
    o.pass = agree && examples;
    o.detail = format("20-word set P=%.6f R=%.6f F1=%.6f avg_len=%.3f matches enumeration; "
                      "3 worked examples exact",
                      lib.precision, lib.recall, lib.f1, lib.avg_len);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 3: marker redundancy

Outcome criterion_redundancy(const std::vector<std::string>& big_corpus) {
    const std::vector<std::string> toy(1000, "unbeatable un beat able");
    TokenizerConfig marked_cfg;
    marked_cfg.vocab_size = 40;
    marked_cfg.marker_mode = MarkerMode::Marked;
    Vocabulary marked = train_wordpiece(toy, marked_cfg);
    double marked_red = morpho::vocab_redundancy(marked);

    double worst_boundless = 0.0;
    for (const auto* corpus : {&toy, &big_corpus}) {
        for (int size : {40, 400}) {
            TokenizerConfig cfg;
            cfg.vocab_size = size;
            cfg.marker_mode = MarkerMode::Boundless;
            Vocabulary v = train_wordpiece(*corpus, cfg);
            worst_boundless = std::max(worst_boundless, morpho::vocab_redundancy(v));
        }
    }

    Outcome o;
    o.pass = marked_red > 0.0 && worst_boundless == 0.0;
    o.detail = format("marked toy redundancy %.6f > 0; boundless redundancy %.1f on 4 "
                      "corpus/size combinations",
                      marked_red, worst_boundless);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 4: lossless round trip through encode + annotate + detokenize

Outcome criterion_lossless(const std::vector<std::string>& corpus) {
    int failures = 0;
    int checked = 0;
    for (MarkerMode mode : {MarkerMode::Marked, MarkerMode::Boundless}) {
        TokenizerConfig cfg;
        cfg.vocab_size = 400;
        cfg.marker_mode = mode;
        Vocabulary vocab = train_wordpiece(corpus, cfg);
        for (const auto& line : corpus) {
            Encoding enc = encode(line, vocab);
            auto ann = boundary::annotate(enc);
            std::string back = boundary::detokenize_with_boundaries(enc.token_strings, ann.binary);
            failures += back != line;
            ++checked;
        }
    }
    Outcome o;
    o.pass = failures == 0 && checked == 2 * static_cast<int>(corpus.size());
    o.detail = format("%d/%d sentence round-trips exact across both modes", checked - failures,
                      checked);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 5: finite-difference gradient checks, every schema x implicit

Outcome criterion_gradcheck() {
    auto t0 = std::chrono::steady_clock::now();
    double worst = 0.0;
    std::string worst_combo;
    int combos = 0;
    uint64_t seed = 100;
    for (auto schema :
         {boundary::BoundarySchema::None, boundary::BoundarySchema::Binary,
          boundary::BoundarySchema::WordIndex, boundary::BoundarySchema::SubwordIndex,
          boundary::BoundarySchema::WBTokens}) {
        for (bool implicit : {false, true}) {
            nn::ModelConfig config;
            config.n_layers = 1;
            config.n_heads = 2;
            config.d_model = 8;
            config.vocab_size = 11;
            config.max_seq_len = 8;
            config.wb_schema = schema;
            config.implicit_head = implicit;
            config.allow_wb_tokens_with_implicit =
                schema == boundary::BoundarySchema::WBTokens && implicit;
            config.validate();
            ++seed;
            nn::Batch batch = nn::make_gradcheck_batch(config, seed);
            nn::GradCheckResult res = nn::finite_difference_check(batch, config, seed, 200, 1e-4);
            ++combos;
            if (res.max_rel_err > worst) {
                worst = res.max_rel_err;
                worst_combo = std::string(boundary::schema_name(schema)) +
                              (implicit ? "+implicit" : "");
            }
            if (res.checked < 200) {
                Outcome o;
                o.detail = format("only %d coordinates checked for %s", res.checked,
                                  boundary::schema_name(schema));
                return o;
            }
        }
    }
    double dt = seconds_since(t0);
    Outcome o;
    o.pass = combos == 10 && worst < 1e-3 && dt < 120.0;
    o.detail = format("10 schema/head combos, 200 coords each, worst rel err %.2e (%s), %.1f s",
                      worst, worst_combo.c_str(), dt);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 6: parameter-count arithmetic

Outcome criterion_param_counts() {
    bool all_match = true;
    for (auto schema :
         {boundary::BoundarySchema::None, boundary::BoundarySchema::Binary,
          boundary::BoundarySchema::WordIndex, boundary::BoundarySchema::SubwordIndex,
          boundary::BoundarySchema::WBTokens}) {
        for (bool implicit : {false, true}) {
            for (int big : {0, 1}) {
                nn::ModelConfig config;
                config.n_layers = 2;
                config.n_heads = 4;
                config.d_model = big ? 256 : 64;
                config.vocab_size = big ? 16384 : 512;
                config.max_seq_len = big ? 256 : 64;
                config.wb_schema = schema;
                config.implicit_head = implicit;
                config.allow_wb_tokens_with_implicit = true;
                auto params = nn::init_params<float>(config, 1);
                long long total = 0;
                for (const auto& ref : nn::tensor_registry(params)) {
                    total += static_cast<long long>(ref.tensor->rows) * ref.tensor->cols;
                }
                all_match = all_match && total == config.param_count();
            }
        }
    }

    auto count = [](boundary::BoundarySchema schema) {
        nn::ModelConfig config;
        config.vocab_size = 16384;
        config.wb_schema = schema;
        return config.param_count();
    };
    long long base = count(boundary::BoundarySchema::None);
    long long d_binary = count(boundary::BoundarySchema::Binary) - base;
    long long d_word = count(boundary::BoundarySchema::WordIndex) - base;
    long long d_subword = count(boundary::BoundarySchema::SubwordIndex) - base;
    long long d_wb = count(boundary::BoundarySchema::WBTokens) - base;
    bool deltas = d_subword > d_word && d_word > d_binary && d_binary > 0 && d_wb == 0 &&
                  d_binary == 3 * 256 && d_word == 257 * 256 && d_subword == 513 * 256;

    Outcome o;
    o.pass = all_match && deltas;
    o.detail = format("registry sums match closed form (20 combos); deltas +%.4f%% subword > "
                      "+%.4f%% word > +%.5f%% binary",
                      100.0 * d_subword / base, 100.0 * d_word / base, 100.0 * d_binary / base);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 7: loss at initialization

Outcome criterion_initial_loss(const std::vector<std::string>& corpus, const Vocabulary& vocab) {
    nn::ModelConfig config;
    config.n_layers = 2;
    config.n_heads = 4;
    config.d_model = 64;
    config.vocab_size = vocab.size();
    config.max_seq_len = 64;

    auto seqs = train::prepare_lines(corpus, vocab, config.wb_schema, 48);
    std::vector<int> pick;
    for (int i = 0; i < 16; ++i) {
        pick.push_back(i);
    }
    nn::Batch clean = train::assemble_batch(seqs, pick, config);
    nn::Batch batch = train::dynamic_mask(clean, 0.15, 42, config.vocab_size);

    auto params = nn::init_params<float>(config, 5);
    auto out = nn::forward(batch, params, config);
    double token_loss = nn::mlm_loss(out.token_logits, batch.target_ids, batch.mask_positions);
    double ln_v = std::log(static_cast<double>(config.vocab_size));
    bool token_ok = std::fabs(token_loss - ln_v) <= 0.02 * ln_v;

    config.implicit_head = true;
    auto params2 = nn::init_params<float>(config, 5);
    auto out2 = nn::forward(batch, params2, config);
    auto losses = nn::compute_loss(batch, out2, config);
    double target = ln_v + std::log(3.0);
    bool combined_ok = std::fabs(losses.combined - target) <= 0.02 * target;

    Outcome o;
    o.pass = token_ok && combined_ok;
    o.detail = format("token loss %.4f vs ln %d = %.4f; combined %.4f vs ln|V|+ln3 = %.4f "
                      "(both within 2%%)",
                      token_loss, config.vocab_size, ln_v, losses.combined, target);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 8: small-model training run

train::TrainConfig desk_train_config(uint64_t seed) {
    train::TrainConfig tc;
    tc.batch_size = 16;
    tc.total_steps = 300;
    tc.peak_lr = 1e-3;
    tc.seq_len = 56;
    tc.seed = seed;
    tc.eval_every = 100;
    tc.checkpoint_every = 300;
    tc.eval_split_k = 10;
    return tc;
}

Outcome criterion_training_sanity(const std::vector<std::string>& corpus, const Vocabulary& vocab,
                                  const fs::path& dir) {
    nn::ModelConfig mc;
    mc.n_layers = 2;
    mc.n_heads = 4;
    mc.d_model = 64;
    mc.vocab_size = vocab.size();
    mc.max_seq_len = 64;
    mc.implicit_head = true;

    auto t0 = std::chrono::steady_clock::now();
    train::PretrainResult res =
        train::pretrain(corpus, vocab, mc, desk_train_config(11), dir.string());
    double dt = seconds_since(t0);

    bool halved = res.final_train_loss <= 0.5 * res.initial_train_loss;
    bool boundary_ok = res.final_eval && res.final_eval->boundary_acc >= 0.90;
    Outcome o;
    o.pass = halved && boundary_ok && dt < 600.0 && res.steps_run == 300;
    o.detail = format("train loss %.3f -> %.3f (<= 50%%), boundary masked acc %.3f (>= 0.90), "
                      "%.0f s (budget 600 s)",
                      res.initial_train_loss, res.final_train_loss,
                      res.final_eval ? res.final_eval->boundary_acc : -1.0, dt);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 9: [WB] tokens lower the MLM loss vs no boundary information

Outcome criterion_wb_direction(const fs::path& dir) {
    // non-repeating sentences and a vocabulary large enough to keep most words
    // whole, so [WB] positions make up a large share of what gets masked
    std::vector<std::string> corpus = make_sentences(200, 2024, false);
    TokenizerConfig vc;
    vc.vocab_size = 256;
    vc.marker_mode = MarkerMode::Marked;
    Vocabulary vocab = train_wordpiece(corpus, vc);

    nn::ModelConfig mc;
    mc.n_layers = 2;
    mc.n_heads = 4;
    mc.d_model = 64;
    mc.vocab_size = vocab.size();
    mc.max_seq_len = 64;

    train::TrainConfig tc = desk_train_config(11);
    tc.eval_every = 300;
    auto res_none = train::pretrain(corpus, vocab, mc, tc, (dir / "none").string());

    mc.wb_schema = boundary::BoundarySchema::WBTokens;
    auto res_wb = train::pretrain(corpus, vocab, mc, tc, (dir / "wb").string());

    Outcome o;
    o.pass = res_wb.mean_token_loss_last100 < res_none.mean_token_loss_last100;
    o.detail = format("mean MLM loss over last 100 steps: wb-tokens %.4f < none %.4f",
                      res_wb.mean_token_loss_last100, res_none.mean_token_loss_last100);
    return o;
}

// ---------------------------------------------------------------------------
// criterion 10: finetune variants on a separable classification set

void write_cls_dataset(const fs::path& path, int per_class, uint64_t seed) {
    DetRng rng(seed);
    std::vector<std::string> noise;
    for (const auto& w : kPool) {
        if (w != "waterfall" && w != "notebook") {
            noise.push_back(w);
        }
    }
    std::ostringstream out;
    for (int i = 0; i < 2 * per_class; ++i) {
        const char* label = i % 2 == 0 ? "water" : "paper";
        const char* marker = i % 2 == 0 ? "waterfall" : "notebook";
        int extra = 3 + static_cast<int>(rng.below(3));
        std::string text = marker;
        for (int w = 0; w < extra; ++w) {
            text += ' ';
            text += noise[rng.below(noise.size())];
        }
        text += ' ';
        text += marker;
        out << label << '\t' << text << '\n';
    }
    write_file(path, out.str());
}

Outcome criterion_finetune(const std::vector<std::string>& corpus, const Vocabulary& vocab,
                           const fs::path& dir) {
    fs::create_directories(dir);
    fs::path train_path = dir / "cls_train.tsv";
    fs::path dev_path = dir / "cls_dev.tsv";
    write_cls_dataset(train_path, 160, 501);
    write_cls_dataset(dev_path, 50, 502);

    // schema-free checkpoint for the injection variants to start from
    nn::ModelConfig pre_mc;
    pre_mc.n_layers = 2;
    pre_mc.n_heads = 4;
    pre_mc.d_model = 64;
    pre_mc.vocab_size = vocab.size();
    pre_mc.max_seq_len = 64;
    auto pre = train::pretrain(corpus, vocab, pre_mc, desk_train_config(11),
                               (dir / "pretrain").string());
    const std::string& none_checkpoint = pre.final_checkpoint_path;

    train::FinetuneConfig fc;
    fc.batch_size = 32;
    fc.lr = 2e-5;
    fc.warmup_fraction = 0.05;
    fc.epochs = 20;
    fc.seq_len = 48;
    fc.seeds = {1, 2, 3};

    double worst_mean = 1.0;
    std::string detail;
    bool all_ok = true;
    const std::pair<train::WbInjection, const char*> variants[] = {
        {train::WbInjection::None, "baseline"},
        {train::WbInjection::FtBinary, "ft-binary"},
        {train::WbInjection::FtWBTokens, "ft-wb-tokens"},
    };
    for (const auto& [injection, name] : variants) {
        train::FinetuneConfig cfg = fc;
        cfg.wb_injection = injection;
        auto rep = train::finetune(none_checkpoint, vocab, train_path.string(), dev_path.string(),
                                   cfg);
        double lowest = 1.0;
        for (const auto& run : rep.runs) {
            lowest = std::min(lowest, run.best_metric);
        }
        all_ok = all_ok && rep.metric_name == "accuracy" && lowest >= 0.95;
        worst_mean = std::min(worst_mean, rep.mean);
        detail += format("%s%s %.3f", detail.empty() ? "" : ", ", name, rep.mean);
    }

    // injected binary embeddings require a checkpoint trained without a schema
    nn::ModelConfig mc;
    mc.n_layers = 2;
    mc.n_heads = 4;
    mc.d_model = 64;
    mc.vocab_size = vocab.size();
    mc.max_seq_len = 64;
    mc.wb_schema = boundary::BoundarySchema::Binary;
    auto params = nn::init_params<float>(mc, 9);
    fs::path binary_ckpt = dir / "binary-pretrained.ckpt";
    nn::save_checkpoint(binary_ckpt.string(), params, {{"seed", 9}, {"step", 0}});
    bool conflict = false;
    try {
        train::FinetuneConfig cfg = fc;
        cfg.wb_injection = train::WbInjection::FtBinary;
        train::finetune(binary_ckpt.string(), vocab, train_path.string(), dev_path.string(), cfg);
    } catch (const SchemaConflict&) {
        conflict = true;
    }

    Outcome o;
    o.pass = all_ok && conflict;
    o.detail = format("best-epoch dev accuracy: %s (all runs >= 0.95); SchemaConflict raised on "
                      "binary-pretrained checkpoint",
                      detail.c_str());
    return o;
}

// ---------------------------------------------------------------------------
// criterion 11: CLI byte-level determinism

Outcome criterion_cli_determinism(const fs::path& dir) {
    fs::create_directories(dir);
    fs::path corpus_path = dir / "cli_corpus.txt";
    std::string corpus_text;
    for (const auto& line : make_sentences(40, 77, false)) {
        corpus_text += line + '\n';
    }
    write_file(corpus_path, corpus_text);

    nlohmann::json cfg = {
        {"model", {{"n_layers", 1}, {"n_heads", 2}, {"d_model", 16}, {"max_seq_len", 32}}},
        {"train",
         {{"total_steps", 10},
          {"batch_size", 4},
          {"seq_len", 24},
          {"peak_lr", 1e-3},
          {"seed", 3},
          {"eval_every", 5},
          {"checkpoint_every", 5}}},
    };
    fs::path cfg_path = dir / "pretrain.json";
    write_file(cfg_path, cfg.dump(2) + "\n");

    auto run = [&](const std::string& args) {
        std::string cmd = std::string(WORDBOUND_CLI_PATH) + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    bool commands_ok = true;
    for (int i = 1; i <= 2; ++i) {
        fs::path out = dir / ("run" + std::to_string(i));
        commands_ok = commands_ok &&
                      run("train-tokenizer " + corpus_path.string() + " --mode marked" +
                          " --vocab-size 150 --out " + (out / "tok").string()) &&
                      run("pretrain --config " + cfg_path.string() + " --corpus " +
                          corpus_path.string() + " --vocab " + (out / "tok/vocab.txt").string() +
                          " --out " + (out / "pt").string());
    }

    auto same = [&](const char* rel) {
        std::string a = slurp(dir / "run1" / rel);
        std::string b = slurp(dir / "run2" / rel);
        return !a.empty() && a == b;
    };
    bool vocab_same = same("tok/vocab.txt");
    bool metrics_same = same("pt/metrics.tsv");
    bool ckpt_same = same("pt/checkpoint-5.ckpt") && same("pt/checkpoint-10.ckpt");

    Outcome o;
    o.pass = commands_ok && vocab_same && metrics_same && ckpt_same;
    o.detail = format("vocab %s, metrics log %s, checkpoints %s byte-identical across reruns",
                      vocab_same ? "yes" : "NO", metrics_same ? "yes" : "NO",
                      ckpt_same ? "yes" : "NO");
    return o;
}

// ---------------------------------------------------------------------------
// criterion 12: learning-rate schedule shape

Outcome criterion_lr_schedule() {
    train::LrSchedule s;
    s.total_steps = 1000;
    s.warmup_steps = 60;
    s.peak_lr = 1e-4;

    bool endpoints = train::lr_at(0, s) == 0.0 && train::lr_at(60, s) == 1e-4 &&
                     train::lr_at(1000, s) == 0.0;

    double max_dev = 0.0;
    bool monotone = true;
    double prev = train::lr_at(0, s);
    for (long long step = 0; step <= 1000; ++step) {
        double lr = train::lr_at(step, s);
        long double expected =
            step <= 60 ? 1e-4L * step / 60.0L : 1e-4L * (1000 - step) / 940.0L;
        max_dev = std::max(max_dev, std::fabs(lr - static_cast<double>(expected)));
        if (step > 0) {
            monotone = monotone && (step <= 60 ? lr >= prev : lr <= prev);
        }
        prev = lr;
    }

    Outcome o;
    o.pass = endpoints && max_dev <= 1e-18 && monotone;
    o.detail = format("lr(0)=0, lr(60)=1e-4, lr(1000)=0 exact; max pointwise deviation %.1e "
                      "over 1001 steps",
                      max_dev);
    return o;
}

}  // namespace

int main() {
    fs::path scratch = fs::current_path() / "acceptance-scratch";
    std::error_code ec;
    fs::remove_all(scratch, ec);
    fs::create_directories(scratch);

    // shared by criteria 3/4 (round trips) and 7/8/10 (training runs)
    std::vector<std::string> prose = make_sentences(1000, 321, true);
    std::vector<std::string> train_corpus = make_template_corpus(200, 8, 2024);
    TokenizerConfig vc;
    vc.vocab_size = 96;
    vc.marker_mode = MarkerMode::Marked;
    Vocabulary train_vocab = train_wordpiece(train_corpus, vc);

    int failed = 0;
    auto report = [&](int n, Outcome o) {
        std::printf("criterion %d: %s (%s)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    };
    auto guarded = [](auto fn) -> Outcome {
        try {
            return fn();
        } catch (const std::exception& e) {
            return {false, std::string("unexpected exception: ") + e.what()};
        }
    };

    report(1, guarded([&] { return criterion_greedy_oracle(); }));
    report(2, guarded([&] { return criterion_morph_oracle(); }));
    report(3, guarded([&] { return criterion_redundancy(prose); }));
    report(4, guarded([&] { return criterion_lossless(prose); }));
    report(5, guarded([&] { return criterion_gradcheck(); }));
    report(6, guarded([&] { return criterion_param_counts(); }));
    report(7, guarded([&] { return criterion_initial_loss(train_corpus, train_vocab); }));
    report(8, guarded([&] {
               return criterion_training_sanity(train_corpus, train_vocab, scratch / "sanity");
           }));
    report(9, guarded([&] { return criterion_wb_direction(scratch / "direction"); }));
    report(10, guarded([&] {
               return criterion_finetune(train_corpus, train_vocab, scratch / "finetune");
           }));
    report(11, guarded([&] { return criterion_cli_determinism(scratch / "cli"); }));
    report(12, guarded([&] { return criterion_lr_schedule(); }));

    if (failed != 0) {
        std::printf("%d criterion(s) failed\n", failed);
        return 1;
    }
    std::printf("all 12 criteria passed\n");
    return 0;
}
