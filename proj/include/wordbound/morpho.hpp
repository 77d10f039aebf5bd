#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wordbound/vocabulary.hpp"

namespace wordbound::morpho {

struct GoldSegmentation {
    std::string word;
    std::vector<std::string> morphs;
};

struct SegEvalResult {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double avg_len = 0.0;  // mean pieces per scored word
    long long n_words = 0;
    long long n_skipped = 0;  // gold rows whose morphs do not concatenate to the word
};

// Cumulative codepoint offsets strictly inside the word formed by the pieces
// (edges excluded). Leading "##" markers are stripped before counting.
std::set<int> boundary_set(const std::vector<std::string>& pieces);

// Micro-averaged boundary precision/recall/F1 over the dataset. Gold rows
// whose morph concatenation mismatches the word are skipped and counted.
// When a denominator is empty over the whole dataset the score is 1 if the
// other side is empty too, else 0; F1 is 0 when P+R == 0.
SegEvalResult evaluate(const std::map<std::string, std::vector<std::string>>& predictions,
                       const std::vector<GoldSegmentation>& gold);

// Fraction of non-special tokens that belong to a dual pair {t, "##" + t},
// counting both members. Boundless vocabularies score 0 by construction.
double vocab_redundancy(const Vocabulary& vocab);

// Mean encode_word piece count over the words. Throws EmptyInput.
double avg_seq_len(const Vocabulary& vocab, const std::vector<std::string>& words);

// TSV rows: word<TAB>morphs separated by single spaces. Lowercases both
// columns when lowercase is set (matching tokenizer normalization).
std::vector<GoldSegmentation> load_gold_tsv(const std::string& path, bool lowercase = true);

struct DatasetReport {
    std::string name;
    SegEvalResult result;
};

// Per-dataset rows plus an unweighted macro-average row across datasets.
std::string report_tsv(const std::vector<DatasetReport>& reports);

}  // namespace wordbound::morpho
