#pragma once

#include <string>
#include <vector>

#include "wordbound/tokenizer.hpp"
#include "wordbound/vocabulary.hpp"

namespace wordbound {

struct TokenizerConfig {
    int vocab_size = 16384;
    long long min_pair_frequency = 2;
    bool lowercase = true;
    MarkerMode marker_mode = MarkerMode::Marked;
    bool isolate_punctuation = true;
};

struct TrainReport {
    int merges = 0;
    bool exhausted = false;  // mergeable pairs ran out before vocab_size
    std::vector<std::string> warnings;
};

// Trains a WordPiece vocabulary over line-delimited documents. Merge score is
// freq(pair) / (freq(left) * freq(right)); ties go to the lexicographically
// smaller merged string. Marked mode keeps "##" continuations as distinct
// surface forms; boundless mode pools counts of identical strings regardless
// of word position, so each surface form appears at most once.
Vocabulary train_wordpiece(const std::vector<std::string>& corpus, const TokenizerConfig& config,
                           TrainReport* report = nullptr);

}  // namespace wordbound
