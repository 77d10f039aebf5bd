#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wordbound/vocabulary.hpp"

namespace wordbound {

// Word index assigned to special tokens (they belong to no pre-token).
inline constexpr int kNoWord = -1;

struct Encoding {
    std::vector<int> token_ids;
    std::vector<std::string> token_strings;
    std::vector<int> word_ids;  // 0-based pre-token index, kNoWord for specials

    size_t size() const { return token_ids.size(); }
    void push(int id, std::string token, int word_id) {
        token_ids.push_back(id);
        token_strings.push_back(std::move(token));
        word_ids.push_back(word_id);
    }
};

struct PretokenizeOptions {
    bool lowercase = true;
    bool isolate_punctuation = true;
};

// Splits on Unicode whitespace; with isolate_punctuation each punctuation
// character becomes its own pre-token.
std::vector<std::string> pretokenize(std::string_view text, const PretokenizeOptions& opts = {});

// Greedy longest-match-first segmentation of a single word. In Marked mode
// pieces after the first must carry the "##" prefix. A word with no full
// cover becomes exactly {"[UNK]"}.
std::vector<std::string> encode_word(std::string_view word, const Vocabulary& vocab);

struct EncodeOptions {
    bool add_cls_sep = false;
    PretokenizeOptions pretokenize;
};

Encoding encode(std::string_view text, const Vocabulary& vocab, const EncodeOptions& opts = {});

// Marked mode: "##" pieces attach to the previous piece, words are joined
// with single spaces. Boundless mode: plain space join of all pieces (lossy
// by design; see detokenize_with_boundaries for exact reconstruction).
// [PAD]/[CLS]/[SEP]/[WB] are skipped; [UNK] and [MASK] print literally.
std::string decode(const std::vector<int>& token_ids, const Vocabulary& vocab);

}  // namespace wordbound
