#pragma once

#include <string>
#include <vector>

#include "wordbound/tokenizer.hpp"

namespace wordbound::boundary {

// How boundary information is exposed to a model. None drops it entirely,
// WBTokens splices a literal [WB] token into the stream, the rest feed an
// extra embedding table.
enum class BoundarySchema { None, Binary, WordIndex, SubwordIndex, WBTokens };

enum class WbPlacement { Between, BeforeEachWord };

inline constexpr int kMaxWordIndex = 256;     // larger word positions clamp here
inline constexpr int kMaxSubwordIndex = 512;  // larger within-word positions clamp here

struct BoundaryAnnotation {
    std::vector<int> binary;         // 0 special, 1 word-initial, 2 word-internal
    std::vector<int> word_index;     // 1-based word position, 0 for specials
    std::vector<int> subword_index;  // 1-based position within word, 0 for specials
};

const char* schema_name(BoundarySchema schema);
BoundarySchema schema_from_name(const std::string& name);  // throws InvalidConfig

// Derives all three index sequences from encoding.word_ids. Special tokens
// (word id kNoWord) get 0 everywhere. Throws MalformedWordIds when word ids
// decrease over non-special positions.
BoundaryAnnotation annotate(const Encoding& encoding);

// Splices [WB] between consecutive words (n-1 insertions), or before every
// word with BeforeEachWord. [WB] carries the no-word sentinel.
Encoding insert_wb_tokens(const Encoding& encoding, const Vocabulary& vocab,
                          WbPlacement placement = WbPlacement::Between);

// Inverse of encoding + binary annotation: concatenate pieces, space before
// each binary==1 token except the first emitted one; binary==0 positions are
// skipped. Leading "##" markers are stripped so both vocabulary modes round-trip.
std::string detokenize_with_boundaries(const std::vector<std::string>& tokens,
                                       const std::vector<int>& binary);

// TSV dump (token, binary, word_index, subword_index) with a header row.
std::string annotation_tsv(const Encoding& encoding, const BoundaryAnnotation& ann);

}  // namespace wordbound::boundary
