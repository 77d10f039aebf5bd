#include "wordbound/boundary.hpp"

#include <sstream>

#include "wordbound/errors.hpp"

namespace wordbound::boundary {

const char* schema_name(BoundarySchema schema) {
    switch (schema) {
        case BoundarySchema::None: return "none";
        case BoundarySchema::Binary: return "binary";
        case BoundarySchema::WordIndex: return "word";
        case BoundarySchema::SubwordIndex: return "subword";
        case BoundarySchema::WBTokens: return "wb-tokens";
    }
    throw InvalidConfig("unreachable boundary schema");
}

BoundarySchema schema_from_name(const std::string& name) {
    if (name == "none") return BoundarySchema::None;
    if (name == "binary") return BoundarySchema::Binary;
    if (name == "word") return BoundarySchema::WordIndex;
    if (name == "subword") return BoundarySchema::SubwordIndex;
    if (name == "wb-tokens") return BoundarySchema::WBTokens;
    throw InvalidConfig("unknown boundary schema: " + name +
                        " (expected none|binary|word|subword|wb-tokens)");
}

BoundaryAnnotation annotate(const Encoding& encoding) {
    BoundaryAnnotation ann;
    const size_t n = encoding.word_ids.size();
    ann.binary.resize(n);
    ann.word_index.resize(n);
    ann.subword_index.resize(n);
    int prev_word = kNoWord;
    int word_pos = 0;     // 1-based index of the current word
    int subword_pos = 0;  // 1-based index within the current word
    for (size_t i = 0; i < n; ++i) {
        int w = encoding.word_ids[i];
        if (w == kNoWord) {
            ann.binary[i] = 0;
            ann.word_index[i] = 0;
            ann.subword_index[i] = 0;
            continue;
        }
        if (w < 0 || (prev_word != kNoWord && w < prev_word)) {
            throw MalformedWordIds("word_ids must be non-decreasing, got " + std::to_string(w) +
                                   " after " + std::to_string(prev_word));
        }
        if (w != prev_word) {
            ++word_pos;
            subword_pos = 1;
        } else {
            ++subword_pos;
        }
        ann.binary[i] = subword_pos == 1 ? 1 : 2;
        ann.word_index[i] = std::min(word_pos, kMaxWordIndex);
        ann.subword_index[i] = std::min(subword_pos, kMaxSubwordIndex);
        prev_word = w;
    }
    return ann;
}

Encoding insert_wb_tokens(const Encoding& encoding, const Vocabulary& vocab,
                          WbPlacement placement) {
    if (vocab.id_of(kSpecialTokens[kWbId]) != kWbId) {
        throw MissingWBSpecial("vocabulary lacks the [WB] special");
    }
    Encoding out;
    int prev_word = kNoWord;
    for (size_t i = 0; i < encoding.size(); ++i) {
        int w = encoding.word_ids[i];
        if (w != kNoWord && w != prev_word) {
            bool first_word = prev_word == kNoWord;
            if (placement == WbPlacement::BeforeEachWord || !first_word) {
                out.push(kWbId, std::string(kSpecialTokens[kWbId]), kNoWord);
            }
            prev_word = w;
        }
        out.push(encoding.token_ids[i], encoding.token_strings[i], w);
    }
    return out;
}

std::string detokenize_with_boundaries(const std::vector<std::string>& tokens,
                                       const std::vector<int>& binary) {
    if (tokens.size() != binary.size()) {
        throw LengthMismatch("tokens (" + std::to_string(tokens.size()) + ") and binary (" +
                             std::to_string(binary.size()) + ") differ in length");
    }
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (binary[i] == 0) {
            continue;  // special token
        }
        if (binary[i] == 1 && !out.empty()) {
            out.push_back(' ');
        }
        std::string_view piece = tokens[i];
        if (piece.starts_with(kContinuationPrefix)) {
            piece.remove_prefix(kContinuationPrefix.size());
        }
        out.append(piece);
    }
    return out;
}

std::string annotation_tsv(const Encoding& encoding, const BoundaryAnnotation& ann) {
    if (encoding.size() != ann.binary.size()) {
        throw LengthMismatch("encoding and annotation differ in length");
    }
    std::ostringstream out;
    out << "token\tbinary\tword_index\tsubword_index\n";
    for (size_t i = 0; i < encoding.size(); ++i) {
        out << encoding.token_strings[i] << '\t' << ann.binary[i] << '\t' << ann.word_index[i]
            << '\t' << ann.subword_index[i] << '\n';
    }
    return out.str();
}

}  // namespace wordbound::boundary
