#include "wordbound/tokenizer.hpp"

#include <algorithm>

#include "wordbound/errors.hpp"
#include "wordbound/unicode.hpp"

namespace wordbound {

std::vector<std::string> pretokenize(std::string_view text, const PretokenizeOptions& opts) {
    std::vector<std::string> out;
    std::string current;
    size_t pos = 0;
    while (pos < text.size()) {
        size_t start = pos;
        unicode::codepoint cp = unicode::decode(text, pos, false);
        if (unicode::is_whitespace(cp)) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
            continue;
        }
        if (opts.isolate_punctuation && unicode::is_punctuation(cp)) {
            if (!current.empty()) {
                out.push_back(std::move(current));
                current.clear();
            }
            out.emplace_back(text.substr(start, pos - start));
            continue;
        }
        if (opts.lowercase) {
            unicode::append_utf8(current, unicode::to_lower(cp));
        } else {
            current.append(text.substr(start, pos - start));
        }
    }
    if (!current.empty()) {
        out.push_back(std::move(current));
    }
    return out;
}

std::vector<std::string> encode_word(std::string_view word, const Vocabulary& vocab) {
    std::vector<std::string> pieces;
    pieces.reserve(word.size());
    const bool marked = vocab.mode() == MarkerMode::Marked;
    const size_t max_bytes = vocab.max_token_bytes();
    std::string scratch;
    size_t pos = 0;
    while (pos < word.size()) {
        const bool continuation = marked && pos > 0;
        size_t limit = word.size() - pos;
        if (continuation) {
            if (max_bytes < kContinuationPrefix.size() + 1) {
                return {std::string(kSpecialTokens[kUnkId])};
            }
            limit = std::min(limit, max_bytes - kContinuationPrefix.size());
            scratch.assign(kContinuationPrefix);
            scratch.append(word.substr(pos, limit));
        } else {
            limit = std::min(limit, max_bytes);
        }
        size_t matched = 0;
        int matched_id = -1;
        for (size_t len = limit; len >= 1; --len) {
            std::string_view candidate =
                continuation ? std::string_view(scratch).substr(0, kContinuationPrefix.size() + len)
                             : word.substr(pos, len);
            int id = vocab.id_of(candidate);
            if (id >= kNumSpecials) {  // specials never match corpus text
                matched = len;
                matched_id = id;
                break;
            }
        }
        if (matched == 0) {
            return {std::string(kSpecialTokens[kUnkId])};
        }
        pieces.push_back(vocab.token(matched_id));
        pos += matched;
    }
    return pieces;
}

Encoding encode(std::string_view text, const Vocabulary& vocab, const EncodeOptions& opts) {
    Encoding enc;
    if (opts.add_cls_sep) {
        enc.push(kClsId, std::string(kSpecialTokens[kClsId]), kNoWord);
    }
    auto words = pretokenize(text, opts.pretokenize);
    for (size_t w = 0; w < words.size(); ++w) {
        for (auto& piece : encode_word(words[w], vocab)) {
            int id = vocab.id_of(piece);
            enc.push(id, std::move(piece), static_cast<int>(w));
        }
    }
    if (opts.add_cls_sep) {
        enc.push(kSepId, std::string(kSpecialTokens[kSepId]), kNoWord);
    }
    return enc;
}

std::string decode(const std::vector<int>& token_ids, const Vocabulary& vocab) {
    std::string out;
    const bool marked = vocab.mode() == MarkerMode::Marked;
    for (int id : token_ids) {
        const std::string& tok = vocab.token(id);  // validates the id
        if (id == kPadId || id == kClsId || id == kSepId || id == kWbId) {
            continue;
        }
        if (marked && !vocab.is_special(id) && tok.starts_with(kContinuationPrefix)) {
            out.append(tok, kContinuationPrefix.size(), std::string::npos);
            continue;
        }
        if (!out.empty()) {
            out.push_back(' ');
        }
        out.append(tok);
    }
    return out;
}

}  // namespace wordbound
