#include "wordbound/vocabulary.hpp"

#include <fstream>

#include "wordbound/errors.hpp"
#include "wordbound/unicode.hpp"

namespace wordbound {

Vocabulary::Vocabulary(MarkerMode mode) : mode_(mode) {}

int Vocabulary::add(std::string_view token) {
    auto it = ids_.find(token);
    if (it != ids_.end()) {
        return it->second;
    }
    int id = static_cast<int>(tokens_.size());
    tokens_.emplace_back(token);
    ids_.emplace(tokens_.back(), id);
    if (id >= kNumSpecials) {  // specials never match corpus text, so they don't bound probes
        max_token_bytes_ = std::max(max_token_bytes_, token.size());
    }
    return id;
}

int Vocabulary::id_of(std::string_view token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? -1 : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) {
        throw UnknownTokenId("token id " + std::to_string(id) + " out of range [0, " +
                             std::to_string(size()) + ")");
    }
    return tokens_[static_cast<size_t>(id)];
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot open for writing: " + path);
    }
    for (const auto& tok : tokens_) {
        out << tok << '\n';
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

Vocabulary Vocabulary::load(const std::string& path, MarkerMode mode) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open for reading: " + path);
    }
    Vocabulary vocab(mode);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        unicode::check_utf8(line);
        if (vocab.ids_.find(line) != vocab.ids_.end()) {
            throw InvalidVocabulary("duplicate token in " + path + ": " + line);
        }
        vocab.add(line);
    }
    vocab.validate();
    return vocab;
}

void Vocabulary::validate() const {
    if (size() < kNumSpecials) {
        throw InvalidVocabulary("vocabulary has fewer entries than the special tokens");
    }
    for (int i = 0; i < kNumSpecials; ++i) {
        if (tokens_[static_cast<size_t>(i)] != kSpecialTokens[static_cast<size_t>(i)]) {
            throw InvalidVocabulary("special token at id " + std::to_string(i) + " must be " +
                                    std::string(kSpecialTokens[static_cast<size_t>(i)]) +
                                    ", found " + tokens_[static_cast<size_t>(i)]);
        }
    }
    for (int i = kNumSpecials; i < size(); ++i) {
        const auto& tok = tokens_[static_cast<size_t>(i)];
        if (tok.empty()) {
            throw InvalidVocabulary("empty token at id " + std::to_string(i));
        }
        if (mode_ == MarkerMode::Boundless && tok.starts_with(kContinuationPrefix)) {
            throw InvalidVocabulary("marker-prefixed token in a boundless vocabulary: " + tok);
        }
    }
}

Vocabulary make_base_vocabulary(MarkerMode mode) {
    Vocabulary vocab(mode);
    for (auto sp : kSpecialTokens) {
        vocab.add(sp);
    }
    return vocab;
}

}  // namespace wordbound
