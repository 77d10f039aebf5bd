#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wordbound {

// Whether subword continuations carry a "##" marker (classic WordPiece) or the
// vocabulary is position-free (one surface form per string, no markers).
enum class MarkerMode { Marked, Boundless };

inline constexpr std::string_view kContinuationPrefix = "##";

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kClsId = 2;
inline constexpr int kSepId = 3;
inline constexpr int kMaskId = 4;
inline constexpr int kWbId = 5;
inline constexpr int kNumSpecials = 6;

inline constexpr std::array<std::string_view, kNumSpecials> kSpecialTokens = {
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]", "[WB]"};

// Hash/equality pair so the token map accepts string_view lookups without
// allocating a temporary std::string.
struct TransparentHash {
    using is_transparent = void;
    size_t operator()(std::string_view s) const noexcept {
        return std::hash<std::string_view>{}(s);
    }
};
struct TransparentEq {
    using is_transparent = void;
    bool operator()(std::string_view a, std::string_view b) const noexcept { return a == b; }
};

class Vocabulary {
public:
    Vocabulary() = default;
    explicit Vocabulary(MarkerMode mode);

    MarkerMode mode() const { return mode_; }
    int size() const { return static_cast<int>(tokens_.size()); }

    // Longest non-special entry in bytes: the greedy matcher's probe bound.
    size_t max_token_bytes() const { return max_token_bytes_; }

    // Adds a token and returns its id; returns the existing id for duplicates.
    int add(std::string_view token);

    // -1 when absent.
    int id_of(std::string_view token) const;
    bool contains(std::string_view token) const { return id_of(token) >= 0; }

    const std::string& token(int id) const;  // throws UnknownTokenId
    const std::vector<std::string>& tokens() const { return tokens_; }

    bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }

    // One token per line, UTF-8, line number = id. Specials must occupy
    // ids 0..5 in the fixed order.
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path, MarkerMode mode);

    // Throws InvalidVocabulary on duplicate tokens, missing/misordered
    // specials, or "##"-prefixed entries in Boundless mode.
    void validate() const;

private:
    MarkerMode mode_ = MarkerMode::Marked;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int, TransparentHash, TransparentEq> ids_;
    size_t max_token_bytes_ = 0;
};

// Fresh vocabulary containing just the six specials.
Vocabulary make_base_vocabulary(MarkerMode mode);

}  // namespace wordbound
