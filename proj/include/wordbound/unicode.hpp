#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wordbound::unicode {

using codepoint = uint32_t;

// Decodes one UTF-8 sequence starting at text[pos]. Advances pos past the
// sequence. Returns 0xFFFD on malformed input when validate is false,
// throws InvalidUtf8 when validate is true.
codepoint decode(std::string_view text, size_t& pos, bool validate);

std::vector<codepoint> decode_all(std::string_view text, bool validate = false);

void append_utf8(std::string& out, codepoint cp);
std::string to_utf8(codepoint cp);

// Throws InvalidUtf8 with a position diagnostic if text is not valid UTF-8.
void check_utf8(std::string_view text);

bool is_whitespace(codepoint cp);

// Punctuation per a curated table: full ASCII punctuation plus the common
// general-punctuation, CJK and fullwidth ranges. Not a full Unicode
// category lookup; see the ranges in the implementation.
bool is_punctuation(codepoint cp);

// ASCII A-Z plus Latin-1 À-Þ (excluding ×). Other scripts pass through.
codepoint to_lower(codepoint cp);

std::string lowercase(std::string_view text);

}  // namespace wordbound::unicode
