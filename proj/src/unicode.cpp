#include "wordbound/unicode.hpp"

#include "wordbound/errors.hpp"

namespace wordbound::unicode {

namespace {

constexpr codepoint kReplacement = 0xFFFD;

bool is_continuation(unsigned char b) { return (b & 0xC0) == 0x80; }

}  // namespace

codepoint decode(std::string_view text, size_t& pos, bool validate) {
    auto fail = [&](const char* what) -> codepoint {
        if (validate) {
            throw InvalidUtf8(std::string(what) + " at byte " + std::to_string(pos));
        }
        ++pos;
        return kReplacement;
    };

    unsigned char b0 = static_cast<unsigned char>(text[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len;
    codepoint cp;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return fail("invalid UTF-8 lead byte");
    }
    if (pos + len > text.size()) {
        return fail("truncated UTF-8 sequence");
    }
    for (int i = 1; i < len; ++i) {
        unsigned char b = static_cast<unsigned char>(text[pos + i]);
        if (!is_continuation(b)) {
            return fail("invalid UTF-8 continuation byte");
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong encodings and surrogates
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        return fail("invalid UTF-8 scalar value");
    }
    pos += len;
    return cp;
}

std::vector<codepoint> decode_all(std::string_view text, bool validate) {
    std::vector<codepoint> out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        out.push_back(decode(text, pos, validate));
    }
    return out;
}

void append_utf8(std::string& out, codepoint cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string to_utf8(codepoint cp) {
    std::string s;
    append_utf8(s, cp);
    return s;
}

void check_utf8(std::string_view text) {
    size_t pos = 0;
    while (pos < text.size()) {
        decode(text, pos, /*validate=*/true);
    }
}

bool is_whitespace(codepoint cp) {
    switch (cp) {
        case ' ':
        case '\t':
        case '\n':
        case '\r':
        case '\f':
        case '\v':
        case 0x85:    // NEL
        case 0xA0:    // NBSP
        case 0x1680:  // ogham space mark
        case 0x2028:  // line separator
        case 0x2029:  // paragraph separator
        case 0x202F:  // narrow no-break space
        case 0x205F:  // medium mathematical space
        case 0x3000:  // ideographic space
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_punctuation(codepoint cp) {
    if (cp < 0x80) {
        return (cp >= '!' && cp <= '/') || (cp >= ':' && cp <= '@') ||
               (cp >= '[' && cp <= '`') || (cp >= '{' && cp <= '~');
    }
    switch (cp) {
        case 0xA1:  // inverted exclamation
        case 0xA7:  // section sign
        case 0xAB:  // left guillemet
        case 0xB6:  // pilcrow
        case 0xB7:  // middle dot
        case 0xBB:  // right guillemet
        case 0xBF:  // inverted question mark
            return true;
        default:
            break;
    }
    return (cp >= 0x2010 && cp <= 0x2027) ||  // dashes, quotes, daggers, ellipsis
           (cp >= 0x2030 && cp <= 0x205E) ||  // per-mille .. general punctuation
           (cp >= 0x3001 && cp <= 0x3011) ||  // CJK commas and brackets
           (cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
           (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65);
}

codepoint to_lower(codepoint cp) {
    if (cp >= 'A' && cp <= 'Z') {
        return cp + 32;
    }
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {
        return cp + 32;
    }
    return cp;
}

std::string lowercase(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        append_utf8(out, to_lower(decode(text, pos, false)));
    }
    return out;
}

}  // namespace wordbound::unicode
