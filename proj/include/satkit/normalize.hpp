#pragma once

// Scoring-side text normalization: NFC composition for the Latin repertoire,
// lowercasing, punctuation stripping, whitespace tokenization. Reference
// transcripts carry no capitalization or punctuation, so the hypothesis side
// must be folded to the same convention before any word-level comparison.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace satkit {

namespace uni {

// Decodes UTF-8, skipping malformed sequences instead of throwing. The
// scorer must survive arbitrary bytes (LLM output is not guaranteed UTF-8).
inline std::vector<char32_t> decode_utf8(std::string_view s) {
    std::vector<char32_t> out;
    out.reserve(s.size());
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int len = 0;
        char32_t cp = 0;
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
            ++i;  // stray continuation or invalid lead byte
            continue;
        }
        if (i + len > n) {
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k < len; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok) {
            ++i;
            continue;
        }
        // reject overlong encodings / surrogates
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
            (len == 4 && cp < 0x10000) || (cp >= 0xD800 && cp <= 0xDFFF) ||
            cp > 0x10FFFF) {
            ++i;
            continue;
        }
        out.push_back(cp);
        i += len;
    }
    return out;
}

inline void encode_utf8(char32_t cp, std::string& out) {
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

// base letter + combining mark -> precomposed character. Covers the marks
// that occur in French (grave, acute, circumflex, tilde, diaeresis, cedilla)
// over the Latin letters they apply to. Returns 0 when no composition exists.
inline char32_t compose(char32_t base, char32_t mark) {
    struct Entry {
        char32_t base;
        char32_t mark;
        char32_t composed;
    };
    static constexpr Entry table[] = {
        {U'a', 0x300, 0x00E0}, {U'a', 0x301, 0x00E1}, {U'a', 0x302, 0x00E2},
        {U'a', 0x303, 0x00E3}, {U'a', 0x308, 0x00E4},
        {U'e', 0x300, 0x00E8}, {U'e', 0x301, 0x00E9}, {U'e', 0x302, 0x00EA},
        {U'e', 0x308, 0x00EB},
        {U'i', 0x300, 0x00EC}, {U'i', 0x301, 0x00ED}, {U'i', 0x302, 0x00EE},
        {U'i', 0x308, 0x00EF},
        {U'o', 0x300, 0x00F2}, {U'o', 0x301, 0x00F3}, {U'o', 0x302, 0x00F4},
        {U'o', 0x303, 0x00F5}, {U'o', 0x308, 0x00F6},
        {U'u', 0x300, 0x00F9}, {U'u', 0x301, 0x00FA}, {U'u', 0x302, 0x00FB},
        {U'u', 0x308, 0x00FC},
        {U'y', 0x301, 0x00FD}, {U'y', 0x308, 0x00FF},
        {U'c', 0x327, 0x00E7}, {U'n', 0x303, 0x00F1},
        {U'A', 0x300, 0x00C0}, {U'A', 0x301, 0x00C1}, {U'A', 0x302, 0x00C2},
        {U'A', 0x303, 0x00C3}, {U'A', 0x308, 0x00C4},
        {U'E', 0x300, 0x00C8}, {U'E', 0x301, 0x00C9}, {U'E', 0x302, 0x00CA},
        {U'E', 0x308, 0x00CB},
        {U'I', 0x300, 0x00CC}, {U'I', 0x301, 0x00CD}, {U'I', 0x302, 0x00CE},
        {U'I', 0x308, 0x00CF},
        {U'O', 0x300, 0x00D2}, {U'O', 0x301, 0x00D3}, {U'O', 0x302, 0x00D4},
        {U'O', 0x303, 0x00D5}, {U'O', 0x308, 0x00D6},
        {U'U', 0x300, 0x00D9}, {U'U', 0x301, 0x00DA}, {U'U', 0x302, 0x00DB},
        {U'U', 0x308, 0x00DC},
        {U'Y', 0x301, 0x00DD}, {U'Y', 0x308, 0x0178},
        {U'C', 0x327, 0x00C7}, {U'N', 0x303, 0x00D1},
    };
    for (const auto& e : table) {
        if (e.base == base && e.mark == mark) return e.composed;
    }
    return 0;
}

inline bool is_combining_mark(char32_t cp) {
    return cp >= 0x0300 && cp <= 0x036F;
}

inline char32_t to_lower(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    // Latin-1 Supplement uppercase letters (except the multiplication sign)
    if (cp >= 0x00C0 && cp <= 0x00DE && cp != 0x00D7) return cp + 0x20;
    // Latin Extended-A comes in case pairs with two interleavings
    if (cp >= 0x0100 && cp <= 0x0137) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp >= 0x0139 && cp <= 0x0148) return (cp % 2 == 1) ? cp + 1 : cp;
    if (cp >= 0x014A && cp <= 0x0177) return (cp % 2 == 0) ? cp + 1 : cp;
    if (cp == 0x0178) return 0x00FF;  // Y with diaeresis
    if (cp >= 0x0179 && cp <= 0x017E) return (cp % 2 == 1) ? cp + 1 : cp;
    return cp;
}

inline bool is_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\r': case U'\f': case U'\v':
        case 0x00A0:  // no-break space (common in French typography)
        case 0x202F:  // narrow no-break space
        case 0x205F:
        case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

inline bool is_apostrophe(char32_t cp) {
    return cp == U'\'' || cp == 0x2019 || cp == 0x02BC;
}

inline bool is_hyphen(char32_t cp) {
    return cp == U'-' || cp == 0x2010 || cp == 0x2011;
}

// Characters that survive into tokens (before the apostrophe/hyphen rule).
inline bool is_word_char(char32_t cp) {
    if ((cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z') ||
        (cp >= U'0' && cp <= U'9')) {
        return true;
    }
    if (cp < 0x00C0) return false;  // remaining ASCII + Latin-1 punctuation
    if (cp == 0x00D7 || cp == 0x00F7) return false;
    if (cp <= 0x017F) return true;  // Latin-1 letters + Latin Extended-A
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // general punctuation
    if (cp == 0x2E2E || cp == 0x3001 || cp == 0x3002) return false;
    if (is_combining_mark(cp)) return false;  // stray marks never composed
    // Unknown scripts are kept verbatim rather than silently deleted.
    return true;
}

}  // namespace uni

// NFC composition restricted to the Latin repertoire: combining marks that
// follow a composable base letter are merged into the precomposed character.
// Accents arriving decomposed (common in transcripts edited on macOS) then
// compare equal to precomposed ones.
inline std::string nfc_latin(std::string_view text) {
    const auto cps = uni::decode_utf8(text);
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t cur = cps[i];
        while (i + 1 < cps.size() && uni::is_combining_mark(cps[i + 1])) {
            const char32_t merged = uni::compose(cur, cps[i + 1]);
            if (merged == 0) break;
            cur = merged;
            ++i;
        }
        uni::encode_utf8(cur, out);
    }
    return out;
}

// Lowercases, strips punctuation (keeping word-internal apostrophes and
// hyphens), and splits on whitespace. Stripped characters are removed, not
// replaced by spaces; only whitespace separates tokens.
inline std::vector<std::string> normalize(std::string_view text) {
    std::vector<std::string> tokens;
    const auto cps = uni::decode_utf8(text);

    std::vector<char32_t> token;
    auto flush = [&] {
        // trim joiners that ended up at the edges ("euh-" -> "euh")
        std::size_t b = 0, e = token.size();
        while (b < e && (token[b] == U'\'' || token[b] == U'-')) ++b;
        while (e > b && (token[e - 1] == U'\'' || token[e - 1] == U'-')) --e;
        if (e > b) {
            std::string s;
            for (std::size_t k = b; k < e; ++k) uni::encode_utf8(token[k], s);
            tokens.push_back(std::move(s));
        }
        token.clear();
    };

    for (std::size_t i = 0; i < cps.size(); ++i) {
        char32_t cur = cps[i];
        while (i + 1 < cps.size() && uni::is_combining_mark(cps[i + 1])) {
            const char32_t merged = uni::compose(cur, cps[i + 1]);
            if (merged == 0) break;
            cur = merged;
            ++i;
        }
        if (uni::is_space(cur)) {
            flush();
        } else if (uni::is_apostrophe(cur)) {
            token.push_back(U'\'');
        } else if (uni::is_hyphen(cur)) {
            token.push_back(U'-');
        } else if (uni::is_word_char(cur)) {
            token.push_back(uni::to_lower(cur));
        }
        // anything else is punctuation: dropped without breaking the token
    }
    flush();
    return tokens;
}

inline std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace satkit
