#include "claimflow/text.hpp"

namespace claimflow::text {

namespace {

// Returns the codepoint starting at s[i] and advances i. Overlong forms,
// surrogates and truncated sequences decode as U+FFFD consuming one byte.
char32_t next_codepoint(std::string_view s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) {
        ++i;
        return b0;
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
        ++i;
        return kReplacement;
    }
    if (i + len > s.size()) {
        ++i;
        return kReplacement;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kReplacement;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                          (len == 4 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
        ++i;
        return kReplacement;
    }
    i += len;
    return cp;
}

char32_t lower_cp(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 32;
    return cp;
}

} // namespace

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        out.push_back(next_codepoint(s, i));
    }
    return out;
}

std::string encode_utf8(char32_t cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    for (char32_t cp : s) out += encode_utf8(cp);
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t start = i;
        const char32_t cp = next_codepoint(s, i);
        if (cp == kReplacement && i - start == 1 && static_cast<unsigned char>(s[start]) >= 0x80) {
            out += s[start]; // keep undecodable bytes untouched
            continue;
        }
        out += encode_utf8(lower_cp(cp));
    }
    return out;
}

std::string trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\f\v";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(ws);
    return std::string(s.substr(first, last - first + 1));
}

bool is_word_codepoint(char32_t cp) {
    if ((cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9')) {
        return true;
    }
    return cp >= 0xC0 && cp <= 0x24F && cp != 0xD7 && cp != 0xF7;
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> tokens;
    std::size_t i = 0;
    std::size_t token_start = 0;
    bool in_token = false;
    while (i < s.size()) {
        const std::size_t at = i;
        const char32_t cp = next_codepoint(s, i);
        const bool word = is_word_codepoint(cp);
        if (word && !in_token) {
            token_start = at;
            in_token = true;
        } else if (!word && in_token) {
            auto raw = s.substr(token_start, at - token_start);
            tokens.push_back({std::string(raw), to_lower(raw), token_start});
            in_token = false;
        }
    }
    if (in_token) {
        auto raw = s.substr(token_start);
        tokens.push_back({std::string(raw), to_lower(raw), token_start});
    }
    return tokens;
}

std::vector<std::string> tokenize_lower(std::string_view s) {
    std::vector<std::string> out;
    for (auto& t : tokenize(s)) out.push_back(std::move(t.lower));
    return out;
}

} // namespace claimflow::text
