#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace claimflow::text {

constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8. Malformed sequences become U+FFFD, one per offending byte.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(char32_t cp);
std::string encode_utf8(std::u32string_view s);

/// Lowercases ASCII and the Latin-1 uppercase letters (so "ÄÖÜ" -> "äöü").
std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

/// Letters and digits, including Latin-1 / Latin Extended letters such as umlauts and ß.
bool is_word_codepoint(char32_t cp);

struct Token {
    std::string text;   // as written
    std::string lower;  // lowercased form used for matching
    std::size_t offset; // byte offset of the token in the source
};

/// Splits on whitespace, punctuation and symbols (emojis included). No stemming.
std::vector<Token> tokenize(std::string_view s);
std::vector<std::string> tokenize_lower(std::string_view s);

} // namespace claimflow::text
