#include <gtest/gtest.h>

#include "claimflow/text.hpp"

using namespace claimflow;

TEST(Text, DecodesMalformedUtf8AsReplacementPerByte) {
    const auto cps = text::decode_utf8("a\xff\xfe" "b");
    ASSERT_EQ(cps.size(), 4u);
    EXPECT_EQ(cps[1], text::kReplacement);
    EXPECT_EQ(cps[2], text::kReplacement);
}

TEST(Text, RoundTripsMultibyte) {
    const std::string s = "Grüße 😀 ß";
    EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
}

TEST(Text, LowercasesUmlauts) { EXPECT_EQ(text::to_lower("ÄÖÜ Straße"), "äöü straße"); }

TEST(Text, TokenizeSplitsPunctuationAndEmoji) {
    const auto toks = text::tokenize_lower("Mein Handy ist kaputt!😡 Wirklich?");
    const std::vector<std::string> want{"mein", "handy", "ist", "kaputt", "wirklich"};
    EXPECT_EQ(toks, want);
}

TEST(Text, TokenOffsetsPointIntoSource) {
    const std::string s = "  hello, World";
    for (const auto& t : text::tokenize(s)) EXPECT_EQ(s.substr(t.offset, t.text.size()), t.text);
}

TEST(Text, Trim) { EXPECT_EQ(text::trim(" \t x y \n"), "x y"); }
