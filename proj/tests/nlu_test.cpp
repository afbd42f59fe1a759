#include <gtest/gtest.h>

#include "claimflow/nlu.hpp"
#include "support.hpp"

using namespace claimflow;
using namespace claimflow::nlu;
using claimflow::testing::kReferenceTime;

namespace {

const Understander& understander(Language lang) {
    static const auto ps = claimflow::testing::packs();
    static const Understander en(ps[0].language == Language::en ? ps[0].lexicon : ps[1].lexicon);
    static const Understander de(ps[0].language == Language::de ? ps[0].lexicon : ps[1].lexicon);
    return lang == Language::en ? en : de;
}

MessageUnderstanding en(std::string_view s) { return understander(Language::en).understand(s, kReferenceTime); }
MessageUnderstanding de(std::string_view s) { return understander(Language::de).understand(s, kReferenceTime); }

} // namespace

TEST(Nlu, BrokenDisplayExample) {
    const auto u = en("the display of my smartphone broke");
    EXPECT_EQ(u.intent, "phone_broken");
    ASSERT_TRUE(u.has("damage_type"));
    EXPECT_EQ(std::get<DamageType>(u.parameters.at("damage_type")), DamageType::display_damage);
    EXPECT_FALSE(u.has("phone_type"));
}

TEST(Nlu, ModelAndDateAttachedToReport) {
    const auto u = en("my Galaxy S9 screen broke yesterday");
    EXPECT_EQ(u.intent, "phone_broken");
    EXPECT_EQ(std::get<PhoneModel>(u.parameters.at("phone_type")).name, "Galaxy S9");
    EXPECT_EQ(format_date(std::get<DateTimeValue>(u.parameters.at("date")).at), "2024-05-09");
}

TEST(Nlu, UnknownTextIsFallback) {
    const auto u = en("blorp zzzt");
    EXPECT_TRUE(u.is_fallback());
    EXPECT_TRUE(u.parameters.empty());
}

TEST(Nlu, AffirmationsAndNegations) {
    EXPECT_EQ(en("yes").intent, "affirm");
    EXPECT_EQ(en("okay").intent, "ok");
    EXPECT_EQ(en("good").intent, "good");
    EXPECT_EQ(en("correct").intent, "correct");
    EXPECT_EQ(en("not correct").intent, "deny");
    EXPECT_EQ(de("ja").intent, "affirm");
    EXPECT_EQ(de("gut").intent, "good");
    EXPECT_EQ(de("stimmt nicht").intent, "deny");
    EXPECT_EQ(de("nein").intent, "no");
}

TEST(Nlu, Imei15DigitsLuhnValidOnly) {
    const auto ok = en("490154203237518");
    EXPECT_EQ(ok.intent, "inform");
    EXPECT_TRUE(ok.has("imei"));
    EXPECT_FALSE(ok.has("phone_number"));
    // A 15-digit run failing Luhn is neither an IMEI nor a phone number.
    const auto bad = en("490154203237519");
    EXPECT_TRUE(bad.is_fallback());
}

TEST(Nlu, PhoneNumbers) {
    const auto u = en("+49 151 2345678");
    ASSERT_TRUE(u.has("phone_number"));
    EXPECT_EQ(std::get<PhoneNumber>(u.parameters.at("phone_number")).digits, "00491512345678");
    EXPECT_FALSE(en("12345").has("phone_number"));
}

TEST(Nlu, GermanDates) {
    EXPECT_EQ(format_date(extract_datetime("gestern", Language::de, kReferenceTime)->at), "2024-05-09");
    EXPECT_EQ(format_date(extract_datetime("vor 3 Tagen", Language::de, kReferenceTime)->at), "2024-05-07");
    EXPECT_EQ(format_date(extract_datetime("am 03.05.2024", Language::de, kReferenceTime)->at), "2024-05-03");
    EXPECT_EQ(format_date(extract_datetime("2024-05-01", Language::en, kReferenceTime)->at), "2024-05-01");
    EXPECT_FALSE(extract_datetime("no date here", Language::en, kReferenceTime));
}

TEST(Nlu, NameCapture) {
    const auto u = de("Ich heiße Jana");
    EXPECT_EQ(u.intent, "introduce_name");
    EXPECT_EQ(std::get<TextValue>(u.parameters.at("first_name")).text, "Jana");
}

TEST(Nlu, SlotReference) {
    const auto u = en("change the phone model");
    EXPECT_EQ(u.intent, "correct_answer");
    EXPECT_EQ(std::get<TextValue>(u.parameters.at("slot")).text, "phone_model");
}

TEST(Nlu, ChoiceAndMedia) {
    const auto c = understander(Language::en).understand_choice("galaxy_s9");
    EXPECT_EQ(c.intent, kChoiceIntent);
    EXPECT_EQ(std::get<TextValue>(c.parameters.at(std::string(kChoiceParameter))).text, "galaxy_s9");
    const auto m = understander(Language::en).understand_media(MediaKind::image);
    EXPECT_EQ(m.intent, kMediaIntent);
    EXPECT_EQ(m.media_kind, MediaKind::image);
}

TEST(Nlu, EmojisExtracted) {
    const auto u = en("my screen broke 😡");
    EXPECT_EQ(u.emojis, std::vector<char32_t>{U'😡'});
}

TEST(Nlu, PhoneModelLookup) {
    const std::vector<PhoneModelEntry> catalog{{"iPhone X", "Apple"}, {"iPhone 11", "Apple"},
                                               {"Galaxy S9", "Samsung"}};
    EXPECT_EQ(find_phone_model("it is an iphone x", catalog), "iPhone X");
    EXPECT_FALSE(find_phone_model("an iphone xr", catalog));
    const auto cands = phone_model_candidates("some iPhone", catalog);
    EXPECT_EQ(cands, (std::vector<std::string>{"iPhone X", "iPhone 11"}));
    EXPECT_EQ(phone_model_candidates("Samsung", catalog), std::vector<std::string>{"Galaxy S9"});
}

TEST(NluScoring, ExactMatchIsOne) {
    IntentDefinition d{"x", {"thank you"}, {}};
    const std::vector<std::string> toks{"thank", "you"};
    EXPECT_DOUBLE_EQ(score_intent(toks, d), 1.0);
}

TEST(NluScoring, FractionOfContentTokens) {
    const std::set<std::string> stop{"my", "is"};
    IntentDefinition d{"x", {"my phone is broken"}, {}};
    const std::vector<std::string> toks{"phone", "fell"};
    EXPECT_DOUBLE_EQ(score_intent(toks, d, {&stop, nullptr}), 0.5);
}

TEST(NluScoring, PlaceholderCountsWhenExtracted) {
    IntentDefinition d{"x", {"{damage_type} broke"}, {{"damage_type", "damage_type", false}}};
    const std::vector<std::string> toks{"screen", "broke"};
    const std::set<std::string> present{"damage_type"};
    EXPECT_DOUBLE_EQ(score_intent(toks, d, {nullptr, &present}), 1.0);
    EXPECT_DOUBLE_EQ(score_intent(toks, d, {}), 0.5);
}

TEST(NluScoring, TiesGoToEarliestIntent) {
    Lexicon lex;
    lex.intents = {{"first", {"hello"}, {}}, {"second", {"hello"}, {}}};
    Understander u(lex);
    EXPECT_EQ(u.understand("hello", kReferenceTime).intent, "first");
}

TEST(NluScoring, ThresholdGatesFallback) {
    Lexicon lex;
    lex.intents = {{"x", {"alpha beta gamma"}, {}}};
    lex.fallback_threshold = 0.5;
    Understander u(lex);
    EXPECT_EQ(u.understand("alpha beta", kReferenceTime).intent, "x");
    EXPECT_TRUE(u.understand("alpha", kReferenceTime).is_fallback());
}

TEST(NluScoring, EmptyLexiconRejected) { EXPECT_THROW(Understander(Lexicon{}), ContentPackMissing); }
