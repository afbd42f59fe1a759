#include <gtest/gtest.h>

#include "claimflow/responder.hpp"

using namespace claimflow;
using namespace claimflow::responder;

namespace {

TemplateSet sample() {
    TemplateSet set(Language::de, {"greet"});
    set.add({"greet", Language::de, {{"first_name", false}},
             {{"Guten Tag {first_name}!", "Willkommen {first_name}!"}, {"Hallo {first_name}!"}}, std::nullopt});
    set.add({"confirm", Language::de, {{"value", true}},
             {{"Ist {value} korrekt?"}, {"Stimmt {value}?"}},
             TemplateVariants{{"Keine Sorge: ist {value} korrekt?"}, {"Keine Sorge: stimmt {value}?"}}});
    return set;
}

UserProfile profile(Formality f = Formality::formal) {
    UserProfile p;
    p.formality = f;
    return p;
}

} // namespace

TEST(Responder, PicksVariantByFormality) {
    Responder r(sample());
    EXPECT_EQ(r.render("greet", profile(), {}, 0), "Guten Tag!");
    EXPECT_EQ(r.render("greet", profile(Formality::informal), {}, 0), "Hallo!");
}

TEST(Responder, RotatesAlternativesByTurn) {
    Responder r(sample());
    EXPECT_EQ(r.render("greet", profile(), {}, 1), "Willkommen!");
    EXPECT_EQ(r.render("greet", profile(), {}, 2), "Guten Tag!");
}

TEST(Responder, FirstNameFromProfile) {
    Responder r(sample());
    auto p = profile(Formality::informal);
    p.first_name = "Max";
    EXPECT_EQ(r.render("greet", p, {}, 0), "Hallo Max!");
}

TEST(Responder, RequiredParamAndUnknownKey) {
    Responder r(sample());
    EXPECT_THROW(r.render("confirm", profile(), {}, 0), MissingRequiredParam);
    EXPECT_THROW(r.render("nope", profile(), {}, 0), UnknownTemplateKey);
    EXPECT_EQ(r.render("confirm", profile(), {{"value", "{x}"}}, 0), "Ist (x) korrekt?");
}

TEST(Responder, NegativeMoodOverride) {
    Responder r(sample());
    auto p = profile();
    p.mood = Mood::negative;
    EXPECT_EQ(r.render("confirm", p, {{"value", "A"}}, 0), "Keine Sorge: ist A korrekt?");
}

TEST(Responder, RealizeAddsTyping) {
    Responder r(sample());
    const auto a = r.realize("greet", profile(), {}, 0);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].kind, messaging::ActionKind::typing_on);
    EXPECT_EQ(r.realize("greet", profile(), {}, 0, false).size(), 1u);
}

TEST(TemplateValidation, ReportsMissingVariantAndNameMisuse) {
    TemplateSet set(Language::de, {"greet"});
    set.add({"a", Language::de, {}, {{"x"}, {}}, std::nullopt});
    set.add({"b", Language::de, {{"first_name", false}}, {{"Hi {first_name}"}, {"Hi {first_name}"}}, std::nullopt});
    set.add({"c", Language::de, {}, {{"{undeclared}"}, {"y"}}, std::nullopt});
    const auto problems = set.validate();
    auto mentions = [&](const std::string& s) {
        for (const auto& p : problems) {
            if (p.find(s) != std::string::npos) return true;
        }
        return false;
    };
    EXPECT_TRUE(mentions("'a' lacks an informal variant"));
    EXPECT_TRUE(mentions("'b' may not address the user by first name"));
    EXPECT_TRUE(mentions("undeclared placeholder {undeclared}"));
    EXPECT_TRUE(sample().validate().empty());
}

TEST(Formality, DetectsDuAndSie) {
    EXPECT_EQ(detect_formality("Kannst du mir helfen?", Language::de), FormalityCue::informal);
    EXPECT_EQ(detect_formality("Ist das dein Ernst", Language::de), FormalityCue::informal);
    EXPECT_EQ(detect_formality("Können Sie mir helfen?", Language::de), FormalityCue::formal);
    // Sentence-initial "Sie" is ambiguous ("she"/"they").
    EXPECT_EQ(detect_formality("Sie ist kaputt.", Language::de), FormalityCue::unknown);
    EXPECT_EQ(detect_formality("Dirk hat es", Language::de), FormalityCue::unknown);
    EXPECT_EQ(detect_formality("can you help", Language::en), FormalityCue::unknown);
}
