#include <gtest/gtest.h>

#include "support.hpp"

using namespace claimflow;
using namespace claimflow::testing;
using nlohmann::json;

namespace {

json happy_en() {
    return json::parse(R"({
      "name": "mini", "persona": "terse", "language": "en",
      "steps": [
        {"say": "report a claim", "expect": {"callback": "claim.start", "states": ["CLAIM_QUESTIONNAIRE"]}},
        {"choose": "display", "expect": {"slots": ["damage_type"]}},
        {"say": "Pixel 3"}, {"say": "yes"},
        {"say": "0151 2345678"}, {"say": "yes"},
        {"say": "490154203237518"}, {"say": "yes"},
        {"say": "today"}, {"say": "yes"},
        {"say": "skip"},
        {"choose": "contact_post", "expect": {"action": "store_claim"}}
      ]})");
}

} // namespace

TEST(Harness, ParsesAndRunsScript) {
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    const auto script = harness::parse_script(happy_en());
    const auto report = harness::run_script(script, *svc);
    EXPECT_TRUE(report.passed()) << (report.failures.empty() ? "" : report.failures[0].diff);
    EXPECT_EQ(report.turns, 12u);
    EXPECT_EQ(report.claim_id, "C-000001");
}

TEST(Harness, ExpectationMismatchIsReported) {
    auto doc = happy_en();
    doc["steps"][0]["expect"]["callback"] = "claim.cancel";
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    const auto report = harness::run_script(harness::parse_script(doc), *svc);
    EXPECT_FALSE(report.passed());
    ASSERT_EQ(report.failures.size(), 1u);
    EXPECT_EQ(report.failures[0].step, 1u);
    EXPECT_NE(report.failures[0].diff.find("claim.cancel"), std::string::npos);
}

TEST(Harness, IncompleteScriptFails) {
    auto doc = happy_en();
    doc["steps"].erase(doc["steps"].size() - 1);
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    const auto report = harness::run_script(harness::parse_script(doc), *svc);
    EXPECT_FALSE(report.completed);
    EXPECT_FALSE(report.passed());
}

TEST(Harness, SchemaErrors) {
    auto too_long = happy_en();
    for (int i = 0; i < 60; ++i) too_long["steps"].push_back({{"say", "hi"}});
    EXPECT_THROW(harness::parse_script(too_long), ScriptError);
    auto two_kinds = happy_en();
    two_kinds["steps"][0]["choose"] = "x";
    EXPECT_THROW(harness::parse_script(two_kinds), ScriptError);
    auto bad_persona = happy_en();
    bad_persona["persona"] = "grumpy";
    EXPECT_THROW(harness::parse_script(bad_persona), ScriptError);
    auto bad_expect = happy_en();
    bad_expect["steps"][0]["expect"]["vibes"] = true;
    EXPECT_THROW(harness::parse_script(bad_expect), ScriptError);
    EXPECT_THROW(harness::load_scripts("/nonexistent/scripts"), ScriptError);
}

TEST(Harness, UnknownSlotInExpectationRejected) {
    auto doc = happy_en();
    doc["steps"][1]["expect"]["slots"] = json::array({"shoe_size"});
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    EXPECT_THROW(harness::check_script(harness::parse_script(doc), *svc), ScriptError);
}

TEST(Harness, ShippedSuitePassesSequentialAndParallel) {
    const auto scripts = harness::load_scripts(kScriptsDir);
    ASSERT_EQ(scripts.size(), 14u);
    auto a = make_service(std::make_shared<store::MemoryStore>());
    auto b = make_service(std::make_shared<store::MemoryStore>());
    const auto seq = harness::run_suite(scripts, *a, false);
    const auto par = harness::run_suite(scripts, *b, true);
    EXPECT_DOUBLE_EQ(seq.completion_rate, 1.0);
    EXPECT_EQ(harness::to_json(seq), harness::to_json(par));
    const auto table = harness::to_table(seq);
    EXPECT_NE(table.find("en_cooperative"), std::string::npos);
}

TEST(Harness, EmptySuiteRejected) {
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    EXPECT_THROW(harness::run_suite({}, *svc), ScriptError);
}
