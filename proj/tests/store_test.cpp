#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <thread>

#include "support.hpp"

using namespace claimflow;
using namespace claimflow::testing;
namespace fs = std::filesystem;

namespace {

store::UserContext sample_context(const std::string& user) {
    auto ctx = store::fresh_context(user, Language::de);
    ctx.profile.first_name = "Jana";
    ctx.profile.formality = Formality::informal;
    ctx.profile.mood = Mood::negative;
    engine::push_state(ctx.active_states, {"CLAIM_QUESTIONNAIRE", std::nullopt, -10, 1});
    engine::push_state(ctx.active_states, {"USER_CONFIRMING_ANSWER", 3, 0, 4});
    ctx.slots.emplace("imei", *nlu::Imei::parse("490154203237518"));
    ctx.slots.emplace("damage_time", nlu::DateTimeValue{kReferenceTime, nlu::Granularity::day});
    ctx.skipped_slots.insert("damage_details");
    ctx.pending_confirmation = store::PendingConfirmation{"phone_model", nlu::PhoneModel{"P20"}};
    ctx.turn_counter = 4;
    ctx.consecutive_fallbacks = 1;
    ctx.question_failures = 2;
    ctx.last_claim_id = "C-000003";
    ctx.transcript.push_back({store::Direction::in, "text: hallo", 1});
    ctx.transcript.push_back({store::Direction::out, "send_text: Hallo!", 1});
    return ctx;
}

claims::ClaimRecord sample_record(const std::string& user) {
    claims::ClaimRecord r;
    r.user_id = user;
    r.slots.emplace("imei", *nlu::Imei::parse("490154203237518"));
    r.completed_at = kReferenceTime;
    r.transcript_ref = user + "#9";
    return r;
}

} // namespace

TEST(Context, JsonRoundTrip) {
    const auto ctx = sample_context("u");
    EXPECT_EQ(store::context_from_json(store::to_json(ctx)), ctx);
}

TEST(Context, RejectsUnknownSchemaVersion) {
    auto j = store::to_json(sample_context("u"));
    j["schema_version"] = 99;
    EXPECT_THROW(store::context_from_json(j), Error);
}

TEST(Context, InvariantsCatchDuplicatesAndExpiredStates) {
    auto ctx = sample_context("u");
    ctx.active_states.push_back(ctx.active_states.front());
    EXPECT_THROW(store::check_invariants(ctx), std::logic_error);
    auto expired = sample_context("u");
    expired.active_states.push_back({"CONFIRMING_CANCEL", 0, 5, 2});
    EXPECT_THROW(store::check_invariants(expired), std::logic_error);
    auto anon = sample_context("");
    EXPECT_THROW(store::check_invariants(anon), std::logic_error);
}

TEST(Store, ClaimIdFormatAndEscaping) {
    EXPECT_EQ(store::format_claim_id(1), "C-000001");
    EXPECT_EQ(store::format_claim_id(123456), "C-123456");
    EXPECT_EQ(store::escape_user_id("harness:en_a-b"), "harness%3Aen_a-b");
    EXPECT_EQ(store::escape_user_id("../x"), "%2E%2E%2Fx");
    EXPECT_NE(store::escape_user_id("a:b"), store::escape_user_id("a%3Ab"));
}

TEST(MemoryStore, RoundTripAndFreshDefault) {
    store::MemoryStore s;
    const auto fresh = s.load_context("new", Language::en);
    EXPECT_EQ(fresh.profile.formality, Formality::formal);
    EXPECT_EQ(fresh.profile.language, Language::en);
    EXPECT_FALSE(s.find_context("new"));
    s.save_context(sample_context("u"));
    EXPECT_EQ(s.load_context("u", Language::en), sample_context("u"));
}

TEST(MemoryStore, FaultInjection) {
    store::MemoryStore s;
    s.set_unavailable(true);
    EXPECT_THROW(s.save_context(sample_context("u")), StorageUnavailable);
    EXPECT_THROW(s.persist_claim(sample_record("u")), StorageUnavailable);
}

TEST(MemoryStore, DuplicateStateSaveIsDefect) {
    store::MemoryStore s;
    auto ctx = sample_context("u");
    ctx.active_states.push_back(ctx.active_states.front());
    EXPECT_THROW(s.save_context(ctx), std::logic_error);
}

TEST(MemoryStore, UnvalidatedImeiRecordIsDefect) {
    store::MemoryStore s;
    auto r = sample_record("u");
    r.slots["imei"] = nlu::TextValue{"490154203237519"};
    EXPECT_THROW(s.persist_claim(r), std::logic_error);
    EXPECT_TRUE(s.claims().empty());
}

TEST(MemoryStore, ConcurrentClaimsGetUniqueIds) {
    store::MemoryStore s;
    std::vector<std::thread> threads;
    std::mutex m;
    std::set<std::string> ids;
    for (int t = 0; t < 8; ++t) {
        threads.emplace_back([&, t] {
            for (int i = 0; i < 25; ++i) {
                auto id = s.persist_claim(sample_record("u" + std::to_string(t)));
                std::lock_guard lock(m);
                ids.insert(id);
            }
        });
    }
    for (auto& th : threads) th.join();
    EXPECT_EQ(ids.size(), 200u);
    EXPECT_EQ(*ids.rbegin(), "C-000200");
}

TEST(FileStore, LayoutAndRoundTrip) {
    TempDir dir;
    store::FileStore s(dir.path());
    s.save_context(sample_context("web:alice"));
    EXPECT_TRUE(fs::exists(dir.path() / "contexts" / "web%3Aalice.json"));
    EXPECT_EQ(s.context_path("web:alice"), dir.path() / "contexts" / "web%3Aalice.json");
    EXPECT_EQ(s.find_context("web:alice"), sample_context("web:alice"));
    for (const auto& e : fs::directory_iterator(dir.path() / "contexts")) {
        EXPECT_EQ(e.path().extension(), ".json") << "leftover " << e.path();
    }
}

TEST(FileStore, ClaimLogAppendsAndNumbersAcrossReopen) {
    TempDir dir;
    {
        store::FileStore s(dir.path());
        EXPECT_EQ(s.persist_claim(sample_record("a")), "C-000001");
        EXPECT_EQ(s.persist_claim(sample_record("b")), "C-000002");
    }
    store::FileStore s(dir.path());
    EXPECT_EQ(s.persist_claim(sample_record("c")), "C-000003");
    const auto all = s.claims();
    ASSERT_EQ(all.size(), 3u);
    EXPECT_EQ(all[2].user_id, "c");
    std::ifstream log(dir.path() / "claims" / "log.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(log, line)) ++lines;
    EXPECT_EQ(lines, 3);
}

TEST(FileStore, CorruptClaimLogRefusesToOpen) {
    TempDir dir;
    { store::FileStore s(dir.path()); }
    std::ofstream(dir.path() / "claims" / "log.jsonl") << "{not json\n";
    EXPECT_THROW(store::FileStore s(dir.path()), StorageUnavailable);
}

TEST(FileStore, CorruptContextIsStorageFault) {
    TempDir dir;
    store::FileStore s(dir.path());
    std::ofstream(s.context_path("bob")) << "{\"schema_version\": 1";
    EXPECT_THROW(s.find_context("bob"), StorageUnavailable);
}

TEST(FileStore, UnusableRootRejected) {
    TempDir dir;
    std::ofstream(dir.path() / "file") << "x";
    EXPECT_THROW(store::FileStore s(dir.path() / "file"), StorageUnavailable);
}
