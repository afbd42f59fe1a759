// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <csignal>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "support.hpp"

using namespace claimflow;
using namespace claimflow::testing;
using messaging::ActionKind;

namespace {

// Pinned tolerances.
constexpr double kRequiredCompletionRate = 1.0;
constexpr std::size_t kMaxScriptTurns = 60;
constexpr double kMaxSuiteSeconds = 30.0;
constexpr int kImeiSamples = 10000;
constexpr unsigned kSeed = 20240510;

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome pass(std::string d) { return {true, std::move(d)}; }
Outcome fail(std::string d) { return {false, std::move(d)}; }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool starts_with(const std::string& s, std::string_view p) { return s.rfind(p, 0) == 0; }

// --- 1 -------------------------------------------------------------------------

Outcome suite_completion() {
    const auto scripts = harness::load_scripts(kScriptsDir);
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    const auto started = std::chrono::steady_clock::now();
    const auto report = harness::run_suite(scripts, *svc);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    std::size_t max_turns = 0;
    std::string failed;
    for (const auto& s : report.scripts) {
        max_turns = std::max(max_turns, s.turns);
        if (!s.passed()) failed += " " + s.name;
    }
    std::ostringstream d;
    d << scripts.size() << " scripts, completion_rate=" << fmt("%.3f", report.completion_rate)
      << " (need " << kRequiredCompletionRate << "), max_turns=" << max_turns << " (<= " << kMaxScriptTurns
      << "), runtime=" << fmt("%.3f", secs) << "s (< " << kMaxSuiteSeconds << "s)";
    if (!failed.empty()) d << ", failed:" << failed;
    const bool ok = scripts.size() == 14 && report.completion_rate == kRequiredCompletionRate &&
                    max_turns <= kMaxScriptTurns && secs < kMaxSuiteSeconds;
    return {ok, d.str()};
}

// --- 2 -------------------------------------------------------------------------

Outcome broken_display_example() {
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    const auto u = svc->bot(Language::en).understander.understand("the display of my smartphone broke", kReferenceTime);
    const bool damage = u.has("damage_type") &&
                        std::get<nlu::DamageType>(u.parameters.at("damage_type")) == nlu::DamageType::display_damage;
    const std::string d = "intent=" + u.intent + ", damage_type=" +
                          (u.has("damage_type") ? nlu::display(u.parameters.at("damage_type")) : "<none>") +
                          ", phone_type=" + (u.has("phone_type") ? "present" : "absent");
    return {u.intent == "phone_broken" && damage && !u.has("phone_type"), d};
}

// --- 3 -------------------------------------------------------------------------

Outcome lifetimes() {
    constexpr int kTrials = 2000;
    constexpr int kSteps = 50;
    const auto problem = oracles::check_lifetimes(kSeed, kTrials, kSteps);
    const std::string d = std::to_string(kTrials) + " random sequences x " + std::to_string(kSteps) +
                          " steps vs reference simulation";
    return problem.empty() ? pass(d) : fail(d + ": " + problem);
}

// --- 4 -------------------------------------------------------------------------

Outcome tier_precedence() {
    const auto stats = oracles::check_tier_precedence(kSeed, 10000);
    std::ostringstream d;
    d << stats.trials << " random routers vs brute-force matcher (stateless=" << stats.stateless
      << ", state=" << stats.state << ", fallback=" << stats.fallback << ")";
    if (!stats.mismatch.empty()) return fail(d.str() + ": mismatch at " + stats.mismatch);
    return {stats.stateless > 0 && stats.state > 0 && stats.fallback > 0, d.str()};
}

// --- 5 -------------------------------------------------------------------------

Outcome affirmation_consolidation() {
    const std::vector<std::pair<Language, std::vector<std::string>>> words{
        {Language::en, {"yes", "okay", "good", "correct"}},
        {Language::de, {"ja", "okay", "gut", "richtig", "korrekt"}},
    };
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    std::string bad;
    int n = 0;
    for (const auto& [lang, list] : words) {
        for (const auto& w : list) {
            Chat c(*svc, "affirm-" + std::to_string(n++), lang);
            c.say(lang == Language::en ? "report a claim" : "Schaden melden");
            c.say("display");
            const bool confirming = engine::has_state(c.context().active_states, claims::kConfirmingState);
            c.say(w);
            const bool committed = c.context().slots.count("damage_type") > 0 &&
                                   !c.context().pending_confirmation && c.last.callback == "claim.confirm";
            if (!confirming || !committed) bad += " " + w;
        }
    }
    const std::string d = std::to_string(n) + " affirmations (en: yes/okay/good/correct, de: ja/okay/gut/richtig/korrekt)";
    return bad.empty() ? pass(d + " commit the pending slot") : fail(d + ", not committing:" + bad);
}

// --- 6 -------------------------------------------------------------------------

Outcome repair_loop() {
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    std::string bad;
    int n = 0;
    const std::vector<std::tuple<Language, std::string, std::string>> cases{
        {Language::en, "no", "What kind of damage"},         {Language::en, "wrong", "What kind of damage"},
        {Language::en, "nope", "What kind of damage"},       {Language::en, "blorp zzzt", "What kind of damage"},
        {Language::de, "nein", "Welche Art von Schaden"},    {Language::de, "falsch", "Welche Art von Schaden"},
        {Language::de, "stimmt nicht", "Welche Art von Schaden"}, {Language::de, "äh blubb", "Welche Art von Schaden"},
    };
    for (const auto& [lang, input, prompt] : cases) {
        Chat c(*svc, "repair-" + std::to_string(n++), lang);
        c.say(lang == Language::en ? "report a claim" : "Schaden melden");
        c.say("display");
        const auto out = c.say(input);
        const bool ok = !c.context().slots.count("damage_type") && !c.context().pending_confirmation &&
                        texts(out).find(prompt) != std::string::npos;
        if (!ok) bad += " '" + input + "'";
    }
    // Three failed attempts at one question bring the help text.
    Chat c(*svc, "repair-help", Language::en);
    c.say("report a claim");
    c.say("display");
    const auto first = c.say("no");
    c.say("display");
    const auto second = c.say("no");
    c.say("display");
    const auto third = c.say("blorp zzzt");
    const std::string help = "Please tell me whether";
    const bool help_on_third = texts(first).find(help) == std::string::npos &&
                               texts(second).find(help) == std::string::npos &&
                               texts(third).find(help) != std::string::npos &&
                               !c.context().slots.count("damage_type");
    if (!help_on_third) bad += " help-after-3";
    const std::string d = std::to_string(cases.size()) + " negation/fallback inputs re-ask with slot uncommitted; help after 3 failures";
    return bad.empty() ? pass(d) : fail(d + "; failing:" + bad);
}

// --- 7 -------------------------------------------------------------------------

Outcome skip_rules() {
    auto svc = make_service(std::make_shared<store::MemoryStore>());
    std::string bad;
    for (const auto lang : {Language::en, Language::de}) {
        const bool en = lang == Language::en;
        Chat c(*svc, std::string("skip-") + (en ? "en" : "de"), lang);
        c.say(en ? "report a claim" : "Schaden melden");
        const auto refused = c.say(en ? "skip" : "überspringen");
        const bool restated = texts(refused).find(en ? "What kind of damage" : "Welche Art von Schaden") != std::string::npos;
        if (!c.context().skipped_slots.empty() || !restated || c.context().slots.count("damage_type")) {
            bad += std::string(" required-") + (en ? "en" : "de");
        }
        c.choose("display");
        c.say("Pixel 3");
        c.say(en ? "yes" : "ja");
        c.say("0151 2345678");
        c.say(en ? "yes" : "ja");
        c.say("490154203237518");
        c.say(en ? "yes" : "ja");
        c.say(en ? "today" : "heute");
        c.say(en ? "yes" : "ja");
        const auto skipped = c.say(en ? "skip" : "überspringen");
        const bool advanced = c.context().skipped_slots.count("damage_details") == 1 &&
                              texts(skipped).find(en ? "contact you" : "kontaktiert") != std::string::npos;
        if (!advanced) bad += std::string(" optional-") + (en ? "en" : "de");
    }
    const std::string d = "required questions restated, optional question skipped (en, de)";
    return bad.empty() ? pass(d) : fail(d + "; failing:" + bad);
}

// --- 8 -------------------------------------------------------------------------

Outcome formality_switch() {
    auto svc = make_service(std::make_shared<store::MemoryStore>(), Language::de, marker_packs());
    Chat c(*svc, "formality", Language::de);
    std::size_t formal_texts = 0;
    std::size_t informal_texts = 0;
    std::string bad;
    auto check = [&](const std::vector<messaging::ChatAction>& out, std::string_view marker, const std::string& input) {
        for (const auto& a : out) {
            if (!a.text) continue;
            if (!starts_with(*a.text, marker)) bad += " [" + input + "] " + *a.text;
            ++(marker == kFormalMarker ? formal_texts : informal_texts);
        }
    };
    for (const std::string in : {"Hallo", "Schaden melden", "Display", "ja"}) check(c.say(in), kFormalMarker, in);
    const bool was_formal = c.context().profile.formality == Formality::formal;
    check(c.say("Kannst du das bitte schneller machen?"), kInformalMarker, "du");
    for (const std::string in : {"Galaxy S9", "ja", "0151 2345678", "ja", "490154203237518", "ja", "gestern",
                                 "ja", "Es ist runtergefallen", "ja", "Per E-Mail", "ja", "danke"}) {
        check(c.say(in), kInformalMarker, in);
    }
    const bool informal = c.context().profile.formality == Formality::informal;
    std::ostringstream d;
    d << "default formal=" << (was_formal ? "yes" : "no") << ", " << formal_texts << " formal texts before 'du', "
      << informal_texts << " informal texts after";
    if (!bad.empty()) d << "; wrong register:" << bad;
    return {bad.empty() && was_formal && informal && formal_texts > 0 && informal_texts > 10, d.str()};
}

// --- 9 -------------------------------------------------------------------------

Outcome imei_oracle() {
    std::mt19937 rng(kSeed);
    std::uniform_int_distribution<int> digit(0, 9);
    int valid = 0;
    for (int i = 0; i < kImeiSamples; ++i) {
        std::string s;
        for (int k = 0; k < 15; ++k) s += static_cast<char>('0' + digit(rng));
        const bool want = oracles::brute_force_imei(s);
        if (nlu::validate_imei(s).valid() != want) return fail("disagreement on " + s);
        valid += want;
    }
    const bool known = nlu::validate_imei("490154203237518").valid() && !nlu::validate_imei("490154203237519").valid();
    std::ostringstream d;
    d << kImeiSamples << " random 15-digit strings agree with brute-force Luhn (" << valid
      << " valid); 490154203237518 valid, 490154203237519 invalid: " << (known ? "yes" : "no");
    return {known, d.str()};
}

// --- 10 ------------------------------------------------------------------------

struct Run {
    std::vector<std::string> replies;    // wire JSON per step
    std::vector<std::string> contexts;   // saved context JSON per step
};

void play(service::Service& svc, const harness::Script& script, std::size_t from, std::size_t to, Run* run) {
    service::LoopbackAdapter adapter(svc, "resume-user");
    for (std::size_t i = from; i < to; ++i) {
        const auto& step = script.steps[i];
        service::TurnRecord rec;
        std::vector<messaging::ChatAction> out;
        switch (step.kind) {
        case harness::Step::Kind::say: out = adapter.say(step.value, &rec); break;
        case harness::Step::Kind::choose: out = adapter.choose(step.value, &rec); break;
        case harness::Step::Kind::media: out = adapter.send_media(step.value, &rec); break;
        }
        if (run) {
            run->replies.push_back(messaging::actions_to_wire(out).dump());
            run->contexts.push_back(store::to_json(rec.context).dump());
        }
    }
}

std::unique_ptr<service::Service> file_service(const std::filesystem::path& dir) {
    return make_service(std::make_shared<store::FileStore>(dir), Language::en);
}

Outcome crash_resume() {
    const auto script = harness::load_script(kScriptsDir / "01_en_cooperative.json");
    const auto n = script.steps.size();

    Run reference;
    {
        TempDir dir;
        auto svc = file_service(dir.path());
        svc->store().save_context(store::fresh_context("resume-user", script.language));
        play(*svc, script, 0, n, &reference);
    }

    std::string bad;
    for (std::size_t k = 1; k < n; ++k) {
        TempDir dir;
        std::cout.flush();
        const pid_t pid = fork();
        if (pid == 0) {
            auto svc = file_service(dir.path());
            svc->store().save_context(store::fresh_context("resume-user", script.language));
            play(*svc, script, 0, k, nullptr);
            ::raise(SIGKILL); // no destructors, no flushing
            _exit(3);
        }
        int status = 0;
        waitpid(pid, &status, 0);
        if (!WIFSIGNALED(status) || WTERMSIG(status) != SIGKILL) {
            bad += " k=" + std::to_string(k) + "(child not killed)";
            continue;
        }
        auto svc = file_service(dir.path());
        const auto resumed = svc->store().find_context("resume-user");
        if (!resumed || store::to_json(*resumed).dump() != reference.contexts[k - 1]) {
            bad += " k=" + std::to_string(k) + "(context)";
            continue;
        }
        Run rest;
        play(*svc, script, k, n, &rest);
        for (std::size_t i = k; i < n; ++i) {
            if (rest.replies[i - k] != reference.replies[i]) {
                bad += " k=" + std::to_string(k) + "(reply " + std::to_string(i + 1) + ")";
                break;
            }
        }
    }
    const std::string d = "killed (SIGKILL) after each of turns 1.." + std::to_string(n - 1) + " of " +
                          script.name + "; restarted on the same file store";
    return bad.empty() ? pass(d + "; identical remaining transcript") : fail(d + "; diverged at" + bad);
}

// --- 11 ------------------------------------------------------------------------

Outcome determinism() {
    const auto scripts = harness::load_scripts(kScriptsDir);
    auto run = [&](bool parallel) {
        auto svc = make_service(std::make_shared<store::MemoryStore>());
        return harness::to_json(harness::run_suite(scripts, *svc, parallel)).dump(2);
    };
    const auto a = run(false);
    const auto b = run(false);
    const auto c = run(true);
    std::ostringstream d;
    d << "reference_time=" << format_timestamp(kReferenceTime) << ", report " << a.size()
      << " bytes; rerun identical=" << (a == b ? "yes" : "no") << ", parallel identical=" << (a == c ? "yes" : "no");
    return {a == b && a == c, d.str()};
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"suite completion (14 scripts, rate 1.0, <=60 turns, <30 s)", suite_completion},
        {"'the display of my smartphone broke' -> phone_broken/display_damage", broken_display_example},
        {"dialog state lifetimes vs reference simulation", lifetimes},
        {"tier precedence vs brute-force matcher", tier_precedence},
        {"affirmation consolidation commits pending slot", affirmation_consolidation},
        {"confirmation/repair loop", repair_loop},
        {"skip only on optional questions", skip_rules},
        {"formality switch on 'du' (marker-token pack)", formality_switch},
        {"IMEI Luhn oracle", imei_oracle},
        {"crash resume between any two turns", crash_resume},
        {"deterministic suite reports", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        if (!o.pass) ++failures;
        std::printf("%s AC%02zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failures), criteria.size());
    return failures == 0 ? 0 : 1;
}
