#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "claimflow/service.hpp"

namespace claimflow::harness {

inline constexpr std::size_t kMaxTurns = 60;

enum class Persona { cooperative, terse, off_topic, impatient };
std::string_view to_string(Persona persona);
std::optional<Persona> persona_from_string(std::string_view s);

/// Checks applied to the reply and the saved context after one step.
struct Expectation {
    std::optional<messaging::ActionKind> action;   // some reply action has this kind
    std::vector<std::string> states;               // active afterwards
    std::vector<std::string> not_states;           // inactive afterwards
    std::vector<std::string> slots;                // filled afterwards
    std::vector<std::string> not_slots;            // unfilled afterwards
    std::optional<std::string> text_contains;      // substring of some reply text
    std::optional<std::string> callback;           // callback of the fired rule
};

struct Step {
    enum class Kind { say, choose, media };
    Kind kind = Kind::say;
    std::string value;
    std::optional<Expectation> expect;
};

struct Script {
    std::string name;
    Persona persona = Persona::cooperative;
    Language language = Language::en;
    std::vector<Step> steps;
};

/// Throws ScriptError on schema violations, empty step lists, more than
/// kMaxTurns steps, or expectations naming unknown slots or states.
Script parse_script(const nlohmann::json& doc, const std::string& source = "<memory>");
Script load_script(const std::filesystem::path& file);
/// A single file or every *.json in a directory, sorted by file name.
std::vector<Script> load_scripts(const std::filesystem::path& path);
/// Cross-checks expectation slot and state names against the service's packs.
void check_script(const Script& script, const service::Service& service);

struct StepFailure {
    std::size_t step = 0; // 1-based
    std::string diff;
};

struct TranscriptReport {
    std::string name;
    Persona persona = Persona::cooperative;
    Language language = Language::en;
    bool completed = false;          // a claim was stored
    std::size_t turns = 0;           // turns to completion, or all turns
    std::size_t repairs = 0;         // repair moves observed
    std::optional<std::string> claim_id;
    double duration_ms = 0.0;
    std::vector<StepFailure> failures;

    bool passed() const { return completed && failures.empty() && turns <= kMaxTurns; }
};

/// Runs one script against the service through the loopback adapter as user
/// "harness:<name>", starting from a fresh context in the script's language.
TranscriptReport run_script(const Script& script, service::Service& service);

struct SuiteReport {
    std::vector<TranscriptReport> scripts;
    double completion_rate = 0.0;
    double mean_turns = 0.0;
    double mean_duration_ms = 0.0;
    double total_duration_ms = 0.0;

    bool all_passed() const;
};

/// Throws ScriptError for an empty suite. With `parallel`, scripts run on
/// separate threads (distinct users); report order follows input order.
SuiteReport run_suite(const std::vector<Script>& scripts, service::Service& service, bool parallel = false);

/// Machine-readable report. Wall-clock figures are left out so reruns with a
/// fixed reference time are byte-identical.
nlohmann::json to_json(const SuiteReport& report);
/// Human-readable table including durations.
std::string to_table(const SuiteReport& report);

} // namespace claimflow::harness
