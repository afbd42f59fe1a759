#include "claimflow/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace claimflow::harness {

using nlohmann::json;

std::string_view to_string(Persona persona) {
    switch (persona) {
    case Persona::cooperative: return "cooperative";
    case Persona::terse: return "terse";
    case Persona::off_topic: return "off_topic";
    case Persona::impatient: return "impatient";
    }
    return "cooperative";
}

std::optional<Persona> persona_from_string(std::string_view s) {
    for (auto p : {Persona::cooperative, Persona::terse, Persona::off_topic, Persona::impatient}) {
        if (to_string(p) == s) return p;
    }
    return std::nullopt;
}

namespace {

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ScriptError(where + ": expected a list of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw ScriptError(where + ": expected a list of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

Expectation parse_expectation(const json& j, const std::string& where) {
    if (!j.is_object()) throw ScriptError(where + ": expect must be a mapping");
    static const std::set<std::string> fields{"action", "states", "not_states", "slots",
                                              "not_slots", "text_contains", "callback"};
    for (const auto& [k, _] : j.items()) {
        if (!fields.count(k)) throw ScriptError(where + ": unknown expectation '" + k + "'");
    }
    Expectation e;
    if (j.contains("action")) {
        e.action = messaging::action_kind_from_string(j.at("action").get<std::string>());
        if (!e.action) throw ScriptError(where + ": unknown action kind");
    }
    if (j.contains("states")) e.states = string_list(j.at("states"), where + ".states");
    if (j.contains("not_states")) e.not_states = string_list(j.at("not_states"), where + ".not_states");
    if (j.contains("slots")) e.slots = string_list(j.at("slots"), where + ".slots");
    if (j.contains("not_slots")) e.not_slots = string_list(j.at("not_slots"), where + ".not_slots");
    if (j.contains("text_contains")) e.text_contains = j.at("text_contains").get<std::string>();
    if (j.contains("callback")) e.callback = j.at("callback").get<std::string>();
    return e;
}

} // namespace

Script parse_script(const json& doc, const std::string& source) {
    try {
        if (!doc.is_object()) throw ScriptError(source + ": script must be a mapping");
        Script s;
        s.name = doc.at("name").get<std::string>();
        if (s.name.empty()) throw ScriptError(source + ": name must be non-empty");
        const auto persona = doc.at("persona").get<std::string>();
        auto p = persona_from_string(persona);
        if (!p) throw ScriptError(source + ": unknown persona '" + persona + "'");
        s.persona = *p;
        const auto lang = doc.at("language").get<std::string>();
        auto l = language_from_string(lang);
        if (!l) throw ScriptError(source + ": unknown language '" + lang + "'");
        s.language = *l;
        std::size_t i = 0;
        for (const auto& js : doc.at("steps")) {
            const std::string where = source + ": steps[" + std::to_string(i++) + "]";
            Step step;
            int kinds = 0;
            if (js.contains("say")) {
                step.kind = Step::Kind::say;
                step.value = js.at("say").get<std::string>();
                ++kinds;
            }
            if (js.contains("choose")) {
                step.kind = Step::Kind::choose;
                step.value = js.at("choose").get<std::string>();
                ++kinds;
            }
            if (js.contains("media")) {
                step.kind = Step::Kind::media;
                step.value = js.at("media").get<std::string>();
                ++kinds;
            }
            if (kinds != 1) throw ScriptError(where + ": exactly one of say, choose, media is required");
            if (step.value.empty()) throw ScriptError(where + ": step input must be non-empty");
            if (js.contains("expect")) step.expect = parse_expectation(js.at("expect"), where + ".expect");
            s.steps.push_back(std::move(step));
        }
        if (s.steps.empty()) throw ScriptError(source + ": steps must be non-empty");
        if (s.steps.size() > kMaxTurns) {
            throw ScriptError(source + ": more than " + std::to_string(kMaxTurns) + " steps");
        }
        return s;
    } catch (const json::exception& e) {
        throw ScriptError(source + ": " + e.what());
    }
}

Script load_script(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScriptError("cannot read script '" + file.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ScriptError(file.string() + ": " + e.what());
    }
    return parse_script(doc, file.string());
}

std::vector<Script> load_scripts(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw ScriptError("script path '" + path.string() + "' does not exist");
    if (!fs::is_directory(path)) return {load_script(path)};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Script> scripts;
    for (const auto& f : files) scripts.push_back(load_script(f));
    return scripts;
}

void check_script(const Script& script, const service::Service& service) {
    const auto& pack = service.bot(script.language).pack;
    for (std::size_t i = 0; i < script.steps.size(); ++i) {
        const auto& e = script.steps[i].expect;
        if (!e) continue;
        const std::string where = script.name + ": step " + std::to_string(i + 1);
        for (const auto* list : {&e->states, &e->not_states}) {
            for (const auto& s : *list) {
                if (!pack.router.states.count(s)) throw ScriptError(where + ": unknown state '" + s + "'");
            }
        }
        for (const auto* list : {&e->slots, &e->not_slots}) {
            for (const auto& s : *list) {
                if (!pack.questionnaire.by_slot(s)) throw ScriptError(where + ": unknown slot '" + s + "'");
            }
        }
    }
}

namespace {

std::string kinds_of(const std::vector<messaging::ChatAction>& actions) {
    std::string out = "[";
    for (std::size_t i = 0; i < actions.size(); ++i) {
        if (i) out += ", ";
        out += messaging::to_string(actions[i].kind);
    }
    return out + "]";
}

std::vector<std::string> check(const Expectation& e, const std::vector<messaging::ChatAction>& actions,
                               const service::TurnRecord& record) {
    std::vector<std::string> diffs;
    const auto& ctx = record.context;
    if (e.action && std::none_of(actions.begin(), actions.end(),
                                 [&](const auto& a) { return a.kind == *e.action; })) {
        diffs.push_back("expected action " + std::string(messaging::to_string(*e.action)) + ", got " +
                        kinds_of(actions));
    }
    for (const auto& s : e.states) {
        if (!engine::has_state(ctx.active_states, s)) diffs.push_back("expected state " + s + " to be active");
    }
    for (const auto& s : e.not_states) {
        if (engine::has_state(ctx.active_states, s)) diffs.push_back("expected state " + s + " to be inactive");
    }
    for (const auto& s : e.slots) {
        if (!ctx.slots.count(s)) diffs.push_back("expected slot " + s + " to be filled");
    }
    for (const auto& s : e.not_slots) {
        if (ctx.slots.count(s)) diffs.push_back("expected slot " + s + " to be empty");
    }
    if (e.text_contains) {
        const bool found = std::any_of(actions.begin(), actions.end(), [&](const auto& a) {
            return a.text && a.text->find(*e.text_contains) != std::string::npos;
        });
        if (!found) diffs.push_back("expected a reply containing \"" + *e.text_contains + "\"");
    }
    if (e.callback && record.callback != *e.callback) {
        diffs.push_back("expected callback " + *e.callback + ", fired " + record.callback);
    }
    return diffs;
}

} // namespace

TranscriptReport run_script(const Script& script, service::Service& service) {
    TranscriptReport report;
    report.name = script.name;
    report.persona = script.persona;
    report.language = script.language;

    const auto started = std::chrono::steady_clock::now();
    const std::string user_id = "harness:" + script.name;
    service.store().save_context(store::fresh_context(user_id, script.language));
    service::LoopbackAdapter adapter(service, user_id);

    std::size_t turn = 0;
    for (const auto& step : script.steps) {
        ++turn;
        service::TurnRecord record;
        std::vector<messaging::ChatAction> actions;
        switch (step.kind) {
        case Step::Kind::say: actions = adapter.say(step.value, &record); break;
        case Step::Kind::choose: actions = adapter.choose(step.value, &record); break;
        case Step::Kind::media: actions = adapter.send_media(step.value, &record); break;
        }
        if (record.callback.empty()) {
            report.failures.push_back({turn, "the service answered with an apology"});
            continue;
        }
        if (record.callback == "repair") ++report.repairs;
        if (step.expect) {
            for (auto& d : check(*step.expect, actions, record)) report.failures.push_back({turn, std::move(d)});
        }
        for (const auto& a : actions) {
            if (a.kind == messaging::ActionKind::store_claim && !report.completed) {
                report.completed = true;
                report.turns = turn;
                report.claim_id = a.claim_id;
            }
        }
    }
    if (!report.completed) report.turns = turn;
    report.duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    return report;
}

bool SuiteReport::all_passed() const {
    return !scripts.empty() &&
           std::all_of(scripts.begin(), scripts.end(), [](const auto& s) { return s.passed(); });
}

SuiteReport run_suite(const std::vector<Script>& scripts, service::Service& service, bool parallel) {
    if (scripts.empty()) throw ScriptError("a suite needs at least one script");
    for (const auto& s : scripts) check_script(s, service);
    SuiteReport report;
    report.scripts.resize(scripts.size());
    const auto started = std::chrono::steady_clock::now();
    if (parallel) {
        std::vector<std::thread> threads;
        for (std::size_t i = 0; i < scripts.size(); ++i) {
            threads.emplace_back([&, i] { report.scripts[i] = run_script(scripts[i], service); });
        }
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < scripts.size(); ++i) report.scripts[i] = run_script(scripts[i], service);
    }
    report.total_duration_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
    std::size_t passed = 0;
    double turns = 0;
    double duration = 0;
    for (const auto& s : report.scripts) {
        if (s.passed()) ++passed;
        turns += static_cast<double>(s.turns);
        duration += s.duration_ms;
    }
    const auto n = static_cast<double>(report.scripts.size());
    report.completion_rate = static_cast<double>(passed) / n;
    report.mean_turns = turns / n;
    report.mean_duration_ms = duration / n;
    return report;
}

json to_json(const SuiteReport& report) {
    json scripts = json::array();
    for (const auto& s : report.scripts) {
        json failures = json::array();
        for (const auto& f : s.failures) failures.push_back({{"step", f.step}, {"diff", f.diff}});
        scripts.push_back({{"name", s.name},
                           {"persona", std::string(to_string(s.persona))},
                           {"language", std::string(to_string(s.language))},
                           {"completed", s.completed},
                           {"passed", s.passed()},
                           {"turns", s.turns},
                           {"repairs", s.repairs},
                           {"failures", std::move(failures)}});
    }
    return json{{"scripts", std::move(scripts)},
                {"script_count", report.scripts.size()},
                {"completion_rate", report.completion_rate},
                {"mean_turns", report.mean_turns}};
}

std::string to_table(const SuiteReport& report) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-28s %-12s %-4s %-9s %6s %8s %10s\n", "script", "persona", "lang",
                  "result", "turns", "repairs", "ms");
    out << line;
    for (const auto& s : report.scripts) {
        std::snprintf(line, sizeof line, "%-28s %-12s %-4s %-9s %6zu %8zu %10.2f\n", s.name.c_str(),
                      std::string(to_string(s.persona)).c_str(), std::string(to_string(s.language)).c_str(),
                      s.passed() ? "completed" : "FAILED", s.turns, s.repairs, s.duration_ms);
        out << line;
        for (const auto& f : s.failures) out << "    step " << f.step << ": " << f.diff << '\n';
    }
    std::snprintf(line, sizeof line,
                  "completion rate %.3f (%zu scripts), mean turns %.2f, mean duration %.2f ms, total %.2f ms\n",
                  report.completion_rate, report.scripts.size(), report.mean_turns, report.mean_duration_ms,
                  report.total_duration_ms);
    out << line;
    return out.str();
}

} // namespace claimflow::harness
