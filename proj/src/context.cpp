#include "claimflow/context.hpp"

#include <algorithm>
#include <stdexcept>

namespace claimflow::store {

using nlohmann::json;

UserContext fresh_context(std::string user_id, Language language) {
    UserContext ctx;
    ctx.user_id = std::move(user_id);
    ctx.profile.language = language;
    return ctx;
}

void check_invariants(const UserContext& context) {
    if (context.user_id.empty()) throw std::logic_error("context without user id");
    std::set<std::string> names;
    for (const auto& s : context.active_states) {
        if (!names.insert(s.name).second) {
            throw std::logic_error("duplicate active state '" + s.name + "'");
        }
        if (s.lifetime && *s.lifetime < 1) {
            throw std::logic_error("expired state '" + s.name + "' still active");
        }
    }
}

namespace {

json profile_to_json(const responder::UserProfile& p) {
    json j{{"formality", std::string(to_string(p.formality))},
           {"mood", std::string(to_string(p.mood))},
           {"language", std::string(to_string(p.language))}};
    j["first_name"] = p.first_name ? json(*p.first_name) : json(nullptr);
    return j;
}

template <typename T>
T parse_enum(const json& j, const char* field, std::optional<T> (*parse)(std::string_view)) {
    const auto raw = j.at(field).get<std::string>();
    auto v = parse(raw);
    if (!v) throw Error(std::string("invalid ") + field + " '" + raw + "'");
    return *v;
}

responder::UserProfile profile_from_json(const json& j) {
    responder::UserProfile p;
    p.formality = parse_enum<Formality>(j, "formality", formality_from_string);
    p.mood = parse_enum<Sentiment>(j, "mood", sentiment_from_string);
    p.language = parse_enum<Language>(j, "language", language_from_string);
    if (j.contains("first_name") && !j["first_name"].is_null()) {
        p.first_name = j["first_name"].get<std::string>();
    }
    return p;
}

} // namespace

json to_json(const UserContext& ctx) {
    json states = json::array();
    for (const auto& s : ctx.active_states) {
        json js{{"name", s.name}, {"priority", s.priority}, {"created_turn", s.created_turn}};
        js["lifetime"] = s.lifetime ? json(*s.lifetime) : json(nullptr);
        states.push_back(std::move(js));
    }
    json slots = json::object();
    for (const auto& [name, value] : ctx.slots) slots[name] = nlu::to_json(value);
    json transcript = json::array();
    for (const auto& e : ctx.transcript) {
        transcript.push_back({{"direction", e.direction == Direction::in ? "in" : "out"},
                              {"summary", e.summary},
                              {"turn", e.turn}});
    }
    json j{{"schema_version", kSchemaVersion},
           {"user_id", ctx.user_id},
           {"profile", profile_to_json(ctx.profile)},
           {"active_states", std::move(states)},
           {"slots", std::move(slots)},
           {"skipped_slots", ctx.skipped_slots},
           {"turn_counter", ctx.turn_counter},
           {"consecutive_fallbacks", ctx.consecutive_fallbacks},
           {"question_failures", ctx.question_failures},
           {"transcript", std::move(transcript)}};
    if (ctx.pending_confirmation) {
        j["pending_confirmation"] = {{"slot", ctx.pending_confirmation->slot},
                                     {"value", nlu::to_json(ctx.pending_confirmation->value)}};
    } else {
        j["pending_confirmation"] = nullptr;
    }
    j["last_claim_id"] = ctx.last_claim_id ? json(*ctx.last_claim_id) : json(nullptr);
    return j;
}

UserContext context_from_json(const json& j) {
    try {
        if (!j.is_object()) throw Error("context document must be an object");
        const int version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion) {
            throw Error("unsupported schema_version " + std::to_string(version));
        }
        UserContext ctx;
        ctx.user_id = j.at("user_id").get<std::string>();
        ctx.profile = profile_from_json(j.at("profile"));
        for (const auto& js : j.at("active_states")) {
            engine::DialogState s;
            s.name = js.at("name").get<std::string>();
            s.priority = js.at("priority").get<int>();
            s.created_turn = js.at("created_turn").get<std::uint64_t>();
            if (!js.at("lifetime").is_null()) s.lifetime = js["lifetime"].get<int>();
            ctx.active_states.push_back(std::move(s));
        }
        std::sort(ctx.active_states.begin(), ctx.active_states.end(), engine::consulted_before);
        for (const auto& [name, value] : j.at("slots").items()) {
            ctx.slots.emplace(name, nlu::entity_from_json(value));
        }
        ctx.skipped_slots = j.at("skipped_slots").get<std::set<std::string>>();
        if (!j.at("pending_confirmation").is_null()) {
            const auto& p = j["pending_confirmation"];
            ctx.pending_confirmation =
                PendingConfirmation{p.at("slot").get<std::string>(), nlu::entity_from_json(p.at("value"))};
        }
        ctx.turn_counter = j.at("turn_counter").get<std::uint64_t>();
        ctx.consecutive_fallbacks = j.at("consecutive_fallbacks").get<std::uint32_t>();
        ctx.question_failures = j.at("question_failures").get<std::uint32_t>();
        if (!j.at("last_claim_id").is_null()) ctx.last_claim_id = j["last_claim_id"].get<std::string>();
        for (const auto& e : j.at("transcript")) {
            const auto dir = e.at("direction").get<std::string>();
            if (dir != "in" && dir != "out") throw Error("invalid transcript direction '" + dir + "'");
            ctx.transcript.push_back({dir == "in" ? Direction::in : Direction::out,
                                      e.at("summary").get<std::string>(),
                                      e.at("turn").get<std::uint64_t>()});
        }
        check_invariants(ctx);
        return ctx;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed context document: ") + e.what());
    } catch (const std::logic_error& e) {
        throw Error(std::string("context document violates invariants: ") + e.what());
    }
}

json summarize(const UserContext& ctx) {
    json states = json::array();
    for (const auto& s : ctx.active_states) {
        json js{{"name", s.name}, {"priority", s.priority}};
        js["lifetime"] = s.lifetime ? json(*s.lifetime) : json(nullptr);
        states.push_back(std::move(js));
    }
    json slots = json::object();
    for (const auto& [name, value] : ctx.slots) slots[name] = nlu::display(value);
    json j{{"user_id", ctx.user_id},
           {"turn_counter", ctx.turn_counter},
           {"profile", profile_to_json(ctx.profile)},
           {"active_states", std::move(states)},
           {"slots", std::move(slots)},
           {"skipped_slots", ctx.skipped_slots},
           {"transcript_length", ctx.transcript.size()}};
    if (ctx.pending_confirmation) {
        j["pending_confirmation"] = {{"slot", ctx.pending_confirmation->slot},
                                     {"value", nlu::display(ctx.pending_confirmation->value)}};
    } else {
        j["pending_confirmation"] = nullptr;
    }
    j["last_claim_id"] = ctx.last_claim_id ? json(*ctx.last_claim_id) : json(nullptr);
    return j;
}

} // namespace claimflow::store
