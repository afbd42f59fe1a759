#include "claimflow/claims.hpp"

#include <algorithm>
#include <stdexcept>

#include "claimflow/text.hpp"

namespace claimflow::claims {

using engine::CallbackArgs;
using engine::Effects;
using engine::Reply;
using nlohmann::json;
using store::UserContext;

const ClarificationChoice* QuestionSpec::choice(std::string_view choice_id) const {
    for (const auto& c : clarification_choices) {
        if (c.choice_id == choice_id) return &c;
    }
    return nullptr;
}

const QuestionSpec* Questionnaire::by_slot(std::string_view slot) const {
    for (const auto& q : questions) {
        if (q.slot == slot) return &q;
    }
    return nullptr;
}

std::vector<std::string> Questionnaire::required_slots() const {
    std::vector<std::string> out;
    for (const auto& q : questions) {
        if (!q.optional) out.push_back(q.slot);
    }
    return out;
}

json to_json(const ClaimRecord& record) {
    json slots = json::object();
    for (const auto& [name, value] : record.slots) slots[name] = nlu::to_json(value);
    return json{{"claim_id", record.claim_id},
                {"user_id", record.user_id},
                {"slots", std::move(slots)},
                {"completed_at", format_timestamp(record.completed_at)},
                {"transcript_ref", record.transcript_ref}};
}

ClaimRecord claim_from_json(const json& j) {
    try {
        ClaimRecord r;
        r.claim_id = j.at("claim_id").get<std::string>();
        r.user_id = j.at("user_id").get<std::string>();
        for (const auto& [name, value] : j.at("slots").items()) {
            r.slots.emplace(name, nlu::entity_from_json(value));
        }
        auto at = parse_timestamp(j.at("completed_at").get<std::string>());
        if (!at) throw Error("invalid completed_at");
        r.completed_at = *at;
        r.transcript_ref = j.at("transcript_ref").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(std::string("malformed claim record: ") + e.what());
    }
}

void check_record_slots(const ClaimRecord& record) {
    if (record.user_id.empty()) throw std::logic_error("claim record without user id");
    if (auto it = record.slots.find("imei"); it != record.slots.end()) {
        if (!std::holds_alternative<nlu::Imei>(it->second)) {
            throw std::logic_error("claim record imei slot does not hold a validated IMEI");
        }
    }
}

void check_record(const ClaimRecord& record, const Questionnaire& questionnaire) {
    check_record_slots(record);
    for (const auto& slot : questionnaire.required_slots()) {
        if (!record.slots.count(slot)) {
            throw std::logic_error("claim record misses required slot '" + slot + "'");
        }
    }
}

bool claim_active(const UserContext& context) {
    return engine::has_state(context.active_states, kQuestionnaireState);
}

const QuestionSpec* current_question(const Questionnaire& questionnaire, const UserContext& context) {
    for (const auto& q : questionnaire.questions) {
        if (!context.slots.count(q.slot) && !context.skipped_slots.count(q.slot)) return &q;
    }
    return nullptr;
}

std::optional<nlu::EntityValue> answer_value(const QuestionSpec& question,
                                             const nlu::MessageUnderstanding& understanding) {
    if (question.entity_type == nlu::EntityKind::text) {
        auto trimmed = text::trim(understanding.raw_text);
        if (trimmed.empty() || understanding.media_kind) return std::nullopt;
        return nlu::TextValue{std::move(trimmed)};
    }
    for (const auto& [_, value] : understanding.parameters) {
        if (nlu::kind_of(value) == question.entity_type) return value;
    }
    return std::nullopt;
}

std::optional<nlu::EntityValue> choice_value(const QuestionSpec& question,
                                             const ClarificationChoice& choice) {
    switch (question.entity_type) {
    case nlu::EntityKind::phone_model: return nlu::PhoneModel{choice.canonical_value};
    case nlu::EntityKind::text: return nlu::TextValue{choice.canonical_value};
    case nlu::EntityKind::damage_type:
        if (auto t = nlu::damage_type_from_string(choice.canonical_value)) return *t;
        return std::nullopt;
    case nlu::EntityKind::phone_number: return nlu::PhoneNumber{choice.canonical_value};
    case nlu::EntityKind::imei:
        if (auto imei = nlu::Imei::parse(choice.canonical_value)) return *imei;
        return std::nullopt;
    case nlu::EntityKind::datetime:
        if (auto at = parse_timestamp(choice.canonical_value)) {
            return nlu::DateTimeValue{*at, nlu::Granularity::day};
        }
        return std::nullopt;
    }
    return std::nullopt;
}

namespace {

constexpr std::string_view kSayPrefix = "say:";

// A typed answer naming one of the offered choices.
const ClarificationChoice* choice_by_text(const QuestionSpec& q, std::string_view raw) {
    const auto typed = text::to_lower(text::trim(raw));
    if (typed.empty()) return nullptr;
    for (const auto& c : q.clarification_choices) {
        if (typed == text::to_lower(c.label) || typed == text::to_lower(c.choice_id) ||
            typed == text::to_lower(c.canonical_value)) {
            return &c;
        }
    }
    return nullptr;
}

std::vector<messaging::Choice> as_choices(const std::vector<ClarificationChoice>& choices) {
    std::vector<messaging::Choice> out;
    for (const auto& c : choices) out.push_back({c.choice_id, c.label});
    return out;
}

/// The questionnaire flow over one user context. Created per callback call.
class Flow {
public:
    Flow(const ClaimDomain& domain, CallbackArgs& args)
        : domain_(domain), args_(args), ctx_(args.context) {}

    const QuestionSpec* current() const { return current_question(domain_.questionnaire, ctx_); }

    void ask(const QuestionSpec& q) {
        if (q.offer_choices && q.clarification_choices.size() >= 2) {
            fx_.replies.push_back(Reply::choose(q.prompt_key, as_choices(q.clarification_choices)));
        } else {
            fx_.replies.push_back(Reply::text(q.prompt_key));
        }
        if (q.entity_type == nlu::EntityKind::text) {
            fx_.push.push_back({std::string(kFreeTextState), std::nullopt});
        } else {
            fx_.drop.emplace_back(kFreeTextState);
        }
    }

    // Asks the open question, or stores the claim once nothing is open.
    void advance() {
        if (const auto* q = current()) {
            ask(*q);
        } else {
            finalize();
        }
    }

    // Brings the user back to whatever the questionnaire is waiting for.
    void restate() {
        if (!claim_active(ctx_)) return;
        if (ctx_.pending_confirmation) {
            fx_.replies.push_back(Reply::text(
                "confirm_value",
                {{"value", shown(ctx_.pending_confirmation->slot, ctx_.pending_confirmation->value)}}));
            fx_.push.push_back({std::string(kConfirmingState), std::nullopt});
            return;
        }
        if (const auto* q = current()) {
            fx_.replies.push_back(Reply::text("back_on_track"));
            ask(*q);
        }
    }

    void clear_pending() {
        ctx_.pending_confirmation.reset();
        fx_.drop.emplace_back(kConfirmingState);
    }

    // Choice labels read better than canonical values such as "display_damage".
    std::string shown(const std::string& slot, const nlu::EntityValue& value) const {
        const auto text = nlu::display(value);
        if (const auto* q = domain_.questionnaire.by_slot(slot)) {
            for (const auto& c : q->clarification_choices) {
                if (c.canonical_value == text) return c.label;
            }
        }
        return text;
    }

    void propose(const QuestionSpec& q, nlu::EntityValue value) {
        fx_.replies.push_back(Reply::text("confirm_value", {{"value", shown(q.slot, value)}}));
        ctx_.pending_confirmation = store::PendingConfirmation{q.slot, std::move(value)};
        fx_.push.push_back({std::string(kConfirmingState), std::nullopt});
        // While confirming, free text is not taken as a new answer.
        fx_.drop.emplace_back(kFreeTextState);
    }

    void commit(const std::string& slot, nlu::EntityValue value) {
        if (ctx_.slots.count(slot)) {
            throw std::logic_error("slot '" + slot + "' is already committed");
        }
        ctx_.slots.emplace(slot, std::move(value));
        ctx_.question_failures = 0;
    }

    // A failed attempt at the question; every third one brings the help text.
    void fail(const QuestionSpec& q, std::string reason_key) {
        ++ctx_.question_failures;
        if (ctx_.question_failures % 3 == 0) {
            fx_.replies.push_back(Reply::text(q.help_key));
        } else {
            fx_.replies.push_back(Reply::text(std::move(reason_key)));
        }
        ask(q);
    }

    // Interprets the message as an answer to `q`. Returns false when nothing
    // usable was found and no reply was produced.
    bool try_answer(const QuestionSpec& q) {
        const auto& u = args_.understanding;
        if (const auto* c = choice_by_text(q, u.raw_text)) {
            if (auto value = choice_value(q, *c)) {
                propose(q, std::move(*value));
                return true;
            }
        }
        if (auto value = answer_value(q, u)) {
            propose(q, std::move(*value));
            return true;
        }
        if (q.entity_type == nlu::EntityKind::phone_model) {
            const auto candidates = nlu::phone_model_candidates(u.raw_text, domain_.catalog);
            std::vector<messaging::Choice> choices;
            for (const auto& c : q.clarification_choices) {
                if (std::find(candidates.begin(), candidates.end(), c.canonical_value) != candidates.end()) {
                    choices.push_back({c.choice_id, c.label});
                }
            }
            if (choices.size() >= 2) {
                fx_.replies.push_back(Reply::choose("choose_model", std::move(choices)));
                return true;
            }
            if (candidates.size() == 1) {
                propose(q, nlu::PhoneModel{candidates.front()});
                return true;
            }
        }
        if (q.entity_type == nlu::EntityKind::imei) {
            if (auto digits = nlu::imei_like_digits(u.raw_text)) {
                const auto verdict = nlu::validate_imei(*digits);
                if (!verdict.valid()) {
                    fail(q, "imei_" + std::string(nlu::to_string(*verdict.fault)));
                    return true;
                }
            }
        }
        return false;
    }

    void handle_answer(const QuestionSpec& q) {
        if (!try_answer(q)) fail(q, "not_understood");
    }

    void clear_claim() {
        ctx_.slots.clear();
        ctx_.skipped_slots.clear();
        ctx_.pending_confirmation.reset();
        ctx_.question_failures = 0;
        for (auto s : {kQuestionnaireState, kConfirmingState, kCancelState, kFreeTextState}) {
            fx_.drop.emplace_back(s);
        }
    }

    void finalize() {
        for (const auto& slot : domain_.questionnaire.required_slots()) {
            if (!ctx_.slots.count(slot)) {
                throw std::logic_error("finalize with missing required slot '" + slot + "'");
            }
        }
        if (args_.env.claims == nullptr) throw std::logic_error("no claim sink configured");
        ClaimRecord record;
        record.user_id = ctx_.user_id;
        record.slots = ctx_.slots;
        record.completed_at = args_.env.now;
        record.transcript_ref = ctx_.user_id + "#" + std::to_string(ctx_.turn_counter);
        check_record(record, domain_.questionnaire);
        std::string claim_id;
        try {
            claim_id = args_.env.claims->persist_claim(record);
        } catch (const StorageUnavailable&) {
            fx_.replies.push_back(Reply::text("persist_failed"));
            return;
        }
        ctx_.last_claim_id = claim_id;
        clear_claim();
        fx_.replies.push_back(Reply::stored(claim_id));
        fx_.replies.push_back(Reply::text("claim_thanks", {{"claim_id", claim_id}}));
    }

    // Frame-based capture: parameters of the triggering utterance fill their
    // questions right away.
    void prefill() {
        for (const auto& [_, value] : args_.understanding.parameters) {
            const auto kind = nlu::kind_of(value);
            if (kind == nlu::EntityKind::text) continue;
            for (const auto& q : domain_.questionnaire.questions) {
                if (q.entity_type == kind && !ctx_.slots.count(q.slot)) {
                    commit(q.slot, value);
                    ctx_.transcript.push_back(
                        {store::Direction::in, "prefilled " + q.slot + ": " + nlu::display(value),
                         ctx_.turn_counter});
                    break;
                }
            }
        }
    }

    Effects& effects() { return fx_; }
    UserContext& ctx() { return ctx_; }
    const nlu::MessageUnderstanding& understanding() const { return args_.understanding; }

private:
    const ClaimDomain& domain_;
    CallbackArgs& args_;
    UserContext& ctx_;
    Effects fx_;
};

using FlowStep = void (*)(Flow&);

void start_claim(Flow& f) {
    if (!claim_active(f.ctx())) {
        f.clear_claim();
        f.effects().drop.clear();
        f.prefill();
        f.effects().replies.push_back(Reply::text("claim_start"));
        f.effects().push.push_back({std::string(kQuestionnaireState), std::nullopt});
        f.advance();
        return;
    }
    const auto* q = f.current();
    if (q == nullptr) {
        f.advance();
        return;
    }
    // Already collecting: an utterance carrying the open answer counts as one.
    if (auto value = answer_value(*q, f.understanding());
        value && q->entity_type != nlu::EntityKind::text) {
        f.propose(*q, std::move(*value));
        return;
    }
    if (q->entity_type == nlu::EntityKind::text) {
        f.handle_answer(*q);
        return;
    }
    f.clear_pending();
    f.effects().replies.push_back(Reply::text("claim_resume"));
    f.ask(*q);
}

void answer(Flow& f) {
    if (const auto* q = f.current()) {
        f.handle_answer(*q);
    } else {
        f.advance();
    }
}

void confirm(Flow& f) {
    auto& ctx = f.ctx();
    const auto* q = f.current();
    if (ctx.pending_confirmation && q != nullptr && ctx.pending_confirmation->slot == q->slot) {
        auto pending = *ctx.pending_confirmation;
        f.clear_pending();
        f.commit(pending.slot, std::move(pending.value));
        f.effects().replies.push_back(Reply::text("answer_committed"));
        f.advance();
        return;
    }
    f.clear_pending();
    f.advance();
}

void reject(Flow& f) {
    f.clear_pending();
    if (const auto* q = f.current()) {
        f.fail(*q, "answer_rejected");
    } else {
        f.advance();
    }
}

void skip(Flow& f) {
    const auto* q = f.current();
    if (q == nullptr) {
        f.advance();
        return;
    }
    if (!q->optional) {
        f.effects().replies.push_back(Reply::text("skip_refused"));
        f.ask(*q);
        return;
    }
    f.clear_pending();
    f.ctx().skipped_slots.insert(q->slot);
    f.ctx().question_failures = 0;
    f.effects().replies.push_back(Reply::text("skipped"));
    f.advance();
}

void help(Flow& f) {
    if (const auto* q = f.current()) {
        f.effects().replies.push_back(Reply::text(q->help_key));
        f.ask(*q);
    } else {
        f.advance();
    }
}

void example(Flow& f) {
    if (const auto* q = f.current()) {
        f.effects().replies.push_back(Reply::text(q->example_key));
        f.ask(*q);
    } else {
        f.advance();
    }
}

void choose(Flow& f) {
    const auto* q = f.current();
    if (q == nullptr) {
        f.advance();
        return;
    }
    std::string choice_id;
    if (auto it = f.understanding().parameters.find(std::string(nlu::kChoiceParameter));
        it != f.understanding().parameters.end()) {
        choice_id = nlu::display(it->second);
    }
    const auto* c = q->choice(choice_id);
    std::optional<nlu::EntityValue> value;
    if (c != nullptr) value = choice_value(*q, *c);
    if (!value) {
        f.effects().replies.push_back(Reply::text("choice_stale"));
        f.ask(*q);
        return;
    }
    // A button press is unambiguous; no confirmation round.
    f.clear_pending();
    f.commit(q->slot, std::move(*value));
    f.effects().replies.push_back(Reply::text("answer_committed"));
    f.advance();
}

void correct(Flow& f, const ClaimDomain& domain) {
    std::string slot;
    if (auto it = f.understanding().parameters.find("slot"); it != f.understanding().parameters.end()) {
        slot = nlu::display(it->second);
    }
    const auto* q = domain.questionnaire.by_slot(slot);
    auto& ctx = f.ctx();
    if (q == nullptr || (!ctx.slots.count(slot) && !ctx.skipped_slots.count(slot))) {
        f.effects().replies.push_back(Reply::text("correction_unknown"));
        f.clear_pending();
        f.advance();
        return;
    }
    ctx.slots.erase(slot);
    ctx.skipped_slots.erase(slot);
    ctx.question_failures = 0;
    f.clear_pending();
    f.effects().replies.push_back(Reply::text("correction_ack"));
    f.advance();
}

void cancel(Flow& f) {
    f.effects().replies.push_back(Reply::text("confirm_cancel"));
}

void cancel_confirmed(Flow& f) {
    f.clear_claim();
    f.effects().replies.push_back(Reply::text("cancelled"));
}

void cancel_declined(Flow& f) {
    f.effects().drop.emplace_back(kCancelState);
    f.effects().replies.push_back(Reply::text("cancel_declined"));
    f.restate();
}

void repair(Flow& f) {
    auto& ctx = f.ctx();
    f.effects().repair = true;
    ++ctx.consecutive_fallbacks;
    if (!claim_active(ctx)) {
        f.effects().replies.push_back(
            Reply::text(ctx.consecutive_fallbacks > 2 ? "repair_topic" : "repair_idle"));
        return;
    }
    const auto* q = f.current();
    if (q == nullptr) {
        f.advance();
        return;
    }
    // Answers the NLU could not classify, e.g. "iPhone" or a mistyped IMEI.
    if (!ctx.pending_confirmation && f.try_answer(*q)) {
        f.effects().repair = false;
        ctx.consecutive_fallbacks = 0;
        return;
    }
    f.clear_pending();
    ++ctx.question_failures;
    if (ctx.question_failures % 3 == 0) {
        f.effects().replies.push_back(Reply::text(q->help_key));
    } else if (ctx.consecutive_fallbacks > 2) {
        f.effects().replies.push_back(Reply::text("repair_reset"));
    } else {
        f.effects().replies.push_back(Reply::text("repair_restate"));
    }
    f.ask(*q);
}

void set_formality(Flow& f, Formality target) {
    const auto& u = f.understanding();
    const auto cue = responder::detect_formality(u.raw_text, u.language);
    const bool switches = (target == Formality::informal && cue == responder::FormalityCue::informal) ||
                          (target == Formality::formal && cue == responder::FormalityCue::formal);
    if (switches) {
        f.ctx().profile.formality = target;
        f.effects().replies.push_back(Reply::text(
            target == Formality::informal ? "formality_informal" : "formality_formal"));
    } else if (!claim_active(f.ctx())) {
        f.effects().replies.push_back(Reply::text("repair_idle"));
    }
    f.restate();
}

void set_name(Flow& f) {
    if (auto it = f.understanding().parameters.find("first_name"); it != f.understanding().parameters.end()) {
        f.ctx().profile.first_name = nlu::display(it->second);
    }
    f.effects().replies.push_back(Reply::text("name_ack"));
    f.restate();
}

engine::Callback wrap(std::shared_ptr<const ClaimDomain> domain, FlowStep step) {
    return [domain, step](CallbackArgs& args) {
        Flow f(*domain, args);
        step(f);
        return std::move(f.effects());
    };
}

engine::Callback reply_then_restate(std::shared_ptr<const ClaimDomain> domain, std::string key) {
    return [domain, key](CallbackArgs& args) {
        Flow f(*domain, args);
        f.effects().replies.push_back(Reply::text(key));
        f.restate();
        return std::move(f.effects());
    };
}

} // namespace

std::vector<std::string> known_callbacks() {
    return {"claim.start",  "claim.answer",  "claim.answer_text", "claim.confirm",
            "claim.reject", "claim.skip",    "claim.help",        "claim.example",
            "claim.choose", "claim.correct", "claim.cancel",      "claim.cancel_confirmed",
            "claim.cancel_declined",         "profile.informal",  "profile.formal",
            "profile.set_name",              "mood.negative",     "mood.positive",
            "media.received",                "repair"};
}

std::vector<std::string> required_template_keys() {
    return {"claim_start",     "claim_resume",       "confirm_value",      "answer_committed",
            "not_understood",  "answer_rejected",    "skipped",            "skip_refused",
            "choose_model",    "choice_stale",       "correction_ack",     "correction_unknown",
            "confirm_cancel",  "cancelled",          "cancel_declined",    "claim_thanks",
            "persist_failed",  "back_on_track",      "repair_restate",     "repair_reset",
            "repair_idle",     "repair_topic",       "formality_informal", "formality_formal",
            "name_ack",        "mood_negative",      "mood_positive",      "media_received",
            "imei_wrong_length", "imei_non_digit",   "imei_checksum_failed", "apology",
            "reply_with_number"};
}

engine::CallbackResolver make_callbacks(std::shared_ptr<const ClaimDomain> domain) {
    std::map<std::string, engine::Callback, std::less<>> table;
    table["claim.start"] = wrap(domain, start_claim);
    table["claim.answer"] = wrap(domain, answer);
    table["claim.answer_text"] = wrap(domain, answer);
    table["claim.confirm"] = wrap(domain, confirm);
    table["claim.reject"] = wrap(domain, reject);
    table["claim.skip"] = wrap(domain, skip);
    table["claim.help"] = wrap(domain, help);
    table["claim.example"] = wrap(domain, example);
    table["claim.choose"] = wrap(domain, choose);
    table["claim.correct"] = [domain](CallbackArgs& args) {
        Flow f(*domain, args);
        correct(f, *domain);
        return std::move(f.effects());
    };
    table["claim.cancel"] = wrap(domain, cancel);
    table["claim.cancel_confirmed"] = wrap(domain, cancel_confirmed);
    table["claim.cancel_declined"] = wrap(domain, cancel_declined);
    table["profile.informal"] = wrap(domain, [](Flow& f) { set_formality(f, Formality::informal); });
    table["profile.formal"] = wrap(domain, [](Flow& f) { set_formality(f, Formality::formal); });
    table["profile.set_name"] = wrap(domain, set_name);
    table["mood.negative"] = reply_then_restate(domain, "mood_negative");
    table["mood.positive"] = reply_then_restate(domain, "mood_positive");
    table["media.received"] = reply_then_restate(domain, "media_received");
    table["repair"] = wrap(domain, repair);

    auto fixed = engine::resolver_from(std::move(table));
    return [fixed, domain](std::string_view id) -> std::optional<engine::Callback> {
        if (id.substr(0, kSayPrefix.size()) == kSayPrefix && id.size() > kSayPrefix.size()) {
            return reply_then_restate(domain, std::string(id.substr(kSayPrefix.size())));
        }
        return fixed(id);
    };
}

} // namespace claimflow::claims
