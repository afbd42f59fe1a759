#include "claimflow/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace claimflow::engine {

Sentiment classify_emoji_sentiment(std::span<const char32_t> emojis, const EmojiLexicon& lexicon) {
    int positive = 0;
    int negative = 0;
    for (char32_t e : emojis) {
        if (lexicon.positive.count(e)) ++positive;
        if (lexicon.negative.count(e)) ++negative;
    }
    if (positive > negative) return Sentiment::positive;
    if (negative > positive) return Sentiment::negative;
    return Sentiment::neutral;
}

RegexHandler RegexHandler::create(std::string pattern, RegexTarget target, bool ignore_case) {
    RegexHandler h;
    h.target = target;
    h.ignore_case = ignore_case;
    auto flags = std::regex::ECMAScript;
    if (ignore_case) flags |= std::regex::icase;
    try {
        h.compiled = std::make_shared<const std::regex>(pattern, flags);
    } catch (const std::regex_error& e) {
        throw ContentError("regex '" + pattern + "' does not compile: " + e.what());
    }
    h.pattern = std::move(pattern);
    return h;
}

namespace {

bool in_family(const std::vector<std::string>& family, const std::string& intent) {
    return std::find(family.begin(), family.end(), intent) != family.end();
}

} // namespace

bool matches(const Handler& handler, const nlu::MessageUnderstanding& u) {
    struct Visitor {
        const nlu::MessageUnderstanding& u;
        bool operator()(const IntentHandler& h) const {
            if (u.intent != h.intent) return false;
            return std::all_of(h.required_parameters.begin(), h.required_parameters.end(),
                               [&](const std::string& p) { return u.has(p); });
        }
        bool operator()(const AffirmationHandler& h) const { return in_family(h.family, u.intent); }
        bool operator()(const NegationHandler& h) const { return in_family(h.family, u.intent); }
        bool operator()(const MediaHandler&) const { return u.media_kind.has_value(); }
        bool operator()(const EmojiSentimentHandler& h) const {
            if (!h.lexicon) return false;
            return classify_emoji_sentiment(u.emojis, *h.lexicon) == h.polarity;
        }
        bool operator()(const RegexHandler& h) const {
            if (!h.compiled) return false;
            const auto& subject = h.target == RegexTarget::intent ? u.intent : u.raw_text;
            return std::regex_search(subject, *h.compiled);
        }
    };
    return std::visit(Visitor{u}, handler);
}

std::string_view handler_kind(const Handler& handler) {
    static constexpr std::string_view names[] = {"intent", "affirmation", "negation",
                                                 "media",  "emoji_sentiment", "regex"};
    return names[handler.index()];
}

namespace {

bool is_total(const Rule& rule) {
    const auto* regex = std::get_if<RegexHandler>(&rule.handler);
    if (regex == nullptr || !regex->compiled || rule.guard.formality) return false;
    // A pattern matching the empty string matches every subject under regex_search.
    return std::regex_search(std::string(), *regex->compiled);
}

} // namespace

std::vector<std::string> Router::check() const {
    std::vector<std::string> problems;
    auto check_emits = [&](const std::vector<Rule>& rules, const std::string& where) {
        for (const auto& r : rules) {
            for (const auto& e : r.emits) {
                if (e.state == kDoneState) continue;
                if (!states.count(e.state)) {
                    problems.push_back(where + " rule '" + r.callback + "' emits undeclared state '" +
                                       e.state + "'");
                } else if (!state_rules.count(e.state)) {
                    problems.push_back(where + " rule '" + r.callback + "' emits state '" + e.state +
                                       "' which has no rules");
                }
                if (e.lifetime && *e.lifetime < 1) {
                    problems.push_back(where + " rule '" + r.callback + "' emits '" + e.state +
                                       "' with lifetime < 1");
                }
            }
        }
    };
    check_emits(stateless_rules, "stateless");
    check_emits(fallback_rules, "fallback");
    for (const auto& [name, rules] : state_rules) {
        if (!states.count(name)) problems.push_back("rules declared for unknown state '" + name + "'");
        check_emits(rules, "state " + name);
    }
    for (const auto& [name, def] : states) {
        if (def.default_lifetime && *def.default_lifetime < 1) {
            problems.push_back("state '" + name + "' has a default lifetime < 1");
        }
    }
    if (fallback_rules.empty() || !is_total(fallback_rules.back())) {
        problems.push_back("the last fallback rule must be an unguarded regex matching every message");
    }
    return problems;
}

bool rule_matches(const Rule& rule, const nlu::MessageUnderstanding& understanding,
                  const responder::UserProfile& profile) {
    if (rule.guard.formality && *rule.guard.formality != profile.formality) return false;
    return matches(rule.handler, understanding);
}

std::string_view to_string(Tier tier) {
    switch (tier) {
    case Tier::stateless: return "stateless";
    case Tier::state: return "state";
    case Tier::fallback: return "fallback";
    }
    return "fallback";
}

std::optional<FiredRule> select_rule(const Router& router, const nlu::MessageUnderstanding& u,
                                     const store::UserContext& context) {
    for (std::size_t i = 0; i < router.stateless_rules.size(); ++i) {
        if (rule_matches(router.stateless_rules[i], u, context.profile)) {
            return FiredRule{Tier::stateless, {}, i, &router.stateless_rules[i]};
        }
    }
    for (const auto& state : context.active_states) {
        auto it = router.state_rules.find(state.name);
        if (it == router.state_rules.end()) continue;
        for (std::size_t i = 0; i < it->second.size(); ++i) {
            if (rule_matches(it->second[i], u, context.profile)) {
                return FiredRule{Tier::state, state.name, i, &it->second[i]};
            }
        }
    }
    for (std::size_t i = 0; i < router.fallback_rules.size(); ++i) {
        if (rule_matches(router.fallback_rules[i], u, context.profile)) {
            return FiredRule{Tier::fallback, {}, i, &router.fallback_rules[i]};
        }
    }
    return std::nullopt;
}

Reply Reply::text(std::string key, responder::Params params) {
    Reply r;
    r.key = std::move(key);
    r.params = std::move(params);
    return r;
}

Reply Reply::choose(std::string key, std::vector<messaging::Choice> choices,
                    responder::Params params) {
    Reply r;
    r.kind = ReplyKind::choices;
    r.key = std::move(key);
    r.params = std::move(params);
    r.choices = std::move(choices);
    return r;
}

Reply Reply::stored(std::string claim_id) {
    Reply r;
    r.kind = ReplyKind::store_claim;
    r.claim_id = std::move(claim_id);
    return r;
}

CallbackResolver resolver_from(std::map<std::string, Callback, std::less<>> callbacks) {
    auto shared = std::make_shared<const std::map<std::string, Callback, std::less<>>>(std::move(callbacks));
    return [shared](std::string_view id) -> std::optional<Callback> {
        auto it = shared->find(id);
        if (it == shared->end()) return std::nullopt;
        return it->second;
    };
}

Engine::Engine(Router router, const CallbackResolver& resolver,
               std::shared_ptr<const responder::Responder> responder,
               std::shared_ptr<const EmojiLexicon> mood_lexicon)
    : router_(std::move(router)), responder_(std::move(responder)),
      mood_lexicon_(std::move(mood_lexicon)) {
    if (!responder_) throw ContentError("engine requires a responder");
    if (auto problems = router_.check(); !problems.empty()) throw ContentError(problems.front());
    auto resolve_all = [&](const std::vector<Rule>& rules) {
        for (const auto& r : rules) {
            if (callbacks_.count(r.callback)) continue;
            auto cb = resolver(r.callback);
            if (!cb) throw ContentError("unknown callback '" + r.callback + "'");
            callbacks_.emplace(r.callback, std::move(*cb));
        }
    };
    resolve_all(router_.stateless_rules);
    for (const auto& [_, rules] : router_.state_rules) resolve_all(rules);
    resolve_all(router_.fallback_rules);
}

DialogState Engine::instantiate(const StateEmission& emission, std::uint64_t turn) const {
    auto it = router_.states.find(emission.state);
    if (it == router_.states.end()) {
        throw std::logic_error("callback pushed undeclared state '" + emission.state + "'");
    }
    DialogState s;
    s.name = emission.state;
    s.priority = it->second.priority;
    s.lifetime = emission.lifetime ? emission.lifetime : it->second.default_lifetime;
    s.created_turn = turn;
    return s;
}

std::vector<messaging::ChatAction> Engine::realize(const std::vector<Reply>& replies,
                                                   const responder::UserProfile& profile,
                                                   std::uint64_t turn) const {
    using messaging::ChatAction;
    std::vector<ChatAction> actions;
    for (const auto& r : replies) {
        switch (r.kind) {
        case ReplyKind::text:
            actions.push_back(ChatAction::send_text(responder_->render(r.key, profile, r.params, turn)));
            break;
        case ReplyKind::choices:
            actions.push_back(ChatAction::send_choices(
                responder_->render(r.key, profile, r.params, turn), r.choices));
            break;
        case ReplyKind::request_media:
            actions.push_back(ChatAction::request_media(responder_->render(r.key, profile, r.params, turn)));
            break;
        case ReplyKind::store_claim:
            actions.push_back(ChatAction::store_claim(r.claim_id));
            break;
        }
    }
    return actions;
}

PlanResult Engine::plan(const nlu::MessageUnderstanding& understanding,
                        const store::UserContext& context, const PlanEnv& env) const {
    PlanResult result;
    store::UserContext& ctx = result.context;
    ctx = context;
    ctx.turn_counter += 1;
    ctx.transcript.push_back({store::Direction::in,
                              env.inbound_summary ? *env.inbound_summary
                                                  : "understood: " + understanding.intent,
                              ctx.turn_counter});
    if (mood_lexicon_) {
        const auto mood = classify_emoji_sentiment(understanding.emojis, *mood_lexicon_);
        if (mood != Sentiment::neutral) ctx.profile.mood = mood;
    }

    auto fired = select_rule(router_, understanding, ctx);
    if (!fired) throw std::logic_error("no rule fired; the router lacks a total repair rule");
    const Rule& rule = *fired->rule;

    CallbackArgs args{understanding, ctx, rule, env};
    Effects effects = callbacks_.at(rule.callback)(args);

    // Repair callbacks maintain the counter themselves.
    if (!effects.repair) ctx.consecutive_fallbacks = 0;

    ctx.active_states = tick_lifetimes(std::move(ctx.active_states), understanding.is_fallback());
    for (const auto& name : effects.drop) drop_state(ctx.active_states, name);
    auto emit = [&](const StateEmission& e) {
        if (e.state == kDoneState) return;
        push_state(ctx.active_states, instantiate(e, ctx.turn_counter));
    };
    for (const auto& e : rule.emits) emit(e);
    for (const auto& e : effects.push) emit(e);

    result.actions = realize(effects.replies, ctx.profile, ctx.turn_counter);
    for (const auto& a : result.actions) {
        ctx.transcript.push_back({store::Direction::out, messaging::summarize(a), ctx.turn_counter});
    }
    store::check_invariants(ctx);
    result.fired = *fired;
    result.callback = rule.callback;
    return result;
}

store::UserContext tick_lifetimes(store::UserContext context, bool fired_was_fallback_intent) {
    context.active_states = tick_lifetimes(std::move(context.active_states), fired_was_fallback_intent);
    return context;
}

} // namespace claimflow::engine
