#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "claimflow/context.hpp"
#include "claimflow/dialog_state.hpp"
#include "claimflow/messaging.hpp"
#include "claimflow/nlu.hpp"
#include "claimflow/responder.hpp"

namespace claimflow::claims {
struct ClaimRecord;
}

namespace claimflow::engine {

// --- handlers --------------------------------------------------------------

struct IntentHandler {
    std::string intent;
    std::vector<std::string> required_parameters;
};

/// Consolidates every intent that expresses a confirmation.
struct AffirmationHandler {
    std::vector<std::string> family;
};

struct NegationHandler {
    std::vector<std::string> family;
};

struct MediaHandler {};

struct EmojiLexicon {
    std::set<char32_t> positive;
    std::set<char32_t> negative;
};

/// Majority vote of lexicon hits; no hits or a tie is neutral.
Sentiment classify_emoji_sentiment(std::span<const char32_t> emojis, const EmojiLexicon& lexicon);

struct EmojiSentimentHandler {
    Sentiment polarity = Sentiment::neutral;
    std::shared_ptr<const EmojiLexicon> lexicon;
};

enum class RegexTarget { raw_text, intent };

struct RegexHandler {
    std::string pattern;
    RegexTarget target = RegexTarget::raw_text;
    bool ignore_case = false;
    std::shared_ptr<const std::regex> compiled;

    /// Throws ContentError when the pattern does not compile.
    static RegexHandler create(std::string pattern, RegexTarget target = RegexTarget::raw_text,
                               bool ignore_case = false);
};

using Handler = std::variant<IntentHandler, AffirmationHandler, NegationHandler, MediaHandler,
                             EmojiSentimentHandler, RegexHandler>;

bool matches(const Handler& handler, const nlu::MessageUnderstanding& understanding);
std::string_view handler_kind(const Handler& handler);

// --- rules and router --------------------------------------------------------

struct StateDefinition {
    std::string name;
    int priority = 0;
    std::optional<int> default_lifetime;
};

struct StateEmission {
    std::string state;
    std::optional<int> lifetime; // overrides the state's default lifetime
};

/// Extra condition on the user's profile; lets the formality switch rules fire
/// only when they would change something.
struct RuleGuard {
    std::optional<Formality> formality;
};

struct Rule {
    Handler handler;
    std::string callback;
    std::vector<StateEmission> emits;
    int declaration_order = 0;
    RuleGuard guard;
};

struct Router {
    std::vector<Rule> stateless_rules;
    std::map<std::string, std::vector<Rule>, std::less<>> state_rules;
    std::vector<Rule> fallback_rules;
    std::map<std::string, StateDefinition, std::less<>> states;

    /// Structural problems: emitted states without a rules entry, rules keyed
    /// by undeclared states, a last fallback rule that can fail to match.
    std::vector<std::string> check() const;
};

bool rule_matches(const Rule& rule, const nlu::MessageUnderstanding& understanding,
                  const responder::UserProfile& profile);

enum class Tier { stateless, state, fallback };
std::string_view to_string(Tier tier);

struct FiredRule {
    Tier tier = Tier::fallback;
    std::string state;      // owning state for Tier::state
    std::size_t index = 0;  // position within its list
    const Rule* rule = nullptr;
};

/// First matching rule in tier order; nullopt only for routers lacking a
/// total fallback rule.
std::optional<FiredRule> select_rule(const Router& router,
                                     const nlu::MessageUnderstanding& understanding,
                                     const store::UserContext& context);

// --- callbacks ---------------------------------------------------------------

enum class ReplyKind { text, choices, request_media, store_claim };

/// An abstract reply; the responder turns it into a chat action.
struct Reply {
    ReplyKind kind = ReplyKind::text;
    std::string key;
    responder::Params params;
    std::vector<messaging::Choice> choices;
    std::string claim_id;

    static Reply text(std::string key, responder::Params params = {});
    static Reply choose(std::string key, std::vector<messaging::Choice> choices,
                        responder::Params params = {});
    static Reply stored(std::string claim_id);
};

struct Effects {
    std::vector<Reply> replies;
    std::vector<StateEmission> push;
    std::vector<std::string> drop;
    // Marks a repair move; any other move resets the consecutive repair count.
    bool repair = false;
};

/// Where finished claims go. Returns the assigned claim id; throws
/// StorageUnavailable on failure.
class ClaimSink {
public:
    virtual ~ClaimSink() = default;
    virtual std::string persist_claim(const claims::ClaimRecord& record) = 0;
};

struct PlanEnv {
    ClaimSink* claims = nullptr;
    Timestamp now{};
    std::optional<std::string> inbound_summary;
};

struct CallbackArgs {
    const nlu::MessageUnderstanding& understanding;
    store::UserContext& context;
    const Rule& rule;
    const PlanEnv& env;
};

using Callback = std::function<Effects(CallbackArgs&)>;
using CallbackResolver = std::function<std::optional<Callback>(std::string_view id)>;

CallbackResolver resolver_from(std::map<std::string, Callback, std::less<>> callbacks);

struct PlanResult {
    std::vector<messaging::ChatAction> actions;
    store::UserContext context;
    FiredRule fired;
    std::string callback;
};

/// The dialog controller: routes one understanding through the three rule
/// tiers, runs the fired rule's callback, ages the state queue and realizes
/// the replies.
class Engine {
public:
    /// Resolves every rule callback up front; throws ContentError on an
    /// unknown id or a structurally broken router.
    /// `mood_lexicon`, when given, updates the profile mood from each
    /// message's emojis before routing.
    Engine(Router router, const CallbackResolver& resolver,
           std::shared_ptr<const responder::Responder> responder,
           std::shared_ptr<const EmojiLexicon> mood_lexicon = nullptr);

    PlanResult plan(const nlu::MessageUnderstanding& understanding,
                    const store::UserContext& context, const PlanEnv& env = {}) const;

    const Router& router() const { return router_; }
    const responder::Responder& responder() const { return *responder_; }

    /// Callback-pushed states are validated against the router's definitions.
    DialogState instantiate(const StateEmission& emission, std::uint64_t turn) const;

private:
    std::vector<messaging::ChatAction> realize(const std::vector<Reply>& replies,
                                               const responder::UserProfile& profile,
                                               std::uint64_t turn) const;

    Router router_;
    std::map<std::string, Callback, std::less<>> callbacks_;
    std::shared_ptr<const responder::Responder> responder_;
    std::shared_ptr<const EmojiLexicon> mood_lexicon_;
};

/// Context-level form of tick_lifetimes.
store::UserContext tick_lifetimes(store::UserContext context, bool fired_was_fallback_intent);

} // namespace claimflow::engine
