#include "claimflow/service.hpp"

#include <iostream>

#include "claimflow/text.hpp"

namespace claimflow::service {

using messaging::ChatAction;
using messaging::ChatMessage;

namespace {

nlu::Lexicon with_threshold(nlu::Lexicon lexicon, std::optional<double> threshold) {
    if (threshold) lexicon.fallback_threshold = *threshold;
    return lexicon;
}

} // namespace

Bot::Bot(content::ContentPack p, std::optional<double> threshold_override)
    : pack(std::move(p)),
      domain(content::make_domain(pack)),
      understander(with_threshold(pack.lexicon, threshold_override)),
      engine(pack.router, claims::make_callbacks(domain),
             std::make_shared<const responder::Responder>(pack.templates), pack.emoji) {}

Service::Service(std::vector<content::ContentPack> packs, std::shared_ptr<store::Store> store,
                 ServiceOptions options)
    : store_(std::move(store)), options_(std::move(options)) {
    if (!store_) throw std::logic_error("service requires a store");
    if (options_.fallback_threshold &&
        (*options_.fallback_threshold < 0.0 || *options_.fallback_threshold > 1.0)) {
        throw ContentError("fallback threshold must lie in [0,1]");
    }
    for (auto& pack : packs) {
        const auto lang = pack.language;
        bots_[lang] = std::make_unique<Bot>(std::move(pack), options_.fallback_threshold);
    }
    if (!bots_.count(options_.default_language)) {
        throw ContentPackMissing("no content pack for default language '" +
                                 std::string(to_string(options_.default_language)) + "'");
    }
}

const Bot& Service::bot(Language language) const {
    auto it = bots_.find(language);
    if (it == bots_.end()) it = bots_.find(options_.default_language);
    return *it->second;
}

// Holds the user's place in line for the duration of one message.
class Service::Turn {
public:
    Turn(Service& service, const std::string& user_id) : service_(service), user_id_(user_id) {
        {
            std::lock_guard lock(service_.gates_mutex_);
            auto& slot = service_.gates_[user_id_];
            if (!slot) slot = std::make_shared<Gate>();
            gate_ = slot;
            ++gate_->holders;
        }
        std::unique_lock lock(gate_->mutex);
        const auto ticket = gate_->next_ticket++;
        gate_->cv.wait(lock, [&] { return gate_->serving == ticket; });
    }

    ~Turn() {
        {
            std::lock_guard lock(gate_->mutex);
            ++gate_->serving;
        }
        gate_->cv.notify_all();
        std::lock_guard lock(service_.gates_mutex_);
        if (--gate_->holders == 0) service_.gates_.erase(user_id_);
    }

    Turn(const Turn&) = delete;
    Turn& operator=(const Turn&) = delete;

private:
    Service& service_;
    std::string user_id_;
    std::shared_ptr<Gate> gate_;
};

std::vector<ChatAction> Service::process_message(const ChatMessage& message,
                                                 const messaging::Capabilities& caps,
                                                 TurnRecord* record) {
    Turn turn(*this, message.user_id);
    std::optional<Language> language;
    try {
        return run(message, caps, record);
    } catch (const std::logic_error& e) {
        std::cerr << "claimflow: defect while processing a message from '" << message.user_id
                  << "': " << e.what() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "claimflow: failed to process a message from '" << message.user_id
                  << "': " << e.what() << '\n';
    }
    try {
        if (auto ctx = store_->find_context(message.user_id)) language = ctx->profile.language;
    } catch (const std::exception&) {
    }
    return apology(caps, language);
}

std::vector<ChatAction> Service::run(const ChatMessage& message, const messaging::Capabilities& caps,
                                     TurnRecord* record) {
    const auto started = std::chrono::steady_clock::now();
    auto context = store_->load_context(message.user_id, options_.default_language);
    const Bot& b = bot(context.profile.language);

    std::vector<ChatAction> actions{ChatAction::typing_on()};

    ChatMessage msg = message;
    if (msg.message_id.empty()) msg.message_id = msg.user_id + "-" + std::to_string(context.turn_counter + 1);

    nlu::MessageUnderstanding understanding;
    if (const auto* t = std::get_if<messaging::TextPayload>(&msg.payload)) {
        if (text::trim(t->text).empty()) throw EmptyMessage("text is empty after trimming");
        understanding = b.understander.understand(t->text, msg.received_at);
    } else if (const auto* c = std::get_if<messaging::ChoicePayload>(&msg.payload)) {
        understanding = b.understander.understand_choice(c->choice_id);
    } else {
        understanding = b.understander.understand_media(std::get<messaging::MediaPayload>(msg.payload).kind);
    }

    engine::PlanEnv env;
    env.claims = store_.get();
    env.now = options_.clock();
    env.inbound_summary = messaging::summarize(msg);
    auto result = b.engine.plan(understanding, context, env);

    if (std::chrono::steady_clock::now() - started > options_.timeout) {
        throw Error("processing exceeded the request timeout");
    }
    store_->save_context(result.context);

    for (auto& a : result.actions) actions.push_back(std::move(a));
    const auto instruction = b.engine.responder().render("reply_with_number", result.context.profile, {},
                                                         result.context.turn_counter);
    if (record != nullptr) {
        record->message = msg;
        record->understanding = understanding;
        record->callback = result.callback;
        record->tier = result.fired.tier;
        record->context = result.context;
    }
    return messaging::degrade_actions(actions, caps, instruction);
}

std::vector<ChatAction> Service::apology(const messaging::Capabilities& caps,
                                         std::optional<Language> language) {
    std::vector<ChatAction> actions{ChatAction::typing_on()};
    std::string text = "Sorry, something went wrong. Please send your message again.";
    try {
        responder::UserProfile profile;
        profile.language = language.value_or(options_.default_language);
        text = bot(profile.language).engine.responder().render("apology", profile, {}, 0);
    } catch (const std::exception&) {
    }
    actions.push_back(ChatAction::send_text(std::move(text)));
    return messaging::degrade_actions(actions, caps);
}

std::optional<nlohmann::json> Service::context_summary(const std::string& user_id) {
    Turn turn(*this, user_id);
    auto ctx = store_->find_context(user_id);
    if (!ctx) return std::nullopt;
    return store::summarize(*ctx);
}

std::unique_ptr<Service> open_service(const ServiceConfig& config, Clock clock) {
    auto packs = content::load_packs(config.content_pack_path);
    auto store = std::make_shared<store::FileStore>(config.storage_path);
    ServiceOptions options;
    options.default_language = config.default_language;
    options.fallback_threshold = config.fallback_threshold;
    options.clock = std::move(clock);
    return std::make_unique<Service>(std::move(packs), std::move(store), std::move(options));
}

// --- adapters ------------------------------------------------------------------

LoopbackAdapter::LoopbackAdapter(Service& service, std::string user_id)
    : service_(service), user_id_(std::move(user_id)) {}

std::vector<ChatAction> LoopbackAdapter::send(messaging::Payload payload, TurnRecord* record) {
    ChatMessage msg;
    msg.channel_id = "loopback";
    msg.user_id = user_id_;
    msg.received_at = service_.now();
    msg.payload = std::move(payload);
    return service_.process_message(msg, messaging::kLoopbackCapabilities, record);
}

std::vector<ChatAction> LoopbackAdapter::say(std::string text, TurnRecord* record) {
    return send(messaging::TextPayload{std::move(text)}, record);
}

std::vector<ChatAction> LoopbackAdapter::choose(std::string choice_id, TurnRecord* record) {
    return send(messaging::ChoicePayload{std::move(choice_id)}, record);
}

std::vector<ChatAction> LoopbackAdapter::send_media(std::string uri, TurnRecord* record) {
    // Reuse the wire mapping so the media kind follows the same extension rules.
    auto payload = messaging::normalize_incoming(nlohmann::json{{"user_id", user_id_}, {"media_uri", uri}},
                                                 "loopback", service_.now())
                       .payload;
    return send(std::move(payload), record);
}

std::string render_for_console(const ChatAction& action) {
    switch (action.kind) {
    case messaging::ActionKind::store_claim: return "[claim stored: " + action.claim_id.value_or("") + "]";
    case messaging::ActionKind::typing_on: return "...";
    default: break;
    }
    std::string out = action.text.value_or("");
    for (std::size_t i = 0; i < action.choices.size(); ++i) {
        out += "\n  [" + action.choices[i].choice_id + "] " + action.choices[i].label;
    }
    return out;
}

void console_loop(Service& service, std::istream& in, std::ostream& out, const std::string& user_id) {
    // Choices of the last prompt, in the numbering the console showed.
    std::vector<messaging::Choice> last_choices;
    std::string line;
    while (std::getline(in, line)) {
        const auto trimmed = text::trim(line);
        if (trimmed.empty()) continue;
        ChatMessage msg;
        msg.channel_id = "console";
        msg.user_id = user_id;
        msg.received_at = service.now();
        msg.payload = messaging::TextPayload{line};
        if (!last_choices.empty() && trimmed.find_first_not_of("0123456789") == std::string::npos &&
            trimmed.size() < 4) {
            const auto n = static_cast<std::size_t>(std::stoul(trimmed));
            if (n >= 1 && n <= last_choices.size()) {
                msg.payload = messaging::ChoicePayload{last_choices[n - 1].choice_id};
            }
        }
        // Plan with full capabilities to learn the choice ids, then degrade for display.
        const auto actions = service.process_message(msg, messaging::kLoopbackCapabilities);
        std::vector<messaging::Choice> offered;
        for (const auto& a : actions) {
            if (a.kind == messaging::ActionKind::send_choices) offered = a.choices;
        }
        last_choices = offered;
        std::string instruction{messaging::kDefaultNumberInstruction};
        try {
            if (auto ctx = service.store().find_context(user_id)) {
                instruction = service.bot(ctx->profile.language)
                                  .engine.responder()
                                  .render("reply_with_number", ctx->profile, {}, ctx->turn_counter);
            }
        } catch (const std::exception&) {
        }
        for (const auto& a : messaging::degrade_actions(actions, messaging::kConsoleCapabilities, instruction)) {
            out << render_for_console(a) << '\n';
        }
        out.flush();
    }
}

} // namespace claimflow::service
