#include "claimflow/messaging.hpp"

#include <set>
#include <stdexcept>

#include "claimflow/text.hpp"

namespace claimflow::messaging {

using nlohmann::json;

std::string_view to_string(ActionKind kind) {
    switch (kind) {
    case ActionKind::send_text: return "send_text";
    case ActionKind::send_choices: return "send_choices";
    case ActionKind::typing_on: return "typing_on";
    case ActionKind::request_media: return "request_media";
    case ActionKind::store_claim: return "store_claim";
    }
    return "send_text";
}

std::optional<ActionKind> action_kind_from_string(std::string_view s) {
    for (auto k : {ActionKind::send_text, ActionKind::send_choices, ActionKind::typing_on,
                   ActionKind::request_media, ActionKind::store_claim}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

void check_action(const ChatAction& a) {
    auto fail = [&](const char* why) {
        throw std::invalid_argument(std::string(to_string(a.kind)) + ": " + why);
    };
    switch (a.kind) {
    case ActionKind::send_text:
        if (!a.text || a.text->empty()) fail("requires non-empty text");
        if (!a.choices.empty() || a.claim_id) fail("carries only text");
        break;
    case ActionKind::send_choices: {
        if (a.choices.size() < 2) fail("requires at least two choices");
        std::set<std::string> ids;
        for (const auto& c : a.choices) {
            if (c.choice_id.empty()) fail("choice_id must be non-empty");
            if (!ids.insert(c.choice_id).second) fail("choice_ids must be unique");
        }
        if (a.claim_id) fail("cannot carry a claim");
        break;
    }
    case ActionKind::typing_on:
        if (a.text || !a.choices.empty() || a.claim_id) fail("carries no other fields");
        break;
    case ActionKind::request_media:
        if (!a.choices.empty() || a.claim_id) fail("carries only a prompt");
        break;
    case ActionKind::store_claim:
        if (!a.claim_id || a.claim_id->empty()) fail("requires a claim reference");
        if (!a.choices.empty()) fail("cannot carry choices");
        break;
    }
}

ChatAction ChatAction::send_text(std::string text) {
    ChatAction a{ActionKind::send_text, std::move(text), {}, std::nullopt};
    check_action(a);
    return a;
}

ChatAction ChatAction::send_choices(std::string prompt, std::vector<Choice> choices) {
    ChatAction a{ActionKind::send_choices, std::nullopt, std::move(choices), std::nullopt};
    if (!prompt.empty()) a.text = std::move(prompt);
    check_action(a);
    return a;
}

ChatAction ChatAction::typing_on() {
    return ChatAction{ActionKind::typing_on, std::nullopt, {}, std::nullopt};
}

ChatAction ChatAction::request_media(std::string prompt) {
    ChatAction a{ActionKind::request_media, std::nullopt, {}, std::nullopt};
    if (!prompt.empty()) a.text = std::move(prompt);
    return a;
}

ChatAction ChatAction::store_claim(std::string claim_id) {
    ChatAction a{ActionKind::store_claim, std::nullopt, {}, std::move(claim_id)};
    check_action(a);
    return a;
}

std::vector<ChatAction> degrade_action(const ChatAction& action, const Capabilities& caps,
                                       std::string_view number_instruction) {
    if (action.kind == ActionKind::typing_on && !caps.supports_typing) return {};
    if (action.kind == ActionKind::send_choices && !caps.supports_choices) {
        std::string body;
        if (action.text) body = *action.text + "\n";
        for (std::size_t i = 0; i < action.choices.size(); ++i) {
            body += std::to_string(i + 1) + ") " + action.choices[i].label + "\n";
        }
        body += number_instruction;
        return {ChatAction::send_text(std::move(body))};
    }
    return {action};
}

std::vector<ChatAction> degrade_actions(const std::vector<ChatAction>& actions,
                                        const Capabilities& caps,
                                        std::string_view number_instruction) {
    std::vector<ChatAction> out;
    for (const auto& a : actions) {
        for (auto& d : degrade_action(a, caps, number_instruction)) out.push_back(std::move(d));
    }
    return out;
}

namespace {

MediaKind media_kind_for_uri(std::string_view uri) {
    const auto lower = text::to_lower(uri);
    const auto dot = lower.rfind('.');
    if (dot == std::string::npos) return MediaKind::other;
    const auto ext = lower.substr(dot + 1);
    static const std::set<std::string> images{"jpg", "jpeg", "png", "gif", "webp", "heic"};
    static const std::set<std::string> audio{"mp3", "ogg", "oga", "wav", "m4a", "opus"};
    if (images.count(ext)) return MediaKind::image;
    if (audio.count(ext)) return MediaKind::audio;
    return MediaKind::other;
}

const std::string& required_string(const json& raw, const char* field) {
    if (!raw.contains(field) || !raw[field].is_string()) {
        throw MalformedPayload(std::string("field '") + field + "' must be a string");
    }
    return raw[field].get_ref<const std::string&>();
}

} // namespace

ChatMessage normalize_incoming(const json& raw, std::string_view channel_id, Timestamp received_at,
                               const MessageIdGenerator& generate_id) {
    if (!raw.is_object()) throw MalformedPayload("message must be an object");
    if (channel_id.empty()) throw MalformedPayload("channel id must be non-empty");

    ChatMessage msg;
    msg.channel_id = std::string(channel_id);
    msg.received_at = received_at;
    msg.user_id = required_string(raw, "user_id");
    if (msg.user_id.empty()) throw MalformedPayload("user_id must be non-empty");
    if (raw.contains("channel")) {
        if (!raw["channel"].is_string() || raw["channel"].get<std::string>() != channel_id) {
            throw MalformedPayload("channel must be \"" + std::string(channel_id) + "\"");
        }
    }

    int variants = 0;
    for (const char* f : {"text", "choice_id", "media_uri"}) {
        if (raw.contains(f) && !raw[f].is_null()) ++variants;
    }
    if (variants != 1) {
        throw MalformedPayload("exactly one of text, choice_id, media_uri is required");
    }
    if (raw.contains("text") && !raw["text"].is_null()) {
        const auto& t = required_string(raw, "text");
        if (text::trim(t).empty()) throw EmptyMessage("text is empty after trimming");
        msg.payload = TextPayload{t};
    } else if (raw.contains("choice_id") && !raw["choice_id"].is_null()) {
        const auto& c = required_string(raw, "choice_id");
        if (c.empty()) throw MalformedPayload("choice_id must be non-empty");
        msg.payload = ChoicePayload{c};
    } else {
        const auto& uri = required_string(raw, "media_uri");
        if (uri.empty()) throw MalformedPayload("media_uri must be non-empty");
        msg.payload = MediaPayload{media_kind_for_uri(uri), uri};
    }

    if (raw.contains("message_id")) {
        msg.message_id = required_string(raw, "message_id");
    }
    if (msg.message_id.empty() && generate_id) msg.message_id = generate_id();
    return msg;
}

json to_web_wire(const ChatMessage& message) {
    json j{{"user_id", message.user_id}, {"channel", message.channel_id}};
    if (!message.message_id.empty()) j["message_id"] = message.message_id;
    if (const auto* t = std::get_if<TextPayload>(&message.payload)) {
        j["text"] = t->text;
    } else if (const auto* c = std::get_if<ChoicePayload>(&message.payload)) {
        j["choice_id"] = c->choice_id;
    } else {
        j["media_uri"] = std::get<MediaPayload>(message.payload).uri;
    }
    return j;
}

json action_to_wire(const ChatAction& action) {
    json j{{"kind", std::string(to_string(action.kind))}};
    if (action.text) j["text"] = *action.text;
    if (action.kind == ActionKind::store_claim && action.claim_id) j["text"] = *action.claim_id;
    if (!action.choices.empty()) {
        json choices = json::array();
        for (const auto& c : action.choices) {
            choices.push_back({{"choice_id", c.choice_id}, {"label", c.label}});
        }
        j["choices"] = std::move(choices);
    }
    return j;
}

json actions_to_wire(const std::vector<ChatAction>& actions) {
    json arr = json::array();
    for (const auto& a : actions) arr.push_back(action_to_wire(a));
    return json{{"actions", std::move(arr)}};
}

std::vector<ChatAction> actions_from_wire(const json& j) {
    if (!j.is_object() || !j.contains("actions") || !j["actions"].is_array()) {
        throw MalformedPayload("reply must contain an 'actions' array");
    }
    std::vector<ChatAction> out;
    for (const auto& item : j["actions"]) {
        const auto kind = action_kind_from_string(item.value("kind", ""));
        if (!kind) throw MalformedPayload("unknown action kind");
        ChatAction a;
        a.kind = *kind;
        if (item.contains("text")) a.text = item["text"].get<std::string>();
        if (item.contains("choices")) {
            for (const auto& c : item["choices"]) {
                a.choices.push_back({c.at("choice_id").get<std::string>(),
                                     c.at("label").get<std::string>()});
            }
        }
        if (a.kind == ActionKind::store_claim) {
            a.claim_id = a.text;
            a.text.reset();
        }
        try {
            check_action(a);
        } catch (const std::invalid_argument& e) {
            throw MalformedPayload(e.what());
        }
        out.push_back(std::move(a));
    }
    return out;
}

std::string summarize(const ChatMessage& message) {
    if (const auto* t = std::get_if<TextPayload>(&message.payload)) return "text: " + t->text;
    if (const auto* c = std::get_if<ChoicePayload>(&message.payload)) {
        return "choice: " + c->choice_id;
    }
    const auto& m = std::get<MediaPayload>(message.payload);
    return "media(" + std::string(to_string(m.kind)) + "): " + m.uri;
}

std::string summarize(const ChatAction& action) {
    std::string out(to_string(action.kind));
    if (action.text) out += ": " + *action.text;
    if (!action.choices.empty()) {
        out += " [";
        for (std::size_t i = 0; i < action.choices.size(); ++i) {
            if (i) out += " | ";
            out += action.choices[i].choice_id + "=" + action.choices[i].label;
        }
        out += "]";
    }
    if (action.claim_id) out += ": " + *action.claim_id;
    return out;
}

} // namespace claimflow::messaging
