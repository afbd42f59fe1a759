#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "claimflow/common.hpp"

namespace claimflow::messaging {

struct TextPayload {
    std::string text;
    bool operator==(const TextPayload&) const = default;
};

struct MediaPayload {
    MediaKind kind = MediaKind::other;
    std::string uri;
    bool operator==(const MediaPayload&) const = default;
};

struct ChoicePayload {
    std::string choice_id;
    bool operator==(const ChoicePayload&) const = default;
};

using Payload = std::variant<TextPayload, MediaPayload, ChoicePayload>;

/// Platform-independent inbound message. Immutable once normalized.
struct ChatMessage {
    std::string channel_id;
    std::string user_id;
    std::string message_id;
    Timestamp received_at{};
    Payload payload;

    bool operator==(const ChatMessage&) const = default;
};

struct Choice {
    std::string choice_id;
    std::string label;
    bool operator==(const Choice&) const = default;
};

enum class ActionKind { send_text, send_choices, typing_on, request_media, store_claim };

std::string_view to_string(ActionKind kind);
std::optional<ActionKind> action_kind_from_string(std::string_view s);

/// Outbound chat action. Build through the factory functions, which enforce
/// the per-kind field rules.
struct ChatAction {
    ActionKind kind = ActionKind::typing_on;
    std::optional<std::string> text;
    std::vector<Choice> choices;
    std::optional<std::string> claim_id;

    static ChatAction send_text(std::string text);
    static ChatAction send_choices(std::string prompt, std::vector<Choice> choices);
    static ChatAction typing_on();
    static ChatAction request_media(std::string prompt);
    static ChatAction store_claim(std::string claim_id);

    bool operator==(const ChatAction&) const = default;
};

/// Throws std::invalid_argument when the action breaks its kind's field rules.
void check_action(const ChatAction& action);

struct Capabilities {
    bool supports_choices = true;
    bool supports_typing = true;
};

inline constexpr Capabilities kConsoleCapabilities{false, false};
inline constexpr Capabilities kWebCapabilities{true, true};
inline constexpr Capabilities kLoopbackCapabilities{true, true};

inline constexpr std::string_view kDefaultNumberInstruction = "Reply with a number.";

/// Rewrites an action for an adapter lacking a capability: choices become a
/// numbered text list, typing notifications disappear. Otherwise identity.
std::vector<ChatAction> degrade_action(const ChatAction& action, const Capabilities& caps,
                                       std::string_view number_instruction = kDefaultNumberInstruction);
std::vector<ChatAction> degrade_actions(const std::vector<ChatAction>& actions,
                                        const Capabilities& caps,
                                        std::string_view number_instruction = kDefaultNumberInstruction);

using MessageIdGenerator = std::function<std::string()>;

/// Maps a web-wire inbound document onto a ChatMessage. A missing message_id
/// is taken from `generate_id`; when no generator is given the id stays empty
/// and the service assigns one from the user's turn counter.
/// Throws MalformedPayload or EmptyMessage.
ChatMessage normalize_incoming(const nlohmann::json& raw, std::string_view channel_id,
                               Timestamp received_at, const MessageIdGenerator& generate_id = {});

/// Inverse of normalize_incoming for the web wire schema.
nlohmann::json to_web_wire(const ChatMessage& message);

nlohmann::json action_to_wire(const ChatAction& action);
nlohmann::json actions_to_wire(const std::vector<ChatAction>& actions);
/// Parses the outbound wire document, e.g. for clients and tests.
std::vector<ChatAction> actions_from_wire(const nlohmann::json& j);

/// One-line rendering used for transcripts.
std::string summarize(const ChatMessage& message);
std::string summarize(const ChatAction& action);

} // namespace claimflow::messaging
