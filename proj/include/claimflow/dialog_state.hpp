#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace claimflow::engine {

/// Terminal pseudo-state a rule may emit to mark the end of a flow.
inline constexpr std::string_view kDoneState = "DONE";

struct DialogState {
    std::string name;
    std::optional<int> lifetime; // dialog moves remaining; nullopt = unbounded
    int priority = 0;
    std::uint64_t created_turn = 0;

    bool operator==(const DialogState&) const = default;
};

/// Queue order: priority desc, then most recent first, then name.
bool consulted_before(const DialogState& a, const DialogState& b);

/// Active states kept sorted in consultation order, one instance per name.
using StateQueue = std::vector<DialogState>;

/// Inserts `state`, replacing any active state of the same name.
/// Throws std::logic_error on a lifetime below 1.
void push_state(StateQueue& queue, DialogState state);
bool drop_state(StateQueue& queue, std::string_view name);
bool has_state(const StateQueue& queue, std::string_view name);
const DialogState* find_state(const StateQueue& queue, std::string_view name);

/// Decrements every finite lifetime and evicts states reaching zero, unless
/// the message was not understood at all.
StateQueue tick_lifetimes(StateQueue queue, bool fallback_intent);

} // namespace claimflow::engine
