#include "claimflow/dialog_state.hpp"

#include <algorithm>
#include <stdexcept>

namespace claimflow::engine {

bool consulted_before(const DialogState& a, const DialogState& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.created_turn != b.created_turn) return a.created_turn > b.created_turn;
    return a.name < b.name;
}

void push_state(StateQueue& queue, DialogState state) {
    if (state.lifetime && *state.lifetime < 1) {
        throw std::logic_error("state '" + state.name + "' pushed with lifetime < 1");
    }
    drop_state(queue, state.name);
    const auto at = std::upper_bound(queue.begin(), queue.end(), state, consulted_before);
    queue.insert(at, std::move(state));
}

bool drop_state(StateQueue& queue, std::string_view name) {
    const auto it = std::find_if(queue.begin(), queue.end(),
                                 [&](const DialogState& s) { return s.name == name; });
    if (it == queue.end()) return false;
    queue.erase(it);
    return true;
}

bool has_state(const StateQueue& queue, std::string_view name) {
    return find_state(queue, name) != nullptr;
}

const DialogState* find_state(const StateQueue& queue, std::string_view name) {
    for (const auto& s : queue) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

StateQueue tick_lifetimes(StateQueue queue, bool fallback_intent) {
    if (fallback_intent) return queue;
    for (auto& s : queue) {
        if (s.lifetime) --*s.lifetime;
    }
    std::erase_if(queue, [](const DialogState& s) { return s.lifetime && *s.lifetime <= 0; });
    return queue;
}

} // namespace claimflow::engine
