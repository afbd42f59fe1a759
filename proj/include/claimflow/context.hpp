#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "claimflow/dialog_state.hpp"
#include "claimflow/entities.hpp"
#include "claimflow/responder.hpp"

namespace claimflow::store {

inline constexpr int kSchemaVersion = 1;

enum class Direction { in, out };

struct TranscriptEntry {
    Direction direction = Direction::in;
    std::string summary;
    std::uint64_t turn = 0;

    bool operator==(const TranscriptEntry&) const = default;
};

struct PendingConfirmation {
    std::string slot;
    nlu::EntityValue value;

    bool operator==(const PendingConfirmation&) const = default;
};

/// Everything the bot remembers about one user between messages.
struct UserContext {
    std::string user_id;
    responder::UserProfile profile;
    engine::StateQueue active_states;
    std::map<std::string, nlu::EntityValue> slots;
    std::set<std::string> skipped_slots;
    std::optional<PendingConfirmation> pending_confirmation;
    std::uint64_t turn_counter = 0;
    std::uint32_t consecutive_fallbacks = 0;
    // Failed attempts at the current question; reset when a slot is committed.
    std::uint32_t question_failures = 0;
    std::optional<std::string> last_claim_id;
    std::vector<TranscriptEntry> transcript;

    bool operator==(const UserContext&) const = default;
};

UserContext fresh_context(std::string user_id, Language language);

/// Throws std::logic_error naming the first broken invariant (empty user id,
/// duplicate or expired states).
void check_invariants(const UserContext& context);

nlohmann::json to_json(const UserContext& context);
/// Throws claimflow::Error on schema violations or unknown schema_version.
UserContext context_from_json(const nlohmann::json& j);

/// Read-only digest for the debug endpoint.
nlohmann::json summarize(const UserContext& context);

} // namespace claimflow::store
