#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "claimflow/context.hpp"
#include "claimflow/engine.hpp"
#include "claimflow/entities.hpp"

namespace claimflow::claims {

// States the questionnaire callbacks push and drop.
inline constexpr std::string_view kQuestionnaireState = "CLAIM_QUESTIONNAIRE";
inline constexpr std::string_view kConfirmingState = "USER_CONFIRMING_ANSWER";
inline constexpr std::string_view kCancelState = "CONFIRMING_CANCEL";
inline constexpr std::string_view kFreeTextState = "AWAITING_FREE_TEXT";

struct ClarificationChoice {
    std::string choice_id;
    std::string label;
    std::string canonical_value;
};

struct QuestionSpec {
    std::string id;
    std::string slot;
    std::string prompt_key;
    nlu::EntityKind entity_type = nlu::EntityKind::text;
    bool optional = false;
    std::string help_key;
    std::string example_key;
    // Present the choices as buttons together with the prompt.
    bool offer_choices = false;
    std::vector<ClarificationChoice> clarification_choices;

    const ClarificationChoice* choice(std::string_view choice_id) const;
};

struct Questionnaire {
    std::vector<QuestionSpec> questions;

    const QuestionSpec* by_slot(std::string_view slot) const;
    std::vector<std::string> required_slots() const;
};

struct ClaimRecord {
    std::string claim_id;
    std::string user_id;
    std::map<std::string, nlu::EntityValue> slots;
    Timestamp completed_at{};
    std::string transcript_ref;

    bool operator==(const ClaimRecord&) const = default;
};

nlohmann::json to_json(const ClaimRecord& record);
ClaimRecord claim_from_json(const nlohmann::json& j);

/// Throws std::logic_error when a required slot is missing or the imei slot
/// does not hold a validated IMEI.
void check_record(const ClaimRecord& record, const Questionnaire& questionnaire);

/// Claim-independent record check used by stores: the imei slot, when
/// present, must hold a validated IMEI.
void check_record_slots(const ClaimRecord& record);

bool claim_active(const store::UserContext& context);

/// First question whose slot is neither filled nor skipped.
const QuestionSpec* current_question(const Questionnaire& questionnaire,
                                     const store::UserContext& context);

/// Value of the kind the question expects, taken from the understanding.
std::optional<nlu::EntityValue> answer_value(const QuestionSpec& question,
                                             const nlu::MessageUnderstanding& understanding);

/// Canonical value of a choice converted to the question's entity kind.
std::optional<nlu::EntityValue> choice_value(const QuestionSpec& question,
                                             const ClarificationChoice& choice);

struct ClaimDomain {
    Questionnaire questionnaire;
    std::vector<nlu::PhoneModelEntry> catalog;
};

/// Resolves every callback id the content packs may reference: the
/// questionnaire flow (claim.*), profile updates (profile.*), mood and media
/// acknowledgements, the terminal repair, and "say:<template key>" for static
/// small-talk replies.
engine::CallbackResolver make_callbacks(std::shared_ptr<const ClaimDomain> domain);

/// Callback ids with a fixed meaning (excluding the "say:" family).
std::vector<std::string> known_callbacks();

/// Template keys the callbacks render, besides per-question keys.
std::vector<std::string> required_template_keys();

} // namespace claimflow::claims
