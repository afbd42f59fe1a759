#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "claimflow/common.hpp"
#include "claimflow/entities.hpp"

namespace claimflow::nlu {

// Reserved intents produced by the understander itself rather than by patterns.
inline constexpr std::string_view kFallbackIntent = "fallback";
inline constexpr std::string_view kChoiceIntent = "select_choice";
inline constexpr std::string_view kMediaIntent = "media_received";
inline constexpr std::string_view kChoiceParameter = "choice_id";

/// Extractors a parameter may name as its entity_type. The first six produce
/// the EntityValue variant of the same name; "slot_ref" and "capture" produce
/// TextValue.
///   slot_ref - a questionnaire slot named through the pack's slot synonyms
///   capture  - the token following the literal prefix of the matched pattern
bool is_known_entity_type(std::string_view entity_type);

struct ParameterSpec {
    std::string name;
    std::string entity_type;
    bool required = false;
};

/// Patterns are phrases; a token written as {name} is a placeholder for the
/// parameter of that name.
struct IntentDefinition {
    std::string name;
    std::vector<std::string> trigger_patterns;
    std::vector<ParameterSpec> parameters;

    const ParameterSpec* parameter(std::string_view param_name) const;
};

struct PhoneModelEntry {
    std::string name;
    std::string brand;
};

struct Lexicon {
    Language language = Language::en;
    std::vector<IntentDefinition> intents;
    std::set<std::string> stopwords;
    std::vector<std::pair<DamageType, std::vector<std::string>>> damage_synonyms;
    std::vector<PhoneModelEntry> phone_models;
    std::vector<std::pair<std::string, std::vector<std::string>>> slot_synonyms;
    double fallback_threshold = 0.5;
};

struct MessageUnderstanding {
    std::string intent;
    double confidence = 0.0;
    std::map<std::string, EntityValue> parameters;
    std::string raw_text;
    Language language = Language::en;
    std::optional<MediaKind> media_kind;
    std::vector<char32_t> emojis;

    bool is_fallback() const { return intent == kFallbackIntent; }
    bool has(std::string_view param) const { return parameters.count(std::string(param)) > 0; }
};

struct ScoringInputs {
    const std::set<std::string>* stopwords = nullptr;
    // Placeholders count as present when the parameter was extracted.
    const std::set<std::string>* present_parameters = nullptr;
};

/// 1.0 on an exact phrase match; otherwise the best pattern's fraction of
/// content tokens present in the utterance, order-insensitive.
double score_intent(std::span<const std::string> tokens, const IntentDefinition& definition,
                    const ScoringInputs& inputs = {});

std::optional<DateTimeValue> extract_datetime(std::string_view text, Language language,
                                              Timestamp reference_time);

std::vector<char32_t> extract_emojis(std::string_view text);
bool is_emoji(char32_t cp);

/// Catalog entry named in full inside the text (case-insensitive, word
/// bounded). When several names match the longest wins; none -> nullopt.
std::optional<std::string> find_phone_model(std::string_view text,
                                            std::span<const PhoneModelEntry> catalog);
/// Entries sharing a word (name part or brand) with the text. Used to build a
/// multiple-choice clarification when find_phone_model finds nothing.
std::vector<std::string> phone_model_candidates(std::string_view text,
                                                std::span<const PhoneModelEntry> catalog);

/// Digit runs (separators " -/" allowed inside) of 12 to 17 digits, for
/// reporting why an IMEI answer was rejected.
std::optional<std::string> imei_like_digits(std::string_view text);

class Understander {
public:
    /// Throws ContentPackMissing when the lexicon declares no intents.
    explicit Understander(Lexicon lexicon);

    MessageUnderstanding understand(std::string_view text, Timestamp reference_time) const;
    MessageUnderstanding understand_choice(std::string_view choice_id) const;
    MessageUnderstanding understand_media(MediaKind kind) const;

    const Lexicon& lexicon() const { return lexicon_; }

private:
    Lexicon lexicon_;
};

} // namespace claimflow::nlu
