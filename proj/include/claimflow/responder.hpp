#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "claimflow/common.hpp"
#include "claimflow/messaging.hpp"

namespace claimflow::responder {

inline constexpr std::string_view kFirstNameParam = "first_name";

struct UserProfile {
    std::optional<std::string> first_name;
    Formality formality = Formality::formal;
    Mood mood = Mood::neutral;
    Language language = Language::de;

    bool operator==(const UserProfile&) const = default;
};

struct TemplateVariants {
    std::vector<std::string> formal;
    std::vector<std::string> informal;

    const std::vector<std::string>& for_formality(Formality f) const {
        return f == Formality::formal ? formal : informal;
    }
};

struct ResponseTemplate {
    std::string key;
    Language language = Language::en;
    // Declared placeholders; true = required.
    std::map<std::string, bool> params;
    TemplateVariants variants;
    // Softer phrasing used while the user's mood is negative.
    std::optional<TemplateVariants> negative_mood;
};

/// Placeholder names in order of appearance ("{x}" -> "x").
std::vector<std::string> placeholders_in(std::string_view tmpl);

class TemplateSet {
public:
    TemplateSet() = default;
    TemplateSet(Language language, std::set<std::string> name_keys)
        : language_(language), name_keys_(std::move(name_keys)) {}

    void add(ResponseTemplate tmpl);
    const ResponseTemplate* find(std::string_view key) const;
    bool contains(std::string_view key) const { return find(key) != nullptr; }
    std::vector<std::string> keys() const;
    Language language() const { return language_; }
    const std::set<std::string>& name_keys() const { return name_keys_; }

    /// Load-time checks: both formality variants present and non-empty, every
    /// placeholder declared, first-name only in name keys. Returns problems.
    std::vector<std::string> validate() const;

private:
    Language language_ = Language::en;
    std::set<std::string> name_keys_;
    std::map<std::string, ResponseTemplate, std::less<>> templates_;
};

using Params = std::map<std::string, std::string>;

class Responder {
public:
    explicit Responder(TemplateSet templates) : templates_(std::move(templates)) {}

    /// Picks the variant for the profile's formality (or the negative-mood
    /// override), rotates alternatives by turn and substitutes placeholders.
    /// Throws UnknownTemplateKey or MissingRequiredParam.
    std::string render(std::string_view key, const UserProfile& profile, const Params& params,
                       std::uint64_t turn) const;

    /// render() wrapped into actions, with a leading typing_on when requested.
    std::vector<messaging::ChatAction> realize(std::string_view key, const UserProfile& profile,
                                               const Params& params, std::uint64_t turn,
                                               bool with_typing = true) const;

    const TemplateSet& templates() const { return templates_; }

private:
    TemplateSet templates_;
};

enum class FormalityCue { informal, formal, unknown };

/// German du/Sie detection. Informal tokens anywhere (du, dich, dir, dein*);
/// formal tokens (Sie, Ihnen, Ihr*) only when capitalized mid-sentence.
/// Both or neither -> unknown. Always unknown for English.
FormalityCue detect_formality(std::string_view raw_text, Language language);

} // namespace claimflow::responder
