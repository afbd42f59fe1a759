#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include <json.hpp>

#include "claimflow/common.hpp"

namespace claimflow::nlu {

enum class Granularity { day, hour, minute };

struct DateTimeValue {
    Timestamp at;
    Granularity granularity = Granularity::day;
    bool operator==(const DateTimeValue&) const = default;
};

enum class DamageType { display_damage, water_damage, theft, other };

struct PhoneModel {
    std::string name;
    bool operator==(const PhoneModel&) const = default;
};

struct PhoneNumber {
    std::string digits;
    bool operator==(const PhoneNumber&) const = default;
};

struct TextValue {
    std::string text;
    bool operator==(const TextValue&) const = default;
};

enum class ImeiFault { wrong_length, non_digit, checksum_failed };

struct ImeiVerdict {
    std::optional<ImeiFault> fault;
    bool valid() const { return !fault; }
};

/// Luhn mod-10 over a digit string: doubling every second digit from the right.
/// Returns false for empty input or any non-digit.
bool luhn_valid(std::string_view digits);

/// Valid iff exactly 15 ASCII digits whose Luhn checksum holds.
ImeiVerdict validate_imei(std::string_view digits);

/// A 15-digit device identifier that passed validate_imei. Only constructible
/// through parse(), so every instance is valid.
class Imei {
public:
    static std::optional<Imei> parse(std::string_view digits);
    const std::string& digits() const { return digits_; }
    bool operator==(const Imei&) const = default;

private:
    explicit Imei(std::string digits) : digits_(std::move(digits)) {}
    std::string digits_;
};

using EntityValue = std::variant<DateTimeValue, DamageType, PhoneModel, Imei, PhoneNumber, TextValue>;

enum class EntityKind { datetime, damage_type, phone_model, imei, phone_number, text };

EntityKind kind_of(const EntityValue& value);
std::string_view to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view s);
std::string_view to_string(DamageType type);
std::optional<DamageType> damage_type_from_string(std::string_view s);
std::string_view to_string(ImeiFault fault);

/// Human-readable rendering used in confirmation prompts and reports.
std::string display(const EntityValue& value);

nlohmann::json to_json(const EntityValue& value);
/// Throws claimflow::Error when the document does not describe a valid value
/// (including an IMEI that fails validation).
EntityValue entity_from_json(const nlohmann::json& j);

} // namespace claimflow::nlu
