#include "claimflow/entities.hpp"

namespace claimflow::nlu {

bool luhn_valid(std::string_view digits) {
    if (digits.empty()) return false;
    int sum = 0;
    bool twice = false;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
        if (*it < '0' || *it > '9') return false;
        int d = *it - '0';
        if (twice) {
            d *= 2;
            if (d > 9) d -= 9;
        }
        sum += d;
        twice = !twice;
    }
    return sum % 10 == 0;
}

ImeiVerdict validate_imei(std::string_view digits) {
    for (char c : digits) {
        if (c < '0' || c > '9') return {ImeiFault::non_digit};
    }
    if (digits.size() != 15) return {ImeiFault::wrong_length};
    if (!luhn_valid(digits)) return {ImeiFault::checksum_failed};
    return {};
}

std::optional<Imei> Imei::parse(std::string_view digits) {
    if (!validate_imei(digits).valid()) return std::nullopt;
    return Imei(std::string(digits));
}

EntityKind kind_of(const EntityValue& value) {
    return static_cast<EntityKind>(value.index());
}

std::string_view to_string(EntityKind kind) {
    switch (kind) {
    case EntityKind::datetime: return "datetime";
    case EntityKind::damage_type: return "damage_type";
    case EntityKind::phone_model: return "phone_model";
    case EntityKind::imei: return "imei";
    case EntityKind::phone_number: return "phone_number";
    case EntityKind::text: return "text";
    }
    return "text";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view s) {
    for (auto k : {EntityKind::datetime, EntityKind::damage_type, EntityKind::phone_model,
                   EntityKind::imei, EntityKind::phone_number, EntityKind::text}) {
        if (to_string(k) == s) return k;
    }
    return std::nullopt;
}

std::string_view to_string(DamageType type) {
    switch (type) {
    case DamageType::display_damage: return "display_damage";
    case DamageType::water_damage: return "water_damage";
    case DamageType::theft: return "theft";
    case DamageType::other: return "other";
    }
    return "other";
}

std::optional<DamageType> damage_type_from_string(std::string_view s) {
    for (auto t : {DamageType::display_damage, DamageType::water_damage, DamageType::theft,
                   DamageType::other}) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::string_view to_string(ImeiFault fault) {
    switch (fault) {
    case ImeiFault::wrong_length: return "wrong_length";
    case ImeiFault::non_digit: return "non_digit";
    case ImeiFault::checksum_failed: return "checksum_failed";
    }
    return "checksum_failed";
}

std::string display(const EntityValue& value) {
    struct Visitor {
        std::string operator()(const DateTimeValue& v) const {
            return v.granularity == Granularity::day ? format_date(v.at)
                                                     : format_timestamp(v.at);
        }
        std::string operator()(DamageType t) const { return std::string(to_string(t)); }
        std::string operator()(const PhoneModel& m) const { return m.name; }
        std::string operator()(const Imei& i) const { return i.digits(); }
        std::string operator()(const PhoneNumber& p) const { return p.digits; }
        std::string operator()(const TextValue& t) const { return t.text; }
    };
    return std::visit(Visitor{}, value);
}

namespace {

std::string_view to_string(Granularity g) {
    switch (g) {
    case Granularity::day: return "day";
    case Granularity::hour: return "hour";
    case Granularity::minute: return "minute";
    }
    return "day";
}

std::optional<Granularity> granularity_from_string(std::string_view s) {
    if (s == "day") return Granularity::day;
    if (s == "hour") return Granularity::hour;
    if (s == "minute") return Granularity::minute;
    return std::nullopt;
}

} // namespace

nlohmann::json to_json(const EntityValue& value) {
    nlohmann::json j;
    j["type"] = std::string(to_string(kind_of(value)));
    if (const auto* dt = std::get_if<DateTimeValue>(&value)) {
        j["value"] = format_timestamp(dt->at);
        j["granularity"] = std::string(to_string(dt->granularity));
    } else if (const auto* t = std::get_if<DamageType>(&value)) {
        j["value"] = std::string(to_string(*t));
    } else {
        j["value"] = display(value);
    }
    return j;
}

EntityValue entity_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j.contains("value") || !j["type"].is_string() ||
        !j["value"].is_string()) {
        throw Error("entity value must be an object with string 'type' and 'value'");
    }
    const auto type = j["type"].get<std::string>();
    const auto raw = j["value"].get<std::string>();
    const auto kind = entity_kind_from_string(type);
    if (!kind) throw Error("unknown entity type '" + type + "'");
    switch (*kind) {
    case EntityKind::datetime: {
        auto at = parse_timestamp(raw);
        auto g = granularity_from_string(j.value("granularity", "day"));
        if (!at || !g) throw Error("invalid datetime entity '" + raw + "'");
        return DateTimeValue{*at, *g};
    }
    case EntityKind::damage_type: {
        auto t = damage_type_from_string(raw);
        if (!t) throw Error("invalid damage type '" + raw + "'");
        return *t;
    }
    case EntityKind::phone_model: return PhoneModel{raw};
    case EntityKind::imei: {
        auto imei = Imei::parse(raw);
        if (!imei) throw Error("invalid IMEI '" + raw + "'");
        return *imei;
    }
    case EntityKind::phone_number: return PhoneNumber{raw};
    case EntityKind::text: return TextValue{raw};
    }
    throw Error("unknown entity type '" + type + "'");
}

} // namespace claimflow::nlu
