#include "claimflow/nlu.hpp"

#include <algorithm>
#include <regex>

#include "claimflow/text.hpp"

namespace claimflow::nlu {

namespace {

constexpr std::string_view kSlotRefType = "slot_ref";
constexpr std::string_view kCaptureType = "capture";

struct PatternPart {
    std::string token;      // lowercased literal, or the parameter name
    bool placeholder = false;
};

std::vector<PatternPart> parse_pattern(std::string_view pattern) {
    std::vector<PatternPart> parts;
    std::size_t i = 0;
    while (i < pattern.size()) {
        while (i < pattern.size() && pattern[i] == ' ') ++i;
        std::size_t j = i;
        while (j < pattern.size() && pattern[j] != ' ') ++j;
        auto piece = pattern.substr(i, j - i);
        if (piece.size() > 2 && piece.front() == '{' && piece.back() == '}') {
            parts.push_back({std::string(piece.substr(1, piece.size() - 2)), true});
        } else {
            for (auto& tok : text::tokenize_lower(piece)) parts.push_back({std::move(tok), false});
        }
        i = j;
    }
    return parts;
}

struct PatternScore {
    double score = 0.0;
    std::optional<std::string> capture_param;
    std::optional<std::string> capture;
};

// Finds the contiguous literal run directly preceding a placeholder in the
// utterance and returns the index of the token after it.
std::optional<std::size_t> capture_index(const std::vector<PatternPart>& parts,
                                         std::size_t placeholder_at,
                                         std::span<const std::string> tokens) {
    std::size_t first = placeholder_at;
    while (first > 0 && !parts[first - 1].placeholder) --first;
    const std::size_t prefix_len = placeholder_at - first;
    if (prefix_len == 0) return std::nullopt;
    for (std::size_t start = 0; start + prefix_len < tokens.size(); ++start) {
        bool ok = true;
        for (std::size_t k = 0; k < prefix_len && ok; ++k) {
            ok = tokens[start + k] == parts[first + k].token;
        }
        if (ok) return start + prefix_len;
    }
    return std::nullopt;
}

PatternScore score_pattern(std::span<const std::string> tokens,
                           const std::set<std::string>& token_set,
                           const std::vector<PatternPart>& parts, const IntentDefinition& definition,
                           const ScoringInputs& inputs,
                           std::span<const text::Token> original = {}) {
    PatternScore result;
    if (parts.empty()) return result;

    const bool has_placeholder =
        std::any_of(parts.begin(), parts.end(), [](const auto& p) { return p.placeholder; });
    if (!has_placeholder && parts.size() == tokens.size() &&
        std::equal(parts.begin(), parts.end(), tokens.begin(),
                   [](const PatternPart& p, const std::string& t) { return p.token == t; })) {
        result.score = 1.0;
        return result;
    }

    auto is_stop = [&](const std::string& tok) {
        return inputs.stopwords != nullptr && inputs.stopwords->count(tok) > 0;
    };
    std::size_t content = 0;
    for (const auto& p : parts) {
        if (p.placeholder || !is_stop(p.token)) ++content;
    }
    const bool all_stop = content == 0;
    if (all_stop) content = parts.size();

    std::size_t present = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& p = parts[i];
        if (!p.placeholder) {
            if (!all_stop && is_stop(p.token)) continue;
            if (token_set.count(p.token)) ++present;
            continue;
        }
        const auto* spec = definition.parameter(p.token);
        if (spec != nullptr && spec->entity_type == kCaptureType) {
            if (auto at = capture_index(parts, i, tokens)) {
                ++present;
                result.capture_param = p.token;
                if (*at < original.size()) result.capture = original[*at].text;
            }
            continue;
        }
        if (inputs.present_parameters != nullptr && inputs.present_parameters->count(p.token)) {
            ++present;
        }
    }
    result.score = static_cast<double>(present) / static_cast<double>(content);
    return result;
}

std::optional<std::size_t> find_phrase(std::span<const std::string> tokens,
                                       const std::vector<std::string>& phrase) {
    if (phrase.empty() || phrase.size() > tokens.size()) return std::nullopt;
    for (std::size_t start = 0; start + phrase.size() <= tokens.size(); ++start) {
        if (std::equal(phrase.begin(), phrase.end(), tokens.begin() + start)) return start;
    }
    return std::nullopt;
}

// Earliest synonym occurrence wins; on equal position the longer phrase.
template <typename Key>
std::optional<Key> first_synonym(std::span<const std::string> tokens,
                                 const std::vector<std::pair<Key, std::vector<std::string>>>& table) {
    std::optional<Key> best;
    std::size_t best_pos = 0;
    std::size_t best_len = 0;
    for (const auto& [key, synonyms] : table) {
        for (const auto& syn : synonyms) {
            auto phrase = text::tokenize_lower(syn);
            auto pos = find_phrase(tokens, phrase);
            if (!pos) continue;
            if (!best || *pos < best_pos || (*pos == best_pos && phrase.size() > best_len)) {
                best = key;
                best_pos = *pos;
                best_len = phrase.size();
            }
        }
    }
    return best;
}

bool ascii_word(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

std::string digits_only(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c >= '0' && c <= '9') out += c;
    }
    return out;
}

struct NumberEntities {
    std::optional<Imei> imei;
    std::optional<PhoneNumber> phone;
};

void classify_number(std::string_view run, NumberEntities& out) {
    const auto digits = digits_only(run);
    if (!out.imei && digits.size() == 15) {
        if (auto imei = Imei::parse(digits)) {
            out.imei = *imei;
            return;
        }
    }
    if (!out.phone && digits.size() >= 6 && digits.size() <= 14) {
        const bool international = !run.empty() && run.front() == '+';
        out.phone = PhoneNumber{international ? "00" + digits : digits};
    }
}

NumberEntities extract_numbers(const std::string& masked) {
    static const std::regex run_re(R"(\+?\d+(?:[ \-/]\d+)*)");
    NumberEntities out;
    for (auto it = std::sregex_iterator(masked.begin(), masked.end(), run_re);
         it != std::sregex_iterator(); ++it) {
        const std::string run = it->str();
        NumberEntities whole;
        classify_number(run, whole);
        if (whole.imei || whole.phone) {
            if (!out.imei && whole.imei) out.imei = whole.imei;
            if (!out.phone && whole.phone) out.phone = whole.phone;
            continue;
        }
        // Fall back to space-separated chunks, e.g. a phone number and an
        // IMEI typed in one message.
        std::size_t i = 0;
        while (i < run.size()) {
            std::size_t j = run.find(' ', i);
            if (j == std::string::npos) j = run.size();
            classify_number(std::string_view(run).substr(i, j - i), out);
            i = j + 1;
        }
    }
    return out;
}

struct DateMatch {
    std::size_t pos = 0;
    std::size_t len = 0;
    DateTimeValue value;
};

std::optional<DateMatch> find_date(const std::string& lower, Language language,
                                   Timestamp reference_time) {
    using namespace std::chrono;
    const sys_days today = floor<days>(reference_time);
    std::optional<DateMatch> best;
    auto offer = [&](std::size_t pos, std::size_t len, sys_days day) {
        if (!best || pos < best->pos) {
            best = DateMatch{pos, len, DateTimeValue{Timestamp{day}, Granularity::day}};
        }
    };

    static const std::regex iso_re(R"((^|[^0-9])(\d{4})-(\d{2})-(\d{2})(?![0-9]))");
    static const std::regex dotted_re(R"((^|[^0-9])(\d{1,2})\.(\d{1,2})\.(\d{4})(?![0-9]))");
    std::smatch m;
    if (std::regex_search(lower, m, iso_re)) {
        const year_month_day ymd{year{std::stoi(m[2])}, month{unsigned(std::stoi(m[3]))},
                                 day{unsigned(std::stoi(m[4]))}};
        if (ymd.ok()) offer(m.position(2), m.length(0) - m.length(1), sys_days{ymd});
    }
    if (std::regex_search(lower, m, dotted_re)) {
        const year_month_day ymd{year{std::stoi(m[4])}, month{unsigned(std::stoi(m[3]))},
                                 day{unsigned(std::stoi(m[2]))}};
        if (ymd.ok()) offer(m.position(2), m.length(0) - m.length(1), sys_days{ymd});
    }

    static const std::regex en_today(R"(\btoday\b)");
    static const std::regex en_yesterday(R"(\byesterday\b)");
    static const std::regex en_ago(R"(\b(\d{1,3}) days? ago\b)");
    static const std::regex de_today(R"(\bheute\b)");
    static const std::regex de_yesterday(R"(\bgestern\b)");
    static const std::regex de_ago(R"(\bvor (\d{1,3}) tag(en)?\b)");
    const bool de = language == Language::de;
    if (std::regex_search(lower, m, de ? de_today : en_today)) {
        offer(m.position(0), m.length(0), today);
    }
    if (std::regex_search(lower, m, de ? de_yesterday : en_yesterday)) {
        offer(m.position(0), m.length(0), today - days{1});
    }
    if (std::regex_search(lower, m, de ? de_ago : en_ago)) {
        offer(m.position(0), m.length(0), today - days{std::stoi(m[1])});
    }
    return best;
}

struct Extracted {
    std::optional<DateTimeValue> datetime;
    std::optional<DamageType> damage_type;
    std::optional<std::string> phone_model;
    std::optional<Imei> imei;
    std::optional<PhoneNumber> phone_number;
    std::optional<std::string> slot_ref;

    std::optional<EntityValue> value_for(std::string_view entity_type) const {
        if (entity_type == "datetime" && datetime) return *datetime;
        if (entity_type == "damage_type" && damage_type) return *damage_type;
        if (entity_type == "phone_model" && phone_model) return PhoneModel{*phone_model};
        if (entity_type == "imei" && imei) return *imei;
        if (entity_type == "phone_number" && phone_number) return *phone_number;
        if (entity_type == kSlotRefType && slot_ref) return TextValue{*slot_ref};
        return std::nullopt;
    }
};

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
    return s;
}

} // namespace

bool is_known_entity_type(std::string_view entity_type) {
    return entity_kind_from_string(entity_type).has_value() || entity_type == kSlotRefType ||
           entity_type == kCaptureType;
}

const ParameterSpec* IntentDefinition::parameter(std::string_view param_name) const {
    for (const auto& p : parameters) {
        if (p.name == param_name) return &p;
    }
    return nullptr;
}

double score_intent(std::span<const std::string> tokens, const IntentDefinition& definition,
                    const ScoringInputs& inputs) {
    const std::set<std::string> token_set(tokens.begin(), tokens.end());
    double best = 0.0;
    for (const auto& pattern : definition.trigger_patterns) {
        best = std::max(best,
                        score_pattern(tokens, token_set, parse_pattern(pattern), definition, inputs)
                            .score);
    }
    return best;
}

std::optional<DateTimeValue> extract_datetime(std::string_view text, Language language,
                                              Timestamp reference_time) {
    auto match = find_date(text::to_lower(text), language, reference_time);
    if (!match) return std::nullopt;
    return match->value;
}

bool is_emoji(char32_t cp) {
    if (cp >= 0x1F3FB && cp <= 0x1F3FF) return false; // skin tone modifiers
    return (cp >= 0x1F300 && cp <= 0x1F5FF) || (cp >= 0x1F600 && cp <= 0x1F64F) ||
           (cp >= 0x1F680 && cp <= 0x1F6FF) || (cp >= 0x1F900 && cp <= 0x1F9FF) ||
           (cp >= 0x1FA70 && cp <= 0x1FAFF) || (cp >= 0x2600 && cp <= 0x27BF) || cp == 0x2B50 ||
           cp == 0x2B55;
}

std::vector<char32_t> extract_emojis(std::string_view text) {
    std::vector<char32_t> out;
    for (char32_t cp : text::decode_utf8(text)) {
        if (is_emoji(cp)) out.push_back(cp);
    }
    return out;
}

std::optional<std::string> find_phone_model(std::string_view text,
                                            std::span<const PhoneModelEntry> catalog) {
    const auto lower = text::to_lower(text);
    const PhoneModelEntry* best = nullptr;
    for (const auto& entry : catalog) {
        const auto name = text::to_lower(entry.name);
        if (name.empty()) continue;
        for (auto pos = lower.find(name); pos != std::string::npos;
             pos = lower.find(name, pos + 1)) {
            const bool left_ok = pos == 0 || !ascii_word(lower[pos - 1]);
            const auto end = pos + name.size();
            const bool right_ok = end == lower.size() || !ascii_word(lower[end]);
            if (left_ok && right_ok) {
                if (best == nullptr || entry.name.size() > best->name.size()) best = &entry;
                break;
            }
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->name;
}

std::vector<std::string> phone_model_candidates(std::string_view text,
                                                std::span<const PhoneModelEntry> catalog) {
    const auto tokens = text::tokenize_lower(text);
    const std::set<std::string> token_set(tokens.begin(), tokens.end());
    auto distinctive = [](const std::string& w) {
        return w.size() > 1 && !std::all_of(w.begin(), w.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    std::vector<std::string> out;
    for (const auto& entry : catalog) {
        auto words = text::tokenize_lower(entry.name);
        for (auto& b : text::tokenize_lower(entry.brand)) words.push_back(std::move(b));
        const bool hit = std::any_of(words.begin(), words.end(), [&](const std::string& w) {
            return distinctive(w) && token_set.count(w) > 0;
        });
        if (hit) out.push_back(entry.name);
    }
    return out;
}

std::optional<std::string> imei_like_digits(std::string_view text) {
    static const std::regex run_re(R"([0-9A-Za-z]+(?:[ \-/][0-9A-Za-z]+)*)");
    const std::string s(text);
    for (auto it = std::sregex_iterator(s.begin(), s.end(), run_re); it != std::sregex_iterator();
         ++it) {
        std::string compact;
        std::size_t digits = 0;
        for (char c : it->str()) {
            if (c == ' ' || c == '-' || c == '/') continue;
            compact += c;
            if (c >= '0' && c <= '9') ++digits;
        }
        if (digits >= 12 && compact.size() <= 17) return compact;
    }
    return std::nullopt;
}

Understander::Understander(Lexicon lexicon) : lexicon_(std::move(lexicon)) {
    if (lexicon_.intents.empty()) {
        throw ContentPackMissing("no intents loaded for language '" +
                                 std::string(to_string(lexicon_.language)) + "'");
    }
}

MessageUnderstanding Understander::understand(std::string_view raw, Timestamp reference_time) const {
    MessageUnderstanding result;
    result.raw_text = std::string(raw);
    result.language = lexicon_.language;
    result.emojis = extract_emojis(raw);
    result.intent = std::string(kFallbackIntent);

    const auto original = text::tokenize(raw);
    std::vector<std::string> tokens;
    tokens.reserve(original.size());
    for (const auto& t : original) tokens.push_back(t.lower);
    const std::set<std::string> token_set(tokens.begin(), tokens.end());

    Extracted found;
    std::string masked = text::to_lower(raw);
    if (auto date = find_date(masked, lexicon_.language, reference_time)) {
        found.datetime = date->value;
        masked.replace(date->pos, date->len, date->len, ' ');
    }
    auto numbers = extract_numbers(masked);
    found.imei = numbers.imei;
    found.phone_number = numbers.phone;
    found.damage_type = first_synonym<DamageType>(tokens, lexicon_.damage_synonyms);
    found.phone_model = find_phone_model(raw, lexicon_.phone_models);
    found.slot_ref = first_synonym<std::string>(tokens, lexicon_.slot_synonyms);

    const IntentDefinition* best_intent = nullptr;
    PatternScore best;
    for (const auto& intent : lexicon_.intents) {
        std::set<std::string> present;
        for (const auto& p : intent.parameters) {
            if (found.value_for(p.entity_type)) present.insert(p.name);
        }
        const ScoringInputs inputs{&lexicon_.stopwords, &present};
        for (const auto& pattern : intent.trigger_patterns) {
            auto s = score_pattern(tokens, token_set, parse_pattern(pattern), intent, inputs, original);
            if (best_intent == nullptr || s.score > best.score) {
                best = std::move(s);
                best_intent = &intent;
            }
        }
    }

    result.confidence = best.score;
    if (best_intent == nullptr || best.score < lexicon_.fallback_threshold) return result;

    result.intent = best_intent->name;
    for (const auto& p : best_intent->parameters) {
        if (p.entity_type == kCaptureType) {
            if (best.capture_param == p.name && best.capture) {
                result.parameters.emplace(p.name, TextValue{capitalize(*best.capture)});
            }
        } else if (auto v = found.value_for(p.entity_type)) {
            result.parameters.emplace(p.name, *v);
        }
    }
    return result;
}

MessageUnderstanding Understander::understand_choice(std::string_view choice_id) const {
    MessageUnderstanding result;
    result.intent = std::string(kChoiceIntent);
    result.confidence = 1.0;
    result.raw_text = std::string(choice_id);
    result.language = lexicon_.language;
    result.parameters.emplace(std::string(kChoiceParameter), TextValue{std::string(choice_id)});
    return result;
}

MessageUnderstanding Understander::understand_media(MediaKind kind) const {
    MessageUnderstanding result;
    result.intent = std::string(kMediaIntent);
    result.confidence = 1.0;
    result.language = lexicon_.language;
    result.media_kind = kind;
    return result;
}

} // namespace claimflow::nlu
