#include "claimflow/responder.hpp"

#include "claimflow/text.hpp"

namespace claimflow::responder {

std::vector<std::string> placeholders_in(std::string_view tmpl) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while ((pos = tmpl.find('{', pos)) != std::string_view::npos) {
        const auto end = tmpl.find('}', pos);
        if (end == std::string_view::npos) break;
        out.emplace_back(tmpl.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return out;
}

void TemplateSet::add(ResponseTemplate tmpl) {
    auto key = tmpl.key;
    templates_.insert_or_assign(std::move(key), std::move(tmpl));
}

const ResponseTemplate* TemplateSet::find(std::string_view key) const {
    auto it = templates_.find(key);
    return it == templates_.end() ? nullptr : &it->second;
}

std::vector<std::string> TemplateSet::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, _] : templates_) out.push_back(k);
    return out;
}

std::vector<std::string> TemplateSet::validate() const {
    std::vector<std::string> problems;
    auto check_strings = [&](const std::string& key, const ResponseTemplate& t,
                             const std::vector<std::string>& strings, const char* variant) {
        for (const auto& s : strings) {
            if (s.empty()) problems.push_back("template '" + key + "' has an empty " + variant + " string");
            for (const auto& ph : placeholders_in(s)) {
                if (!t.params.count(ph)) {
                    problems.push_back("template '" + key + "' uses undeclared placeholder {" + ph + "}");
                }
                if (ph == kFirstNameParam && !name_keys_.count(key)) {
                    problems.push_back("template '" + key + "' may not address the user by first name");
                }
            }
        }
    };
    for (const auto& [key, t] : templates_) {
        if (t.variants.formal.empty()) problems.push_back("template '" + key + "' lacks a formal variant");
        if (t.variants.informal.empty()) problems.push_back("template '" + key + "' lacks an informal variant");
        check_strings(key, t, t.variants.formal, "formal");
        check_strings(key, t, t.variants.informal, "informal");
        if (t.negative_mood) {
            check_strings(key, t, t.negative_mood->formal, "negative_mood formal");
            check_strings(key, t, t.negative_mood->informal, "negative_mood informal");
        }
    }
    return problems;
}

namespace {

// Braces in substituted values would read as placeholders downstream.
std::string sanitize(std::string_view value) {
    std::string out(value);
    for (auto& c : out) {
        if (c == '{') c = '(';
        if (c == '}') c = ')';
    }
    return out;
}

} // namespace

std::string Responder::render(std::string_view key, const UserProfile& profile,
                              const Params& params, std::uint64_t turn) const {
    const auto* t = templates_.find(key);
    if (t == nullptr) throw UnknownTemplateKey("unknown template key '" + std::string(key) + "'");

    const std::vector<std::string>* pool = &t->variants.for_formality(profile.formality);
    if (profile.mood == Mood::negative && t->negative_mood &&
        !t->negative_mood->for_formality(profile.formality).empty()) {
        pool = &t->negative_mood->for_formality(profile.formality);
    }
    if (pool->empty()) throw UnknownTemplateKey("template '" + std::string(key) + "' has no variant");
    const std::string& chosen = (*pool)[turn % pool->size()];

    Params values = params;
    if (t->params.count(std::string(kFirstNameParam)) && profile.first_name &&
        !values.count(std::string(kFirstNameParam))) {
        values.emplace(kFirstNameParam, *profile.first_name);
    }
    for (const auto& [name, required] : t->params) {
        if (required && !values.count(name)) {
            throw MissingRequiredParam("template '" + std::string(key) + "' requires {" + name + "}");
        }
    }

    std::string out;
    std::size_t pos = 0;
    while (pos < chosen.size()) {
        const auto open = chosen.find('{', pos);
        if (open == std::string::npos) {
            out.append(chosen, pos);
            break;
        }
        const auto close = chosen.find('}', open);
        if (close == std::string::npos) {
            out.append(chosen, pos);
            break;
        }
        out.append(chosen, pos, open - pos);
        const auto name = chosen.substr(open + 1, close - open - 1);
        if (auto it = values.find(name); it != values.end()) {
            out += sanitize(it->second);
        } else {
            // "Hallo {first_name}!" -> "Hallo!", "welcome, {first_name}!" -> "welcome!"
            if (!out.empty() && out.back() == ' ') out.pop_back();
            if (!out.empty() && out.back() == ',') out.pop_back();
        }
        pos = close + 1;
    }
    return out;
}

std::vector<messaging::ChatAction> Responder::realize(std::string_view key,
                                                      const UserProfile& profile,
                                                      const Params& params, std::uint64_t turn,
                                                      bool with_typing) const {
    std::vector<messaging::ChatAction> actions;
    if (with_typing) actions.push_back(messaging::ChatAction::typing_on());
    actions.push_back(messaging::ChatAction::send_text(render(key, profile, params, turn)));
    return actions;
}

FormalityCue detect_formality(std::string_view raw_text, Language language) {
    if (language != Language::de) return FormalityCue::unknown;
    bool informal = false;
    bool formal = false;
    for (const auto& tok : text::tokenize(raw_text)) {
        const auto& lw = tok.lower;
        if (lw == "du" || lw == "dich" || lw == "dir" || lw.rfind("dein", 0) == 0) informal = true;

        const bool formal_word =
            tok.text == "Sie" || tok.text == "Ihnen" || tok.text.rfind("Ihr", 0) == 0;
        if (!formal_word) continue;
        // Sentence-initial capitals say nothing about address.
        std::size_t i = tok.offset;
        while (i > 0 && (raw_text[i - 1] == ' ' || raw_text[i - 1] == '\t')) --i;
        const bool sentence_start =
            i == 0 || raw_text[i - 1] == '.' || raw_text[i - 1] == '!' || raw_text[i - 1] == '?';
        if (!sentence_start) formal = true;
    }
    if (informal == formal) return FormalityCue::unknown;
    return informal ? FormalityCue::informal : FormalityCue::formal;
}

} // namespace claimflow::responder
