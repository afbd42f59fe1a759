#include "claimflow/content_pack.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "claimflow/text.hpp"

namespace claimflow::content {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ContentError(where + ": " + what);
}

const json& require(const json& j, const char* field, const std::string& where) {
    if (!j.is_object() || !j.contains(field)) bad(where, std::string("missing field '") + field + "'");
    return j.at(field);
}

std::string str(const json& j, const char* field, const std::string& where) {
    const auto& v = require(j, field, where);
    if (!v.is_string()) bad(where, std::string("field '") + field + "' must be a string");
    return v.get<std::string>();
}

std::string str_or(const json& j, const char* field, std::string fallback) {
    if (j.is_object() && j.contains(field) && j.at(field).is_string()) return j.at(field).get<std::string>();
    return fallback;
}

bool bool_or(const json& j, const char* field, bool fallback) {
    if (j.is_object() && j.contains(field) && j.at(field).is_boolean()) return j.at(field).get<bool>();
    return fallback;
}

std::vector<std::string> strings(const json& j, const std::string& where) {
    if (!j.is_array()) bad(where, "expected a list of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) bad(where, "expected a list of strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

std::optional<int> lifetime_of(const json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("lifetime") || j.at("lifetime").is_null()) return std::nullopt;
    if (!j.at("lifetime").is_number_integer()) bad(where, "lifetime must be an integer");
    return j.at("lifetime").get<int>();
}

nlu::IntentDefinition parse_intent(const json& j, std::size_t index) {
    const std::string where = "intents[" + std::to_string(index) + "]";
    nlu::IntentDefinition def;
    def.name = str(j, "name", where);
    def.trigger_patterns = strings(require(j, "trigger_patterns", where), where + ".trigger_patterns");
    if (j.contains("parameters")) {
        for (const auto& p : j.at("parameters")) {
            nlu::ParameterSpec spec;
            spec.name = str(p, "name", where + ".parameters");
            spec.entity_type = str(p, "entity_type", where + ".parameters");
            spec.required = bool_or(p, "required", false);
            def.parameters.push_back(std::move(spec));
        }
    }
    return def;
}

char32_t single_codepoint(const std::string& s, const std::string& where) {
    const auto cps = text::decode_utf8(s);
    if (cps.size() != 1) bad(where, "emoji entry '" + s + "' must be a single codepoint");
    return cps.front();
}

void parse_entities(const json& j, ContentPack& pack) {
    const std::string where = "entities";
    auto& lex = pack.lexicon;
    if (j.contains("stopwords")) {
        for (const auto& w : strings(j.at("stopwords"), where + ".stopwords")) {
            lex.stopwords.insert(text::to_lower(w));
        }
    }
    if (j.contains("damage_types")) {
        for (const auto& d : j.at("damage_types")) {
            const auto name = str(d, "type", where + ".damage_types");
            auto type = nlu::damage_type_from_string(name);
            if (!type) bad(where + ".damage_types", "unknown damage type '" + name + "'");
            lex.damage_synonyms.emplace_back(*type, strings(require(d, "synonyms", where), where + ".damage_types"));
        }
    }
    if (j.contains("phone_models")) {
        for (const auto& m : j.at("phone_models")) {
            lex.phone_models.push_back({str(m, "name", where + ".phone_models"), str_or(m, "brand", "")});
        }
    }
    if (j.contains("slot_refs")) {
        for (const auto& s : j.at("slot_refs")) {
            lex.slot_synonyms.emplace_back(str(s, "slot", where + ".slot_refs"),
                                           strings(require(s, "synonyms", where), where + ".slot_refs"));
        }
    }
    auto emoji = std::make_shared<engine::EmojiLexicon>();
    if (j.contains("emoji")) {
        const auto& e = j.at("emoji");
        if (e.contains("positive")) {
            for (const auto& s : strings(e.at("positive"), where + ".emoji.positive")) {
                emoji->positive.insert(single_codepoint(s, where + ".emoji.positive"));
            }
        }
        if (e.contains("negative")) {
            for (const auto& s : strings(e.at("negative"), where + ".emoji.negative")) {
                emoji->negative.insert(single_codepoint(s, where + ".emoji.negative"));
            }
        }
    }
    pack.emoji = std::move(emoji);
    if (j.contains("affirmation_intents")) {
        pack.affirmation_intents = strings(j.at("affirmation_intents"), where + ".affirmation_intents");
    }
    if (j.contains("negation_intents")) {
        pack.negation_intents = strings(j.at("negation_intents"), where + ".negation_intents");
    }
}

engine::Handler parse_handler(const json& j, const ContentPack& pack, const std::string& where) {
    const auto kind = str(j, "kind", where);
    if (kind == "intent") {
        engine::IntentHandler h;
        h.intent = str(j, "intent", where);
        if (j.contains("required_parameters")) {
            h.required_parameters = strings(j.at("required_parameters"), where + ".required_parameters");
        }
        return h;
    }
    if (kind == "affirmation") return engine::AffirmationHandler{pack.affirmation_intents};
    if (kind == "negation") return engine::NegationHandler{pack.negation_intents};
    if (kind == "media") return engine::MediaHandler{};
    if (kind == "emoji_sentiment") {
        const auto polarity = str(j, "polarity", where);
        auto s = sentiment_from_string(polarity);
        if (!s) bad(where, "unknown polarity '" + polarity + "'");
        return engine::EmojiSentimentHandler{*s, pack.emoji};
    }
    if (kind == "regex") {
        const auto target = str_or(j, "target", "raw_text");
        if (target != "raw_text" && target != "intent") bad(where, "unknown regex target '" + target + "'");
        try {
            return engine::RegexHandler::create(
                str(j, "pattern", where),
                target == "intent" ? engine::RegexTarget::intent : engine::RegexTarget::raw_text,
                bool_or(j, "ignore_case", false));
        } catch (const ContentError& e) {
            bad(where, e.what());
        }
    }
    bad(where, "unknown handler kind '" + kind + "'");
}

std::vector<engine::Rule> parse_rules(const json& list, const ContentPack& pack, const std::string& where) {
    if (!list.is_array()) bad(where, "expected a list of rules");
    std::vector<engine::Rule> rules;
    int order = 0;
    for (const auto& j : list) {
        const std::string at = where + "[" + std::to_string(order) + "]";
        engine::Rule rule;
        rule.handler = parse_handler(require(j, "handler", at), pack, at + ".handler");
        rule.callback = str(j, "callback", at);
        rule.declaration_order = order++;
        if (j.contains("emits")) {
            for (const auto& e : j.at("emits")) {
                rule.emits.push_back({str(e, "state", at + ".emits"), lifetime_of(e, at + ".emits")});
            }
        }
        if (j.contains("guard") && j.at("guard").contains("formality")) {
            const auto f = str(j.at("guard"), "formality", at + ".guard");
            rule.guard.formality = formality_from_string(f);
            if (!rule.guard.formality) bad(at + ".guard", "unknown formality '" + f + "'");
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

void parse_router(const json& doc, ContentPack& pack) {
    for (const auto& s : require(doc, "states", "pack")) {
        engine::StateDefinition def;
        def.name = str(s, "name", "states");
        def.priority = s.value("priority", 0);
        def.default_lifetime = lifetime_of(s, "states." + def.name);
        if (!pack.router.states.emplace(def.name, def).second) {
            bad("states", "state '" + def.name + "' declared twice");
        }
    }
    const auto& rules = require(doc, "rules", "pack");
    if (rules.contains("stateless")) pack.router.stateless_rules = parse_rules(rules.at("stateless"), pack, "rules.stateless");
    if (rules.contains("states")) {
        for (const auto& [name, list] : rules.at("states").items()) {
            pack.router.state_rules.emplace(name, parse_rules(list, pack, "rules.states." + name));
        }
    }
    pack.router.fallback_rules = parse_rules(require(rules, "fallback", "rules"), pack, "rules.fallback");
}

claims::QuestionSpec parse_question(const json& j, std::size_t index) {
    const std::string where = "questions[" + std::to_string(index) + "]";
    claims::QuestionSpec q;
    q.id = str(j, "id", where);
    q.slot = str(j, "slot", where);
    q.prompt_key = str(j, "prompt_key", where);
    const auto type = str(j, "entity_type", where);
    auto kind = nlu::entity_kind_from_string(type);
    if (!kind) bad(where, "unknown entity_type '" + type + "'");
    q.entity_type = *kind;
    q.optional = bool_or(j, "optional", false);
    q.help_key = str(j, "help_key", where);
    q.example_key = str(j, "example_key", where);
    q.offer_choices = bool_or(j, "offer_choices", false);
    if (j.contains("clarification_choices")) {
        for (const auto& c : j.at("clarification_choices")) {
            q.clarification_choices.push_back({str(c, "choice_id", where), str(c, "label", where),
                                               str(c, "canonical_value", where)});
        }
    }
    return q;
}

responder::TemplateVariants parse_variants(const json& j, const std::string& where) {
    responder::TemplateVariants v;
    if (j.contains("formal")) v.formal = strings(j.at("formal"), where + ".formal");
    if (j.contains("informal")) v.informal = strings(j.at("informal"), where + ".informal");
    return v;
}

void parse_templates(const json& doc, ContentPack& pack) {
    std::set<std::string> name_keys;
    if (doc.contains("name_keys")) {
        for (auto& k : strings(doc.at("name_keys"), "name_keys")) name_keys.insert(std::move(k));
    }
    pack.templates = responder::TemplateSet(pack.language, std::move(name_keys));
    std::set<std::string> seen;
    for (const auto& t : require(doc, "templates", "pack")) {
        responder::ResponseTemplate tmpl;
        tmpl.key = str(t, "key", "templates");
        const std::string where = "templates." + tmpl.key;
        if (!seen.insert(tmpl.key).second) bad(where, "declared twice");
        tmpl.language = pack.language;
        if (t.contains("params")) {
            for (const auto& [name, required] : t.at("params").items()) {
                if (!required.is_boolean()) bad(where, "params map names to required flags");
                tmpl.params.emplace(name, required.get<bool>());
            }
        }
        tmpl.variants = parse_variants(require(t, "variants", where), where + ".variants");
        if (t.contains("negative_mood")) {
            tmpl.negative_mood = parse_variants(t.at("negative_mood"), where + ".negative_mood");
        }
        pack.templates.add(std::move(tmpl));
    }
}

} // namespace

ContentPack parse_pack(const json& doc, std::string source) {
    try {
        if (!doc.is_object()) bad("pack", "document must be a mapping");
        ContentPack pack;
        pack.source = std::move(source);
        const auto lang = str(doc, "language", "pack");
        auto language = language_from_string(lang);
        if (!language) bad("pack", "unsupported language '" + lang + "'");
        pack.language = *language;
        pack.persona_name = str_or(doc, "persona_name", "");
        pack.lexicon.language = pack.language;
        if (doc.contains("fallback_threshold")) {
            if (!doc.at("fallback_threshold").is_number()) bad("pack", "fallback_threshold must be a number");
            pack.lexicon.fallback_threshold = doc.at("fallback_threshold").get<double>();
        }
        std::size_t i = 0;
        for (const auto& intent : require(doc, "intents", "pack")) {
            pack.lexicon.intents.push_back(parse_intent(intent, i++));
        }
        parse_entities(require(doc, "entities", "pack"), pack);
        parse_router(doc, pack);
        i = 0;
        for (const auto& q : require(doc, "questions", "pack")) {
            pack.questionnaire.questions.push_back(parse_question(q, i++));
        }
        parse_templates(doc, pack);
        return pack;
    } catch (const json::exception& e) {
        throw ContentError(std::string("malformed content pack: ") + e.what());
    }
}

namespace {

constexpr std::string_view kSayPrefix = "say:";

void check_intents(const ContentPack& pack, std::vector<std::string>& problems) {
    std::set<std::string> names;
    const auto& lex = pack.lexicon;
    if (lex.intents.empty()) problems.push_back("no intents declared");
    if (lex.fallback_threshold < 0.0 || lex.fallback_threshold > 1.0) {
        problems.push_back("fallback_threshold must lie in [0,1]");
    }
    for (const auto& intent : lex.intents) {
        if (!names.insert(intent.name).second) problems.push_back("intent '" + intent.name + "' declared twice");
        if (intent.name == nlu::kFallbackIntent || intent.name == nlu::kChoiceIntent ||
            intent.name == nlu::kMediaIntent) {
            problems.push_back("intent '" + intent.name + "' is reserved");
        }
        if (intent.trigger_patterns.empty()) {
            problems.push_back("intent '" + intent.name + "' has no trigger patterns");
        }
        std::set<std::string> params;
        for (const auto& p : intent.parameters) {
            if (!params.insert(p.name).second) {
                problems.push_back("intent '" + intent.name + "' declares parameter '" + p.name + "' twice");
            }
            if (!nlu::is_known_entity_type(p.entity_type)) {
                problems.push_back("intent '" + intent.name + "' parameter '" + p.name +
                                   "' has unknown entity_type '" + p.entity_type + "'");
            }
        }
        for (const auto& pattern : intent.trigger_patterns) {
            for (const auto& ph : responder::placeholders_in(pattern)) {
                if (!params.count(ph)) {
                    problems.push_back("intent '" + intent.name + "' pattern '" + pattern +
                                       "' uses undeclared parameter {" + ph + "}");
                }
            }
        }
    }
    auto check_family = [&](const std::vector<std::string>& family, const char* label) {
        if (family.empty()) problems.push_back(std::string(label) + " family is empty");
        for (const auto& i : family) {
            if (!names.count(i)) problems.push_back(std::string(label) + " family names unknown intent '" + i + "'");
        }
    };
    check_family(pack.affirmation_intents, "affirmation");
    check_family(pack.negation_intents, "negation");

    auto check_handlers = [&](const std::vector<engine::Rule>& rules) {
        for (const auto& r : rules) {
            if (const auto* h = std::get_if<engine::IntentHandler>(&r.handler)) {
                const bool reserved = h->intent == nlu::kChoiceIntent || h->intent == nlu::kMediaIntent ||
                                      h->intent == nlu::kFallbackIntent;
                if (!reserved && !names.count(h->intent)) {
                    problems.push_back("rule '" + r.callback + "' handles unknown intent '" + h->intent + "'");
                }
            }
        }
    };
    check_handlers(pack.router.stateless_rules);
    for (const auto& [_, rules] : pack.router.state_rules) check_handlers(rules);
    check_handlers(pack.router.fallback_rules);
}

void check_questions(const ContentPack& pack, std::vector<std::string>& problems) {
    const auto& questions = pack.questionnaire.questions;
    if (questions.empty()) problems.push_back("questionnaire is empty");
    std::set<std::string> slots;
    std::set<std::string> ids;
    bool has_model_question = false;
    for (const auto& q : questions) {
        if (!slots.insert(q.slot).second) problems.push_back("question slot '" + q.slot + "' is not unique");
        if (!ids.insert(q.id).second) problems.push_back("question id '" + q.id + "' is not unique");
        for (const auto* key : {&q.prompt_key, &q.help_key, &q.example_key}) {
            if (!pack.templates.contains(*key)) {
                problems.push_back("question '" + q.id + "' references missing template '" + *key + "'");
            }
        }
        if (q.entity_type == nlu::EntityKind::phone_model) {
            has_model_question = true;
            if (q.clarification_choices.size() < 2) {
                problems.push_back("phone-model question '" + q.id + "' needs clarification_choices");
            }
        }
        if (q.offer_choices && q.clarification_choices.size() < 2) {
            problems.push_back("question '" + q.id + "' offers fewer than two choices");
        }
        std::set<std::string> choice_ids;
        for (const auto& c : q.clarification_choices) {
            if (!choice_ids.insert(c.choice_id).second) {
                problems.push_back("question '" + q.id + "' repeats choice id '" + c.choice_id + "'");
            }
            if (!claims::choice_value(q, c)) {
                problems.push_back("question '" + q.id + "' choice '" + c.choice_id +
                                   "' has a canonical_value of the wrong type");
            }
        }
    }
    if (!has_model_question) problems.push_back("questionnaire lacks a phone-model question");
    for (const auto& slot : {"imei"}) {
        if (const auto* q = pack.questionnaire.by_slot(slot); q && q->entity_type != nlu::EntityKind::imei) {
            problems.push_back("slot 'imei' must expect entity_type imei");
        }
    }
}

void check_callbacks(const ContentPack& pack, std::vector<std::string>& problems) {
    const auto known = claims::known_callbacks();
    auto check = [&](const std::vector<engine::Rule>& rules) {
        for (const auto& r : rules) {
            if (r.callback.rfind(kSayPrefix, 0) == 0) {
                const auto key = r.callback.substr(kSayPrefix.size());
                if (!pack.templates.contains(key)) {
                    problems.push_back("callback '" + r.callback + "' names missing template '" + key + "'");
                }
            } else if (std::find(known.begin(), known.end(), r.callback) == known.end()) {
                problems.push_back("unknown callback '" + r.callback + "'");
            }
        }
    };
    check(pack.router.stateless_rules);
    for (const auto& [_, rules] : pack.router.state_rules) check(rules);
    check(pack.router.fallback_rules);
    for (auto& p : pack.router.check()) problems.push_back(std::move(p));
    for (const char* state : {"CLAIM_QUESTIONNAIRE", "USER_CONFIRMING_ANSWER", "CONFIRMING_CANCEL",
                              "AWAITING_FREE_TEXT"}) {
        if (!pack.router.states.count(state)) problems.push_back(std::string("state '") + state + "' not declared");
    }
}

} // namespace

std::vector<std::string> validate_pack(const ContentPack& pack) {
    std::vector<std::string> problems;
    check_intents(pack, problems);
    check_questions(pack, problems);
    check_callbacks(pack, problems);
    for (auto& p : pack.templates.validate()) problems.push_back(std::move(p));
    for (const auto& key : claims::required_template_keys()) {
        if (!pack.templates.contains(key)) problems.push_back("missing template '" + key + "'");
    }
    for (auto& p : problems) p = pack.source + ": " + p;
    return problems;
}

ContentPack load_pack_file(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ContentPackMissing("cannot read content pack '" + file.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ContentError(file.string() + ": " + e.what());
    }
    try {
        return parse_pack(doc, file.string());
    } catch (const ContentError& e) {
        throw ContentError(file.string() + ": " + e.what());
    }
}

namespace {

std::vector<std::filesystem::path> pack_files(const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw ContentPackMissing("content pack path '" + path.string() + "' does not exist");
    if (!fs::is_directory(path)) return {path};
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ContentPackMissing("no *.json content packs in '" + path.string() + "'");
    return files;
}

std::vector<std::string> cross_check(const std::vector<ContentPack>& packs) {
    std::vector<std::string> problems;
    std::set<Language> languages;
    for (const auto& p : packs) {
        if (!languages.insert(p.language).second) {
            problems.push_back(p.source + ": second pack for language '" + std::string(to_string(p.language)) + "'");
        }
    }
    for (std::size_t i = 1; i < packs.size(); ++i) {
        const auto a = packs[0].templates.keys();
        const auto b = packs[i].templates.keys();
        for (const auto& k : a) {
            if (!std::binary_search(b.begin(), b.end(), k)) {
                problems.push_back(packs[i].source + ": missing template '" + k + "' present in " + packs[0].source);
            }
        }
        for (const auto& k : b) {
            if (!std::binary_search(a.begin(), a.end(), k)) {
                problems.push_back(packs[0].source + ": missing template '" + k + "' present in " + packs[i].source);
            }
        }
    }
    return problems;
}

} // namespace

std::vector<ContentPack> load_packs(const std::filesystem::path& path) {
    std::vector<ContentPack> packs;
    for (const auto& file : pack_files(path)) {
        auto pack = load_pack_file(file);
        if (auto problems = validate_pack(pack); !problems.empty()) throw ContentError(problems.front());
        packs.push_back(std::move(pack));
    }
    if (auto problems = cross_check(packs); !problems.empty()) throw ContentError(problems.front());
    return packs;
}

std::vector<std::string> validate_content(const std::filesystem::path& path) {
    std::vector<std::string> problems;
    std::vector<ContentPack> packs;
    try {
        for (const auto& file : pack_files(path)) {
            try {
                auto pack = load_pack_file(file);
                for (auto& p : validate_pack(pack)) problems.push_back(std::move(p));
                packs.push_back(std::move(pack));
            } catch (const Error& e) {
                problems.emplace_back(e.what());
            }
        }
    } catch (const Error& e) {
        problems.emplace_back(e.what());
    }
    for (auto& p : cross_check(packs)) problems.push_back(std::move(p));
    return problems;
}

std::shared_ptr<const claims::ClaimDomain> make_domain(const ContentPack& pack) {
    auto domain = std::make_shared<claims::ClaimDomain>();
    domain->questionnaire = pack.questionnaire;
    domain->catalog = pack.lexicon.phone_models;
    return domain;
}

} // namespace claimflow::content
