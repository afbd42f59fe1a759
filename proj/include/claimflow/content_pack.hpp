#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "claimflow/claims.hpp"
#include "claimflow/engine.hpp"
#include "claimflow/nlu.hpp"
#include "claimflow/responder.hpp"

namespace claimflow::content {

/// One language's worth of dialog data: NLU lexicon, router wiring,
/// questionnaire and response templates.
struct ContentPack {
    Language language = Language::en;
    std::string persona_name;
    nlu::Lexicon lexicon;
    std::shared_ptr<const engine::EmojiLexicon> emoji;
    std::vector<std::string> affirmation_intents;
    std::vector<std::string> negation_intents;
    engine::Router router;
    claims::Questionnaire questionnaire;
    responder::TemplateSet templates;
    std::string source; // file the pack came from, for diagnostics
};

/// Builds a pack from its document. Throws ContentError on schema
/// violations (wrong types, unknown handler kinds, bad regexes).
ContentPack parse_pack(const nlohmann::json& doc, std::string source = "<memory>");

/// Semantic checks that need the whole pack: callbacks resolve, referenced
/// intents, states and template keys exist, both formality variants are
/// present, questionnaire slots are unique. Returns one line per problem.
std::vector<std::string> validate_pack(const ContentPack& pack);

/// Reads and parses one pack file. Throws ContentPackMissing when the file is
/// absent, ContentError when it does not parse.
ContentPack load_pack_file(const std::filesystem::path& file);

/// Loads a single pack file or every *.json in a directory, validates each
/// pack and checks that all languages ship the same template keys.
/// Throws ContentError carrying the first problem.
std::vector<ContentPack> load_packs(const std::filesystem::path& path);

/// validate-content: every problem found under `path`, parse errors included.
std::vector<std::string> validate_content(const std::filesystem::path& path);

std::shared_ptr<const claims::ClaimDomain> make_domain(const ContentPack& pack);

} // namespace claimflow::content
