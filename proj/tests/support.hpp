#pragma once

#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "claimflow/content_pack.hpp"
#include "claimflow/harness.hpp"
#include "claimflow/service.hpp"
#include "claimflow/store.hpp"

namespace claimflow::testing {

inline const std::filesystem::path kContentDir = CLAIMFLOW_CONTENT_DIR;
inline const std::filesystem::path kScriptsDir = CLAIMFLOW_SCRIPTS_DIR;
inline const Timestamp kReferenceTime = *parse_timestamp("2024-05-10T09:00:00Z");

inline std::vector<content::ContentPack> packs() { return content::load_packs(kContentDir); }

inline std::unique_ptr<service::Service> make_service(std::shared_ptr<store::Store> store,
                                                      Language lang = Language::en,
                                                      std::vector<content::ContentPack> ps = packs()) {
    service::ServiceOptions options;
    options.default_language = lang;
    options.clock = fixed_clock(kReferenceTime);
    return std::make_unique<service::Service>(std::move(ps), std::move(store), options);
}

inline constexpr std::string_view kFormalMarker = "[F] ";
inline constexpr std::string_view kInformalMarker = "[I] ";

/// The shipped packs with every formal variant prefixed by kFormalMarker and
/// every informal one by kInformalMarker, so the register of any rendered
/// text can be read off its first characters.
inline std::vector<content::ContentPack> marker_packs() {
    std::vector<content::ContentPack> out;
    for (const char* name : {"de.json", "en.json"}) {
        std::ifstream in(kContentDir / name);
        auto doc = nlohmann::json::parse(in);
        auto mark = [](nlohmann::json& variants) {
            for (auto& v : variants["formal"]) v = std::string(kFormalMarker) + v.get<std::string>();
            for (auto& v : variants["informal"]) v = std::string(kInformalMarker) + v.get<std::string>();
        };
        for (auto& t : doc["templates"]) {
            mark(t["variants"]);
            if (t.contains("negative_mood")) {
                for (const char* f : {"formal", "informal"}) {
                    for (auto& v : t["negative_mood"][f]) {
                        v = std::string(f[0] == 'f' ? kFormalMarker : kInformalMarker) + v.get<std::string>();
                    }
                }
            }
        }
        out.push_back(content::parse_pack(doc, name));
    }
    return out;
}

/// A user talking to the service through the loopback adapter.
class Chat {
public:
    Chat(service::Service& svc, std::string user, Language lang) : svc_(svc), adapter_(svc, user) {
        svc.store().save_context(store::fresh_context(std::move(user), lang));
    }

    std::vector<messaging::ChatAction> say(const std::string& text) { return adapter_.say(text, &last); }
    std::vector<messaging::ChatAction> choose(const std::string& id) { return adapter_.choose(id, &last); }
    std::vector<messaging::ChatAction> media(const std::string& uri) { return adapter_.send_media(uri, &last); }

    const store::UserContext& context() const { return last.context; }

    service::TurnRecord last;

private:
    service::Service& svc_;
    service::LoopbackAdapter adapter_;
};

/// Concatenated text of every text or choices action.
inline std::string texts(const std::vector<messaging::ChatAction>& actions) {
    std::string out;
    for (const auto& a : actions) {
        if (a.text) out += *a.text + "\n";
    }
    return out;
}

inline bool has_kind(const std::vector<messaging::ChatAction>& actions, messaging::ActionKind kind) {
    for (const auto& a : actions) {
        if (a.kind == kind) return true;
    }
    return false;
}

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("claimflow-test-" + std::to_string(rd()) +
                                                           std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace claimflow::testing
