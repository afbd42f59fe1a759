#pragma once

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "claimflow/content_pack.hpp"
#include "claimflow/engine.hpp"
#include "claimflow/messaging.hpp"
#include "claimflow/nlu.hpp"
#include "claimflow/store.hpp"

namespace claimflow::service {

struct ServiceConfig {
    int port = 8080;
    std::filesystem::path content_pack_path = "content";
    std::filesystem::path storage_path = "data";
    Language default_language = Language::de;
    std::optional<double> fallback_threshold;
};

/// Everything needed to converse in one language.
struct Bot {
    content::ContentPack pack;
    std::shared_ptr<const claims::ClaimDomain> domain;
    nlu::Understander understander;
    engine::Engine engine;

    /// Throws ContentError when the pack's router or callbacks do not resolve.
    Bot(content::ContentPack pack, std::optional<double> threshold_override = std::nullopt);
};

struct ServiceOptions {
    Language default_language = Language::de;
    std::optional<double> fallback_threshold;
    Clock clock = system_clock();
    std::chrono::milliseconds timeout{10'000};
};

/// Optional observer for the pipeline; the harness uses it to inspect state.
struct TurnRecord {
    messaging::ChatMessage message;
    nlu::MessageUnderstanding understanding;
    std::string callback;
    engine::Tier tier = engine::Tier::fallback;
    store::UserContext context; // as saved
};

/// The message pipeline: load context, typing notification, understand,
/// plan and realize, save, reply. Messages of one user are processed one at
/// a time in arrival order; different users proceed concurrently.
class Service {
public:
    Service(std::vector<content::ContentPack> packs, std::shared_ptr<store::Store> store,
            ServiceOptions options = {});

    /// Never throws for runtime faults: they become an apology action and the
    /// context is left as it was.
    std::vector<messaging::ChatAction> process_message(const messaging::ChatMessage& message,
                                                       const messaging::Capabilities& caps,
                                                       TurnRecord* record = nullptr);

    /// Debug digest; nullopt for users never seen.
    std::optional<nlohmann::json> context_summary(const std::string& user_id);

    store::Store& store() { return *store_; }
    const Bot& bot(Language language) const;
    Language default_language() const { return options_.default_language; }
    Timestamp now() const { return options_.clock(); }

private:
    struct Gate {
        std::mutex mutex;
        std::condition_variable cv;
        std::uint64_t next_ticket = 0;
        std::uint64_t serving = 0;
        int holders = 0;
    };
    class Turn;

    std::vector<messaging::ChatAction> run(const messaging::ChatMessage& message,
                                           const messaging::Capabilities& caps, TurnRecord* record);
    std::vector<messaging::ChatAction> apology(const messaging::Capabilities& caps,
                                               std::optional<Language> language);

    std::map<Language, std::unique_ptr<Bot>> bots_;
    std::shared_ptr<store::Store> store_;
    ServiceOptions options_;
    std::mutex gates_mutex_;
    std::map<std::string, std::shared_ptr<Gate>> gates_;
};

/// Builds a service from the on-disk configuration (packs validated, file
/// store opened). Throws claimflow::Error with a one-line reason.
std::unique_ptr<Service> open_service(const ServiceConfig& config, Clock clock = system_clock());

// --- adapters ------------------------------------------------------------------

/// In-process adapter with every capability, used by the harness.
class LoopbackAdapter {
public:
    LoopbackAdapter(Service& service, std::string user_id);

    std::vector<messaging::ChatAction> say(std::string text, TurnRecord* record = nullptr);
    std::vector<messaging::ChatAction> choose(std::string choice_id, TurnRecord* record = nullptr);
    std::vector<messaging::ChatAction> send_media(std::string uri, TurnRecord* record = nullptr);

    const std::string& user_id() const { return user_id_; }

private:
    std::vector<messaging::ChatAction> send(messaging::Payload payload, TurnRecord* record);

    Service& service_;
    std::string user_id_;
};

/// REPL over text streams for one user. Lines are text messages; a bare
/// number answers the most recent choice list. Returns at end of input.
void console_loop(Service& service, std::istream& in, std::ostream& out, const std::string& user_id);

/// Text rendering of degraded actions as the console prints them.
std::string render_for_console(const messaging::ChatAction& action);

} // namespace claimflow::service
