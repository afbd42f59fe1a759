// claimflow: serve | chat | simulate | validate-content
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "claimflow/content_pack.hpp"
#include "claimflow/harness.hpp"
#include "claimflow/http.hpp"
#include "claimflow/service.hpp"

using namespace claimflow;

namespace {

int fail(const std::string& reason) {
    std::cerr << "claimflow: " << reason << '\n';
    return 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rule-based damage-claim chatbot"};
    app.require_subcommand(1);

    service::ServiceConfig config;
    std::string lang = "de";
    std::optional<double> threshold;
    std::string pack = config.content_pack_path.string();
    std::string storage = config.storage_path.string();

    auto add_common = [&](CLI::App* cmd, bool with_storage) {
        cmd->add_option("--pack", pack, "Content pack file or directory")->envname("CLAIMFLOW_PACK");
        cmd->add_option("--lang", lang, "Default conversation language (de|en)")
            ->envname("CLAIMFLOW_LANG")
            ->check(CLI::IsMember({"de", "en"}));
        cmd->add_option("--threshold", threshold, "Override the NLU fallback threshold")
            ->envname("CLAIMFLOW_THRESHOLD")
            ->check(CLI::Range(0.0, 1.0));
        if (with_storage) {
            cmd->add_option("--storage", storage, "Storage directory")->envname("CLAIMFLOW_STORAGE");
        }
    };

    auto* serve = app.add_subcommand("serve", "Run the HTTP endpoint");
    add_common(serve, true);
    std::string host = "0.0.0.0";
    serve->add_option("--port", config.port, "Listening port")->envname("CLAIMFLOW_PORT");
    serve->add_option("--host", host, "Listening address")->envname("CLAIMFLOW_HOST");

    auto* chat = app.add_subcommand("chat", "Console conversation");
    add_common(chat, true);
    std::string user = "console-user";
    chat->add_option("--user", user, "User id for the conversation");

    auto* simulate = app.add_subcommand("simulate", "Run scripted conversations");
    add_common(simulate, false);
    std::string scripts = "scripts";
    std::string report_path;
    std::string table_path;
    std::string reference = "2024-05-10T09:00:00Z";
    bool parallel = false;
    simulate->add_option("scripts", scripts, "Script file or directory");
    simulate->add_option("--report", report_path, "Write the machine-readable report here");
    simulate->add_option("--table", table_path, "Write the text table here instead of stdout");
    simulate->add_option("--reference-time", reference, "Fixed clock for the run (ISO-8601 UTC)");
    simulate->add_flag("--parallel", parallel, "Run scripts concurrently");

    auto* validate = app.add_subcommand("validate-content", "Check content packs");
    std::string validate_path = pack;
    validate->add_option("pack", validate_path, "Content pack file or directory")->envname("CLAIMFLOW_PACK");

    CLI11_PARSE(app, argc, argv);

    config.content_pack_path = pack;
    config.storage_path = storage;
    config.default_language = *language_from_string(lang);
    config.fallback_threshold = threshold;

    try {
        if (*validate) {
            const auto problems = content::validate_content(validate_path);
            for (const auto& p : problems) std::cerr << p << '\n';
            if (!problems.empty()) return 1;
            std::cout << "content OK: " << validate_path << '\n';
            return 0;
        }

        if (*serve) {
            auto svc = service::open_service(config);
            std::cerr << "claimflow: listening on " << host << ':' << config.port << '\n';
            if (!http::serve(*svc, host, config.port)) {
                return fail("cannot listen on " + host + ":" + std::to_string(config.port));
            }
            return 0;
        }

        if (*chat) {
            auto svc = service::open_service(config);
            service::console_loop(*svc, std::cin, std::cout, user);
            return 0;
        }

        if (*simulate) {
            const auto at = parse_timestamp(reference);
            if (!at) return fail("invalid --reference-time '" + reference + "'");
            auto packs = content::load_packs(config.content_pack_path);
            service::ServiceOptions options;
            options.default_language = config.default_language;
            options.fallback_threshold = config.fallback_threshold;
            options.clock = fixed_clock(*at);
            service::Service svc(std::move(packs), std::make_shared<store::MemoryStore>(), options);
            const auto report = harness::run_suite(harness::load_scripts(scripts), svc, parallel);
            if (!report_path.empty()) {
                std::ofstream out(report_path);
                if (!out) return fail("cannot write '" + report_path + "'");
                out << harness::to_json(report).dump(2) << '\n';
            }
            if (!table_path.empty()) {
                std::ofstream out(table_path);
                if (!out) return fail("cannot write '" + table_path + "'");
                out << harness::to_table(report);
            } else {
                std::cout << harness::to_table(report);
            }
            return report.all_passed() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        return fail(e.what());
    }
    return 0;
}
