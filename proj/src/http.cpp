#include "claimflow/http.hpp"

#include <httplib.h>

namespace claimflow::http {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, json{{"error", message}});
}

} // namespace

std::unique_ptr<httplib::Server> make_server(service::Service& service) {
    auto server = std::make_unique<httplib::Server>();
    server->set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                 {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                 {"Access-Control-Allow-Headers", "Content-Type"}});

    server->Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server->Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, json{{"status", "ok"}});
    });

    server->Post("/api/v1/messages", [&service](const httplib::Request& req, httplib::Response& res) {
        json body;
        try {
            body = json::parse(req.body);
        } catch (const json::exception&) {
            error(res, 400, "request body is not valid JSON");
            return;
        }
        messaging::ChatMessage msg;
        try {
            msg = messaging::normalize_incoming(body, "web", service.now());
        } catch (const Error& e) {
            error(res, 400, e.what());
            return;
        }
        const auto actions = service.process_message(msg, messaging::kWebCapabilities);
        send_json(res, 200, messaging::actions_to_wire(actions));
    });

    server->Get(R"(/api/v1/context/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        const std::string user_id = req.matches[1];
        try {
            auto summary = service.context_summary(user_id);
            if (!summary) {
                error(res, 404, "unknown user '" + user_id + "'");
                return;
            }
            send_json(res, 200, *summary);
        } catch (const Error& e) {
            error(res, 503, e.what());
        }
    });
    return server;
}

bool serve(service::Service& service, const std::string& host, int port) {
    auto server = make_server(service);
    return server->listen(host, port);
}

} // namespace claimflow::http
