#pragma once

#include <memory>
#include <string>

#include "claimflow/service.hpp"

namespace httplib {
class Server;
}

namespace claimflow::http {

/// Routes:
///   POST /api/v1/messages            web wire message in, {actions:[...]} out
///   GET  /api/v1/context/{user_id}   read-only context digest
///   GET  /healthz
std::unique_ptr<httplib::Server> make_server(service::Service& service);

/// Blocks serving on host:port. Returns false when the port cannot be bound.
bool serve(service::Service& service, const std::string& host, int port);

} // namespace claimflow::http
