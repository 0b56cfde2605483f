// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

// The service header pulls in Eigen, which must precede httplib's resolv.h.
#include "sgedit/service.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sgedit/error.hpp"

namespace sgedit {

struct HttpServer::Impl {
    httplib::Server server;
};

namespace {

void reply(httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body.dump(), "application/json");
}

// Empty bodies read as an empty object; malformed ones yield nullopt.
std::optional<nlohmann::json> body_json(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    auto j = nlohmann::json::parse(req.body, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
}

ApiResponse bad_body() {
    return {400, {{"error", {{"code", "BadRequest"}, {"message", "request body is not JSON"}, {"detail", ""}}}}};
}

}  // namespace

HttpServer::HttpServer(EditService& service) : impl_(std::make_unique<Impl>()) {
    auto& s = impl_->server;
    s.Post("/projects", [&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_json(req);
        reply(res, body ? service.create_project(*body) : bad_body());
    });
    s.Get(R"(/projects/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.get_project(req.matches[1]));
    });
    s.Post(R"(/projects/([^/]+)/edits)", [&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_json(req);
        reply(res, body ? service.preview_edit(req.matches[1], *body) : bad_body());
    });
    s.Post(R"(/projects/([^/]+)/edits/([^/]+)/confirm)", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.confirm_edit(req.matches[1], req.matches[2]));
    });
    s.Get(R"(/jobs/([^/]+))", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.get_job(req.matches[1]));
    });
    s.Post(R"(/projects/([^/]+)/evaluate)", [&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_json(req);
        reply(res, body ? service.evaluate(req.matches[1], *body) : bad_body());
    });
    s.Get(R"(/projects/([^/]+)/export)", [&service](const httplib::Request& req, httplib::Response& res) {
        reply(res, service.export_project(req.matches[1]));
    });
}

HttpServer::HttpServer(WorkerTransport& worker) : impl_(std::make_unique<Impl>()) {
    impl_->server.Post("/v1/messages", [&worker](const httplib::Request& req, httplib::Response& res) {
        const auto body = body_json(req);
        if (!body) {
            reply(res, bad_body());
            return;
        }
        res.set_content(reply_to_ndjson(worker.send(*body)), "application/x-ndjson");
    });
}

HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    auto& s = impl_->server;
    if (port == 0) {
        const int bound = s.bind_to_any_port(host);
        if (bound < 0) throw Error(ErrorCode::ConfigError, "could not bind", host);
        return bound;
    }
    if (!s.bind_to_port(host, port)) throw Error(ErrorCode::ConfigError, "could not bind", host + ":" + std::to_string(port));
    return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace sgedit
