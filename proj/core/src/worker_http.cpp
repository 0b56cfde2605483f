// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

// The worker header pulls in Eigen, which must precede httplib's resolv.h.
#include "sgedit/worker.hpp"

#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "sgedit/error.hpp"

namespace sgedit {

std::vector<nlohmann::json> HttpWorkerTransport::send(const nlohmann::json& message) {
    httplib::Client client(base_url_);
    client.set_read_timeout(600, 0);
    auto res = client.Post("/v1/messages", message.dump(), "application/json");
    if (!res) throw Error(ErrorCode::BackendFailure, "worker unreachable", base_url_ + ": " + httplib::to_string(res.error()));
    if (res->status != 200) throw Error(ErrorCode::BackendFailure, "worker returned HTTP " + std::to_string(res->status), res->body);
    std::vector<nlohmann::json> lines;
    std::istringstream in(res->body);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw Error(ErrorCode::BackendFailure, "worker sent a malformed line", line);
        lines.push_back(std::move(j));
    }
    return lines;
}

}  // namespace sgedit
