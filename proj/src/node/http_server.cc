// Copyright 2026 The Coopnode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "coop/node/http_server.h"

#include <utility>

#include "absl/strings/numbers.h"
#include "coop/common/status.h"
#include "httplib.h"

namespace coop::node {

struct HttpServer::Impl {
  httplib::Server server;
  RequestHandler handler;
};

HttpServer::HttpServer(RequestHandler handler) : impl_(new Impl) {
  impl_->handler = std::move(handler);
  auto dispatch = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query.emplace(k, v);
    r.authorization = req.get_header_value("Authorization");
    r.operator_authorization =
        req.get_header_value(std::string(kOperatorAuthorizationHeader).c_str());
    r.body = req.body;
    ApiResponse out = impl_->handler(r);
    res.status = out.status;
    res.set_content(out.body, out.content_type.c_str());
  };
  const std::string any = ".*";
  impl_->server.Get(any, dispatch);
  impl_->server.Post(any, dispatch);
  impl_->server.Put(any, dispatch);
  impl_->server.Delete(any, dispatch);
}

HttpServer::~HttpServer() { Stop(); }

absl::StatusOr<int> HttpServer::Bind(const std::string& address) {
  const size_t colon = address.rfind(':');
  if (colon == std::string::npos) {
    return InvalidArgument("bad-listen-address", address);
  }
  const std::string host = address.substr(0, colon);
  int port = 0;
  if (!absl::SimpleAtoi(address.substr(colon + 1), &port) || port < 0 ||
      port > 65535) {
    return InvalidArgument("bad-listen-address", address);
  }
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host.c_str());
    if (bound < 0) return MakeError(absl::StatusCode::kUnavailable, "bind-failed", address);
    return bound;
  }
  if (!impl_->server.bind_to_port(host.c_str(), port)) {
    return MakeError(absl::StatusCode::kUnavailable, "bind-failed", address);
  }
  return port;
}

absl::Status HttpServer::MountStatic(const std::string& prefix,
                                     const std::filesystem::path& dir) {
  if (!impl_->server.set_mount_point(prefix, dir.string())) {
    return NotFound("static-dir", dir.string());
  }
  return absl::OkStatus();
}

absl::Status HttpServer::Serve() {
  if (!impl_->server.listen_after_bind()) {
    return MakeError(absl::StatusCode::kUnavailable, "listen-failed");
  }
  return absl::OkStatus();
}

void HttpServer::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace coop::node
