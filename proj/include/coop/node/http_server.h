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

#ifndef COOP_NODE_HTTP_SERVER_H_
#define COOP_NODE_HTTP_SERVER_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "absl/status/status.h"
#include "coop/node/node.h"

namespace coop::node {

using RequestHandler = std::function<ApiResponse(const ApiRequest&)>;

// Serves a RequestHandler over HTTP/1.1. Requests run on the server's
// worker threads, so the handler must be thread-safe.
class HttpServer {
 public:
  explicit HttpServer(RequestHandler handler);
  ~HttpServer();

  // Binds to "host:port"; port 0 picks a free one. Returns the port.
  absl::StatusOr<int> Bind(const std::string& address);
  // Serves files under `dir` at `prefix` for GET. Paths with no matching
  // file fall through to the handler.
  absl::Status MountStatic(const std::string& prefix,
                           const std::filesystem::path& dir);
  // Blocks until Stop().
  absl::Status Serve();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace coop::node

#endif  // COOP_NODE_HTTP_SERVER_H_
