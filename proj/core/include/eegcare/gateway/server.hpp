// Copyright 2026 The eegcare Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// HTTP service for patient records, recordings, questionnaire responses,
// analysis reports and live recording sessions. All payloads are JSON except
// recording up/download (application/octet-stream). Every route except
// GET /healthz and POST /auth/token needs "Authorization: Bearer <token>".

#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegcare/gateway/auth.hpp"
#include "eegcare/gateway/store.hpp"
#include "eegcare/net/socket.hpp"

namespace eegcare::gateway {

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  std::filesystem::path data_dir = "gateway-data";
  std::filesystem::path questionnaire_dir;  // empty: none registered
  std::vector<ProviderCredential> providers;
  std::vector<net::Endpoint> devices;  // offered by GET /devices
  std::chrono::seconds token_ttl{8 * 3600};
  std::size_t max_upload_bytes = 512u << 20;
  // Live view stream.
  double live_rate_hz = 10.0;
  double live_window_s = 5.0;
  std::size_t live_points = 500;
  int threads = 8;

  // Relative paths resolve against `base`.
  static GatewayConfig from_json(const nlohmann::json& j, const std::filesystem::path& base = {});
  static GatewayConfig load(const std::filesystem::path& path);
};

struct RouteInfo {
  std::string method;
  std::string pattern;  // ":name" marks a path parameter
  bool requires_auth = true;
};

class Gateway {
 public:
  explicit Gateway(GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds and serves on a background thread; returns the port.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();
  int port() const;

  Store& store();
  const GatewayConfig& config() const;

  static const std::vector<RouteInfo>& routes();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace eegcare::gateway
