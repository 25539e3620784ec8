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

// serve, upload

#include <httplib.h>

#include <csignal>
#include <cstdlib>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eegcare/codec/codec.hpp"
#include "eegcare/gateway/blob_store.hpp"
#include "eegcare/gateway/server.hpp"

namespace eegcare::cli {

namespace {

using nlohmann::json;

struct ServeOptions {
  std::string config;
  std::string listen;
  std::string data_dir;
  std::string questionnaires;
  std::vector<std::string> providers;
  std::vector<std::string> devices;
  std::uint64_t seed = 0;
};

int run_serve(const ServeOptions& o) {
  gateway::GatewayConfig c = o.config.empty() ? gateway::GatewayConfig{} : gateway::GatewayConfig::load(o.config);
  if (!o.listen.empty()) {
    const auto ep = net::Endpoint::parse(o.listen);
    c.host = ep.host;
    c.port = ep.port;
  }
  if (!o.data_dir.empty()) c.data_dir = o.data_dir;
  if (!o.questionnaires.empty()) c.questionnaire_dir = o.questionnaires;
  for (const auto& p : o.providers) {
    const auto colon = p.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == p.size()) {
      throw std::invalid_argument("--provider wants ID:CREDENTIAL, got " + p);
    }
    c.providers.push_back({p.substr(0, colon), p.substr(colon + 1)});
  }
  for (const auto& d : o.devices) c.devices.push_back(net::Endpoint::parse(d));
  if (c.providers.empty()) throw std::invalid_argument("no providers configured; nobody could sign in");

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  gateway::Gateway gw(c);
  const int port = gw.start();
  std::cout << "listening on http://" << c.host << ":" << port << "\n" << std::flush;
  int sig = 0;
  sigwait(&set, &sig);
  std::cout << "shutting down\n";
  gw.stop();
  return kOk;
}

struct UploadOptions {
  std::string file;
  std::string patient;
  std::string gateway = "http://127.0.0.1:8080";
  std::string token;
  std::string device;
  bool json = false;
  std::uint64_t seed = 0;
};

bool is_json_path(const std::string& p) { return p.size() > 5 && p.compare(p.size() - 5, 5, ".json") == 0; }

int run_upload(const UploadOptions& o) {
  std::string token = o.token;
  if (token.empty()) {
    if (const char* env = std::getenv("EEGCARE_TOKEN")) token = env;
  }
  if (token.empty()) throw std::invalid_argument("no token: pass --token or set EEGCARE_TOKEN");

  const auto bytes = codec::read_file_bytes(o.file);
  httplib::Client cli(o.gateway);
  cli.set_bearer_token_auth(token);
  cli.set_connection_timeout(5, 0);
  cli.set_read_timeout(120, 0);

  const bool response = is_json_path(o.file);
  std::string path = "/patients/" + o.patient + (response ? "/responses" : "/recordings");
  if (!response && !o.device.empty()) path += "?device=" + httplib::detail::encode_query_param(o.device);
  const std::string body(bytes.begin(), bytes.end());
  auto res = cli.Post(path, body, response ? "application/fhir+json" : "application/octet-stream");
  if (!res) {
    std::cerr << "error: cannot reach " << o.gateway << ": " << httplib::to_string(res.error()) << "\n";
    return kRuntime;
  }
  json reply = json::parse(res->body, nullptr, false);
  if (res->status != 201) {
    std::cerr << "error: gateway answered " << res->status;
    if (reply.is_object() && reply.contains("error")) std::cerr << ": " << reply.at("error").get<std::string>();
    std::cerr << "\n";
    if (reply.is_object() && reply.contains("details")) std::cerr << reply.at("details").dump(2) << "\n";
    const bool rejected = res->status == 400 || res->status == 404 || res->status == 409 || res->status == 422;
    return rejected ? kInvalid : kRuntime;
  }
  if (o.json) {
    std::cout << reply.dump(2) << "\n";
  }
  const json& artifact = response ? reply.at("artifact") : reply;
  const auto hash = artifact.at("hash").get<std::string>();
  if (!response && hash != gateway::sha256_hex(bytes)) {
    std::cerr << "error: stored hash " << hash << " does not match the local file\n";
    return kRuntime;
  }
  if (!o.json) {
    std::cout << "uploaded " << artifact.at("id").get<std::string>() << " sha256 " << hash << "\n";
    if (response && reply.at("risk").is_object()) {
      const auto& r = reply.at("risk");
      std::cout << "score " << r.at("score").get<int>() << ", " << r.at("tier").get<std::string>() << ", "
                << r.at("action").get<std::string>() << "\n";
    }
  }
  return kOk;
}

}  // namespace

Command add_serve(CLI::App& app) {
  auto o = std::make_shared<ServeOptions>();
  auto* sub = app.add_subcommand("serve", "Run the care gateway until interrupted");
  sub->add_option("--config", o->config, "Gateway config JSON")->check(CLI::ExistingFile);
  sub->add_option("--listen", o->listen, "host:port");
  sub->add_option("--data-dir", o->data_dir, "Database and blob directory");
  sub->add_option("--questionnaires", o->questionnaires, "Directory of questionnaire JSON files")
      ->check(CLI::ExistingDirectory);
  sub->add_option("--provider", o->providers, "ID:CREDENTIAL, repeatable");
  sub->add_option("--device", o->devices, "Device host:port offered to clients, repeatable");
  add_seed(sub, o->seed);
  return {sub, [o] { return run_serve(*o); }};
}

Command add_upload(CLI::App& app) {
  auto o = std::make_shared<UploadOptions>();
  auto* sub = app.add_subcommand("upload", "Send a recording or questionnaire response to the gateway");
  sub->add_option("file", o->file, "EDF/BDF recording, or a .json response")->required()->check(CLI::ExistingFile);
  sub->add_option("--patient", o->patient, "Patient id")->required();
  sub->add_option("--gateway", o->gateway, "Gateway base URL")->capture_default_str();
  sub->add_option("--token", o->token, "Bearer token; defaults to $EEGCARE_TOKEN");
  sub->add_option("--device", o->device, "Device name stored with a recording");
  sub->add_flag("--json", o->json);
  add_seed(sub, o->seed);
  return {sub, [o] { return run_upload(*o); }};
}

}  // namespace eegcare::cli
