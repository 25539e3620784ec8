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

#include "eegcare/gateway/server.hpp"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "eegcare/codec/codec.hpp"
#include "eegcare/gateway/analyzers.hpp"
#include "eegcare/gateway/blob_store.hpp"
#include "eegcare/recording/finalize.hpp"
#include "eegcare/recording/recorder.hpp"
#include "eegcare/screening/mchat.hpp"
#include "eegcare/sim/client.hpp"

namespace eegcare::gateway {

using nlohmann::json;
using httplib::Request;
using httplib::Response;
namespace fs = std::filesystem;

GatewayConfig GatewayConfig::from_json(const json& j, const fs::path& base) {
  GatewayConfig c;
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() || base.empty() ? fs::path(p) : base / p; };
  if (j.contains("listen")) {
    const auto ep = net::Endpoint::parse(j.at("listen").get<std::string>());
    c.host = ep.host;
    c.port = ep.port;
  }
  c.host = j.value("host", c.host);
  c.port = j.value("port", c.port);
  if (j.contains("data_dir")) c.data_dir = resolve(j.at("data_dir").get<std::string>());
  if (j.contains("questionnaires")) c.questionnaire_dir = resolve(j.at("questionnaires").get<std::string>());
  for (const auto& p : j.value("providers", json::array())) {
    c.providers.push_back({p.at("id").get<std::string>(), p.at("credential").get<std::string>()});
  }
  for (const auto& d : j.value("devices", json::array())) c.devices.push_back(net::Endpoint::parse(d.get<std::string>()));
  c.token_ttl = std::chrono::seconds(j.value("token_ttl_s", static_cast<std::int64_t>(c.token_ttl.count())));
  if (j.contains("max_upload_mb")) c.max_upload_bytes = j.at("max_upload_mb").get<std::size_t>() << 20;
  if (j.contains("live")) {
    const auto& l = j.at("live");
    c.live_rate_hz = l.value("rate_hz", c.live_rate_hz);
    c.live_window_s = l.value("window_s", c.live_window_s);
    c.live_points = l.value("points", c.live_points);
  }
  c.threads = j.value("threads", c.threads);
  if (c.live_rate_hz <= 0.0 || c.live_rate_hz > 10.0) throw std::invalid_argument("live.rate_hz must be in (0, 10]");
  return c;
}

GatewayConfig GatewayConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open gateway config " + path.string());
  return from_json(json::parse(in), fs::absolute(path).parent_path());
}

namespace {

void send_json(Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(Response& res, int status, const std::string& message, json details = nullptr) {
  json body{{"error", message}};
  if (!details.is_null()) body["details"] = std::move(details);
  send_json(res, status, body);
}

json parse_body(const Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("body is not valid JSON: ") + e.what());
  }
}

int status_of(StoreError::Code c) {
  switch (c) {
    case StoreError::Code::kNotFound:
      return 404;
    case StoreError::Code::kConflict:
      return 409;
    case StoreError::Code::kInvalid:
      return 422;
    case StoreError::Code::kPrecondition:
      return 412;
  }
  return 500;
}

json findings_json(const std::vector<codec::Finding>& findings) {
  json out = json::array();
  for (const auto& f : findings) {
    out.push_back({{"code", f.code}, {"field", f.field}, {"offset", f.offset}, {"message", f.message}});
  }
  return out;
}

std::string short_id(const std::string& canonical) {
  const auto pos = canonical.find_last_of(":/");
  return pos == std::string::npos ? canonical : canonical.substr(pos + 1);
}

std::string equipment_of(const std::string& recording_field) {
  std::istringstream in(recording_field);
  std::vector<std::string> tok;
  for (std::string t; in >> t;) tok.push_back(t);
  if (tok.size() >= 5 && tok[0] == "Startdate") return tok[4];
  return {};
}

json recording_metadata(const codec::SignalFileModel& m) {
  json labels = json::array(), rates = json::array();
  for (const auto& s : m.signals) {
    labels.push_back(s.label);
    rates.push_back(s.samples_per_record / m.header.record_duration);
  }
  int gaps = 0;
  for (const auto& a : m.annotations) gaps += !a.texts.empty() && a.texts[0] == recording::kGapAnnotation;
  const bool plus = m.header.continuity != codec::Continuity::kPlain;
  return {{"format", std::string(m.header.width == codec::SampleWidth::kEdf16 ? "EDF" : "BDF") + (plus ? "+" : "")},
          {"signals", m.signals.size()},
          {"labels", labels},
          {"rates", rates},
          {"records", m.header.record_count},
          {"duration_s", static_cast<double>(m.header.record_count) * m.header.record_duration},
          {"device", equipment_of(m.header.recording_id)},
          {"start", m.header.start_date + " " + m.header.start_time},
          {"annotations", m.annotations.size()},
          {"gaps", gaps}};
}

std::optional<std::int64_t> parse_if_match(const std::string& h) {
  if (h.empty()) return std::nullopt;
  std::string v = h;
  if (v.rfind("W/", 0) == 0) v = v.substr(2);
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
  try {
    std::size_t n = 0;
    const auto x = std::stoll(v, &n);
    if (n != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw std::invalid_argument("If-Match must be a patient version");
  }
}

std::string etag(std::int64_t version) { return "\"" + std::to_string(version) + "\""; }

struct LiveSession {
  std::string id;
  std::string patient_id;
  net::Endpoint device;
  std::unique_ptr<recording::Recorder> recorder;
  std::shared_ptr<recording::RecordingSession> session;
  std::thread finisher;

  std::mutex mu;
  std::condition_variable cv;
  std::vector<json> events;  // quality and state events, in order
  std::optional<std::string> recording_id;
  std::optional<std::string> error;
  bool started = false;
  bool done = false;

  void push(json e) {
    {
      std::lock_guard lock(mu);
      e["seq"] = events.size();
      events.push_back(std::move(e));
    }
    cv.notify_all();
  }

  json to_json() {
    json j{{"id", id}, {"patient_id", patient_id}, {"device", device.to_string()}};
    if (session) {
      j["state"] = recording::to_string(session->state());
      j["summary"] = recording::to_json(session->summary());
      j["profile"] = session->profile().name;
      j["config"] = device::to_json(session->config());
    }
    std::lock_guard lock(mu);
    j["recording_id"] = recording_id ? json(*recording_id) : json(nullptr);
    j["error"] = error ? json(*error) : json(nullptr);
    j["done"] = done;
    return j;
  }
};

}  // namespace

struct Gateway::Impl {
  using Handler = void (Impl::*)(const Request&, Response&);
  struct Route {
    const char* method;
    const char* pattern;
    bool auth;
    Handler handler;
  };
  static const std::vector<Route>& table();

  explicit Impl(GatewayConfig c)
      : config(std::move(c)),
        store(config.data_dir / "gateway.db"),
        blobs(config.data_dir / "blobs"),
        auth(config.providers, config.token_ttl),
        analyzers(AnalyzerRegistry::with_defaults()) {
    load_questionnaires();
    install();
  }

  ~Impl() { shutdown(); }

  GatewayConfig config;
  Store store;
  BlobStore blobs;
  StaticTokenAuth auth;
  AnalyzerRegistry analyzers;
  std::map<std::string, screening::QuestionnaireModel> questionnaires;  // by canonical id
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};
  int bound_port = -1;

  std::mutex sessions_mu;
  std::map<std::string, std::shared_ptr<LiveSession>> sessions;

  void load_questionnaires() {
    if (config.questionnaire_dir.empty()) return;
    for (const auto& entry : fs::directory_iterator(config.questionnaire_dir)) {
      if (entry.path().extension() != ".json") continue;
      std::ifstream in(entry.path());
      const auto doc = json::parse(in, nullptr, false);
      if (doc.is_discarded() || doc.value("resourceType", std::string()) != "Questionnaire") continue;
      auto m = screening::parse_questionnaire(doc);
      questionnaires[m.canonical] = std::move(m);
    }
  }

  void install() {
    server.new_task_queue = [n = config.threads] { return new httplib::ThreadPool(static_cast<std::size_t>(n)); };
    server.set_payload_max_length(config.max_upload_bytes);
    server.set_pre_routing_handler([this](const Request& req, Response& res) {
      for (const auto& r : table()) {
        if (!r.auth && req.method == r.method && req.path == r.pattern) return httplib::Server::HandlerResponse::Unhandled;
      }
      const auto header = req.get_header_value("Authorization");
      const auto token = bearer_token(header);
      if (!token || !auth.authenticate(*token)) {
        res.set_header("WWW-Authenticate", token ? "Bearer realm=\"eegcare\", error=\"invalid_token\""
                                                 : "Bearer realm=\"eegcare\"");
        send_error(res, 401, "unauthorized");
        return httplib::Server::HandlerResponse::Handled;
      }
      return httplib::Server::HandlerResponse::Unhandled;
    });
    for (const auto& r : table()) {
      auto h = [this, fn = r.handler](const Request& req, Response& res) { guarded(fn, req, res); };
      const std::string m = r.method;
      if (m == "GET") {
        server.Get(r.pattern, h);
      } else if (m == "POST") {
        server.Post(r.pattern, h);
      } else if (m == "PATCH") {
        server.Patch(r.pattern, h);
      } else if (m == "DELETE") {
        server.Delete(r.pattern, h);
      }
    }
    server.set_error_handler([](const Request&, Response& res) {
      if (res.body.empty()) send_error(res, res.status, httplib::status_message(res.status));
    });
  }

  void guarded(Handler fn, const Request& req, Response& res) {
    try {
      (this->*fn)(req, res);
    } catch (const StoreError& e) {
      send_error(res, status_of(e.code), e.what());
    } catch (const screening::ResponseError& e) {
      send_error(res, 422, "invalid response", e.problems);
    } catch (const screening::ScoringError& e) {
      send_error(res, 422, e.what(), e.missing);
    } catch (const recording::TransitionError& e) {
      send_error(res, 409, e.what());
    } catch (const codec::CodecError& e) {
      send_error(res, 422, "undecodable recording", findings_json(e.findings()));
    } catch (const net::TransportError& e) {
      send_error(res, 502, std::string("device unreachable: ") + e.what());
    } catch (const sim::DeviceError& e) {
      send_error(res, 502, std::string("device error: ") + e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("bad request: ") + e.what());
    } catch (const std::invalid_argument& e) {
      send_error(res, 400, e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, e.what());
    }
  }

  PatientRecord require_patient(const std::string& id) {
    auto p = store.get_patient(id);
    if (!p) throw StoreError(StoreError::Code::kNotFound, "no patient " + id);
    return *p;
  }

  StoredArtifact require_artifact(const std::string& id, ArtifactKind kind) {
    auto a = store.get_artifact(id);
    if (!a || a->kind != kind) throw StoreError(StoreError::Code::kNotFound, "no " + std::string(to_string(kind)) + " " + id);
    return *a;
  }

  // Blob content, checked against the recorded hash.
  Bytes load_blob(const StoredArtifact& a) {
    auto bytes = blobs.get(a.hash);
    if (!bytes) throw std::runtime_error("blob " + a.hash + " is missing");
    if (sha256_hex(*bytes) != a.hash) throw std::runtime_error("blob " + a.hash + " failed its integrity check");
    return std::move(*bytes);
  }

  // -- handlers ------------------------------------------------------------

  void healthz(const Request&, Response& res) { send_json(res, 200, {{"status", "ok"}}); }

  void auth_token(const Request& req, Response& res) {
    const auto body = parse_body(req);
    auto t = auth.issue(body.value("credential", std::string()));
    if (!t) {
      res.set_header("WWW-Authenticate", "Bearer realm=\"eegcare\"");
      send_error(res, 401, "unknown credential");
      return;
    }
    send_json(res, 200,
              {{"access_token", t->token},
               {"token_type", "Bearer"},
               {"expires_in", config.token_ttl.count()},
               {"provider", t->provider_id}});
  }

  static PatientPatch patch_from(const json& b) {
    PatientPatch p;
    if (b.contains("name")) p.name = b.at("name").get<std::string>();
    if (b.contains("birth_date")) {
      if (b.at("birth_date").is_null()) {
        p.birth_date = std::optional<std::chrono::year_month_day>();
      } else {
        auto d = parse_date(b.at("birth_date").get<std::string>());
        if (!d) throw StoreError(StoreError::Code::kInvalid, "birth_date must be YYYY-MM-DD");
        p.birth_date = d;
      }
    }
    if (b.contains("sex")) {
      const auto s = b.at("sex").get<std::string>();
      if (s.size() != 1) throw StoreError(StoreError::Code::kInvalid, "sex must be F, M or X");
      p.sex = s[0];
    }
    if (b.contains("archived")) p.archived = b.at("archived").get<bool>();
    return p;
  }

  void patients_list(const Request& req, Response& res) {
    json out = json::array();
    for (const auto& p : store.search_patients(req.get_param_value("q"), req.get_param_value("archived") == "1")) {
      out.push_back(to_json(p));
    }
    send_json(res, 200, out);
  }

  void patients_create(const Request& req, Response& res) {
    const auto b = parse_body(req);
    PatientRecord draft;
    draft.id = b.value("id", std::string());
    const auto patch = patch_from(b);
    draft.name = patch.name.value_or("");
    if (patch.birth_date) draft.birth_date = *patch.birth_date;
    draft.sex = patch.sex.value_or('X');
    const auto p = store.create_patient(draft);
    res.set_header("Location", "/patients/" + p.id);
    res.set_header("ETag", etag(p.version));
    send_json(res, 201, to_json(p));
  }

  void patient_get(const Request& req, Response& res) {
    const auto p = require_patient(req.path_params.at("id"));
    res.set_header("ETag", etag(p.version));
    send_json(res, 200, to_json(p));
  }

  void patient_patch(const Request& req, Response& res) {
    const auto& id = req.path_params.at("id");
    const auto b = parse_body(req);
    if (b.contains("id") && b.at("id") != id) throw StoreError(StoreError::Code::kInvalid, "patient id is immutable");
    const auto p = store.update_patient(id, patch_from(b), parse_if_match(req.get_header_value("If-Match")));
    res.set_header("ETag", etag(p.version));
    send_json(res, 200, to_json(p));
  }

  void patient_delete(const Request& req, Response& res) {
    store.delete_patient(req.path_params.at("id"));
    res.status = 204;
  }

  void patient_artifacts(const Request& req, Response& res) {
    const auto p = require_patient(req.path_params.at("id"));
    std::optional<ArtifactKind> kind;
    if (req.has_param("kind")) {
      kind = artifact_kind_from(req.get_param_value("kind"));
      if (!kind) throw std::invalid_argument("kind must be recording, response or report");
    }
    json out = json::array();
    for (const auto& a : store.artifacts_for(p.id, kind)) out.push_back(to_json(a));
    send_json(res, 200, out);
  }

  StoredArtifact store_recording(const std::string& patient_id, std::span<const std::uint8_t> bytes,
                                 const std::string& device_hint, json extra = json::object()) {
    const auto model = codec::decode_file(bytes);
    const auto findings = codec::validate(model);
    if (!findings.empty()) throw codec::CodecError(findings);
    StoredArtifact a;
    a.patient_id = patient_id;
    a.kind = ArtifactKind::kRecording;
    a.metadata = recording_metadata(model);
    if (!device_hint.empty()) a.metadata["device"] = device_hint;
    a.metadata.update(extra);
    a.size = static_cast<std::int64_t>(bytes.size());
    a.hash = blobs.put(bytes);
    return store.add_artifact(std::move(a));
  }

  void recording_upload(const Request& req, Response& res) {
    const auto p = require_patient(req.path_params.at("id"));
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(req.body.data()), req.body.size());
    try {
      const auto a = store_recording(p.id, bytes, req.get_param_value("device"));
      res.set_header("Location", "/recordings/" + a.id);
      send_json(res, 201, to_json(a));
    } catch (const codec::CodecError& e) {
      send_error(res, 422, "invalid recording", findings_json(e.findings()));
    }
  }

  void recording_download(const Request& req, Response& res) {
    const auto a = require_artifact(req.path_params.at("id"), ArtifactKind::kRecording);
    const auto bytes = load_blob(a);
    res.set_header("ETag", "\"" + a.hash + "\"");
    res.set_header("X-Content-SHA256", a.hash);
    res.set_content(std::string(bytes.begin(), bytes.end()), "application/octet-stream");
  }

  void artifact_get(const Request& req, Response& res) {
    auto a = store.get_artifact(req.path_params.at("id"));
    if (!a) throw StoreError(StoreError::Code::kNotFound, "no artifact " + req.path_params.at("id"));
    send_json(res, 200, to_json(*a));
  }

  void response_store(const Request& req, Response& res) {
    const auto p = require_patient(req.path_params.at("id"));
    const auto body = parse_body(req);
    const auto doc = screening::response_from_json(body);
    auto q = questionnaires.find(doc.questionnaire);
    if (q == questionnaires.end()) {
      send_error(res, 422, "unknown questionnaire " + doc.questionnaire);
      return;
    }
    if (doc.subject != p.id && doc.subject != "Patient/" + p.id) {
      send_error(res, 422, "response subject " + doc.subject + " is not patient " + p.id);
      return;
    }
    auto problems = screening::validate_response(q->second, doc, true);
    if (!problems.empty()) throw screening::ResponseError("invalid response", std::move(problems));
    StoredArtifact a;
    a.patient_id = p.id;
    a.kind = ArtifactKind::kResponse;
    a.metadata = {{"questionnaire", doc.questionnaire}, {"authored", screening::format_timestamp(doc.authored)}};
    json risk = nullptr;
    if (q->second.stage) {
      risk = screening::to_json(screening::score_mchat(q->second, doc));
      a.metadata["risk"] = risk;
    }
    const auto text = body.dump();
    const std::span<const std::uint8_t> bytes(reinterpret_cast<const std::uint8_t*>(text.data()), text.size());
    a.size = static_cast<std::int64_t>(bytes.size());
    a.hash = blobs.put(bytes);
    const auto stored = store.add_artifact(std::move(a));
    res.set_header("Location", "/responses/" + stored.id);
    send_json(res, 201, {{"artifact", to_json(stored)}, {"risk", risk}});
  }

  void response_get(const Request& req, Response& res) {
    const auto a = require_artifact(req.path_params.at("id"), ArtifactKind::kResponse);
    const auto bytes = load_blob(a);
    res.set_content(std::string(bytes.begin(), bytes.end()), "application/fhir+json");
  }

  void analysis_run(const Request& req, Response& res) {
    const auto rec = require_artifact(req.path_params.at("id"), ArtifactKind::kRecording);
    const auto& analyzer_id = req.path_params.at("analyzer");
    const auto* analyzer = analyzers.find(analyzer_id);
    if (!analyzer) {
      send_error(res, 404, "unknown analyzer " + analyzer_id);
      return;
    }
    const auto model = codec::decode_file(load_blob(rec));
    const auto results = analyzer->run(model);
    const auto produced = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    json report{{"recording", rec.id},
                {"analyzer", analyzer->id()},
                {"version", analyzer->version()},
                {"produced_at", screening::format_timestamp(produced)},
                {"channels", to_json(results)}};
    const auto text = report.dump();
    StoredArtifact a;
    a.patient_id = rec.patient_id;
    a.kind = ArtifactKind::kReport;
    a.parent_id = rec.id;
    a.metadata = {{"analyzer", analyzer->id()}, {"version", analyzer->version()}, {"recording", rec.id}};
    a.size = static_cast<std::int64_t>(text.size());
    a.hash = blobs.put(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    const auto stored = store.add_artifact(std::move(a));
    report["id"] = stored.id;
    res.set_header("Location", "/reports/" + stored.id);
    send_json(res, 201, report);
  }

  void recording_reports(const Request& req, Response& res) {
    const auto rec = require_artifact(req.path_params.at("id"), ArtifactKind::kRecording);
    json out = json::array();
    for (const auto& a : store.children_of(rec.id)) {
      if (a.kind == ArtifactKind::kReport) out.push_back(to_json(a));
    }
    send_json(res, 200, out);
  }

  void report_get(const Request& req, Response& res) {
    const auto a = require_artifact(req.path_params.at("id"), ArtifactKind::kReport);
    const auto bytes = load_blob(a);
    auto report = json::parse(bytes.begin(), bytes.end());
    report["id"] = a.id;
    send_json(res, 200, report);
  }

  void analyzers_list(const Request&, Response& res) {
    json out = json::array();
    for (const auto* a : analyzers.list()) out.push_back({{"id", a->id()}, {"version", a->version()}});
    send_json(res, 200, out);
  }

  void questionnaires_list(const Request&, Response& res) {
    json out = json::array();
    for (const auto& [url, m] : questionnaires) {
      out.push_back({{"id", short_id(url)},
                     {"url", url},
                     {"title", m.title},
                     {"stage", m.stage ? json(screening::to_string(*m.stage)) : json(nullptr)},
                     {"items", m.items.size()}});
    }
    send_json(res, 200, out);
  }

  void questionnaire_get(const Request& req, Response& res) {
    const auto& id = req.path_params.at("id");
    for (const auto& [url, m] : questionnaires) {
      if (short_id(url) == id || url == id) {
        send_json(res, 200, screening::serialize(m));
        return;
      }
    }
    send_error(res, 404, "no questionnaire " + id);
  }

  void devices_list(const Request&, Response& res) {
    json out = json::array();
    for (const auto& ep : config.devices) {
      json d{{"endpoint", ep.to_string()}};
      try {
        sim::DeviceClient client(ep);
        client.connect(std::chrono::milliseconds(300));
        d["profile"] = device::to_json(client.discover(std::chrono::milliseconds(1000)));
        d["reachable"] = true;
      } catch (const sim::DeviceError& e) {
        d["reachable"] = true;
        d["error"] = e.what();
      } catch (const std::exception& e) {
        d["reachable"] = false;
        d["error"] = e.what();
      }
      out.push_back(d);
    }
    send_json(res, 200, out);
  }

  std::shared_ptr<LiveSession> require_session(const std::string& id) {
    std::lock_guard lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw StoreError(StoreError::Code::kNotFound, "no session " + id);
    return it->second;
  }

  void sessions_list(const Request&, Response& res) {
    std::vector<std::shared_ptr<LiveSession>> all;
    {
      std::lock_guard lock(sessions_mu);
      for (const auto& [id, s] : sessions) all.push_back(s);
    }
    json out = json::array();
    for (const auto& s : all) out.push_back(s->to_json());
    send_json(res, 200, out);
  }

  void sessions_create(const Request& req, Response& res) {
    const auto b = parse_body(req);
    const auto patient = require_patient(b.at("patient_id").get<std::string>());
    if (patient.archived) throw StoreError(StoreError::Code::kConflict, "patient " + patient.id + " is archived");
    auto live = std::make_shared<LiveSession>();
    live->id = "ses-" + random_hex(8);
    live->patient_id = patient.id;
    live->device = net::Endpoint::parse(b.at("device").get<std::string>());
    recording::RecorderOptions opts;
    const double duration = b.value("duration_s", 0.0);
    if (duration < 0.0 || duration > 86400.0) throw std::invalid_argument("duration_s must be in [0, 86400]");
    opts.duration_ms = static_cast<std::uint32_t>(duration * 1000.0 + 0.5);
    if (b.contains("rate") || b.contains("channels")) {
      device::DeviceConfig want;
      want.rate = b.value("rate", 0);
      want.active_channels = b.value("channels", std::vector<std::string>());
      opts.requested = want;
    }
    std::weak_ptr<LiveSession> weak = live;
    opts.on_quality = [weak](const recording::QualityEvent& e) {
      if (auto s = weak.lock()) {
        s->push({{"type", "quality"}, {"event", recording::to_json(e, s->session->config().active_channels)}});
      }
    };
    opts.on_state = [weak](recording::SessionState st) {
      if (auto s = weak.lock()) s->push({{"type", "state"}, {"state", recording::to_string(st)}});
    };
    live->recorder = std::make_unique<recording::Recorder>(live->device, live->id, patient.id, std::move(opts));
    live->session = live->recorder->connect();
    {
      std::lock_guard lock(sessions_mu);
      sessions[live->id] = live;
    }
    res.set_header("Location", "/sessions/" + live->id);
    send_json(res, 201, live->to_json());
  }

  void session_get(const Request& req, Response& res) {
    send_json(res, 200, require_session(req.path_params.at("id"))->to_json());
  }

  void session_placement(const Request& req, Response& res) {
    auto s = require_session(req.path_params.at("id"));
    s->recorder->confirm_placement();
    send_json(res, 200, s->to_json());
  }

  void session_start(const Request& req, Response& res) {
    auto s = require_session(req.path_params.at("id"));
    {
      std::lock_guard lock(s->mu);
      if (s->started) throw recording::TransitionError(s->session->state(), recording::SessionEvent::kStartRecording);
    }
    s->recorder->start();
    {
      std::lock_guard lock(s->mu);
      s->started = true;
    }
    s->finisher = std::thread([this, s] { finish(s); });
    send_json(res, 200, s->to_json());
  }

  void finish(const std::shared_ptr<LiveSession>& s) {
    const auto result = s->recorder->wait();
    std::optional<std::string> recording_id, error = result.error;
    if (s->session->state() == recording::SessionState::kFinalizing) {
      try {
        const auto p = require_patient(s->patient_id);
        recording::FinalizeOptions fo;
        fo.patient = {p.id, p.sex, p.birth_date, p.name};
        const auto out = recording::finalize_session(*s->session, fo);
        json extra{{"session", s->id}, {"quality", out.metadata}};
        recording_id = store_recording(p.id, out.bytes, "", extra).id;
      } catch (const std::exception& e) {
        error = std::string("finalize failed: ") + e.what();
        if (recording::transition(s->session->state(), recording::SessionEvent::kAbort)) {
          s->session->abort(*error);
        }
      }
    }
    {
      std::lock_guard lock(s->mu);
      s->recording_id = recording_id;
      s->error = error;
    }
    s->push({{"type", "state"},
             {"state", recording::to_string(s->session->state())},
             {"recording_id", recording_id ? json(*recording_id) : json(nullptr)},
             {"error", error ? json(*error) : json(nullptr)}});
    {
      std::lock_guard lock(s->mu);
      s->done = true;
    }
    s->cv.notify_all();
  }

  void session_stop(const Request& req, Response& res) {
    auto s = require_session(req.path_params.at("id"));
    {
      std::lock_guard lock(s->mu);
      if (!s->started) throw recording::TransitionError(s->session->state(), recording::SessionEvent::kStopRecording);
    }
    s->recorder->stop();
    send_json(res, 202, s->to_json());
  }

  void session_abort(const Request& req, Response& res) {
    auto s = require_session(req.path_params.at("id"));
    const auto body = req.body.empty() ? json::object() : parse_body(req);
    const auto reason = body.value("reason", std::string("aborted by operator"));
    bool started;
    {
      std::lock_guard lock(s->mu);
      started = s->started;
    }
    if (started) {
      s->recorder->abort(reason);
    } else {
      s->session->abort(reason);
      s->push({{"type", "state"}, {"state", recording::to_string(s->session->state())}});
      std::lock_guard lock(s->mu);
      s->error = reason;
      s->done = true;
    }
    send_json(res, 202, s->to_json());
  }

  // Server-sent events: "view" frames at no more than live_rate_hz, plus
  // "quality" and "state" events as they happen; "end" closes the stream.
  void session_live(const Request& req, Response& res) {
    auto s = require_session(req.path_params.at("id"));
    struct Cursor {
      std::size_t next = 0;
      std::chrono::steady_clock::time_point last_view{};
      bool ended = false;
    };
    auto cur = std::make_shared<Cursor>();
    const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / config.live_rate_hz));
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [this, s, cur, period](std::size_t, httplib::DataSink& sink) {
      if (cur->ended || stopping) {
        sink.done();
        return true;
      }
      const auto due = cur->last_view + period;
      std::vector<json> pending;
      bool done;
      {
        std::unique_lock lock(s->mu);
        s->cv.wait_until(lock, due, [&] { return s->events.size() > cur->next || s->done || stopping; });
        // Keep the view cadence even when events arrive early.
        pending.assign(s->events.begin() + static_cast<std::ptrdiff_t>(cur->next), s->events.end());
        cur->next = s->events.size();
        done = s->done;
      }
      std::string out;
      for (const auto& e : pending) {
        out += "event: " + e.at("type").get<std::string>() + "\ndata: " + e.dump() + "\n\n";
      }
      const auto now = std::chrono::steady_clock::now();
      if (now >= due || done) {
        const auto frame = s->session->view(config.live_window_s, config.live_points);
        out += "event: view\ndata: " + recording::to_json(frame).dump() + "\n\n";
        cur->last_view = now;
      }
      if (done) {
        out += "event: end\ndata: " + s->to_json().dump() + "\n\n";
        cur->ended = true;
      }
      if (!out.empty() && !sink.write(out.data(), out.size())) return false;
      return true;
    });
  }

  void shutdown() {
    stopping = true;
    std::vector<std::shared_ptr<LiveSession>> all;
    {
      std::lock_guard lock(sessions_mu);
      for (const auto& [id, s] : sessions) all.push_back(s);
    }
    for (const auto& s : all) {
      s->cv.notify_all();
      bool started;
      {
        std::lock_guard lock(s->mu);
        started = s->started && !s->done;
      }
      if (started) s->recorder->abort("gateway shutting down");
    }
    server.stop();
    if (thread.joinable()) thread.join();
    for (const auto& s : all) {
      if (s->finisher.joinable()) s->finisher.join();
    }
  }
};

const std::vector<Gateway::Impl::Route>& Gateway::Impl::table() {
  static const std::vector<Route> t = {
      {"GET", "/healthz", false, &Impl::healthz},
      {"POST", "/auth/token", false, &Impl::auth_token},
      {"GET", "/patients", true, &Impl::patients_list},
      {"POST", "/patients", true, &Impl::patients_create},
      {"GET", "/patients/:id", true, &Impl::patient_get},
      {"PATCH", "/patients/:id", true, &Impl::patient_patch},
      {"DELETE", "/patients/:id", true, &Impl::patient_delete},
      {"GET", "/patients/:id/artifacts", true, &Impl::patient_artifacts},
      {"POST", "/patients/:id/recordings", true, &Impl::recording_upload},
      {"POST", "/patients/:id/responses", true, &Impl::response_store},
      {"GET", "/recordings/:id", true, &Impl::recording_download},
      {"GET", "/recordings/:id/reports", true, &Impl::recording_reports},
      {"POST", "/recordings/:id/analyses/:analyzer", true, &Impl::analysis_run},
      {"GET", "/responses/:id", true, &Impl::response_get},
      {"GET", "/reports/:id", true, &Impl::report_get},
      {"GET", "/artifacts/:id", true, &Impl::artifact_get},
      {"GET", "/analyzers", true, &Impl::analyzers_list},
      {"GET", "/questionnaires", true, &Impl::questionnaires_list},
      {"GET", "/questionnaires/:id", true, &Impl::questionnaire_get},
      {"GET", "/devices", true, &Impl::devices_list},
      {"GET", "/sessions", true, &Impl::sessions_list},
      {"POST", "/sessions", true, &Impl::sessions_create},
      {"GET", "/sessions/:id", true, &Impl::session_get},
      {"POST", "/sessions/:id/placement", true, &Impl::session_placement},
      {"POST", "/sessions/:id/start", true, &Impl::session_start},
      {"POST", "/sessions/:id/stop", true, &Impl::session_stop},
      {"POST", "/sessions/:id/abort", true, &Impl::session_abort},
      {"GET", "/sessions/:id/live", true, &Impl::session_live},
  };
  return t;
}

Gateway::Gateway(GatewayConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

Gateway::~Gateway() = default;

int Gateway::start() {
  auto& s = impl_->server;
  const auto& c = impl_->config;
  impl_->bound_port = c.port == 0 ? s.bind_to_any_port(c.host) : (s.bind_to_port(c.host, c.port) ? c.port : -1);
  if (impl_->bound_port < 0) throw net::TransportError("cannot bind gateway to " + c.host + ":" + std::to_string(c.port));
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
  return impl_->bound_port;
}

void Gateway::run() {
  auto& s = impl_->server;
  const auto& c = impl_->config;
  impl_->bound_port = c.port == 0 ? s.bind_to_any_port(c.host) : (s.bind_to_port(c.host, c.port) ? c.port : -1);
  if (impl_->bound_port < 0) throw net::TransportError("cannot bind gateway to " + c.host + ":" + std::to_string(c.port));
  s.listen_after_bind();
}

void Gateway::stop() { impl_->shutdown(); }

int Gateway::port() const { return impl_->bound_port; }

Store& Gateway::store() { return impl_->store; }

const GatewayConfig& Gateway::config() const { return impl_->config; }

const std::vector<RouteInfo>& Gateway::routes() {
  static const std::vector<RouteInfo> out = [] {
    std::vector<RouteInfo> r;
    for (const auto& t : Impl::table()) r.push_back({t.method, t.pattern, t.auth});
    return r;
  }();
  return out;
}

}  // namespace eegcare::gateway
