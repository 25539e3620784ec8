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

#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eegcare::gateway {

struct Principal {
  std::string provider_id;
};

// Pluggable bearer-token check.
class Authenticator {
 public:
  virtual ~Authenticator() = default;
  virtual std::optional<Principal> authenticate(std::string_view bearer_token) = 0;
};

struct ProviderCredential {
  std::string provider_id;
  std::string credential;
};

struct IssuedToken {
  std::string token;
  std::string provider_id;
  std::chrono::system_clock::time_point expires_at;
};

// Static provider credentials from configuration. A credential is itself a
// valid bearer token; POST /auth/token trades it for a short-lived one.
class StaticTokenAuth : public Authenticator {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  StaticTokenAuth(std::vector<ProviderCredential> providers, std::chrono::seconds ttl, Clock clock = {});

  std::optional<IssuedToken> issue(std::string_view credential);
  std::optional<Principal> authenticate(std::string_view bearer_token) override;

 private:
  std::optional<std::string> provider_for(std::string_view credential) const;

  std::vector<ProviderCredential> providers_;
  std::chrono::seconds ttl_;
  Clock clock_;
  std::mutex mu_;
  std::map<std::string, IssuedToken, std::less<>> issued_;
};

// Token from an "Authorization: Bearer <token>" value.
std::optional<std::string_view> bearer_token(std::string_view authorization);

}  // namespace eegcare::gateway
