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

#include "eegcare/gateway/auth.hpp"

#include <openssl/crypto.h>

#include <cctype>

#include "eegcare/gateway/blob_store.hpp"

namespace eegcare::gateway {

namespace {

bool same(std::string_view a, std::string_view b) {
  return a.size() == b.size() && CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

}  // namespace

StaticTokenAuth::StaticTokenAuth(std::vector<ProviderCredential> providers, std::chrono::seconds ttl, Clock clock)
    : providers_(std::move(providers)), ttl_(ttl), clock_(clock ? std::move(clock) : [] {
        return std::chrono::system_clock::now();
      }) {}

std::optional<std::string> StaticTokenAuth::provider_for(std::string_view credential) const {
  std::optional<std::string> found;
  for (const auto& p : providers_) {
    if (!p.credential.empty() && same(p.credential, credential)) found = p.provider_id;
  }
  return found;
}

std::optional<IssuedToken> StaticTokenAuth::issue(std::string_view credential) {
  auto provider = provider_for(credential);
  if (!provider) return std::nullopt;
  IssuedToken t{random_hex(24), *provider, clock_() + ttl_};
  std::lock_guard lock(mu_);
  const auto now = clock_();
  std::erase_if(issued_, [&](const auto& kv) { return kv.second.expires_at <= now; });
  issued_.emplace(t.token, t);
  return t;
}

std::optional<Principal> StaticTokenAuth::authenticate(std::string_view token) {
  if (token.empty()) return std::nullopt;
  {
    std::lock_guard lock(mu_);
    auto it = issued_.find(token);
    if (it != issued_.end()) {
      if (it->second.expires_at <= clock_()) {
        issued_.erase(it);
        return std::nullopt;
      }
      return Principal{it->second.provider_id};
    }
  }
  if (auto provider = provider_for(token)) return Principal{*provider};
  return std::nullopt;
}

std::optional<std::string_view> bearer_token(std::string_view h) {
  constexpr std::string_view scheme = "Bearer ";
  if (h.size() <= scheme.size()) return std::nullopt;
  for (std::size_t i = 0; i < scheme.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(h[i])) != std::tolower(static_cast<unsigned char>(scheme[i]))) {
      return std::nullopt;
    }
  }
  auto t = h.substr(scheme.size());
  while (!t.empty() && t.front() == ' ') t.remove_prefix(1);
  while (!t.empty() && t.back() == ' ') t.remove_suffix(1);
  if (t.empty()) return std::nullopt;
  return t;
}

}  // namespace eegcare::gateway
