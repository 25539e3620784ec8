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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eegcare::gateway {

using Bytes = std::vector<std::uint8_t>;

// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const std::uint8_t> data);
// Random lowercase hex of 2 * n_bytes characters.
std::string random_hex(std::size_t n_bytes);

// Content-addressed blobs under root/objects/ab/abcdef...; each write goes
// to root/tmp first and is renamed into place.
class BlobStore {
 public:
  explicit BlobStore(std::filesystem::path root);

  // Returns the content hash. Storing existing content is a no-op.
  std::string put(std::span<const std::uint8_t> data);
  std::optional<Bytes> get(const std::string& hash) const;
  bool contains(const std::string& hash) const;
  std::filesystem::path path_of(const std::string& hash) const;
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

}  // namespace eegcare::gateway
