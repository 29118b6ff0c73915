// Copyright 2026 The Cirrus Authors.
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

#include <compare>
#include <functional>
#include <stdexcept>
#include <string>

namespace cirrus::store {

inline constexpr const char* kDefaultBucket = "cirrus";

struct ObjectKey {
  std::string bucket = kDefaultBucket;
  std::string key;

  ObjectKey() = default;
  ObjectKey(std::string k) : key(std::move(k)) {}  // NOLINT(google-explicit-constructor)
  ObjectKey(const char* k) : key(k) {}             // NOLINT(google-explicit-constructor)
  ObjectKey(std::string b, std::string k) : bucket(std::move(b)), key(std::move(k)) {}

  void validate() const {
    if (bucket.empty() || key.empty()) throw std::invalid_argument("object key needs a bucket and a key");
  }

  std::string str() const { return bucket + "/" + key; }

  auto operator<=>(const ObjectKey&) const = default;
};

}  // namespace cirrus::store

template <>
struct std::hash<cirrus::store::ObjectKey> {
  std::size_t operator()(const cirrus::store::ObjectKey& k) const noexcept {
    return std::hash<std::string>{}(k.bucket) * 31 + std::hash<std::string>{}(k.key);
  }
};
