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

#include <cstdint>

#include "cirrus/store/object_store.hpp"

namespace cirrus::format {

struct RangeRead {
  store::Bytes bytes;
  std::uint64_t object_size = 0;
};

/// Byte-range access to one object. Each read() is one GET.
class RangeReader {
 public:
  virtual ~RangeReader() = default;
  virtual RangeRead read(store::ByteRange range) = 0;
};

/// Reads from an in-memory buffer; counts calls. Used by tests and by the
/// reference executor, which never goes through the simulated network.
class BufferReader final : public RangeReader {
 public:
  explicit BufferReader(store::Payload payload) : payload_(std::move(payload)) {}

  RangeRead read(store::ByteRange range) override {
    ++reads_;
    auto [b, e] = range.resolve(payload_->size());
    return RangeRead{store::Bytes(payload_->begin() + static_cast<std::ptrdiff_t>(b),
                                  payload_->begin() + static_cast<std::ptrdiff_t>(e)),
                     payload_->size()};
  }

  std::size_t reads() const { return reads_; }

 private:
  store::Payload payload_;
  std::size_t reads_ = 0;
};

}  // namespace cirrus::format
