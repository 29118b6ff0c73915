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

#include <bit>
#include <cstdint>
#include <cstring>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cirrus/errors.hpp"
#include "cirrus/format/row_batch.hpp"

namespace cirrus::format {

static_assert(std::endian::native == std::endian::little, "encoders assume a little-endian host");

using BytesView = std::span<const std::uint8_t>;

class ByteWriter {
 public:
  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    buffer_.insert(buffer_.end(), p, p + sizeof(T));
  }
  void put_bytes(BytesView bytes) { buffer_.insert(buffer_.end(), bytes.begin(), bytes.end()); }
  void put_string16(std::string_view s);
  void put_string32(std::string_view s);
  template <typename T>
  void patch(std::size_t at, T value) {
    std::memcpy(buffer_.data() + at, &value, sizeof(T));
  }

  std::size_t size() const { return buffer_.size(); }
  std::vector<std::uint8_t>& buffer() { return buffer_; }
  std::vector<std::uint8_t> take() { return std::move(buffer_); }

 private:
  std::vector<std::uint8_t> buffer_;
};

class ByteReader {
 public:
  explicit ByteReader(BytesView bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }
  BytesView get_bytes(std::size_t n) {
    need(n);
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  std::string get_string16();
  std::string get_string32();

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > bytes_.size() - pos_) throw CorruptObject("truncated object: needed " + std::to_string(n) + " more bytes");
  }
  BytesView bytes_;
  std::size_t pos_ = 0;
};

/// Assigns dense codes in first-appearance order.
class DictionaryBuilder {
 public:
  std::uint32_t code_for(std::string_view s);
  std::size_t size() const { return dictionary_->size(); }
  std::shared_ptr<const Dictionary> dictionary() const { return dictionary_; }

 private:
  std::shared_ptr<Dictionary> dictionary_ = std::make_shared<Dictionary>();
  std::unordered_map<std::string, std::uint32_t> codes_;
};

/// Column payload: optional null bitmap, then values. Strings are either
/// u32 codes into `dictionary` or u32 offsets[n+1] followed by the heap.
void encode_column(ByteWriter& out, const Column& column, bool nullable, DictionaryBuilder* dictionary);
Column decode_column(ByteReader& in, DataType type, bool nullable, std::size_t rows,
                     const std::shared_ptr<const Dictionary>& dictionary);

/// u32 row count followed by each column.
void encode_batch(ByteWriter& out, const RowBatch& batch, std::span<DictionaryBuilder* const> dictionaries);
RowBatch decode_batch(ByteReader& in, const Schema& schema,
                      std::span<const std::shared_ptr<const Dictionary>> dictionaries);

void encode_schema(ByteWriter& out, const Schema& schema, const std::vector<bool>& dictionary_encoded = {});
Schema decode_schema(ByteReader& in, std::vector<bool>* dictionary_encoded);

}  // namespace cirrus::format
