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

#include "cirrus/format/codec.hpp"

#include <limits>

namespace cirrus::format {
namespace {

constexpr std::uint8_t kFlagNullable = 0x1;
constexpr std::uint8_t kFlagDictionary = 0x2;

void encode_validity(ByteWriter& out, const Column& column) {
  if (!column.has_nulls()) {
    out.put<std::uint8_t>(0);
    return;
  }
  out.put<std::uint8_t>(1);
  std::vector<std::uint8_t> bits((column.size() + 7) / 8, 0);
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (column.valid(r)) bits[r / 8] |= static_cast<std::uint8_t>(1u << (r % 8));
  }
  out.put_bytes(bits);
}

template <typename T>
void put_array(ByteWriter& out, const std::vector<T>& values) {
  auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
  out.put_bytes(BytesView(p, values.size() * sizeof(T)));
}

template <typename T>
std::vector<T> get_array(ByteReader& in, std::size_t n) {
  auto bytes = in.get_bytes(n * sizeof(T));
  std::vector<T> values(n);
  if (n > 0) std::memcpy(values.data(), bytes.data(), bytes.size());
  return values;
}

}  // namespace

void ByteWriter::put_string16(std::string_view s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) throw SchemaMismatch("name too long");
  put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
  put_bytes(BytesView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void ByteWriter::put_string32(std::string_view s) {
  put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
  put_bytes(BytesView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

std::string ByteReader::get_string16() {
  auto n = get<std::uint16_t>();
  auto b = get_bytes(n);
  return std::string(b.begin(), b.end());
}

std::string ByteReader::get_string32() {
  auto n = get<std::uint32_t>();
  auto b = get_bytes(n);
  return std::string(b.begin(), b.end());
}

std::uint32_t DictionaryBuilder::code_for(std::string_view s) {
  auto [it, inserted] = codes_.try_emplace(std::string(s), static_cast<std::uint32_t>(dictionary_->size()));
  if (inserted) dictionary_->emplace_back(s);
  return it->second;
}

void encode_column(ByteWriter& out, const Column& column, bool nullable, DictionaryBuilder* dictionary) {
  if (nullable) {
    encode_validity(out, column);
  } else if (column.has_nulls()) {
    throw SchemaMismatch("null value in non-nullable column");
  }
  switch (column.type()) {
    case DataType::kInt64:
      put_array(out, column.int64s());
      return;
    case DataType::kFloat64:
      put_array(out, column.float64s());
      return;
    case DataType::kDate32:
      put_array(out, column.date32s());
      return;
    case DataType::kString:
      break;
  }
  const std::size_t n = column.size();
  if (dictionary != nullptr) {
    std::vector<std::uint32_t> codes(n);
    for (std::size_t r = 0; r < n; ++r) codes[r] = dictionary->code_for(column.string_at(r));
    put_array(out, codes);
    return;
  }
  std::vector<std::uint32_t> offsets(n + 1, 0);
  std::uint64_t heap = 0;
  for (std::size_t r = 0; r < n; ++r) {
    heap += column.string_at(r).size();
    if (heap > std::numeric_limits<std::uint32_t>::max()) throw SchemaMismatch("string heap exceeds 4 GiB");
    offsets[r + 1] = static_cast<std::uint32_t>(heap);
  }
  put_array(out, offsets);
  for (std::size_t r = 0; r < n; ++r) {
    auto s = column.string_at(r);
    out.put_bytes(BytesView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }
}

Column decode_column(ByteReader& in, DataType type, bool nullable, std::size_t rows,
                     const std::shared_ptr<const Dictionary>& dictionary) {
  std::vector<std::uint8_t> validity;
  if (nullable) {
    auto has_nulls = in.get<std::uint8_t>();
    if (has_nulls > 1) throw CorruptObject("bad null flag");
    if (has_nulls) {
      auto bits = in.get_bytes((rows + 7) / 8);
      validity.resize(rows);
      for (std::size_t r = 0; r < rows; ++r) validity[r] = (bits[r / 8] >> (r % 8)) & 1u;
    }
  }
  switch (type) {
    case DataType::kInt64:
      return Column(type, get_array<std::int64_t>(in, rows), std::move(validity));
    case DataType::kFloat64:
      return Column(type, get_array<double>(in, rows), std::move(validity));
    case DataType::kDate32:
      return Column(type, get_array<std::int32_t>(in, rows), std::move(validity));
    case DataType::kString:
      break;
  }
  if (dictionary) {
    auto codes = get_array<std::uint32_t>(in, rows);
    for (auto c : codes) {
      if (c >= dictionary->size()) throw CorruptObject("dictionary code out of range");
    }
    return Column(type, DictStrings{std::move(codes), dictionary}, std::move(validity));
  }
  auto offsets = get_array<std::uint32_t>(in, rows + 1);
  if (offsets.front() != 0) throw CorruptObject("string offsets must start at 0");
  for (std::size_t r = 0; r < rows; ++r) {
    if (offsets[r + 1] < offsets[r]) throw CorruptObject("string offsets must be non-decreasing");
  }
  auto heap = in.get_bytes(offsets.back());
  std::vector<std::string> strings(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    strings[r].assign(reinterpret_cast<const char*>(heap.data()) + offsets[r], offsets[r + 1] - offsets[r]);
  }
  return Column(type, std::move(strings), std::move(validity));
}

void encode_batch(ByteWriter& out, const RowBatch& batch, std::span<DictionaryBuilder* const> dictionaries) {
  if (batch.num_rows() > std::numeric_limits<std::uint32_t>::max()) throw SchemaMismatch("batch too large");
  out.put<std::uint32_t>(static_cast<std::uint32_t>(batch.num_rows()));
  for (std::size_t c = 0; c < batch.num_columns(); ++c) {
    encode_column(out, batch.column(c), batch.schema().field(c).nullable, dictionaries.empty() ? nullptr : dictionaries[c]);
  }
}

RowBatch decode_batch(ByteReader& in, const Schema& schema,
                      std::span<const std::shared_ptr<const Dictionary>> dictionaries) {
  auto rows = in.get<std::uint32_t>();
  std::vector<Column> cols;
  cols.reserve(schema.size());
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& f = schema.field(c);
    cols.push_back(decode_column(in, f.type, f.nullable, rows, dictionaries.empty() ? nullptr : dictionaries[c]));
  }
  return RowBatch(schema, std::move(cols));
}

void encode_schema(ByteWriter& out, const Schema& schema, const std::vector<bool>& dictionary_encoded) {
  out.put<std::uint16_t>(static_cast<std::uint16_t>(schema.size()));
  for (std::size_t c = 0; c < schema.size(); ++c) {
    const auto& f = schema.field(c);
    std::uint8_t flags = (f.nullable ? kFlagNullable : 0) |
                         (!dictionary_encoded.empty() && dictionary_encoded[c] ? kFlagDictionary : 0);
    out.put<std::uint8_t>(static_cast<std::uint8_t>(f.type));
    out.put<std::uint8_t>(flags);
    out.put_string16(f.name);
  }
}

Schema decode_schema(ByteReader& in, std::vector<bool>* dictionary_encoded) {
  auto n = in.get<std::uint16_t>();
  std::vector<Field> fields;
  fields.reserve(n);
  if (dictionary_encoded) dictionary_encoded->clear();
  for (std::uint16_t c = 0; c < n; ++c) {
    auto type = in.get<std::uint8_t>();
    auto flags = in.get<std::uint8_t>();
    if (type < 1 || type > 4) throw CorruptObject("unknown column type tag " + std::to_string(type));
    if (flags & ~(kFlagNullable | kFlagDictionary)) throw CorruptObject("unknown column flags");
    if ((flags & kFlagDictionary) && type != static_cast<std::uint8_t>(DataType::kString))
      throw CorruptObject("dictionary flag on a non-string column");
    fields.push_back(Field{in.get_string16(), static_cast<DataType>(type), (flags & kFlagNullable) != 0});
    if (dictionary_encoded) dictionary_encoded->push_back((flags & kFlagDictionary) != 0);
  }
  try {
    return Schema(std::move(fields));
  } catch (const SchemaMismatch& e) {
    throw CorruptObject(std::string("bad schema: ") + e.what());
  }
}

}  // namespace cirrus::format
