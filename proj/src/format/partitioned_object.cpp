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

#include "cirrus/format/partitioned_object.hpp"

#include <algorithm>
#include <unordered_set>

namespace cirrus::format {

PartitionRange PartitionedMetadata::clamp(PartitionRange r) const {
  auto n = static_cast<std::uint32_t>(partition_count());
  r.hi = std::min(r.hi, n);
  r.lo = std::min(r.lo, r.hi);
  return r;
}

std::pair<std::uint64_t, std::uint64_t> PartitionedMetadata::byte_span(PartitionRange r) const {
  r = clamp(r);
  auto begin = r.lo == 0 ? metadata_length : end_offsets[r.lo - 1];
  auto end = r.hi == 0 ? metadata_length : end_offsets[r.hi - 1];
  return {begin, std::max(begin, end)};
}

store::Bytes write_partitioned(std::span<const RowBatch> partitions, const PartitionedWriteOptions& options) {
  if (partitions.empty()) throw SchemaMismatch("a partitioned object needs at least one partition");
  const Schema& schema = partitions.front().schema();
  for (const auto& p : partitions) {
    if (!(p.schema() == schema)) throw SchemaMismatch("partitions disagree on schema: " + p.schema().describe());
  }

  // Dictionary-encode low-cardinality string columns.
  std::vector<bool> use_dictionary(schema.size(), false);
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (schema.field(c).type != DataType::kString) continue;
    std::unordered_set<std::string_view> distinct;
    bool small = true;
    for (const auto& p : partitions) {
      const Column& col = p.column(c);
      for (std::size_t r = 0; r < col.size() && small; ++r) {
        distinct.insert(col.string_at(r));
        small = distinct.size() <= options.dictionary_threshold;
      }
    }
    use_dictionary[c] = small;
  }

  std::vector<std::unique_ptr<DictionaryBuilder>> builders(schema.size());
  std::vector<DictionaryBuilder*> raw(schema.size(), nullptr);
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (use_dictionary[c]) {
      builders[c] = std::make_unique<DictionaryBuilder>();
      raw[c] = builders[c].get();
    }
  }

  // Payloads first so dictionaries are complete before the header is written.
  std::vector<store::Bytes> payloads;
  payloads.reserve(partitions.size());
  for (const auto& p : partitions) {
    ByteWriter w;
    encode_batch(w, p, raw);
    payloads.push_back(w.take());
  }

  ByteWriter meta;
  meta.put<std::uint32_t>(kPartitionedMagic);
  meta.put<std::uint16_t>(kPartitionedFormatVersion);
  meta.put<std::uint16_t>(options.compress ? 1 : 0);
  meta.put<std::uint64_t>(0);  // metadata_length, patched below
  meta.put<std::uint32_t>(static_cast<std::uint32_t>(partitions.size()));
  encode_schema(meta, schema, use_dictionary);
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (!builders[c]) continue;
    const auto& dict = *builders[c]->dictionary();
    meta.put<std::uint32_t>(static_cast<std::uint32_t>(dict.size()));
    for (const auto& s : dict) meta.put_string32(s);
  }
  const std::uint64_t metadata_length = meta.size() + partitions.size() * sizeof(std::uint64_t);
  std::uint64_t end = metadata_length;
  for (const auto& payload : payloads) {
    end += payload.size();
    meta.put<std::uint64_t>(end);
  }
  meta.patch<std::uint64_t>(8, metadata_length);

  store::Bytes out = meta.take();
  out.reserve(end);
  for (const auto& payload : payloads) out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::uint64_t partitioned_metadata_length(BytesView head) {
  if (head.size() < kPartitionedFixedHeader) throw CorruptObject("object shorter than the partitioned header");
  ByteReader in(head);
  if (in.get<std::uint32_t>() != kPartitionedMagic) throw CorruptObject("not a partitioned object (bad magic)");
  auto version = in.get<std::uint16_t>();
  if (version != kPartitionedFormatVersion) throw CorruptObject("unsupported partitioned format version " + std::to_string(version));
  in.get<std::uint16_t>();
  return in.get<std::uint64_t>();
}

PartitionedMetadata parse_partitioned_metadata(BytesView head, std::uint64_t object_size) {
  PartitionedMetadata m;
  m.metadata_length = partitioned_metadata_length(head);
  if (head.size() < m.metadata_length) throw CorruptObject("metadata prefix is incomplete");
  if (m.metadata_length > object_size) throw CorruptObject("metadata extends past the end of the object");
  ByteReader in(head.first(m.metadata_length));
  in.get<std::uint32_t>();
  m.format_version = in.get<std::uint16_t>();
  auto flags = in.get<std::uint16_t>();
  if (flags & ~1u) throw CorruptObject("unknown partitioned object flags");
  m.compressed = (flags & 1u) != 0;
  in.get<std::uint64_t>();
  auto partitions = in.get<std::uint32_t>();
  std::vector<bool> dict_flags;
  m.schema = decode_schema(in, &dict_flags);
  m.dictionaries.resize(m.schema.size());
  for (std::size_t c = 0; c < m.schema.size(); ++c) {
    if (!dict_flags[c]) continue;
    auto n = in.get<std::uint32_t>();
    auto dict = std::make_shared<Dictionary>();
    dict->reserve(std::min<std::uint32_t>(n, 1u << 20));
    for (std::uint32_t i = 0; i < n; ++i) dict->push_back(in.get_string32());
    m.dictionaries[c] = std::move(dict);
  }
  if (in.remaining() != partitions * sizeof(std::uint64_t)) throw CorruptObject("partition offset table has the wrong size");
  m.end_offsets.resize(partitions);
  std::uint64_t previous = m.metadata_length;
  for (auto& offset : m.end_offsets) {
    offset = in.get<std::uint64_t>();
    if (offset < previous) throw CorruptObject("partition end offsets must be non-decreasing");
    previous = offset;
  }
  if (partitions == 0) throw CorruptObject("partitioned object with zero partitions");
  if (m.end_offsets.back() != object_size) throw CorruptObject("last partition offset does not match object length");
  return m;
}

std::vector<RowBatch> decode_partitions(const PartitionedMetadata& metadata, BytesView data, PartitionRange r) {
  r = metadata.clamp(r);
  auto [begin, end] = metadata.byte_span(r);
  if (data.size() != end - begin) throw CorruptObject("partition data has the wrong length");
  std::vector<RowBatch> out;
  out.reserve(r.hi - r.lo);
  std::uint64_t start = begin;
  for (std::uint32_t p = r.lo; p < r.hi; ++p) {
    std::uint64_t stop = metadata.end_offsets[p];
    ByteReader in(data.subspan(start - begin, stop - start));
    out.push_back(decode_batch(in, metadata.schema, metadata.dictionaries));
    if (in.remaining() != 0) throw CorruptObject("trailing bytes in partition " + std::to_string(p));
    start = stop;
  }
  return out;
}

PartitionedMetadata read_partitioned_metadata(RangeReader& reader, std::uint64_t head_range) {
  auto head = reader.read(store::ByteRange::span(0, std::max<std::uint64_t>(head_range, kPartitionedFixedHeader)));
  auto metadata_length = partitioned_metadata_length(head.bytes);
  if (metadata_length > head.bytes.size()) {
    if (metadata_length > head.object_size) throw CorruptObject("metadata extends past the end of the object");
    auto rest = reader.read(store::ByteRange::span(head.bytes.size(), metadata_length));
    head.bytes.insert(head.bytes.end(), rest.bytes.begin(), rest.bytes.end());
  }
  return parse_partitioned_metadata(head.bytes, head.object_size);
}

std::vector<RowBatch> read_partitions(RangeReader& reader, PartitionRange range, std::uint64_t head_range,
                                      PartitionedMetadata* metadata_out) {
  PartitionedMetadata metadata = read_partitioned_metadata(reader, head_range);
  range = metadata.clamp(range);
  auto [begin, end] = metadata.byte_span(range);
  auto data = reader.read(store::ByteRange::span(begin, end));
  auto out = decode_partitions(metadata, data.bytes, range);
  if (metadata_out) *metadata_out = std::move(metadata);
  return out;
}

RowBatch read_partition(RangeReader& reader, PartitionRange range, std::uint64_t head_range) {
  PartitionedMetadata metadata;
  auto parts = read_partitions(reader, range, head_range, &metadata);
  if (parts.empty()) return RowBatch::empty(metadata.schema);
  return concat(parts, metadata.schema);
}

}  // namespace cirrus::format
