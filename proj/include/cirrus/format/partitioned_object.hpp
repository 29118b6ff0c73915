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
#include <limits>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "cirrus/format/codec.hpp"
#include "cirrus/format/range_reader.hpp"
#include "cirrus/format/row_batch.hpp"

namespace cirrus::format {

inline constexpr std::uint32_t kPartitionedMagic = 0x424f5043;  // "CPOB"
inline constexpr std::uint16_t kPartitionedFormatVersion = 1;
inline constexpr std::uint64_t kDefaultHeadRangeBytes = 64 * 1024;
/// Bytes needed to learn the metadata length.
inline constexpr std::size_t kPartitionedFixedHeader = 16;

struct PartitionedWriteOptions {
  /// String columns with at most this many distinct values are dictionary encoded.
  std::size_t dictionary_threshold = 1u << 16;
  /// Reserved flag; payloads are always written uncompressed.
  bool compress = false;
};

/// Half-open range of partition indices; `all()` is clamped to the object.
struct PartitionRange {
  std::uint32_t lo = 0;
  std::uint32_t hi = std::numeric_limits<std::uint32_t>::max();

  static PartitionRange all() { return {}; }
  static PartitionRange single(std::uint32_t i) { return {i, i + 1}; }
  bool operator==(const PartitionRange&) const = default;
};

struct PartitionedMetadata {
  std::uint16_t format_version = kPartitionedFormatVersion;
  bool compressed = false;
  Schema schema;
  /// Per column; null unless that column is dictionary encoded.
  std::vector<std::shared_ptr<const Dictionary>> dictionaries;
  /// Absolute end offset of each partition within the object.
  std::vector<std::uint64_t> end_offsets;
  std::uint64_t metadata_length = 0;

  std::size_t partition_count() const { return end_offsets.size(); }
  PartitionRange clamp(PartitionRange r) const;
  /// Absolute [begin, end) covering partitions [lo, hi).
  std::pair<std::uint64_t, std::uint64_t> byte_span(PartitionRange r) const;
};

/// Encodes one partitioned intermediate object: fixed header, schema,
/// dictionaries and partition end offsets, followed by partition payloads.
/// Throws SchemaMismatch unless every partition shares one schema.
store::Bytes write_partitioned(std::span<const RowBatch> partitions, const PartitionedWriteOptions& options = {});

/// Reads the metadata length from the fixed header prefix.
std::uint64_t partitioned_metadata_length(BytesView head);

/// Parses metadata from a prefix of at least metadata_length bytes.
PartitionedMetadata parse_partitioned_metadata(BytesView head, std::uint64_t object_size);

/// Decodes partitions [r.lo, r.hi) from `data`, the bytes at byte_span(r).
std::vector<RowBatch> decode_partitions(const PartitionedMetadata& metadata, BytesView data, PartitionRange r);

/// One head GET (plus one more only when metadata outgrows the head range).
PartitionedMetadata read_partitioned_metadata(RangeReader& reader, std::uint64_t head_range = kDefaultHeadRangeBytes);

/// Metadata GET(s) plus one data GET for the whole range. Returns one batch
/// per partition so callers that re-emit partitions can keep boundaries.
std::vector<RowBatch> read_partitions(RangeReader& reader, PartitionRange range,
                                      std::uint64_t head_range = kDefaultHeadRangeBytes,
                                      PartitionedMetadata* metadata_out = nullptr);

/// As read_partitions, concatenated into a single batch.
RowBatch read_partition(RangeReader& reader, PartitionRange range, std::uint64_t head_range = kDefaultHeadRangeBytes);

}  // namespace cirrus::format
