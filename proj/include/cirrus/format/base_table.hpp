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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cirrus/format/codec.hpp"
#include "cirrus/format/range_reader.hpp"
#include "cirrus/format/row_batch.hpp"

namespace cirrus::format {

inline constexpr std::uint32_t kBaseTableMagic = 0x31544243;  // "CBT1"
inline constexpr std::uint16_t kBaseTableFormatVersion = 1;
inline constexpr std::uint64_t kDefaultTailRangeBytes = 64 * 1024;
/// u32 footer length followed by the u32 magic.
inline constexpr std::size_t kBaseTableTrailer = 8;

struct BaseTableWriteOptions {
  std::size_t row_group_rows = 1u << 16;
  std::size_t dictionary_threshold = 1u << 16;
};

struct ColumnChunkMeta {
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::uint64_t null_count = 0;
  /// Absent when every value in the chunk is null.
  std::optional<Value> min;
  std::optional<Value> max;
};

struct RowGroupMeta {
  std::uint32_t rows = 0;
  std::vector<ColumnChunkMeta> columns;
};

struct BaseTableFooter {
  std::uint16_t format_version = kBaseTableFormatVersion;
  Schema schema;
  std::uint64_t row_count = 0;
  std::vector<RowGroupMeta> row_groups;
  std::uint64_t object_size = 0;
};

enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view to_string(CompareOp op);
CompareOp compare_op_from_string(std::string_view s);
/// Applies `op` to compare_values(lhs, rhs); false when either side is null.
bool evaluate(CompareOp op, const Value& lhs, const Value& rhs);

/// `column op literal`.
struct ColumnBound {
  std::string column;
  CompareOp op = CompareOp::kEq;
  Value literal;
};

/// Conjunction of bounds, checked against chunk statistics only. A row group
/// is skipped when some bound cannot hold for any of its rows; rows in kept
/// groups still have to be filtered by the caller.
struct PruningPredicate {
  std::vector<ColumnBound> bounds;

  bool refutes(const BaseTableFooter& footer, const RowGroupMeta& group) const;
};

/// Row-group chunks laid out column by column from offset 0, then the footer,
/// the u32 footer length and the magic.
store::Bytes write_base_table(const RowBatch& rows, const BaseTableWriteOptions& options = {});

/// Parses the footer from the last `tail.size()` bytes of an object.
/// Returns std::nullopt when the tail does not reach back to the footer start;
/// the caller then needs `required_tail` bytes.
std::optional<BaseTableFooter> parse_base_table_footer(BytesView tail, std::uint64_t object_size,
                                                       std::uint64_t* required_tail = nullptr);

/// One suffix GET, plus one more only when the footer outgrows it.
BaseTableFooter read_base_table_footer(RangeReader& reader, std::uint64_t tail_range = kDefaultTailRangeBytes);

struct ScanPlan {
  /// Column indices in the table schema, in output order.
  std::vector<std::size_t> columns;
  Schema output_schema;
  /// Row groups surviving pruning, in storage order.
  std::vector<std::size_t> row_groups;
};

/// Empty `wanted` selects every column. Throws UnknownColumn.
ScanPlan plan_scan(const BaseTableFooter& footer, std::span<const std::string> wanted,
                   const PruningPredicate* predicate = nullptr);

store::ByteRange chunk_range(const BaseTableFooter& footer, std::size_t group, std::size_t column);
Column decode_chunk(const BaseTableFooter& footer, std::size_t group, std::size_t column, BytesView bytes);

/// One GET per planned column of the group.
RowBatch read_row_group(RangeReader& reader, const BaseTableFooter& footer, const ScanPlan& plan, std::size_t group);

/// Footer read, then every surviving row group in storage order.
std::vector<RowBatch> scan_base_table(RangeReader& reader, std::span<const std::string> wanted,
                                      const PruningPredicate* predicate = nullptr,
                                      std::uint64_t tail_range = kDefaultTailRangeBytes);

}  // namespace cirrus::format
