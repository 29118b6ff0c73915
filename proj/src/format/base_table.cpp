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

#include "cirrus/format/base_table.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

namespace cirrus::format {
namespace {

constexpr std::uint8_t kChunkPlain = 0;
constexpr std::uint8_t kChunkDictionary = 1;

void put_stat(ByteWriter& out, DataType type, const Value& v) {
  switch (type) {
    case DataType::kInt64:
      out.put<std::int64_t>(std::get<std::int64_t>(v));
      return;
    case DataType::kDate32:
      out.put<std::int32_t>(static_cast<std::int32_t>(std::get<std::int64_t>(v)));
      return;
    case DataType::kFloat64:
      out.put<double>(std::get<double>(v));
      return;
    case DataType::kString:
      out.put_string32(std::get<std::string>(v));
      return;
  }
}

Value get_stat(ByteReader& in, DataType type) {
  switch (type) {
    case DataType::kInt64:
      return in.get<std::int64_t>();
    case DataType::kDate32:
      return static_cast<std::int64_t>(in.get<std::int32_t>());
    case DataType::kFloat64:
      return in.get<double>();
    case DataType::kString:
      return in.get_string32();
  }
  throw CorruptObject("bad statistics type");
}

ColumnChunkMeta chunk_stats(const Column& column) {
  ColumnChunkMeta meta;
  for (std::size_t r = 0; r < column.size(); ++r) {
    if (!column.valid(r)) {
      ++meta.null_count;
      continue;
    }
    Value v = column.value(r);
    if (!meta.min || compare_values(v, *meta.min) < 0) meta.min = v;
    if (!meta.max || compare_values(v, *meta.max) > 0) meta.max = std::move(v);
  }
  return meta;
}

bool few_distinct(const Column& column, std::size_t threshold) {
  std::unordered_set<std::string_view> distinct;
  for (std::size_t r = 0; r < column.size(); ++r) {
    distinct.insert(column.string_at(r));
    if (distinct.size() > threshold) return false;
  }
  return true;
}

// Whether some value v in [min, max] can satisfy `v op literal`.
bool may_match(CompareOp op, const Value& min, const Value& max, const Value& literal) {
  if (is_null(literal)) return false;
  int lo = compare_values(min, literal);
  int hi = compare_values(max, literal);
  switch (op) {
    case CompareOp::kEq:
      return lo <= 0 && hi >= 0;
    case CompareOp::kNe:
      return !(lo == 0 && hi == 0);
    case CompareOp::kLt:
      return lo < 0;
    case CompareOp::kLe:
      return lo <= 0;
    case CompareOp::kGt:
      return hi > 0;
    case CompareOp::kGe:
      return hi >= 0;
  }
  return true;
}

}  // namespace

std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kEq:
      return "==";
    case CompareOp::kNe:
      return "!=";
    case CompareOp::kLt:
      return "<";
    case CompareOp::kLe:
      return "<=";
    case CompareOp::kGt:
      return ">";
    case CompareOp::kGe:
      return ">=";
  }
  return "?";
}

CompareOp compare_op_from_string(std::string_view s) {
  if (s == "==" || s == "=" || s == "eq") return CompareOp::kEq;
  if (s == "!=" || s == "<>" || s == "ne") return CompareOp::kNe;
  if (s == "<" || s == "lt") return CompareOp::kLt;
  if (s == "<=" || s == "le") return CompareOp::kLe;
  if (s == ">" || s == "gt") return CompareOp::kGt;
  if (s == ">=" || s == "ge") return CompareOp::kGe;
  throw SchemaMismatch("unknown comparison operator '" + std::string(s) + "'");
}

bool evaluate(CompareOp op, const Value& lhs, const Value& rhs) {
  if (is_null(lhs) || is_null(rhs)) return false;
  int c = compare_values(lhs, rhs);
  switch (op) {
    case CompareOp::kEq:
      return c == 0;
    case CompareOp::kNe:
      return c != 0;
    case CompareOp::kLt:
      return c < 0;
    case CompareOp::kLe:
      return c <= 0;
    case CompareOp::kGt:
      return c > 0;
    case CompareOp::kGe:
      return c >= 0;
  }
  return false;
}

bool PruningPredicate::refutes(const BaseTableFooter& footer, const RowGroupMeta& group) const {
  for (const auto& b : bounds) {
    const auto& chunk = group.columns.at(footer.schema.index_of(b.column));
    if (group.rows == 0) return true;
    // All-null chunk: no comparison can hold.
    if (!chunk.min || !chunk.max) return true;
    if (!may_match(b.op, *chunk.min, *chunk.max, b.literal)) return true;
  }
  return false;
}

store::Bytes write_base_table(const RowBatch& rows, const BaseTableWriteOptions& options) {
  if (options.row_group_rows == 0) throw SchemaMismatch("row_group_rows must be positive");
  const Schema& schema = rows.schema();
  ByteWriter out;
  std::vector<RowGroupMeta> groups;

  for (std::size_t begin = 0; begin < rows.num_rows(); begin += options.row_group_rows) {
    std::size_t end = std::min(rows.num_rows(), begin + options.row_group_rows);
    std::vector<std::uint32_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), static_cast<std::uint32_t>(begin));
    RowBatch slice = rows.take(idx);

    RowGroupMeta group;
    group.rows = static_cast<std::uint32_t>(slice.num_rows());
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const Column& col = slice.column(c);
      ColumnChunkMeta meta = chunk_stats(col);
      meta.offset = out.size();
      bool dict = schema.field(c).type == DataType::kString && few_distinct(col, options.dictionary_threshold);
      if (dict) {
        // Codes first so the dictionary is complete, then splice it in front.
        DictionaryBuilder builder;
        ByteWriter codes;
        encode_column(codes, col, schema.field(c).nullable, &builder);
        out.put<std::uint8_t>(kChunkDictionary);
        out.put<std::uint32_t>(static_cast<std::uint32_t>(builder.size()));
        for (const auto& s : *builder.dictionary()) out.put_string32(s);
        out.put_bytes(codes.buffer());
      } else {
        out.put<std::uint8_t>(kChunkPlain);
        encode_column(out, col, schema.field(c).nullable, nullptr);
      }
      meta.length = out.size() - meta.offset;
      group.columns.push_back(std::move(meta));
    }
    groups.push_back(std::move(group));
  }

  const std::size_t footer_start = out.size();
  out.put<std::uint16_t>(kBaseTableFormatVersion);
  out.put<std::uint64_t>(rows.num_rows());
  encode_schema(out, schema);
  out.put<std::uint32_t>(static_cast<std::uint32_t>(groups.size()));
  for (const auto& g : groups) {
    out.put<std::uint32_t>(g.rows);
    for (std::size_t c = 0; c < schema.size(); ++c) {
      const auto& m = g.columns[c];
      out.put<std::uint64_t>(m.offset);
      out.put<std::uint64_t>(m.length);
      out.put<std::uint64_t>(m.null_count);
      out.put<std::uint8_t>(m.min ? 1 : 0);
      if (m.min) {
        put_stat(out, schema.field(c).type, *m.min);
        put_stat(out, schema.field(c).type, *m.max);
      }
    }
  }
  out.put<std::uint32_t>(static_cast<std::uint32_t>(out.size() - footer_start));
  out.put<std::uint32_t>(kBaseTableMagic);
  return out.take();
}

std::optional<BaseTableFooter> parse_base_table_footer(BytesView tail, std::uint64_t object_size,
                                                       std::uint64_t* required_tail) {
  if (tail.size() < kBaseTableTrailer || object_size < kBaseTableTrailer)
    throw CorruptObject("object shorter than the base table trailer");
  ByteReader trailer(tail.last(kBaseTableTrailer));
  auto footer_len = trailer.get<std::uint32_t>();
  if (trailer.get<std::uint32_t>() != kBaseTableMagic) throw CorruptObject("not a base table (bad magic)");
  std::uint64_t needed = std::uint64_t{footer_len} + kBaseTableTrailer;
  if (needed > object_size) throw CorruptObject("footer extends past the start of the object");
  if (required_tail) *required_tail = needed;
  if (needed > tail.size()) return std::nullopt;

  const std::uint64_t footer_start = object_size - needed;
  ByteReader in(tail.subspan(tail.size() - needed, footer_len));
  BaseTableFooter f;
  f.object_size = object_size;
  f.format_version = in.get<std::uint16_t>();
  if (f.format_version != kBaseTableFormatVersion)
    throw CorruptObject("unsupported base table version " + std::to_string(f.format_version));
  f.row_count = in.get<std::uint64_t>();
  f.schema = decode_schema(in, nullptr);
  auto groups = in.get<std::uint32_t>();
  std::uint64_t rows = 0;
  std::uint64_t previous_end = 0;
  for (std::uint32_t g = 0; g < groups; ++g) {
    RowGroupMeta group;
    group.rows = in.get<std::uint32_t>();
    rows += group.rows;
    for (std::size_t c = 0; c < f.schema.size(); ++c) {
      ColumnChunkMeta m;
      m.offset = in.get<std::uint64_t>();
      m.length = in.get<std::uint64_t>();
      m.null_count = in.get<std::uint64_t>();
      if (m.offset < previous_end || m.length > footer_start || m.offset > footer_start - m.length)
        throw CorruptObject("column chunk overlaps another chunk or the footer");
      if (m.null_count > group.rows) throw CorruptObject("null count exceeds row count");
      previous_end = m.offset + m.length;
      auto has_stats = in.get<std::uint8_t>();
      if (has_stats > 1) throw CorruptObject("bad statistics flag");
      if (has_stats) {
        m.min = get_stat(in, f.schema.field(c).type);
        m.max = get_stat(in, f.schema.field(c).type);
      }
      group.columns.push_back(std::move(m));
    }
    f.row_groups.push_back(std::move(group));
  }
  if (in.remaining() != 0) throw CorruptObject("trailing bytes in base table footer");
  if (rows != f.row_count) throw CorruptObject("row group sizes do not add up to the row count");
  return f;
}

BaseTableFooter read_base_table_footer(RangeReader& reader, std::uint64_t tail_range) {
  auto tail = reader.read(store::ByteRange::suffix(std::max<std::uint64_t>(tail_range, kBaseTableTrailer)));
  std::uint64_t needed = 0;
  if (auto f = parse_base_table_footer(tail.bytes, tail.object_size, &needed)) return std::move(*f);
  auto more = reader.read(store::ByteRange::suffix(needed));
  auto f = parse_base_table_footer(more.bytes, more.object_size);
  if (!f) throw CorruptObject("footer changed between reads");
  return std::move(*f);
}

ScanPlan plan_scan(const BaseTableFooter& footer, std::span<const std::string> wanted,
                   const PruningPredicate* predicate) {
  ScanPlan plan;
  std::vector<Field> fields;
  if (wanted.empty()) {
    plan.columns.resize(footer.schema.size());
    std::iota(plan.columns.begin(), plan.columns.end(), std::size_t{0});
  } else {
    for (const auto& name : wanted) plan.columns.push_back(footer.schema.index_of(name));
  }
  for (auto c : plan.columns) fields.push_back(footer.schema.field(c));
  plan.output_schema = Schema(std::move(fields));
  if (predicate) {
    for (const auto& b : predicate->bounds) footer.schema.index_of(b.column);
  }
  for (std::size_t g = 0; g < footer.row_groups.size(); ++g) {
    if (predicate && predicate->refutes(footer, footer.row_groups[g])) continue;
    plan.row_groups.push_back(g);
  }
  return plan;
}

store::ByteRange chunk_range(const BaseTableFooter& footer, std::size_t group, std::size_t column) {
  const auto& m = footer.row_groups.at(group).columns.at(column);
  return store::ByteRange::span(m.offset, m.offset + m.length);
}

Column decode_chunk(const BaseTableFooter& footer, std::size_t group, std::size_t column, BytesView bytes) {
  const auto& g = footer.row_groups.at(group);
  const auto& field = footer.schema.field(column);
  if (bytes.size() != g.columns.at(column).length) throw CorruptObject("column chunk has the wrong length");
  ByteReader in(bytes);
  auto encoding = in.get<std::uint8_t>();
  std::shared_ptr<const Dictionary> dictionary;
  if (encoding == kChunkDictionary) {
    if (field.type != DataType::kString) throw CorruptObject("dictionary chunk in a non-string column");
    auto n = in.get<std::uint32_t>();
    auto dict = std::make_shared<Dictionary>();
    dict->reserve(std::min<std::uint32_t>(n, g.rows));
    for (std::uint32_t i = 0; i < n; ++i) dict->push_back(in.get_string32());
    dictionary = std::move(dict);
  } else if (encoding != kChunkPlain) {
    throw CorruptObject("unknown chunk encoding");
  }
  Column col = decode_column(in, field.type, field.nullable, g.rows, dictionary);
  if (in.remaining() != 0) throw CorruptObject("trailing bytes in column chunk");
  return col;
}

RowBatch read_row_group(RangeReader& reader, const BaseTableFooter& footer, const ScanPlan& plan, std::size_t group) {
  std::vector<Column> cols;
  cols.reserve(plan.columns.size());
  for (auto c : plan.columns) {
    auto data = reader.read(chunk_range(footer, group, c));
    cols.push_back(decode_chunk(footer, group, c, data.bytes));
  }
  return RowBatch(plan.output_schema, std::move(cols));
}

std::vector<RowBatch> scan_base_table(RangeReader& reader, std::span<const std::string> wanted,
                                      const PruningPredicate* predicate, std::uint64_t tail_range) {
  auto footer = read_base_table_footer(reader, tail_range);
  auto plan = plan_scan(footer, wanted, predicate);
  std::vector<RowBatch> out;
  out.reserve(plan.row_groups.size());
  for (auto g : plan.row_groups) out.push_back(read_row_group(reader, footer, plan, g));
  return out;
}

}  // namespace cirrus::format
