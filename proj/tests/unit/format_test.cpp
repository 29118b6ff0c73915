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

#include <gtest/gtest.h>

#include <random>

#include "cirrus/format/base_table.hpp"
#include "cirrus/format/partitioned_object.hpp"

namespace cirrus::format {
namespace {

Schema mixed_schema() {
  return Schema({{"id", DataType::kInt64, false},
                 {"price", DataType::kFloat64, true},
                 {"day", DataType::kDate32, false},
                 {"mode", DataType::kString, false},
                 {"comment", DataType::kString, true}});
}

RowBatch random_batch(std::mt19937_64& rng, std::size_t rows, std::int64_t first_id = 0) {
  static const char* kModes[] = {"AIR", "RAIL", "SHIP", "TRUCK"};
  RowBatchBuilder b(mixed_schema());
  for (std::size_t r = 0; r < rows; ++r) {
    Value price = rng() % 7 == 0 ? Value{} : Value{static_cast<double>(rng() % 100000) / 100.0};
    std::string comment(rng() % 12, static_cast<char>('a' + rng() % 26));
    Value c = rng() % 5 == 0 ? Value{} : Value{comment};
    b.add_row({first_id + static_cast<std::int64_t>(r), price, static_cast<std::int64_t>(8000 + rng() % 2500),
               std::string(kModes[rng() % 4]), c});
  }
  return b.build();
}

TEST(Partitioned, EmptyPartitionsAndOffsets) {
  std::mt19937_64 rng(1);
  std::vector<RowBatch> parts;
  for (auto n : {3, 0, 5, 1}) parts.push_back(random_batch(rng, n));
  auto bytes = store::make_payload(write_partitioned(parts));
  BufferReader reader(bytes);
  PartitionedMetadata meta;
  auto got = read_partitions(reader, PartitionRange::single(1), kDefaultHeadRangeBytes, &meta);
  EXPECT_EQ(meta.partition_count(), 4u);
  EXPECT_EQ(meta.end_offsets.back(), bytes->size());
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].num_rows(), 0u);
}

TEST(Partitioned, SinglePartitionReadTakesTwoReads) {
  std::mt19937_64 rng(2);
  std::vector<RowBatch> parts;
  for (int i = 0; i < 8; ++i) parts.push_back(random_batch(rng, 1 + rng() % 50));
  auto bytes = store::make_payload(write_partitioned(parts));
  for (std::uint32_t i = 0; i < 8; ++i) {
    BufferReader reader(bytes);
    auto got = read_partition(reader, PartitionRange::single(i));
    EXPECT_EQ(reader.reads(), 2u);
    EXPECT_TRUE(same_rows(got, parts[i]));
  }
}

TEST(Partitioned, ContiguousRangeStillTwoReads) {
  std::mt19937_64 rng(3);
  std::vector<RowBatch> parts;
  for (int i = 0; i < 8; ++i) parts.push_back(random_batch(rng, rng() % 40));
  auto bytes = store::make_payload(write_partitioned(parts));
  BufferReader reader(bytes);
  auto got = read_partition(reader, {2, 5});
  EXPECT_EQ(reader.reads(), 2u);
  std::vector<RowBatch> expect(parts.begin() + 2, parts.begin() + 5);
  EXPECT_TRUE(same_rows(got, concat(expect, mixed_schema())));

  BufferReader all_reader(bytes);
  EXPECT_TRUE(same_rows(read_partition(all_reader, PartitionRange::all()), concat(parts, mixed_schema())));
}

TEST(Partitioned, OversizedMetadataCostsOneExtraRead) {
  Schema s({{"k", DataType::kString, false}});
  RowBatchBuilder b(s);
  for (int i = 0; i < 20000; ++i) b.add_row({std::string("key-") + std::to_string(i)});
  std::vector<RowBatch> parts{b.build(), RowBatch::empty(s)};
  auto bytes = store::make_payload(write_partitioned(parts));
  BufferReader reader(bytes);
  PartitionedMetadata meta;
  auto got = read_partitions(reader, PartitionRange::single(0), kDefaultHeadRangeBytes, &meta);
  EXPECT_GT(meta.metadata_length, kDefaultHeadRangeBytes);
  EXPECT_EQ(reader.reads(), 3u);
  EXPECT_TRUE(same_rows(got[0], parts[0]));
}

TEST(Partitioned, RandomRoundTrips) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<RowBatch> parts;
    auto n = 1 + rng() % 10;
    for (std::size_t i = 0; i < n; ++i) parts.push_back(random_batch(rng, rng() % 100));
    PartitionedWriteOptions opt;
    opt.dictionary_threshold = trial % 2 ? 2 : 1u << 16;
    auto bytes = store::make_payload(write_partitioned(parts, opt));
    for (std::uint32_t i = 0; i < n; ++i) {
      BufferReader reader(bytes);
      EXPECT_TRUE(same_rows(read_partition(reader, PartitionRange::single(i)), parts[i]));
    }
    // Re-encoding decoded data is value-identical.
    BufferReader reader(bytes);
    auto decoded = read_partitions(reader, PartitionRange::all());
    auto again = store::make_payload(write_partitioned(decoded, opt));
    BufferReader reader2(again);
    auto twice = read_partitions(reader2, PartitionRange::all());
    for (std::size_t i = 0; i < n; ++i) EXPECT_TRUE(same_rows(twice[i], parts[i]));
  }
}

TEST(Partitioned, SchemaMismatchIsRejected) {
  std::mt19937_64 rng(5);
  Schema other({{"x", DataType::kInt64, false}});
  std::vector<RowBatch> parts{random_batch(rng, 2), RowBatch::empty(other)};
  EXPECT_THROW(write_partitioned(parts), SchemaMismatch);
  EXPECT_THROW(write_partitioned(std::vector<RowBatch>{}), SchemaMismatch);
}

TEST(Partitioned, CorruptionIsDetected) {
  std::mt19937_64 rng(6);
  std::vector<RowBatch> parts{random_batch(rng, 10), random_batch(rng, 10)};
  auto good = write_partitioned(parts);
  auto bad_magic = good;
  bad_magic[0] ^= 0xff;
  BufferReader r1(store::make_payload(bad_magic));
  EXPECT_THROW(read_partition(r1, PartitionRange::single(0)), CorruptObject);
  auto bad_version = good;
  bad_version[4] = 9;
  BufferReader r2(store::make_payload(bad_version));
  EXPECT_THROW(read_partition(r2, PartitionRange::single(0)), CorruptObject);
  auto truncated = good;
  truncated.pop_back();
  BufferReader r3(store::make_payload(truncated));
  EXPECT_THROW(read_partition(r3, PartitionRange::single(1)), CorruptObject);
}

TEST(BaseTable, ProjectionReadsOnlyWantedColumns) {
  std::mt19937_64 rng(7);
  Schema six({{"a", DataType::kInt64, false},
              {"b", DataType::kInt64, false},
              {"c", DataType::kFloat64, false},
              {"d", DataType::kString, false},
              {"e", DataType::kDate32, false},
              {"f", DataType::kInt64, false}});
  RowBatchBuilder b(six);
  for (int i = 0; i < 500; ++i)
    b.add_row({std::int64_t{i}, std::int64_t{i * 2}, i * 0.5, std::to_string(i % 7), std::int64_t{9000 + i},
               std::int64_t{-i}});
  auto table = b.build();
  auto bytes = store::make_payload(write_base_table(table));
  BufferReader reader(bytes);
  std::vector<std::string> wanted{"b", "e"};
  auto out = scan_base_table(reader, wanted);
  EXPECT_EQ(reader.reads(), 3u);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_EQ(out[0].num_rows(), 500u);
  EXPECT_EQ(out[0].column("b").int_at(10), 20);
  EXPECT_EQ(out[0].column("e").int_at(10), 9010);
}

TEST(BaseTable, StatsRefutationSkipsAllData) {
  std::mt19937_64 rng(8);
  auto table = random_batch(rng, 1000, 100);
  BaseTableWriteOptions opt;
  opt.row_group_rows = 128;
  auto bytes = store::make_payload(write_base_table(table, opt));
  BufferReader reader(bytes);
  PruningPredicate pred{{{"id", CompareOp::kLt, std::int64_t{100}}}};
  std::vector<std::string> wanted{"id", "mode"};
  auto out = scan_base_table(reader, wanted, &pred);
  EXPECT_TRUE(out.empty());
  EXPECT_EQ(reader.reads(), 1u);
}

TEST(BaseTable, PruningNeverChangesFilteredResult) {
  std::mt19937_64 rng(9);
  auto table = random_batch(rng, 3000);
  BaseTableWriteOptions opt;
  opt.row_group_rows = 200;
  auto bytes = store::make_payload(write_base_table(table, opt));
  const CompareOp ops[] = {CompareOp::kEq, CompareOp::kNe, CompareOp::kLt,
                           CompareOp::kLe, CompareOp::kGt, CompareOp::kGe};
  for (int trial = 0; trial < 60; ++trial) {
    ColumnBound bound;
    bound.op = ops[rng() % 6];
    switch (rng() % 3) {
      case 0:
        bound.column = "id";
        bound.literal = static_cast<std::int64_t>(rng() % 3200);
        break;
      case 1:
        bound.column = "price";
        bound.literal = static_cast<double>(rng() % 1000);
        break;
      default:
        bound.column = "mode";
        bound.literal = std::string(trial % 2 ? "RAIL" : "BUS");
    }
    PruningPredicate pred{{bound}};
    auto keep = [&](const RowBatch& b) {
      std::vector<std::uint32_t> idx;
      const Column& c = b.column(bound.column);
      for (std::size_t r = 0; r < b.num_rows(); ++r)
        if (evaluate(bound.op, c.value(r), bound.literal)) idx.push_back(static_cast<std::uint32_t>(r));
      return b.take(idx);
    };
    BufferReader r1(bytes), r2(bytes);
    auto pruned = scan_base_table(r1, {}, &pred);
    auto full = scan_base_table(r2, {});
    std::vector<RowBatch> a, b;
    for (auto& x : pruned) a.push_back(keep(x));
    for (auto& x : full) b.push_back(keep(x));
    EXPECT_TRUE(same_rows(concat(a, table.schema()), concat(b, table.schema()))) << "trial " << trial;
    EXPECT_LE(r1.reads(), r2.reads());
  }
}

TEST(BaseTable, RoundTripAndFooterFallback) {
  std::mt19937_64 rng(10);
  auto table = random_batch(rng, 5000);
  BaseTableWriteOptions opt;
  opt.row_group_rows = 16;  // many groups: footer larger than a tiny tail guess
  auto bytes = store::make_payload(write_base_table(table, opt));
  BufferReader reader(bytes);
  auto footer = read_base_table_footer(reader, 64);
  EXPECT_EQ(reader.reads(), 2u);
  EXPECT_EQ(footer.row_count, 5000u);
  BufferReader r2(bytes);
  auto out = scan_base_table(r2, {});
  EXPECT_TRUE(same_rows(concat(out, table.schema()), table));
}

TEST(BaseTable, EmptyTableAndUnknownColumn) {
  auto bytes = store::make_payload(write_base_table(RowBatch::empty(mixed_schema())));
  BufferReader reader(bytes);
  EXPECT_TRUE(scan_base_table(reader, {}).empty());
  EXPECT_EQ(reader.reads(), 1u);
  BufferReader r2(bytes);
  std::vector<std::string> wanted{"nope"};
  EXPECT_THROW(scan_base_table(r2, wanted), UnknownColumn);
}

TEST(BaseTable, StatsBoundActualValues) {
  std::mt19937_64 rng(11);
  auto table = random_batch(rng, 777);
  BaseTableWriteOptions opt;
  opt.row_group_rows = 100;
  auto bytes = store::make_payload(write_base_table(table, opt));
  BufferReader reader(bytes);
  auto footer = read_base_table_footer(reader);
  for (std::size_t g = 0; g < footer.row_groups.size(); ++g) {
    for (std::size_t c = 0; c < footer.schema.size(); ++c) {
      const auto& m = footer.row_groups[g].columns[c];
      auto col = decode_chunk(footer, g, c,
                              BytesView(bytes->data() + m.offset, m.length));
      for (std::size_t r = 0; r < col.size(); ++r) {
        if (!col.valid(r)) continue;
        EXPECT_LE(compare_values(*m.min, col.value(r)), 0);
        EXPECT_GE(compare_values(*m.max, col.value(r)), 0);
      }
    }
  }
}

}  // namespace
}  // namespace cirrus::format
