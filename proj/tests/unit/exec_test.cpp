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

#include <map>
#include <random>

#include "cirrus/errors.hpp"
#include "cirrus/exec/aggregate.hpp"
#include "cirrus/exec/join.hpp"
#include "cirrus/exec/partitioner.hpp"
#include "cirrus/exec/task.hpp"
#include "cirrus/format/partitioned_object.hpp"
#include "cirrus/format/range_reader.hpp"
#include "cirrus/sim/executor.hpp"

namespace cirrus::exec {
namespace {

using format::Field;
using format::RowBatchBuilder;

Expr col(const char* n) { return Expr::column(n); }
Expr lit(Value v) { return Expr::lit(std::move(v)); }
Expr call(const char* op, std::vector<Expr> args) { return Expr::call(op, std::move(args)); }

RowBatch sample() {
  Schema s({{"k", DataType::kInt64, false},
            {"x", DataType::kFloat64, true},
            {"s", DataType::kString, false},
            {"d", DataType::kDate32, false}});
  RowBatchBuilder b(s);
  b.add_row({std::int64_t{1}, 2.5, std::string("AIR"), parse_date("1994-03-01")});
  b.add_row({std::int64_t{2}, Value{}, std::string("MAIL"), parse_date("1995-12-31")});
  b.add_row({std::int64_t{1}, -1.0, std::string("AIRREG"), parse_date("1996-01-01")});
  b.add_row({std::int64_t{3}, 0.0, std::string("SHIP"), parse_date("1970-01-01")});
  return b.build();
}

TEST(Expr, ArithmeticTypesAndNulls) {
  auto b = sample();
  auto sum = evaluate(call("+", {col("k"), lit(std::int64_t{10})}), b);
  EXPECT_EQ(sum.type(), DataType::kInt64);
  EXPECT_EQ(sum.int_at(2), 11);
  auto mixed = evaluate(call("*", {col("k"), col("x")}), b);
  EXPECT_EQ(mixed.type(), DataType::kFloat64);
  EXPECT_DOUBLE_EQ(mixed.float_at(0), 2.5);
  EXPECT_FALSE(mixed.valid(1));
  auto div = evaluate(call("/", {col("k"), col("x")}), b);
  EXPECT_FALSE(div.valid(3)) << "division by zero is null";
  EXPECT_DOUBLE_EQ(div.float_at(2), -1.0);
}

TEST(Expr, ComparisonAndLogicTreatNullAsFalse) {
  auto b = sample();
  auto gt = evaluate(call(">", {col("x"), lit(-5.0)}), b);
  EXPECT_EQ(gt.int_at(1), 0);
  auto n = evaluate(call("not", {call(">", {col("x"), lit(-5.0)})}), b);
  EXPECT_EQ(n.int_at(1), 1);
  auto rows = select_rows(call("or", {call("==", {col("s"), lit(std::string("MAIL"))}), call("<", {col("x"), lit(0.0)})}), b);
  EXPECT_EQ(rows, (std::vector<std::uint32_t>{1, 2}));
}

TEST(Expr, StringAndDateFunctions) {
  auto b = sample();
  EXPECT_EQ(select_rows(call("starts_with", {col("s"), lit(std::string("AIR"))}), b),
            (std::vector<std::uint32_t>{0, 2}));
  EXPECT_EQ(select_rows(call("in", {col("s"), lit(std::string("SHIP")), lit(std::string("MAIL"))}), b),
            (std::vector<std::uint32_t>{1, 3}));
  auto y = evaluate(call("year", {col("d")}), b);
  EXPECT_EQ(y.int_at(0), 1994);
  EXPECT_EQ(y.int_at(1), 1995);
  EXPECT_EQ(y.int_at(2), 1996);
  EXPECT_EQ(y.int_at(3), 1970);
  EXPECT_EQ(select_rows(call(">=", {col("d"), lit(parse_date("1995-01-01"))}), b), (std::vector<std::uint32_t>{1, 2}));
  EXPECT_EQ(format_date(parse_date("2000-02-29")), "2000-02-29");
}

TEST(Expr, TypeErrors) {
  auto b = sample();
  EXPECT_THROW(result_type(col("nope"), b.schema()), UnknownColumn);
  EXPECT_THROW(result_type(call("+", {col("s"), col("k")}), b.schema()), SpecMismatch);
  EXPECT_THROW(result_type(call("year", {col("s")}), b.schema()), SpecMismatch);
}

TEST(Expr, PruningExtractsColumnLiteralConjuncts) {
  auto pred = call("and", {call(">=", {col("d"), lit(std::int64_t{100})}),
                           call("or", {call("==", {col("k"), lit(std::int64_t{1})}), col("k")})});
  auto p = extract_pruning(pred);
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(p->bounds.size(), 1u);
}

// Splitting the input arbitrarily and merging partial states must match one
// pass over all rows.
TEST(Aggregate, PartialThenFinalMatchesSinglePass) {
  Schema s({{"g", DataType::kString, false}, {"v", DataType::kInt64, true}, {"f", DataType::kFloat64, false}});
  std::mt19937_64 rng(5);
  std::vector<RowBatch> parts;
  std::map<std::string, std::int64_t> sums, counts, mins;
  std::map<std::string, double> fsums;
  std::map<std::string, std::int64_t> rows;
  for (int p = 0; p < 5; ++p) {
    RowBatchBuilder b(s);
    for (int i = 0; i < 200; ++i) {
      std::string g(1, static_cast<char>('a' + rng() % 6));
      bool null = rng() % 7 == 0;
      auto v = static_cast<std::int64_t>(rng() % 1000) - 500;
      double f = static_cast<double>(rng() % 100) / 8.0;
      b.add_row({g, null ? Value{} : Value(v), f});
      rows[g]++;
      fsums[g] += f;
      if (!null) {
        sums[g] += v;
        counts[g]++;
        mins[g] = mins.count(g) ? std::min(mins[g], v) : v;
      }
    }
    parts.push_back(b.build());
  }
  AggSpec spec{{"g"},
               {{AggFn::kSum, col("v"), "sv"},
                {AggFn::kCount, col("v"), "cv"},
                {AggFn::kCount, std::nullopt, "n"},
                {AggFn::kMin, col("v"), "mn"},
                {AggFn::kAvg, col("f"), "af"}}};
  std::vector<RowBatch> partials;
  for (const auto& p : parts) {
    Aggregator a(spec, s, Aggregator::Mode::kPartial);
    a.add(p);
    partials.push_back(a.finish());
  }
  Aggregator fin(spec, partials.front().schema(), Aggregator::Mode::kFinal);
  for (const auto& p : partials) fin.add(p);
  auto out = fin.finish();
  ASSERT_EQ(out.num_rows(), rows.size());
  for (std::size_t r = 0; r < out.num_rows(); ++r) {
    std::string g(out.column("g").string_at(r));
    EXPECT_EQ(out.column("sv").int_at(r), sums[g]);
    EXPECT_EQ(out.column("cv").int_at(r), counts[g]);
    EXPECT_EQ(out.column("n").int_at(r), rows[g]);
    EXPECT_EQ(out.column("mn").int_at(r), mins[g]);
    EXPECT_NEAR(out.column("af").float_at(r), fsums[g] / static_cast<double>(rows[g]), 1e-12);
  }
}

TEST(Aggregate, EmptyInputWithoutGroupsYieldsIdentityRow) {
  Schema s({{"v", DataType::kFloat64, false}});
  AggSpec spec{{}, {{AggFn::kSum, col("v"), "s"}, {AggFn::kCount, std::nullopt, "n"}, {AggFn::kMax, col("v"), "m"},
                    {AggFn::kAvg, col("v"), "a"}}};
  Aggregator p(spec, s, Aggregator::Mode::kPartial);
  auto partial = p.finish();
  Aggregator f(spec, partial.schema(), Aggregator::Mode::kFinal);
  f.add(partial);
  auto out = f.finish();
  ASSERT_EQ(out.num_rows(), 1u);
  EXPECT_DOUBLE_EQ(out.column("s").float_at(0), 0.0);
  EXPECT_EQ(out.column("n").int_at(0), 0);
  EXPECT_FALSE(out.column("m").valid(0));
  EXPECT_FALSE(out.column("a").valid(0));
}

TEST(Aggregate, FinalRejectsWrongInput) {
  Schema s({{"v", DataType::kInt64, false}});
  AggSpec spec{{}, {{AggFn::kSum, col("v"), "s"}}};
  EXPECT_THROW(Aggregator(spec, s, Aggregator::Mode::kFinal), SpecMismatch);
  AggSpec bad{{}, {{AggFn::kSum, std::nullopt, "s"}}};
  EXPECT_THROW(partial_schema(bad, s), SpecMismatch);
}

TEST(Join, InnerEquiJoinSkipsNullKeysAndKeepsOrder) {
  Schema bs({{"bk", DataType::kInt64, true}, {"name", DataType::kString, false}});
  RowBatchBuilder bb(bs);
  bb.add_row({std::int64_t{1}, std::string("one")});
  bb.add_row({Value{}, std::string("null")});
  bb.add_row({std::int64_t{1}, std::string("uno")});
  bb.add_row({std::int64_t{2}, std::string("two")});
  std::vector<RowBatch> build{bb.build()};
  Schema ps({{"pk", DataType::kInt64, true}, {"v", DataType::kInt64, false}});
  RowBatchBuilder pb(ps);
  pb.add_row({std::int64_t{2}, std::int64_t{20}});
  pb.add_row({Value{}, std::int64_t{0}});
  pb.add_row({std::int64_t{1}, std::int64_t{10}});
  pb.add_row({std::int64_t{9}, std::int64_t{90}});
  HashJoin j(build, bs, {"bk"}, ps, {"pk"});
  auto out = j.probe(pb.build());
  ASSERT_EQ(out.num_rows(), 3u);
  EXPECT_EQ(out.schema().field(0).name, "pk");
  EXPECT_EQ(out.schema().field(3).name, "name");
  EXPECT_EQ(out.column("name").string_at(0), "two");
  EXPECT_EQ(out.column("name").string_at(1), "one");
  EXPECT_EQ(out.column("name").string_at(2), "uno");
}

TEST(Join, SchemaConflicts) {
  Schema a({{"k", DataType::kInt64, false}});
  Schema b({{"k", DataType::kInt64, false}});
  EXPECT_THROW(join_schema(a, b, {"k"}, {"k"}), SpecMismatch);
  Schema c({{"s", DataType::kString, false}});
  EXPECT_THROW(join_schema(a, c, {"k"}, {"s"}), SpecMismatch);
}

TEST(Partitioner, SplitIsAPartitionOfTheRows) {
  Schema s({{"k", DataType::kInt64, false}});
  RowBatchBuilder b(s);
  for (std::int64_t i = 0; i < 1000; ++i) b.add_row({i * 7});
  auto batch = b.build();
  HashPartitioner p{{"k"}, 8, 42};
  auto parts = p.split(batch);
  ASSERT_EQ(parts.size(), 8u);
  std::size_t total = 0;
  auto assign = p.assign(batch);
  for (std::uint32_t i = 0; i < 8; ++i) {
    total += parts[i].num_rows();
    EXPECT_GT(parts[i].num_rows(), 60u);
    for (std::size_t r = 0; r < parts[i].num_rows(); ++r) {
      auto k = parts[i].column(0).int_at(r);
      EXPECT_EQ(assign[static_cast<std::size_t>(k / 7)], i);
    }
  }
  EXPECT_EQ(total, 1000u);
}

TEST(Partitioner, DatesAndIntegersHashAlike) {
  RowBatchBuilder ib(Schema({{"k", DataType::kInt64, false}}));
  RowBatchBuilder db(Schema({{"k", DataType::kDate32, false}}));
  for (std::int64_t i = 0; i < 100; ++i) {
    ib.add_row({i});
    db.add_row({i});
  }
  HashPartitioner p{{"k"}, 16, 3};
  EXPECT_EQ(p.assign(ib.build()), p.assign(db.build()));
  HashPartitioner q{{"k"}, 16, 4};
  EXPECT_NE(p.id(), q.id());
}

TEST(Operators, OrderByIsStableAndLimits) {
  Schema s({{"a", DataType::kInt64, false}, {"b", DataType::kString, false}});
  RowBatchBuilder b(s);
  b.add_row({std::int64_t{2}, std::string("x")});
  b.add_row({std::int64_t{1}, std::string("y")});
  b.add_row({std::int64_t{2}, std::string("z")});
  b.add_row({std::int64_t{3}, std::string("w")});
  OrderByOp op{{{"a", true}}, 3};
  auto out = apply_operator(op, {b.build()}, s);
  ASSERT_EQ(out.size(), 1u);
  auto r = out.front();
  ASSERT_EQ(r.num_rows(), 3u);
  EXPECT_EQ(r.column("b").string_at(0), "w");
  EXPECT_EQ(r.column("b").string_at(1), "x");
  EXPECT_EQ(r.column("b").string_at(2), "z");
}

TEST(Operators, PipelineSchemaChecksColumns) {
  Schema s({{"a", DataType::kInt64, false}});
  std::vector<Operator> ops{FilterOp{call(">", {col("a"), lit(std::int64_t{0})})},
                            ProjectOp{{{"b", call("*", {col("a"), lit(2.0)})}}}};
  auto out = pipeline_schema(s, ops);
  EXPECT_EQ(out.field(0).name, "b");
  EXPECT_EQ(out.field(0).type, DataType::kFloat64);
  ops.push_back(FilterOp{col("a")});
  EXPECT_THROW(pipeline_schema(s, ops), UnknownColumn);
}

struct TaskFixture : ::testing::Test {
  std::unique_ptr<sim::Executor> ex = sim::make_virtual_executor();
  store::CostLedger ledger;
  store::ObjectStore store{*ex, store::StoreProfile::zero(), ledger};
  Schema schema{{{"k", DataType::kInt64, false}, {"v", DataType::kFloat64, false}}};

  store::ObjectKey write_input(const std::string& key, std::int64_t lo, std::int64_t hi, std::uint32_t parts) {
    RowBatchBuilder b(schema);
    for (auto i = lo; i < hi; ++i) b.add_row({i, static_cast<double>(i) / 2});
    HashPartitioner p{{"k"}, parts, 9};
    auto split = p.split(b.build());
    store.preload(key, store::make_payload(format::write_partitioned(split)));
    return key;
  }

  TaskSpec spec(ObjectSource src) {
    TaskSpec t;
    t.query_id = "q";
    t.stage = "s";
    t.source = std::move(src);
    t.output = "q/q/s/s/t/0";
    t.mitigation = mitigation::MitigationSettings::off();
    return t;
  }

  format::RowBatch read_output(const store::ObjectKey& key) {
    auto payload = *store.peek(key);
    format::BufferReader reader(payload);
    return format::read_partition(reader, format::PartitionRange::all());
  }
};

TEST_F(TaskFixture, ReadsPartitionFromEveryObjectAndAggregates) {
  auto a = write_input("in/0", 0, 100, 4);
  auto b = write_input("in/1", 100, 250, 4);
  HashPartitioner p{{"k"}, 4, 9};
  auto t = spec(ObjectSource{{a, b}, format::PartitionRange::single(2), schema, p.id()});
  t.ops.push_back(PartialAggOp{AggSpec{{}, {{AggFn::kCount, std::nullopt, "n"}, {AggFn::kSum, col("k"), "sk"}}}});
  TaskOutputSummary summary;
  ex->run([&] { summary = run_task(t, store, nullptr); });
  // Expected count and sum from the partitioner directly.
  RowBatchBuilder all(schema);
  for (std::int64_t i = 0; i < 250; ++i) all.add_row({i, 0.0});
  auto assign = p.assign(all.build());
  std::int64_t n = 0, sk = 0;
  for (std::int64_t i = 0; i < 250; ++i)
    if (assign[static_cast<std::size_t>(i)] == 2) n++, sk += i;
  auto out = read_output(t.output);
  EXPECT_EQ(out.column("n").int_at(0), n);
  EXPECT_EQ(out.column("sk").int_at(0), sk);
  EXPECT_EQ(summary.rows_in, static_cast<std::uint64_t>(n));
  EXPECT_EQ(ledger.summary().gets, 4u) << "two reads per input object";
  EXPECT_EQ(ledger.summary().puts, 1u);
}

TEST_F(TaskFixture, MismatchedPartitionersAreRejected) {
  auto a = write_input("in/0", 0, 10, 4);
  HashPartitioner p{{"k"}, 4, 9}, other{{"k"}, 4, 10};
  auto t = spec(ObjectSource{{a}, format::PartitionRange::single(0), schema, p.id()});
  t.ops.push_back(JoinOp{ObjectSource{{a}, format::PartitionRange::single(0), schema, other.id()}, {"k"}, {"k"},
                         JoinStrategy::kPartitioned});
  EXPECT_THROW(ex->run([&] { run_task(t, store, nullptr); }), Error);
}

TEST_F(TaskFixture, FaultsFireAroundTheWrite) {
  auto a = write_input("in/0", 0, 10, 1);
  auto t = spec(ObjectSource{{a}, format::PartitionRange::all(), schema, std::nullopt});
  t.fault = FaultPoint::kBeforeWrite;
  EXPECT_THROW(ex->run([&] { run_task(t, store, nullptr); }), InjectedFault);
  EXPECT_FALSE(store.peek(t.output).has_value());
  t.fault = FaultPoint::kAfterWrite;
  EXPECT_THROW(ex->run([&] { run_task(t, store, nullptr); }), InjectedFault);
  EXPECT_TRUE(store.peek(t.output).has_value());
}

TEST_F(TaskFixture, MemoryLimitFailsTheTask) {
  auto a = write_input("in/0", 0, 5000, 1);
  auto t = spec(ObjectSource{{a}, format::PartitionRange::all(), schema, std::nullopt});
  runtime::RuntimeLimits limits;
  limits.max_memory = 1024;
  runtime::InvocationContext ctx(*ex, limits);
  EXPECT_THROW(ex->run([&] { run_task(t, store, &ctx); }), OutOfBudget);
}

}  // namespace
}  // namespace cirrus::exec
