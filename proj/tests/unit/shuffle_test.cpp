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
#include <set>

#include "cirrus/errors.hpp"
#include "cirrus/shuffle/topology.hpp"

namespace cirrus::shuffle {
namespace {

TEST(Fraction, ParsesUnitFractionsOnly) {
  EXPECT_EQ(UnitFraction::parse("1/20").denominator, 20u);
  EXPECT_EQ(UnitFraction::parse("1").denominator, 1u);
  EXPECT_EQ(UnitFraction::parse("1/4").str(), "1/4");
  EXPECT_THROW(UnitFraction::parse("2/3"), InvalidTopology);
  EXPECT_THROW(UnitFraction::parse("1/0"), InvalidTopology);
  EXPECT_THROW(UnitFraction::parse("half"), InvalidTopology);
}

TEST(Groups, BalancedGroupsTileTheRange) {
  for (std::uint64_t n = 1; n < 40; ++n) {
    for (std::uint64_t k = 1; k <= n; ++k) {
      std::uint64_t next = 0, smallest = n, largest = 0;
      for (std::uint64_t g = 0; g < k; ++g) {
        auto r = balanced_group(n, k, g);
        EXPECT_EQ(r.lo, next);
        next = r.hi;
        smallest = std::min(smallest, r.size());
        largest = std::max(largest, r.size());
        for (auto i = r.lo; i < r.hi; ++i) EXPECT_EQ(group_of(n, k, i), g);
      }
      EXPECT_EQ(next, n);
      EXPECT_LE(largest - smallest, 1u);
      EXPECT_GE(smallest, 1u);
    }
  }
}

// Every (producer file, partition) cell must be read by exactly one
// combiner, and each consumer must find its partition in exactly the
// combiners that cover it.
TEST(Multistage, CombinerGridCoversEveryCellOnce) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::uint64_t s = 1 + rng() % 30, r = 1 + rng() % 30;
    UnitFraction p{1 + rng() % r}, f{1 + rng() % s};
    auto t = ShuffleTopology::multistage(s, r, p, f);
    auto combiners = plan_multistage(t);
    ASSERT_EQ(combiners.size(), p.denominator * f.denominator);
    std::vector<int> hits(s * r, 0);
    for (const auto& c : combiners) {
      EXPECT_EQ(c.partition_group, balanced_group(r, p.denominator, c.index / f.denominator));
      EXPECT_EQ(c.file_group, balanced_group(s, f.denominator, c.index % f.denominator));
      for (auto file = c.file_group.lo; file < c.file_group.hi; ++file)
        for (auto part = c.partition_group.lo; part < c.partition_group.hi; ++part) hits[file * r + part]++;
    }
    for (int h : hits) EXPECT_EQ(h, 1);
    for (std::uint64_t part = 0; part < r; ++part) {
      auto used = combiners_for_partition(t, part);
      EXPECT_EQ(used.size(), f.denominator);
      std::set<std::uint64_t> files;
      for (auto j : used) {
        EXPECT_TRUE(combiners[j].partition_group.contains(part));
        for (auto file = combiners[j].file_group.lo; file < combiners[j].file_group.hi; ++file) files.insert(file);
      }
      EXPECT_EQ(files.size(), s);
    }
    EXPECT_EQ(read_count(t), 2 * (s * p.denominator + r * f.denominator));
  }
}

TEST(Multistage, InvalidTopologies) {
  EXPECT_THROW(ShuffleTopology::multistage(4, 2, UnitFraction{3}, UnitFraction{1}), InvalidTopology);
  EXPECT_THROW(ShuffleTopology::multistage(4, 2, UnitFraction{1}, UnitFraction{5}), InvalidTopology);
  EXPECT_NO_THROW(ShuffleTopology::multistage(4, 2, UnitFraction{2}, UnitFraction{4}));
}

TEST(Counts, StandardAndMultistageFormulas) {
  EXPECT_EQ(read_count(ShuffleTopology::standard(512, 128)), 131072u);
  EXPECT_EQ(read_count(ShuffleTopology::multistage(5120, 1280, UnitFraction{20}, UnitFraction{64})), 368640u);
  EXPECT_EQ(write_count(ShuffleTopology::standard(512, 128)), 512u);
  EXPECT_EQ(write_count(ShuffleTopology::standard(512, 128), true), 1024u);
  auto ms = ShuffleTopology::multistage(5120, 1280, UnitFraction{20}, UnitFraction{64});
  EXPECT_EQ(write_count(ms), 5120u + 1280u);
  EXPECT_EQ(write_count(ms, true), 2 * (5120u + 1280u));
}

TEST(Counts, DefaultSplitHasRCombinersAndMinimalReads) {
  for (auto [s, r] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{{512, 128}, {5120, 1280}, {64, 16}, {7, 5}}) {
    auto t = ShuffleTopology::multistage_default(s, r);
    EXPECT_EQ(t.combiner_count(), r);
    for (std::uint64_t pd = 1; pd <= r; ++pd) {
      if (r % pd != 0 || r / pd > s) continue;
      auto other = ShuffleTopology::multistage(s, r, UnitFraction{pd}, UnitFraction{r / pd});
      EXPECT_LE(read_count(t), read_count(other)) << t.describe() << " vs " << other.describe();
    }
  }
}

TEST(Cost, WorkedExamples) {
  store::PriceSheet prices;
  auto small = estimate_cost(ShuffleTopology::standard(512, 128), prices, true);
  EXPECT_EQ(small.get_count, 131072u);
  EXPECT_EQ(small.put_count, 1024u);
  EXPECT_NEAR(small.total_dollars(), 131072 * 0.0004 / 1000 + 1024 * 0.005 / 1000, 1e-15);
  EXPECT_NEAR(small.total_dollars(), 0.057, 0.001);
  auto big = estimate_cost(ShuffleTopology::standard(5120, 1280), prices);
  EXPECT_EQ(big.get_count, 13107200u);
  EXPECT_NEAR(big.get_dollars, 5.24288, 1e-9);
  ShuffleTopology empty;
  empty.s = 0;
  empty.r = 128;
  auto none = estimate_cost(empty, prices);
  EXPECT_EQ(none.get_count, 0u);
  EXPECT_EQ(none.total_dollars(), 0.0);
}

}  // namespace
}  // namespace cirrus::shuffle
