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
#include <string>
#include <string_view>
#include <vector>

#include "cirrus/store/pricing.hpp"

namespace cirrus::shuffle {

/// A unit fraction 1/n, written "1/n" (or "1") in plan files. Other fractions
/// are rejected: the combiner grid must tile exactly.
struct UnitFraction {
  std::uint64_t denominator = 1;

  static UnitFraction parse(std::string_view text);
  double value() const { return 1.0 / static_cast<double>(denominator); }
  std::string str() const;
  bool operator==(const UnitFraction&) const = default;
};

enum class ShuffleKind { kStandard, kMultistage };

/// s producers write one partitioned object each with r partitions. In the
/// multistage form, 1/p partition groups times 1/f file groups of combiners
/// sit between them and the r consumers.
struct ShuffleTopology {
  ShuffleKind kind = ShuffleKind::kStandard;
  std::uint64_t s = 1;
  std::uint64_t r = 1;
  UnitFraction p;
  UnitFraction f;

  static ShuffleTopology standard(std::uint64_t s, std::uint64_t r);
  static ShuffleTopology multistage(std::uint64_t s, std::uint64_t r, UnitFraction p, UnitFraction f);
  /// 1/(pf) = r combiners, with the split between partition and file groups
  /// chosen to minimise reads.
  static ShuffleTopology multistage_default(std::uint64_t s, std::uint64_t r);

  std::uint64_t partition_groups() const { return kind == ShuffleKind::kMultistage ? p.denominator : 1; }
  std::uint64_t file_groups() const { return kind == ShuffleKind::kMultistage ? f.denominator : 1; }
  std::uint64_t combiner_count() const {
    return kind == ShuffleKind::kMultistage ? p.denominator * f.denominator : 0;
  }

  /// Throws InvalidTopology. Multistage needs 1/p <= r and 1/f <= s so that
  /// no group is empty; groups may differ in size by one.
  void validate() const;
  std::string describe() const;
};

/// Half-open index range.
struct IndexRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  std::uint64_t size() const { return hi - lo; }
  bool contains(std::uint64_t i) const { return i >= lo && i < hi; }
  bool operator==(const IndexRange&) const = default;
};

/// Splits [0, n) into k contiguous groups whose sizes differ by at most one.
IndexRange balanced_group(std::uint64_t n, std::uint64_t k, std::uint64_t g);
/// The group of balanced_group(n, k, ·) containing `i`.
std::uint64_t group_of(std::uint64_t n, std::uint64_t k, std::uint64_t i);

struct CombinerSpec {
  std::uint64_t index = 0;
  IndexRange partition_group;
  IndexRange file_group;
};

/// Combiner j covers partition group j / (1/f) and file group j % (1/f).
std::vector<CombinerSpec> plan_multistage(const ShuffleTopology& t);

/// Combiners a consumer of `partition` reads from (one per file group).
std::vector<std::uint64_t> combiners_for_partition(const ShuffleTopology& t, std::uint64_t partition);

/// 2sr, or 2(s/p + r/f) for multistage.
std::uint64_t read_count(const ShuffleTopology& t);
/// Producer objects plus combiner objects, doubled under doublewrite.
std::uint64_t write_count(const ShuffleTopology& t, bool doublewrite = false);

struct ShuffleCostEstimate {
  std::uint64_t get_count = 0;
  std::uint64_t put_count = 0;
  double get_dollars = 0.0;
  double put_dollars = 0.0;

  double total_dollars() const { return get_dollars + put_dollars; }
};

/// Zero producers cost nothing; otherwise the topology must be valid.
ShuffleCostEstimate estimate_cost(const ShuffleTopology& t, const store::PriceSheet& prices = {},
                                  bool doublewrite = false);

}  // namespace cirrus::shuffle
