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

#include "cirrus/shuffle/topology.hpp"

#include <charconv>
#include <limits>

#include "cirrus/errors.hpp"

namespace cirrus::shuffle {
namespace {

std::uint64_t parse_uint(std::string_view text, std::string_view whole) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw InvalidTopology("bad fraction '" + std::string(whole) + "'");
  return v;
}

}  // namespace

UnitFraction UnitFraction::parse(std::string_view text) {
  auto slash = text.find('/');
  std::uint64_t num = parse_uint(text.substr(0, slash), text);
  std::uint64_t den = slash == std::string_view::npos ? 1 : parse_uint(text.substr(slash + 1), text);
  if (num == 0 || den == 0) throw InvalidTopology("fraction '" + std::string(text) + "' must be positive");
  if (num > den) throw InvalidTopology("fraction '" + std::string(text) + "' exceeds 1");
  if (den % num != 0) throw InvalidTopology("1/p and 1/f must be integral, got '" + std::string(text) + "'");
  return UnitFraction{den / num};
}

std::string UnitFraction::str() const { return denominator == 1 ? "1" : "1/" + std::to_string(denominator); }

ShuffleTopology ShuffleTopology::standard(std::uint64_t s, std::uint64_t r) {
  ShuffleTopology t;
  t.s = s;
  t.r = r;
  t.validate();
  return t;
}

ShuffleTopology ShuffleTopology::multistage(std::uint64_t s, std::uint64_t r, UnitFraction p, UnitFraction f) {
  ShuffleTopology t{ShuffleKind::kMultistage, s, r, p, f};
  t.validate();
  return t;
}

ShuffleTopology ShuffleTopology::multistage_default(std::uint64_t s, std::uint64_t r) {
  if (s == 0 || r == 0) throw InvalidTopology("shuffle needs at least one producer and one consumer");
  // (1/p)(1/f) = r. Among divisors d = 1/p of r with r/d <= s, minimise
  // s*d + r*(r/d); ties go to the smaller d (coarser p).
  std::uint64_t best = 0;
  long double best_reads = std::numeric_limits<long double>::infinity();
  for (std::uint64_t d = 1; d <= r; ++d) {
    if (r % d != 0 || r / d > s) continue;
    long double reads = static_cast<long double>(s) * d + static_cast<long double>(r) * (r / d);
    if (reads < best_reads) {
      best_reads = reads;
      best = d;
    }
  }
  if (best == 0) {
    // r > s * r for every divisor cannot happen: d = r always gives r/d = 1 <= s.
    throw InvalidTopology("no valid combiner grid");
  }
  return multistage(s, r, UnitFraction{best}, UnitFraction{r / best});
}

void ShuffleTopology::validate() const {
  if (s == 0 || r == 0) throw InvalidTopology("shuffle needs at least one producer and one consumer");
  if (kind == ShuffleKind::kStandard) return;
  if (p.denominator == 0 || f.denominator == 0) throw InvalidTopology("p and f must be positive");
  if (p.denominator > r)
    throw InvalidTopology("1/p = " + std::to_string(p.denominator) + " exceeds the consumer count " + std::to_string(r));
  if (f.denominator > s)
    throw InvalidTopology("1/f = " + std::to_string(f.denominator) + " exceeds the producer count " + std::to_string(s));
}

std::string ShuffleTopology::describe() const {
  std::string out = (kind == ShuffleKind::kStandard ? "standard" : "multistage");
  out += " s=" + std::to_string(s) + " r=" + std::to_string(r);
  if (kind == ShuffleKind::kMultistage) out += " p=" + p.str() + " f=" + f.str();
  return out;
}

IndexRange balanced_group(std::uint64_t n, std::uint64_t k, std::uint64_t g) {
  return IndexRange{g * n / k, (g + 1) * n / k};
}

std::uint64_t group_of(std::uint64_t n, std::uint64_t k, std::uint64_t i) {
  // Largest g whose group starts at or before i.
  std::uint64_t lo = 0, hi = k;
  while (hi - lo > 1) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (balanced_group(n, k, mid).lo <= i) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::vector<CombinerSpec> plan_multistage(const ShuffleTopology& t) {
  if (t.kind != ShuffleKind::kMultistage) throw InvalidTopology("plan_multistage needs a multistage topology");
  t.validate();
  std::vector<CombinerSpec> out;
  out.reserve(t.combiner_count());
  const auto pg = t.partition_groups(), fg = t.file_groups();
  for (std::uint64_t j = 0; j < pg * fg; ++j) {
    out.push_back(CombinerSpec{j, balanced_group(t.r, pg, j / fg), balanced_group(t.s, fg, j % fg)});
  }
  return out;
}

std::vector<std::uint64_t> combiners_for_partition(const ShuffleTopology& t, std::uint64_t partition) {
  if (partition >= t.r) throw InvalidTopology("partition out of range");
  const auto fg = t.file_groups();
  const auto g = group_of(t.r, t.partition_groups(), partition);
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = 0; j < fg; ++j) out.push_back(g * fg + j);
  return out;
}

std::uint64_t read_count(const ShuffleTopology& t) {
  t.validate();
  if (t.kind == ShuffleKind::kStandard) return 2 * t.s * t.r;
  return 2 * (t.s * t.p.denominator + t.r * t.f.denominator);
}

std::uint64_t write_count(const ShuffleTopology& t, bool doublewrite) {
  std::uint64_t objects = t.s + t.combiner_count();
  return doublewrite ? 2 * objects : objects;
}

ShuffleCostEstimate estimate_cost(const ShuffleTopology& t, const store::PriceSheet& prices, bool doublewrite) {
  ShuffleCostEstimate e;
  if (t.s == 0) return e;
  e.get_count = read_count(t);
  e.put_count = write_count(t, doublewrite);
  e.get_dollars = static_cast<double>(e.get_count) * prices.get_price;
  e.put_dollars = static_cast<double>(e.put_count) * prices.put_price;
  return e;
}

}  // namespace cirrus::shuffle
