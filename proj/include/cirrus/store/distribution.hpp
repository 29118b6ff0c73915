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

#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "cirrus/store/random.hpp"

namespace cirrus::store {

/// Latency distributions, all in milliseconds.
struct PointMass {
  double ms = 0.0;
};

struct UniformMs {
  double low_ms = 0.0;
  double high_ms = 0.0;
};

/// Parameterised by median (e^mu) rather than mu so profiles read naturally.
struct LogNormalMs {
  double median_ms = 1.0;
  double sigma = 0.0;
};

struct ExponentialMs {
  double mean_ms = 1.0;
};

/// Piecewise-linear inverse CDF through (quantile, ms) points. The first point
/// must sit at quantile 0 and the last at quantile 1.
struct EmpiricalMs {
  std::vector<std::pair<double, double>> quantiles;
};

class Distribution {
 public:
  using Kind = std::variant<PointMass, UniformMs, LogNormalMs, ExponentialMs, EmpiricalMs>;

  Distribution() : kind_(PointMass{}) {}
  Distribution(Kind kind);  // NOLINT(google-explicit-constructor)
  template <typename T>
    requires(!std::is_same_v<std::decay_t<T>, Kind> && !std::is_same_v<std::decay_t<T>, Distribution> &&
             std::is_constructible_v<Kind, T>)
  Distribution(T&& alternative)  // NOLINT(google-explicit-constructor)
      : Distribution(Kind(std::forward<T>(alternative))) {}

  double sample(StreamRng& rng) const;
  double quantile(double q) const;
  double median() const { return quantile(0.5); }

  const Kind& kind() const { return kind_; }
  std::string describe() const;

 private:
  Kind kind_;
};

}  // namespace cirrus::store
