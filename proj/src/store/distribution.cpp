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

#include "cirrus/store/distribution.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace cirrus::store {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double inverse_normal_cdf(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

void validate(const Distribution::Kind& kind) {
  std::visit(Overloaded{
                 [](const PointMass& d) {
                   if (!(d.ms >= 0)) throw std::invalid_argument("point mass must be non-negative");
                 },
                 [](const UniformMs& d) {
                   if (!(d.low_ms >= 0 && d.high_ms >= d.low_ms))
                     throw std::invalid_argument("uniform bounds must satisfy 0 <= low <= high");
                 },
                 [](const LogNormalMs& d) {
                   if (!(d.median_ms > 0 && d.sigma >= 0))
                     throw std::invalid_argument("lognormal needs median > 0 and sigma >= 0");
                 },
                 [](const ExponentialMs& d) {
                   if (!(d.mean_ms > 0)) throw std::invalid_argument("exponential mean must be positive");
                 },
                 [](const EmpiricalMs& d) {
                   const auto& q = d.quantiles;
                   if (q.size() < 2 || q.front().first != 0.0 || q.back().first != 1.0)
                     throw std::invalid_argument("empirical table must span quantiles 0 through 1");
                   for (std::size_t i = 0; i < q.size(); ++i) {
                     if (q[i].second < 0) throw std::invalid_argument("empirical latencies must be non-negative");
                     if (i > 0 && (q[i].first <= q[i - 1].first || q[i].second < q[i - 1].second))
                       throw std::invalid_argument("empirical table must be strictly increasing in quantile");
                   }
                 },
             },
             kind);
}

}  // namespace

Distribution::Distribution(Kind kind) : kind_(std::move(kind)) { validate(kind_); }

double Distribution::quantile(double q) const {
  return std::visit(Overloaded{
                        [](const PointMass& d) { return d.ms; },
                        [q](const UniformMs& d) { return d.low_ms + q * (d.high_ms - d.low_ms); },
                        [q](const LogNormalMs& d) {
                          if (d.sigma == 0 || q <= 0.0 || q >= 1.0) {
                            if (d.sigma == 0) return d.median_ms;
                            return q <= 0.0 ? 0.0 : INFINITY;
                          }
                          return d.median_ms * std::exp(d.sigma * inverse_normal_cdf(q));
                        },
                        [q](const ExponentialMs& d) { return -d.mean_ms * std::log1p(-q); },
                        [q](const EmpiricalMs& d) {
                          const auto& t = d.quantiles;
                          auto hi = std::upper_bound(t.begin(), t.end(), q,
                                                     [](double v, const auto& point) { return v < point.first; });
                          if (hi == t.begin()) return t.front().second;
                          if (hi == t.end()) return t.back().second;
                          auto lo = hi - 1;
                          double w = (q - lo->first) / (hi->first - lo->first);
                          return lo->second + w * (hi->second - lo->second);
                        },
                    },
                    kind_);
}

double Distribution::sample(StreamRng& rng) const {
  return std::visit(Overloaded{
                        [](const PointMass& d) { return d.ms; },
                        [&rng](const UniformMs& d) { return d.low_ms + rng.uniform() * (d.high_ms - d.low_ms); },
                        [&rng](const LogNormalMs& d) {
                          if (d.sigma == 0) return d.median_ms;
                          std::lognormal_distribution<double> dist(std::log(d.median_ms), d.sigma);
                          return dist(rng);
                        },
                        [&rng](const ExponentialMs& d) {
                          std::exponential_distribution<double> dist(1.0 / d.mean_ms);
                          return dist(rng);
                        },
                        [this, &rng](const EmpiricalMs&) { return quantile(rng.uniform()); },
                    },
                    kind_);
}

std::string Distribution::describe() const {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const PointMass& d) { out << "point(" << d.ms << "ms)"; },
                 [&](const UniformMs& d) { out << "uniform(" << d.low_ms << ", " << d.high_ms << "ms)"; },
                 [&](const LogNormalMs& d) { out << "lognormal(median=" << d.median_ms << "ms, sigma=" << d.sigma << ")"; },
                 [&](const ExponentialMs& d) { out << "exponential(mean=" << d.mean_ms << "ms)"; },
                 [&](const EmpiricalMs& d) { out << "empirical(" << d.quantiles.size() << " points)"; },
             },
             kind_);
  return out.str();
}

}  // namespace cirrus::store
