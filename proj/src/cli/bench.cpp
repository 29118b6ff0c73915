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

#include "cirrus/cli/bench.hpp"

#include <sstream>

#include "cirrus/mitigation/store_client.hpp"

namespace cirrus::bench {
namespace {

Series timed_series(const coord::RunConfig& config, const mitigation::MitigationSettings& settings,
                    const std::string& mode, std::size_t count, std::uint64_t object_bytes, bool writes) {
  // Keys and request context leave the mode out so every mode draws the
  // same latency samples and the series are paired.
  coord::Environment env(config);
  const store::ObjectKey key("bench/object");
  auto payload = store::make_payload(store::Bytes(object_bytes, 0x5a));
  if (!writes) env.store().preload(key, payload);
  Series series{mode, {}};
  series.ms.reserve(count);
  env.executor().run([&] {
    mitigation::StoreClient client(env.store(), settings, store::RequestContext{"bench", "client"});
    auto& ex = env.executor();
    for (std::size_t i = 0; i < count; ++i) {
      const auto start = ex.now();
      if (writes) {
        client.put(store::ObjectKey("bench/w/" + std::to_string(i)), payload);
      } else {
        client.get(key);
      }
      series.ms.push_back(sim::to_ms(ex.now() - start));
    }
  });
  return series;
}

RunPoint run_point(const coord::PhysicalPlan& plan, const datagen::GeneratedData& data, const coord::RunConfig& config,
                   std::string label) {
  auto report = coord::run_query(plan, data, config);
  RunPoint p;
  p.label = std::move(label);
  p.seed = config.seed;
  p.tasks = config.task_override.value_or(0);
  p.ok = report.ok;
  p.latency_ms = report.wall_ms;
  p.dollars = report.cost.total_dollars();
  p.gets = report.cost.gets;
  p.puts = report.cost.puts;
  if (report.ok) p.result_csv = coord::result_csv(report.result);
  return p;
}

}  // namespace

std::vector<Series> read_cdf(const coord::RunConfig& config, std::size_t reads, std::uint64_t object_bytes) {
  auto off = config.mitigation;
  off.rsm = false;
  auto on = config.mitigation;
  on.rsm = true;
  return {timed_series(config, off, "off", reads, object_bytes, false),
          timed_series(config, on, "rsm", reads, object_bytes, false)};
}

std::vector<Series> write_cdf(const coord::RunConfig& config, std::size_t writes, std::uint64_t object_bytes) {
  std::vector<Series> out;
  for (auto mode : {mitigation::WsmMode::kOff, mitigation::WsmMode::kSingle, mitigation::WsmMode::kFull}) {
    auto s = config.mitigation;
    s.wsm = mode;
    s.doublewrite = false;
    out.push_back(timed_series(config, s, std::string(mitigation::to_string(mode)), writes, object_bytes, true));
  }
  return out;
}

std::string series_csv(const std::vector<Series>& series) {
  std::ostringstream out;
  out << "mode,index,completion_ms\n";
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.ms.size(); ++i) out << s.mode << ',' << i << ',' << s.ms[i] << '\n';
  return out.str();
}

std::vector<std::pair<std::string, mitigation::MitigationSettings>> ablation_steps(
    const mitigation::MitigationSettings& enabled) {
  auto s = mitigation::MitigationSettings::off();
  s.retry_factor = enabled.retry_factor;
  s.read_model = enabled.read_model;
  s.write_model = enabled.write_model;
  s.poll_interval_ms = enabled.poll_interval_ms;
  s.poll_budget_ms = enabled.poll_budget_ms;
  std::vector<std::pair<std::string, mitigation::MitigationSettings>> steps;
  steps.emplace_back("none", s);
  s.parallel_reads = std::max<std::uint32_t>(2, enabled.parallel_reads);
  steps.emplace_back("parallel_reads", s);
  s.rsm = true;
  steps.emplace_back("rsm", s);
  s.wsm = mitigation::WsmMode::kFull;
  steps.emplace_back("wsm", s);
  s.doublewrite = true;
  steps.emplace_back("doublewrite", s);
  return steps;
}

std::vector<RunPoint> ablation(const coord::PhysicalPlan& plan, const datagen::GeneratedData& data,
                               const coord::RunConfig& config, const std::vector<std::uint64_t>& seeds) {
  std::vector<RunPoint> out;
  const auto steps = ablation_steps(config.mitigation);
  for (auto seed : seeds) {
    for (const auto& [label, settings] : steps) {
      auto c = config;
      c.seed = seed;
      c.store.reseed(seed);
      c.mitigation = settings;
      out.push_back(run_point(plan, data, c, label));
    }
  }
  return out;
}

std::vector<RunPoint> tradeoff(const coord::PhysicalPlan& plan, const datagen::GeneratedData& data,
                               const coord::RunConfig& config, const std::vector<std::uint32_t>& task_counts) {
  std::vector<RunPoint> out;
  for (auto n : task_counts) {
    auto c = config;
    c.task_override = n;
    out.push_back(run_point(plan, data, c, "tasks=" + std::to_string(n)));
  }
  return out;
}

std::string run_points_csv(const std::vector<RunPoint>& points) {
  std::ostringstream out;
  out.precision(12);
  out << "label,seed,tasks,ok,latency_ms,dollars,gets,puts\n";
  for (const auto& p : points)
    out << p.label << ',' << p.seed << ',' << p.tasks << ',' << (p.ok ? 1 : 0) << ',' << p.latency_ms << ','
        << p.dollars << ',' << p.gets << ',' << p.puts << '\n';
  return out.str();
}

std::vector<ShuffleCostRow> shuffle_cost_sweep(const store::PriceSheet& prices, bool doublewrite) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> sizes = {{512, 128}, {5120, 1280}};
  for (std::uint64_t s : {16, 64, 256, 1024})
    for (std::uint64_t r : {16, 64, 256, 1024}) sizes.emplace_back(s, r);
  std::vector<ShuffleCostRow> rows;
  for (auto [s, r] : sizes) {
    for (auto t : {shuffle::ShuffleTopology::standard(s, r), shuffle::ShuffleTopology::multistage_default(s, r)})
      rows.push_back({t, shuffle::estimate_cost(t, prices, doublewrite)});
  }
  return rows;
}

std::string shuffle_cost_csv(const std::vector<ShuffleCostRow>& rows) {
  std::ostringstream out;
  out.precision(12);
  out << "s,r,kind,p,f,combiners,gets,puts,get_dollars,put_dollars,total_dollars\n";
  for (const auto& row : rows) {
    const auto& t = row.topology;
    const bool ms = t.kind == shuffle::ShuffleKind::kMultistage;
    out << t.s << ',' << t.r << ',' << (ms ? "multistage" : "standard") << ',' << (ms ? t.p.str() : "") << ','
        << (ms ? t.f.str() : "") << ',' << t.combiner_count() << ',' << row.estimate.get_count << ','
        << row.estimate.put_count << ',' << row.estimate.get_dollars << ',' << row.estimate.put_dollars << ','
        << row.estimate.total_dollars() << '\n';
  }
  return out.str();
}

}  // namespace cirrus::bench
