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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every tolerance used below is fixed here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cirrus/cli/bench.hpp"
#include "cirrus/coord/coordinator.hpp"
#include "cirrus/mitigation/store_client.hpp"
#include "cirrus/shuffle/topology.hpp"
#include "reference.hpp"

namespace {

using namespace cirrus;

const std::string kPlans = CIRRUS_FIXTURE_DIR "/plans/";
const std::string kConfigs = CIRRUS_FIXTURE_DIR "/configs/";

// Tolerances.
constexpr double kFloatRelTol = 1e-9;
constexpr double kWorkedSmallDollars = 0.057;
constexpr double kWorkedSmallTol = 0.001;
constexpr double kWorkedBigDollars = 5.24;
constexpr double kWorkedBigTol = 0.005;
constexpr double kRsmTailCut = 0.60;
constexpr double kRsmMaxKs = 0.02;
constexpr double kWsmCut = 0.30;
constexpr double kVisibilityQ = 0.02;
constexpr double kSigmas = 3.0;
constexpr double kAblationSpeedup = 2.0;
constexpr double kAblationCostBand = 0.15;
constexpr double kTraceStepMs = 0.5;  // 2 kHz

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Raw ledger contents of one run alongside the dollars it reported.
struct Metered {
  std::string label;
  store::CostSummary reported;
  std::vector<store::RequestRecord> requests;
  std::vector<store::InvocationRecord> invocations;
  store::PriceSheet prices;
};

std::vector<Metered> g_metered;

struct Run {
  coord::QueryReport report;
  store::Bytes result_bytes;
  std::vector<store::RequestRecord> requests;
  std::vector<std::pair<sim::SimTime, std::uint32_t>> active_trace;
  std::uint32_t peak_active = 0;
};

Run run_plan(const std::string& label, const coord::PhysicalPlan& plan, const datagen::GeneratedData& data,
             coord::RunConfig config) {
  config.data = data.catalog.options;
  coord::Environment env(config);
  env.load(data);
  auto compiled = coord::compile_plan(plan, data.catalog, config);
  auto reports = coord::run_concurrent({compiled}, env);
  Run run;
  run.report = std::move(reports.at(0));
  if (auto p = env.store().peek(coord::result_key(plan.query))) run.result_bytes = **p;
  run.requests = env.ledger().requests(plan.query);
  run.active_trace = env.runtime().active_trace();
  run.peak_active = env.runtime().peak_active();
  g_metered.push_back({label, run.report.cost, run.requests, env.ledger().invocations(plan.query), env.ledger().prices()});
  return run;
}

coord::PhysicalPlan fixture(const std::string& name) { return coord::load_plan(kPlans + name + ".json"); }
coord::RunConfig config_file(const std::string& name) { return coord::load_config(kConfigs + name + ".json"); }

datagen::GeneratedData make_data(std::uint64_t scale, std::uint64_t object_size) {
  datagen::DatagenOptions o;
  o.scale = scale;
  o.object_size = object_size;
  return datagen::generate(o);
}

const datagen::GeneratedData& data_small() {
  static auto d = make_data(20000, 64 << 10);
  return d;
}
const datagen::GeneratedData& data_medium() {
  static auto d = make_data(100000, 256 << 10);
  return d;
}
const datagen::GeneratedData& data_large() {
  static auto d = make_data(1000000, 8 << 20);
  return d;
}

double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::max<std::size_t>(rank, 1) - 1];
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_distance(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Sequential requests through one store client, as the read/write CDF
// microbenchmarks do, keeping the ledger for reconciliation.
std::vector<double> client_series(const std::string& label, const coord::RunConfig& config,
                                  const mitigation::MitigationSettings& settings, std::size_t count,
                                  std::uint64_t bytes, bool writes) {
  coord::Environment env(config);
  const store::ObjectKey key("acc/object");
  auto payload = store::make_payload(store::Bytes(bytes, 0x11));
  if (!writes) env.store().preload(key, payload);
  std::vector<double> ms;
  ms.reserve(count);
  env.executor().run([&] {
    mitigation::StoreClient client(env.store(), settings, {"acc", "client"});
    auto& ex = env.executor();
    for (std::size_t i = 0; i < count; ++i) {
      const auto start = ex.now();
      if (writes)
        client.put(store::ObjectKey("acc/w/" + std::to_string(i)), payload);
      else
        client.get(key);
      ms.push_back(sim::to_ms(ex.now() - start));
    }
  });
  g_metered.push_back({label, env.ledger().summary(), env.ledger().requests(), env.ledger().invocations(),
                       env.ledger().prices()});
  return ms;
}

// ---------------------------------------------------------------------------

std::string producer_plan(const std::string& query, std::uint64_t s, std::uint64_t r, const std::string& shuffle) {
  return R"({"format_version":1,"query":")" + query + R"(","stages":[
    {"id":"prod","tasks":)" + std::to_string(s) + R"(,"source":{"scan":{"table":"lineitem","columns":["l_orderkey"]}},
     "sink":{"partition":{"keys":["l_orderkey"]}}},
    {"id":"cons","tasks":)" + std::to_string(r) + R"(,"source":{"shuffle_read":{"stage":"prod","shuffle":)" + shuffle + R"(}},
     "ops":[{"partial_agg":{"group_by":[],"aggs":[{"fn":"count","as":"n"}]}}],"sink":{"single":{}}},
    {"id":"result","tasks":1,"source":{"gather":{"stage":"cons"}},
     "ops":[{"final_agg":{"group_by":[],"aggs":[{"fn":"count","as":"n"}]}}],"sink":{"result":{}}}]})";
}

Verdict criterion1() {
  const auto& data = data_small();
  std::mt19937_64 rng(4242);
  auto pick = [&](std::uint64_t lo, std::uint64_t hi) { return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng); };
  int matched = 0;
  std::ostringstream bad;
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t s = pick(1, 24), r = pick(1, 24);
    const bool multistage = i % 2 == 1;
    std::uint64_t P = 1, F = 1;
    std::string shuffle = R"("standard")";
    if (multistage) {
      P = pick(1, r);
      F = pick(1, s);
      shuffle = R"({"multistage":{"p":"1/)" + std::to_string(P) + R"(","f":"1/)" + std::to_string(F) + R"("}})";
    }
    const std::string q = "shuf" + std::to_string(i);
    auto plan = coord::parse_plan(producer_plan(q, s, r, shuffle));
    auto c = coord::RunConfig::defaults();
    c.mitigation = mitigation::MitigationSettings::off();
    auto run = run_plan("c1/" + q, plan, data, c);

    // Expected counts written out directly from the topology.
    const std::uint64_t want_gets = multistage ? 2 * (s * P + r * F) : 2 * s * r;
    const std::uint64_t want_puts = s + (multistage ? P * F : 0);
    std::set<store::ObjectKey> shuffle_keys;
    for (std::uint64_t t = 0; t < s; ++t) shuffle_keys.insert(coord::stage_output_key(q, "prod", t));
    for (std::uint64_t t = 0; t < P * F && multistage; ++t)
      shuffle_keys.insert(coord::stage_output_key(q, coord::combiner_stage_id("prod"), t));
    std::uint64_t gets = 0, puts = 0;
    for (const auto& rec : run.requests) {
      if (!shuffle_keys.count(rec.key)) continue;
      (rec.kind == store::RequestKind::kGet ? gets : puts)++;
    }
    auto topo = multistage ? shuffle::ShuffleTopology::multistage(s, r, {P}, {F}) : shuffle::ShuffleTopology::standard(s, r);
    const bool count_ok = run.report.ok && run.report.result.num_rows() == 1 &&
                          run.report.result.column(0).int_at(0) ==
                              static_cast<std::int64_t>(datagen::table_rows("lineitem", data.catalog.options.scale));
    if (gets == want_gets && puts == want_puts && shuffle::read_count(topo) == want_gets &&
        shuffle::write_count(topo) == want_puts && count_ok) {
      ++matched;
    } else {
      bad << " [" << topo.describe() << " gets " << gets << "/" << want_gets << " puts " << puts << "/" << want_puts
          << (count_ok ? "" : " wrong result") << (run.report.ok ? "" : " error: " + run.report.error) << "]";
    }
  }

  store::PriceSheet prices;
  auto small = shuffle::estimate_cost(shuffle::ShuffleTopology::standard(512, 128), prices, true);
  const double small_exact = 131072.0 * prices.get_price + 1024.0 * prices.put_price;
  const bool small_ok = small.get_count == 131072 && small.put_count == 1024 &&
                        small.get_dollars == 131072.0 * prices.get_price &&
                        small.put_dollars == 1024.0 * prices.put_price &&
                        std::abs(small.total_dollars() - small_exact) <= 1e-15 &&
                        std::abs(small.total_dollars() - kWorkedSmallDollars) <= kWorkedSmallTol;
  auto big = shuffle::estimate_cost(shuffle::ShuffleTopology::standard(5120, 1280), prices);
  const bool big_ok = big.get_count == 13107200 && big.get_dollars == 13107200.0 * prices.get_price &&
                      std::abs(big.get_dollars - kWorkedBigDollars) <= kWorkedBigTol;
  auto ms_big = shuffle::estimate_cost(shuffle::ShuffleTopology::multistage_default(5120, 1280), prices);

  Verdict v;
  v.pass = matched == 20 && small_ok && big_ok;
  v.detail = fmt("%d/20 executed topologies metered exactly; 512x128 -> %llu GETs, $%.6f with doublewrite; "
                 "5120x1280 standard -> $%.5f in GETs (multistage default: %llu GETs, $%.5f)",
                 matched, static_cast<unsigned long long>(small.get_count), small.total_dollars(), big.get_dollars,
                 static_cast<unsigned long long>(ms_big.get_count), ms_big.total_dollars()) +
             bad.str();
  return v;
}

const std::vector<std::string> kCorrectnessPlans = {
    "q1_pricing_summary", "q6_revenue_change", "supplier_volume", "priority_broadcast",  "q12_shipmode",
    "q12_multistage",     "copartitioned_multijoin", "customer_nation", "orders_topk", "scan_count"};

Verdict criterion2() {
  const auto& data = data_medium();
  int runs = 0, matched = 0;
  std::ostringstream bad;
  for (const auto& name : kCorrectnessPlans) {
    auto plan = fixture(name);
    auto expected = testing::reference_run(plan, data.catalog.options);
    const bool ordered = testing::terminal_is_ordered(plan);
    for (std::uint32_t tasks : {1u, 4u, 16u}) {
      auto c = coord::RunConfig::defaults();
      c.task_override = tasks;
      auto run = run_plan("c2/" + name + "/" + std::to_string(tasks), plan, data, c);
      ++runs;
      std::string why;
      if (run.report.ok && testing::same_result(run.report.result, expected, ordered, kFloatRelTol, &why)) {
        ++matched;
      } else {
        bad << " [" << name << " tasks=" << tasks << ": " << (run.report.ok ? why : run.report.error) << "]";
      }
    }
  }
  return {runs == matched && runs >= 24,
          fmt("%d/%d plan runs (%zu plans x tasks {1,4,16}, %llu lineitem rows) match the reference", matched, runs,
              kCorrectnessPlans.size(), static_cast<unsigned long long>(data.catalog.options.scale)) +
              bad.str()};
}

Verdict criterion3() {
  auto c = config_file("read_tail");
  constexpr std::size_t kReads = 50000;
  constexpr std::uint64_t kBytes = 256 << 10;
  auto off = c.mitigation;
  off.rsm = false;
  auto on = c.mitigation;
  on.rsm = true;
  auto plain = client_series("c3/off", c, off, kReads, kBytes, false);
  auto hedged = client_series("c3/rsm", c, on, kReads, kBytes, false);
  const double p_off = percentile(plain, 0.999), p_on = percentile(hedged, 0.999);

  // Analytic construction: a read that has not answered by h is raced by an
  // independent copy issued at h (sharing bandwidth with the first), and the
  // earlier finisher wins.
  const auto& g = c.store.get;
  const auto& body = std::get<store::LogNormalMs>(g.base.kind());
  const double tail_ms = std::get<store::PointMass>(g.tail.kind()).ms;
  const double transfer = static_cast<double>(kBytes) * g.per_byte_time_s * 1000.0;
  const double h = on.retry_factor * (on.read_model.l_ms + static_cast<double>(kBytes) / on.read_model.t_bytes_per_s * 1000.0);
  std::mt19937_64 rng(99);
  std::lognormal_distribution<double> base(std::log(body.median_ms), body.sigma);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](double share) { return base(rng) + transfer * share + (u(rng) < g.tail_probability ? tail_ms : 0.0); };
  std::vector<double> oracle(200000);
  for (auto& y : oracle) {
    const double first = draw(1.0);
    const double second = draw(2.0);
    y = std::min(first, h + second);
  }
  const double ks = ks_distance(hedged, oracle);
  const double cut = 1.0 - p_on / p_off;
  return {cut >= kRsmTailCut && ks <= kRsmMaxKs,
          fmt("p99.9 %.1f ms -> %.1f ms (%.1f%% lower, need >= %.0f%%); KS vs min-of-two = %.4f (<= %.2f), h = %.2f ms",
              p_off, p_on, 100 * cut, 100 * kRsmTailCut, ks, kRsmMaxKs, h)};
}

Verdict criterion4() {
  auto c = config_file("write_stall");
  constexpr std::size_t kWrites = 10000;
  constexpr std::uint64_t kBytes = 100ull << 20;
  std::map<std::string, double> p99;
  for (auto mode : {mitigation::WsmMode::kOff, mitigation::WsmMode::kSingle, mitigation::WsmMode::kFull}) {
    auto s = c.mitigation;
    s.wsm = mode;
    s.doublewrite = false;
    const std::string name(mitigation::to_string(mode));
    p99[name] = percentile(client_series("c4/" + name, c, s, kWrites, kBytes, true), 0.99);
  }
  const double off = p99["off"], single = p99["single"], full = p99["full"];
  return {full < single && single < off && full <= (1.0 - kWsmCut) * off,
          fmt("p99 off %.0f ms, single %.0f ms, full %.0f ms (full %.1f%% below off, need >= %.0f%%)", off, single,
              full, 100 * (1 - full / off), 100 * kWsmCut)};
}

Verdict criterion5() {
  auto c = config_file("visibility");
  constexpr std::size_t kTrials = 40000;
  const double q = c.store.put.visibility_delay_probability;
  mitigation::MitigationStats stats;
  {
    coord::Environment env(c);
    env.executor().run([&] {
      mitigation::StoreClient client(env.store(), c.mitigation, {"acc", "dw"});
      auto payload = store::make_payload(store::Bytes(4096, 0x22));
      for (std::size_t i = 0; i < kTrials; ++i) {
        const store::ObjectKey key("acc/dw/" + std::to_string(i));
        client.write_object(key, payload);
        store::GetResult out;
        client.locate(key, store::ByteRange::all(), out);
      }
      stats = client.stats();
    });
    g_metered.push_back(
        {"c5/trials", env.ledger().summary(), env.ledger().requests(), env.ledger().invocations(), env.ledger().prices()});
  }
  const double frac = static_cast<double>(stats.both_invisible) / kTrials;
  const double sigma = std::sqrt(q * q * (1 - q * q) / kTrials);
  const bool stat_ok = q == kVisibilityQ && std::abs(frac - q * q) <= kSigmas * sigma;

  const auto& data = data_medium();
  auto plan = fixture("q12_shipmode");
  auto on = run_plan("c5/q12/doublewrite", plan, data, c);
  auto c_off = c;
  c_off.mitigation.doublewrite = false;
  auto off = run_plan("c5/q12/single", plan, data, c_off);
  const bool same = on.report.ok && off.report.ok && on.result_bytes == off.result_bytes &&
                    format::same_rows(on.report.result, off.report.result);
  return {stat_ok && same,
          fmt("both keys invisible on %llu/%zu reads = %.5f vs q^2 = %.5f +- %.5f (3 sigma); fallbacks %.4f; "
              "q12 result %s with doublewrite on/off (query waits: %.0f ms vs %.0f ms)",
              static_cast<unsigned long long>(stats.both_invisible), kTrials, frac, q * q, kSigmas * sigma,
              static_cast<double>(stats.doublewrite_fallbacks) / kTrials, same ? "identical" : "DIFFERS",
              on.report.mitigation.visibility_wait_ms, off.report.mitigation.visibility_wait_ms)};
}

Verdict criterion6() {
  const auto& data = data_large();
  auto plan = fixture("q12_shipmode");
  auto c = config_file("tail_profile");
  c.task_override = 32;
  const auto steps = bench::ablation_steps(c.mitigation);
  std::vector<std::vector<double>> latency(steps.size()), cost(steps.size());
  bool all_ok = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    for (std::size_t k = 0; k < steps.size(); ++k) {
      auto rc = c;
      rc.seed = seed;
      rc.store.reseed(seed);
      rc.mitigation = steps[k].second;
      auto run = run_plan("c6/" + steps[k].first + "/" + std::to_string(seed), plan, data, rc);
      all_ok = all_ok && run.report.ok;
      latency[k].push_back(run.report.wall_ms);
      cost[k].push_back(run.report.cost.total_dollars());
    }
  }
  bool monotone = true, cost_ok = true;
  std::ostringstream d;
  const double base_cost = mean(cost[0]);
  for (std::size_t k = 0; k < steps.size(); ++k) {
    if (k > 0 && mean(latency[k]) > mean(latency[k - 1])) monotone = false;
    const double rel = mean(cost[k]) / base_cost - 1.0;
    if (std::abs(rel) > kAblationCostBand) cost_ok = false;
    d << (k ? "; " : "") << steps[k].first << fmt(" %.0f ms $%.5f (%+.0f%%)", mean(latency[k]), mean(cost[k]), 100 * rel);
  }
  const double speedup = mean(latency[0]) / mean(latency.back());
  const bool fast = speedup >= kAblationSpeedup;
  std::string why;
  if (!monotone) why += " latency not monotone;";
  if (!fast) why += " speedup below 2x;";
  if (!cost_ok) why += fmt(" cost leaves the +-%.0f%% band;", 100 * kAblationCostBand);
  if (!all_ok) why += " a run failed;";
  return {all_ok && monotone && fast && cost_ok, fmt("speedup %.2fx over 10 seeds: ", speedup) + d.str() + why};
}

Verdict criterion7() {
  const auto& data = data_medium();
  auto plan = fixture("q1_pricing_summary");
  auto piped = config_file("slow_producer");
  auto plain = piped;
  plain.pipelining = false;
  auto a = run_plan("c7/off", plan, data, plain);
  auto b = run_plan("c7/pipelined", plan, data, piped);
  const bool ok = a.report.ok && b.report.ok;
  const bool same = ok && a.result_bytes == b.result_bytes && format::same_rows(a.report.result, b.report.result);
  return {ok && same && b.report.wall_ms < a.report.wall_ms && b.report.cost.gets > a.report.cost.gets,
          fmt("threshold %.1f: wall %.1f ms -> %.1f ms, GETs %llu -> %llu, results %s", piped.pipeline_threshold,
              a.report.wall_ms, b.report.wall_ms, static_cast<unsigned long long>(a.report.cost.gets),
              static_cast<unsigned long long>(b.report.cost.gets), same ? "identical" : "DIFFER")};
}

Verdict criterion8() {
  const auto& data = data_medium();
  auto plan = fixture("stress_wide");
  auto c = config_file("stress_cap16");
  const std::uint32_t cap = c.limits.max_concurrent;
  std::uint32_t widest = 0;
  for (const auto& st : plan.stages) widest = std::max(widest, st.tasks);
  auto run = run_plan("c8/stress_wide", plan, data, c);

  // Sample the active-invocation step function on a fixed grid.
  std::uint32_t sampled_max = 0, event_max = 0;
  std::size_t samples = 0;
  const auto& trace = run.active_trace;
  for (const auto& [t, n] : trace) event_max = std::max(event_max, n);
  if (!trace.empty()) {
    const double end = sim::to_ms(trace.back().first);
    std::size_t i = 0;
    std::uint32_t current = 0;
    for (double t = 0.0; t <= end; t += kTraceStepMs, ++samples) {
      while (i < trace.size() && sim::to_ms(trace[i].first) <= t) current = trace[i++].second;
      sampled_max = std::max(sampled_max, current);
    }
  }
  std::string why;
  const bool correct = run.report.ok && testing::same_result(run.report.result,
                                                             testing::reference_run(plan, data.catalog.options),
                                                             testing::terminal_is_ordered(plan), kFloatRelTol, &why);
  return {widest >= 4 * cap && sampled_max <= cap && event_max <= cap && run.peak_active <= cap && correct &&
              samples > 0,
          fmt("cap %u, widest stage %u tasks; max active %u over %zu samples at %.0f Hz (%u at trace events); "
              "result %s",
              cap, widest, sampled_max, samples, 1000.0 / kTraceStepMs, event_max, correct ? "correct" : "WRONG") +
              (why.empty() ? "" : " (" + why + ")")};
}

Verdict criterion9() {
  std::size_t bad = 0;
  std::ostringstream d;
  for (const auto& m : g_metered) {
    std::uint64_t gets = 0, puts = 0;
    for (const auto& r : m.requests) (r.kind == store::RequestKind::kGet ? gets : puts)++;
    sim::SimDuration billed{};
    for (const auto& inv : m.invocations) billed += inv.billed;
    const double get_d = static_cast<double>(gets) * m.prices.get_price;
    const double put_d = static_cast<double>(puts) * m.prices.put_price;
    const double inv_d = sim::to_ms(billed) * m.prices.invocation_price_per_ms;
    const double total = get_d + put_d + 0.0 + inv_d;
    const auto& r = m.reported;
    if (r.gets != gets || r.puts != puts || r.invocations != m.invocations.size() || r.billed != billed ||
        r.get_dollars != get_d || r.put_dollars != put_d || r.invocation_dollars != inv_d || r.storage_dollars != 0.0 ||
        r.total_dollars() != total) {
      if (bad++ < 5) d << " [" << m.label << fmt(": reported $%.12f, recomputed $%.12f]", r.total_dollars(), total);
    }
  }
  return {bad == 0 && !g_metered.empty(),
          fmt("%zu runs from criteria 1-8 reconciled against raw request and billing records, %zu mismatched",
              g_metered.size(), bad) +
              d.str()};
}

Verdict criterion10() {
  std::vector<std::string> diffs;
  auto same_run = [&](const std::string& what, const Run& a, const Run& b, bool timings) {
    if (!a.report.ok || !b.report.ok) diffs.push_back(what + ": run failed");
    if (a.result_bytes != b.result_bytes || a.result_bytes.empty()) diffs.push_back(what + ": result bytes");
    if (a.report.cost.gets != b.report.cost.gets || a.report.cost.puts != b.report.cost.puts)
      diffs.push_back(what + ": request counts");
    if (timings && (a.report.wall_ms != b.report.wall_ms || a.report.cost.billed != b.report.cost.billed))
      diffs.push_back(what + ": timings");
  };

  {
    const auto& data = data_medium();
    auto plan = fixture("q12_multistage");
    auto c = coord::RunConfig::defaults();
    c.task_override = 16;
    same_run("q12_multistage", run_plan("c10/q12ms/a", plan, data, c), run_plan("c10/q12ms/b", plan, data, c), true);
    auto v = config_file("visibility");
    same_run("q12 with visibility delays", run_plan("c10/vis/a", fixture("q12_shipmode"), data, v),
             run_plan("c10/vis/b", fixture("q12_shipmode"), data, v), true);
  }
  {
    auto c = config_file("tail_profile");
    c.task_override = 32;
    c.seed = 3;
    c.store.reseed(3);
    auto plan = fixture("q12_shipmode");
    same_run("ablation seed 3", run_plan("c10/tail/a", plan, data_large(), c),
             run_plan("c10/tail/b", plan, data_large(), c), true);
  }
  {
    // Real threads: results and request counts must repeat, timings may not.
    auto c = coord::RunConfig::defaults();
    c.clock = coord::ClockMode::kScaled;
    c.mitigation = mitigation::MitigationSettings::off();
    auto plan = fixture("q12_shipmode");
    auto a = run_plan("c10/scaled/a", plan, data_medium(), c);
    auto b = run_plan("c10/scaled/b", plan, data_medium(), c);
    same_run("q12 on the scaled clock", a, b, false);
    auto v = coord::RunConfig::defaults();
    v.mitigation = mitigation::MitigationSettings::off();
    auto virt = run_plan("c10/virtual", plan, data_medium(), v);
    same_run("scaled vs virtual clock", a, virt, false);
  }
  std::string d = "4 repeated virtual-clock runs identical in result bytes, request counts and timings; scaled-clock "
                  "runs identical in result bytes and request counts";
  if (!diffs.empty()) {
    d = "differences:";
    for (const auto& x : diffs) d += " [" + x + "]";
  }
  return {diffs.empty(), d};
}

}  // namespace

int main() {
  const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i]();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failed;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << v.detail << fmt(" (%.1f s)", secs)
              << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << std::endl;
  return failed ? 1 : 0;
}
