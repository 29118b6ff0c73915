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

#include "cirrus/cli/app.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>

#include "CLI11.hpp"
#include "cirrus/cli/bench.hpp"
#include "cirrus/coord/coordinator.hpp"

namespace cirrus::cli {
namespace {

namespace fs = std::filesystem;

struct Options {
  std::string config;
  std::vector<std::string> plans;
  std::string data;
  std::string out;
  std::string bench;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::uint32_t repeat = 1;
  std::uint64_t scale = 0;
  std::uint64_t object_size = 0;
  std::uint32_t tasks = 0;
  std::size_t samples = 0;
  std::uint64_t request_bytes = 256 * 1024;
  bool trace = false;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

coord::RunConfig make_config(const Options& o) {
  auto c = o.config.empty() ? coord::RunConfig::defaults() : coord::load_config(o.config);
  if (o.seed_set) {
    c.seed = o.seed;
    c.data.seed = o.seed;
    c.store.reseed(o.seed);
  }
  if (o.scale) c.data.scale = o.scale;
  if (o.object_size) c.data.object_size = o.object_size;
  if (o.tasks) c.task_override = o.tasks;
  c.validate();
  return c;
}

datagen::GeneratedData make_data(const Options& o, const coord::RunConfig& c) {
  if (!o.data.empty()) return datagen::read_directory(o.data);
  return datagen::generate(c.data);
}

int cmd_gendata(const Options& o, std::ostream& out) {
  datagen::DatagenOptions d;
  if (o.scale || o.seed_set || o.object_size || !o.config.empty()) {
    if (!o.config.empty()) d = coord::load_config(o.config).data;
    if (o.seed_set) d.seed = o.seed;
    if (o.object_size) d.object_size = o.object_size;
    d.scale = o.scale ? o.scale : d.scale;
  }
  if (o.scale == 0 && o.config.empty()) d.scale = 0;
  auto data = datagen::generate(d);
  datagen::write_directory(data, o.out);
  out << "table,rows,objects\n";
  for (const auto& [name, t] : data.catalog.tables) out << name << ',' << t.rows << ',' << t.objects.size() << '\n';
  return kExitOk;
}

int cmd_run(const Options& o, std::ostream& out) {
  auto config = make_config(o);
  std::vector<coord::PhysicalPlan> plans;
  for (const auto& p : o.plans) plans.push_back(coord::load_plan(p));
  const auto data = make_data(o, config);

  std::vector<std::vector<coord::QueryReport>> runs(plans.size());
  bool failed = false;
  for (std::uint32_t k = 0; k < o.repeat; ++k) {
    auto c = config;
    c.seed = config.seed + k;
    c.store.reseed(c.seed);
    coord::Environment env(c);
    env.load(data);
    std::vector<coord::CompiledPlan> compiled;
    for (const auto& p : plans) compiled.push_back(coord::compile_plan(p, data.catalog, c));
    auto reports = coord::run_concurrent(compiled, env);
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const auto& r = reports[i];
      failed |= !r.ok;
      if (!o.out.empty()) {
        const fs::path base = fs::path(o.out) / (r.query + "-run" + std::to_string(k));
        write_file(base.string() + ".report.json", r.to_json());
        write_file(base.string() + ".report.txt", r.to_table());
        if (r.ok) write_file(base.string() + ".result.csv", coord::result_csv(r.result));
        if (o.trace) write_file(base.string() + ".trace.csv", coord::request_trace_csv(env.ledger(), r.query));
      }
      runs[i].push_back(r);
    }
  }

  out << std::fixed << std::setprecision(3);
  for (const auto& query_runs : runs) {
    std::vector<double> latencies;
    for (const auto& r : query_runs) latencies.push_back(r.wall_ms);
    const auto& median = query_runs[median_index(latencies)];
    out << median.to_table();
    out << "median of " << query_runs.size() << " run(s): " << median.wall_ms << " ms, $" << std::setprecision(6)
        << median.cost.total_dollars() << std::setprecision(3) << "\n\n";
    if (median.ok && o.out.empty()) out << coord::result_csv(median.result) << '\n';
  }
  return failed ? kExitQueryFailed : kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out) {
  const auto& kinds = bench::bench_kinds();
  if (std::find(kinds.begin(), kinds.end(), o.bench) == kinds.end()) throw UnknownBench("unknown bench '" + o.bench + "'");
  auto config = make_config(o);
  std::string csv;
  if (o.bench == "read-cdf") {
    csv = bench::series_csv(bench::read_cdf(config, o.samples ? o.samples : 50000, o.request_bytes));
  } else if (o.bench == "write-cdf") {
    csv = bench::series_csv(bench::write_cdf(config, o.samples ? o.samples : 10000, o.request_bytes));
  } else if (o.bench == "shuffle-cost") {
    csv = bench::shuffle_cost_csv(bench::shuffle_cost_sweep(config.prices, config.mitigation.doublewrite));
  } else {
    if (o.plans.size() != 1) throw ConfigError(o.bench + " needs exactly one --plan");
    const auto plan = coord::load_plan(o.plans.front());
    const auto data = make_data(o, config);
    if (o.bench == "ablation") {
      std::vector<std::uint64_t> seeds(std::max<std::uint32_t>(1, o.repeat));
      std::iota(seeds.begin(), seeds.end(), config.seed);
      csv = bench::run_points_csv(bench::ablation(plan, data, config, seeds));
    } else {
      csv = bench::run_points_csv(bench::tradeoff(plan, data, config, {16, 32, 64, 128}));
    }
  }
  if (o.out.empty()) {
    out << csv;
  } else {
    write_file(fs::path(o.out) / (o.bench + ".csv"), csv);
  }
  return kExitOk;
}

}  // namespace

std::size_t median_index(const std::vector<double>& latencies) {
  if (latencies.empty()) throw std::invalid_argument("median of no runs");
  std::vector<std::size_t> order(latencies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return latencies[a] < latencies[b]; });
  return order[(order.size() - 1) / 2];
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Serverless analytics engine over a simulated object store"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Run config JSON")->envname("CIRRUS_CONFIG");
    sub->add_option("--seed", o.seed, "Seed for latencies and data")->each([&](const std::string&) { o.seed_set = true; });
    sub->add_option("--scale", o.scale, "lineitem rows when generating data");
    sub->add_option("--object-size", o.object_size, "Base-table object size cap in bytes");
    sub->add_option("--out", o.out, "Output directory");
  };

  auto* gendata = app.add_subcommand("gendata", "Generate base tables into a directory");
  add_common(gendata);
  gendata->get_option("--out")->required();

  auto* run = app.add_subcommand("run", "Execute plan files");
  add_common(run);
  run->add_option("--plan", o.plans, "Plan JSON (repeat for concurrent queries)")->required();
  run->add_option("--data", o.data, "Directory written by gendata");
  run->add_option("--repeat", o.repeat, "Runs per plan")->check(CLI::PositiveNumber);
  run->add_option("--tasks", o.tasks, "Task count for every non-terminal stage");
  run->add_flag("--trace", o.trace, "Write per-request traces next to the reports");

  auto* bench_cmd = app.add_subcommand("bench", "Microbenchmarks emitting CSV");
  add_common(bench_cmd);
  bench_cmd->add_option("--bench", o.bench, "read-cdf, write-cdf, ablation, shuffle-cost or tradeoff")->required();
  bench_cmd->add_option("--plan", o.plans, "Plan JSON for ablation and tradeoff");
  bench_cmd->add_option("--data", o.data, "Directory written by gendata");
  bench_cmd->add_option("--repeat", o.repeat, "Seeds for ablation")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--tasks", o.tasks, "Task count for every non-terminal stage");
  bench_cmd->add_option("--samples", o.samples, "Requests for read-cdf and write-cdf");
  bench_cmd->add_option("--request-bytes", o.request_bytes, "Object size for read-cdf and write-cdf");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (app.got_subcommand(gendata)) return cmd_gendata(o, out);
    if (app.got_subcommand(run)) return cmd_run(o, out);
    return cmd_bench(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
  } catch (const PlanValidationError& e) {
    err << "plan error: " << e.what() << '\n';
  } catch (const UnknownBench& e) {
    err << e.what() << '\n';
  } catch (const coord::QueryFailed& e) {
    err << e.what() << '\n';
    return kExitQueryFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitQueryFailed;
  }
  return kExitConfigError;
}

}  // namespace cirrus::cli
