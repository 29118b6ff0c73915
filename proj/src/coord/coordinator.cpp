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

#include "cirrus/coord/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>

#include "cirrus/mitigation/store_client.hpp"
#include "cirrus/sim/sync.hpp"
#include "json.hpp"

namespace cirrus::coord {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& stage, const std::string& what) {
  throw PlanValidationError("stage '" + stage + "': " + what);
}

std::uint64_t token_for(std::size_t stage, std::size_t task, std::uint32_t attempt) {
  return (static_cast<std::uint64_t>(stage) << 40) | (static_cast<std::uint64_t>(task) << 8) | attempt;
}

// Per-plan compilation state.
struct Compiler {
  const PhysicalPlan& plan;
  const datagen::Catalog& catalog;
  const RunConfig& config;
  CompiledPlan out;
  std::map<std::string, std::uint32_t> tasks;
  std::map<std::string, exec::HashPartitioner> partitioners;
  std::map<std::string, format::Schema> schemas;
  std::map<std::string, std::vector<store::ObjectKey>> outputs;
  std::map<std::string, shuffle::ShuffleTopology> combined;  // producer -> topology of its combiners

  std::uint32_t task_count(const StageDef& s) const {
    if (config.task_override && &s != &plan.terminal()) return *config.task_override;
    return s.tasks;
  }

  shuffle::ShuffleTopology topology_for(const std::string& consumer, const ShuffleInput& in) {
    const std::uint64_t s = tasks.at(in.stage);
    const std::uint64_t r = tasks.at(consumer);
    try {
      if (in.shuffle.kind == shuffle::ShuffleKind::kStandard) return shuffle::ShuffleTopology::standard(s, r);
      if (!in.shuffle.p) return shuffle::ShuffleTopology::multistage_default(s, r);
      // Task-count overrides can shrink stages below the requested grid; the
      // group counts are clamped so every group stays non-empty.
      shuffle::UnitFraction p{std::min<std::uint64_t>(in.shuffle.p->denominator, r)};
      shuffle::UnitFraction f{std::min<std::uint64_t>(in.shuffle.f->denominator, s)};
      return shuffle::ShuffleTopology::multistage(s, r, p, f);
    } catch (const InvalidTopology& e) {
      fail(consumer, e.what());
    }
  }

  // Adds the combiner stage between `producer` and its multistage consumers.
  void ensure_combiners(const std::string& producer, const shuffle::ShuffleTopology& t) {
    auto it = combined.find(producer);
    if (it != combined.end()) {
      if (it->second.describe() != t.describe())
        fail(producer, "consumers request different multistage topologies");
      return;
    }
    combined.emplace(producer, t);
    CompiledStage c;
    c.id = combiner_stage_id(producer);
    c.dependencies = {producer};
    c.start_threshold = config.pipelining ? config.pipeline_threshold : 1.0;
    c.combiner = true;
    c.topology = t;
    c.output_schema = schemas.at(producer);
    const auto& sources = outputs.at(producer);
    for (const auto& comb : shuffle::plan_multistage(t)) {
      exec::ObjectSource src;
      for (auto i = comb.file_group.lo; i < comb.file_group.hi; ++i) src.objects.push_back(sources[i]);
      src.range = {static_cast<std::uint32_t>(comb.partition_group.lo), static_cast<std::uint32_t>(comb.partition_group.hi)};
      src.schema = c.output_schema;
      src.partitioner_id = partitioners.at(producer).id();
      exec::TaskSpec spec = base_spec(c.id, comb.index);
      spec.source = std::move(src);
      spec.sink = exec::CombineSink{};
      c.tasks.push_back(std::move(spec));
      outputs[c.id].push_back(c.tasks.back().output);
    }
    out.stages.push_back(std::move(c));
  }

  exec::TaskSpec base_spec(const std::string& stage, std::uint64_t task) const {
    exec::TaskSpec spec;
    spec.query_id = plan.query;
    spec.stage = stage;
    spec.task_index = static_cast<std::uint32_t>(task);
    spec.output = stage_output_key(plan.query, stage, task);
    spec.mitigation = config.mitigation;
    spec.head_range = config.head_range;
    spec.cpu_ns_per_row = config.cpu_ns_per_row;
    for (const auto& d : config.delays)
      if (d.stage == stage && d.task == task) spec.extra_delay_ms += d.ms;
    return spec;
  }

  // The objects task `task` of `consumer` reads for `in`, plus the upstream
  // stage id it depends on.
  std::pair<exec::ObjectSource, std::string> object_source(const std::string& consumer, const StageInput& in,
                                                           std::uint64_t task) {
    exec::ObjectSource src;
    if (const auto* g = std::get_if<GatherInput>(&in)) {
      src.objects = outputs.at(g->stage);
      src.schema = schemas.at(g->stage);
      return {std::move(src), g->stage};
    }
    const auto& sh = std::get<ShuffleInput>(in);
    src.schema = schemas.at(sh.stage);
    src.partitioner_id = partitioners.at(sh.stage).id();
    auto t = topology_for(consumer, sh);
    if (t.kind == shuffle::ShuffleKind::kStandard) {
      src.objects = outputs.at(sh.stage);
      src.range = format::PartitionRange::single(static_cast<std::uint32_t>(task));
      return {std::move(src), sh.stage};
    }
    ensure_combiners(sh.stage, t);
    const auto id = combiner_stage_id(sh.stage);
    const auto& combiner_keys = outputs.at(id);
    const auto group = shuffle::balanced_group(t.r, t.partition_groups(), shuffle::group_of(t.r, t.partition_groups(), task));
    for (auto j : shuffle::combiners_for_partition(t, task)) src.objects.push_back(combiner_keys[j]);
    src.range = format::PartitionRange::single(static_cast<std::uint32_t>(task - group.lo));
    return {std::move(src), id};
  }

  void compile_stage(const StageDef& def) {
    CompiledStage stage;
    stage.id = def.id;
    const std::uint32_t n = tasks.at(def.id);
    const double threshold = def.pipeline_threshold.value_or(config.pipeline_threshold);
    stage.start_threshold = config.pipelining ? threshold : 1.0;

    auto add_dep = [&](const std::string& id) {
      if (std::find(stage.dependencies.begin(), stage.dependencies.end(), id) == stage.dependencies.end())
        stage.dependencies.push_back(id);
    };

    std::optional<format::PruningPredicate> prune;
    std::vector<exec::Expr> leading;
    for (const auto& op : def.ops) {
      const auto* f = std::get_if<exec::FilterOp>(&op);
      if (!f) break;
      leading.push_back(f->predicate);
    }
    if (!leading.empty()) {
      exec::Expr conj = leading.front();
      for (std::size_t i = 1; i < leading.size(); ++i) conj = exec::Expr::call("and", {conj, leading[i]});
      prune = exec::extract_pruning(conj);
      if (prune && prune->bounds.empty()) prune.reset();
    }

    for (std::uint32_t i = 0; i < n; ++i) {
      exec::TaskSpec spec = base_spec(def.id, i);
      if (const auto* scan = std::get_if<ScanInput>(&def.source)) {
        const datagen::TableInfo* table = nullptr;
        try {
          table = &catalog.table(scan->table);
        } catch (const std::out_of_range&) {
          fail(def.id, "unknown table '" + scan->table + "'");
        }
        exec::ScanSource src;
        const auto range = shuffle::balanced_group(table->objects.size(), n, i);
        for (auto k = range.lo; k < range.hi; ++k) src.objects.push_back(table->objects[k]);
        src.columns = scan->columns;
        src.table_schema = table->schema;
        src.prune = prune;
        spec.source = std::move(src);
      } else {
        auto [src, dep] = object_source(def.id, def.source, i);
        spec.source = std::move(src);
        add_dep(dep);
      }
      for (const auto& op : def.ops) {
        if (const auto* j = std::get_if<JoinDef>(&op)) {
          auto [build, dep] = object_source(def.id, j->build, i);
          add_dep(dep);
          spec.ops.push_back(exec::JoinOp{std::move(build), j->build_keys, j->probe_keys, j->strategy});
        } else {
          std::visit(
              [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (!std::is_same_v<T, JoinDef>) spec.ops.push_back(v);
              },
              op);
        }
      }
      if (i == 0) {
        try {
          stage.output_schema = exec::pipeline_schema(exec::source_schema(spec.source), spec.ops);
        } catch (const Error& e) {
          fail(def.id, e.what());
        }
      }
      if (const auto* p = std::get_if<PartitionSinkDef>(&def.sink)) {
        for (const auto& k : p->keys)
          if (!stage.output_schema.find(k)) fail(def.id, "partition key '" + k + "' is not an output column");
        spec.sink = exec::PartitionSink{partitioners.at(def.id)};
      } else {
        spec.sink = exec::SingleSink{};
      }
      if (std::holds_alternative<ResultSinkDef>(def.sink)) spec.output = out.result;
      stage.tasks.push_back(std::move(spec));
    }
    for (const auto& d : def.depends_on) add_dep(d);
    schemas[def.id] = stage.output_schema;
    for (const auto& t : stage.tasks) outputs[def.id].push_back(t.output);
    if (std::holds_alternative<ResultSinkDef>(def.sink)) out.result_schema = stage.output_schema;
    out.stages.push_back(std::move(stage));
  }

  CompiledPlan run() {
    validate_plan(plan);
    out.query = plan.query;
    out.result = result_key(plan.query);
    for (const auto& s : plan.stages) tasks[s.id] = task_count(s);

    // Shuffle consumers fix the partition count of their producer.
    std::map<std::string, std::uint32_t> partitions;
    for (const auto& s : plan.stages) {
      std::vector<const StageInput*> inputs{&s.source};
      for (const auto& op : s.ops)
        if (const auto* j = std::get_if<JoinDef>(&op)) inputs.push_back(&j->build);
      for (const auto* in : inputs) {
        const auto* sh = std::get_if<ShuffleInput>(in);
        if (!sh) continue;
        auto [it, inserted] = partitions.try_emplace(sh->stage, tasks[s.id]);
        if (!inserted && it->second != tasks[s.id])
          fail(s.id, "shuffle consumers of '" + sh->stage + "' disagree on task count");
      }
    }
    const auto seed = exec::query_hash_seed(plan.query);
    for (const auto& s : plan.stages) {
      if (const auto* p = std::get_if<PartitionSinkDef>(&s.sink)) {
        auto it = partitions.find(s.id);
        partitioners[s.id] = exec::HashPartitioner{p->keys, it == partitions.end() ? 1u : it->second, seed};
      }
    }
    for (const auto& id : plan.topological_order()) compile_stage(plan.stage(id));
    return std::move(out);
  }
};

struct StageRun {
  const CompiledStage* stage = nullptr;
  std::size_t launched = 0;
  std::uint32_t done = 0;
  std::vector<std::uint32_t> attempts;
  bool started = false;
  StageReport report;
};

}  // namespace

store::ObjectKey stage_output_key(const std::string& query, const std::string& stage, std::uint64_t task) {
  return store::ObjectKey("q/" + query + "/s/" + stage + "/t/" + std::to_string(task));
}

store::ObjectKey result_key(const std::string& query) { return store::ObjectKey("q/" + query + "/result"); }

std::string combiner_stage_id(const std::string& producer) { return producer + ".combine"; }

const CompiledStage& CompiledPlan::stage(const std::string& id) const {
  for (const auto& s : stages)
    if (s.id == id) return s;
  throw std::out_of_range("no compiled stage '" + id + "'");
}

std::vector<store::ObjectKey> CompiledPlan::output_keys() const {
  std::vector<store::ObjectKey> keys;
  for (const auto& s : stages)
    for (const auto& t : s.tasks) keys.push_back(t.output);
  return keys;
}

std::size_t CompiledPlan::task_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += s.tasks.size();
  return n;
}

CompiledPlan compile_plan(const PhysicalPlan& plan, const datagen::Catalog& catalog, const RunConfig& config) {
  return Compiler{plan, catalog, config, {}, {}, {}, {}, {}, {}}.run();
}

Environment::Environment(const RunConfig& config) : config_(config), ledger_(config.prices) {
  config_.validate();
  executor_ = config_.clock == ClockMode::kVirtual ? sim::make_virtual_executor()
                                                   : sim::make_scaled_executor(config_.time_scale);
  store_ = std::make_unique<store::ObjectStore>(*executor_, config_.store, ledger_);
  runtime_ = std::make_unique<runtime::FunctionRuntime>(*executor_, config_.limits, ledger_);
}

Environment::~Environment() = default;

void Environment::load(const datagen::GeneratedData& data) { data.preload(*store_); }

QueryReport execute(const CompiledPlan& plan, Environment& env) {
  auto& ex = env.executor();
  const auto& config = env.config();
  QueryReport report;
  report.query = plan.query;
  report.start_ms = sim::to_ms(ex.now());

  std::vector<StageRun> runs(plan.stages.size());
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < plan.stages.size(); ++i) {
    runs[i].stage = &plan.stages[i];
    runs[i].attempts.assign(plan.stages[i].tasks.size(), 0);
    runs[i].report.id = plan.stages[i].id;
    runs[i].report.tasks = static_cast<std::uint32_t>(plan.stages[i].tasks.size());
    index[plan.stages[i].id] = i;
  }

  runtime::CompletionQueue queue(ex);
  auto outcomes = std::make_shared<std::map<std::uint64_t, exec::TaskOutputSummary>>();
  auto outcomes_mutex = std::make_shared<std::mutex>();
  std::size_t outstanding = 0;
  bool failed = false;
  double task_ms = 0.0;

  auto launch = [&](std::size_t s, std::size_t t) {
    auto& run = runs[s];
    exec::TaskSpec spec = run.stage->tasks[t];
    spec.attempt = run.attempts[t];
    for (const auto& f : config.faults)
      if (f.stage == spec.stage && f.task == t && spec.attempt < f.attempts) spec.fault = f.point;
    const auto token = token_for(s, t, spec.attempt);
    if (!run.started) {
      run.started = true;
      run.report.start_ms = sim::to_ms(ex.now());
    }
    runtime::InvocationRequest request;
    request.query_id = plan.query;
    request.task = spec.requester();
    request.token = token;
    request.completions = &queue;
    request.body = [spec = std::move(spec), token, outcomes, outcomes_mutex, &env](runtime::InvocationContext& ctx) {
      auto summary = exec::run_task(spec, env.store(), &ctx);
      std::lock_guard lock(*outcomes_mutex);
      (*outcomes)[token] = std::move(summary);
    };
    env.runtime().invoke(std::move(request));
    ++outstanding;
  };

  auto runnable = [&](const StageRun& run) {
    for (const auto& d : run.stage->dependencies) {
      const auto& dep = runs[index.at(d)];
      const double need = std::ceil(run.stage->start_threshold * static_cast<double>(dep.stage->tasks.size()) - 1e-9);
      if (static_cast<double>(dep.done) < need) return false;
    }
    return true;
  };

  for (;;) {
    if (!failed) {
      // Round-robin across runnable stages, FIFO within each stage.
      std::vector<std::size_t> ready;
      for (std::size_t s = 0; s < runs.size(); ++s)
        if (runs[s].launched < runs[s].stage->tasks.size() && runnable(runs[s])) ready.push_back(s);
      for (bool more = true; more;) {
        more = false;
        for (auto s : ready) {
          if (runs[s].launched < runs[s].stage->tasks.size()) {
            launch(s, runs[s].launched++);
            more = true;
          }
        }
      }
    }
    if (outstanding == 0) break;
    auto result = queue.receive();
    --outstanding;
    task_ms += sim::to_ms(result.duration);
    const std::size_t s = static_cast<std::size_t>(result.token >> 40);
    const std::size_t t = static_cast<std::size_t>((result.token >> 8) & 0xffffffffu);
    auto& run = runs[s];
    if (result.status == store::InvocationStatus::kOk) {
      ++run.done;
      run.report.end_ms = sim::to_ms(result.finished_at);
      std::lock_guard lock(*outcomes_mutex);
      const auto& o = outcomes->at(result.token);
      run.report.rows_out += o.rows_out;
      run.report.bytes_written += o.bytes_written;
      report.mitigation.merge(o.stats);
    } else if (!failed && run.attempts[t] < config.retries) {
      ++run.attempts[t];
      ++run.report.retries;
      ++report.retries;
      launch(s, t);
    } else if (!failed) {
      failed = true;
      report.error = "task " + result.task + " failed after " + std::to_string(run.attempts[t] + 1) +
                     " attempt(s): " + result.error;
    }
  }

  if (!failed) {
    try {
      mitigation::StoreClient client(env.store(), config.mitigation, store::RequestContext{plan.query, "coordinator"});
      store::GetResult got;
      client.locate(plan.result, store::ByteRange::all(), got);
      format::BufferReader reader(store::make_payload(std::move(got.bytes)));
      report.result = format::read_partition(reader, format::PartitionRange::all());
      report.ok = true;
    } catch (const std::exception& e) {
      report.error = std::string("reading the result failed: ") + e.what();
    }
  }
  report.end_ms = sim::to_ms(ex.now());
  report.wall_ms = report.end_ms - report.start_ms;
  for (auto& run : runs) {
    if (run.started) run.report.latency_ms = run.report.end_ms - run.report.start_ms;
    report.stages.push_back(run.report);
  }
  report.core_seconds = task_ms / 1000.0 * config.cores_per_task;
  report.cost = env.ledger().summary(plan.query);
  return report;
}

std::vector<QueryReport> run_concurrent(const std::vector<CompiledPlan>& plans, Environment& env) {
  std::vector<QueryReport> reports(plans.size());
  env.executor().run([&] {
    sim::WaitGroup group(env.executor());
    auto error = std::make_shared<std::exception_ptr>();
    auto error_mutex = std::make_shared<std::mutex>();
    for (std::size_t i = 0; i < plans.size(); ++i)
      sim::spawn_in_group(env.executor(), group, error, error_mutex, [&, i] { reports[i] = execute(plans[i], env); });
    group.wait();
    if (*error) std::rethrow_exception(*error);
  });
  return reports;
}

QueryReport run_query(const PhysicalPlan& plan, const datagen::GeneratedData& data, const RunConfig& config) {
  Environment env(config);
  env.load(data);
  auto compiled = compile_plan(plan, data.catalog, config);
  return run_concurrent({compiled}, env).front();
}

std::string result_csv(const format::RowBatch& result) {
  std::ostringstream out;
  const auto& fields = result.schema().fields();
  for (std::size_t c = 0; c < fields.size(); ++c) out << (c ? "," : "") << fields[c].name;
  out << '\n';
  out << std::setprecision(17);
  for (std::size_t r = 0; r < result.num_rows(); ++r) {
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c) out << ',';
      const auto v = result.column(c).value(r);
      if (fields[c].type == format::DataType::kDate32 && !format::is_null(v)) {
        out << exec::format_date(std::get<std::int64_t>(v));
      } else if (const auto* d = std::get_if<double>(&v)) {
        out << *d;
      } else {
        out << format::render(v);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string request_trace_csv(const store::CostLedger& ledger, const std::string& query) {
  std::ostringstream out;
  out << "kind,key,bytes,issued_ms,completed_ms,duration_ms,duplicate,found,query,requester\n";
  auto records = query.empty() ? ledger.requests() : ledger.requests(query);
  for (const auto& r : records) {
    out << (r.kind == store::RequestKind::kGet ? "GET" : "PUT") << ',' << r.key.str() << ',' << r.bytes << ','
        << sim::to_ms(r.issued_at) << ',' << sim::to_ms(r.completed_at) << ','
        << sim::to_ms(r.completed_at - r.issued_at) << ',' << (r.was_duplicate ? 1 : 0) << ',' << (r.found ? 1 : 0)
        << ',' << r.query_id << ',' << r.requester << '\n';
  }
  return out.str();
}

std::string QueryReport::to_json() const {
  json stages_json = json::array();
  for (const auto& s : stages)
    stages_json.push_back({{"id", s.id},
                           {"tasks", s.tasks},
                           {"start_ms", s.start_ms},
                           {"end_ms", s.end_ms},
                           {"latency_ms", s.latency_ms},
                           {"retries", s.retries},
                           {"rows_out", s.rows_out},
                           {"bytes_written", s.bytes_written}});
  json j = {{"query", query},
            {"ok", ok},
            {"error", error},
            {"start_ms", start_ms},
            {"end_ms", end_ms},
            {"wall_ms", wall_ms},
            {"stages", stages_json},
            {"cost",
             {{"gets", cost.gets},
              {"puts", cost.puts},
              {"duplicate_gets", cost.duplicate_gets},
              {"duplicate_puts", cost.duplicate_puts},
              {"missed_gets", cost.missed_gets},
              {"invocations", cost.invocations},
              {"billed_ms", sim::to_ms(cost.billed)},
              {"peak_bytes_stored", cost.peak_bytes_stored},
              {"get_dollars", cost.get_dollars},
              {"put_dollars", cost.put_dollars},
              {"storage_dollars", cost.storage_dollars},
              {"invocation_dollars", cost.invocation_dollars},
              {"total_dollars", cost.total_dollars()}}},
            {"mitigation",
             {{"reads_total", mitigation.reads_total},
              {"reads_hedged", mitigation.reads_hedged},
              {"writes_total", mitigation.writes_total},
              {"writes_hedged", mitigation.writes_hedged},
              {"doublewrite_fallbacks", mitigation.doublewrite_fallbacks},
              {"both_invisible", mitigation.both_invisible},
              {"doublewrite_puts", mitigation.doublewrite_puts},
              {"poll_gets", mitigation.poll_gets},
              {"visibility_wait_ms", mitigation.visibility_wait_ms},
              {"compute_ms_saved", mitigation.compute_ms_saved}}},
            {"core_seconds", core_seconds},
            {"retries", retries},
            {"result_rows", result.num_rows()}};
  return j.dump(2);
}

std::string QueryReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1);
  out << "query " << query << (ok ? "  ok" : "  FAILED: " + error) << "\n";
  out << "wall " << wall_ms << " ms, " << retries << " retries, " << std::setprecision(3) << core_seconds
      << " core-seconds\n\n";
  out << std::left << std::setw(22) << "stage" << std::right << std::setw(7) << "tasks" << std::setw(12) << "start ms"
      << std::setw(12) << "latency ms" << std::setw(9) << "retries" << std::setw(12) << "rows out" << "\n";
  out << std::setprecision(1);
  for (const auto& s : stages)
    out << std::left << std::setw(22) << s.id << std::right << std::setw(7) << s.tasks << std::setw(12)
        << s.start_ms - start_ms << std::setw(12) << s.latency_ms << std::setw(9) << s.retries << std::setw(12)
        << s.rows_out << "\n";
  out << "\n" << std::setprecision(6);
  out << "GETs " << cost.gets << " ($" << cost.get_dollars << "), PUTs " << cost.puts << " ($" << cost.put_dollars
      << "), invocations " << cost.invocations << " ($" << cost.invocation_dollars << ")\n";
  out << "total $" << cost.total_dollars() << "\n";
  out << "hedged reads " << mitigation.reads_hedged << "/" << mitigation.reads_total << ", hedged writes "
      << mitigation.writes_hedged << "/" << mitigation.writes_total << ", doublewrite fallbacks "
      << mitigation.doublewrite_fallbacks << "\n";
  return out.str();
}

}  // namespace cirrus::coord
