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

#include "cirrus/coord/plan.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cirrus/errors.hpp"
#include "json.hpp"

namespace cirrus::coord {
namespace {

using json = nlohmann::json;
using exec::Expr;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw PlanValidationError(where.empty() ? what : where + ": " + what);
}

std::string stage_where(const std::string& id) { return "stage '" + id + "'"; }

const std::string& input_stage(const StageInput& in) {
  static const std::string none;
  if (const auto* s = std::get_if<ShuffleInput>(&in)) return s->stage;
  if (const auto* g = std::get_if<GatherInput>(&in)) return g->stage;
  return none;
}

Expr expr_from(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expression must be an object, got " + j.dump());
  if (j.contains("col")) return Expr::column(j.at("col").get<std::string>());
  if (j.contains("date")) return Expr::lit(exec::parse_date(j.at("date").get<std::string>()));
  if (j.contains("lit")) {
    const auto& v = j.at("lit");
    if (v.is_null()) return Expr::lit(format::Value{});
    if (v.is_number_integer()) return Expr::lit(v.get<std::int64_t>());
    if (v.is_number()) return Expr::lit(v.get<double>());
    if (v.is_string()) return Expr::lit(v.get<std::string>());
    if (v.is_boolean()) return Expr::lit(std::int64_t{v.get<bool>() ? 1 : 0});
    fail(where, "unsupported literal " + v.dump());
  }
  if (j.contains("op")) {
    std::vector<Expr> args;
    for (const auto& a : j.value("args", json::array())) args.push_back(expr_from(a, where));
    return Expr::call(j.at("op").get<std::string>(), std::move(args));
  }
  fail(where, "expression needs one of col, lit, date or op: " + j.dump());
}

json expr_json(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::kColumn:
      return {{"col", e.name}};
    case Expr::Kind::kLiteral:
      return std::visit(
          [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
              return {{"lit", nullptr}};
            } else {
              return {{"lit", v}};
            }
          },
          e.literal);
    case Expr::Kind::kCall: {
      json args = json::array();
      for (const auto& a : e.args) args.push_back(expr_json(a));
      return {{"op", e.name}, {"args", args}};
    }
  }
  return nullptr;
}

shuffle::UnitFraction fraction_from(const json& j, const std::string& where) {
  try {
    return shuffle::UnitFraction::parse(j.get<std::string>());
  } catch (const InvalidTopology& e) {
    fail(where, std::string("bad fraction: ") + e.what());
  } catch (const json::exception&) {
    fail(where, "bad fraction: expected a string like \"1/4\", got " + j.dump());
  }
}

ShuffleSpec shuffle_from(const json& j, const std::string& where) {
  ShuffleSpec s;
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "standard") return s;
    if (name == "multistage") {
      s.kind = shuffle::ShuffleKind::kMultistage;
      return s;
    }
    fail(where, "unknown shuffle '" + name + "'");
  }
  if (j.is_object() && j.contains("multistage")) {
    s.kind = shuffle::ShuffleKind::kMultistage;
    const auto& m = j.at("multistage");
    if (m.contains("p") != m.contains("f")) fail(where, "multistage needs both p and f, or neither");
    if (m.contains("p")) {
      s.p = fraction_from(m.at("p"), where);
      s.f = fraction_from(m.at("f"), where);
    }
    return s;
  }
  fail(where, "bad shuffle description " + j.dump());
}

json shuffle_json(const ShuffleSpec& s) {
  if (s.kind == shuffle::ShuffleKind::kStandard) return "standard";
  if (!s.p) return "multistage";
  return {{"multistage", {{"p", s.p->str()}, {"f", s.f->str()}}}};
}

std::vector<std::string> strings(const json& j) { return j.get<std::vector<std::string>>(); }

StageInput input_from(const json& j, const std::string& where) {
  if (j.contains("scan")) {
    const auto& s = j.at("scan");
    return ScanInput{s.at("table").get<std::string>(), strings(s.value("columns", json::array()))};
  }
  if (j.contains("shuffle_read")) {
    const auto& s = j.at("shuffle_read");
    return ShuffleInput{s.at("stage").get<std::string>(), shuffle_from(s.value("shuffle", json("standard")), where)};
  }
  if (j.contains("gather")) return GatherInput{j.at("gather").at("stage").get<std::string>()};
  fail(where, "input needs scan, shuffle_read or gather: " + j.dump());
}

json input_json(const StageInput& in) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ScanInput>) {
          return {{"scan", {{"table", v.table}, {"columns", v.columns}}}};
        } else if constexpr (std::is_same_v<T, ShuffleInput>) {
          return {{"shuffle_read", {{"stage", v.stage}, {"shuffle", shuffle_json(v.shuffle)}}}};
        } else {
          return {{"gather", {{"stage", v.stage}}}};
        }
      },
      in);
}

exec::AggSpec agg_from(const json& j, const std::string& where) {
  exec::AggSpec spec;
  spec.group_by = strings(j.value("group_by", json::array()));
  for (const auto& a : j.at("aggs")) {
    exec::AggItem item;
    item.fn = exec::agg_fn_from_string(a.at("fn").get<std::string>());
    if (a.contains("expr")) item.expr = expr_from(a.at("expr"), where);
    item.name = a.at("as").get<std::string>();
    spec.aggs.push_back(std::move(item));
  }
  return spec;
}

json agg_json(const exec::AggSpec& spec) {
  json aggs = json::array();
  for (const auto& a : spec.aggs) {
    json item = {{"fn", std::string(exec::to_string(a.fn))}, {"as", a.name}};
    if (a.expr) item["expr"] = expr_json(*a.expr);
    aggs.push_back(std::move(item));
  }
  return {{"group_by", spec.group_by}, {"aggs", aggs}};
}

OpDef op_from(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) fail(where, "operator must be a single-key object: " + j.dump());
  const auto& [name, body] = *j.items().begin();
  if (name == "filter") return exec::FilterOp{expr_from(body, where)};
  if (name == "project") {
    exec::ProjectOp p;
    for (const auto& item : body) {
      if (item.is_string()) {
        p.items.push_back({item.get<std::string>(), Expr::column(item.get<std::string>())});
      } else {
        p.items.push_back({item.at("name").get<std::string>(), expr_from(item.at("expr"), where)});
      }
    }
    return p;
  }
  if (name == "join") {
    if (!body.contains("build")) fail(where, "join is missing its build side");
    JoinDef d{input_from(body.at("build"), where), strings(body.at("build_keys")), strings(body.at("probe_keys")),
              exec::join_strategy_from_string(body.value("strategy", std::string("broadcast")))};
    if (std::holds_alternative<ScanInput>(d.build)) fail(where, "join build side must come from an upstream stage");
    return d;
  }
  if (name == "partial_agg") return exec::PartialAggOp{agg_from(body, where)};
  if (name == "final_agg") return exec::FinalAggOp{agg_from(body, where)};
  if (name == "order_by") {
    exec::OrderByOp o;
    auto keys = strings(body.at("keys"));
    auto desc = body.value("desc", std::vector<bool>{});
    for (std::size_t i = 0; i < keys.size(); ++i) o.keys.push_back({keys[i], i < desc.size() && desc[i]});
    if (body.contains("limit")) o.limit = body.at("limit").get<std::uint64_t>();
    return o;
  }
  fail(where, "unknown operator '" + name + "'");
}

json op_json(const OpDef& op) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, exec::FilterOp>) {
          return {{"filter", expr_json(v.predicate)}};
        } else if constexpr (std::is_same_v<T, exec::ProjectOp>) {
          json items = json::array();
          for (const auto& i : v.items) items.push_back({{"name", i.name}, {"expr", expr_json(i.expr)}});
          return {{"project", items}};
        } else if constexpr (std::is_same_v<T, JoinDef>) {
          return {{"join",
                   {{"build", input_json(v.build)},
                    {"build_keys", v.build_keys},
                    {"probe_keys", v.probe_keys},
                    {"strategy", std::string(exec::to_string(v.strategy))}}}};
        } else if constexpr (std::is_same_v<T, exec::PartialAggOp>) {
          return {{"partial_agg", agg_json(v.spec)}};
        } else if constexpr (std::is_same_v<T, exec::FinalAggOp>) {
          return {{"final_agg", agg_json(v.spec)}};
        } else {
          json keys = json::array(), desc = json::array();
          for (const auto& k : v.keys) {
            keys.push_back(k.column);
            desc.push_back(k.descending);
          }
          json o = {{"keys", keys}, {"desc", desc}};
          if (v.limit) o["limit"] = *v.limit;
          return {{"order_by", o}};
        }
      },
      op);
}

SinkDef sink_from(const json& j, const std::string& where) {
  if (j.contains("partition")) return PartitionSinkDef{strings(j.at("partition").at("keys"))};
  if (j.contains("single")) return SingleSinkDef{};
  if (j.contains("result")) return ResultSinkDef{};
  fail(where, "sink needs partition, single or result: " + j.dump());
}

json sink_json(const SinkDef& s) {
  if (const auto* p = std::get_if<PartitionSinkDef>(&s)) return {{"partition", {{"keys", p->keys}}}};
  if (std::holds_alternative<SingleSinkDef>(s)) return {{"single", json::object()}};
  return {{"result", json::object()}};
}

}  // namespace

const StageDef& PhysicalPlan::stage(const std::string& id) const {
  for (const auto& s : stages)
    if (s.id == id) return s;
  throw PlanValidationError("missing stage '" + id + "'");
}

std::vector<std::string> PhysicalPlan::dependencies(const StageDef& stage) const {
  std::vector<std::string> out;
  auto add = [&](const std::string& id) {
    if (!id.empty() && std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  };
  add(input_stage(stage.source));
  for (const auto& op : stage.ops)
    if (const auto* j = std::get_if<JoinDef>(&op)) add(input_stage(j->build));
  for (const auto& d : stage.depends_on) add(d);
  return out;
}

std::size_t PhysicalPlan::edge_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += dependencies(s).size();
  return n;
}

std::vector<std::string> PhysicalPlan::topological_order() const {
  std::map<std::string, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<std::string> order;
  std::function<void(const StageDef&, std::vector<std::string>&)> visit = [&](const StageDef& s,
                                                                             std::vector<std::string>& path) {
    int& st = state[s.id];
    if (st == 2) return;
    path.push_back(s.id);
    if (st == 1) {
      std::string cycle;
      auto from = std::find(path.begin(), path.end(), s.id);
      for (auto it = from; it != path.end(); ++it) cycle += (it == from ? "" : " -> ") + *it;
      throw PlanValidationError("cycle: " + cycle);
    }
    st = 1;
    for (const auto& d : dependencies(s)) visit(stage(d), path);
    st = 2;
    path.pop_back();
    order.push_back(s.id);
  };
  for (const auto& s : stages) {
    std::vector<std::string> path;
    visit(s, path);
  }
  return order;
}

const StageDef& PhysicalPlan::terminal() const {
  std::set<std::string> consumed;
  for (const auto& s : stages)
    for (const auto& d : dependencies(s)) consumed.insert(d);
  const StageDef* found = nullptr;
  for (const auto& s : stages) {
    if (consumed.count(s.id)) continue;
    if (found) throw PlanValidationError("plan has more than one terminal stage: '" + found->id + "' and '" + s.id + "'");
    found = &s;
  }
  if (!found) throw PlanValidationError("plan has no terminal stage");
  return *found;
}

void validate_plan(const PhysicalPlan& plan) {
  if (plan.query.empty()) fail("", "plan needs a query id");
  if (plan.query.find('/') != std::string::npos) fail("", "query id must not contain '/'");
  if (plan.stages.empty()) fail("", "plan has no stages");
  std::set<std::string> ids;
  for (const auto& s : plan.stages) {
    if (s.id.empty() || s.id.find('/') != std::string::npos || s.id.find('.') != std::string::npos)
      fail(stage_where(s.id), "stage ids must be non-empty and contain neither '/' nor '.'");
    if (!ids.insert(s.id).second) fail(stage_where(s.id), "duplicate stage id");
    if (s.tasks < 1) fail(stage_where(s.id), "task count must be at least 1");
    if (s.pipeline_threshold && (*s.pipeline_threshold < 0.0 || *s.pipeline_threshold > 1.0))
      fail(stage_where(s.id), "pipeline threshold must lie in [0, 1]");
  }
  for (const auto& s : plan.stages) {
    for (const auto& d : plan.dependencies(s)) {
      if (!ids.count(d)) fail(stage_where(s.id), "missing stage '" + d + "'");
      if (d == s.id) fail(stage_where(s.id), "cycle: stage depends on itself");
    }
  }
  plan.topological_order();
  const auto& terminal = plan.terminal();
  for (const auto& s : plan.stages) {
    const bool is_result = std::holds_alternative<ResultSinkDef>(s.sink);
    if (&s == &terminal) {
      if (!is_result) fail(stage_where(s.id), "the terminal stage must use the result sink");
      if (s.tasks != 1) fail(stage_where(s.id), "the terminal stage must run exactly one task");
    } else if (is_result) {
      fail(stage_where(s.id), "only the terminal stage may use the result sink");
    }
    auto check_input = [&](const StageInput& in, const char* role) {
      if (const auto* sh = std::get_if<ShuffleInput>(&in)) {
        if (!std::holds_alternative<PartitionSinkDef>(plan.stage(sh->stage).sink))
          fail(stage_where(s.id), std::string(role) + " shuffle-reads '" + sh->stage + "', which is not hash-partitioned");
      }
    };
    check_input(s.source, "input");
    for (const auto& op : s.ops) {
      const auto* j = std::get_if<JoinDef>(&op);
      if (!j) continue;
      check_input(j->build, "join build");
      if (j->build_keys.empty() || j->build_keys.size() != j->probe_keys.size())
        fail(stage_where(s.id), "join needs matching, non-empty key lists");
      if (j->strategy == exec::JoinStrategy::kPartitioned &&
          (!std::holds_alternative<ShuffleInput>(s.source) || !std::holds_alternative<ShuffleInput>(j->build)))
        fail(stage_where(s.id), "partitioned join needs shuffle inputs on both sides");
    }
  }
  // Every shuffle consumer of a producer defines its partition count.
  std::map<std::string, std::pair<std::uint32_t, std::string>> partition_counts;
  for (const auto& s : plan.stages) {
    std::vector<const StageInput*> inputs{&s.source};
    for (const auto& op : s.ops)
      if (const auto* j = std::get_if<JoinDef>(&op)) inputs.push_back(&j->build);
    for (const auto* in : inputs) {
      const auto* sh = std::get_if<ShuffleInput>(in);
      if (!sh) continue;
      auto [it, inserted] = partition_counts.try_emplace(sh->stage, s.tasks, s.id);
      if (!inserted && it->second.first != s.tasks)
        fail(stage_where(s.id), "shuffle consumers of '" + sh->stage + "' disagree on task count (" +
                                    std::to_string(s.tasks) + " vs " + std::to_string(it->second.first) + " in '" +
                                    it->second.second + "')");
    }
  }
}

PhysicalPlan parse_plan(const std::string& json_text) {
  PhysicalPlan plan;
  std::string where;
  try {
    json j = json::parse(json_text);
    if (j.value("format_version", 0) != kPlanFormatVersion)
      fail("", "unsupported plan format_version " + j.value("format_version", json(nullptr)).dump());
    plan.query = j.at("query").get<std::string>();
    for (const auto& sj : j.at("stages")) {
      StageDef s;
      s.id = sj.at("id").get<std::string>();
      where = stage_where(s.id);
      s.tasks = sj.value("tasks", 1u);
      if (!sj.contains("source")) fail(where, "stage needs a source");
      s.source = input_from(sj.at("source"), where);
      for (const auto& op : sj.value("ops", json::array())) s.ops.push_back(op_from(op, where));
      if (sj.contains("sink")) s.sink = sink_from(sj.at("sink"), where);
      if (sj.contains("pipeline_threshold")) s.pipeline_threshold = sj.at("pipeline_threshold").get<double>();
      s.depends_on = strings(sj.value("depends_on", json::array()));
      plan.stages.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    fail(where, std::string("malformed plan: ") + e.what());
  } catch (const SpecMismatch& e) {
    fail(where, e.what());
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
  validate_plan(plan);
  return plan;
}

PhysicalPlan load_plan(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw PlanValidationError("cannot open plan file " + path.string());
  std::stringstream text;
  text << f.rdbuf();
  return parse_plan(text.str());
}

std::string plan_to_json(const PhysicalPlan& plan) {
  json stages = json::array();
  for (const auto& s : plan.stages) {
    json ops = json::array();
    for (const auto& op : s.ops) ops.push_back(op_json(op));
    json sj = {{"id", s.id}, {"tasks", s.tasks}, {"source", input_json(s.source)}, {"ops", ops}, {"sink", sink_json(s.sink)}};
    if (s.pipeline_threshold) sj["pipeline_threshold"] = *s.pipeline_threshold;
    if (!s.depends_on.empty()) sj["depends_on"] = s.depends_on;
    stages.push_back(std::move(sj));
  }
  return json{{"format_version", kPlanFormatVersion}, {"query", plan.query}, {"stages", stages}}.dump(2);
}

exec::Expr parse_expr_json(const std::string& json_text) {
  try {
    return expr_from(json::parse(json_text), "");
  } catch (const json::exception& e) {
    throw PlanValidationError(std::string("malformed expression: ") + e.what());
  }
}

}  // namespace cirrus::coord
