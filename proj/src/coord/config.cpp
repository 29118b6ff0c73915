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

#include "cirrus/coord/config.hpp"

#include <fstream>
#include <sstream>

#include "cirrus/errors.hpp"
#include "json.hpp"

namespace cirrus::coord {
namespace {

using json = nlohmann::json;

store::Distribution dist_from(const json& j) {
  if (j.is_number()) return store::PointMass{j.get<double>()};
  if (j.contains("point_ms")) return store::PointMass{j.at("point_ms").get<double>()};
  if (j.contains("uniform_ms")) {
    auto v = j.at("uniform_ms").get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError("uniform_ms needs [low, high]");
    return store::UniformMs{v[0], v[1]};
  }
  if (j.contains("lognormal")) {
    const auto& l = j.at("lognormal");
    return store::LogNormalMs{l.at("median_ms").get<double>(), l.at("sigma").get<double>()};
  }
  if (j.contains("exponential_ms")) return store::ExponentialMs{j.at("exponential_ms").get<double>()};
  if (j.contains("empirical")) {
    store::EmpiricalMs e;
    for (const auto& p : j.at("empirical")) {
      auto v = p.get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("empirical points are [quantile, ms] pairs");
      e.quantiles.emplace_back(v[0], v[1]);
    }
    return e;
  }
  throw ConfigError("unknown distribution " + j.dump());
}

json dist_json(const store::Distribution& d) {
  return std::visit(
      [](const auto& k) -> json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, store::PointMass>) {
          return {{"point_ms", k.ms}};
        } else if constexpr (std::is_same_v<T, store::UniformMs>) {
          return {{"uniform_ms", {k.low_ms, k.high_ms}}};
        } else if constexpr (std::is_same_v<T, store::LogNormalMs>) {
          return {{"lognormal", {{"median_ms", k.median_ms}, {"sigma", k.sigma}}}};
        } else if constexpr (std::is_same_v<T, store::ExponentialMs>) {
          return {{"exponential_ms", k.mean_ms}};
        } else {
          json pts = json::array();
          for (const auto& [q, ms] : k.quantiles) pts.push_back({q, ms});
          return {{"empirical", pts}};
        }
      },
      d.kind());
}

void profile_from(const json& j, store::LatencyProfile& p) {
  if (j.contains("base")) p.base = dist_from(j.at("base"));
  if (j.contains("throughput_bytes_per_s")) p.per_byte_time_s = 1.0 / j.at("throughput_bytes_per_s").get<double>();
  if (j.contains("per_byte_time_s")) p.per_byte_time_s = j.at("per_byte_time_s").get<double>();
  p.tail_probability = j.value("tail_probability", p.tail_probability);
  if (j.contains("tail")) p.tail = dist_from(j.at("tail"));
  p.visibility_delay_probability = j.value("visibility_delay_probability", p.visibility_delay_probability);
  if (j.contains("visibility_delay")) p.visibility_delay = dist_from(j.at("visibility_delay"));
}

json profile_json(const store::LatencyProfile& p) {
  return {{"base", dist_json(p.base)},
          {"per_byte_time_s", p.per_byte_time_s},
          {"tail_probability", p.tail_probability},
          {"tail", dist_json(p.tail)},
          {"visibility_delay_probability", p.visibility_delay_probability},
          {"visibility_delay", dist_json(p.visibility_delay)}};
}

void straggler_from(const json& j, mitigation::StragglerModel& m) {
  m.l_ms = j.value("l_ms", m.l_ms);
  m.t_bytes_per_s = j.value("t_bytes_per_s", m.t_bytes_per_s);
}

exec::FaultPoint fault_point_from(const std::string& s) {
  if (s == "before_write") return exec::FaultPoint::kBeforeWrite;
  if (s == "after_write") return exec::FaultPoint::kAfterWrite;
  if (s == "none") return exec::FaultPoint::kNone;
  throw ConfigError("unknown fault point '" + s + "'");
}

const char* fault_point_name(exec::FaultPoint p) {
  switch (p) {
    case exec::FaultPoint::kBeforeWrite:
      return "before_write";
    case exec::FaultPoint::kAfterWrite:
      return "after_write";
    case exec::FaultPoint::kNone:
      break;
  }
  return "none";
}

}  // namespace

store::StoreProfile default_store_profile() {
  store::StoreProfile p;
  p.get.base = store::LogNormalMs{12.0, 0.25};
  p.get.per_byte_time_s = 1.0 / 150e6;
  p.put.base = store::LogNormalMs{35.0, 0.25};
  p.put.per_byte_time_s = 1.0 / 150e6;
  return p;
}

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.store = default_store_profile();
  c.limits.max_concurrent = 64;
  c.store.reseed(c.seed);
  return c;
}

void RunConfig::validate() const {
  try {
    store.get.validate();
    store.put.validate();
    prices.validate();
    limits.validate();
    mitigation.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (pipeline_threshold < 0.0 || pipeline_threshold > 1.0) throw ConfigError("pipeline threshold must lie in [0, 1]");
  if (time_scale <= 0.0) throw ConfigError("time_scale must be positive");
  if (cpu_ns_per_row < 0.0) throw ConfigError("cpu_ns_per_row must be non-negative");
  if (cores_per_task <= 0.0) throw ConfigError("cores_per_task must be positive");
  if (head_range < 16) throw ConfigError("head_range must be at least 16 bytes");
  if (task_override && *task_override == 0) throw ConfigError("task override must be at least 1");
  for (const auto& d : delays)
    if (d.ms < 0.0) throw ConfigError("delays must be non-negative");
}

RunConfig parse_config(const std::string& json_text) {
  RunConfig c = RunConfig::defaults();
  try {
    json j = json::parse(json_text);
    if (j.value("format_version", 0) != kConfigFormatVersion)
      throw ConfigError("unsupported config format_version " + j.value("format_version", json(nullptr)).dump());
    c.seed = j.value("seed", c.seed);
    auto clock = j.value("clock", std::string("virtual"));
    if (clock == "virtual") {
      c.clock = ClockMode::kVirtual;
    } else if (clock == "scaled") {
      c.clock = ClockMode::kScaled;
    } else {
      throw ConfigError("clock must be 'virtual' or 'scaled'");
    }
    c.time_scale = j.value("time_scale", c.time_scale);
    if (j.contains("store")) {
      const auto& s = j.at("store");
      if (s.contains("get")) profile_from(s.at("get"), c.store.get);
      if (s.contains("put")) profile_from(s.at("put"), c.store.put);
    }
    if (j.contains("prices")) {
      const auto& p = j.at("prices");
      if (p.contains("get_per_1000")) c.prices.get_price = p.at("get_per_1000").get<double>() / 1000.0;
      if (p.contains("put_per_1000")) c.prices.put_price = p.at("put_per_1000").get<double>() / 1000.0;
      c.prices.storage_price_gb_month = p.value("storage_gb_month", c.prices.storage_price_gb_month);
      c.prices.invocation_price_per_ms = p.value("invocation_per_ms", c.prices.invocation_price_per_ms);
    }
    if (j.contains("limits")) {
      const auto& l = j.at("limits");
      c.limits.max_concurrent = l.value("max_concurrent", c.limits.max_concurrent);
      c.limits.max_duration_ms = l.value("max_duration_ms", c.limits.max_duration_ms);
      c.limits.max_memory = l.value("max_memory_bytes", c.limits.max_memory);
      c.limits.billing_granularity_ms = l.value("billing_granularity_ms", c.limits.billing_granularity_ms);
      c.limits.startup_delay_ms = l.value("startup_delay_ms", c.limits.startup_delay_ms);
    }
    if (j.contains("mitigation")) {
      const auto& m = j.at("mitigation");
      auto& s = c.mitigation;
      s.parallel_reads = m.value("parallel_reads", s.parallel_reads);
      s.rsm = m.value("rsm", s.rsm);
      if (m.contains("wsm")) s.wsm = mitigation::wsm_mode_from_string(m.at("wsm").get<std::string>());
      s.doublewrite = m.value("doublewrite", s.doublewrite);
      s.retry_factor = m.value("retry_factor", s.retry_factor);
      s.poll_interval_ms = m.value("poll_interval_ms", s.poll_interval_ms);
      s.poll_budget_ms = m.value("poll_budget_ms", s.poll_budget_ms);
      if (m.contains("read_model")) straggler_from(m.at("read_model"), s.read_model);
      if (m.contains("write_pre_send")) straggler_from(m.at("write_pre_send"), s.write_model.pre_send);
      if (m.contains("write_post_send")) straggler_from(m.at("write_post_send"), s.write_model.post_send);
    }
    if (j.contains("pipelining")) {
      const auto& p = j.at("pipelining");
      c.pipelining = p.value("enabled", c.pipelining);
      c.pipeline_threshold = p.value("threshold", c.pipeline_threshold);
    }
    c.retries = j.value("retries", c.retries);
    c.cpu_ns_per_row = j.value("cpu_ns_per_row", c.cpu_ns_per_row);
    c.cores_per_task = j.value("cores_per_task", c.cores_per_task);
    c.head_range = j.value("head_range_bytes", c.head_range);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      c.data.scale = d.value("scale", c.data.scale);
      c.data.object_size = d.value("object_size", c.data.object_size);
      c.data.row_group_rows = d.value("row_group_rows", c.data.row_group_rows);
      c.data.seed = d.value("seed", c.seed);
    } else {
      c.data.seed = c.seed;
    }
    for (const auto& f : j.value("faults", json::array()))
      c.faults.push_back({f.at("stage").get<std::string>(), f.value("task", 0u),
                          fault_point_from(f.value("point", std::string("before_write"))), f.value("attempts", 1u)});
    for (const auto& d : j.value("delays", json::array()))
      c.delays.push_back({d.at("stage").get<std::string>(), d.value("task", 0u), d.at("ms").get<double>()});
    if (j.contains("tasks")) c.task_override = j.at("tasks").get<std::uint32_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  c.store.reseed(c.seed);
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::stringstream text;
  text << f.rdbuf();
  return parse_config(text.str());
}

std::string config_to_json(const RunConfig& c) {
  json faults = json::array(), delays = json::array();
  for (const auto& f : c.faults)
    faults.push_back({{"stage", f.stage}, {"task", f.task}, {"point", fault_point_name(f.point)}, {"attempts", f.attempts}});
  for (const auto& d : c.delays) delays.push_back({{"stage", d.stage}, {"task", d.task}, {"ms", d.ms}});
  const auto& m = c.mitigation;
  json j = {
      {"format_version", kConfigFormatVersion},
      {"seed", c.seed},
      {"clock", c.clock == ClockMode::kVirtual ? "virtual" : "scaled"},
      {"time_scale", c.time_scale},
      {"store", {{"get", profile_json(c.store.get)}, {"put", profile_json(c.store.put)}}},
      {"prices",
       {{"get_per_1000", c.prices.get_price * 1000.0},
        {"put_per_1000", c.prices.put_price * 1000.0},
        {"storage_gb_month", c.prices.storage_price_gb_month},
        {"invocation_per_ms", c.prices.invocation_price_per_ms}}},
      {"limits",
       {{"max_concurrent", c.limits.max_concurrent},
        {"max_duration_ms", c.limits.max_duration_ms},
        {"max_memory_bytes", c.limits.max_memory},
        {"billing_granularity_ms", c.limits.billing_granularity_ms},
        {"startup_delay_ms", c.limits.startup_delay_ms}}},
      {"mitigation",
       {{"parallel_reads", m.parallel_reads},
        {"rsm", m.rsm},
        {"wsm", std::string(mitigation::to_string(m.wsm))},
        {"doublewrite", m.doublewrite},
        {"retry_factor", m.retry_factor},
        {"poll_interval_ms", m.poll_interval_ms},
        {"poll_budget_ms", m.poll_budget_ms},
        {"read_model", {{"l_ms", m.read_model.l_ms}, {"t_bytes_per_s", m.read_model.t_bytes_per_s}}},
        {"write_pre_send",
         {{"l_ms", m.write_model.pre_send.l_ms}, {"t_bytes_per_s", m.write_model.pre_send.t_bytes_per_s}}},
        {"write_post_send",
         {{"l_ms", m.write_model.post_send.l_ms}, {"t_bytes_per_s", m.write_model.post_send.t_bytes_per_s}}}}},
      {"pipelining", {{"enabled", c.pipelining}, {"threshold", c.pipeline_threshold}}},
      {"retries", c.retries},
      {"cpu_ns_per_row", c.cpu_ns_per_row},
      {"cores_per_task", c.cores_per_task},
      {"head_range_bytes", c.head_range},
      {"data",
       {{"scale", c.data.scale},
        {"object_size", c.data.object_size},
        {"row_group_rows", c.data.row_group_rows},
        {"seed", c.data.seed}}},
      {"faults", faults},
      {"delays", delays}};
  if (c.task_override) j["tasks"] = *c.task_override;
  return j.dump(2);
}

store::Distribution parse_distribution_json(const std::string& json_text) {
  try {
    return dist_from(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed distribution: ") + e.what());
  }
}

}  // namespace cirrus::coord
