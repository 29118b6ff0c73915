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

#include "cirrus/exec/task.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "cirrus/errors.hpp"

namespace cirrus::exec {
namespace {

using format::Field;
using mitigation::ObjectReader;
using mitigation::StoreClient;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint32_t lanes_for(const mitigation::MitigationSettings& s) { return std::max<std::uint32_t>(1, s.parallel_reads); }

Schema project_schema(const ProjectOp& op, const Schema& input) {
  std::vector<Field> fields;
  for (const auto& item : op.items)
    fields.push_back({item.name, result_type(item.expr, input), may_be_null(item.expr, input)});
  try {
    return Schema(std::move(fields));
  } catch (const SchemaMismatch& e) {
    throw SpecMismatch(std::string("projection: ") + e.what());
  }
}

RowBatch concat_all(const std::vector<RowBatch>& batches, const Schema& schema) {
  if (batches.size() == 1) return batches.front();
  return format::concat(batches, schema);
}

std::uint64_t total_bytes(const std::vector<RowBatch>& batches) {
  std::uint64_t n = 0;
  for (const auto& b : batches) n += b.estimated_bytes();
  return n;
}

std::uint64_t total_rows(const std::vector<RowBatch>& batches) {
  std::uint64_t n = 0;
  for (const auto& b : batches) n += b.num_rows();
  return n;
}

// Memory held for the lifetime of one task; released on every exit path.
class Reservation {
 public:
  explicit Reservation(runtime::InvocationContext* ctx) : ctx_(ctx) {}
  ~Reservation() {
    if (ctx_) ctx_->release(held_);
  }
  Reservation(const Reservation&) = delete;
  Reservation& operator=(const Reservation&) = delete;

  void add(std::uint64_t bytes, const std::string& what) {
    if (!ctx_) return;
    ctx_->reserve(bytes, what);
    held_ += bytes;
  }

 private:
  runtime::InvocationContext* ctx_;
  std::uint64_t held_ = 0;
};

std::vector<RowBatch> read_scan(const ScanSource& src, StoreClient& client) {
  auto& ex = client.store().executor();
  const std::size_t n = src.objects.size();
  std::vector<std::unique_ptr<ObjectReader>> readers;
  for (const auto& key : src.objects) readers.push_back(std::make_unique<ObjectReader>(client, key));

  std::vector<format::BaseTableFooter> footers(n);
  mitigation::run_parallel(ex, n, lanes_for(client.settings()),
                           [&](std::size_t i) { footers[i] = format::read_base_table_footer(*readers[i]); });

  std::vector<format::ScanPlan> plans;
  struct ChunkJob {
    std::size_t object, group, column;
  };
  std::vector<ChunkJob> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(footers[i].schema == src.table_schema))
      throw SchemaMismatch("object " + src.objects[i].str() + " does not hold the expected table schema");
    plans.push_back(format::plan_scan(footers[i], src.columns, src.prune ? &*src.prune : nullptr));
    for (auto g : plans[i].row_groups)
      for (auto c : plans[i].columns) jobs.push_back({i, g, c});
  }

  std::vector<Column> chunks(jobs.size());
  mitigation::run_parallel(ex, jobs.size(), lanes_for(client.settings()), [&](std::size_t j) {
    const auto& job = jobs[j];
    auto read = readers[job.object]->read(format::chunk_range(footers[job.object], job.group, job.column));
    chunks[j] = format::decode_chunk(footers[job.object], job.group, job.column, read.bytes);
  });

  std::vector<RowBatch> out;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t g = 0; g < plans[i].row_groups.size(); ++g) {
      std::vector<Column> cols;
      for (std::size_t c = 0; c < plans[i].columns.size(); ++c) cols.push_back(std::move(chunks[next++]));
      out.emplace_back(plans[i].output_schema, std::move(cols));
    }
  }
  return out;
}

// One entry per object, each holding one batch per partition in the range.
std::vector<std::vector<RowBatch>> read_objects(const ObjectSource& src, StoreClient& client,
                                                std::uint64_t head_range) {
  std::vector<std::vector<RowBatch>> out(src.objects.size());
  mitigation::run_parallel(client.store().executor(), src.objects.size(), lanes_for(client.settings()),
                           [&](std::size_t i) {
                             ObjectReader reader(client, src.objects[i]);
                             format::PartitionedMetadata meta;
                             out[i] = format::read_partitions(reader, src.range, head_range, &meta);
                             if (!(meta.schema == src.schema))
                               throw SchemaMismatch("object " + src.objects[i].str() + " holds " +
                                                    meta.schema.describe() + ", expected " + src.schema.describe());
                           });
  return out;
}

std::vector<RowBatch> flatten(std::vector<std::vector<RowBatch>> nested) {
  std::vector<RowBatch> out;
  for (auto& per_object : nested)
    for (auto& b : per_object) out.push_back(std::move(b));
  return out;
}

void check_partitioned_join(const Source& source, const JoinOp& join) {
  if (join.strategy != JoinStrategy::kPartitioned) return;
  const auto* probe = std::get_if<ObjectSource>(&source);
  if (probe == nullptr || !probe->partitioner_id)
    throw PartitionMismatch("partitioned join needs a hash-partitioned probe input");
  if (!join.build.partitioner_id)
    throw PartitionMismatch("partitioned join needs a hash-partitioned build input");
  if (*probe->partitioner_id != *join.build.partitioner_id)
    throw PartitionMismatch("probe partitioned by " + *probe->partitioner_id + " but build by " +
                            *join.build.partitioner_id);
}

std::vector<RowBatch> order_by(const OrderByOp& op, std::vector<RowBatch> input, const Schema& schema) {
  if (input.empty()) return {RowBatch::empty(schema)};
  RowBatch all = concat_all(input, schema);
  std::vector<const Column*> cols;
  for (const auto& k : op.keys) cols.push_back(&all.column(k.column));
  std::vector<std::uint32_t> idx(all.num_rows());
  std::iota(idx.begin(), idx.end(), 0u);
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    for (std::size_t i = 0; i < cols.size(); ++i) {
      int c = format::compare_values(cols[i]->value(a), cols[i]->value(b));
      if (c != 0) return op.keys[i].descending ? c > 0 : c < 0;
    }
    return false;
  });
  if (op.limit && idx.size() > *op.limit) idx.resize(*op.limit);
  return {all.take(idx)};
}

}  // namespace

std::string TaskSpec::requester() const {
  return stage + "/t/" + std::to_string(task_index) + "/a/" + std::to_string(attempt);
}

Schema source_schema(const Source& source) {
  return std::visit(Overloaded{[](const ScanSource& s) {
                                 if (s.columns.empty()) return s.table_schema;
                                 std::vector<Field> fields;
                                 for (const auto& c : s.columns) fields.push_back(s.table_schema.field(s.table_schema.index_of(c)));
                                 return Schema(std::move(fields));
                               },
                               [](const ObjectSource& s) { return s.schema; }},
                    source);
}

Schema pipeline_schema(const Schema& input, const std::vector<Operator>& ops) {
  Schema current = input;
  for (const auto& op : ops) {
    current = std::visit(
        Overloaded{[&](const FilterOp& f) {
                     result_type(f.predicate, current);
                     return current;
                   },
                   [&](const ProjectOp& p) { return project_schema(p, current); },
                   [&](const JoinOp& j) { return join_schema(current, j.build.schema, j.probe_keys, j.build_keys); },
                   [&](const PartialAggOp& a) { return partial_schema(a.spec, current); },
                   [&](const FinalAggOp& a) { return Aggregator(a.spec, current, Aggregator::Mode::kFinal).output_schema(); },
                   [&](const OrderByOp& o) {
                     for (const auto& k : o.keys) current.index_of(k.column);
                     return current;
                   }},
        op);
  }
  return current;
}

std::vector<RowBatch> apply_operator(const Operator& op, std::vector<RowBatch> input, const Schema& input_schema) {
  return std::visit(
      Overloaded{
          [&](const FilterOp& f) {
            std::vector<RowBatch> out;
            for (auto& b : input) {
              auto rows = select_rows(f.predicate, b);
              if (rows.size() == b.num_rows()) {
                out.push_back(std::move(b));
              } else if (!rows.empty()) {
                out.push_back(b.take(rows));
              }
            }
            return out;
          },
          [&](const ProjectOp& p) {
            Schema schema = project_schema(p, input_schema);
            std::vector<RowBatch> out;
            for (const auto& b : input) {
              std::vector<Column> cols;
              for (const auto& item : p.items) cols.push_back(evaluate(item.expr, b));
              out.emplace_back(schema, std::move(cols));
            }
            return out;
          },
          [&](const JoinOp&) -> std::vector<RowBatch> {
            throw SpecMismatch("joins need a store to read their build side");
          },
          [&](const PartialAggOp& a) {
            Aggregator agg(a.spec, input_schema, Aggregator::Mode::kPartial);
            for (const auto& b : input) agg.add(b);
            return std::vector<RowBatch>{agg.finish()};
          },
          [&](const FinalAggOp& a) {
            Aggregator agg(a.spec, input_schema, Aggregator::Mode::kFinal);
            for (const auto& b : input) agg.add(b);
            return std::vector<RowBatch>{agg.finish()};
          },
          [&](const OrderByOp& o) { return order_by(o, std::move(input), input_schema); }},
      op);
}

TaskOutputSummary run_task(const TaskSpec& spec, store::ObjectStore& store, runtime::InvocationContext* ctx) {
  auto& ex = store.executor();
  StoreClient client(store, spec.mitigation, store::RequestContext{spec.query_id, spec.requester()});
  Reservation memory(ctx);
  TaskOutputSummary summary;

  const Schema input_schema = source_schema(spec.source);
  const Schema output_schema = pipeline_schema(input_schema, spec.ops);
  for (const auto& op : spec.ops)
    if (const auto* j = std::get_if<JoinOp>(&op)) check_partitioned_join(spec.source, *j);

  const bool combine = std::holds_alternative<CombineSink>(spec.sink);
  if (combine && (!spec.ops.empty() || !std::holds_alternative<ObjectSource>(spec.source)))
    throw SpecMismatch("a combine task reads partitioned objects and applies no operators");

  std::vector<std::vector<RowBatch>> per_object;
  std::vector<RowBatch> batches;
  if (const auto* scan = std::get_if<ScanSource>(&spec.source)) {
    batches = read_scan(*scan, client);
  } else {
    per_object = read_objects(std::get<ObjectSource>(spec.source), client, spec.head_range);
    if (!combine) batches = flatten(std::move(per_object));
  }
  for (const auto& o : per_object) {
    summary.rows_in += total_rows(o);
    memory.add(total_bytes(o), "combined partitions");
  }
  summary.rows_in += total_rows(batches);
  memory.add(total_bytes(batches), "task input");

  if (spec.cpu_ns_per_row > 0.0 && summary.rows_in > 0)
    ex.sleep_for(sim::from_ms(static_cast<double>(summary.rows_in) * spec.cpu_ns_per_row / 1e6));

  Schema current = input_schema;
  for (const auto& op : spec.ops) {
    if (const auto* j = std::get_if<JoinOp>(&op)) {
      auto build = flatten(read_objects(j->build, client, spec.head_range));
      memory.add(total_bytes(build), "join build input");
      HashJoin table(build, j->build.schema, j->build_keys, current, j->probe_keys);
      memory.add(table.estimated_bytes(), "join hash table");
      std::vector<RowBatch> out;
      for (const auto& b : batches) {
        RowBatch joined = table.probe(b);
        if (joined.num_rows() > 0) out.push_back(std::move(joined));
      }
      batches = std::move(out);
      current = table.output_schema();
    } else {
      Schema next = pipeline_schema(current, {op});
      batches = apply_operator(op, std::move(batches), current);
      current = std::move(next);
    }
  }

  std::vector<RowBatch> partitions;
  std::visit(Overloaded{[&](const PartitionSink& p) {
                          std::vector<std::vector<RowBatch>> parts(p.partitioner.count);
                          for (const auto& b : batches) {
                            auto split = p.partitioner.split(b);
                            for (std::size_t i = 0; i < split.size(); ++i)
                              if (split[i].num_rows() > 0) parts[i].push_back(std::move(split[i]));
                          }
                          for (auto& part : parts)
                            partitions.push_back(part.empty() ? RowBatch::empty(output_schema)
                                                              : concat_all(part, output_schema));
                        },
                        [&](const SingleSink&) {
                          partitions.push_back(batches.empty() ? RowBatch::empty(output_schema)
                                                               : concat_all(batches, output_schema));
                        },
                        [&](const CombineSink&) {
                          std::size_t width = per_object.empty() ? 0 : per_object.front().size();
                          for (const auto& o : per_object)
                            if (o.size() != width) throw PartitionMismatch("combined objects disagree on partition count");
                          for (std::size_t j = 0; j < width; ++j) {
                            std::vector<RowBatch> column;
                            for (auto& o : per_object) column.push_back(std::move(o[j]));
                            partitions.push_back(concat_all(column, output_schema));
                          }
                          if (partitions.empty()) partitions.push_back(RowBatch::empty(output_schema));
                        }},
             spec.sink);
  for (const auto& p : partitions) summary.rows_out += p.num_rows();

  if (spec.extra_delay_ms > 0.0) ex.sleep_for(sim::from_ms(spec.extra_delay_ms));
  if (spec.fault == FaultPoint::kBeforeWrite) throw InjectedFault("fault injected before write in " + spec.requester());

  auto payload = store::make_payload(format::write_partitioned(partitions));
  summary.bytes_written = payload->size();
  client.write_object(spec.output, payload);
  summary.objects_written = spec.mitigation.doublewrite ? 2 : 1;

  if (spec.fault == FaultPoint::kAfterWrite) throw InjectedFault("fault injected after write in " + spec.requester());
  summary.stats = client.stats();
  return summary;
}

}  // namespace cirrus::exec
