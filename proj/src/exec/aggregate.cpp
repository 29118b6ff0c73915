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

#include "cirrus/exec/aggregate.hpp"

#include <cstring>
#include <unordered_map>

#include "cirrus/errors.hpp"

namespace cirrus::exec {
namespace {

using format::Field;

bool integral(DataType t) { return t == DataType::kInt64 || t == DataType::kDate32; }

void append_key(std::string& key, const Column& c, std::size_t r) {
  if (!c.valid(r)) {
    key.push_back('\0');
    return;
  }
  key.push_back('\1');
  if (c.type() == DataType::kString) {
    auto s = c.string_at(r);
    std::uint32_t n = static_cast<std::uint32_t>(s.size());
    key.append(reinterpret_cast<const char*>(&n), sizeof n);
    key.append(s);
  } else if (c.type() == DataType::kFloat64) {
    double d = c.float_at(r);
    if (d == 0.0) d = 0.0;  // -0 and +0 group together
    key.append(reinterpret_cast<const char*>(&d), sizeof d);
  } else {
    std::int64_t i = c.int_at(r);
    key.append(reinterpret_cast<const char*>(&i), sizeof i);
  }
}

// Value stored in a column of type `t` (dates come back as int64 values).
Value as_type(Value v, DataType t) {
  if (is_null(v)) return v;
  if (t == DataType::kFloat64 && std::holds_alternative<std::int64_t>(v))
    return static_cast<double>(std::get<std::int64_t>(v));
  return v;
}

}  // namespace

std::string_view to_string(AggFn fn) {
  switch (fn) {
    case AggFn::kSum:
      return "sum";
    case AggFn::kCount:
      return "count";
    case AggFn::kMin:
      return "min";
    case AggFn::kMax:
      return "max";
    case AggFn::kAvg:
      return "avg";
  }
  return "?";
}

AggFn agg_fn_from_string(std::string_view s) {
  if (s == "sum") return AggFn::kSum;
  if (s == "count") return AggFn::kCount;
  if (s == "min") return AggFn::kMin;
  if (s == "max") return AggFn::kMax;
  if (s == "avg") return AggFn::kAvg;
  throw SpecMismatch("unknown aggregate '" + std::string(s) + "'");
}

Schema partial_schema(const AggSpec& spec, const Schema& input) {
  std::vector<Field> fields;
  for (const auto& g : spec.group_by) fields.push_back(input.field(input.index_of(g)));
  for (const auto& a : spec.aggs) {
    if (!a.expr && a.fn != AggFn::kCount) throw SpecMismatch(std::string(to_string(a.fn)) + " needs an argument");
    DataType t = a.expr ? result_type(*a.expr, input) : DataType::kInt64;
    if (t == DataType::kString && (a.fn == AggFn::kSum || a.fn == AggFn::kAvg))
      throw SpecMismatch(std::string(to_string(a.fn)) + " of a string column '" + a.name + "'");
    switch (a.fn) {
      case AggFn::kSum:
        fields.push_back({a.name, integral(t) ? DataType::kInt64 : DataType::kFloat64, false});
        break;
      case AggFn::kCount:
        fields.push_back({a.name, DataType::kInt64, false});
        break;
      case AggFn::kMin:
      case AggFn::kMax:
        fields.push_back({a.name, t, true});
        break;
      case AggFn::kAvg:
        fields.push_back({a.name + "__sum", DataType::kFloat64, false});
        fields.push_back({a.name + "__count", DataType::kInt64, false});
        break;
    }
  }
  try {
    return Schema(std::move(fields));
  } catch (const SchemaMismatch& e) {
    throw SpecMismatch(std::string("aggregate output: ") + e.what());
  }
}

Schema final_schema(const AggSpec& spec, const Schema& partial) {
  std::vector<Field> fields;
  for (const auto& g : spec.group_by) fields.push_back(partial.field(partial.index_of(g)));
  for (const auto& a : spec.aggs) {
    if (a.fn == AggFn::kAvg) {
      fields.push_back({a.name, DataType::kFloat64, true});
    } else {
      fields.push_back(partial.field(partial.index_of(a.name)));
    }
  }
  return Schema(std::move(fields));
}

struct Aggregator::Impl {
  struct State {
    std::vector<std::int64_t> isum;
    std::vector<double> fsum;
    std::vector<std::int64_t> count;
    std::vector<Value> extreme;
  };

  AggSpec spec;
  Mode mode;
  Schema input;
  Schema output;
  std::vector<DataType> sum_types;  // per aggregate: type of its sum/extreme
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::vector<Value>> keys;
  std::vector<State> states;
  std::uint64_t key_bytes = 0;

  std::uint32_t group_for(const std::vector<const Column*>& cols, std::size_t r, std::string& scratch) {
    scratch.clear();
    for (const auto* c : cols) append_key(scratch, *c, r);
    auto [it, inserted] = index.try_emplace(scratch, static_cast<std::uint32_t>(keys.size()));
    if (inserted) {
      key_bytes += scratch.size();
      std::vector<Value> k;
      for (const auto* c : cols) k.push_back(c->value(r));
      keys.push_back(std::move(k));
      for (auto& s : states) {
        s.isum.push_back(0);
        s.fsum.push_back(0.0);
        s.count.push_back(0);
        s.extreme.emplace_back();
      }
    }
    return it->second;
  }

  void fold_extreme(Value& slot, Value v, bool is_min) {
    if (is_null(v)) return;
    if (is_null(slot)) {
      slot = std::move(v);
      return;
    }
    int c = format::compare_values(v, slot);
    if (is_min ? c < 0 : c > 0) slot = std::move(v);
  }
};

Aggregator::Aggregator(AggSpec spec, const Schema& input, Mode mode) : impl_(std::make_unique<Impl>()) {
  impl_->spec = std::move(spec);
  impl_->mode = mode;
  impl_->input = input;
  const auto& s = impl_->spec;
  if (mode == Mode::kPartial) {
    impl_->output = partial_schema(s, input);
  } else {
    // The input must look like a partial produced under the same spec.
    std::vector<Field> expect;
    for (const auto& g : s.group_by) {
      auto i = input.find(g);
      if (!i) throw SpecMismatch("partial aggregate lacks group column '" + g + "'");
      expect.push_back(input.field(*i));
    }
    for (const auto& a : s.aggs) {
      auto need = [&](const std::string& name) {
        auto i = input.find(name);
        if (!i) throw SpecMismatch("partial aggregate lacks state column '" + name + "'");
        expect.push_back(input.field(*i));
      };
      if (a.fn == AggFn::kAvg) {
        need(a.name + "__sum");
        need(a.name + "__count");
      } else {
        need(a.name);
      }
    }
    if (!(Schema(expect) == input)) throw SpecMismatch("partial aggregate schema does not match the spec");
    impl_->output = final_schema(s, input);
  }
  for (const auto& a : s.aggs) {
    if (mode == Mode::kPartial) {
      impl_->sum_types.push_back(a.expr ? result_type(*a.expr, input) : DataType::kInt64);
    } else {
      auto name = a.fn == AggFn::kAvg ? a.name + "__sum" : a.name;
      impl_->sum_types.push_back(input.field(input.index_of(name)).type);
    }
  }
  impl_->states.resize(s.aggs.size());
}

Aggregator::~Aggregator() = default;
Aggregator::Aggregator(Aggregator&&) noexcept = default;

void Aggregator::add(const RowBatch& batch) {
  auto& im = *impl_;
  if (!(batch.schema() == im.input)) throw SpecMismatch("aggregate input schema changed between batches");
  std::vector<const Column*> group_cols;
  for (const auto& g : im.spec.group_by) group_cols.push_back(&batch.column(g));

  // Argument columns: evaluated expressions (partial) or state columns (final).
  std::vector<Column> owned;
  std::vector<const Column*> args(im.spec.aggs.size(), nullptr);
  std::vector<const Column*> counts(im.spec.aggs.size(), nullptr);
  owned.reserve(im.spec.aggs.size());
  for (std::size_t i = 0; i < im.spec.aggs.size(); ++i) {
    const auto& a = im.spec.aggs[i];
    if (im.mode == Mode::kPartial) {
      if (a.expr) {
        owned.push_back(evaluate(*a.expr, batch));
        args[i] = &owned.back();
      }
    } else if (a.fn == AggFn::kAvg) {
      args[i] = &batch.column(a.name + "__sum");
      counts[i] = &batch.column(a.name + "__count");
    } else {
      args[i] = &batch.column(a.name);
    }
  }

  std::string scratch;
  for (std::size_t r = 0; r < batch.num_rows(); ++r) {
    std::uint32_t g = group_cols.empty() && !im.keys.empty() ? 0 : im.group_for(group_cols, r, scratch);
    for (std::size_t i = 0; i < im.spec.aggs.size(); ++i) {
      const auto& a = im.spec.aggs[i];
      auto& st = im.states[i];
      const Column* c = args[i];
      const bool partial = im.mode == Mode::kPartial;
      switch (a.fn) {
        case AggFn::kCount:
          if (partial) {
            st.count[g] += (c == nullptr || c->valid(r)) ? 1 : 0;
          } else {
            st.count[g] += c->int_at(r);
          }
          break;
        case AggFn::kSum:
          if (!c->valid(r)) break;
          if (integral(im.sum_types[i])) {
            st.isum[g] += c->int_at(r);
          } else {
            st.fsum[g] += c->float_at(r);
          }
          break;
        case AggFn::kAvg:
          if (partial) {
            if (!c->valid(r)) break;
            st.fsum[g] += c->float_at(r);
            st.count[g] += 1;
          } else {
            st.fsum[g] += c->float_at(r);
            st.count[g] += counts[i]->int_at(r);
          }
          break;
        case AggFn::kMin:
        case AggFn::kMax:
          im.fold_extreme(st.extreme[g], c->value(r), a.fn == AggFn::kMin);
          break;
      }
    }
  }
}

RowBatch Aggregator::finish() {
  auto& im = *impl_;
  if (im.spec.group_by.empty() && im.keys.empty()) {
    std::string scratch;
    im.group_for({}, 0, scratch);
  }
  format::RowBatchBuilder out(im.output);
  for (std::size_t g = 0; g < im.keys.size(); ++g) {
    std::vector<Value> row = im.keys[g];
    for (std::size_t i = 0; i < im.spec.aggs.size(); ++i) {
      const auto& a = im.spec.aggs[i];
      const auto& st = im.states[i];
      switch (a.fn) {
        case AggFn::kCount:
          row.emplace_back(st.count[g]);
          break;
        case AggFn::kSum:
          if (integral(im.sum_types[i])) {
            row.emplace_back(st.isum[g]);
          } else {
            row.emplace_back(st.fsum[g]);
          }
          break;
        case AggFn::kAvg:
          if (im.mode == Mode::kPartial) {
            row.emplace_back(st.fsum[g]);
            row.emplace_back(st.count[g]);
          } else if (st.count[g] == 0) {
            row.emplace_back();
          } else {
            row.emplace_back(st.fsum[g] / static_cast<double>(st.count[g]));
          }
          break;
        case AggFn::kMin:
        case AggFn::kMax:
          row.push_back(as_type(st.extreme[g], im.sum_types[i]));
          break;
      }
    }
    out.add_row(row);
  }
  return out.build();
}

std::size_t Aggregator::group_count() const { return impl_->keys.size(); }

std::uint64_t Aggregator::estimated_bytes() const {
  const auto& im = *impl_;
  return im.key_bytes + im.keys.size() * (64 + 32 * im.spec.aggs.size());
}

const Schema& Aggregator::output_schema() const { return impl_->output; }

}  // namespace cirrus::exec
