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

#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace cirrus::testing {
namespace {

bool null_of(const Value& v) { return v.index() == 0; }
bool is_int(const Value& v) { return std::holds_alternative<std::int64_t>(v); }
bool is_num(const Value& v) { return is_int(v) || std::holds_alternative<double>(v); }
double num(const Value& v) { return is_int(v) ? static_cast<double>(std::get<std::int64_t>(v)) : std::get<double>(v); }
bool truthy(const Value& v) { return is_num(v) && num(v) != 0.0; }

// null < numbers < strings, numbers compared by value.
int order(const Value& a, const Value& b) {
  auto rank = [](const Value& v) { return null_of(v) ? 0 : is_num(v) ? 1 : 2; };
  if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
  if (null_of(a)) return 0;
  if (is_num(a)) {
    if (is_int(a) && is_int(b)) {
      auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
      return x < y ? -1 : x > y ? 1 : 0;
    }
    double x = num(a), y = num(b);
    return x < y ? -1 : x > y ? 1 : 0;
  }
  return std::get<std::string>(a).compare(std::get<std::string>(b)) < 0   ? -1
         : std::get<std::string>(a).compare(std::get<std::string>(b)) > 0 ? 1
                                                                           : 0;
}

// Proleptic Gregorian year of a day count since 1970-01-01.
std::int64_t year_of(std::int64_t days) {
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
  return yoe + era * 400 + (m <= 2 ? 1 : 0);
}

struct Row {
  const Table& table;
  const std::vector<Value>& cells;
};

Value eval(const exec::Expr& e, const Row& row) {
  using K = exec::Expr::Kind;
  if (e.kind == K::kColumn) return row.cells[row.table.index_of(e.name)];
  if (e.kind == K::kLiteral) return e.literal;
  const std::string& op = e.name;
  auto arg = [&](std::size_t i) { return eval(e.args.at(i), row); };
  auto arith = [](char op, const Value& a, const Value& b) -> Value {
    if (null_of(a) || null_of(b)) return {};
    if (op == '/') {
      if (num(b) == 0.0) return {};
      return num(a) / num(b);
    }
    if (is_int(a) && is_int(b)) {
      auto x = std::get<std::int64_t>(a), y = std::get<std::int64_t>(b);
      return op == '+' ? x + y : op == '-' ? x - y : x * y;
    }
    double x = num(a), y = num(b);
    return op == '+' ? x + y : op == '-' ? x - y : x * y;
  };
  if (op == "+" || op == "-" || op == "*" || op == "/") return arith(op[0], arg(0), arg(1));
  if (op == "neg") return arith('-', Value(std::int64_t{0}), arg(0));
  if (op == "==" || op == "!=" || op == "<" || op == "<=" || op == ">" || op == ">=") {
    Value a = arg(0), b = arg(1);
    if (null_of(a) || null_of(b)) return std::int64_t{0};
    int c = order(a, b);
    bool r = op == "==" ? c == 0 : op == "!=" ? c != 0 : op == "<" ? c < 0 : op == "<=" ? c <= 0 : op == ">" ? c > 0 : c >= 0;
    return std::int64_t{r};
  }
  if (op == "and") {
    for (std::size_t i = 0; i < e.args.size(); ++i)
      if (!truthy(arg(i))) return std::int64_t{0};
    return std::int64_t{1};
  }
  if (op == "or") {
    for (std::size_t i = 0; i < e.args.size(); ++i)
      if (truthy(arg(i))) return std::int64_t{1};
    return std::int64_t{0};
  }
  if (op == "not") return std::int64_t{!truthy(arg(0))};
  if (op == "in") {
    Value x = arg(0);
    if (null_of(x)) return std::int64_t{0};
    for (std::size_t i = 1; i < e.args.size(); ++i)
      if (!null_of(e.args[i].literal) && order(x, e.args[i].literal) == 0) return std::int64_t{1};
    return std::int64_t{0};
  }
  if (op == "starts_with") {
    Value x = arg(0);
    if (null_of(x)) return std::int64_t{0};
    const auto& s = std::get<std::string>(x);
    const auto& p = std::get<std::string>(e.args.at(1).literal);
    return std::int64_t{s.compare(0, p.size(), p) == 0 && s.size() >= p.size()};
  }
  if (op == "year") {
    Value x = arg(0);
    if (null_of(x)) return {};
    return year_of(std::get<std::int64_t>(x));
  }
  if (op == "if") return truthy(arg(0)) ? arg(1) : arg(2);
  throw std::runtime_error("reference: unknown operator " + op);
}

// Compensated float sum, kept alongside an exact integer sum while every
// input is an integer.
struct Sum {
  bool any_float = false;
  std::int64_t i = 0;
  double s = 0.0;
  double c = 0.0;

  void add(const Value& v) {
    if (null_of(v)) return;
    if (is_int(v) && !any_float) {
      i += std::get<std::int64_t>(v);
      return;
    }
    if (!any_float) {
      any_float = true;
      add_float(static_cast<double>(i));
    }
    add_float(num(v));
  }
  void add_float(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x)) {
      c += (s - t) + x;
    } else {
      c += (x - t) + s;
    }
    s = t;
  }
  Value value() const { return any_float ? Value(s + c) : Value(i); }
  double as_double() const { return any_float ? s + c : static_cast<double>(i); }
};

struct AggState {
  Sum sum;
  std::int64_t count = 0;
  Value extreme;
};

Table aggregate(const Table& in, const exec::AggSpec& spec, bool partial) {
  std::vector<std::size_t> key_idx;
  for (const auto& g : spec.group_by) key_idx.push_back(in.index_of(g));
  std::map<std::vector<Value>, std::vector<AggState>> groups;
  std::vector<std::vector<Value>> first_seen;
  for (const auto& cells : in.rows) {
    std::vector<Value> key;
    for (auto k : key_idx) key.push_back(cells[k]);
    auto [it, fresh] = groups.try_emplace(key, std::vector<AggState>(spec.aggs.size()));
    if (fresh) first_seen.push_back(key);
    Row row{in, cells};
    for (std::size_t a = 0; a < spec.aggs.size(); ++a) {
      const auto& item = spec.aggs[a];
      auto& st = it->second[a];
      switch (item.fn) {
        case exec::AggFn::kCount:
          if (partial) {
            st.count += !item.expr || !null_of(eval(*item.expr, row));
          } else {
            st.count += std::get<std::int64_t>(cells[in.index_of(item.name)]);
          }
          break;
        case exec::AggFn::kSum:
          st.sum.add(partial ? eval(*item.expr, row) : cells[in.index_of(item.name)]);
          break;
        case exec::AggFn::kAvg:
          if (partial) {
            Value v = eval(*item.expr, row);
            if (null_of(v)) break;
            st.sum.add(num(v));
            ++st.count;
          } else {
            st.sum.add(num(cells[in.index_of(item.name + "__sum")]));
            st.count += std::get<std::int64_t>(cells[in.index_of(item.name + "__count")]);
          }
          break;
        case exec::AggFn::kMin:
        case exec::AggFn::kMax: {
          Value v = partial ? eval(*item.expr, row) : cells[in.index_of(item.name)];
          if (null_of(v)) break;
          const bool less = order(v, st.extreme) < 0;
          if (null_of(st.extreme) || (item.fn == exec::AggFn::kMin ? less : order(v, st.extreme) > 0))
            st.extreme = v;
          break;
        }
      }
    }
  }
  if (spec.group_by.empty() && groups.empty()) {
    groups.emplace(std::vector<Value>{}, std::vector<AggState>(spec.aggs.size()));
    first_seen.emplace_back();
  }

  Table out;
  out.names = spec.group_by;
  for (const auto& item : spec.aggs) {
    if (item.fn == exec::AggFn::kAvg && partial) {
      out.names.push_back(item.name + "__sum");
      out.names.push_back(item.name + "__count");
    } else {
      out.names.push_back(item.name);
    }
  }
  for (const auto& key : first_seen) {
    const auto& states = groups.at(key);
    std::vector<Value> cells = key;
    for (std::size_t a = 0; a < spec.aggs.size(); ++a) {
      const auto& st = states[a];
      switch (spec.aggs[a].fn) {
        case exec::AggFn::kCount:
          cells.emplace_back(st.count);
          break;
        case exec::AggFn::kSum:
          cells.push_back(st.sum.value());
          break;
        case exec::AggFn::kAvg:
          if (partial) {
            cells.emplace_back(st.sum.as_double());
            cells.emplace_back(st.count);
          } else if (st.count == 0) {
            cells.emplace_back();
          } else {
            cells.emplace_back(st.sum.as_double() / static_cast<double>(st.count));
          }
          break;
        case exec::AggFn::kMin:
        case exec::AggFn::kMax:
          cells.push_back(st.extreme);
          break;
      }
    }
    out.rows.push_back(std::move(cells));
  }
  return out;
}

Table join(const Table& probe, const Table& build, const std::vector<std::string>& probe_keys,
           const std::vector<std::string>& build_keys) {
  std::vector<std::size_t> pk, bk;
  for (const auto& k : probe_keys) pk.push_back(probe.index_of(k));
  for (const auto& k : build_keys) bk.push_back(build.index_of(k));
  std::map<std::vector<Value>, std::vector<std::size_t>> index;
  for (std::size_t r = 0; r < build.rows.size(); ++r) {
    std::vector<Value> key;
    bool has_null = false;
    for (auto k : bk) {
      key.push_back(build.rows[r][k]);
      has_null = has_null || null_of(key.back());
    }
    if (!has_null) index[key].push_back(r);
  }
  Table out;
  out.names = probe.names;
  out.names.insert(out.names.end(), build.names.begin(), build.names.end());
  for (const auto& cells : probe.rows) {
    std::vector<Value> key;
    for (auto k : pk) key.push_back(cells[k]);
    auto it = index.find(key);
    if (it == index.end()) continue;
    for (auto r : it->second) {
      auto joined = cells;
      joined.insert(joined.end(), build.rows[r].begin(), build.rows[r].end());
      out.rows.push_back(std::move(joined));
    }
  }
  return out;
}

void sort_rows(Table& t, const exec::OrderByOp& op) {
  std::vector<std::pair<std::size_t, bool>> keys;
  for (const auto& k : op.keys) keys.emplace_back(t.index_of(k.column), k.descending);
  std::stable_sort(t.rows.begin(), t.rows.end(), [&](const auto& a, const auto& b) {
    for (auto [i, desc] : keys) {
      int c = order(a[i], b[i]);
      if (c != 0) return desc ? c > 0 : c < 0;
    }
    return false;
  });
  if (op.limit && t.rows.size() > *op.limit) t.rows.resize(*op.limit);
}

class Runner {
 public:
  Runner(const coord::PhysicalPlan& plan, const datagen::DatagenOptions& data) : plan_(plan), data_(data) {}

  const Table& stage(const std::string& id) {
    if (auto it = done_.find(id); it != done_.end()) return it->second;
    const auto& def = plan_.stage(id);
    Table t = input(def.source);
    for (const auto& op : def.ops) t = apply(op, std::move(t));
    return done_.emplace(id, std::move(t)).first->second;
  }

 private:
  Table input(const coord::StageInput& in) {
    if (const auto* scan = std::get_if<coord::ScanInput>(&in)) return base_table(*scan);
    if (const auto* s = std::get_if<coord::ShuffleInput>(&in)) return stage(s->stage);
    return stage(std::get<coord::GatherInput>(in).stage);
  }

  Table base_table(const coord::ScanInput& scan) {
    auto batch = datagen::generate_table(scan.table, data_);
    Table full = to_table(batch);
    if (scan.columns.empty()) return full;
    Table out;
    out.names = scan.columns;
    std::vector<std::size_t> idx;
    for (const auto& c : scan.columns) idx.push_back(full.index_of(c));
    for (const auto& cells : full.rows) {
      std::vector<Value> row;
      for (auto i : idx) row.push_back(cells[i]);
      out.rows.push_back(std::move(row));
    }
    return out;
  }

  Table apply(const coord::OpDef& op, Table in) {
    if (const auto* f = std::get_if<exec::FilterOp>(&op)) {
      Table out;
      out.names = in.names;
      for (auto& cells : in.rows)
        if (truthy(eval(f->predicate, Row{in, cells}))) out.rows.push_back(std::move(cells));
      return out;
    }
    if (const auto* p = std::get_if<exec::ProjectOp>(&op)) {
      Table out;
      for (const auto& item : p->items) out.names.push_back(item.name);
      for (const auto& cells : in.rows) {
        std::vector<Value> row;
        for (const auto& item : p->items) row.push_back(eval(item.expr, Row{in, cells}));
        out.rows.push_back(std::move(row));
      }
      return out;
    }
    if (const auto* j = std::get_if<coord::JoinDef>(&op)) {
      Table build = input(j->build);
      return join(in, build, j->probe_keys, j->build_keys);
    }
    if (const auto* a = std::get_if<exec::PartialAggOp>(&op)) return aggregate(in, a->spec, true);
    if (const auto* a = std::get_if<exec::FinalAggOp>(&op)) return aggregate(in, a->spec, false);
    sort_rows(in, std::get<exec::OrderByOp>(op));
    return in;
  }

  const coord::PhysicalPlan& plan_;
  datagen::DatagenOptions data_;
  std::map<std::string, Table> done_;
};

bool cells_match(const Value& a, const Value& b, double rel_tol) {
  if (null_of(a) || null_of(b)) return null_of(a) && null_of(b);
  if (is_num(a) != is_num(b)) return false;
  if (!is_num(a)) return std::get<std::string>(a) == std::get<std::string>(b);
  if (is_int(a) && is_int(b)) return std::get<std::int64_t>(a) == std::get<std::int64_t>(b);
  double x = num(a), y = num(b);
  return std::abs(x - y) <= rel_tol * std::max({1.0, std::abs(x), std::abs(y)});
}

std::string show(const std::vector<Value>& row) {
  std::ostringstream out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    out << (i ? "," : "");
    const auto& v = row[i];
    if (null_of(v)) {
      out << "NULL";
    } else if (is_int(v)) {
      out << std::get<std::int64_t>(v);
    } else if (is_num(v)) {
      out.precision(17);
      out << std::get<double>(v);
    } else {
      out << std::get<std::string>(v);
    }
  }
  return out.str();
}

}  // namespace

std::size_t Table::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::runtime_error("reference: no column " + name);
  return static_cast<std::size_t>(it - names.begin());
}

Table to_table(const format::RowBatch& batch) {
  Table t;
  for (const auto& f : batch.schema().fields()) t.names.push_back(f.name);
  t.rows.reserve(batch.num_rows());
  for (std::size_t r = 0; r < batch.num_rows(); ++r) t.rows.push_back(batch.row(r));
  return t;
}

Table reference_run(const coord::PhysicalPlan& plan, const datagen::DatagenOptions& data) {
  Runner runner(plan, data);
  return runner.stage(plan.terminal().id);
}

bool terminal_is_ordered(const coord::PhysicalPlan& plan) {
  const auto& ops = plan.terminal().ops;
  return !ops.empty() && std::holds_alternative<exec::OrderByOp>(ops.back());
}

bool same_result(const format::RowBatch& engine, const Table& expected, bool ordered, double rel_tol,
                 std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  Table got = to_table(engine);
  if (got.names != expected.names) return fail("column names differ");
  if (got.rows.size() != expected.rows.size())
    return fail("row count " + std::to_string(got.rows.size()) + " vs " + std::to_string(expected.rows.size()));
  auto want = expected.rows;
  if (!ordered) {
    auto lex = [](const auto& a, const auto& b) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        int c = order(a[i], b[i]);
        if (c != 0) return c < 0;
      }
      return false;
    };
    std::sort(got.rows.begin(), got.rows.end(), lex);
    std::sort(want.begin(), want.end(), lex);
  }
  for (std::size_t r = 0; r < want.size(); ++r) {
    for (std::size_t c = 0; c < want[r].size(); ++c) {
      if (!cells_match(got.rows[r][c], want[r][c], rel_tol))
        return fail("row " + std::to_string(r) + ": got " + show(got.rows[r]) + " want " + show(want[r]));
    }
  }
  return true;
}

}  // namespace cirrus::testing
