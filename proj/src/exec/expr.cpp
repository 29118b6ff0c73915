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

#include "cirrus/exec/expr.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "cirrus/errors.hpp"

namespace cirrus::exec {
namespace {

using format::CompareOp;

bool is_numeric(DataType t) { return t != DataType::kString; }
bool is_integral(DataType t) { return t == DataType::kInt64 || t == DataType::kDate32; }

DataType literal_type(const Value& v) {
  if (std::holds_alternative<double>(v)) return DataType::kFloat64;
  if (std::holds_alternative<std::string>(v)) return DataType::kString;
  return DataType::kInt64;  // integers, and null defaults to int64
}

std::optional<CompareOp> comparison(std::string_view op) {
  if (op == "==") return CompareOp::kEq;
  if (op == "!=") return CompareOp::kNe;
  if (op == "<") return CompareOp::kLt;
  if (op == "<=") return CompareOp::kLe;
  if (op == ">") return CompareOp::kGt;
  if (op == ">=") return CompareOp::kGe;
  return std::nullopt;
}

CompareOp flip(CompareOp op) {
  switch (op) {
    case CompareOp::kLt:
      return CompareOp::kGt;
    case CompareOp::kLe:
      return CompareOp::kGe;
    case CompareOp::kGt:
      return CompareOp::kLt;
    case CompareOp::kGe:
      return CompareOp::kLe;
    default:
      return op;
  }
}

bool holds(CompareOp op, int c) {
  switch (op) {
    case CompareOp::kEq:
      return c == 0;
    case CompareOp::kNe:
      return c != 0;
    case CompareOp::kLt:
      return c < 0;
    case CompareOp::kLe:
      return c <= 0;
    case CompareOp::kGt:
      return c > 0;
    case CompareOp::kGe:
      return c >= 0;
  }
  return false;
}

void need_args(const Expr& e, std::size_t n) {
  if (e.args.size() != n)
    throw SpecMismatch("'" + e.name + "' takes " + std::to_string(n) + " arguments, got " + std::to_string(e.args.size()));
}

// A column or a broadcast constant, read row by row.
class Operand {
 public:
  Operand(const Expr& e, const RowBatch& batch) {
    if (e.kind == Expr::Kind::kLiteral) {
      constant_ = e.literal;
      type_ = literal_type(e.literal);
      if (auto* i = std::get_if<std::int64_t>(&constant_)) int_ = *i, dbl_ = static_cast<double>(*i);
      if (auto* d = std::get_if<double>(&constant_)) dbl_ = *d;
      if (auto* s = std::get_if<std::string>(&constant_)) str_ = *s;
    } else if (e.kind == Expr::Kind::kColumn) {
      column_ = &batch.column(e.name);
      type_ = column_->type();
    } else {
      owned_ = evaluate(e, batch);
      column_ = &owned_;
      type_ = owned_.type();
    }
  }

  DataType type() const { return type_; }
  bool valid(std::size_t r) const { return column_ ? column_->valid(r) : !is_null(constant_); }
  std::int64_t i(std::size_t r) const { return column_ ? column_->int_at(r) : int_; }
  double d(std::size_t r) const { return column_ ? column_->float_at(r) : dbl_; }
  std::string_view s(std::size_t r) const { return column_ ? column_->string_at(r) : std::string_view(str_); }
  Value value(std::size_t r) const { return column_ ? column_->value(r) : constant_; }

 private:
  const Column* column_ = nullptr;
  Column owned_;
  Value constant_;
  DataType type_ = DataType::kInt64;
  std::int64_t int_ = 0;
  double dbl_ = 0.0;
  std::string str_;
};

int compare_at(const Operand& a, const Operand& b, std::size_t r) {
  if (a.type() == DataType::kString) {
    int c = a.s(r).compare(b.s(r));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (is_integral(a.type()) && is_integral(b.type())) {
    auto x = a.i(r), y = b.i(r);
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  double x = a.d(r), y = b.d(r);
  return x < y ? -1 : (x > y ? 1 : 0);
}

Column bools(std::vector<std::int64_t> v) { return Column(DataType::kInt64, std::move(v)); }

Column arithmetic(const Expr& e, const RowBatch& batch) {
  Operand a(e.args[0], batch), b(e.args[1], batch);
  const std::size_t n = batch.num_rows();
  std::vector<std::uint8_t> validity;
  bool any_null = false;
  for (std::size_t r = 0; r < n && !any_null; ++r) any_null = !a.valid(r) || !b.valid(r);
  if (any_null) {
    validity.resize(n);
    for (std::size_t r = 0; r < n; ++r) validity[r] = a.valid(r) && b.valid(r);
  }
  const char op = e.name[0];
  if (op != '/' && is_integral(a.type()) && is_integral(b.type())) {
    std::vector<std::int64_t> out(n);
    for (std::size_t r = 0; r < n; ++r) {
      auto x = a.i(r), y = b.i(r);
      out[r] = op == '+' ? x + y : op == '-' ? x - y : x * y;
    }
    return Column(DataType::kInt64, std::move(out), std::move(validity));
  }
  std::vector<double> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    double x = a.d(r), y = b.d(r);
    switch (op) {
      case '+':
        out[r] = x + y;
        break;
      case '-':
        out[r] = x - y;
        break;
      case '*':
        out[r] = x * y;
        break;
      default:
        if (y == 0.0 && !validity.empty()) validity[r] = 0;
        if (y == 0.0 && validity.empty()) {
          validity.assign(n, 1);
          validity[r] = 0;
        }
        out[r] = y == 0.0 ? 0.0 : x / y;
    }
  }
  return Column(DataType::kFloat64, std::move(out), std::move(validity));
}

}  // namespace

Expr Expr::column(std::string name) {
  Expr e;
  e.kind = Kind::kColumn;
  e.name = std::move(name);
  return e;
}

Expr Expr::lit(Value v) {
  Expr e;
  e.kind = Kind::kLiteral;
  e.literal = std::move(v);
  return e;
}

Expr Expr::call(std::string op, std::vector<Expr> args) {
  Expr e;
  e.kind = Kind::kCall;
  e.name = std::move(op);
  e.args = std::move(args);
  return e;
}

std::string Expr::describe() const {
  switch (kind) {
    case Kind::kColumn:
      return name;
    case Kind::kLiteral:
      return std::holds_alternative<std::string>(literal) ? "'" + format::render(literal) + "'"
                                                          : format::render(literal);
    case Kind::kCall:
      break;
  }
  std::ostringstream out;
  out << name << "(";
  for (std::size_t i = 0; i < args.size(); ++i) out << (i ? ", " : "") << args[i].describe();
  out << ")";
  return out.str();
}

DataType result_type(const Expr& e, const Schema& schema) {
  switch (e.kind) {
    case Expr::Kind::kColumn:
      return schema.field(schema.index_of(e.name)).type;
    case Expr::Kind::kLiteral:
      return literal_type(e.literal);
    case Expr::Kind::kCall:
      break;
  }
  std::vector<DataType> t;
  for (const auto& a : e.args) t.push_back(result_type(a, schema));
  const auto& op = e.name;
  if (op == "+" || op == "-" || op == "*" || op == "/") {
    need_args(e, 2);
    if (!is_numeric(t[0]) || !is_numeric(t[1])) throw SpecMismatch("arithmetic on strings in " + e.describe());
    if (op == "/") return DataType::kFloat64;
    return is_integral(t[0]) && is_integral(t[1]) ? DataType::kInt64 : DataType::kFloat64;
  }
  if (op == "neg") {
    need_args(e, 1);
    if (!is_numeric(t[0])) throw SpecMismatch("neg of a string in " + e.describe());
    return is_integral(t[0]) ? DataType::kInt64 : DataType::kFloat64;
  }
  if (comparison(op)) {
    need_args(e, 2);
    if (is_numeric(t[0]) != is_numeric(t[1])) throw SpecMismatch("comparison of string and number in " + e.describe());
    return DataType::kInt64;
  }
  if (op == "and" || op == "or") {
    if (e.args.size() < 2) throw SpecMismatch("'" + op + "' needs at least two arguments");
    return DataType::kInt64;
  }
  if (op == "not") {
    need_args(e, 1);
    return DataType::kInt64;
  }
  if (op == "in") {
    if (e.args.size() < 2) throw SpecMismatch("'in' needs a value and at least one literal");
    for (std::size_t i = 1; i < e.args.size(); ++i) {
      if (e.args[i].kind != Expr::Kind::kLiteral) throw SpecMismatch("'in' list must hold literals");
      if (is_numeric(t[i]) != is_numeric(t[0])) throw SpecMismatch("'in' mixes strings and numbers");
    }
    return DataType::kInt64;
  }
  if (op == "starts_with") {
    need_args(e, 2);
    if (t[0] != DataType::kString || e.args[1].kind != Expr::Kind::kLiteral || t[1] != DataType::kString)
      throw SpecMismatch("starts_with needs a string and a string literal");
    return DataType::kInt64;
  }
  if (op == "year") {
    need_args(e, 1);
    if (!is_integral(t[0])) throw SpecMismatch("year needs a date");
    return DataType::kInt64;
  }
  if (op == "if") {
    need_args(e, 3);
    if (t[1] == t[2]) return t[1];
    if (is_numeric(t[1]) && is_numeric(t[2])) {
      return is_integral(t[1]) && is_integral(t[2]) ? DataType::kInt64 : DataType::kFloat64;
    }
    throw SpecMismatch("if branches have incompatible types in " + e.describe());
  }
  throw SpecMismatch("unknown operator '" + op + "'");
}

bool may_be_null(const Expr& e, const Schema& schema) {
  switch (e.kind) {
    case Expr::Kind::kColumn:
      return schema.field(schema.index_of(e.name)).nullable;
    case Expr::Kind::kLiteral:
      return is_null(e.literal);
    case Expr::Kind::kCall:
      break;
  }
  if (comparison(e.name) || e.name == "and" || e.name == "or" || e.name == "not" || e.name == "in" ||
      e.name == "starts_with")
    return false;
  if (e.name == "/") return true;
  if (e.name == "if") return may_be_null(e.args[1], schema) || may_be_null(e.args[2], schema);
  for (const auto& a : e.args) {
    if (may_be_null(a, schema)) return true;
  }
  return false;
}

Column evaluate(const Expr& e, const RowBatch& batch) {
  const std::size_t n = batch.num_rows();
  switch (e.kind) {
    case Expr::Kind::kColumn:
      return batch.column(e.name);
    case Expr::Kind::kLiteral: {
      DataType t = literal_type(e.literal);
      std::vector<std::uint8_t> validity;
      if (is_null(e.literal)) validity.assign(n, 0);
      if (t == DataType::kFloat64) return Column(t, std::vector<double>(n, std::get<double>(e.literal)), validity);
      if (t == DataType::kString)
        return Column(t, std::vector<std::string>(n, std::get<std::string>(e.literal)), validity);
      std::int64_t v = is_null(e.literal) ? 0 : std::get<std::int64_t>(e.literal);
      return Column(t, std::vector<std::int64_t>(n, v), validity);
    }
    case Expr::Kind::kCall:
      break;
  }
  result_type(e, batch.schema());
  const auto& op = e.name;
  if (op == "+" || op == "-" || op == "*" || op == "/") return arithmetic(e, batch);
  if (op == "neg") {
    return arithmetic(Expr::call("-", {Expr::lit(std::int64_t{0}), e.args[0]}), batch);
  }
  if (auto cmp = comparison(op)) {
    Operand a(e.args[0], batch), b(e.args[1], batch);
    std::vector<std::int64_t> out(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = a.valid(r) && b.valid(r) && holds(*cmp, compare_at(a, b, r));
    return bools(std::move(out));
  }
  if (op == "and" || op == "or") {
    const bool is_and = op == "and";
    std::vector<std::int64_t> out(n, is_and ? 1 : 0);
    for (const auto& arg : e.args) {
      Operand a(arg, batch);
      for (std::size_t r = 0; r < n; ++r) {
        bool v = a.valid(r) && a.d(r) != 0.0;
        out[r] = is_and ? (out[r] && v) : (out[r] || v);
      }
    }
    return bools(std::move(out));
  }
  if (op == "not") {
    Operand a(e.args[0], batch);
    std::vector<std::int64_t> out(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = !(a.valid(r) && a.d(r) != 0.0);
    return bools(std::move(out));
  }
  if (op == "in") {
    Operand a(e.args[0], batch);
    std::vector<std::int64_t> out(n, 0);
    for (std::size_t r = 0; r < n; ++r) {
      if (!a.valid(r)) continue;
      Value v = a.value(r);
      for (std::size_t i = 1; i < e.args.size() && !out[r]; ++i)
        out[r] = !is_null(e.args[i].literal) && format::compare_values(v, e.args[i].literal) == 0;
    }
    return bools(std::move(out));
  }
  if (op == "starts_with") {
    Operand a(e.args[0], batch);
    const auto& prefix = std::get<std::string>(e.args[1].literal);
    std::vector<std::int64_t> out(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = a.valid(r) && a.s(r).starts_with(prefix);
    return bools(std::move(out));
  }
  if (op == "year") {
    Operand a(e.args[0], batch);
    std::vector<std::int64_t> out(n);
    std::vector<std::uint8_t> validity;
    for (std::size_t r = 0; r < n; ++r) {
      if (!a.valid(r)) {
        if (validity.empty()) validity.assign(n, 1);
        validity[r] = 0;
        continue;
      }
      std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{a.i(r)}}};
      out[r] = static_cast<int>(ymd.year());
    }
    return Column(DataType::kInt64, std::move(out), std::move(validity));
  }
  if (op == "if") {
    DataType t = result_type(e, batch.schema());
    Operand c(e.args[0], batch), a(e.args[1], batch), b(e.args[2], batch);
    std::vector<std::uint8_t> validity(n, 1);
    bool any_null = false;
    auto pick = [&](std::size_t r) -> const Operand& { return c.valid(r) && c.d(r) != 0.0 ? a : b; };
    for (std::size_t r = 0; r < n; ++r) {
      validity[r] = pick(r).valid(r);
      any_null = any_null || !validity[r];
    }
    if (!any_null) validity.clear();
    if (t == DataType::kString) {
      std::vector<std::string> out(n);
      for (std::size_t r = 0; r < n; ++r)
        if (pick(r).valid(r)) out[r] = std::string(pick(r).s(r));
      return Column(t, std::move(out), std::move(validity));
    }
    if (t == DataType::kFloat64) {
      std::vector<double> out(n);
      for (std::size_t r = 0; r < n; ++r) out[r] = pick(r).valid(r) ? pick(r).d(r) : 0.0;
      return Column(t, std::move(out), std::move(validity));
    }
    if (t == DataType::kDate32) {
      std::vector<std::int32_t> out(n);
      for (std::size_t r = 0; r < n; ++r) out[r] = pick(r).valid(r) ? static_cast<std::int32_t>(pick(r).i(r)) : 0;
      return Column(t, std::move(out), std::move(validity));
    }
    std::vector<std::int64_t> out(n);
    for (std::size_t r = 0; r < n; ++r) out[r] = pick(r).valid(r) ? pick(r).i(r) : 0;
    return Column(t, std::move(out), std::move(validity));
  }
  throw SpecMismatch("unknown operator '" + op + "'");
}

std::vector<std::uint32_t> select_rows(const Expr& predicate, const RowBatch& batch) {
  Column mask = evaluate(predicate, batch);
  std::vector<std::uint32_t> out;
  for (std::size_t r = 0; r < mask.size(); ++r) {
    if (mask.valid(r) && mask.float_at(r) != 0.0) out.push_back(static_cast<std::uint32_t>(r));
  }
  return out;
}

std::optional<format::PruningPredicate> extract_pruning(const Expr& predicate) {
  format::PruningPredicate out;
  std::vector<const Expr*> stack{&predicate};
  while (!stack.empty()) {
    const Expr* e = stack.back();
    stack.pop_back();
    if (e->kind != Expr::Kind::kCall) continue;
    if (e->name == "and") {
      for (const auto& a : e->args) stack.push_back(&a);
      continue;
    }
    auto cmp = comparison(e->name);
    if (!cmp || e->args.size() != 2) continue;
    const Expr& l = e->args[0];
    const Expr& r = e->args[1];
    if (l.kind == Expr::Kind::kColumn && r.kind == Expr::Kind::kLiteral && !is_null(r.literal)) {
      out.bounds.push_back({l.name, *cmp, r.literal});
    } else if (r.kind == Expr::Kind::kColumn && l.kind == Expr::Kind::kLiteral && !is_null(l.literal)) {
      out.bounds.push_back({r.name, flip(*cmp), l.literal});
    }
  }
  if (out.bounds.empty()) return std::nullopt;
  return out;
}

std::int64_t parse_date(std::string_view iso) {
  int y = 0;
  unsigned m = 0, d = 0;
  char dash1 = 0, dash2 = 0;
  std::istringstream in{std::string(iso)};
  in >> y >> dash1 >> m >> dash2 >> d;
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!in || dash1 != '-' || dash2 != '-' || !ymd.ok()) throw SpecMismatch("bad date '" + std::string(iso) + "'");
  return std::chrono::sys_days{ymd}.time_since_epoch().count();
}

std::string format_date(std::int64_t days) {
  std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace cirrus::exec
