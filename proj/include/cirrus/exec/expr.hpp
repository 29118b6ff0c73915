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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cirrus/format/base_table.hpp"
#include "cirrus/format/row_batch.hpp"

namespace cirrus::exec {

using format::Column;
using format::DataType;
using format::RowBatch;
using format::Schema;
using format::Value;
using format::is_null;

/// Scalar expression tree. Calls name an operator:
///   arithmetic  + - * /          (/ always yields float64)
///   comparison  == != < <= > >=  (yield int64 0/1; false when a side is null)
///   logic       and or not       (null counts as false)
///   if(c, a, b), in(x, lit...), starts_with(s, lit), year(date), neg(x)
/// Dates are day numbers and compare with integers.
struct Expr {
  enum class Kind { kColumn, kLiteral, kCall };

  Kind kind = Kind::kLiteral;
  std::string name;  // column or operator
  Value literal;
  std::vector<Expr> args;

  static Expr column(std::string name);
  static Expr lit(Value v);
  static Expr call(std::string op, std::vector<Expr> args);

  std::string describe() const;
  bool operator==(const Expr&) const = default;
};

/// Checks column references and operator arity against `schema` and returns
/// the result type. Throws UnknownColumn or SpecMismatch.
DataType result_type(const Expr& expr, const Schema& schema);

/// Whether the result of `expr` may be null.
bool may_be_null(const Expr& expr, const Schema& schema);

Column evaluate(const Expr& expr, const RowBatch& batch);

/// Row indices where `predicate` evaluates to a non-zero value.
std::vector<std::uint32_t> select_rows(const Expr& predicate, const RowBatch& batch);

/// The `column op literal` conjuncts of `predicate`, usable against chunk
/// statistics. Other conjuncts are ignored, so the result is implied by the
/// predicate but weaker.
std::optional<format::PruningPredicate> extract_pruning(const Expr& predicate);

/// Days since 1970-01-01 for an ISO yyyy-mm-dd date.
std::int64_t parse_date(std::string_view iso);
std::string format_date(std::int64_t days);

}  // namespace cirrus::exec
