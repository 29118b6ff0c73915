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

#include "cirrus/datagen/tables.hpp"

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cirrus/errors.hpp"
#include "cirrus/store/random.hpp"
#include "json.hpp"

namespace cirrus::datagen {
namespace {

using format::Column;
using format::DataType;
using format::Field;
using json = nlohmann::json;
using store::StreamRng;

constexpr std::int32_t kStartDate = 8035;  // 1992-01-01
constexpr std::int32_t kOrderDateSpan = 2405;
constexpr std::int32_t kCutoffDate = 9298;  // 1995-06-17

const std::array<const char*, 7> kShipModes = {"AIR", "FOB", "MAIL", "RAIL", "REG AIR", "SHIP", "TRUCK"};
const std::array<const char*, 4> kInstructions = {"COLLECT COD", "DELIVER IN PERSON", "NONE", "TAKE BACK RETURN"};
const std::array<const char*, 5> kPriorities = {"1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"};
const std::array<const char*, 5> kSegments = {"AUTOMOBILE", "BUILDING", "FURNITURE", "HOUSEHOLD", "MACHINERY"};
const std::array<const char*, 25> kNations = {
    "ALGERIA", "ARGENTINA", "BRAZIL",  "CANADA",         "EGYPT",        "ETHIOPIA", "FRANCE",
    "GERMANY", "INDIA",     "INDONESIA", "IRAN",         "IRAQ",         "JAPAN",    "JORDAN",
    "KENYA",   "MOROCCO",   "MOZAMBIQUE", "PERU",        "CHINA",        "ROMANIA",  "SAUDI ARABIA",
    "VIETNAM", "RUSSIA",    "UNITED KINGDOM", "UNITED STATES"};
const std::array<std::int64_t, 25> kNationRegions = {0, 1, 1, 1, 4, 0, 3, 3, 2, 2, 4, 4, 2,
                                                     4, 0, 0, 0, 1, 2, 3, 4, 2, 3, 3, 1};

StreamRng row_rng(const DatagenOptions& o, std::string_view table, std::uint64_t row) {
  return StreamRng(store::hash_combine(store::hash_combine(o.seed, store::fnv1a(table)), row));
}

std::uint64_t order_count(std::uint64_t scale) { return scale == 0 ? 0 : std::max<std::uint64_t>(1, scale / 4); }
std::uint64_t customer_count(std::uint64_t scale) { return scale == 0 ? 0 : std::max<std::uint64_t>(1, scale / 40); }

std::int32_t order_date(const DatagenOptions& o, std::int64_t orderkey) {
  auto rng = row_rng(o, "orders.date", static_cast<std::uint64_t>(orderkey));
  return kStartDate + static_cast<std::int32_t>(rng() % kOrderDateSpan);
}

double cents(std::uint64_t v) { return static_cast<double>(v) / 100.0; }

RowBatch lineitem(const DatagenOptions& o, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t n = hi - lo;
  const std::uint64_t orders = order_count(o.scale);
  const std::uint64_t parts = std::max<std::uint64_t>(1, o.scale / 5);
  const std::uint64_t suppliers = std::max<std::uint64_t>(1, o.scale / 100);
  std::vector<std::int64_t> orderkey(n), partkey(n), suppkey(n), linenumber(n);
  std::vector<double> quantity(n), price(n), discount(n), tax(n);
  std::vector<std::string> returnflag(n), linestatus(n), shipmode(n), instruct(n);
  std::vector<std::int32_t> shipdate(n), commitdate(n), receiptdate(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint64_t i = lo + k;
    auto rng = row_rng(o, "lineitem", i);
    // Orders own contiguous runs of lineitems, as in the real benchmark.
    const std::uint64_t order = i * orders / o.scale;
    const std::uint64_t first = (order * o.scale + orders - 1) / orders;
    orderkey[k] = static_cast<std::int64_t>(order + 1);
    linenumber[k] = static_cast<std::int64_t>(i - first + 1);
    partkey[k] = static_cast<std::int64_t>(1 + rng() % parts);
    suppkey[k] = static_cast<std::int64_t>(1 + rng() % suppliers);
    const std::uint64_t q = 1 + rng() % 50;
    quantity[k] = static_cast<double>(q);
    price[k] = cents(q * (90000 + static_cast<std::uint64_t>(partkey[k]) % 20001));
    discount[k] = cents(rng() % 11);
    tax[k] = cents(rng() % 9);
    const std::int32_t od = order_date(o, orderkey[k]);
    shipdate[k] = od + 1 + static_cast<std::int32_t>(rng() % 121);
    commitdate[k] = od + 30 + static_cast<std::int32_t>(rng() % 61);
    receiptdate[k] = shipdate[k] + 1 + static_cast<std::int32_t>(rng() % 30);
    returnflag[k] = receiptdate[k] <= kCutoffDate ? (rng() % 2 ? "R" : "A") : "N";
    linestatus[k] = shipdate[k] > kCutoffDate ? "O" : "F";
    shipmode[k] = kShipModes[rng() % kShipModes.size()];
    instruct[k] = kInstructions[rng() % kInstructions.size()];
  }
  std::vector<Column> cols;
  cols.emplace_back(DataType::kInt64, std::move(orderkey));
  cols.emplace_back(DataType::kInt64, std::move(partkey));
  cols.emplace_back(DataType::kInt64, std::move(suppkey));
  cols.emplace_back(DataType::kInt64, std::move(linenumber));
  cols.emplace_back(DataType::kFloat64, std::move(quantity));
  cols.emplace_back(DataType::kFloat64, std::move(price));
  cols.emplace_back(DataType::kFloat64, std::move(discount));
  cols.emplace_back(DataType::kFloat64, std::move(tax));
  cols.emplace_back(DataType::kString, std::move(returnflag));
  cols.emplace_back(DataType::kString, std::move(linestatus));
  cols.emplace_back(DataType::kDate32, std::move(shipdate));
  cols.emplace_back(DataType::kDate32, std::move(commitdate));
  cols.emplace_back(DataType::kDate32, std::move(receiptdate));
  cols.emplace_back(DataType::kString, std::move(instruct));
  cols.emplace_back(DataType::kString, std::move(shipmode));
  return RowBatch(table_schema("lineitem"), std::move(cols));
}

RowBatch orders(const DatagenOptions& o, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t n = hi - lo;
  const std::uint64_t customers = customer_count(o.scale);
  std::vector<std::int64_t> orderkey(n), custkey(n), shippriority(n);
  std::vector<std::string> status(n), priority(n);
  std::vector<double> total(n);
  std::vector<std::int32_t> date(n);
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint64_t i = lo + k;
    auto rng = row_rng(o, "orders", i);
    orderkey[k] = static_cast<std::int64_t>(i + 1);
    custkey[k] = static_cast<std::int64_t>(1 + rng() % customers);
    date[k] = order_date(o, orderkey[k]);
    status[k] = date[k] + 121 <= kCutoffDate ? "F" : (date[k] > kCutoffDate ? "O" : "P");
    total[k] = cents(100000 + rng() % 50000000);
    priority[k] = kPriorities[rng() % kPriorities.size()];
    shippriority[k] = 0;
  }
  std::vector<Column> cols;
  cols.emplace_back(DataType::kInt64, std::move(orderkey));
  cols.emplace_back(DataType::kInt64, std::move(custkey));
  cols.emplace_back(DataType::kString, std::move(status));
  cols.emplace_back(DataType::kFloat64, std::move(total));
  cols.emplace_back(DataType::kDate32, std::move(date));
  cols.emplace_back(DataType::kString, std::move(priority));
  cols.emplace_back(DataType::kInt64, std::move(shippriority));
  return RowBatch(table_schema("orders"), std::move(cols));
}

RowBatch customer(const DatagenOptions& o, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t n = hi - lo;
  std::vector<std::int64_t> custkey(n), nationkey(n);
  std::vector<std::string> name(n), segment(n);
  std::vector<double> acctbal(n);
  std::vector<std::uint8_t> valid(n, 1);
  bool any_null = false;
  for (std::uint64_t k = 0; k < n; ++k) {
    const std::uint64_t i = lo + k;
    auto rng = row_rng(o, "customer", i);
    custkey[k] = static_cast<std::int64_t>(i + 1);
    char buf[32];
    std::snprintf(buf, sizeof buf, "Customer#%09llu", static_cast<unsigned long long>(i + 1));
    name[k] = buf;
    nationkey[k] = static_cast<std::int64_t>(rng() % kNations.size());
    // About one balance in twenty is unknown.
    if (rng() % 20 == 0) {
      valid[k] = 0;
      any_null = true;
    } else {
      acctbal[k] = cents(rng() % 1099999) - 999.99;
    }
    segment[k] = kSegments[rng() % kSegments.size()];
  }
  if (!any_null) valid.clear();
  std::vector<Column> cols;
  cols.emplace_back(DataType::kInt64, std::move(custkey));
  cols.emplace_back(DataType::kString, std::move(name));
  cols.emplace_back(DataType::kInt64, std::move(nationkey));
  cols.emplace_back(DataType::kFloat64, std::move(acctbal), std::move(valid));
  cols.emplace_back(DataType::kString, std::move(segment));
  return RowBatch(table_schema("customer"), std::move(cols));
}

RowBatch nation(std::uint64_t lo, std::uint64_t hi) {
  std::vector<std::int64_t> key, region;
  std::vector<std::string> name;
  for (std::uint64_t i = lo; i < hi; ++i) {
    key.push_back(static_cast<std::int64_t>(i));
    name.emplace_back(kNations[i]);
    region.push_back(kNationRegions[i]);
  }
  std::vector<Column> cols;
  cols.emplace_back(DataType::kInt64, std::move(key));
  cols.emplace_back(DataType::kString, std::move(name));
  cols.emplace_back(DataType::kInt64, std::move(region));
  return RowBatch(table_schema("nation"), std::move(cols));
}

json schema_json(const Schema& s) {
  json out = json::array();
  for (const auto& f : s.fields())
    out.push_back({{"name", f.name}, {"type", std::string(format::to_string(f.type))}, {"nullable", f.nullable}});
  return out;
}

Schema schema_from(const json& j) {
  std::vector<Field> fields;
  for (const auto& f : j)
    fields.push_back({f.at("name").get<std::string>(), format::data_type_from_string(f.at("type").get<std::string>()),
                      f.value("nullable", false)});
  return Schema(std::move(fields));
}

std::filesystem::path object_path(const std::filesystem::path& dir, const store::ObjectKey& key) {
  return dir / "objects" / key.key;
}

}  // namespace

const std::vector<std::string>& table_names() {
  static const std::vector<std::string> names = {"lineitem", "orders", "customer", "nation"};
  return names;
}

Schema table_schema(const std::string& table) {
  using T = DataType;
  if (table == "lineitem")
    return Schema({{"l_orderkey", T::kInt64},
                   {"l_partkey", T::kInt64},
                   {"l_suppkey", T::kInt64},
                   {"l_linenumber", T::kInt64},
                   {"l_quantity", T::kFloat64},
                   {"l_extendedprice", T::kFloat64},
                   {"l_discount", T::kFloat64},
                   {"l_tax", T::kFloat64},
                   {"l_returnflag", T::kString},
                   {"l_linestatus", T::kString},
                   {"l_shipdate", T::kDate32},
                   {"l_commitdate", T::kDate32},
                   {"l_receiptdate", T::kDate32},
                   {"l_shipinstruct", T::kString},
                   {"l_shipmode", T::kString}});
  if (table == "orders")
    return Schema({{"o_orderkey", T::kInt64},
                   {"o_custkey", T::kInt64},
                   {"o_orderstatus", T::kString},
                   {"o_totalprice", T::kFloat64},
                   {"o_orderdate", T::kDate32},
                   {"o_orderpriority", T::kString},
                   {"o_shippriority", T::kInt64}});
  if (table == "customer")
    return Schema({{"c_custkey", T::kInt64},
                   {"c_name", T::kString},
                   {"c_nationkey", T::kInt64},
                   {"c_acctbal", T::kFloat64, true},
                   {"c_mktsegment", T::kString}});
  if (table == "nation")
    return Schema({{"n_nationkey", T::kInt64}, {"n_name", T::kString}, {"n_regionkey", T::kInt64}});
  throw std::out_of_range("unknown table '" + table + "'");
}

std::uint64_t table_rows(const std::string& table, std::uint64_t scale) {
  if (table == "lineitem") return scale;
  if (table == "orders") return order_count(scale);
  if (table == "customer") return customer_count(scale);
  if (table == "nation") return scale == 0 ? 0 : kNations.size();
  throw std::out_of_range("unknown table '" + table + "'");
}

RowBatch generate_rows(const std::string& table, const DatagenOptions& options, std::uint64_t lo, std::uint64_t hi) {
  hi = std::min(hi, table_rows(table, options.scale));
  lo = std::min(lo, hi);
  if (table == "lineitem") return lineitem(options, lo, hi);
  if (table == "orders") return orders(options, lo, hi);
  if (table == "customer") return customer(options, lo, hi);
  return nation(lo, hi);
}

RowBatch generate_table(const std::string& table, const DatagenOptions& options) {
  return generate_rows(table, options, 0, table_rows(table, options.scale));
}

const TableInfo& Catalog::table(const std::string& name) const {
  auto it = tables.find(name);
  if (it == tables.end()) throw std::out_of_range("table '" + name + "' is not in the catalog");
  return it->second;
}

void GeneratedData::preload(store::ObjectStore& store) const {
  for (const auto& [key, payload] : objects) store.preload(key, payload);
}

store::ObjectKey table_object_key(const std::string& table, std::size_t part) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", part);
  return store::ObjectKey("tables/" + table + "/part-" + buf);
}

GeneratedData generate(const DatagenOptions& options) {
  if (options.object_size < 4096) throw ConfigError("object size must be at least 4096 bytes");
  GeneratedData out;
  out.catalog.options = options;
  format::BaseTableWriteOptions write;
  write.row_group_rows = std::max<std::size_t>(1, options.row_group_rows);

  for (const auto& name : table_names()) {
    TableInfo info{name, table_schema(name), table_rows(name, options.scale), {}};
    auto emit = [&](store::Bytes bytes) {
      auto key = table_object_key(name, info.objects.size());
      info.objects.push_back(key);
      out.objects.emplace_back(key, store::make_payload(std::move(bytes)));
    };
    if (info.rows == 0) {
      emit(format::write_base_table(RowBatch::empty(info.schema), write));
    } else {
      // Size objects from an encoded sample, then halve any that overshoot.
      const std::uint64_t sample_rows = std::min<std::uint64_t>(info.rows, 4096);
      const double per_row =
          static_cast<double>(format::write_base_table(generate_rows(name, options, 0, sample_rows), write).size()) /
          static_cast<double>(sample_rows);
      std::uint64_t target = std::max<std::uint64_t>(
          1, static_cast<std::uint64_t>(0.9 * static_cast<double>(options.object_size) / per_row));
      std::uint64_t lo = 0;
      while (lo < info.rows) {
        std::uint64_t hi = std::min(info.rows, lo + target);
        for (;;) {
          auto bytes = format::write_base_table(generate_rows(name, options, lo, hi), write);
          if (bytes.size() <= options.object_size || hi - lo == 1) {
            emit(std::move(bytes));
            break;
          }
          hi = lo + (hi - lo) / 2;
          target = hi - lo;
        }
        lo = hi;
      }
    }
    out.catalog.tables.emplace(name, std::move(info));
  }
  return out;
}

std::string catalog_to_json(const Catalog& catalog) {
  json j;
  j["format_version"] = 1;
  j["scale"] = catalog.options.scale;
  j["object_size"] = catalog.options.object_size;
  j["seed"] = catalog.options.seed;
  j["row_group_rows"] = catalog.options.row_group_rows;
  json tables = json::object();
  for (const auto& [name, t] : catalog.tables) {
    json objects = json::array();
    for (const auto& k : t.objects) objects.push_back(k.key);
    tables[name] = {{"rows", t.rows}, {"schema", schema_json(t.schema)}, {"objects", objects}};
  }
  j["tables"] = std::move(tables);
  return j.dump(2);
}

Catalog catalog_from_json(const std::string& text) {
  try {
    json j = json::parse(text);
    if (j.at("format_version").get<int>() != 1) throw ConfigError("unsupported catalog format_version");
    Catalog c;
    c.options.scale = j.at("scale").get<std::uint64_t>();
    c.options.object_size = j.at("object_size").get<std::uint64_t>();
    c.options.seed = j.at("seed").get<std::uint64_t>();
    c.options.row_group_rows = j.value("row_group_rows", c.options.row_group_rows);
    for (const auto& [name, t] : j.at("tables").items()) {
      TableInfo info{name, schema_from(t.at("schema")), t.at("rows").get<std::uint64_t>(), {}};
      for (const auto& k : t.at("objects")) info.objects.emplace_back(k.get<std::string>());
      c.tables.emplace(name, std::move(info));
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad catalog: ") + e.what());
  }
}

void write_directory(const GeneratedData& data, const std::filesystem::path& dir) {
  for (const auto& [key, payload] : data.objects) {
    auto path = object_path(dir, key);
    std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    f.write(reinterpret_cast<const char*>(payload->data()), static_cast<std::streamsize>(payload->size()));
    if (!f) throw std::runtime_error("cannot write " + path.string());
  }
  std::ofstream f(dir / "catalog.json");
  f << catalog_to_json(data.catalog) << '\n';
  if (!f) throw std::runtime_error("cannot write " + (dir / "catalog.json").string());
}

GeneratedData read_directory(const std::filesystem::path& dir) {
  std::ifstream cf(dir / "catalog.json");
  if (!cf) throw ConfigError("no catalog.json in " + dir.string());
  std::stringstream text;
  text << cf.rdbuf();
  GeneratedData out;
  out.catalog = catalog_from_json(text.str());
  for (const auto& [name, t] : out.catalog.tables) {
    for (const auto& key : t.objects) {
      std::ifstream f(object_path(dir, key), std::ios::binary);
      if (!f) throw ConfigError("missing object " + object_path(dir, key).string());
      store::Bytes bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      out.objects.emplace_back(key, store::make_payload(std::move(bytes)));
    }
  }
  return out;
}

}  // namespace cirrus::datagen
