#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fedplan/catalog.hpp"
#include "fedplan/errors.hpp"
#include "fedplan/expr.hpp"
#include "fedplan/json_util.hpp"

namespace fedplan {

enum class TransformKind { Filter, Project, Aggregate, Join, Window, JsonParse, Expression, Union, Recursive };

inline constexpr TransformKind kAllTransformKinds[] = {
    TransformKind::Filter, TransformKind::Project,   TransformKind::Aggregate,  TransformKind::Join,
    TransformKind::Window, TransformKind::JsonParse, TransformKind::Expression, TransformKind::Union,
    TransformKind::Recursive};

inline std::string_view to_string(TransformKind k) {
  switch (k) {
    case TransformKind::Filter: return "Filter";
    case TransformKind::Project: return "Project";
    case TransformKind::Aggregate: return "Aggregate";
    case TransformKind::Join: return "Join";
    case TransformKind::Window: return "Window";
    case TransformKind::JsonParse: return "JsonParse";
    case TransformKind::Expression: return "Expression";
    case TransformKind::Union: return "Union";
    case TransformKind::Recursive: return "Recursive";
  }
  return "?";
}

inline TransformKind parse_transform_kind(std::string_view s) {
  for (auto k : kAllTransformKinds)
    if (to_string(k) == s) return k;
  throw ValidationError("unknown transform kind '" + std::string(s) + "'");
}

struct Dataset {
  std::string id;
  std::string site;
  Schema columns;
  std::uint64_t size_bytes = 0;
  std::uint64_t row_count = 0;
  std::optional<std::set<std::string>> allowed_sites;  // residency constraint

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Expression text together with its parsed form.
struct ExprText {
  std::string text;
  Expr parsed;

  static ExprText of(std::string text) {
    ExprText e;
    e.parsed = parse_expression(text);
    e.text = std::move(text);
    return e;
  }
  friend bool operator==(const ExprText& a, const ExprText& b) { return a.text == b.text; }
};

struct NamedExpr {
  ExprText expr;
  std::string alias;  // empty: a bare column reference keeps its name

  friend bool operator==(const NamedExpr&, const NamedExpr&) = default;
};

struct SortKey {
  std::string column;
  bool descending = false;

  friend bool operator==(const SortKey&, const SortKey&) = default;
};

struct FilterParams {
  ExprText predicate;
  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

struct ProjectParams {
  std::vector<std::string> columns;
  friend bool operator==(const ProjectParams&, const ProjectParams&) = default;
};

struct AggregateParams {
  std::vector<std::string> group_by;
  std::vector<NamedExpr> aggregates;
  friend bool operator==(const AggregateParams&, const AggregateParams&) = default;
};

enum class JoinType { Inner, Left, Right, Full };

inline std::string_view to_string(JoinType t) {
  switch (t) {
    case JoinType::Inner: return "inner";
    case JoinType::Left: return "left";
    case JoinType::Right: return "right";
    case JoinType::Full: return "full";
  }
  return "?";
}

/// `keys[k][i]` is the k-th key column of input i; input i joins input i-1 on
/// equality of every key.
struct JoinParams {
  std::vector<std::vector<std::string>> keys;
  JoinType type = JoinType::Inner;
  friend bool operator==(const JoinParams&, const JoinParams&) = default;
};

struct WindowParams {
  ExprText function;
  std::string alias;
  std::vector<std::string> partition_by;
  std::vector<SortKey> order_by;
  friend bool operator==(const WindowParams&, const WindowParams&) = default;
};

struct JsonExtraction {
  std::string path;
  std::string alias;
  ScalarType type = ScalarType::String;
  friend bool operator==(const JsonExtraction&, const JsonExtraction&) = default;
};

struct JsonParseParams {
  std::string column;
  std::vector<JsonExtraction> extract;
  friend bool operator==(const JsonParseParams&, const JsonParseParams&) = default;
};

struct ExpressionParams {
  std::vector<NamedExpr> select;
  friend bool operator==(const ExpressionParams&, const ExpressionParams&) = default;
};

struct UnionParams {
  bool all = false;
  friend bool operator==(const UnionParams&, const UnionParams&) = default;
};

/// Hierarchical expansion: rows matching `root_predicate` seed the
/// recursion, children attach via parent_column = id_column.
struct RecursiveParams {
  std::string id_column;
  std::string parent_column;
  ExprText root_predicate;
  std::string depth_alias = "depth";
  friend bool operator==(const RecursiveParams&, const RecursiveParams&) = default;
};

using TransformParams = std::variant<FilterParams, ProjectParams, AggregateParams, JoinParams, WindowParams,
                                     JsonParseParams, ExpressionParams, UnionParams, RecursiveParams>;

struct Transform {
  std::string id;
  TransformKind kind = TransformKind::Filter;
  std::vector<std::string> inputs;
  TransformParams params;
  std::optional<double> selectivity;  // per-transform override of the configured factor

  friend bool operator==(const Transform&, const Transform&) = default;
};

/// Every catalog function a transform's expressions call.
inline std::set<std::string> referenced_functions(const Transform& t) {
  std::set<std::string> out;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FilterParams>) {
          collect_functions(p.predicate.parsed, out);
        } else if constexpr (std::is_same_v<P, AggregateParams>) {
          for (const auto& a : p.aggregates) collect_functions(a.expr.parsed, out);
        } else if constexpr (std::is_same_v<P, WindowParams>) {
          collect_functions(p.function.parsed, out);
        } else if constexpr (std::is_same_v<P, JsonParseParams>) {
          if (!p.extract.empty()) out.insert("JSON_EXTRACT");
        } else if constexpr (std::is_same_v<P, ExpressionParams>) {
          for (const auto& s : p.select) collect_functions(s.expr.parsed, out);
        } else if constexpr (std::is_same_v<P, RecursiveParams>) {
          collect_functions(p.root_predicate.parsed, out);
        }
      },
      t.params);
  return out;
}

namespace detail {

inline bool valid_id(std::string_view id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

inline TransformKind kind_of(const TransformParams& p) {
  static constexpr TransformKind kinds[] = {TransformKind::Filter,    TransformKind::Project,    TransformKind::Aggregate,
                                            TransformKind::Join,      TransformKind::Window,     TransformKind::JsonParse,
                                            TransformKind::Expression, TransformKind::Union,     TransformKind::Recursive};
  return kinds[p.index()];
}

}  // namespace detail

/// Validated, immutable DAG of datasets and transforms.
class Pipeline {
 public:
  Pipeline() = default;

  Pipeline(std::vector<Dataset> datasets, std::vector<Transform> transforms, std::vector<std::string> sinks)
      : datasets_(std::move(datasets)), transforms_(std::move(transforms)), sinks_(std::move(sinks)) {
    validate();
  }

  const std::vector<Dataset>& datasets() const { return datasets_; }
  const std::vector<Transform>& transforms() const { return transforms_; }
  const std::vector<std::string>& sinks() const { return sinks_; }
  /// Transforms from which no sink is reachable.
  const std::vector<std::string>& unreachable() const { return unreachable_; }

  const Dataset* find_dataset(std::string_view id) const {
    auto it = dataset_index_.find(std::string(id));
    return it == dataset_index_.end() ? nullptr : &datasets_[it->second];
  }
  const Transform* find_transform(std::string_view id) const {
    auto it = transform_index_.find(std::string(id));
    return it == transform_index_.end() ? nullptr : &transforms_[it->second];
  }
  bool is_sink(std::string_view id) const { return std::find(sinks_.begin(), sinks_.end(), id) != sinks_.end(); }

  /// Transform ids consuming `id`, ascending.
  std::vector<std::string> consumers(std::string_view id) const {
    std::vector<std::string> out;
    for (const auto& t : transforms_)
      if (std::find(t.inputs.begin(), t.inputs.end(), id) != t.inputs.end()) out.push_back(t.id);
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const Pipeline& a, const Pipeline& b) {
    return a.datasets_ == b.datasets_ && a.transforms_ == b.transforms_ && a.sinks_ == b.sinks_;
  }

 private:
  void validate() {
    for (std::size_t i = 0; i < datasets_.size(); ++i) {
      const Dataset& d = datasets_[i];
      if (!detail::valid_id(d.id)) throw ValidationError("invalid dataset id '" + d.id + "'");
      if (!dataset_index_.emplace(d.id, i).second) throw ValidationError("duplicate id '" + d.id + "'");
      if (d.site.empty()) throw ValidationError("dataset '" + d.id + "' has no site");
      if ((d.size_bytes == 0) != (d.row_count == 0))
        throw ValidationError("dataset '" + d.id + "': size_bytes and row_count must both be zero or both non-zero");
      if (d.allowed_sites && !d.allowed_sites->count(d.site))
        throw ValidationError("dataset '" + d.id + "': allowed_sites must contain its own site '" + d.site + "'");
      if (d.columns.columns.empty()) throw ValidationError("dataset '" + d.id + "' has no columns");
      std::set<std::string> names;
      for (const auto& c : d.columns.columns)
        if (c.name.empty() || !names.insert(c.name).second)
          throw ValidationError("dataset '" + d.id + "': duplicate or empty column name '" + c.name + "'");
    }
    for (std::size_t i = 0; i < transforms_.size(); ++i) {
      const Transform& t = transforms_[i];
      if (!detail::valid_id(t.id)) throw ValidationError("invalid transform id '" + t.id + "'");
      if (dataset_index_.count(t.id) || !transform_index_.emplace(t.id, i).second)
        throw ValidationError("duplicate id '" + t.id + "'");
      if (detail::kind_of(t.params) != t.kind)
        throw ValidationError("transform '" + t.id + "': params do not match kind " + std::string(to_string(t.kind)));
    }
    for (const auto& t : transforms_) {
      bool multi = t.kind == TransformKind::Join || t.kind == TransformKind::Union;
      if (t.inputs.empty() || (multi && t.inputs.size() < 2) || (!multi && t.inputs.size() != 1))
        throw ValidationError("arity violation: " + std::string(to_string(t.kind)) + " '" + t.id + "' has " +
                              std::to_string(t.inputs.size()) + " input(s)");
      std::set<std::string> seen;
      for (const auto& in : t.inputs) {
        if (!dataset_index_.count(in) && !transform_index_.count(in))
          throw ValidationError("unknown reference '" + in + "' in inputs of '" + t.id + "'");
        if (!seen.insert(in).second) throw ValidationError("transform '" + t.id + "' lists input '" + in + "' twice");
      }
      if (t.selectivity && (!std::isfinite(*t.selectivity) || *t.selectivity < 0))
        throw ValidationError("transform '" + t.id + "': selectivity must be finite and non-negative");
    }
    if (sinks_.empty()) throw ValidationError("pipeline has no sinks");
    std::set<std::string> sink_set;
    for (const auto& s : sinks_) {
      if (!transform_index_.count(s)) throw ValidationError("unknown reference '" + s + "' in sinks");
      if (!sink_set.insert(s).second) throw ValidationError("sink '" + s + "' listed twice");
    }
    check_acyclic();
    // reachability backwards from sinks
    std::set<std::string> reached;
    std::vector<std::string> stack(sinks_.begin(), sinks_.end());
    while (!stack.empty()) {
      std::string id = stack.back();
      stack.pop_back();
      if (!reached.insert(id).second) continue;
      if (const Transform* t = find_transform(id))
        for (const auto& in : t->inputs) stack.push_back(in);
    }
    for (const auto& t : transforms_)
      if (!reached.count(t.id)) unreachable_.push_back(t.id);
    std::sort(unreachable_.begin(), unreachable_.end());
  }

  void check_acyclic() const {
    enum class Mark { None, Active, Done };
    std::map<std::string, Mark> mark;
    // iterative DFS over transform -> transform input edges
    for (const auto& root : transforms_) {
      if (mark[root.id] != Mark::None) continue;
      std::vector<std::pair<std::string, std::size_t>> stack{{root.id, 0}};
      mark[root.id] = Mark::Active;
      while (!stack.empty()) {
        auto& [id, next] = stack.back();
        const Transform* t = find_transform(id);
        if (next < t->inputs.size()) {
          const std::string& in = t->inputs[next++];
          if (!find_transform(in)) continue;
          Mark& m = mark[in];
          if (m == Mark::Active) throw ValidationError("cyclic graph: '" + in + "' depends on itself");
          if (m == Mark::None) {
            m = Mark::Active;
            stack.emplace_back(in, 0);
          }
        } else {
          mark[id] = Mark::Done;
          stack.pop_back();
        }
      }
    }
  }

  std::vector<Dataset> datasets_;
  std::vector<Transform> transforms_;
  std::vector<std::string> sinks_;
  std::vector<std::string> unreachable_;
  std::map<std::string, std::size_t> dataset_index_;
  std::map<std::string, std::size_t> transform_index_;
};

/// Kahn's algorithm; among ready transforms the smallest id goes first.
inline std::vector<std::string> topo_order(const Pipeline& p) {
  std::map<std::string, std::size_t> pending;
  std::map<std::string, std::vector<std::string>> consumers;
  for (const auto& t : p.transforms()) {
    std::size_t n = 0;
    for (const auto& in : t.inputs) {
      if (p.find_transform(in)) {
        ++n;
        consumers[in].push_back(t.id);
      }
    }
    pending[t.id] = n;
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, n] : pending)
    if (n == 0) ready.push(id);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    for (const auto& c : consumers[id])
      if (--pending[c] == 0) ready.push(c);
  }
  if (order.size() != p.transforms().size()) throw ValidationError("cyclic graph");
  return order;
}

namespace detail {

inline std::vector<NamedExpr> parse_named_exprs(const json& j, const char* key, const std::string& where) {
  const json& arr = j.at(key);
  if (!arr.is_array()) throw ValidationError(where + ": '" + key + "' must be an array");
  std::vector<NamedExpr> out;
  for (const auto& item : arr) {
    check_keys(item, where + "." + key, {"expr"}, {"as"});
    NamedExpr ne;
    ne.expr = ExprText::of(get_string(item, "expr", where));
    if (item.contains("as")) ne.alias = get_string(item, "as", where);
    out.push_back(std::move(ne));
  }
  return out;
}

inline ExprText parse_expr_field(const json& j, const char* key, const std::string& where) {
  std::string text = get_string(j, key, where);
  try {
    return ExprText::of(text);
  } catch (const ParseError& e) {
    throw ParseError(where + "." + key + ": " + e.what());
  }
}

inline TransformParams parse_params(TransformKind kind, const json& j, const std::string& where,
                                    std::optional<double>& selectivity) {
  auto sel_check = [&](std::initializer_list<std::string_view> required, std::initializer_list<std::string_view> optional) {
    std::vector<std::string_view> opt(optional);
    if (kind != TransformKind::Union) opt.push_back("selectivity");
    expect_object(j, where);
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = std::find(opt.begin(), opt.end(), it.key()) != opt.end();
      for (auto k : required) known = known || k == it.key();
      if (!known) throw ValidationError(where + ": unknown key '" + it.key() + "'");
    }
    for (auto k : required)
      if (!j.contains(std::string(k))) throw ValidationError(where + ": missing key '" + std::string(k) + "'");
    if (j.contains("selectivity")) selectivity = get_number(j, "selectivity", where);
  };
  switch (kind) {
    case TransformKind::Filter:
      sel_check({"predicate"}, {});
      return FilterParams{parse_expr_field(j, "predicate", where)};
    case TransformKind::Project:
      sel_check({"columns"}, {});
      return ProjectParams{get_string_list(j, "columns", where)};
    case TransformKind::Aggregate: {
      sel_check({"aggregates"}, {"group_by"});
      AggregateParams p;
      if (j.contains("group_by")) p.group_by = get_string_list(j, "group_by", where);
      p.aggregates = parse_named_exprs(j, "aggregates", where);
      return p;
    }
    case TransformKind::Join: {
      sel_check({"keys"}, {"type"});
      JoinParams p;
      const json& keys = j.at("keys");
      if (!keys.is_array()) throw ValidationError(where + ": 'keys' must be an array of column lists");
      for (const auto& k : keys) {
        if (!k.is_array()) throw ValidationError(where + ": 'keys' must be an array of column lists");
        std::vector<std::string> cols;
        for (const auto& c : k) {
          if (!c.is_string()) throw ValidationError(where + ": join key columns must be strings");
          cols.push_back(c.get<std::string>());
        }
        p.keys.push_back(std::move(cols));
      }
      if (j.contains("type")) {
        std::string t = get_string(j, "type", where);
        if (t == "inner") p.type = JoinType::Inner;
        else if (t == "left") p.type = JoinType::Left;
        else if (t == "right") p.type = JoinType::Right;
        else if (t == "full") p.type = JoinType::Full;
        else throw ValidationError(where + ": unknown join type '" + t + "'");
      }
      return p;
    }
    case TransformKind::Window: {
      sel_check({"function", "as"}, {"partition_by", "order_by"});
      WindowParams p;
      p.function = parse_expr_field(j, "function", where);
      p.alias = get_string(j, "as", where);
      if (j.contains("partition_by")) p.partition_by = get_string_list(j, "partition_by", where);
      if (j.contains("order_by")) {
        for (auto s : get_string_list(j, "order_by", where)) {
          SortKey k;
          auto ends_with = [&](std::string_view suffix) {
            if (s.size() <= suffix.size()) return false;
            std::string tail = s.substr(s.size() - suffix.size());
            for (auto& c : tail) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
            return tail == suffix;
          };
          if (ends_with(" DESC")) {
            k.descending = true;
            s.resize(s.size() - 5);
          } else if (ends_with(" ASC")) {
            s.resize(s.size() - 4);
          }
          k.column = s;
          p.order_by.push_back(std::move(k));
        }
      }
      return p;
    }
    case TransformKind::JsonParse: {
      sel_check({"column", "extract"}, {});
      JsonParseParams p;
      p.column = get_string(j, "column", where);
      const json& ex = j.at("extract");
      if (!ex.is_array() || ex.empty()) throw ValidationError(where + ": 'extract' must be a non-empty array");
      for (const auto& e : ex) {
        check_keys(e, where + ".extract", {"path", "as", "type"});
        p.extract.push_back({get_string(e, "path", where), get_string(e, "as", where),
                             parse_scalar_type(get_string(e, "type", where))});
      }
      return p;
    }
    case TransformKind::Expression:
      sel_check({"select"}, {});
      return ExpressionParams{parse_named_exprs(j, "select", where)};
    case TransformKind::Union: {
      sel_check({}, {"all"});
      UnionParams p;
      if (j.contains("all")) p.all = get_bool(j, "all", where);
      return p;
    }
    case TransformKind::Recursive: {
      sel_check({"id_column", "parent_column", "root_predicate"}, {"depth_as"});
      RecursiveParams p;
      p.id_column = get_string(j, "id_column", where);
      p.parent_column = get_string(j, "parent_column", where);
      p.root_predicate = parse_expr_field(j, "root_predicate", where);
      if (j.contains("depth_as")) p.depth_alias = get_string(j, "depth_as", where);
      return p;
    }
  }
  throw ValidationError(where + ": unsupported kind");
}

inline json named_exprs_to_json(const std::vector<NamedExpr>& items) {
  json arr = json::array();
  for (const auto& n : items) {
    json o{{"expr", n.expr.text}};
    if (!n.alias.empty()) o["as"] = n.alias;
    arr.push_back(std::move(o));
  }
  return arr;
}

inline json params_to_json(const Transform& t) {
  json j = json::object();
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FilterParams>) {
          j["predicate"] = p.predicate.text;
        } else if constexpr (std::is_same_v<P, ProjectParams>) {
          j["columns"] = p.columns;
        } else if constexpr (std::is_same_v<P, AggregateParams>) {
          j["group_by"] = p.group_by;
          j["aggregates"] = named_exprs_to_json(p.aggregates);
        } else if constexpr (std::is_same_v<P, JoinParams>) {
          j["keys"] = p.keys;
          j["type"] = std::string(to_string(p.type));
        } else if constexpr (std::is_same_v<P, WindowParams>) {
          j["function"] = p.function.text;
          j["as"] = p.alias;
          j["partition_by"] = p.partition_by;
          json order = json::array();
          for (const auto& k : p.order_by) order.push_back(k.column + (k.descending ? " DESC" : ""));
          j["order_by"] = order;
        } else if constexpr (std::is_same_v<P, JsonParseParams>) {
          j["column"] = p.column;
          json ex = json::array();
          for (const auto& e : p.extract) ex.push_back({{"path", e.path}, {"as", e.alias}, {"type", to_string(e.type)}});
          j["extract"] = ex;
        } else if constexpr (std::is_same_v<P, ExpressionParams>) {
          j["select"] = named_exprs_to_json(p.select);
        } else if constexpr (std::is_same_v<P, UnionParams>) {
          j["all"] = p.all;
        } else if constexpr (std::is_same_v<P, RecursiveParams>) {
          j["id_column"] = p.id_column;
          j["parent_column"] = p.parent_column;
          j["root_predicate"] = p.root_predicate.text;
          j["depth_as"] = p.depth_alias;
        }
      },
      t.params);
  if (t.selectivity) j["selectivity"] = *t.selectivity;
  return j;
}

}  // namespace detail

/// Builds a Pipeline from a parsed JSON document. Structural checks only;
/// `parse_pipeline` additionally type-checks through schema inference.
inline Pipeline pipeline_from_json(const nlohmann::json& doc) {
  using namespace detail;
  check_keys(doc, "pipeline", {"datasets", "transforms", "sinks"});
  if (!doc.at("datasets").is_array() || !doc.at("transforms").is_array())
    throw ValidationError("pipeline: 'datasets' and 'transforms' must be arrays");
  std::vector<Dataset> datasets;
  for (const auto& dj : doc.at("datasets")) {
    std::string where = "dataset";
    if (dj.is_object() && dj.contains("id") && dj["id"].is_string()) where += " '" + dj["id"].get<std::string>() + "'";
    check_keys(dj, where, {"id", "site", "columns", "size_bytes", "row_count"}, {"allowed_sites"});
    Dataset d;
    d.id = get_string(dj, "id", where);
    d.site = get_string(dj, "site", where);
    if (!dj.at("columns").is_array()) throw ValidationError(where + ": 'columns' must be an array");
    for (const auto& cj : dj.at("columns")) {
      check_keys(cj, where + ".columns", {"name", "type"});
      d.columns.columns.push_back({get_string(cj, "name", where), parse_scalar_type(get_string(cj, "type", where))});
    }
    d.size_bytes = get_u64(dj, "size_bytes", where);
    d.row_count = get_u64(dj, "row_count", where);
    if (dj.contains("allowed_sites")) {
      auto list = get_string_list(dj, "allowed_sites", where);
      d.allowed_sites = std::set<std::string>(list.begin(), list.end());
    }
    datasets.push_back(std::move(d));
  }
  std::vector<Transform> transforms;
  for (const auto& tj : doc.at("transforms")) {
    std::string where = "transform";
    if (tj.is_object() && tj.contains("id") && tj["id"].is_string()) where += " '" + tj["id"].get<std::string>() + "'";
    check_keys(tj, where, {"id", "kind", "inputs", "params"});
    Transform t;
    t.id = get_string(tj, "id", where);
    t.kind = parse_transform_kind(get_string(tj, "kind", where));
    t.inputs = get_string_list(tj, "inputs", where);
    t.params = parse_params(t.kind, tj.at("params"), where + ".params", t.selectivity);
    transforms.push_back(std::move(t));
  }
  return Pipeline(std::move(datasets), std::move(transforms), get_string_list(doc, "sinks", "pipeline"));
}

inline nlohmann::json pipeline_to_json(const Pipeline& p) {
  using detail::json;
  json datasets = json::array();
  for (const auto& d : p.datasets()) {
    json cols = json::array();
    for (const auto& c : d.columns.columns) cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
    json dj{{"id", d.id}, {"site", d.site}, {"columns", cols}, {"size_bytes", d.size_bytes}, {"row_count", d.row_count}};
    if (d.allowed_sites) dj["allowed_sites"] = std::vector<std::string>(d.allowed_sites->begin(), d.allowed_sites->end());
    datasets.push_back(std::move(dj));
  }
  json transforms = json::array();
  for (const auto& t : p.transforms())
    transforms.push_back(
        {{"id", t.id}, {"kind", to_string(t.kind)}, {"inputs", t.inputs}, {"params", detail::params_to_json(t)}});
  return json{{"datasets", datasets}, {"transforms", transforms}, {"sinks", p.sinks()}};
}

inline std::string serialize_pipeline(const Pipeline& p) { return pipeline_to_json(p).dump(2) + "\n"; }

}  // namespace fedplan
