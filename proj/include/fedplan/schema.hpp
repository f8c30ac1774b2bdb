#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>

#include "fedplan/ir.hpp"

namespace fedplan {

/// Output schema of every dataset and transform, keyed by node id.
using SchemaMap = std::map<std::string, Schema>;

namespace detail {

inline const Column& require_column(const Schema& s, const std::string& name, const std::string& where) {
  const Column* c = s.find(name);
  if (!c) throw ValidationError(where + ": unknown column '" + name + "'");
  return *c;
}

inline void add_unique(Schema& out, Column c, const std::string& where) {
  if (out.find(c.name)) throw ValidationError(where + ": duplicate output column '" + c.name + "'");
  out.columns.push_back(std::move(c));
}

inline ScalarType checked(const Expr& e, const Schema& s, ExprContext ctx, const std::string& where) {
  try {
    return check_expression(e, s, ctx);
  } catch (const ValidationError& err) {
    throw ValidationError(where + ": " + err.what());
  }
}

inline std::string output_name(const NamedExpr& ne, const std::string& where) {
  if (!ne.alias.empty()) return ne.alias;
  if (ne.expr.parsed.kind == Expr::Kind::Column) return ne.expr.parsed.text;
  throw ValidationError(where + ": expression '" + ne.expr.text + "' needs an alias");
}

inline Schema infer_one(const Transform& t, const std::vector<const Schema*>& in) {
  const std::string where = std::string(to_string(t.kind)) + " '" + t.id + "'";
  Schema out;
  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, FilterParams>) {
          ScalarType ty = checked(p.predicate.parsed, *in[0], ExprContext::Scalar, where);
          if (ty != ScalarType::Bool) throw ValidationError(where + ": type mismatch: predicate is not boolean");
          out = *in[0];
        } else if constexpr (std::is_same_v<P, ProjectParams>) {
          if (p.columns.empty()) throw ValidationError(where + ": empty column list");
          for (const auto& c : p.columns) add_unique(out, require_column(*in[0], c, where), where);
        } else if constexpr (std::is_same_v<P, AggregateParams>) {
          if (p.aggregates.empty()) throw ValidationError(where + ": no aggregates");
          for (const auto& k : p.group_by) add_unique(out, require_column(*in[0], k, where), where);
          for (const auto& a : p.aggregates) {
            const Expr& e = a.expr.parsed;
            const FunctionSignature* sig =
                e.kind == Expr::Kind::Call ? LogicalFunctionCatalog::standard().find(e.text) : nullptr;
            if (!sig || sig->cls != FunctionClass::Aggregate)
              throw ValidationError(where + ": '" + a.expr.text + "' is not an aggregate call");
            if (a.alias.empty()) throw ValidationError(where + ": aggregate '" + a.expr.text + "' needs an alias");
            add_unique(out, {a.alias, checked(e, *in[0], ExprContext::AggregateItem, where)}, where);
          }
        } else if constexpr (std::is_same_v<P, JoinParams>) {
          if (p.keys.empty()) throw ValidationError(where + ": join needs at least one key");
          for (const auto& key : p.keys) {
            if (key.size() != in.size())
              throw ValidationError(where + ": each join key must name one column per input");
            for (std::size_t i = 1; i < key.size(); ++i) {
              ScalarType a = require_column(*in[i - 1], key[i - 1], where).type;
              ScalarType b = require_column(*in[i], key[i], where).type;
              if (!(a == b || (is_numeric(a) && is_numeric(b))) || a == ScalarType::Json)
                throw ValidationError(where + ": type mismatch in join keys '" + key[i - 1] + "' and '" + key[i] + "'");
            }
          }
          std::map<std::string, int> seen;
          for (const Schema* s : in)
            for (const auto& c : s->columns) ++seen[c.name];
          for (std::size_t i = 0; i < in.size(); ++i)
            for (const auto& c : in[i]->columns)
              add_unique(out, {seen[c.name] > 1 ? t.inputs[i] + "." + c.name : c.name, c.type}, where);
        } else if constexpr (std::is_same_v<P, WindowParams>) {
          const Expr& e = p.function.parsed;
          if (e.kind != Expr::Kind::Call) throw ValidationError(where + ": window function must be a call");
          for (const auto& c : p.partition_by) require_column(*in[0], c, where);
          for (const auto& k : p.order_by) require_column(*in[0], k.column, where);
          ScalarType ty = checked(e, *in[0], ExprContext::WindowItem, where);
          out = *in[0];
          add_unique(out, {p.alias, ty}, where);
        } else if constexpr (std::is_same_v<P, JsonParseParams>) {
          const Column& src = require_column(*in[0], p.column, where);
          if (src.type != ScalarType::Json)
            throw ValidationError(where + ": JsonParse applied to non-json column '" + p.column + "' (" +
                                  std::string(to_string(src.type)) + ")");
          out = *in[0];
          for (const auto& e : p.extract) add_unique(out, {e.alias, e.type}, where);
        } else if constexpr (std::is_same_v<P, ExpressionParams>) {
          if (p.select.empty()) throw ValidationError(where + ": empty select list");
          for (const auto& s : p.select)
            add_unique(out, {output_name(s, where), checked(s.expr.parsed, *in[0], ExprContext::Scalar, where)}, where);
        } else if constexpr (std::is_same_v<P, UnionParams>) {
          for (std::size_t i = 1; i < in.size(); ++i)
            if (!(*in[i] == *in[0]))
              throw ValidationError(where + ": union inputs must have identical column names and types");
          out = *in[0];
        } else if constexpr (std::is_same_v<P, RecursiveParams>) {
          ScalarType id = require_column(*in[0], p.id_column, where).type;
          ScalarType parent = require_column(*in[0], p.parent_column, where).type;
          if (!(id == parent || (is_numeric(id) && is_numeric(parent))))
            throw ValidationError(where + ": type mismatch between id and parent columns");
          if (checked(p.root_predicate.parsed, *in[0], ExprContext::Scalar, where) != ScalarType::Bool)
            throw ValidationError(where + ": type mismatch: root predicate is not boolean");
          out = *in[0];
          add_unique(out, {p.depth_alias, ScalarType::Int64}, where);
        }
      },
      t.params);
  return out;
}

}  // namespace detail

/// Annotates every node with its output schema; throws ValidationError on
/// unknown columns, type mismatches and misuse of catalog functions.
inline SchemaMap infer_schemas(const Pipeline& p) {
  SchemaMap schemas;
  for (const auto& d : p.datasets()) schemas[d.id] = d.columns;
  for (const auto& id : topo_order(p)) {
    const Transform& t = *p.find_transform(id);
    std::vector<const Schema*> in;
    for (const auto& i : t.inputs) in.push_back(&schemas.at(i));
    schemas[id] = detail::infer_one(t, in);
  }
  return schemas;
}

/// Parses and fully validates a pipeline description document.
inline Pipeline parse_pipeline(std::string_view text) {
  Pipeline p = pipeline_from_json(detail::parse_json_document(text, "pipeline"));
  infer_schemas(p);
  return p;
}

}  // namespace fedplan
