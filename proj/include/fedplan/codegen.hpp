#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fedplan/dialect.hpp"
#include "fedplan/plan.hpp"
#include "fedplan/schema.hpp"

namespace fedplan {

namespace detail {

// Unquoted names are case-folded by engines, so only lower-case ones stay bare.
inline bool is_plain_identifier(std::string_view s) {
  if (s.empty() || !(std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '_';
  });
}

inline std::string table_name(std::string_view id, char quote) {
  return is_plain_identifier(id) ? std::string(id) : quote_identifier(id, quote);
}

inline std::string indent(const std::string& body, const std::string& pad) {
  std::string out = pad;
  for (char c : body) {
    out += c;
    if (c == '\n') out += pad;
  }
  return out;
}

inline std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ", " : "") + items[i];
  return out;
}

class SqlLowering {
 public:
  SqlLowering(const SchemaMap& schemas, const DialectSpec& d, std::map<std::string, std::string> qualifiers)
      : schemas_(schemas), d_(d), qualifiers_(std::move(qualifiers)) {
    style_.identifier_quote = d.identifier_quote;
    style_.function_name = [this](const std::string& n) { return rewrite_function(n, d_); };
  }

  std::string lower(const std::vector<const Transform*>& group) {
    if (group.empty()) throw CodegenError("cannot lower an empty group");
    for (const Transform* t : group) {
      if (!d_.supports(t->kind))
        throw CodegenError(std::string(to_string(t->kind)) + " '" + t->id + "' is not supported by dialect '" + d_.id + "'");
      in_group_.insert(t->id);
    }
    bool recursive = false;
    std::string ctes;
    for (std::size_t i = 0; i < group.size(); ++i) {
      const Transform& t = *group[i];
      recursive = recursive || t.kind == TransformKind::Recursive;
      ctes += (i ? ",\n" : "") + std::string("  ") + table_name(t.id, q()) + " AS (\n" + indent(body(t), "    ") + "\n  )";
    }
    const Transform& last = *group.back();
    std::vector<std::string> cols;
    for (const auto& c : schema(last.id).columns) cols.push_back(col(c.name));
    return std::string(recursive ? "WITH RECURSIVE\n" : "WITH\n") + ctes + "\nSELECT " + join_list(cols) + " FROM " +
           table_name(last.id, q()) + ";\n";
  }

 private:
  char q() const { return d_.identifier_quote; }
  std::string col(std::string_view name) const { return quote_identifier(name, q()); }
  std::string expr(const ExprText& e) const { return render_expression(e.parsed, style_); }
  const Schema& schema(const std::string& id) const {
    auto it = schemas_.find(id);
    if (it == schemas_.end()) throw CodegenError("no schema for '" + id + "'");
    return it->second;
  }

  std::string source(const std::string& id) const {
    if (!in_group_.count(id)) {
      auto it = qualifiers_.find(id);
      if (it != qualifiers_.end()) return table_name(it->second, q()) + "." + table_name(id, q());
    }
    return table_name(id, q());
  }

  std::string named(const NamedExpr& n) const {
    std::string s = expr(n.expr);
    if (!n.alias.empty()) s += " AS " + col(n.alias);
    return s;
  }

  std::string body(const Transform& t) const {
    const std::string from = t.inputs.empty() ? std::string() : source(t.inputs[0]);
    return std::visit(
        [&](const auto& p) -> std::string {
          using P = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<P, FilterParams>) {
            return "SELECT *\nFROM " + from + "\nWHERE " + expr(p.predicate);
          } else if constexpr (std::is_same_v<P, ProjectParams>) {
            std::vector<std::string> cols;
            for (const auto& c : p.columns) cols.push_back(col(c));
            return "SELECT " + join_list(cols) + "\nFROM " + from;
          } else if constexpr (std::is_same_v<P, AggregateParams>) {
            std::vector<std::string> keys, items;
            for (const auto& k : p.group_by) keys.push_back(col(k));
            items = keys;
            for (const auto& a : p.aggregates) items.push_back(named(a));
            std::string s = "SELECT " + join_list(items) + "\nFROM " + from;
            if (!keys.empty()) s += "\nGROUP BY " + join_list(keys);
            return s;
          } else if constexpr (std::is_same_v<P, JoinParams>) {
            return join_body(t, p);
          } else if constexpr (std::is_same_v<P, WindowParams>) {
            std::vector<std::string> over;
            if (!p.partition_by.empty()) {
              std::vector<std::string> cols;
              for (const auto& c : p.partition_by) cols.push_back(col(c));
              over.push_back("PARTITION BY " + join_list(cols));
            }
            if (!p.order_by.empty()) {
              std::vector<std::string> keys;
              for (const auto& k : p.order_by) keys.push_back(col(k.column) + (k.descending ? " DESC" : ""));
              over.push_back("ORDER BY " + join_list(keys));
            }
            std::string window = expr(p.function) + " OVER (";
            for (std::size_t i = 0; i < over.size(); ++i) window += (i ? " " : "") + over[i];
            return "SELECT *, " + window + ") AS " + col(p.alias) + "\nFROM " + from;
          } else if constexpr (std::is_same_v<P, JsonParseParams>) {
            std::vector<std::string> items{"*"};
            const std::string fn = rewrite_function("JSON_EXTRACT", d_);
            for (const auto& e : p.extract) {
              Expr path;
              path.kind = Expr::Kind::Literal;
              path.literal_type = ScalarType::String;
              path.text = e.path;
              items.push_back(fn + "(" + col(p.column) + ", " + render_expression(path, style_) + ") AS " + col(e.alias));
            }
            return "SELECT " + join_list(items) + "\nFROM " + from;
          } else if constexpr (std::is_same_v<P, ExpressionParams>) {
            std::vector<std::string> items;
            for (const auto& s : p.select) items.push_back(named(s));
            return "SELECT " + join_list(items) + "\nFROM " + from;
          } else if constexpr (std::is_same_v<P, UnionParams>) {
            std::string s;
            for (std::size_t i = 0; i < t.inputs.size(); ++i)
              s += (i ? (p.all ? "\nUNION ALL\n" : "\nUNION\n") : "") + ("SELECT * FROM " + source(t.inputs[i]));
            return s;
          } else if constexpr (std::is_same_v<P, RecursiveParams>) {
            const std::string self = table_name(t.id, q());
            return "SELECT *, 0 AS " + col(p.depth_alias) + "\nFROM " + from + "\nWHERE " + expr(p.root_predicate) +
                   "\nUNION ALL\nSELECT c.*, r." + col(p.depth_alias) + " + 1 AS " + col(p.depth_alias) + "\nFROM " +
                   from + " AS c\nJOIN " + self + " AS r ON c." + col(p.parent_column) + " = r." + col(p.id_column);
          }
        },
        t.params);
  }

  std::string join_body(const Transform& t, const JoinParams& p) const {
    std::map<std::string, int> seen;
    for (const auto& in : t.inputs)
      for (const auto& c : schema(in).columns) ++seen[c.name];
    std::vector<std::string> items;
    for (std::size_t i = 0; i < t.inputs.size(); ++i) {
      const std::string alias = "j" + std::to_string(i);
      for (const auto& c : schema(t.inputs[i]).columns) {
        std::string item = alias + "." + col(c.name);
        if (seen[c.name] > 1) item += " AS " + col(t.inputs[i] + "." + c.name);
        items.push_back(item);
      }
    }
    std::string kw;
    switch (p.type) {
      case JoinType::Inner: kw = "JOIN"; break;
      case JoinType::Left: kw = "LEFT JOIN"; break;
      case JoinType::Right: kw = "RIGHT JOIN"; break;
      case JoinType::Full: kw = "FULL JOIN"; break;
    }
    std::string s = "SELECT " + join_list(items) + "\nFROM " + source(t.inputs[0]) + " AS j0";
    for (std::size_t i = 1; i < t.inputs.size(); ++i) {
      s += "\n" + kw + " " + source(t.inputs[i]) + " AS j" + std::to_string(i) + " ON ";
      for (std::size_t k = 0; k < p.keys.size(); ++k) {
        if (k) s += " AND ";
        s += "j" + std::to_string(i - 1) + "." + col(p.keys[k][i - 1]) + " = j" + std::to_string(i) + "." +
             col(p.keys[k][i]);
      }
    }
    return s;
  }

  const SchemaMap& schemas_;
  const DialectSpec& d_;
  std::map<std::string, std::string> qualifiers_;  // remote input id -> site id
  RenderStyle style_;
  std::set<std::string> in_group_;
};

}  // namespace detail

/// Lowers a pushed subgraph (transforms in topological order) into one SQL
/// statement: a chain of CTEs, one per transform, and a final SELECT of the
/// last transform's columns. Throws CodegenError on anything `d` cannot
/// express.
inline std::string lower_subgraph(const std::vector<const Transform*>& group, const SchemaMap& schemas,
                                  const DialectSpec& d) {
  return detail::SqlLowering(schemas, d, {}).lower(group);
}

/// As lower_subgraph, with inputs in `remote_inputs` (input id -> site id)
/// read through the host's federation layer as `site.input`.
inline std::string lower_federated(const std::vector<const Transform*>& group, const SchemaMap& schemas,
                                   const Site& host, const std::map<std::string, std::string>& remote_inputs,
                                   const DialectSpec& d) {
  if (host.is_central() || !host.capabilities.supports_federation)
    throw CodegenError("site '" + host.id + "' does not support federation");
  return detail::SqlLowering(schemas, d, remote_inputs).lower(group);
}

/// Maximal connected set of steps on one database site linked by local
/// reads. Outputs are the members read from elsewhere or that are sinks.
struct PushedGroup {
  std::size_t site = 0;
  std::vector<std::size_t> members;  // topo positions, ascending
  std::vector<std::size_t> outputs;
};

inline std::vector<PushedGroup> pushed_groups(const Plan& plan, const PlanContext& ctx) {
  Assignment a = assignment_of(plan, ctx);
  const std::size_t n = ctx.transform_count();
  std::vector<std::size_t> parent(n);
  for (std::size_t k = 0; k < n; ++k) parent[k] = k;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t k = 0; k < n; ++k) {
    if (ctx.site(a[k].site).is_central()) continue;
    for (auto node : ctx.inputs(k)) {
      if (ctx.is_dataset(node)) continue;
      std::size_t u = node - ctx.dataset_count();
      if (a[u].site == a[k].site) {
        std::size_t ru = find(u), rk = find(k);
        if (ru != rk) parent[std::max(ru, rk)] = std::min(ru, rk);
      }
    }
  }
  std::map<std::size_t, std::size_t> index;  // root -> group position
  std::vector<PushedGroup> groups;
  for (std::size_t k = 0; k < n; ++k) {
    if (ctx.site(a[k].site).is_central()) continue;
    std::size_t r = find(k);
    auto [it, fresh] = index.emplace(r, groups.size());
    if (fresh) groups.push_back({a[k].site, {}, {}});
    PushedGroup& g = groups[it->second];
    g.members.push_back(k);
    if (plan.steps[k].materialized) g.outputs.push_back(k);
  }
  return groups;
}

/// Fills plan.sql_per_group with one statement per pushed-group output,
/// lowered for the owning site's dialect. Federated reads become
/// site-qualified table references.
inline void attach_sql(Plan& plan, const PlanContext& ctx) {
  plan.sql_per_group.clear();
  auto groups = pushed_groups(plan, ctx);
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const PushedGroup& g = groups[gi];
    const Site& host = ctx.site(g.site);
    const DialectSpec& d = ctx.topology().dialect_of(host);
    std::set<std::size_t> members(g.members.begin(), g.members.end());
    for (std::size_t out : g.outputs) {
      // the output and its ancestors inside the group, in topo order
      std::set<std::size_t> need{out};
      for (auto it = g.members.rbegin(); it != g.members.rend(); ++it) {
        if (!need.count(*it)) continue;
        for (auto node : ctx.inputs(*it))
          if (!ctx.is_dataset(node) && members.count(node - ctx.dataset_count())) need.insert(node - ctx.dataset_count());
      }
      std::vector<const Transform*> group;
      std::map<std::string, std::string> remote;
      for (std::size_t k : need) {
        group.push_back(&ctx.transform(k));
        for (const auto& acc : plan.steps[k].access)
          if (acc.mode == AccessMode::FederatedScan) remote[acc.input] = acc.from_site;
      }
      SqlGroup sg;
      sg.group = "g" + std::to_string(gi);
      sg.site = host.id;
      sg.dialect = d.id;
      sg.output = ctx.order()[out];
      sg.sql = remote.empty() ? lower_subgraph(group, ctx.schemas(), d)
                              : lower_federated(group, ctx.schemas(), host, remote, d);
      plan.sql_per_group.push_back(std::move(sg));
    }
  }
}

}  // namespace fedplan
