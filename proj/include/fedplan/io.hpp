#pragma once

#include <string>

#include "fedplan/json_util.hpp"
#include "fedplan/plan.hpp"
#include "fedplan/simulator.hpp"

namespace fedplan {

using nlohmann::json;

namespace detail {

inline json size_to_json(const SizeStats& s) { return {{"size_bytes", s.size_bytes}, {"row_count", s.row_count}}; }

inline SizeStats size_from_json(const json& j, const std::string& where) {
  check_keys(j, where, {"size_bytes", "row_count"}, {});
  return {get_u64(j, "size_bytes", where), get_u64(j, "row_count", where)};
}

inline json cost_to_json(const TotalCost& c) {
  return {{"compute", c.compute.to_string()},
          {"storage", c.storage.to_string()},
          {"transfer", c.transfer.to_string()},
          {"total", c.total.to_string()}};
}

inline TotalCost cost_from_json(const json& j, const std::string& where) {
  check_keys(j, where, {"compute", "storage", "transfer", "total"}, {});
  TotalCost c{Money::parse(get_decimal_string(j, "compute", where)), Money::parse(get_decimal_string(j, "storage", where)),
              Money::parse(get_decimal_string(j, "transfer", where)), Money::parse(get_decimal_string(j, "total", where))};
  if (!(c.total == c.compute + c.storage + c.transfer))
    throw ValidationError(where + ": total is not the sum of compute, storage and transfer");
  return c;
}

}  // namespace detail

inline json plan_to_json(const Plan& plan) {
  using namespace detail;
  json steps = json::array();
  for (const auto& s : plan.steps) {
    json access = json::array();
    for (const auto& a : s.access)
      access.push_back({{"input", a.input}, {"from_site", a.from_site}, {"mode", std::string(to_string(a.mode))}});
    steps.push_back({{"transform_id", s.transform_id},
                     {"assigned_site", s.assigned_site},
                     {"access_modes", access},
                     {"materialized", s.materialized},
                     {"input_volume", size_to_json(s.input_volume)},
                     {"output", size_to_json(s.output)}});
  }
  json edges = json::array();
  for (const auto& e : plan.transfer_edges)
    edges.push_back({{"id", e.id()},
                     {"input", e.input},
                     {"from", e.from},
                     {"to", e.to},
                     {"mode", std::string(to_string(e.mode))},
                     {"size_bytes", e.size.size_bytes},
                     {"row_count", e.size.row_count}});
  json sql = json::array();
  for (const auto& g : plan.sql_per_group)
    sql.push_back({{"group", g.group}, {"site", g.site}, {"dialect", g.dialect}, {"output", g.output}, {"sql", g.sql}});
  return {{"strategy", std::string(to_string(plan.strategy))},
          {"steps", steps},
          {"transfer_edges", edges},
          {"sql_per_group", sql},
          {"estimated", cost_to_json(plan.estimated)}};
}

inline Plan plan_from_json(const json& j) {
  using namespace detail;
  check_keys(j, "plan", {"strategy", "steps", "transfer_edges", "sql_per_group", "estimated"}, {});
  Plan plan;
  plan.strategy = parse_strategy(get_string(j, "strategy", "plan"));
  if (!j.at("steps").is_array()) throw ValidationError("plan.steps must be an array");
  for (const auto& sj : j.at("steps")) {
    const std::string where = "plan step";
    check_keys(sj, where, {"transform_id", "assigned_site", "access_modes", "materialized", "input_volume", "output"}, {});
    PlanStep s;
    s.transform_id = get_string(sj, "transform_id", where);
    s.assigned_site = get_string(sj, "assigned_site", where);
    if (!sj.at("access_modes").is_array()) throw ValidationError(where + ": access_modes must be an array");
    for (const auto& aj : sj.at("access_modes")) {
      check_keys(aj, where + " access", {"input", "from_site", "mode"}, {});
      s.access.push_back({get_string(aj, "input", where), get_string(aj, "from_site", where),
                          parse_access_mode(get_string(aj, "mode", where))});
    }
    s.materialized = get_bool(sj, "materialized", where);
    s.input_volume = size_from_json(sj.at("input_volume"), where + " input_volume");
    s.output = size_from_json(sj.at("output"), where + " output");
    plan.steps.push_back(std::move(s));
  }
  if (!j.at("transfer_edges").is_array()) throw ValidationError("plan.transfer_edges must be an array");
  for (const auto& ej : j.at("transfer_edges")) {
    const std::string where = "plan transfer edge";
    check_keys(ej, where, {"id", "input", "from", "to", "mode", "size_bytes", "row_count"}, {});
    TransferEdge e{get_string(ej, "input", where), get_string(ej, "from", where), get_string(ej, "to", where),
                   parse_access_mode(get_string(ej, "mode", where)),
                   {get_u64(ej, "size_bytes", where), get_u64(ej, "row_count", where)}};
    if (e.id() != get_string(ej, "id", where)) throw ValidationError(where + ": id does not match its fields");
    plan.transfer_edges.push_back(std::move(e));
  }
  if (!j.at("sql_per_group").is_array()) throw ValidationError("plan.sql_per_group must be an array");
  for (const auto& gj : j.at("sql_per_group")) {
    const std::string where = "plan sql group";
    check_keys(gj, where, {"group", "site", "dialect", "output", "sql"}, {});
    plan.sql_per_group.push_back({get_string(gj, "group", where), get_string(gj, "site", where),
                                  get_string(gj, "dialect", where), get_string(gj, "output", where),
                                  get_string(gj, "sql", where)});
  }
  plan.estimated = cost_from_json(j.at("estimated"), "plan.estimated");
  return plan;
}

inline json report_to_json(const SimulationReport& r) {
  using namespace detail;
  json per_site = json::object();
  for (const auto& [s, v] : r.per_site_runtime) per_site[s] = v;
  json events = json::array();
  for (const auto& e : r.events)
    events.push_back({{"time", e.time}, {"kind", std::string(to_string(e.kind))}, {"subject", e.subject}, {"where", e.where}});
  json lineage = json::object();
  for (const auto& [t, entries] : r.lineage) {
    json arr = json::array();
    for (const auto& e : entries)
      arr.push_back({{"input", e.input},
                     {"from_site", e.from_site},
                     {"mode", std::string(to_string(e.mode))},
                     {"upstream_sites", e.upstream_sites}});
    lineage[t] = arr;
  }
  return {{"strategy", std::string(to_string(r.strategy))},
          {"total_runtime_s", r.total_runtime},
          {"cross_cloud_volume_bytes", r.cross_cloud_volume},
          {"per_site_runtime_s", per_site},
          {"cost", cost_to_json(r.cost)},
          {"events", events},
          {"lineage", lineage}};
}

inline SimulationReport report_from_json(const json& j) {
  using namespace detail;
  const std::string where = "report";
  check_keys(j, where,
             {"strategy", "total_runtime_s", "cross_cloud_volume_bytes", "per_site_runtime_s", "cost", "events", "lineage"},
             {});
  SimulationReport r;
  r.strategy = parse_strategy(get_string(j, "strategy", where));
  r.total_runtime = get_number(j, "total_runtime_s", where);
  r.cross_cloud_volume = get_u64(j, "cross_cloud_volume_bytes", where);
  expect_object(j.at("per_site_runtime_s"), where + ".per_site_runtime_s");
  for (auto it = j.at("per_site_runtime_s").begin(); it != j.at("per_site_runtime_s").end(); ++it) {
    if (!it.value().is_number()) throw ValidationError(where + ": per-site runtimes must be numbers");
    r.per_site_runtime[it.key()] = it.value().get<double>();
  }
  r.cost = cost_from_json(j.at("cost"), where + ".cost");
  if (!j.at("events").is_array()) throw ValidationError(where + ": events must be an array");
  for (const auto& ej : j.at("events")) {
    check_keys(ej, where + " event", {"time", "kind", "subject", "where"}, {});
    r.events.push_back({get_number(ej, "time", where), parse_sim_event_kind(get_string(ej, "kind", where)),
                        get_string(ej, "subject", where), get_string(ej, "where", where)});
  }
  expect_object(j.at("lineage"), where + ".lineage");
  for (auto it = j.at("lineage").begin(); it != j.at("lineage").end(); ++it) {
    auto& entries = r.lineage[it.key()];
    if (!it.value().is_array()) throw ValidationError(where + ": lineage entries must be arrays");
    for (const auto& lj : it.value()) {
      check_keys(lj, where + " lineage", {"input", "from_site", "mode", "upstream_sites"}, {});
      entries.push_back({get_string(lj, "input", where), get_string(lj, "from_site", where),
                         parse_access_mode(get_string(lj, "mode", where)), get_string_list(lj, "upstream_sites", where)});
    }
  }
  return r;
}

/// Flat `metric,value` rows for spreadsheet use.
inline std::string report_to_csv(const SimulationReport& r) {
  std::string out = "metric,value\n";
  out += "strategy," + std::string(to_string(r.strategy)) + "\n";
  out += "total_runtime_s," + detail::fixed(r.total_runtime, 3) + "\n";
  out += "total_runtime_min," + detail::fixed(r.total_runtime / 60.0, 3) + "\n";
  out += "cross_cloud_volume_bytes," + std::to_string(r.cross_cloud_volume) + "\n";
  out += "cross_cloud_volume_gb," + detail::fixed(r.cross_cloud_volume / kBytesPerGB, 3) + "\n";
  for (const auto& [s, v] : r.per_site_runtime) out += "runtime_s." + s + "," + detail::fixed(v, 3) + "\n";
  out += "cost.compute," + r.cost.compute.to_string() + "\n";
  out += "cost.storage," + r.cost.storage.to_string() + "\n";
  out += "cost.transfer," + r.cost.transfer.to_string() + "\n";
  out += "cost.total," + r.cost.total.to_string() + "\n";
  return out;
}

inline std::string report_to_text(const SimulationReport& r) {
  std::string out;
  out += "strategy            " + std::string(to_string(r.strategy)) + "\n";
  out += "total runtime       " + detail::fixed(r.total_runtime, 3) + " s (" + detail::fixed(r.total_runtime / 60.0, 1) +
         " min)\n";
  out += "cross-cloud volume  " + detail::fixed(r.cross_cloud_volume / kBytesPerGB, 3) + " GB\n";
  for (const auto& [s, v] : r.per_site_runtime) out += "runtime on " + s + "  " + detail::fixed(v, 3) + " s\n";
  out += "cost                " + r.cost.total.to_string() + " (compute " + r.cost.compute.to_string() + ", storage " +
         r.cost.storage.to_string() + ", transfer " + r.cost.transfer.to_string() + ")\n";
  return out;
}

inline json table_to_json(const ImprovementTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = {{"metric", r.metric}, {"unit", r.unit}, {"pre", r.pre}, {"post", r.post}};
    row["improvement_pct"] = r.improvement ? json(*r.improvement) : json(nullptr);
    rows.push_back(row);
  }
  return {{"rows", rows}};
}

}  // namespace fedplan
