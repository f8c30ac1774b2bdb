#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fedplan/plan.hpp"

namespace fedplan {

enum class SimEventKind { TransferStart, TransferEnd, ExecStart, ExecEnd };

inline std::string_view to_string(SimEventKind k) {
  switch (k) {
    case SimEventKind::TransferStart: return "TransferStart";
    case SimEventKind::TransferEnd: return "TransferEnd";
    case SimEventKind::ExecStart: return "ExecStart";
    case SimEventKind::ExecEnd: return "ExecEnd";
  }
  return "?";
}

inline SimEventKind parse_sim_event_kind(std::string_view s) {
  for (auto k : {SimEventKind::TransferStart, SimEventKind::TransferEnd, SimEventKind::ExecStart, SimEventKind::ExecEnd})
    if (to_string(k) == s) return k;
  throw ValidationError("unknown event kind '" + std::string(s) + "'");
}

struct SimEvent {
  double time = 0;
  SimEventKind kind = SimEventKind::ExecStart;
  std::string subject;  // transform id or transfer edge id
  std::string where;    // site id, or "src->dst" for transfers

  friend bool operator==(const SimEvent&, const SimEvent&) = default;
};

/// How one input of a transform reached it.
struct LineageEntry {
  std::string input;
  std::string from_site;
  AccessMode mode = AccessMode::Local;
  std::vector<std::string> upstream_sites;  // every site the input's data passed through, sorted

  friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

struct SimulationReport {
  Strategy strategy = Strategy::Centralized;
  double total_runtime = 0;  // seconds
  std::uint64_t cross_cloud_volume = 0;  // bytes
  std::map<std::string, double> per_site_runtime;  // seconds of busy time per site
  TotalCost cost;
  std::vector<SimEvent> events;
  std::map<std::string, std::vector<LineageEntry>> lineage;  // transform id -> inputs

  friend bool operator==(const SimulationReport&, const SimulationReport&) = default;
};

struct SimulationOptions {
  bool count_federated_as_transfer = true;
};

/// Discrete-event execution of a validated plan. Transfers take
/// latency + GB / bandwidth, executions take input GB / throughput, and every
/// site runs any number of steps at once. Cost is re-derived from the
/// simulated work and must equal the plan's estimate exactly.
inline SimulationReport simulate(const Plan& plan, const Pipeline& p, const Topology& topo,
                                 SimulationOptions opts = {}) {
  PlanContext ctx(p, topo);
  validate_plan(plan, ctx);

  struct Pending {
    double time;
    std::string subject;
    SimEventKind kind;
    std::size_t index;  // step or edge index
    bool operator>(const Pending& o) const {
      return std::tie(time, subject, kind) > std::tie(o.time, o.subject, o.kind);
    }
  };
  std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue;

  const auto& steps = plan.steps;
  const auto& edges = plan.transfer_edges;
  std::map<std::string, std::size_t> step_of;
  for (std::size_t i = 0; i < steps.size(); ++i) step_of[steps[i].transform_id] = i;

  // what each step waits for, and who waits on each producer / edge
  std::vector<std::size_t> waiting(steps.size(), 0);
  std::map<std::string, std::vector<std::size_t>> local_readers;  // producer id -> steps
  std::vector<std::vector<std::size_t>> edge_readers(edges.size());
  std::map<std::string, std::vector<std::size_t>> edges_from;  // input id -> edges
  std::map<std::tuple<std::string, std::string, AccessMode>, std::size_t> edge_index;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    edge_index[{edges[e].input, edges[e].to, edges[e].mode}] = e;
    edges_from[edges[e].input].push_back(e);
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    for (const auto& acc : steps[i].access) {
      if (acc.mode == AccessMode::Local) {
        if (step_of.count(acc.input)) {
          ++waiting[i];
          local_readers[acc.input].push_back(i);
        }
      } else {
        ++waiting[i];
        edge_readers[edge_index.at({acc.input, steps[i].assigned_site, acc.mode})].push_back(i);
      }
    }
  }

  SimulationReport report;
  report.strategy = plan.strategy;
  std::vector<double> exec_start(steps.size(), 0), exec_end(steps.size(), -1);
  Money compute, transfer;

  auto schedule_exec = [&](std::size_t i, double now) {
    queue.push({now, steps[i].transform_id, SimEventKind::ExecStart, i});
  };
  auto schedule_transfers = [&](const std::string& input, double now) {
    auto it = edges_from.find(input);
    if (it == edges_from.end()) return;
    for (auto e : it->second) queue.push({now, edges[e].id(), SimEventKind::TransferStart, e});
  };

  for (const auto& d : p.datasets()) schedule_transfers(d.id, 0.0);
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (waiting[i] == 0) schedule_exec(i, 0.0);

  while (!queue.empty()) {
    Pending ev = queue.top();
    queue.pop();
    switch (ev.kind) {
      case SimEventKind::TransferStart: {
        const TransferEdge& e = edges[ev.index];
        const Link& link = topo.link(e.from, e.to);
        report.events.push_back({ev.time, ev.kind, ev.subject, e.from + "->" + e.to});
        queue.push({ev.time + link.latency + e.size.gigabytes() / link.bandwidth, ev.subject, SimEventKind::TransferEnd,
                    ev.index});
        if (e.mode == AccessMode::FederatedScan) {
          transfer += topo.site(e.to).federated_scan_rate.times_bytes(e.size.size_bytes);
          if (opts.count_federated_as_transfer) report.cross_cloud_volume += e.size.size_bytes;
        } else {
          transfer += link.egress_rate.times_bytes(e.size.size_bytes);
          report.cross_cloud_volume += e.size.size_bytes;
        }
        break;
      }
      case SimEventKind::TransferEnd: {
        const TransferEdge& e = edges[ev.index];
        report.events.push_back({ev.time, ev.kind, ev.subject, e.from + "->" + e.to});
        for (auto i : edge_readers[ev.index])
          if (--waiting[i] == 0) schedule_exec(i, ev.time);
        break;
      }
      case SimEventKind::ExecStart: {
        const PlanStep& s = steps[ev.index];
        const Site& site = topo.site(s.assigned_site);
        report.events.push_back({ev.time, ev.kind, ev.subject, s.assigned_site});
        exec_start[ev.index] = ev.time;
        compute += site.compute_rate.times_bytes(s.input_volume.size_bytes);
        queue.push({ev.time + s.input_volume.gigabytes() / site.compute_throughput, ev.subject, SimEventKind::ExecEnd,
                    ev.index});
        break;
      }
      case SimEventKind::ExecEnd: {
        const PlanStep& s = steps[ev.index];
        report.events.push_back({ev.time, ev.kind, ev.subject, s.assigned_site});
        exec_end[ev.index] = ev.time;
        for (auto i : local_readers[s.transform_id])
          if (--waiting[i] == 0) schedule_exec(i, ev.time);
        schedule_transfers(s.transform_id, ev.time);
        break;
      }
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (exec_end[i] < 0) throw PlanMismatchError("step '" + steps[i].transform_id + "' never ran");

  std::stable_sort(report.events.begin(), report.events.end(), [](const SimEvent& a, const SimEvent& b) {
    return std::tie(a.time, a.subject, a.kind) < std::tie(b.time, b.subject, b.kind);
  });

  // storage: outputs that are sinks or were shipped off their site
  Money storage;
  std::set<std::string> shipped;
  for (const auto& e : edges) shipped.insert(e.input);
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const PlanStep& s = steps[i];
    if (p.is_sink(s.transform_id) || shipped.count(s.transform_id))
      storage += topo.site(s.assigned_site).storage_rate.times_bytes(s.output.size_bytes);
    if (p.is_sink(s.transform_id)) report.total_runtime = std::max(report.total_runtime, exec_end[i]);
  }
  report.cost = TotalCost::of(compute, storage, transfer);
  if (!(report.cost == plan.estimated))
    throw PlanMismatchError("simulated cost " + report.cost.total.to_string() + " differs from the plan estimate " +
                            plan.estimated.total.to_string());

  for (const auto& site : topo.sites()) {
    std::vector<std::pair<double, double>> spans;
    for (std::size_t i = 0; i < steps.size(); ++i)
      if (steps[i].assigned_site == site.id) spans.emplace_back(exec_start[i], exec_end[i]);
    std::sort(spans.begin(), spans.end());
    double busy = 0, cur_start = 0, cur_end = -1;
    for (auto [a, b] : spans) {
      if (a > cur_end) {
        if (cur_end >= 0) busy += cur_end - cur_start;
        cur_start = a;
        cur_end = b;
      } else {
        cur_end = std::max(cur_end, b);
      }
    }
    if (cur_end >= 0) busy += cur_end - cur_start;
    report.per_site_runtime[site.id] = busy;
  }

  std::map<std::string, std::set<std::string>> traversed;  // node -> sites its data touched
  for (const auto& d : p.datasets()) traversed[d.id] = {d.site};
  for (const auto& s : steps) {
    std::set<std::string> here{s.assigned_site};
    auto& entries = report.lineage[s.transform_id];
    for (const auto& acc : s.access) {
      const auto& up = traversed.at(acc.input);
      entries.push_back({acc.input, acc.from_site, acc.mode, {up.begin(), up.end()}});
      here.insert(up.begin(), up.end());
    }
    traversed[s.transform_id] = std::move(here);
  }
  return report;
}

/// Length of the longest dependency chain counting execution time only.
inline double critical_path_exec_time(const Plan& plan, const Pipeline& p, const Topology& topo) {
  std::map<std::string, double> done;
  double best = 0;
  for (const auto& s : plan.steps) {
    double start = 0;
    for (const auto& in : p.find_transform(s.transform_id)->inputs)
      if (done.count(in)) start = std::max(start, done[in]);
    double end = start + s.input_volume.gigabytes() / topo.site(s.assigned_site).compute_throughput;
    done[s.transform_id] = end;
    if (p.is_sink(s.transform_id)) best = std::max(best, end);
  }
  return best;
}

struct ImprovementRow {
  std::string metric;
  std::string unit;
  double pre = 0;
  double post = 0;
  std::optional<double> improvement;  // percent, one decimal; nullopt when undefined

  friend bool operator==(const ImprovementRow&, const ImprovementRow&) = default;
};

struct ImprovementTable {
  std::vector<ImprovementRow> rows;

  const ImprovementRow* find(std::string_view metric) const {
    for (const auto& r : rows)
      if (r.metric == metric) return &r;
    return nullptr;
  }
};

/// (pre - post) / pre as a percentage rounded to one decimal.
inline std::optional<double> improvement_percent(long double pre, long double post) {
  if (pre == 0) {
    if (post == 0) return 0.0;
    return std::nullopt;
  }
  double v = static_cast<double>(std::round((pre - post) / pre * 1000.0L) / 10.0L);
  return v == 0 ? 0.0 : v;
}

inline ImprovementTable compare(const SimulationReport& pre, const SimulationReport& post) {
  std::set<std::string> a, b;
  for (const auto& [id, _] : pre.lineage) a.insert(id);
  for (const auto& [id, _] : post.lineage) b.insert(id);
  if (a != b) throw ValidationError("reports come from different pipelines");

  ImprovementTable t;
  auto add = [&](std::string metric, std::string unit, double x, double y, std::optional<double> imp) {
    t.rows.push_back({std::move(metric), std::move(unit), x, y, imp});
  };
  add("Total runtime", "min", pre.total_runtime / 60.0, post.total_runtime / 60.0,
      improvement_percent(pre.total_runtime, post.total_runtime));
  add("Cross-cloud volume", "GB", pre.cross_cloud_volume / kBytesPerGB, post.cross_cloud_volume / kBytesPerGB,
      improvement_percent(static_cast<long double>(pre.cross_cloud_volume),
                          static_cast<long double>(post.cross_cloud_volume)));
  std::set<std::string> sites;
  for (const auto& [s, _] : pre.per_site_runtime) sites.insert(s);
  for (const auto& [s, _] : post.per_site_runtime) sites.insert(s);
  for (const auto& s : sites) {
    double x = pre.per_site_runtime.count(s) ? pre.per_site_runtime.at(s) : 0.0;
    double y = post.per_site_runtime.count(s) ? post.per_site_runtime.at(s) : 0.0;
    add("Runtime on " + s, "min", x / 60.0, y / 60.0, improvement_percent(x, y));
  }
  add("Cost per ETL run", "", pre.cost.total.to_double(), post.cost.total.to_double(),
      improvement_percent(static_cast<long double>(pre.cost.total.units()),
                          static_cast<long double>(post.cost.total.units())));
  return t;
}

namespace detail {

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << (v == 0 ? 0.0 : v);
  return os.str();
}

inline int row_digits(const ImprovementRow& r) { return r.unit.empty() ? 2 : 1; }

inline std::string row_label(const ImprovementRow& r) {
  return r.unit.empty() ? r.metric : r.metric + " (" + r.unit + ")";
}

inline std::string improvement_text(const ImprovementRow& r) {
  return r.improvement ? fixed(*r.improvement, 1) + "%" : "N/A";
}

}  // namespace detail

/// Aligned plain-text table: Metric, Pre, Post, Improvement.
inline std::string format_text(const ImprovementTable& t) {
  std::vector<std::array<std::string, 4>> cells{{"Metric", "Pre", "Post", "Improvement"}};
  for (const auto& r : t.rows)
    cells.push_back({detail::row_label(r), detail::fixed(r.pre, detail::row_digits(r)),
                     detail::fixed(r.post, detail::row_digits(r)), detail::improvement_text(r)});
  std::array<std::size_t, 4> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    std::string line = row[0] + std::string(width[0] - row[0].size(), ' ');
    for (std::size_t c = 1; c < 4; ++c) line += "  " + std::string(width[c] - row[c].size(), ' ') + row[c];
    out += line + "\n";
  }
  return out;
}

inline std::string format_csv(const ImprovementTable& t) {
  std::string out = "metric,unit,pre,post,improvement_pct\n";
  for (const auto& r : t.rows)
    out += r.metric + "," + r.unit + "," + detail::fixed(r.pre, detail::row_digits(r)) + "," +
           detail::fixed(r.post, detail::row_digits(r)) + "," +
           (r.improvement ? detail::fixed(*r.improvement, 1) : std::string("N/A")) + "\n";
  return out;
}

}  // namespace fedplan
