#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "fedplan/cost.hpp"
#include "fedplan/schema.hpp"
#include "fedplan/topology.hpp"

namespace fedplan {

enum class Strategy { Centralized, Localized, Hybrid, Federated, Optimal };

inline constexpr Strategy kAllStrategies[] = {Strategy::Centralized, Strategy::Localized, Strategy::Hybrid,
                                              Strategy::Federated, Strategy::Optimal};

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Centralized: return "centralized";
    case Strategy::Localized: return "localized";
    case Strategy::Hybrid: return "hybrid";
    case Strategy::Federated: return "federated";
    case Strategy::Optimal: return "optimal";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  for (auto v : kAllStrategies)
    if (to_string(v) == s) return v;
  throw ValidationError("unknown strategy '" + std::string(s) + "'");
}

enum class AccessMode { Local, Moved, FederatedScan };

inline std::string_view to_string(AccessMode m) {
  switch (m) {
    case AccessMode::Local: return "Local";
    case AccessMode::Moved: return "Moved";
    case AccessMode::FederatedScan: return "FederatedScan";
  }
  return "?";
}

inline AccessMode parse_access_mode(std::string_view s) {
  for (auto m : {AccessMode::Local, AccessMode::Moved, AccessMode::FederatedScan})
    if (to_string(m) == s) return m;
  throw ValidationError("unknown access mode '" + std::string(s) + "'");
}

struct InputAccess {
  std::string input;
  std::string from_site;
  AccessMode mode = AccessMode::Local;

  friend bool operator==(const InputAccess&, const InputAccess&) = default;
};

struct PlanStep {
  std::string transform_id;
  std::string assigned_site;
  std::vector<InputAccess> access;  // one per input, in input order
  bool materialized = false;
  SizeStats input_volume;
  SizeStats output;

  friend bool operator==(const PlanStep&, const PlanStep&) = default;
};

/// Data crossing a site boundary: a physical move or a federated remote scan.
struct TransferEdge {
  std::string input;
  std::string from;
  std::string to;
  AccessMode mode = AccessMode::Moved;
  SizeStats size;

  std::string id() const {
    return std::string(mode == AccessMode::FederatedScan ? "scan:" : "move:") + input + ":" + from + "->" + to;
  }
  friend bool operator==(const TransferEdge&, const TransferEdge&) = default;
};

struct SqlGroup {
  std::string group;
  std::string site;
  std::string dialect;
  std::string output;
  std::string sql;

  friend bool operator==(const SqlGroup&, const SqlGroup&) = default;
};

struct Plan {
  Strategy strategy = Strategy::Centralized;
  std::vector<PlanStep> steps;
  std::vector<TransferEdge> transfer_edges;
  std::vector<SqlGroup> sql_per_group;
  TotalCost estimated;

  const PlanStep* find_step(std::string_view id) const {
    for (const auto& s : steps)
      if (s.transform_id == id) return &s;
    return nullptr;
  }
  friend bool operator==(const Plan&, const Plan&) = default;
};

/// Compute + storage + transfer, read off a complete plan.
inline TotalCost total_cost(const Plan& plan, const Topology& topo) {
  Money compute, storage, transfer;
  for (const auto& s : plan.steps) {
    if (s.assigned_site.empty()) throw ValidationError("incomplete plan: '" + s.transform_id + "' is unassigned");
    const Site& site = topo.site(s.assigned_site);
    compute += site.compute_rate.times_bytes(s.input_volume.size_bytes);
    if (s.materialized) storage += site.storage_rate.times_bytes(s.output.size_bytes);
  }
  for (const auto& e : plan.transfer_edges) {
    if (e.mode == AccessMode::FederatedScan)
      transfer += topo.site(e.to).federated_scan_rate.times_bytes(e.size.size_bytes);
    else
      transfer += cost_move(e.size, e.from, e.to, topo);
  }
  return TotalCost::of(compute, storage, transfer);
}

/// Checks that every transform of `p` is assigned before aggregating.
inline TotalCost total_cost(const Plan& plan, const Pipeline& p, const Topology& topo) {
  for (const auto& t : p.transforms())
    if (!plan.find_step(t.id)) throw ValidationError("incomplete plan: '" + t.id + "' is unassigned");
  return total_cost(plan, topo);
}

/// How a step reaches inputs living on another site.
enum class AccessStyle : std::uint8_t {
  Move,      // copy every remote input
  Federate,  // scan inputs on other database engines in place; central inputs are still moved
};

/// Placement of one transform. Options are ordered by (site id, style).
struct Option {
  std::size_t site = 0;  // topology index
  AccessStyle style = AccessStyle::Move;

  friend bool operator==(const Option&, const Option&) = default;
};

/// One option per transform, indexed by topological position.
using Assignment = std::vector<Option>;

/// Everything planners derive once from a (pipeline, topology) pair: schemas,
/// size estimates, topological order, propagated residency sets and
/// precomputed rate x volume products. Holds references to both inputs.
class PlanContext {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  PlanContext(Pipeline&&, const Topology&) = delete;
  PlanContext(const Pipeline&, Topology&&) = delete;
  PlanContext(Pipeline&&, Topology&&) = delete;

  PlanContext(const Pipeline& p, const Topology& topo)
      : pipeline_(p), topo_(topo), schemas_(infer_schemas(p)), sizes_(estimate_sizes(p, schemas_, topo.selectivity())),
        order_(topo_order(p)) {
    const std::size_t n_sites = topo.sites().size();
    site_rank_.resize(n_sites);
    std::vector<std::size_t> by_id(n_sites);
    for (std::size_t i = 0; i < n_sites; ++i) by_id[i] = i;
    std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) { return topo.sites()[a].id < topo.sites()[b].id; });
    for (std::size_t r = 0; r < n_sites; ++r) site_rank_[by_id[r]] = r;
    sites_by_id_ = by_id;

    const std::uint64_t all = n_sites == 64 ? ~0ULL : ((1ULL << n_sites) - 1);
    for (const auto& d : p.datasets()) {
      if (!topo.find_site(d.site)) throw ValidationError("dataset '" + d.id + "' lives on unknown site '" + d.site + "'");
      node_index_[d.id] = node_id_.size();
      node_id_.push_back(d.id);
      home_.push_back(topo.index_of(d.site));
      std::uint64_t mask = all;
      if (d.allowed_sites) {
        mask = 0;
        for (const auto& s : *d.allowed_sites) {
          if (!topo.find_site(s))
            throw ValidationError("dataset '" + d.id + "': allowed site '" + s + "' is not in the topology");
          mask |= 1ULL << topo.index_of(s);
        }
      }
      allowed_.push_back(mask);
      bytes_.push_back(d.size_bytes);
    }
    dataset_count_ = node_id_.size();
    for (const auto& id : order_) {
      node_index_[id] = node_id_.size();
      node_id_.push_back(id);
      home_.push_back(npos);
      bytes_.push_back(sizes_.at(id).size_bytes);
      allowed_.push_back(all);
    }
    const std::size_t n = order_.size();
    inputs_.resize(n);
    consumers_.resize(n);
    input_volume_.resize(n);
    sink_.resize(n);
    pushable_.assign(n * n_sites, false);
    for (std::size_t k = 0; k < n; ++k) {
      const Transform& t = transform(k);
      std::uint64_t mask = all;
      for (const auto& in : t.inputs) {
        std::size_t node = node_index_.at(in);
        inputs_[k].push_back(node);
        mask &= allowed_[node];
        const SizeStats& s = sizes_.at(in);
        input_volume_[k].size_bytes += s.size_bytes;
        input_volume_[k].row_count += s.row_count;
        if (node >= dataset_count_) consumers_[node - dataset_count_].push_back(k);
      }
      // derived data inherits the residency of everything it was computed from
      allowed_[dataset_count_ + k] = mask;
      sink_[k] = p.is_sink(t.id);
      for (std::size_t s = 0; s < n_sites; ++s) pushable_[k * n_sites + s] = is_pushable(t, topo.sites()[s]);
    }
  }

  const Pipeline& pipeline() const { return pipeline_; }
  const Topology& topology() const { return topo_; }
  const SchemaMap& schemas() const { return schemas_; }
  const std::map<std::string, SizeStats>& sizes() const { return sizes_; }
  const std::vector<std::string>& order() const { return order_; }

  std::size_t transform_count() const { return order_.size(); }
  std::size_t site_count() const { return topo_.sites().size(); }
  const Transform& transform(std::size_t k) const { return *pipeline_.find_transform(order_[k]); }
  const Site& site(std::size_t s) const { return topo_.sites()[s]; }
  /// Site indices sorted by id.
  const std::vector<std::size_t>& sites_by_id() const { return sites_by_id_; }
  std::size_t site_rank(std::size_t s) const { return site_rank_[s]; }

  std::size_t dataset_count() const { return dataset_count_; }
  std::size_t node_index(std::string_view id) const { return node_index_.at(std::string(id)); }
  const std::string& node_id(std::size_t node) const { return node_id_[node]; }
  bool is_dataset(std::size_t node) const { return node < dataset_count_; }
  /// Site of a dataset node; npos for transform nodes.
  std::size_t home(std::size_t node) const { return home_[node]; }
  std::uint64_t node_bytes(std::size_t node) const { return bytes_[node]; }
  SizeStats node_size(std::size_t node) const { return sizes_.at(node_id_[node]); }
  std::uint64_t allowed_mask(std::size_t node) const { return allowed_[node]; }
  bool allowed(std::size_t node, std::size_t site) const { return (allowed_[node] >> site) & 1ULL; }

  const std::vector<std::size_t>& inputs(std::size_t k) const { return inputs_[k]; }
  const std::vector<std::size_t>& consumers(std::size_t k) const { return consumers_[k]; }
  const SizeStats& input_volume(std::size_t k) const { return input_volume_[k]; }
  bool is_sink(std::size_t k) const { return sink_[k]; }
  bool pushable(std::size_t k, std::size_t s) const { return pushable_[k * site_count() + s]; }

  /// Site holding `node` given placements for transforms before it.
  std::size_t site_of(std::size_t node, const Assignment& a) const {
    return is_dataset(node) ? home_[node] : a[node - dataset_count_].site;
  }

  bool option_less(const Option& a, const Option& b) const {
    return std::make_tuple(site_rank_[a.site], a.style) < std::make_tuple(site_rank_[b.site], b.style);
  }
  bool assignment_less(const Assignment& a, const Assignment& b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [&](const Option& x, const Option& y) { return option_less(x, y); });
  }

  /// Access mode for reading `node` (on `from`) at option `o`.
  AccessMode access_mode(std::size_t from, const Option& o) const {
    if (from == o.site) return AccessMode::Local;
    if (o.style == AccessStyle::Federate && !site(from).is_central() && site(o.site).capabilities.supports_federation &&
        !site(o.site).is_central())
      return AccessMode::FederatedScan;
    return AccessMode::Moved;
  }

  /// Fast form of option_infeasibility for search loops.
  bool option_feasible(std::size_t k, const Option& o, const Assignment& a) const {
    if (!pushable(k, o.site)) return false;
    bool scans = false;
    for (auto node : inputs_[k]) {
      std::size_t from = site_of(node, a);
      if (from == o.site) continue;
      if (!allowed(node, o.site)) return false;
      scans = scans || access_mode(from, o) == AccessMode::FederatedScan;
    }
    return o.style == AccessStyle::Move || scans;
  }

  /// Why option `o` for transform `k` is infeasible given the placements of
  /// earlier transforms, or nullopt when it is feasible.
  std::optional<std::string> option_infeasibility(std::size_t k, const Option& o, const Assignment& a) const {
    const Transform& t = transform(k);
    const Site& s = site(o.site);
    if (!pushable(k, o.site))
      return std::string(to_string(t.kind)) + " '" + t.id + "' is not pushable to site '" + s.id + "'";
    if (o.style == AccessStyle::Federate) {
      if (s.is_central() || !s.capabilities.supports_federation)
        return "site '" + s.id + "' does not support federation";
      bool scans = false;
      for (auto node : inputs_[k]) scans = scans || access_mode(site_of(node, a), o) == AccessMode::FederatedScan;
      if (!scans) return "federated access for '" + t.id + "' at '" + s.id + "' scans nothing";
    }
    for (auto node : inputs_[k]) {
      if (site_of(node, a) != o.site && !allowed(node, o.site))
        return "residency: '" + node_id_[node] + "' may not be moved or scanned to site '" + s.id + "'";
    }
    return std::nullopt;
  }

  std::optional<std::string> infeasibility(const Assignment& a) const {
    if (a.size() != transform_count()) return std::string("assignment does not cover every transform");
    for (std::size_t k = 0; k < a.size(); ++k)
      if (auto why = option_infeasibility(k, a[k], a)) return why;
    return std::nullopt;
  }

 private:
  const Pipeline& pipeline_;
  const Topology& topo_;
  SchemaMap schemas_;
  std::map<std::string, SizeStats> sizes_;
  std::vector<std::string> order_;
  std::vector<std::size_t> site_rank_;
  std::vector<std::size_t> sites_by_id_;
  std::map<std::string, std::size_t> node_index_;
  std::vector<std::string> node_id_;
  std::vector<std::size_t> home_;
  std::vector<std::uint64_t> bytes_;
  std::vector<std::uint64_t> allowed_;
  std::size_t dataset_count_ = 0;
  std::vector<std::vector<std::size_t>> inputs_;
  std::vector<std::vector<std::size_t>> consumers_;
  std::vector<SizeStats> input_volume_;
  std::vector<bool> sink_;
  std::vector<bool> pushable_;
};

/// Materializes an assignment into a Plan: access modes, deduplicated
/// transfer edges, the materialization rule and the cost estimate.
/// Throws InfeasibleError when the assignment violates capability or
/// residency constraints.
inline Plan build_plan(const PlanContext& ctx, const Assignment& a, Strategy strategy) {
  if (auto why = ctx.infeasibility(a)) throw InfeasibleError(*why);
  Plan plan;
  plan.strategy = strategy;
  std::set<std::tuple<std::size_t, std::size_t, AccessMode>> seen_edges;
  for (std::size_t k = 0; k < ctx.transform_count(); ++k) {
    const Option& o = a[k];
    PlanStep step;
    step.transform_id = ctx.order()[k];
    step.assigned_site = ctx.site(o.site).id;
    step.input_volume = ctx.input_volume(k);
    step.output = ctx.sizes().at(step.transform_id);
    for (auto node : ctx.inputs(k)) {
      std::size_t from = ctx.site_of(node, a);
      AccessMode mode = ctx.access_mode(from, o);
      step.access.push_back({ctx.node_id(node), ctx.site(from).id, mode});
      if (mode != AccessMode::Local && seen_edges.emplace(node, o.site, mode).second)
        plan.transfer_edges.push_back({ctx.node_id(node), ctx.site(from).id, step.assigned_site, mode, ctx.node_size(node)});
    }
    // materialized iff a sink or read from another site
    step.materialized = ctx.is_sink(k);
    for (auto c : ctx.consumers(k)) step.materialized = step.materialized || a[c].site != o.site;
    plan.steps.push_back(std::move(step));
  }
  plan.estimated = total_cost(plan, ctx.topology());
  return plan;
}

/// Recovers the assignment a plan encodes. Throws PlanMismatchError when the
/// plan's steps do not line up with the context's transforms.
inline Assignment assignment_of(const Plan& plan, const PlanContext& ctx) {
  if (plan.steps.size() != ctx.transform_count())
    throw PlanMismatchError("plan has " + std::to_string(plan.steps.size()) + " steps but the pipeline has " +
                            std::to_string(ctx.transform_count()) + " transforms");
  Assignment a;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const PlanStep& s = plan.steps[k];
    if (s.transform_id != ctx.order()[k])
      throw PlanMismatchError("plan step " + std::to_string(k) + " is '" + s.transform_id + "', expected '" +
                              ctx.order()[k] + "'");
    const Site* site = ctx.topology().find_site(s.assigned_site);
    if (!site) throw PlanMismatchError("plan assigns '" + s.transform_id + "' to unknown site '" + s.assigned_site + "'");
    bool scans = std::any_of(s.access.begin(), s.access.end(),
                             [](const InputAccess& x) { return x.mode == AccessMode::FederatedScan; });
    a.push_back({ctx.topology().index_of(s.assigned_site), scans ? AccessStyle::Federate : AccessStyle::Move});
  }
  return a;
}

/// Full consistency check of a plan against its pipeline and topology:
/// topological step order, capability and residency feasibility, access
/// modes, the transfer-edge accounting identity, materialization flags and
/// the cost estimate. Throws PlanMismatchError describing the first defect.
inline void validate_plan(const Plan& plan, const PlanContext& ctx) {
  Assignment a = assignment_of(plan, ctx);
  if (auto why = ctx.infeasibility(a)) throw PlanMismatchError("infeasible plan: " + *why);
  Plan expected = build_plan(ctx, a, plan.strategy);
  for (std::size_t k = 0; k < plan.steps.size(); ++k)
    if (!(plan.steps[k] == expected.steps[k]))
      throw PlanMismatchError("plan step '" + plan.steps[k].transform_id + "' does not match the pipeline");
  if (plan.transfer_edges != expected.transfer_edges)
    throw PlanMismatchError("transfer edges differ from those implied by the steps");
  if (!(plan.estimated == expected.estimated)) throw PlanMismatchError("estimated cost does not match the plan");
  if (!(plan.estimated.total == plan.estimated.compute + plan.estimated.storage + plan.estimated.transfer))
    throw PlanMismatchError("estimated total is not the sum of its parts");
}

}  // namespace fedplan
