#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fedplan/plan.hpp"

namespace fedplan {

enum class PushDecision { PushDown, NoPushDown };

inline std::string_view to_string(PushDecision d) { return d == PushDecision::PushDown ? "PushDown" : "NoPushDown"; }

/// Push down iff moving plus remote execution costs strictly more
/// than local execution. Ties fall to the "otherwise" branch.
inline PushDecision decide_pushdown(const CostEstimate& c) {
  return c.move + c.exec_remote > c.exec_local ? PushDecision::PushDown : PushDecision::NoPushDown;
}

/// The two concrete push-down options for one transform given where its
/// inputs currently live.
struct PushdownCandidate {
  CostEstimate cost;
  std::size_t local_site = 0;  // site holding the largest input
  bool local_feasible = false;
  bool remote_feasible = false;
};

inline PushdownCandidate pushdown_candidate(const PlanContext& ctx, std::size_t k, const Assignment& a) {
  const Topology& topo = ctx.topology();
  const std::size_t central = topo.central_index();
  PushdownCandidate c;
  // largest input; ties go to the lower site id, then the earlier input
  std::optional<std::size_t> best_node;
  for (auto node : ctx.inputs(k)) {
    if (!best_node) {
      best_node = node;
      continue;
    }
    std::uint64_t b = ctx.node_bytes(node), cur = ctx.node_bytes(*best_node);
    if (b > cur || (b == cur && ctx.site_rank(ctx.site_of(node, a)) < ctx.site_rank(ctx.site_of(*best_node, a))))
      best_node = node;
  }
  c.local_site = ctx.site_of(*best_node, a);
  const Transform& t = ctx.transform(k);
  c.cost.exec_remote = cost_exec(t, ctx.input_volume(k), ctx.site(central));
  c.cost.exec_local = cost_exec(t, ctx.input_volume(k), ctx.site(c.local_site));
  std::set<std::size_t> seen;
  for (auto node : ctx.inputs(k)) {
    if (!seen.insert(node).second) continue;
    std::size_t from = ctx.site_of(node, a);
    SizeStats v = ctx.node_size(node);
    c.cost.move += cost_move(v, ctx.site(from).id, ctx.site(central).id, topo);
    c.cost.exec_local += cost_move(v, ctx.site(from).id, ctx.site(c.local_site).id, topo);
  }
  c.local_feasible = ctx.option_feasible(k, {c.local_site, AccessStyle::Move}, a);
  c.remote_feasible = ctx.option_feasible(k, {central, AccessStyle::Move}, a);
  return c;
}

namespace detail {

/// Single database site holding every input of `k`, if there is one.
inline std::optional<std::size_t> common_engine_site(const PlanContext& ctx, std::size_t k, const Assignment& a) {
  std::optional<std::size_t> site;
  for (auto node : ctx.inputs(k)) {
    std::size_t s = ctx.site_of(node, a);
    if (site && *site != s) return std::nullopt;
    site = s;
  }
  if (!site || ctx.site(*site).is_central()) return std::nullopt;
  return site;
}

inline Option central_fallback(const PlanContext& ctx, std::size_t k, const Assignment& a) {
  Option o{ctx.topology().central_index(), AccessStyle::Move};
  if (auto why = ctx.option_infeasibility(k, o, a)) throw InfeasibleError("no feasible placement: " + *why);
  return o;
}

}  // namespace detail

/// Baseline: every transform at the central engine, every source moved there.
inline Plan plan_centralized(const PlanContext& ctx) {
  Assignment a;
  for (std::size_t k = 0; k < ctx.transform_count(); ++k) a.push_back(detail::central_fallback(ctx, k, a));
  return build_plan(ctx, a, Strategy::Centralized);
}

/// Transforms whose inputs share one engine that can run them stay there;
/// everything else falls back to the central engine.
inline Plan plan_localized(const PlanContext& ctx) {
  Assignment a;
  for (std::size_t k = 0; k < ctx.transform_count(); ++k) {
    auto site = detail::common_engine_site(ctx, k, a);
    if (site && ctx.pushable(k, *site))
      a.push_back({*site, AccessStyle::Move});
    else
      a.push_back(detail::central_fallback(ctx, k, a));
  }
  return build_plan(ctx, a, Strategy::Localized);
}

/// Localized placement, except that each cross-site or non-pushable
/// transform is settled by the push-down rule between the largest input's site and
/// the central engine.
inline Plan plan_hybrid(const PlanContext& ctx) {
  Assignment a;
  for (std::size_t k = 0; k < ctx.transform_count(); ++k) {
    auto site = detail::common_engine_site(ctx, k, a);
    if (site && ctx.pushable(k, *site)) {
      a.push_back({*site, AccessStyle::Move});
      continue;
    }
    PushdownCandidate c = pushdown_candidate(ctx, k, a);
    bool push = c.local_feasible && (!c.remote_feasible || decide_pushdown(c.cost) == PushDecision::PushDown);
    if (push)
      a.push_back({c.local_site, AccessStyle::Move});
    else
      a.push_back(detail::central_fallback(ctx, k, a));
  }
  return build_plan(ctx, a, Strategy::Hybrid);
}

/// Cross-site transforms run on a federation-capable engine that scans the
/// remote inputs in place; the cheapest such engine wins, ties by site id.
inline Plan plan_federated(const PlanContext& ctx) {
  const auto& sites = ctx.topology().sites();
  bool any = std::any_of(sites.begin(), sites.end(),
                         [](const Site& s) { return !s.is_central() && s.capabilities.supports_federation; });
  if (!any) throw InfeasibleError("no site supports federation; use the hybrid strategy instead");
  const Topology& topo = ctx.topology();
  Assignment a;
  for (std::size_t k = 0; k < ctx.transform_count(); ++k) {
    auto site = detail::common_engine_site(ctx, k, a);
    if (site && ctx.pushable(k, *site)) {
      a.push_back({*site, AccessStyle::Move});
      continue;
    }
    std::optional<Option> best;
    Money best_cost;
    for (std::size_t s : ctx.sites_by_id()) {
      const Site& host = ctx.site(s);
      if (host.is_central() || !host.capabilities.supports_federation) continue;
      Option o{s, AccessStyle::Federate};
      if (!ctx.option_feasible(k, o, a)) o.style = AccessStyle::Move;
      if (!ctx.option_feasible(k, o, a)) continue;
      Money cost = cost_exec(ctx.transform(k), ctx.input_volume(k), host);
      for (auto node : ctx.inputs(k)) {
        std::size_t from = ctx.site_of(node, a);
        switch (ctx.access_mode(from, o)) {
          case AccessMode::Local: break;
          case AccessMode::FederatedScan: cost += host.federated_scan_rate.times_bytes(ctx.node_bytes(node)); break;
          case AccessMode::Moved: cost += cost_move(ctx.node_size(node), ctx.site(from).id, host.id, topo); break;
        }
      }
      if (!best || cost < best_cost) {
        best = o;
        best_cost = cost;
      }
    }
    a.push_back(best ? *best : detail::central_fallback(ctx, k, a));
  }
  return build_plan(ctx, a, Strategy::Federated);
}

struct OptimalOptions {
  /// Pipelines with more transforms than this are planned greedily.
  std::size_t max_exhaustive = 10;
};

namespace detail {

/// Depth-first branch-and-bound over assignment vectors in lexicographic
/// order. Because the walk is lexicographic, the first minimum found is the
/// tie-break winner and any partial cost >= the incumbent can be pruned.
class ExhaustiveSearch {
 public:
  explicit ExhaustiveSearch(const PlanContext& ctx) : ctx_(ctx), n_(ctx.transform_count()), s_(ctx.site_count()) {
    const Topology& topo = ctx.topology();
    exec_.resize(n_ * s_);
    storage_.resize(n_ * s_);
    options_.resize(n_);
    min_exec_suffix_.assign(n_ + 1, Money{});
    for (std::size_t k = 0; k < n_; ++k) {
      for (std::size_t rank = 0; rank < s_; ++rank) {
        std::size_t s = ctx.sites_by_id()[rank];
        const Site& site = ctx.site(s);
        exec_[k * s_ + s] = site.compute_rate.times_bytes(ctx.input_volume(k).size_bytes);
        storage_[k * s_ + s] = site.storage_rate.times_bytes(ctx.node_bytes(ctx.dataset_count() + k));
        if (!ctx.pushable(k, s)) continue;
        options_[k].push_back({s, AccessStyle::Move});
        if (!site.is_central() && site.capabilities.supports_federation) options_[k].push_back({s, AccessStyle::Federate});
      }
    }
    for (std::size_t k = n_; k-- > 0;) {
      std::optional<Money> m;
      for (const auto& o : options_[k])
        if (!m || exec_[k * s_ + o.site] < *m) m = exec_[k * s_ + o.site];
      min_exec_suffix_[k] = min_exec_suffix_[k + 1] + m.value_or(Money{});
    }
    egress_.resize(s_ * s_);
    for (std::size_t a = 0; a < s_; ++a)
      for (std::size_t b = 0; b < s_; ++b)
        if (a != b) egress_[a * s_ + b] = topo.link(a, b).egress_rate;
    edge_refs_.assign((ctx.dataset_count() + n_) * s_ * 2, 0);
  }

  std::optional<Assignment> run() {
    current_.assign(n_, Option{});
    dfs(0, Money{});
    return best_;
  }

 private:
  std::size_t edge_key(std::size_t node, std::size_t dst, AccessMode m) const {
    return (node * s_ + dst) * 2 + (m == AccessMode::FederatedScan ? 1 : 0);
  }

  Money edge_cost(std::size_t node, std::size_t from, std::size_t to, AccessMode m) const {
    std::uint64_t bytes = ctx_.node_bytes(node);
    if (m == AccessMode::FederatedScan) return ctx_.site(to).federated_scan_rate.times_bytes(bytes);
    return egress_[from * s_ + to].times_bytes(bytes);
  }

  void dfs(std::size_t k, Money partial) {
    if (best_ && partial + min_exec_suffix_[k] >= best_cost_) return;
    if (k == n_) {
      Money total = partial;
      for (std::size_t u = 0; u < n_; ++u) {
        bool mat = ctx_.is_sink(u);
        for (auto c : ctx_.consumers(u)) mat = mat || current_[c].site != current_[u].site;
        if (mat) total += storage_[u * s_ + current_[u].site];
      }
      if (!best_ || total < best_cost_) {
        best_ = current_;
        best_cost_ = total;
      }
      return;
    }
    for (const Option& o : options_[k]) {
      if (!ctx_.option_feasible(k, o, current_)) continue;
      current_[k] = o;
      Money add = exec_[k * s_ + o.site];
      std::size_t touched[16];
      std::vector<std::size_t> touched_overflow;
      std::size_t n_touched = 0;
      for (auto node : ctx_.inputs(k)) {
        std::size_t from = ctx_.site_of(node, current_);
        AccessMode m = ctx_.access_mode(from, o);
        if (m == AccessMode::Local) continue;
        std::size_t key = edge_key(node, o.site, m);
        if (edge_refs_[key]++ == 0) add += edge_cost(node, from, o.site, m);
        if (n_touched < 16) touched[n_touched++] = key;
        else touched_overflow.push_back(key);
      }
      dfs(k + 1, partial + add);
      for (std::size_t i = 0; i < n_touched; ++i) --edge_refs_[touched[i]];
      for (auto key : touched_overflow) --edge_refs_[key];
    }
  }

  const PlanContext& ctx_;
  std::size_t n_, s_;
  std::vector<Money> exec_;
  std::vector<Money> storage_;
  std::vector<Rate> egress_;
  std::vector<std::vector<Option>> options_;
  std::vector<Money> min_exec_suffix_;
  std::vector<std::uint32_t> edge_refs_;
  Assignment current_;
  std::optional<Assignment> best_;
  Money best_cost_;
};

/// In topological order, take each transform's cheapest feasible option
/// counting execution, not-yet-paid transfers and newly forced storage.
inline std::optional<Assignment> greedy_assignment(const PlanContext& ctx) {
  const std::size_t n = ctx.transform_count();
  Assignment a;
  std::set<std::tuple<std::size_t, std::size_t, AccessMode>> paid;
  std::vector<bool> materialized(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    std::optional<Option> best;
    Money best_cost;
    a.emplace_back();
    for (std::size_t s : ctx.sites_by_id()) {
      for (AccessStyle style : {AccessStyle::Move, AccessStyle::Federate}) {
        Option o{s, style};
        if (!ctx.option_feasible(k, o, a)) continue;
        const Site& site = ctx.site(s);
        Money cost = site.compute_rate.times_bytes(ctx.input_volume(k).size_bytes);
        if (ctx.is_sink(k)) cost += site.storage_rate.times_bytes(ctx.node_bytes(ctx.dataset_count() + k));
        for (auto node : ctx.inputs(k)) {
          std::size_t from = ctx.site_of(node, a);
          AccessMode m = ctx.access_mode(from, o);
          if (m == AccessMode::Local) continue;
          if (!paid.count({node, s, m})) {
            cost += m == AccessMode::FederatedScan ? site.federated_scan_rate.times_bytes(ctx.node_bytes(node))
                                                   : cost_move(ctx.node_size(node), ctx.site(from).id, site.id,
                                                               ctx.topology());
          }
          if (!ctx.is_dataset(node)) {
            std::size_t u = node - ctx.dataset_count();
            if (!materialized[u] && !ctx.is_sink(u))
              cost += ctx.site(from).storage_rate.times_bytes(ctx.node_bytes(node));
          }
        }
        if (!best || cost < best_cost) {
          best = o;
          best_cost = cost;
        }
      }
    }
    if (!best) return std::nullopt;
    a[k] = *best;
    for (auto node : ctx.inputs(k)) {
      std::size_t from = ctx.site_of(node, a);
      AccessMode m = ctx.access_mode(from, *best);
      if (m == AccessMode::Local) continue;
      paid.insert({node, best->site, m});
      if (!ctx.is_dataset(node)) materialized[node - ctx.dataset_count()] = true;
    }
  }
  return a;
}

}  // namespace detail

/// Minimum total-cost plan. Exhaustive up to `max_exhaustive` transforms; above
/// that, the greedy plan or any of the four strategy plans, whichever is
/// cheapest. Ties go to the lexicographically smallest assignment.
inline Plan plan_optimal(const PlanContext& ctx, OptimalOptions opts = {}) {
  if (ctx.transform_count() <= opts.max_exhaustive) {
    auto best = detail::ExhaustiveSearch(ctx).run();
    if (!best) throw InfeasibleError("no feasible plan: residency and capability constraints cannot be satisfied");
    return build_plan(ctx, *best, Strategy::Optimal);
  }
  std::vector<Plan> candidates;
  if (auto g = detail::greedy_assignment(ctx)) candidates.push_back(build_plan(ctx, *g, Strategy::Optimal));
  for (auto make : {plan_centralized, plan_localized, plan_hybrid, plan_federated}) {
    try {
      candidates.push_back(make(ctx));
    } catch (const InfeasibleError&) {
    }
  }
  if (candidates.empty()) throw InfeasibleError("no feasible plan: residency and capability constraints cannot be satisfied");
  const Plan* best = &candidates[0];
  Assignment best_a = assignment_of(*best, ctx);
  for (const auto& c : candidates) {
    Assignment ca = assignment_of(c, ctx);
    if (c.estimated.total < best->estimated.total ||
        (c.estimated.total == best->estimated.total && ctx.assignment_less(ca, best_a))) {
      best = &c;
      best_a = std::move(ca);
    }
  }
  Plan out = *best;
  out.strategy = Strategy::Optimal;
  return out;
}

inline Plan make_plan(const PlanContext& ctx, Strategy s, OptimalOptions opts = {}) {
  switch (s) {
    case Strategy::Centralized: return plan_centralized(ctx);
    case Strategy::Localized: return plan_localized(ctx);
    case Strategy::Hybrid: return plan_hybrid(ctx);
    case Strategy::Federated: return plan_federated(ctx);
    case Strategy::Optimal: return plan_optimal(ctx, opts);
  }
  throw ValidationError("unknown strategy");
}

inline Plan plan_centralized(const Pipeline& p, const Topology& t) { return plan_centralized(PlanContext(p, t)); }
inline Plan plan_localized(const Pipeline& p, const Topology& t) { return plan_localized(PlanContext(p, t)); }
inline Plan plan_hybrid(const Pipeline& p, const Topology& t) { return plan_hybrid(PlanContext(p, t)); }
inline Plan plan_federated(const Pipeline& p, const Topology& t) { return plan_federated(PlanContext(p, t)); }
inline Plan plan_optimal(const Pipeline& p, const Topology& t, OptimalOptions o = {}) {
  return plan_optimal(PlanContext(p, t), o);
}

/// Audit record for one transform: its push-down cost components and decision, where
/// the plan actually put it, and what that placement is charged.
struct DecisionTrace {
  std::string transform_id;
  CostEstimate cost;
  std::string local_site;
  bool local_feasible = false;
  bool remote_feasible = false;
  PushDecision decision = PushDecision::NoPushDown;
  std::string chosen_site;
  Money charged_compute;
  Money charged_storage;
  Money charged_transfer;  // edges are charged to the first step that reads them
};

inline std::vector<DecisionTrace> explain_plan(const PlanContext& ctx, const Plan& plan) {
  validate_plan(plan, ctx);
  Assignment a = assignment_of(plan, ctx);
  const Topology& topo = ctx.topology();
  std::vector<DecisionTrace> out;
  std::set<std::string> charged;
  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const PlanStep& step = plan.steps[k];
    PushdownCandidate c = pushdown_candidate(ctx, k, a);
    DecisionTrace tr;
    tr.transform_id = step.transform_id;
    tr.cost = c.cost;
    tr.local_site = ctx.site(c.local_site).id;
    tr.local_feasible = c.local_feasible;
    tr.remote_feasible = c.remote_feasible;
    tr.decision = decide_pushdown(c.cost);
    tr.chosen_site = step.assigned_site;
    const Site& site = topo.site(step.assigned_site);
    tr.charged_compute = site.compute_rate.times_bytes(step.input_volume.size_bytes);
    if (step.materialized) tr.charged_storage = site.storage_rate.times_bytes(step.output.size_bytes);
    for (const auto& e : plan.transfer_edges) {
      if (e.to != step.assigned_site) continue;
      bool reads = std::any_of(step.access.begin(), step.access.end(),
                               [&](const InputAccess& x) { return x.input == e.input && x.mode == e.mode; });
      if (!reads || !charged.insert(e.id()).second) continue;
      tr.charged_transfer += e.mode == AccessMode::FederatedScan
                                 ? topo.site(e.to).federated_scan_rate.times_bytes(e.size.size_bytes)
                                 : cost_move(e.size, e.from, e.to, topo);
    }
    out.push_back(std::move(tr));
  }
  return out;
}

}  // namespace fedplan
