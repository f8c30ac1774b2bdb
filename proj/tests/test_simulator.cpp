#include <gtest/gtest.h>

#include "support/builders.hpp"
#include "support/fixtures.hpp"

using namespace fedplan;
using namespace fedplan::testing;

namespace {

double event_time(const SimulationReport& r, SimEventKind k, const std::string& subject) {
  for (const auto& e : r.events)
    if (e.kind == k && e.subject == subject) return e.time;
  ADD_FAILURE() << "no " << to_string(k) << " for " << subject;
  return -1;
}

}  // namespace

TEST(Simulator, TransferTakesLatencyPlusSizeOverBandwidth) {
  Topology t = TopoBuilder().central("0.01", 2.0).engine("a", "0.01").link("a", "central", "0.02", 1.0, 0.05).other_links("0.02").build();
  Pipeline p({dataset("d", "a", 10 * GB)}, {filter("f", "d")}, {"f"});
  PlanContext ctx(p, t);
  Plan plan = plan_centralized(ctx);
  SimulationReport r = simulate(plan, p, t);
  EXPECT_DOUBLE_EQ(event_time(r, SimEventKind::TransferEnd, "move:d:a->central"), 10.05);
  EXPECT_DOUBLE_EQ(event_time(r, SimEventKind::ExecStart, "f"), 10.05);
  EXPECT_DOUBLE_EQ(event_time(r, SimEventKind::ExecEnd, "f"), 15.05);  // 10 GB at 2 GB/s
  EXPECT_DOUBLE_EQ(r.total_runtime, 15.05);
  EXPECT_EQ(r.cross_cloud_volume, 10 * GB);
  EXPECT_DOUBLE_EQ(r.per_site_runtime.at("central"), 5.0);
  EXPECT_DOUBLE_EQ(r.per_site_runtime.at("a"), 0.0);
}

TEST(Simulator, ParallelBranchesOverlap) {
  Topology t = TopoBuilder().central("0.01").engine("a", "0.01").other_links("0.02").build();
  Transform f1 = filter("f1", "x"), f2 = filter("f2", "y");
  f1.selectivity = 0.1;
  f2.selectivity = 0.1;
  Pipeline p({dataset("x", "a", 5 * GB), dataset("y", "a", 5 * GB)}, {f1, f2, join("j", "f1", "f2")}, {"j"});
  PlanContext ctx(p, t);
  Plan plan = plan_localized(ctx);
  for (const auto& s : plan.steps) ASSERT_EQ(s.assigned_site, "a");
  SimulationReport r = simulate(plan, p, t);
  EXPECT_DOUBLE_EQ(r.total_runtime, 6.0);
  EXPECT_DOUBLE_EQ(r.per_site_runtime.at("a"), 6.0);
  EXPECT_EQ(r.cross_cloud_volume, 0u);
  EXPECT_DOUBLE_EQ(critical_path_exec_time(plan, p, t), 6.0);
}

TEST(Simulator, CostMatchesEstimateOnFixtures) {
  for (const auto& sc : fixture_scenarios()) {
    PlanContext ctx(sc.pipeline, sc.topology);
    for (Strategy s : kAllStrategies) {
      Plan plan;
      try {
        plan = make_plan(ctx, s);
      } catch (const InfeasibleError&) {
        continue;
      }
      SimulationReport r = simulate(plan, sc.pipeline, sc.topology);
      EXPECT_EQ(r.cost, plan.estimated) << sc.name << " " << to_string(s);
      std::uint64_t moved = 0;
      for (const auto& e : plan.transfer_edges) moved += e.size.size_bytes;
      EXPECT_EQ(r.cross_cloud_volume, moved);
      EXPECT_GE(r.total_runtime, critical_path_exec_time(plan, sc.pipeline, sc.topology) - 1e-9);
      EXPECT_TRUE(std::is_sorted(r.events.begin(), r.events.end(),
                                 [](const SimEvent& a, const SimEvent& b) { return a.time < b.time; }));
      EXPECT_EQ(r.lineage.size(), plan.steps.size());
    }
  }
}

TEST(Simulator, Deterministic) {
  Pipeline p = fixture_pipeline("case-study.json");
  Topology t = fixture_topology("case-study-topo.json");
  PlanContext ctx(p, t);
  Plan plan = plan_optimal(ctx);
  SimulationReport first = simulate(plan, p, t);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(simulate(plan, p, t), first);
}

TEST(Simulator, RejectsTamperedCost) {
  Pipeline p = fixture_pipeline("micro.json");
  Topology t = fixture_topology("micro-topo.json");
  PlanContext ctx(p, t);
  Plan plan = plan_centralized(ctx);
  plan.estimated = TotalCost::of(plan.estimated.compute + Money::parse("0.01"), plan.estimated.storage,
                                 plan.estimated.transfer);
  EXPECT_ANY_THROW(simulate(plan, p, t));
}

TEST(Simulator, LineageRecordsUpstreamSites) {
  Pipeline p = fixture_pipeline("micro.json");
  Topology t = fixture_topology("micro-topo.json");
  PlanContext ctx(p, t);
  SimulationReport r = simulate(plan_centralized(ctx), p, t);
  for (const auto& [id, entries] : r.lineage)
    for (const auto& e : entries) {
      EXPECT_TRUE(std::is_sorted(e.upstream_sites.begin(), e.upstream_sites.end()));
      EXPECT_FALSE(e.upstream_sites.empty()) << id;
    }
}

TEST(Improvement, Percentages) {
  EXPECT_EQ(improvement_percent(185, 120), 35.1);
  EXPECT_EQ(improvement_percent(850, 680), 20.0);
  EXPECT_EQ(improvement_percent(212, 172), 18.9);
  EXPECT_EQ(improvement_percent(100, 150), -50.0);
  EXPECT_EQ(improvement_percent(0, 0), 0.0);
  EXPECT_FALSE(improvement_percent(0, 5).has_value());
}

TEST(Improvement, CompareRowsAndFormats) {
  Pipeline p = fixture_pipeline("case-study.json");
  Topology t = fixture_topology("case-study-topo.json");
  PlanContext ctx(p, t);
  SimulationReport pre = simulate(plan_centralized(ctx), p, t);
  SimulationReport post = simulate(plan_optimal(ctx), p, t);
  ImprovementTable table = compare(pre, post);
  ASSERT_NE(table.find("Total runtime"), nullptr);
  ASSERT_NE(table.find("Cross-cloud volume"), nullptr);
  ASSERT_NE(table.find("Cost per ETL run"), nullptr);
  for (const auto& s : t.sites()) EXPECT_NE(table.find("Runtime on " + s.id), nullptr) << s.id;
  EXPECT_EQ(table.rows.front().metric, "Total runtime");
  EXPECT_EQ(table.rows.back().metric, "Cost per ETL run");

  ImprovementTable self = compare(pre, pre);
  for (const auto& r : self.rows) EXPECT_EQ(r.improvement, 0.0) << r.metric;

  std::string text = format_text(table);
  EXPECT_EQ(text.rfind("Metric", 0), 0u);
  EXPECT_NE(text.find("Cost per ETL run"), std::string::npos);
  std::string csv = format_csv(table);
  EXPECT_EQ(csv.rfind("metric,unit,pre,post,improvement_pct\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), table.rows.size() + 1);
}

TEST(Improvement, DifferentPipelinesRejected) {
  Topology t = fixture_topology("micro-topo.json");
  Pipeline a = fixture_pipeline("micro.json"), b = fixture_pipeline("cleanname.json");
  PlanContext ca(a, t), cb(b, t);
  EXPECT_THROW(compare(simulate(plan_centralized(ca), a, t), simulate(plan_centralized(cb), b, t)), ValidationError);
}
