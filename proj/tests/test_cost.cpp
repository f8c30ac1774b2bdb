#include <gtest/gtest.h>

#include "support/builders.hpp"
#include "support/fixtures.hpp"

using namespace fedplan;
using namespace fedplan::testing;

namespace {

SizeStats estimate(const Transform& t, std::vector<SizeStats> in, std::vector<Schema> schemas = {},
                   SelectivityConfig sel = {}) {
  if (schemas.empty()) schemas.assign(in.size(), kv_schema());
  return estimate_output_size(t, in, schemas, sel);
}

}  // namespace

TEST(SizeEstimate, FilterScalesBytesAndRows) {
  SizeStats out = estimate(filter("f", "d"), {{100 * GB, 1'000'000}});
  EXPECT_EQ(out, (SizeStats{10 * GB, 100'000}));
}

TEST(SizeEstimate, PerTransformSelectivityOverridesTheDefault) {
  Transform f = filter("f", "d");
  f.selectivity = 0.5;
  EXPECT_EQ(estimate(f, {{100 * GB, 1000}}), (SizeStats{50 * GB, 500}));
}

TEST(SizeEstimate, UnionAdds) {
  SizeStats out = estimate(union_all("u", {"a", "b"}), {{10 * GB, 100}, {5 * GB, 50}});
  EXPECT_EQ(out, (SizeStats{15 * GB, 150}));
}

TEST(SizeEstimate, ProjectKeepsRetainedColumnFraction) {
  Schema four{{{"a", ScalarType::Int64}, {"b", ScalarType::Int64}, {"c", ScalarType::Int64}, {"d", ScalarType::Int64}}};
  Transform p = transform("p", TransformKind::Project, {"d"}, ProjectParams{{"a", "c"}});
  EXPECT_EQ(estimate(p, {{8 * GB, 1000}}, {four}), (SizeStats{4 * GB, 1000}));
}

TEST(SizeEstimate, AggregateAndJoin) {
  AggregateParams a{{"k"}, {{ExprText::of("SUM(v)"), "total"}}};
  EXPECT_EQ(estimate(transform("g", TransformKind::Aggregate, {"d"}, a), {{100 * GB, 1'000'000}}),
            (SizeStats{5 * GB, 50'000}));
  // rows = max(inputs) x fanout, width = sum of input row widths
  SizeStats j = estimate(join("j", "a", "b"), {{4 * GB, 40'000'000}, {1 * GB, 5'000'000}});
  EXPECT_EQ(j, (SizeStats{12 * GB, 40'000'000}));
}

TEST(SizeEstimate, ExpansionFactors) {
  SelectivityConfig sel;
  sel.jsonparse_expansion = 1.5;
  Transform jp = transform("jp", TransformKind::JsonParse, {"d"}, JsonParseParams{"j", {{"$.a", "a", ScalarType::Int64}}});
  EXPECT_EQ(estimate(jp, {{10 * GB, 7}}, {kv_schema()}, sel), (SizeStats{15 * GB, 7}));
  Transform e = transform("e", TransformKind::Expression, {"d"}, ExpressionParams{{{ExprText::of("v * 2"), "w"}}});
  EXPECT_EQ(estimate(e, {{10 * GB, 7}}), (SizeStats{10 * GB, 7}));
}

TEST(SizeEstimate, ZeroRowsMeansZeroBytes) {
  Transform f = filter("f", "d");
  f.selectivity = 0.0;
  EXPECT_EQ(estimate(f, {{10 * GB, 100}}), SizeStats{});
  f.selectivity = 0.001;
  EXPECT_EQ(estimate(f, {{10 * GB, 100}}), SizeStats{});
}

TEST(SizeEstimate, RejectsBadFactors) {
  SelectivityConfig sel;
  sel.filter_selectivity = -1;
  EXPECT_THROW(estimate(filter("f", "d"), {{1, 1}}, {}, sel), ValidationError);
  Transform f = filter("f", "d");
  f.selectivity = std::numeric_limits<double>::infinity();
  EXPECT_THROW(estimate(f, {{1, 1}}), ValidationError);
}

TEST(CostMove, EgressTimesVolume) {
  Topology t = TopoBuilder().central("0.2").engine("a", "0.05").link("a", "central", "0.02").other_links("0.5").build();
  EXPECT_EQ(cost_move({100 * GB, 1}, "a", "central", t), Money::parse("2.00"));
  EXPECT_EQ(cost_move({100 * GB, 1}, "a", "a", t), Money{});
  EXPECT_EQ(cost_move({0, 0}, "a", "central", t), Money{});
}

TEST(CostExec, RateTimesVolume) {
  Topology t = TopoBuilder().central("0.20").engine("a", "0.05").other_links("0.5").build();
  EXPECT_EQ(cost_exec(filter("f", "d"), {10 * GB, 1}, t.site("a")), Money::parse("0.50"));
  EXPECT_EQ(cost_exec(filter("f", "d"), {0, 0}, t.site("a")), Money{});
  EXPECT_EQ(cost_exec(filter("f", "d"), {10 * GB, 1}, t.central()), Money::parse("2.00"));
}

TEST(TotalCost, SumsItsParts) {
  TotalCost c = TotalCost::of(Money::parse("2.00"), Money::parse("1.00"), Money::parse("0.50"));
  EXPECT_EQ(c.total, Money::parse("3.50"));
}

TEST(TotalCost, CoLocatedPlanHasNoTransfer) {
  Topology t = TopoBuilder().central("0.2").engine("a", "0.05", 1.0, "0.01").other_links("0.5").build();
  Pipeline p({dataset("d1", "a", 10 * GB), dataset("d2", "a", 5 * GB)},
             {filter("f", "d1"), join("j", "f", "d2")}, {"j"});
  PlanContext ctx(p, t);
  Plan plan = build_plan(ctx, {{1, AccessStyle::Move}, {1, AccessStyle::Move}}, Strategy::Localized);
  EXPECT_EQ(plan.estimated.transfer, Money{});
  EXPECT_TRUE(plan.transfer_edges.empty());
}

// Expected values worked out term by term from micro.json / micro-topo.json:
// filters keep 10%, the join emits max(rows) x (sum of row widths).
TEST(TotalCost, MicroFixtureMatchesHandComputation) {
  Pipeline p = fixture_pipeline("micro.json");
  Topology t = fixture_topology("micro-topo.json");
  PlanContext ctx(p, t);
  const std::size_t central = t.index_of("central"), rs = t.index_of("rs"), bq = t.index_of("bq");
  ASSERT_EQ(ctx.order(), (std::vector<std::string>{"eu_customers", "paid_orders", "orders_by_customer"}));

  // all central: compute 0.05 x 55 GB, storage 0.023 x 12 GB, transfer 0.09 x 40 + 0.12 x 10
  Plan all_central = build_plan(ctx, Assignment(3, {central, AccessStyle::Move}), Strategy::Centralized);
  EXPECT_EQ(all_central.estimated.compute, Money::parse("2.75"));
  EXPECT_EQ(all_central.estimated.storage, Money::parse("0.276"));
  EXPECT_EQ(all_central.estimated.transfer, Money::parse("4.8"));
  EXPECT_EQ(all_central.estimated.total, Money::parse("7.826"));

  // filters at home, join central:
  // compute 0.03 x 10 + 0.05 x 5 + 0.04 x 40 = 2.15
  // storage 0.02 x 1 + 0.023 x 12 + 0.024 x 4 = 0.392
  // transfer 0.12 x 1 + 0.09 x 4 = 0.48
  Plan split = build_plan(ctx, {{bq, AccessStyle::Move}, {rs, AccessStyle::Move}, {central, AccessStyle::Move}},
                          Strategy::Hybrid);
  EXPECT_EQ(split.estimated, TotalCost::of(Money::parse("2.15"), Money::parse("0.392"), Money::parse("0.48")));
  EXPECT_EQ(split.estimated.total, Money::parse("3.022"));
}

TEST(TotalCost, RejectsIncompletePlans) {
  Pipeline p = fixture_pipeline("micro.json");
  Topology t = fixture_topology("micro-topo.json");
  Plan plan = plan_centralized(p, t);
  plan.steps.pop_back();
  EXPECT_THROW(total_cost(plan, p, t), ValidationError);
  plan.steps.back().assigned_site.clear();
  EXPECT_THROW(total_cost(plan, t), ValidationError);
}
