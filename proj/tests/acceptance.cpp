// Acceptance runner: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <unistd.h>

#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace fedplan;
using namespace fedplan::testing;

namespace {

constexpr std::uint64_t kTripleSeed = 0x5eed0001;
constexpr std::uint64_t kOracleSeed = 0x5eed0002;
constexpr std::uint64_t kLargeSeed = 0x5eed0003;
constexpr std::uint64_t kScaleSeed = 0x5eed0004;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

/// Plans whose accounting is checked by criterion 6.
struct PlannedCase {
  std::string name;
  const Pipeline* pipeline;
  const Topology* topology;
  Plan plan;
};

struct Corpus {
  std::vector<Scenario> scenarios;  // fixtures, oracle family, large pipelines
  std::size_t oracle_begin = 0, oracle_end = 0;
};

Corpus build_corpus() {
  Corpus c;
  c.scenarios = fixture_scenarios();
  Gen g(kOracleSeed);
  c.oracle_begin = c.scenarios.size();
  for (int i = 0; i < 240; ++i) {
    Topology topo = random_topology(g, {1 + g.uniform(0, 2)});
    PipelineShape shape;
    shape.transforms = 1 + g.uniform(0, 5);
    shape.datasets = 1 + g.uniform(0, 2);
    Pipeline p = random_pipeline(g, topo, shape);
    c.scenarios.push_back({"oracle-" + std::to_string(i), std::move(p), std::move(topo)});
  }
  c.oracle_end = c.scenarios.size();
  Gen big(kLargeSeed);
  for (int i = 0; i < 20; ++i) {
    Topology topo = random_topology(big, {2 + big.uniform(0, 2)});
    PipelineShape shape;
    shape.transforms = 11 + big.uniform(0, 5);
    shape.datasets = 2 + big.uniform(0, 2);
    shape.residency_probability = 0.05;
    Pipeline p = random_pipeline(big, topo, shape);
    c.scenarios.push_back({"large-" + std::to_string(i), std::move(p), std::move(topo)});
  }
  return c;
}

Outcome criterion1() {
  auto t0 = Clock::now();
  Outcome o;
  std::mt19937_64 rng(kTripleSeed);
  std::uniform_int_distribution<std::int64_t> units(0, 1'000'000'000'000'000'000LL);
  int mismatches = 0, ties = 0;
  auto check = [&](Money m, Money r, Money l) {
    bool direct = m + r > l;
    PushDecision d = decide_pushdown({m, r, l});
    if ((d == PushDecision::PushDown) != direct) ++mismatches;
  };
  for (int i = 0; i < 1000; ++i) check(Money::from_units(units(rng)), Money::from_units(units(rng)), Money::from_units(units(rng)));
  for (int i = 0; i < 25; ++i) {
    Money m = Money::from_units(units(rng)), r = Money::from_units(units(rng));
    if (i < 5) m = Money{};
    if (i >= 5 && i < 10) r = Money{};
    Money l = m + r;
    if (decide_pushdown({m, r, l}) == PushDecision::NoPushDown) ++ties;
    check(m, r, l);
  }
  double elapsed = seconds_since(t0);
  if (mismatches) o.fail(std::to_string(mismatches) + " mismatches");
  if (ties != 25) o.fail("only " + std::to_string(ties) + "/25 ties resolved to NoPushDown");
  if (elapsed >= 1.0) o.fail("took " + std::to_string(elapsed) + " s");
  std::ostringstream d;
  d << "1000 triples + 25 ties, seed 0x" << std::hex << kTripleSeed << std::dec << ", " << elapsed << " s";
  if (o.pass) o.detail = d.str();
  return o;
}

Outcome criterion2(const Corpus& c, std::vector<PlannedCase>& planned) {
  auto t0 = Clock::now();
  Outcome o;
  std::size_t feasible = 0, infeasible = 0, argmin_equal = 0;
  for (std::size_t i = c.oracle_begin; i < c.oracle_end; ++i) {
    const Scenario& s = c.scenarios[i];
    OracleResult truth = BruteForceOracle(s.pipeline, s.topology).solve();
    std::optional<Plan> plan;
    try {
      plan = plan_optimal(s.pipeline, s.topology);
    } catch (const InfeasibleError&) {
    }
    if (!truth.feasible) {
      ++infeasible;
      if (plan) o.fail(s.name + ": planner found a plan the oracle calls infeasible");
      continue;
    }
    ++feasible;
    if (!plan) {
      o.fail(s.name + ": planner reported infeasible, oracle found " + truth.best.to_string());
      continue;
    }
    if (plan->estimated.total != truth.best)
      o.fail(s.name + ": planner " + plan->estimated.total.to_string() + " vs oracle " + truth.best.to_string());
    if (choices_of(*plan) == truth.argmin) ++argmin_equal;
    planned.push_back({s.name, &s.pipeline, &s.topology, *plan});
  }
  double elapsed = seconds_since(t0);
  if (feasible < 200) o.fail("only " + std::to_string(feasible) + " feasible pipelines");
  if (elapsed >= 30.0) o.fail("took " + std::to_string(elapsed) + " s");
  if (o.pass) {
    std::ostringstream d;
    d << feasible << " pipelines match exactly (" << argmin_equal << " identical argmin, " << infeasible
      << " infeasible agreed), seed 0x" << std::hex << kOracleSeed << std::dec << ", " << elapsed << " s";
    o.detail = d.str();
  }
  return o;
}

Outcome criterion3(const Corpus& c, std::vector<PlannedCase>& planned) {
  Outcome o;
  std::size_t checked = 0, comparisons = 0;
  for (const auto& s : c.scenarios) {
    PlanContext ctx(s.pipeline, s.topology);
    std::optional<Plan> best;
    try {
      best = plan_optimal(ctx);
    } catch (const InfeasibleError&) {
      continue;
    }
    ++checked;
    for (Strategy st : {Strategy::Centralized, Strategy::Localized, Strategy::Hybrid, Strategy::Federated}) {
      try {
        Plan h = make_plan(ctx, st);
        ++comparisons;
        if (best->estimated.total > h.estimated.total)
          o.fail(s.name + ": optimal " + best->estimated.total.to_string() + " > " + std::string(to_string(st)) + " " +
                 h.estimated.total.to_string());
        if (s.name.rfind("oracle-", 0) != 0) planned.push_back({s.name + "/" + std::string(to_string(st)), &s.pipeline, &s.topology, h});
      } catch (const InfeasibleError&) {
      }
    }
    if (s.name.rfind("oracle-", 0) != 0) planned.push_back({s.name + "/optimal", &s.pipeline, &s.topology, *best});
  }
  if (o.pass)
    o.detail = std::to_string(checked) + " scenarios, " + std::to_string(comparisons) + " comparisons, 0 violations";
  return o;
}

Outcome criterion4(std::vector<PlannedCase>& planned, const Pipeline& p, const Topology& topo) {
  auto t0 = Clock::now();
  Outcome o;
  PlanContext ctx(p, topo);
  Plan pre = plan_centralized(ctx);
  Plan post = plan_optimal(ctx);
  SimulationReport a = simulate(pre, p, topo), b = simulate(post, p, topo);
  ImprovementTable t = compare(a, b);
  if (a.total_runtime != 11100.0) o.fail("baseline runtime " + std::to_string(a.total_runtime) + " s, want 11100");
  if (a.cost.total != Money::from_whole(212)) o.fail("baseline cost " + a.cost.total.to_string() + ", want 212");
  auto in_range = [&](const char* metric, double lo, double hi) {
    const ImprovementRow* r = t.find(metric);
    if (!r || !r->improvement) {
      o.fail(std::string(metric) + " missing");
      return 0.0;
    }
    if (*r->improvement < lo || *r->improvement > hi)
      o.fail(std::string(metric) + " " + std::to_string(*r->improvement) + "% outside [" + std::to_string(lo) + ", " +
             std::to_string(hi) + "]");
    return *r->improvement;
  };
  double rt = in_range("Total runtime", 30, 40);
  double vol = in_range("Cross-cloud volume", 15, 25);
  double cost = in_range("Cost per ETL run", 14, 24);
  double elapsed = seconds_since(t0);
  if (elapsed >= 5.0) o.fail("took " + std::to_string(elapsed) + " s");
  planned.push_back({"case-study/centralized", &p, &topo, pre});
  planned.push_back({"case-study/optimal", &p, &topo, post});
  if (o.pass) {
    std::ostringstream d;
    d.setf(std::ios::fixed);
    d.precision(1);
    d << "runtime -" << rt << "%, volume -" << vol << "%, cost -" << cost << "% (baseline 11100 s, 212)";
    o.detail = d.str();
  }
  return o;
}

std::vector<std::string> sql_tokens(const std::string& sql) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < sql.size()) {
    char ch = sql[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '"' || ch == '`' || ch == '\'') {
      std::size_t j = sql.find(ch, i + 1);
      j = j == std::string::npos ? sql.size() : j + 1;
      out.push_back(sql.substr(i, j - i));
      i = j;
    } else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.') {
      std::size_t j = i;
      while (j < sql.size() && (std::isalnum(static_cast<unsigned char>(sql[j])) || sql[j] == '_' || sql[j] == '.')) ++j;
      out.push_back(sql.substr(i, j - i));
      i = j;
    } else if ((ch == '<' || ch == '>' || ch == '!') && i + 1 < sql.size() && sql[i + 1] == '=') {
      out.push_back(sql.substr(i, 2));
      i += 2;
    } else {
      out.push_back(std::string(1, ch));
      ++i;
    }
  }
  return out;
}

bool contains_sequence(const std::vector<std::string>& hay, const std::string& needle) {
  std::vector<std::string> n = sql_tokens(needle);
  return std::search(hay.begin(), hay.end(), n.begin(), n.end()) != hay.end();
}

Outcome criterion5() {
  Outcome o;
  Pipeline p = fixture_pipeline("cleanname.json");
  SchemaMap schemas = infer_schemas(p);
  std::vector<const Transform*> group;
  for (const auto& id : topo_order(p)) group.push_back(p.find_transform(id));
  const DialectSpec& identity = *test_dialects().find("identity");
  const DialectSpec& bq = *test_dialects().find("bq-like");
  std::string a = lower_subgraph(group, schemas, identity);
  std::string b = lower_subgraph(group, schemas, bq);
  auto ta = sql_tokens(a);
  if (!contains_sequence(ta, "UPPER ( TRIM ( \"name\" ) ) AS \"CleanName\""))
    o.fail("identity SQL lacks UPPER(TRIM(\"name\")) AS \"CleanName\"");
  if (!contains_sequence(ta, "LENGTH ( \"name\" ) > 3")) o.fail("identity SQL lacks LENGTH(\"name\") > 3");
  auto tb = sql_tokens(b);
  if (!contains_sequence(tb, "CHAR_LENGTH ( `name` ) > 3")) o.fail("bq-like SQL lacks CHAR_LENGTH(`name`) > 3");
  if (std::find(tb.begin(), tb.end(), "LENGTH") != tb.end()) o.fail("bq-like SQL still calls LENGTH");
  for (int i = 0; i < 5; ++i)
    if (lower_subgraph(group, schemas, identity) != a || lower_subgraph(group, schemas, bq) != b)
      o.fail("lowering is not byte-stable");
  if (o.pass) o.detail = "identity and bq-like token checks hold, 5 repeat lowerings byte-identical";
  return o;
}

Outcome criterion6(const std::vector<PlannedCase>& planned) {
  Outcome o;
  for (const auto& c : planned) {
    SimulationReport r = simulate(c.plan, *c.pipeline, *c.topology);
    if (r.cost != c.plan.estimated) o.fail(c.name + ": simulated " + r.cost.total.to_string() + " vs estimated " + c.plan.estimated.total.to_string());
    std::uint64_t edges = 0;
    for (const auto& e : c.plan.transfer_edges) edges += e.size.size_bytes;
    if (r.cross_cloud_volume != edges) o.fail(c.name + ": volume differs from transfer edges");
    for (const TotalCost* t : std::initializer_list<const TotalCost*>{&r.cost, &c.plan.estimated})
      if (t->total != t->compute + t->storage + t->transfer) o.fail(c.name + ": total is not the sum of its parts");
  }
  if (o.pass) o.detail = std::to_string(planned.size()) + " plans, all three identities exact";
  return o;
}

Outcome criterion7() {
  Outcome o;
  Gen g(kScaleSeed);
  std::size_t pairs = 0, fixed_checks = 0;
  while (pairs < 100) {
    Topology topo = random_topology(g, {1 + g.uniform(0, 2)});
    PipelineShape shape;
    shape.transforms = 1 + g.uniform(0, 5);
    shape.datasets = 1 + g.uniform(0, 2);
    Pipeline p = random_pipeline(g, topo, shape);
    PlanContext ctx(p, topo);
    std::vector<Plan> plans;
    for (Strategy st : kAllStrategies) {
      try {
        plans.push_back(make_plan(ctx, st));
      } catch (const InfeasibleError&) {
      }
    }
    if (plans.empty()) continue;
    ++pairs;
    const bool has_optimal = plans.back().strategy == Strategy::Optimal;
    for (std::int64_t factor : {2, 10}) {
      Topology scaled = scale_rates(topo, factor);
      PlanContext sctx(p, scaled);
      for (const auto& plan : plans) {
        Plan again = build_plan(sctx, assignment_of(plan, ctx), plan.strategy);
        ++fixed_checks;
        if (again.estimated.total < plan.estimated.total)
          o.fail("pair " + std::to_string(pairs) + ": cost decreased under factor " + std::to_string(factor));
        if (again.estimated.total != plan.estimated.total * factor)
          o.fail("pair " + std::to_string(pairs) + ": cost did not scale exactly by " + std::to_string(factor));
      }
      if (has_optimal) {
        Plan opt = plan_optimal(sctx);
        if (!(assignment_of(opt, sctx) == assignment_of(plans.back(), ctx)))
          o.fail("pair " + std::to_string(pairs) + ": optimal assignment changed under factor " + std::to_string(factor));
      }
    }
  }
  if (o.pass) {
    std::ostringstream d;
    d << pairs << " pairs, " << fixed_checks << " fixed-plan checks, seed 0x" << std::hex << kScaleSeed;
    o.detail = d.str();
  }
  return o;
}

Outcome criterion8() {
  Outcome o;
  namespace fs = std::filesystem;
  fs::path root = fs::temp_directory_path() / ("fedplan-acceptance-" + std::to_string(::getpid()));
  const std::vector<std::string> files{"pre.json", "post.json", "pre-report.json", "post-report.json", "compare.json",
                                       "compare.txt", "compare.csv"};
  std::vector<std::vector<std::string>> runs;
  for (int run = 0; run < 2; ++run) {
    fs::path dir = root / std::to_string(run);
    fs::create_directories(dir);
    auto d = [&](const std::string& f) { return "'" + (dir / f).string() + "'"; };
    const std::string io = "--pipeline case-study.json --topology case-study-topo.json";
    std::vector<std::string> cmds{
        "plan " + io + " --strategy centralized --output " + d("pre.json"),
        "plan " + io + " --strategy optimal --output " + d("post.json"),
        "simulate " + io + " --plan " + d("pre.json") + " --output " + d("pre-report.json"),
        "simulate " + io + " --plan " + d("post.json") + " --output " + d("post-report.json"),
        "compare " + d("pre-report.json") + " " + d("post-report.json") + " --output " + d("compare.json"),
        "compare " + d("pre-report.json") + " " + d("post-report.json") + " --format text --output " + d("compare.txt"),
        "compare " + d("pre-report.json") + " " + d("post-report.json") + " --format csv --output " + d("compare.csv")};
    for (const auto& c : cmds)
      if (int rc = run_cli(c).status; rc != 0) o.fail("`fedplan " + c + "` exited " + std::to_string(rc));
    std::vector<std::string> contents;
    for (const auto& f : files) contents.push_back(fs::exists(dir / f) ? read_text((dir / f).string()) : "");
    runs.push_back(contents);
  }
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (runs[0][i].empty()) o.fail(files[i] + " was not written");
    if (runs[0][i] != runs[1][i]) o.fail(files[i] + " differs between runs");
  }
  fs::remove_all(root);
  if (o.pass) o.detail = std::to_string(files.size()) + " documents byte-identical across two runs";
  return o;
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int n, const std::string& title, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << " (" << title << "): " << o.detail << std::endl;
  };

  Corpus corpus = build_corpus();
  std::vector<PlannedCase> planned;
  Pipeline case_p = fixture_pipeline("case-study.json");
  Topology case_t = fixture_topology("case-study-topo.json");

  report(1, "push-down decision", criterion1);
  report(2, "brute-force oracle equivalence", [&] { return criterion2(corpus, planned); });
  report(3, "dominance", [&] { return criterion3(corpus, planned); });
  report(4, "case-study reproduction", [&] { return criterion4(planned, case_p, case_t); });
  report(5, "CleanName golden SQL", criterion5);
  report(6, "accounting identities", [&] { return criterion6(planned); });
  report(7, "monotonicity and scaling invariance", criterion7);
  report(8, "determinism", criterion8);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
