#pragma once

// Seeded random pipelines and topologies for property tests.

#include <random>
#include <string>
#include <vector>

#include "fedplan/fedplan.hpp"

namespace fedplan::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t uniform(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[uniform(0, v.size() - 1)];
  }
  Rate rate(std::int64_t max_micros) { return Rate::from_micros(static_cast<std::int64_t>(uniform(0, max_micros))); }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

inline const DialectRegistry& test_dialects() {
  static const DialectRegistry reg = [] {
    DialectRegistry r;
    r.load_directory(FEDPLAN_TEST_FIXTURES "/dialects");
    return r;
  }();
  return reg;
}

struct TopologyShape {
  std::size_t engine_sites = 2;
};

/// Complete topology with `engine_sites` database sites named s0, s1, ...
/// plus a central engine; rates are random with at most three decimals.
inline Topology random_topology(Gen& g, TopologyShape shape) {
  const auto& reg = test_dialects();
  std::vector<std::string> dialects{"identity", "rs-like", "bq-like"};
  std::vector<Site> sites;
  Site central;
  central.id = "central";
  central.provider_label = "etl";
  central.kind = SiteKind::CentralEtl;
  central.compute_rate = Rate::from_micros(static_cast<std::int64_t>(g.uniform(1, 200)) * 1000);
  central.compute_throughput = static_cast<double>(g.uniform(1, 8)) * 0.25;
  central.storage_rate = Rate::from_micros(static_cast<std::int64_t>(g.uniform(0, 50)) * 1000);
  sites.push_back(central);
  std::map<std::string, DialectSpec> used;
  for (std::size_t i = 0; i < shape.engine_sites; ++i) {
    Site s;
    s.id = "s" + std::to_string(i);
    s.provider_label = "cloud" + std::to_string(i);
    s.kind = SiteKind::DatabaseEngine;
    const DialectSpec& d = *reg.find(g.pick(dialects));
    s.dialect = d.id;
    used[d.id] = d;
    s.capabilities = CapabilityProfile::from_dialect(d, g.coin(0.6));
    if (g.coin(0.2)) s.capabilities.supported_kinds.erase(TransformKind::Join);
    s.compute_rate = Rate::from_micros(static_cast<std::int64_t>(g.uniform(1, 200)) * 1000);
    s.compute_throughput = static_cast<double>(g.uniform(1, 8)) * 0.25;
    s.storage_rate = Rate::from_micros(static_cast<std::int64_t>(g.uniform(0, 50)) * 1000);
    if (s.capabilities.supports_federation)
      s.federated_scan_rate = Rate::from_micros(static_cast<std::int64_t>(g.uniform(0, 150)) * 1000);
    sites.push_back(s);
  }
  std::vector<Link> links;
  for (const auto& a : sites)
    for (const auto& b : sites)
      if (a.id != b.id)
        links.push_back({a.id, b.id, Rate::from_micros(static_cast<std::int64_t>(g.uniform(0, 150)) * 1000),
                         static_cast<double>(g.uniform(1, 4)) * 0.5, static_cast<double>(g.uniform(0, 2)) * 0.5});
  return Topology(std::move(sites), std::move(links), {}, std::move(used));
}

struct PipelineShape {
  std::size_t transforms = 4;
  std::size_t datasets = 3;
  double residency_probability = 0.15;
};

namespace detail_gen {

inline std::vector<std::string> columns_of(const Schema& s, std::initializer_list<ScalarType> types) {
  std::vector<std::string> out;
  for (const auto& c : s.columns)
    for (auto t : types)
      if (c.type == t) out.push_back(c.name);
  return out;
}

inline std::string q(const std::string& col) { return "\"" + col + "\""; }

}  // namespace detail_gen

/// Random valid pipeline over the sites of `topo`. Every transform is built
/// against the inferred schemas of its inputs, so the result always passes
/// schema inference.
inline Pipeline random_pipeline(Gen& g, const Topology& topo, PipelineShape shape) {
  using namespace detail_gen;
  std::vector<std::string> site_ids;
  for (const auto& s : topo.sites()) site_ids.push_back(s.id);
  std::vector<Dataset> datasets;
  SchemaMap schemas;
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < shape.datasets; ++i) {
    Dataset d;
    d.id = "d" + std::to_string(i);
    d.site = g.pick(site_ids);
    d.columns.columns = {{"k", ScalarType::Int64},
                         {"p", ScalarType::Int64},
                         {"v", ScalarType::Float64},
                         {"s", ScalarType::String},
                         {"j", ScalarType::Json}};
    std::uint64_t gb = g.uniform(1, 100);
    d.size_bytes = gb * 1'000'000'000ULL;
    d.row_count = d.size_bytes / g.uniform(50, 500);
    if (g.coin(shape.residency_probability)) {
      std::set<std::string> allowed{d.site};
      for (const auto& s : site_ids)
        if (g.coin(0.4)) allowed.insert(s);
      d.allowed_sites = allowed;
    }
    schemas[d.id] = d.columns;
    nodes.push_back(d.id);
    datasets.push_back(std::move(d));
  }
  std::vector<Transform> transforms;
  std::set<std::string> consumed;
  const std::vector<TransformKind> kinds{TransformKind::Filter,   TransformKind::Filter,    TransformKind::Project,
                                         TransformKind::Aggregate, TransformKind::Join,     TransformKind::Join,
                                         TransformKind::Window,   TransformKind::JsonParse, TransformKind::Expression,
                                         TransformKind::Union,    TransformKind::Recursive};
  while (transforms.size() < shape.transforms) {
    Transform t;
    t.id = "t" + std::to_string(transforms.size());
    t.kind = g.pick(kinds);
    const std::string in0 = g.pick(nodes);
    const Schema& s0 = schemas.at(in0);
    auto ints = columns_of(s0, {ScalarType::Int64});
    auto nums = columns_of(s0, {ScalarType::Int64, ScalarType::Float64});
    auto strs = columns_of(s0, {ScalarType::String});
    auto jsons = columns_of(s0, {ScalarType::Json});
    bool ok = true;
    switch (t.kind) {
      case TransformKind::Filter:
        if (nums.empty()) ok = false;
        else t.params = FilterParams{ExprText::of(q(g.pick(nums)) + " > " + std::to_string(g.uniform(0, 100)))};
        t.inputs = {in0};
        break;
      case TransformKind::Project: {
        std::vector<std::string> cols;
        for (const auto& c : s0.columns)
          if (g.coin(0.6)) cols.push_back(c.name);
        if (cols.empty()) cols.push_back(s0.columns.front().name);
        t.params = ProjectParams{cols};
        t.inputs = {in0};
        break;
      }
      case TransformKind::Aggregate: {
        AggregateParams p;
        if (!ints.empty()) p.group_by = {g.pick(ints)};
        if (!nums.empty()) p.aggregates = {{ExprText::of("SUM(" + q(g.pick(nums)) + ")"), "total_" + t.id}};
        else p.aggregates = {{ExprText::of("COUNT(*)"), "n_" + t.id}};
        t.params = p;
        t.inputs = {in0};
        break;
      }
      case TransformKind::Join: {
        std::string in1 = g.pick(nodes);
        auto ints1 = columns_of(schemas.at(in1), {ScalarType::Int64});
        if (in1 == in0 || ints.empty() || ints1.empty()) {
          ok = false;
          break;
        }
        t.params = JoinParams{{{g.pick(ints), g.pick(ints1)}}, JoinType::Inner};
        t.inputs = {in0, in1};
        break;
      }
      case TransformKind::Window: {
        WindowParams p;
        p.function = ExprText::of("ROW_NUMBER()");
        p.alias = "rn_" + t.id;
        if (!ints.empty()) p.order_by = {{g.pick(ints), g.coin()}};
        t.params = p;
        t.inputs = {in0};
        break;
      }
      case TransformKind::JsonParse:
        if (jsons.empty()) ok = false;
        else t.params = JsonParseParams{g.pick(jsons), {{"$.x", "x_" + t.id, ScalarType::Int64}}};
        t.inputs = {in0};
        break;
      case TransformKind::Expression: {
        ExpressionParams p;
        if (!strs.empty()) p.select.push_back({ExprText::of("UPPER(TRIM(" + q(g.pick(strs)) + "))"), "u_" + t.id});
        if (!nums.empty()) p.select.push_back({ExprText::of(q(g.pick(nums)) + " * 2"), "x_" + t.id});
        if (p.select.empty()) ok = false;
        t.params = p;
        t.inputs = {in0};
        break;
      }
      case TransformKind::Union: {
        std::vector<std::string> same;
        for (const auto& n : nodes)
          if (n != in0 && schemas.at(n) == s0) same.push_back(n);
        if (same.empty()) ok = false;
        else t.inputs = {in0, g.pick(same)};
        t.params = UnionParams{g.coin()};
        break;
      }
      case TransformKind::Recursive:
        if (ints.size() < 2) ok = false;
        else t.params = RecursiveParams{ints[0], ints[1], ExprText::of(q(ints[1]) + " IS NULL"), "depth_" + t.id};
        t.inputs = {in0};
        break;
    }
    if (!ok) continue;
    if (g.coin(0.2) && t.kind != TransformKind::Union && t.kind != TransformKind::Project)
      t.selectivity = static_cast<double>(g.uniform(1, 20)) * 0.05;
    std::vector<const Schema*> in;
    for (const auto& i : t.inputs) in.push_back(&schemas.at(i));
    try {
      schemas[t.id] = fedplan::detail::infer_one(t, in);
    } catch (const ValidationError&) {
      continue;  // e.g. a join whose renamed columns collide
    }
    for (const auto& i : t.inputs) consumed.insert(i);
    nodes.push_back(t.id);
    transforms.push_back(std::move(t));
  }
  std::vector<std::string> sinks;
  for (const auto& t : transforms)
    if (!consumed.count(t.id)) sinks.push_back(t.id);
  return Pipeline(std::move(datasets), std::move(transforms), std::move(sinks));
}

/// Copy of `topo` with every money rate multiplied by `factor`.
inline Topology scale_rates(const Topology& topo, std::int64_t factor) {
  std::vector<Site> sites = topo.sites();
  for (auto& s : sites) {
    s.compute_rate = s.compute_rate.scaled(factor);
    s.storage_rate = s.storage_rate.scaled(factor);
    s.federated_scan_rate = s.federated_scan_rate.scaled(factor);
  }
  std::vector<Link> links = topo.links();
  for (auto& l : links) l.egress_rate = l.egress_rate.scaled(factor);
  return Topology(std::move(sites), std::move(links), topo.selectivity(), topo.dialects());
}

}  // namespace fedplan::testing
