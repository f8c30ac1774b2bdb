#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fedplan/dialect.hpp"
#include "fedplan/ir.hpp"
#include "fedplan/json_util.hpp"
#include "fedplan/money.hpp"

namespace fedplan {

struct CapabilityProfile {
  std::set<TransformKind> supported_kinds;
  std::set<std::string> supported_functions;
  bool supports_federation = false;

  /// Everything the catalog offers; the central ETL engine's profile.
  static CapabilityProfile universal() {
    CapabilityProfile p;
    for (auto k : kAllTransformKinds) p.supported_kinds.insert(k);
    for (const auto& f : LogicalFunctionCatalog::standard().names()) p.supported_functions.insert(f);
    return p;
  }

  static CapabilityProfile from_dialect(const DialectSpec& d, bool federation) {
    CapabilityProfile p;
    for (auto k : kAllTransformKinds)
      if (d.supports(k)) p.supported_kinds.insert(k);
    for (const auto& f : LogicalFunctionCatalog::standard().names())
      if (!d.unsupported_functions.count(f)) p.supported_functions.insert(f);
    p.supports_federation = federation;
    return p;
  }

  friend bool operator==(const CapabilityProfile&, const CapabilityProfile&) = default;
};

enum class SiteKind { DatabaseEngine, CentralEtl };

inline std::string_view to_string(SiteKind k) { return k == SiteKind::CentralEtl ? "CentralEtl" : "DatabaseEngine"; }

struct Site {
  std::string id;
  std::string provider_label;
  SiteKind kind = SiteKind::DatabaseEngine;
  std::string dialect;  // DatabaseEngine only
  CapabilityProfile capabilities;
  Rate compute_rate;            // per GB processed
  double compute_throughput = 1.0;  // GB per second
  Rate storage_rate;            // per GB materialized per run
  Rate federated_scan_rate;     // per GB scanned remotely

  bool is_central() const { return kind == SiteKind::CentralEtl; }
};

struct Link {
  std::string src;
  std::string dst;
  Rate egress_rate;        // per GB
  double bandwidth = 1.0;  // GB per second
  double latency = 0.0;    // seconds per transfer
};

/// Cardinality factors used when estimating intermediate sizes.
struct SelectivityConfig {
  double filter_selectivity = 0.1;
  double aggregate_reduction = 0.05;
  double join_fanout = 1.0;
  double jsonparse_expansion = 1.2;
  double window_expansion = 1.0;
  double expression_expansion = 1.0;
  double recursive_expansion = 1.0;

  void validate() const {
    for (double v : {filter_selectivity, aggregate_reduction, join_fanout, jsonparse_expansion, window_expansion,
                     expression_expansion, recursive_expansion})
      if (!std::isfinite(v) || v < 0) throw ValidationError("selectivity parameters must be finite and non-negative");
  }
};

class Topology {
 public:
  Topology() = default;

  Topology(std::vector<Site> sites, std::vector<Link> links, SelectivityConfig selectivity = {},
           std::map<std::string, DialectSpec> dialects = {})
      : sites_(std::move(sites)), links_(std::move(links)), selectivity_(selectivity), dialects_(std::move(dialects)) {
    validate();
  }

  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<Link>& links() const { return links_; }
  const SelectivityConfig& selectivity() const { return selectivity_; }
  const std::map<std::string, DialectSpec>& dialects() const { return dialects_; }

  const Site* find_site(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &sites_[it->second];
  }
  const Site& site(std::string_view id) const {
    const Site* s = find_site(id);
    if (!s) throw ValidationError("unknown site '" + std::string(id) + "'");
    return *s;
  }
  std::size_t index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) throw ValidationError("unknown site '" + std::string(id) + "'");
    return it->second;
  }
  const Site& central() const { return sites_[central_]; }
  std::size_t central_index() const { return central_; }

  const Link& link(std::string_view src, std::string_view dst) const {
    return links_[link_matrix_[index_of(src) * sites_.size() + index_of(dst)]];
  }
  const Link& link(std::size_t src, std::size_t dst) const { return links_[link_matrix_[src * sites_.size() + dst]]; }

  const DialectSpec& dialect_of(const Site& s) const {
    auto it = dialects_.find(s.dialect);
    if (it == dialects_.end()) throw ValidationError("site '" + s.id + "' has no dialect");
    return it->second;
  }

 private:
  void validate() {
    if (sites_.empty()) throw ValidationError("topology has no sites");
    if (sites_.size() > 64) throw ValidationError("topology supports at most 64 sites");
    std::size_t centrals = 0;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      Site& s = sites_[i];
      if (!detail::valid_id(s.id)) throw ValidationError("invalid site id '" + s.id + "'");
      if (!index_.emplace(s.id, i).second) throw ValidationError("duplicate site id '" + s.id + "'");
      if (!(s.compute_throughput > 0) || std::isnan(s.compute_throughput))
        throw ValidationError("site '" + s.id + "': compute_throughput must be > 0");
      if (s.is_central()) {
        ++centrals;
        central_ = i;
        if (!s.dialect.empty()) throw ValidationError("central site '" + s.id + "' must not declare a dialect");
        s.capabilities = CapabilityProfile::universal();
        if (s.federated_scan_rate.micros_per_gb() != 0)
          throw ValidationError("central site '" + s.id + "' cannot host federated scans");
      } else {
        auto it = dialects_.find(s.dialect);
        if (it == dialects_.end()) throw ValidationError("site '" + s.id + "': unknown dialect '" + s.dialect + "'");
        const DialectSpec& d = it->second;
        for (auto k : s.capabilities.supported_kinds)
          if (!d.supports(k))
            throw ValidationError("site '" + s.id + "': kind " + std::string(to_string(k)) +
                                  " is unsupported by dialect '" + d.id + "'");
        for (const auto& f : s.capabilities.supported_functions) {
          if (!LogicalFunctionCatalog::standard().contains(f))
            throw ValidationError("site '" + s.id + "': unknown function '" + f + "'");
          if (d.unsupported_functions.count(f))
            throw ValidationError("site '" + s.id + "': function " + f + " is unsupported by dialect '" + d.id + "'");
        }
        if (!s.capabilities.supports_federation && s.federated_scan_rate.micros_per_gb() != 0)
          throw ValidationError("site '" + s.id + "': federated_scan_rate must be 0 without federation support");
      }
    }
    if (centrals != 1)
      throw ValidationError("topology must have exactly one CentralEtl site (found " + std::to_string(centrals) + ")");
    const std::size_t n = sites_.size();
    link_matrix_.assign(n * n, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < links_.size(); ++i) {
      const Link& l = links_[i];
      std::string name = "link " + l.src + "->" + l.dst;
      if (!index_.count(l.src) || !index_.count(l.dst)) throw ValidationError(name + ": unknown site");
      if (l.src == l.dst) throw ValidationError(name + ": self-link (intra-site movement is free)");
      if (!(l.bandwidth > 0) || std::isnan(l.bandwidth)) throw ValidationError(name + ": bandwidth must be > 0");
      if (!(l.latency >= 0) || !std::isfinite(l.latency)) throw ValidationError(name + ": latency must be >= 0");
      std::size_t& slot = link_matrix_[index_.at(l.src) * n + index_.at(l.dst)];
      if (slot != static_cast<std::size_t>(-1)) throw ValidationError(name + ": duplicate link");
      slot = i;
    }
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b && link_matrix_[a * n + b] == static_cast<std::size_t>(-1))
          throw ValidationError("missing link " + sites_[a].id + "->" + sites_[b].id);
    selectivity_.validate();
  }

  std::vector<Site> sites_;
  std::vector<Link> links_;
  SelectivityConfig selectivity_;
  std::map<std::string, DialectSpec> dialects_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::size_t> link_matrix_;
  std::size_t central_ = 0;
};

/// A transform can run natively at `s` when the kind and every function it
/// calls are in the site's profile. The central engine runs everything.
inline bool is_pushable(const Transform& t, const Site& s) {
  if (s.is_central()) return true;
  if (!s.capabilities.supported_kinds.count(t.kind)) return false;
  for (const auto& f : referenced_functions(t))
    if (!s.capabilities.supported_functions.count(f)) return false;
  return true;
}

inline Topology topology_from_json(const nlohmann::json& doc, const DialectRegistry& registry) {
  using namespace detail;
  check_keys(doc, "topology", {"sites", "links"}, {"selectivity"});
  if (!doc.at("sites").is_array() || !doc.at("links").is_array())
    throw ValidationError("topology: 'sites' and 'links' must be arrays");
  std::vector<Site> sites;
  std::map<std::string, DialectSpec> dialects;
  for (const auto& sj : doc.at("sites")) {
    std::string where = "site";
    if (sj.is_object() && sj.contains("id") && sj["id"].is_string()) where += " '" + sj["id"].get<std::string>() + "'";
    check_keys(sj, where,
               {"id", "provider_label", "kind", "compute_rate", "compute_throughput", "storage_rate",
                "federated_scan_rate"},
               {"dialect", "capabilities"});
    Site s;
    s.id = get_string(sj, "id", where);
    s.provider_label = get_string(sj, "provider_label", where);
    std::string kind = get_string(sj, "kind", where);
    if (kind == "CentralEtl") s.kind = SiteKind::CentralEtl;
    else if (kind == "DatabaseEngine") s.kind = SiteKind::DatabaseEngine;
    else throw ValidationError(where + ": unknown kind '" + kind + "'");
    s.compute_rate = Rate::parse(get_decimal_string(sj, "compute_rate", where));
    s.compute_throughput = get_number(sj, "compute_throughput", where);
    s.storage_rate = Rate::parse(get_decimal_string(sj, "storage_rate", where));
    s.federated_scan_rate = Rate::parse(get_decimal_string(sj, "federated_scan_rate", where));
    if (s.is_central()) {
      if (sj.contains("dialect") || sj.contains("capabilities"))
        throw ValidationError(where + ": the CentralEtl site takes no dialect or capabilities");
    } else {
      if (!sj.contains("dialect")) throw ValidationError(where + ": missing key 'dialect'");
      s.dialect = get_string(sj, "dialect", where);
      const DialectSpec* d = registry.find(s.dialect);
      if (!d) throw ValidationError(where + ": unknown dialect '" + s.dialect + "'");
      dialects[d->id] = *d;
      bool federation = false;
      nlohmann::json caps = sj.contains("capabilities") ? sj.at("capabilities") : nlohmann::json::object();
      check_keys(caps, where + ".capabilities", {}, {"supported_kinds", "supported_functions", "supports_federation"});
      if (caps.contains("supports_federation")) federation = get_bool(caps, "supports_federation", where);
      // the dialect is the source of truth; explicit lists may only narrow it
      s.capabilities = CapabilityProfile::from_dialect(*d, federation);
      if (caps.contains("supported_kinds")) {
        s.capabilities.supported_kinds.clear();
        for (const auto& k : get_string_list(caps, "supported_kinds", where))
          s.capabilities.supported_kinds.insert(parse_transform_kind(k));
      }
      if (caps.contains("supported_functions")) {
        auto fs = get_string_list(caps, "supported_functions", where);
        s.capabilities.supported_functions = std::set<std::string>(fs.begin(), fs.end());
      }
    }
    sites.push_back(std::move(s));
  }
  std::vector<Link> links;
  for (const auto& lj : doc.at("links")) {
    check_keys(lj, "link", {"src", "dst", "egress_rate", "bandwidth", "latency"});
    Link l;
    l.src = get_string(lj, "src", "link");
    l.dst = get_string(lj, "dst", "link");
    std::string where = "link " + l.src + "->" + l.dst;
    l.egress_rate = Rate::parse(get_decimal_string(lj, "egress_rate", where));
    l.bandwidth = get_number(lj, "bandwidth", where);
    l.latency = get_number(lj, "latency", where);
    links.push_back(std::move(l));
  }
  SelectivityConfig sel;
  if (doc.contains("selectivity")) {
    const auto& sj = doc.at("selectivity");
    check_keys(sj, "selectivity", {},
               {"filter_selectivity", "aggregate_reduction", "join_fanout", "jsonparse_expansion", "window_expansion",
                "expression_expansion", "recursive_expansion"});
    auto opt = [&](const char* key, double& field) {
      if (sj.contains(key)) field = get_number(sj, key, "selectivity");
    };
    opt("filter_selectivity", sel.filter_selectivity);
    opt("aggregate_reduction", sel.aggregate_reduction);
    opt("join_fanout", sel.join_fanout);
    opt("jsonparse_expansion", sel.jsonparse_expansion);
    opt("window_expansion", sel.window_expansion);
    opt("expression_expansion", sel.expression_expansion);
    opt("recursive_expansion", sel.recursive_expansion);
  }
  return Topology(std::move(sites), std::move(links), sel, std::move(dialects));
}

inline Topology load_topology(std::string_view text, const DialectRegistry& registry = DialectRegistry{}) {
  return topology_from_json(detail::parse_json_document(text, "topology"), registry);
}

}  // namespace fedplan
