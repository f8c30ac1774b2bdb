#include <openssl/evp.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fedplan/fedplan.hpp"

#ifndef FEDPLAN_FIXTURES_DIR
#define FEDPLAN_FIXTURES_DIR "fixtures"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "0.1.0";

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

fs::path fixtures_dir() {
  if (const char* env = std::getenv("FEDPLAN_FIXTURES"); env && *env) return env;
  return FEDPLAN_FIXTURES_DIR;
}

// Bare file names that do not exist locally are looked up in the fixtures directory.
fs::path resolve(const std::string& arg) {
  fs::path p(arg);
  if (fs::exists(p) || p.has_parent_path()) return p;
  fs::path candidate = fixtures_dir() / p;
  return fs::exists(candidate) ? candidate : p;
}

std::string read_file(const std::string& arg) {
  fs::path p = resolve(arg);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("file not found: " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out = "sha256:";
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// Digest of the canonical (key-sorted, compact) form, so formatting edits do
// not make a plan stale but content edits do.
std::string digest_of(const json& doc) { return sha256_hex(doc.dump()); }

fedplan::DialectRegistry load_registry() {
  fedplan::DialectRegistry reg;
  fs::path dir = fixtures_dir() / "dialects";
  if (fs::is_directory(dir)) reg.load_directory(dir);
  return reg;
}

struct Inputs {
  json pipeline_doc, topology_doc;
  fedplan::Pipeline pipeline;
  fedplan::Topology topology;
  std::string pipeline_digest, topology_digest;
};

Inputs load_inputs(const std::string& pipeline_path, const std::string& topology_path) {
  if (pipeline_path.empty()) throw InputError("--pipeline is required");
  if (topology_path.empty()) throw InputError("--topology is required");
  std::string ptext = read_file(pipeline_path);
  std::string ttext = read_file(topology_path);
  Inputs in;
  in.pipeline_doc = fedplan::detail::parse_json_document(ptext, "pipeline");
  in.topology_doc = fedplan::detail::parse_json_document(ttext, "topology");
  in.pipeline = fedplan::parse_pipeline(ptext);
  in.topology = fedplan::topology_from_json(in.topology_doc, load_registry());
  in.pipeline_digest = digest_of(in.pipeline_doc);
  in.topology_digest = digest_of(in.topology_doc);
  return in;
}

json envelope(const char* kind, const Inputs& in) {
  return {{"tool_version", kToolVersion},
          {"kind", kind},
          {"pipeline_digest", in.pipeline_digest},
          {"topology_digest", in.topology_digest}};
}

void emit(const std::string& text, const std::string& output) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(output, std::ios::binary);
  if (!out) throw InputError("cannot write " + output);
  out << text;
}

json read_document(const std::string& path, const char* kind) {
  json doc = fedplan::detail::parse_json_document(read_file(path), kind);
  if (!doc.is_object() || !doc.contains("kind") || doc["kind"] != kind)
    throw InputError(path + ": not a " + std::string(kind) + " document");
  return doc;
}

std::string plan_text(const fedplan::Plan& plan) {
  std::ostringstream os;
  os << "strategy " << to_string(plan.strategy) << "\n";
  for (const auto& s : plan.steps) {
    os << "  " << s.transform_id << " @ " << s.assigned_site << (s.materialized ? " [materialized]" : "") << "\n";
    for (const auto& a : s.access) os << "      " << a.input << " from " << a.from_site << " (" << to_string(a.mode) << ")\n";
  }
  for (const auto& e : plan.transfer_edges) os << "  edge " << e.id() << " " << e.size.size_bytes << " bytes\n";
  os << "estimated compute " << plan.estimated.compute.to_string() << " storage " << plan.estimated.storage.to_string()
     << " transfer " << plan.estimated.transfer.to_string() << " total " << plan.estimated.total.to_string() << "\n";
  for (const auto& g : plan.sql_per_group)
    os << "-- " << g.group << " on " << g.site << " (" << g.dialect << ") -> " << g.output << "\n" << g.sql;
  return os.str();
}

struct Options {
  std::string pipeline, topology, strategy = "optimal", plan, format = "json", output;
  std::vector<std::string> reports;
};

int cmd_plan(const Options& o) {
  Inputs in = load_inputs(o.pipeline, o.topology);
  fedplan::PlanContext ctx(in.pipeline, in.topology);
  fedplan::Plan plan = fedplan::make_plan(ctx, fedplan::parse_strategy(o.strategy));
  fedplan::attach_sql(plan, ctx);
  if (o.format == "text") {
    emit(plan_text(plan), o.output);
  } else if (o.format == "json") {
    json doc = envelope("plan", in);
    doc["plan"] = fedplan::plan_to_json(plan);
    emit(doc.dump(2) + "\n", o.output);
  } else {
    throw InputError("plan supports --format json or text");
  }
  return 0;
}

int cmd_simulate(const Options& o) {
  Inputs in = load_inputs(o.pipeline, o.topology);
  if (o.plan.empty()) throw InputError("--plan is required");
  json doc = read_document(o.plan, "plan");
  if (doc.value("pipeline_digest", "") != in.pipeline_digest || doc.value("topology_digest", "") != in.topology_digest)
    throw fedplan::PlanMismatchError("plan was produced for a different pipeline or topology");
  fedplan::Plan plan = fedplan::plan_from_json(doc.at("plan"));
  fedplan::SimulationReport r = fedplan::simulate(plan, in.pipeline, in.topology);
  if (o.format == "csv") {
    emit(fedplan::report_to_csv(r), o.output);
  } else if (o.format == "text") {
    emit(fedplan::report_to_text(r), o.output);
  } else {
    json out = envelope("simulation_report", in);
    out["report"] = fedplan::report_to_json(r);
    emit(out.dump(2) + "\n", o.output);
  }
  return 0;
}

int cmd_compare(const Options& o) {
  if (o.reports.size() != 2) throw InputError("compare takes exactly two report files");
  json a = read_document(o.reports[0], "simulation_report");
  json b = read_document(o.reports[1], "simulation_report");
  if (a.value("pipeline_digest", "") != b.value("pipeline_digest", ""))
    throw fedplan::ValidationError("reports come from different pipelines");
  fedplan::ImprovementTable t =
      fedplan::compare(fedplan::report_from_json(a.at("report")), fedplan::report_from_json(b.at("report")));
  if (o.format == "text") {
    emit(fedplan::format_text(t), o.output);
  } else if (o.format == "csv") {
    emit(fedplan::format_csv(t), o.output);
  } else {
    json out = {{"tool_version", kToolVersion},
                {"kind", "comparison"},
                {"pipeline_digest", a["pipeline_digest"]},
                {"pre", {{"strategy", a["report"]["strategy"]}, {"topology_digest", a["topology_digest"]}}},
                {"post", {{"strategy", b["report"]["strategy"]}, {"topology_digest", b["topology_digest"]}}},
                {"table", fedplan::table_to_json(t)}};
    emit(out.dump(2) + "\n", o.output);
  }
  return 0;
}

int cmd_explain(const Options& o) {
  Inputs in = load_inputs(o.pipeline, o.topology);
  fedplan::PlanContext ctx(in.pipeline, in.topology);
  fedplan::Plan plan = fedplan::make_plan(ctx, fedplan::parse_strategy(o.strategy));
  auto traces = fedplan::explain_plan(ctx, plan);
  if (o.format == "json") {
    json doc = envelope("explain", in);
    json arr = json::array();
    for (const auto& t : traces)
      arr.push_back({{"transform_id", t.transform_id},
                     {"C_move", t.cost.move.to_string()},
                     {"C_exec_remote", t.cost.exec_remote.to_string()},
                     {"C_exec_local", t.cost.exec_local.to_string()},
                     {"local_site", t.local_site},
                     {"decision", std::string(to_string(t.decision))},
                     {"chosen_site", t.chosen_site},
                     {"charged", {{"compute", t.charged_compute.to_string()},
                                  {"storage", t.charged_storage.to_string()},
                                  {"transfer", t.charged_transfer.to_string()}}}});
    doc["strategy"] = std::string(to_string(plan.strategy));
    doc["decisions"] = arr;
    doc["estimated"] = fedplan::detail::cost_to_json(plan.estimated);
    emit(doc.dump(2) + "\n", o.output);
    return 0;
  }
  std::ostringstream os;
  os << "strategy " << to_string(plan.strategy) << "\n";
  for (const auto& t : traces) {
    os << t.transform_id << ": C_move=" << t.cost.move.to_string() << " C_exec_remote=" << t.cost.exec_remote.to_string()
       << " C_exec_local=" << t.cost.exec_local.to_string() << " (local " << t.local_site << ") -> "
       << to_string(t.decision) << "; chosen " << t.chosen_site << "; charged compute=" << t.charged_compute.to_string()
       << " storage=" << t.charged_storage.to_string() << " transfer=" << t.charged_transfer.to_string() << "\n";
  }
  os << "total: compute=" << plan.estimated.compute.to_string() << " storage=" << plan.estimated.storage.to_string()
     << " transfer=" << plan.estimated.transfer.to_string() << " total=" << plan.estimated.total.to_string() << "\n";
  emit(os.str(), o.output);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-based push-down planner for multi-cloud ETL pipelines"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub, bool with_strategy) {
    sub->add_option("--pipeline", o.pipeline, "Pipeline description (JSON)");
    sub->add_option("--topology", o.topology, "Cloud topology (JSON)");
    if (with_strategy)
      sub->add_option("--strategy", o.strategy, "centralized|localized|hybrid|federated|optimal")
          ->check(CLI::IsMember({"centralized", "localized", "hybrid", "federated", "optimal"}));
    sub->add_option("--format", o.format, "json|text|csv")->check(CLI::IsMember({"json", "text", "csv"}));
    sub->add_option("--output", o.output, "Write to this file instead of standard output");
  };
  auto* plan = app.add_subcommand("plan", "Produce a plan with generated SQL");
  add_common(plan, true);
  auto* sim = app.add_subcommand("simulate", "Simulate a plan and report runtime, volume and cost");
  add_common(sim, false);
  sim->add_option("--plan", o.plan, "Plan document from `plan`");
  auto* cmp = app.add_subcommand("compare", "Compare two simulation reports");
  cmp->add_option("reports", o.reports, "Baseline report, then candidate report")->expected(2);
  cmp->add_option("--format", o.format, "json|text|csv")->check(CLI::IsMember({"json", "text", "csv"}));
  cmp->add_option("--output", o.output, "Write to this file instead of standard output");
  auto* explain = app.add_subcommand("explain", "Print every push-down cost comparison");
  add_common(explain, true);
  o.format.clear();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  if (o.format.empty()) o.format = app.got_subcommand(explain) ? "text" : "json";

  try {
    if (app.got_subcommand(plan)) return cmd_plan(o);
    if (app.got_subcommand(sim)) return cmd_simulate(o);
    if (app.got_subcommand(cmp)) return cmd_compare(o);
    return cmd_explain(o);
  } catch (const fedplan::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
