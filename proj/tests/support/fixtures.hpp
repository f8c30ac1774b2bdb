#pragma once

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "fedplan/fedplan.hpp"
#include "support/generators.hpp"

namespace fedplan::testing {

inline std::string fixture_path(const std::string& name) { return std::string(FEDPLAN_TEST_FIXTURES) + "/" + name; }

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file not found: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline Pipeline fixture_pipeline(const std::string& name) { return parse_pipeline(read_text(fixture_path(name))); }

inline Topology fixture_topology(const std::string& name) {
  return load_topology(read_text(fixture_path(name)), test_dialects());
}

struct Scenario {
  std::string name;
  Pipeline pipeline;
  Topology topology;
};

/// Bundled fixtures that have at least one feasible plan.
inline std::vector<Scenario> fixture_scenarios() {
  std::vector<Scenario> out;
  out.push_back({"micro", fixture_pipeline("micro.json"), fixture_topology("micro-topo.json")});
  out.push_back({"case-study", fixture_pipeline("case-study.json"), fixture_topology("case-study-topo.json")});
  out.push_back({"cleanname", fixture_pipeline("cleanname.json"), fixture_topology("micro-topo.json")});
  return out;
}

struct CommandResult {
  int status = -1;
  std::string out;
};

/// Runs the fedplan CLI with `args` (shell syntax), capturing stdout.
inline CommandResult run_cli(const std::string& args) {
  std::string cmd = std::string("FEDPLAN_FIXTURES='") + FEDPLAN_TEST_FIXTURES + "' '" + FEDPLAN_CLI + "' " + args;
  CommandResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int rc = pclose(pipe);
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return r;
}

}  // namespace fedplan::testing
