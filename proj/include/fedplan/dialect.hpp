#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include "fedplan/catalog.hpp"
#include "fedplan/ir.hpp"
#include "fedplan/json_util.hpp"

namespace fedplan {

/// One engine's SQL surface: how logical functions are spelled, how
/// identifiers are quoted, and what it cannot express at all.
struct DialectSpec {
  std::string id;
  std::map<std::string, std::string> function_map;  // logical name -> dialect name
  char identifier_quote = '"';
  std::set<TransformKind> unsupported_kinds;
  std::set<std::string> unsupported_functions;
  std::string remarks;

  bool supports(TransformKind k) const { return !unsupported_kinds.count(k); }
};

namespace detail {

inline void validate_dialect(const DialectSpec& d) {
  const auto& catalog = LogicalFunctionCatalog::standard();
  if (d.id.empty()) throw ValidationError("dialect has an empty id");
  for (const auto& f : d.unsupported_functions)
    if (!catalog.contains(f)) throw ValidationError("dialect '" + d.id + "': unknown function '" + f + "' in unsupported_functions");
  for (const auto& [logical, native] : d.function_map) {
    if (!catalog.contains(logical))
      throw ValidationError("dialect '" + d.id + "': function_map names unknown function '" + logical + "'");
    if (d.unsupported_functions.count(logical))
      throw ValidationError("dialect '" + d.id + "': '" + logical + "' is both mapped and unsupported");
    if (native.empty()) throw ValidationError("dialect '" + d.id + "': empty mapping for '" + logical + "'");
  }
  for (const auto& name : catalog.names())
    if (!d.unsupported_functions.count(name) && !d.function_map.count(name))
      throw ValidationError("dialect '" + d.id + "': function_map does not cover '" + name + "'");
}

}  // namespace detail

inline DialectSpec dialect_from_json(const nlohmann::json& j) {
  using namespace detail;
  check_keys(j, "dialect", {"id", "identifier_quote", "function_map"},
             {"unsupported_kinds", "unsupported_functions", "remarks"});
  DialectSpec d;
  d.id = get_string(j, "id", "dialect");
  std::string quote = get_string(j, "identifier_quote", "dialect");
  if (quote.size() != 1) throw ValidationError("dialect '" + d.id + "': identifier_quote must be one character");
  d.identifier_quote = quote[0];
  expect_object(j.at("function_map"), "dialect.function_map");
  for (auto it = j.at("function_map").begin(); it != j.at("function_map").end(); ++it) {
    if (!it.value().is_string()) throw ValidationError("dialect '" + d.id + "': function_map values must be strings");
    d.function_map[it.key()] = it.value().get<std::string>();
  }
  if (j.contains("unsupported_kinds"))
    for (const auto& k : get_string_list(j, "unsupported_kinds", "dialect")) d.unsupported_kinds.insert(parse_transform_kind(k));
  if (j.contains("unsupported_functions"))
    for (const auto& f : get_string_list(j, "unsupported_functions", "dialect")) d.unsupported_functions.insert(f);
  if (j.contains("remarks")) d.remarks = get_string(j, "remarks", "dialect");
  validate_dialect(d);
  return d;
}

inline DialectSpec load_dialect(std::string_view text) {
  return dialect_from_json(detail::parse_json_document(text, "dialect"));
}

/// Maps every catalog function to itself, quotes with double quotes and
/// supports everything.
inline DialectSpec identity_dialect() {
  DialectSpec d;
  d.id = "identity";
  for (const auto& name : LogicalFunctionCatalog::standard().names()) d.function_map[name] = name;
  return d;
}

/// The logical-to-dialect function mapping.
inline std::string rewrite_function(std::string_view name, const DialectSpec& d) {
  std::string key(name);
  if (d.unsupported_functions.count(key))
    throw CodegenError("function " + key + " is not supported by dialect '" + d.id + "'");
  auto it = d.function_map.find(key);
  if (it == d.function_map.end()) throw CodegenError("function " + key + " is not in the logical function catalog");
  return it->second;
}

class DialectRegistry {
 public:
  DialectRegistry() { add(identity_dialect()); }

  void add(DialectSpec d) {
    std::string id = d.id;
    dialects_[id] = std::move(d);
  }
  const DialectSpec* find(std::string_view id) const {
    auto it = dialects_.find(std::string(id));
    return it == dialects_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, DialectSpec>& all() const { return dialects_; }

  /// Loads every `*.json` file in `dir` (sorted by name).
  void load_directory(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::ifstream in(f, std::ios::binary);
      std::stringstream buf;
      buf << in.rdbuf();
      try {
        add(load_dialect(buf.str()));
      } catch (const Error& e) {
        throw ValidationError(f.string() + ": " + e.what());
      }
    }
  }

 private:
  std::map<std::string, DialectSpec> dialects_;
};

}  // namespace fedplan
