#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fedplan/errors.hpp"

namespace fedplan {

enum class ScalarType { String, Int64, Float64, Bool, Timestamp, Json, Null };

inline std::string_view to_string(ScalarType t) {
  switch (t) {
    case ScalarType::String: return "string";
    case ScalarType::Int64: return "int64";
    case ScalarType::Float64: return "float64";
    case ScalarType::Bool: return "bool";
    case ScalarType::Timestamp: return "timestamp";
    case ScalarType::Json: return "json";
    case ScalarType::Null: return "null";
  }
  return "?";
}

inline ScalarType parse_scalar_type(std::string_view s) {
  for (auto t : {ScalarType::String, ScalarType::Int64, ScalarType::Float64, ScalarType::Bool, ScalarType::Timestamp,
                 ScalarType::Json}) {
    if (to_string(t) == s) return t;
  }
  throw ValidationError("unknown column type '" + std::string(s) + "'");
}

inline bool is_numeric(ScalarType t) { return t == ScalarType::Int64 || t == ScalarType::Float64; }

struct Column {
  std::string name;
  ScalarType type = ScalarType::String;

  friend bool operator==(const Column&, const Column&) = default;
};

/// Ordered column list of one node's output.
struct Schema {
  std::vector<Column> columns;

  const Column* find(std::string_view name) const {
    auto it = std::find_if(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
    return it == columns.end() ? nullptr : &*it;
  }
  std::size_t size() const { return columns.size(); }

  friend bool operator==(const Schema&, const Schema&) = default;
};

enum class ArgKind { Any, String, Numeric, Json, Timestamp };

enum class FunctionClass {
  Scalar,
  Aggregate,   // usable in Aggregate and as a window function
  WindowOnly,  // ranking functions
};

struct FunctionSignature {
  std::string name;
  std::vector<ArgKind> args;
  bool variadic = false;         // last argument kind repeats, at least one occurrence
  bool accepts_star = false;     // COUNT(*)
  std::optional<ScalarType> returns;  // nullopt: type of the first argument
  FunctionClass cls = FunctionClass::Scalar;
};

/// Portable function vocabulary that pipeline expressions are written in.
/// Dialects map these names onto their own spelling.
class LogicalFunctionCatalog {
 public:
  static const LogicalFunctionCatalog& standard() {
    static const LogicalFunctionCatalog catalog = [] {
      LogicalFunctionCatalog c;
      using A = ArgKind;
      using T = ScalarType;
      auto add = [&c](FunctionSignature s) { c.entries_.emplace(s.name, std::move(s)); };
      add({"UPPER", {A::String}, false, false, T::String, FunctionClass::Scalar});
      add({"LOWER", {A::String}, false, false, T::String, FunctionClass::Scalar});
      add({"TRIM", {A::String}, false, false, T::String, FunctionClass::Scalar});
      add({"LENGTH", {A::String}, false, false, T::Int64, FunctionClass::Scalar});
      add({"CONCAT", {A::String}, true, false, T::String, FunctionClass::Scalar});
      add({"SUBSTR", {A::String, A::Numeric, A::Numeric}, false, false, T::String, FunctionClass::Scalar});
      add({"ABS", {A::Numeric}, false, false, std::nullopt, FunctionClass::Scalar});
      add({"ROUND", {A::Numeric}, false, false, T::Float64, FunctionClass::Scalar});
      add({"COALESCE", {A::Any}, true, false, std::nullopt, FunctionClass::Scalar});
      add({"DATE_TRUNC", {A::String, A::Timestamp}, false, false, T::Timestamp, FunctionClass::Scalar});
      add({"JSON_EXTRACT", {A::Json, A::String}, false, false, T::Json, FunctionClass::Scalar});
      add({"SUM", {A::Numeric}, false, false, std::nullopt, FunctionClass::Aggregate});
      add({"AVG", {A::Numeric}, false, false, T::Float64, FunctionClass::Aggregate});
      add({"COUNT", {A::Any}, false, true, T::Int64, FunctionClass::Aggregate});
      add({"MIN", {A::Any}, false, false, std::nullopt, FunctionClass::Aggregate});
      add({"MAX", {A::Any}, false, false, std::nullopt, FunctionClass::Aggregate});
      add({"ROW_NUMBER", {}, false, false, T::Int64, FunctionClass::WindowOnly});
      add({"RANK", {}, false, false, T::Int64, FunctionClass::WindowOnly});
      return c;
    }();
    return catalog;
  }

  const FunctionSignature* find(std::string_view name) const {
    auto it = entries_.find(std::string(name));
    return it == entries_.end() ? nullptr : &it->second;
  }
  bool contains(std::string_view name) const { return find(name) != nullptr; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
  }

 private:
  std::map<std::string, FunctionSignature> entries_;
};

}  // namespace fedplan
