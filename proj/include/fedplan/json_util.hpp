#pragma once

#include <cmath>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fedplan/errors.hpp"

namespace fedplan::detail {

using nlohmann::json;

inline json parse_json_document(std::string_view text, const char* what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": syntax error: " + e.what(), e.byte == 0 ? 0 : e.byte - 1);
  }
}

inline void expect_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
}

/// Rejects keys outside `allowed` and requires every key in `required`.
inline void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> required,
                       std::initializer_list<std::string_view> optional = {}) {
  expect_object(j, where);
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (auto k : required) known = known || k == it.key();
    for (auto k : optional) known = known || k == it.key();
    if (!known) throw ValidationError(where + ": unknown key '" + it.key() + "'");
  }
  for (auto k : required)
    if (!j.contains(std::string(k))) throw ValidationError(where + ": missing key '" + std::string(k) + "'");
}

inline std::string get_string(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ValidationError(where + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline bool get_bool(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_boolean()) throw ValidationError(where + ": '" + key + "' must be a boolean");
  return v.get<bool>();
}

inline std::uint64_t get_u64(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw ValidationError(where + ": '" + key + "' must be non-negative");
  throw ValidationError(where + ": '" + key + "' must be a non-negative integer");
}

/// Accepts a JSON number or a decimal string.
inline double get_number(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  double d = 0;
  if (v.is_number()) {
    d = v.get<double>();
  } else if (v.is_string()) {
    const std::string s = v.get<std::string>();
    std::size_t used = 0;
    try {
      d = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw ValidationError(where + ": '" + key + "' is not a number");
  } else {
    throw ValidationError(where + ": '" + key + "' must be a number");
  }
  if (std::isnan(d)) throw ValidationError(where + ": '" + key + "' is NaN");
  return d;
}

/// Decimal strings are required for money so no value passes through binary
/// floating point.
inline std::string get_decimal_string(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_string()) throw ValidationError(where + ": '" + key + "' must be a decimal string");
  return v.get<std::string>();
}

inline std::vector<std::string> get_string_list(const json& j, const char* key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_array()) throw ValidationError(where + ": '" + key + "' must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ValidationError(where + ": '" + key + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace fedplan::detail
