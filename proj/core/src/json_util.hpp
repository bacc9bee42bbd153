#pragma once

// Path-addressed accessors for reading domain documents. Every failure is an
// Error{ParseError} naming the offending field.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "smpa/error.hpp"

namespace smpa::detail {

using nlohmann::json;

inline std::string child_path(std::string_view parent, std::string_view key) {
  return parent.empty() ? std::string(key) : fmt::format("{}.{}", parent, key);
}

inline std::string index_path(std::string_view parent, std::size_t i) {
  return fmt::format("{}[{}]", parent, i);
}

inline const json& require_object(const json& j, std::string_view path) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, "expected an object", std::string(path));
  }
  return j;
}

inline const json& require_field(const json& obj, std::string_view key, std::string_view path) {
  require_object(obj, path);
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw Error(ErrorCode::ParseError, "missing field", child_path(path, key));
  }
  return *it;
}

inline const json& require_array(const json& obj, std::string_view key, std::string_view path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_array()) {
    throw Error(ErrorCode::ParseError, "expected an array", child_path(path, key));
  }
  return v;
}

inline std::string get_string(const json& obj, std::string_view key, std::string_view path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_string()) {
    throw Error(ErrorCode::ParseError, "expected a string", child_path(path, key));
  }
  return v.get<std::string>();
}

inline std::int64_t get_int(const json& obj, std::string_view key, std::string_view path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::ParseError, "expected an integer", child_path(path, key));
  }
  return v.get<std::int64_t>();
}

inline double get_number(const json& obj, std::string_view key, std::string_view path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_number()) {
    throw Error(ErrorCode::ParseError, "expected a number", child_path(path, key));
  }
  return v.get<double>();
}

inline bool get_bool(const json& obj, std::string_view key, std::string_view path) {
  const auto& v = require_field(obj, key, path);
  if (!v.is_boolean()) {
    throw Error(ErrorCode::ParseError, "expected a boolean", child_path(path, key));
  }
  return v.get<bool>();
}

inline std::optional<std::string> get_optional_string(const json& obj, std::string_view key,
                                                      std::string_view path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    return std::nullopt;
  }
  if (!it->is_string()) {
    throw Error(ErrorCode::ParseError, "expected a string", child_path(path, key));
  }
  return it->get<std::string>();
}

inline json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace smpa::detail
