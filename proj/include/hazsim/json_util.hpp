#pragma once

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "hazsim/errors.hpp"

namespace hazsim {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void save_json_file(const json& j, const std::string& path, int indent = 1) {
  std::ofstream out(path);
  if (!out) throw HazError("cannot write file: " + path);
  out << j.dump(indent) << '\n';
}

// Unknown keys are hard errors: a silently ignored typo in a config is worse
// than a rejected run.
inline void require_keys(const json& obj,
                         std::initializer_list<std::string_view> allowed,
                         const std::string& context) {
  if (!obj.is_object()) throw ParseError(context + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (auto k : allowed) {
      if (item.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw ParseError(context + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get_required(const json& obj, const char* key, const std::string& context) {
  if (!obj.contains(key))
    throw ParseError(context + ": missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(context + ": bad value for '" + key + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& context) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(context + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace hazsim
