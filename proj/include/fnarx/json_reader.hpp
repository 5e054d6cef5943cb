#pragma once

#include <optional>
#include <set>
#include <string>

#include "json.hpp"

#include "fnarx/error.hpp"

namespace fnarx {

/// Typed access to a JSON object that remembers which keys were read. In
/// strict mode finish() rejects keys nobody asked for, naming their location.
class JsonReader {
 public:
  JsonReader(const nlohmann::json& j, std::string where, bool strict)
      : j_(j), where_(std::move(where)), strict_(strict) {
    if (!j_.is_object()) fail(where_.empty() ? "expected a JSON object" : "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    auto v = opt<T>(key);
    return v ? *v : fallback;
  }

  template <typename T>
  T require(const std::string& key) {
    auto v = opt<T>(key);
    if (!v) fail("missing required key '" + key + "'");
    return *v;
  }

  template <typename T>
  std::optional<T> opt(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    try {
      return it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      fail("bad value for '" + key + "': " + e.what());
    }
  }

  /// Nested object; an absent key yields an empty object.
  JsonReader child(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return JsonReader(it == j_.end() ? empty() : *it, path(key), strict_);
  }

  const nlohmann::json& raw(const std::string& key) {
    used_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? null() : *it;
  }

  std::string path(const std::string& key) const {
    return where_.empty() ? key : where_ + "." + key;
  }

  void finish() const {
    if (!strict_) return;
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw Error(ErrorKind::kParse, "unknown key '" + path(it.key()) + "'");
      }
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::kParse, (where_.empty() ? "" : where_ + ": ") + what);
  }

  bool strict() const { return strict_; }

 private:
  static const nlohmann::json& empty() {
    static const nlohmann::json e = nlohmann::json::object();
    return e;
  }
  static const nlohmann::json& null() {
    static const nlohmann::json n;
    return n;
  }

  const nlohmann::json& j_;
  std::string where_;
  bool strict_;
  std::set<std::string> used_;
};

}  // namespace fnarx
