#pragma once

// Small TOML subset: [section] headers, key = value, scalars (int, float,
// bool, "string") and (possibly nested, multi-line) arrays, # comments.
// Dotted keys flatten into "section.key". Covers scenario/params files only.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "nael/errors.hpp"

namespace nael {

struct TomlValue {
  enum class Kind { Int, Float, Bool, String, Array };
  Kind kind = Kind::Int;
  long long i = 0;
  double f = 0.0;
  bool b = false;
  std::string s;
  std::vector<TomlValue> arr;

  static TomlValue of_int(long long v) { TomlValue t; t.kind = Kind::Int; t.i = v; return t; }
  static TomlValue of_float(double v) { TomlValue t; t.kind = Kind::Float; t.f = v; return t; }
  static TomlValue of_bool(bool v) { TomlValue t; t.kind = Kind::Bool; t.b = v; return t; }
  static TomlValue of_string(std::string v) {
    TomlValue t; t.kind = Kind::String; t.s = std::move(v); return t;
  }
  static TomlValue of_array(std::vector<TomlValue> v) {
    TomlValue t; t.kind = Kind::Array; t.arr = std::move(v); return t;
  }

  double as_number() const {
    if (kind == Kind::Int) return static_cast<double>(i);
    if (kind == Kind::Float) return f;
    throw ConfigError("expected a number");
  }
};

class TomlTable {
 public:
  std::map<std::string, TomlValue> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }

  const TomlValue& require(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::Int)
      throw ConfigError("config key '" + key + "' must be an integer");
    return it->second.i;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    return it->second.as_number();
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::Bool)
      throw ConfigError("config key '" + key + "' must be a boolean");
    return it->second.b;
  }

  std::string get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    if (it->second.kind != TomlValue::Kind::String)
      throw ConfigError("config key '" + key + "' must be a string");
    return it->second.s;
  }

  std::vector<double> get_number_array(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Array)
      throw ConfigError("config key '" + key + "' must be an array");
    std::vector<double> out;
    out.reserve(v.arr.size());
    for (const auto& e : v.arr) out.push_back(e.as_number());
    return out;
  }

  std::vector<std::vector<double>> get_matrix(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Array)
      throw ConfigError("config key '" + key + "' must be an array of arrays");
    std::vector<std::vector<double>> out;
    for (const auto& row : v.arr) {
      if (row.kind != TomlValue::Kind::Array)
        throw ConfigError("config key '" + key + "' must be an array of arrays");
      std::vector<double> r;
      r.reserve(row.arr.size());
      for (const auto& e : row.arr) r.push_back(e.as_number());
      out.push_back(std::move(r));
    }
    return out;
  }

  std::vector<std::string> get_string_array(const std::string& key) const {
    const TomlValue& v = require(key);
    if (v.kind != TomlValue::Kind::Array)
      throw ConfigError("config key '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : v.arr) {
      if (e.kind != TomlValue::Kind::String)
        throw ConfigError("config key '" + key + "' must contain only strings");
      out.push_back(e.s);
    }
    return out;
  }
};

namespace toml_detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// strips a trailing comment, honoring quoted strings
inline std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

struct ValueCursor {
  const std::string& text;
  std::size_t pos = 0;
  int line = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\n' ||
                                 text[pos] == '\r'))
      ++pos;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("config line " + std::to_string(line) + ": " + what);
  }

  TomlValue parse_value() {
    skip_ws();
    if (pos >= text.size()) fail("missing value");
    char c = text[pos];
    if (c == '"') return parse_string();
    if (c == '[') return parse_array();
    return parse_scalar();
  }

  TomlValue parse_string() {
    ++pos;  // opening quote
    std::string out;
    while (pos < text.size() && text[pos] != '"') {
      char c = text[pos++];
      if (c == '\\' && pos < text.size()) {
        char e = text[pos++];
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
    if (pos >= text.size()) fail("unterminated string");
    ++pos;  // closing quote
    return TomlValue::of_string(std::move(out));
  }

  TomlValue parse_array() {
    ++pos;  // '['
    std::vector<TomlValue> items;
    skip_ws();
    while (pos < text.size() && text[pos] != ']') {
      items.push_back(parse_value());
      skip_ws();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        skip_ws();
      }
    }
    if (pos >= text.size()) fail("unterminated array");
    ++pos;  // ']'
    return TomlValue::of_array(std::move(items));
  }

  TomlValue parse_scalar() {
    std::size_t end = pos;
    while (end < text.size() && text[end] != ',' && text[end] != ']' && text[end] != '\n' &&
           text[end] != '\r')
      ++end;
    std::string tok = trim(text.substr(pos, end - pos));
    pos = end;
    if (tok.empty()) fail("missing value");
    if (tok == "true") return TomlValue::of_bool(true);
    if (tok == "false") return TomlValue::of_bool(false);
    bool floaty = tok.find_first_of(".eE") != std::string::npos;
    // leading '+' is valid TOML but from_chars rejects it
    std::string digits = (tok[0] == '+') ? tok.substr(1) : tok;
    if (!floaty) {
      long long v = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
      if (ec == std::errc() && p == digits.data() + digits.size()) return TomlValue::of_int(v);
    }
    char* endp = nullptr;
    double d = std::strtod(digits.c_str(), &endp);
    if (endp != digits.c_str() + digits.size() || !std::isfinite(d))
      fail("cannot parse value '" + tok + "'");
    return TomlValue::of_float(d);
  }
};

}  // namespace toml_detail

inline TomlTable parse_toml(const std::string& text) {
  TomlTable table;
  std::string section;
  std::size_t i = 0;
  int line_no = 0;
  while (i < text.size()) {
    std::size_t nl = text.find('\n', i);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(i, nl - i);
    i = nl + 1;
    ++line_no;
    int first_line = line_no;

    // join continuation lines while brackets stay open
    auto depth = [](const std::string& s) {
      int d = 0;
      bool in_str = false;
      for (std::size_t k = 0; k < s.size(); ++k) {
        char c = s[k];
        if (c == '"' && (k == 0 || s[k - 1] != '\\')) in_str = !in_str;
        if (in_str) continue;
        if (c == '[') ++d;
        if (c == ']') --d;
      }
      return d;
    };
    line = toml_detail::strip_comment(line);
    int open = depth(line);
    while (open > 0 && i < text.size()) {
      std::size_t nl2 = text.find('\n', i);
      if (nl2 == std::string::npos) nl2 = text.size();
      std::string cont = toml_detail::strip_comment(text.substr(i, nl2 - i));
      i = nl2 + 1;
      ++line_no;
      line += "\n" + cont;
      open += depth(cont);
    }

    std::string t = toml_detail::trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError("config line " + std::to_string(first_line) + ": malformed section header");
      section = toml_detail::trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ConfigError("config line " + std::to_string(first_line) + ": empty section name");
      continue;
    }
    std::size_t eq = std::string::npos;
    bool in_str = false;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k] == '"' && (k == 0 || t[k - 1] != '\\')) in_str = !in_str;
      if (t[k] == '=' && !in_str) {
        eq = k;
        break;
      }
    }
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(first_line) + ": expected key = value");
    std::string key = toml_detail::trim(t.substr(0, eq));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(first_line) + ": empty key");
    if (!section.empty()) key = section + "." + key;
    std::string rhs = t.substr(eq + 1);
    toml_detail::ValueCursor cur{rhs, 0, first_line};
    TomlValue v = cur.parse_value();
    cur.skip_ws();
    if (cur.pos != rhs.size()) cur.fail("trailing characters after value");
    if (table.values.count(key))
      throw ConfigError("config line " + std::to_string(first_line) + ": duplicate key '" + key + "'");
    table.values.emplace(std::move(key), std::move(v));
  }
  return table;
}

inline std::string toml_format(const TomlValue& v) {
  switch (v.kind) {
    case TomlValue::Kind::Int:
      return std::to_string(v.i);
    case TomlValue::Kind::Float: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", v.f);
      std::string s(buf);
      // keep floats recognizably floats on re-read
      if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
      return s;
    }
    case TomlValue::Kind::Bool:
      return v.b ? "true" : "false";
    case TomlValue::Kind::String: {
      std::string out = "\"";
      for (char c : v.s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
      }
      return out + "\"";
    }
    case TomlValue::Kind::Array: {
      std::string out = "[";
      for (std::size_t i = 0; i < v.arr.size(); ++i) {
        if (i) out += ", ";
        out += toml_format(v.arr[i]);
      }
      return out + "]";
    }
  }
  throw Error("unreachable toml kind");
}

}  // namespace nael
