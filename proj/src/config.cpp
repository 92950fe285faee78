#include "qpkdv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <istream>

#include "qpkdv/errors.hpp"
#include "qpkdv/precision.hpp"

namespace qpkdv {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool valid_key(std::string_view k) {
  if (k.empty()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; });
}

}  // namespace

Config Config::parse(std::istream& is, std::string source) {
  Config c;
  c.source_ = std::move(source);
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    std::string text = raw;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '"') quoted = !quoted;
      if (text[i] == '#' && !quoted) {
        text.resize(i);
        break;
      }
    }
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    const std::string where = c.source_ + ":" + std::to_string(line);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value', got '" + text + "'");
    const std::string key = trim(std::string_view(text).substr(0, eq));
    if (!valid_key(key)) throw ConfigError(where + ": invalid key '" + key + "'");
    if (c.entries_.count(key)) throw ConfigError(where + ": duplicate key '" + key + "' (first on line " + std::to_string(c.entries_[key].line) + ")");
    c.entries_[key] = {unquote(trim(std::string_view(text).substr(eq + 1))), line, false};
  }
  return c;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void Config::set(const std::string& key, std::string value) { entries_[key] = {std::move(value), 0, true}; }

bool Config::has(const std::string& key) const {
  return entries_.count(key) > 0 || std::getenv(env_name(key).c_str()) != nullptr;
}

std::string Config::env_name(const std::string& key) {
  std::string n = "QPKDV_";
  for (char ch : key) n += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return n;
}

std::vector<std::string> Config::split_list(std::string_view text) {
  std::string s = trim(text);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw ConfigError("unterminated list '" + s + "'");
    s = s.substr(1, s.size() - 2);
  }
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  int depth = 0;
  std::string cur;
  for (char ch : s) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      out.push_back(unquote(trim(cur)));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(unquote(trim(cur)));
  return out;
}

std::optional<std::pair<std::string, std::string>> Config::lookup(const std::string& key) const {
  used_[key] = true;
  const auto it = entries_.find(key);
  if (it != entries_.end() && it->second.forced) return std::make_pair(it->second.value, std::string("command line"));
  const std::string env = env_name(key);
  if (const char* v = std::getenv(env.c_str())) return std::make_pair(std::string(v), "environment " + env);
  if (it == entries_.end()) return std::nullopt;
  const std::string where = it->second.line > 0 ? source_ + ":" + std::to_string(it->second.line) : "command line";
  return std::make_pair(it->second.value, where);
}

void Config::fail(const std::string& where, const std::string& key, const std::string& what) const {
  throw ConfigError(where + ": key '" + key + "': " + what);
}

std::string Config::string(const std::string& key, std::optional<std::string> fallback) const {
  const auto v = lookup(key);
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    echo_[key] = *fallback;
    return *fallback;
  }
  echo_[key] = v->first;
  return v->first;
}

double Config::real(const std::string& key, std::optional<double> fallback) const {
  const auto v = lookup(key);
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    echo_[key] = format_double(*fallback);
    return *fallback;
  }
  double x = 0.0;
  try {
    x = parse_real(trim(v->first)).convert_to<double>();
  } catch (const std::exception&) {
    fail(v->second, key, "expected a number, got '" + v->first + "'");
  }
  echo_[key] = v->first;
  return x;
}

int Config::integer(const std::string& key, std::optional<int> fallback) const {
  const auto v = lookup(key);
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    echo_[key] = std::to_string(*fallback);
    return *fallback;
  }
  const std::string t = trim(v->first);
  int x = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size()) fail(v->second, key, "expected an integer, got '" + v->first + "'");
  echo_[key] = t;
  return x;
}

std::uint64_t Config::u64(const std::string& key, std::optional<std::uint64_t> fallback) const {
  const auto v = lookup(key);
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    echo_[key] = std::to_string(*fallback);
    return *fallback;
  }
  const std::string t = trim(v->first);
  std::uint64_t x = 0;
  const auto r = std::from_chars(t.data(), t.data() + t.size(), x);
  if (r.ec != std::errc() || r.ptr != t.data() + t.size())
    fail(v->second, key, "expected an unsigned 64-bit integer, got '" + v->first + "'");
  echo_[key] = t;
  return x;
}

bool Config::boolean(const std::string& key, std::optional<bool> fallback) const {
  const auto v = lookup(key);
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    echo_[key] = *fallback ? "true" : "false";
    return *fallback;
  }
  std::string t = trim(v->first);
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return std::tolower(c); });
  bool x;
  if (t == "true" || t == "yes" || t == "on" || t == "1") {
    x = true;
  } else if (t == "false" || t == "no" || t == "off" || t == "0") {
    x = false;
  } else {
    fail(v->second, key, "expected a boolean, got '" + v->first + "'");
  }
  echo_[key] = x ? "true" : "false";
  return x;
}

std::vector<std::string> Config::strings(const std::string& key, std::optional<std::vector<std::string>> fallback) const {
  const auto v = lookup(key);
  std::vector<std::string> out;
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    out = *fallback;
  } else {
    try {
      out = split_list(v->first);
    } catch (const ConfigError& e) {
      fail(v->second, key, e.what());
    }
  }
  std::string e = "[";
  for (std::size_t i = 0; i < out.size(); ++i) e += (i ? ", " : "") + out[i];
  echo_[key] = e + "]";
  return out;
}

std::vector<double> Config::reals(const std::string& key, std::optional<std::vector<double>> fallback) const {
  const auto v = lookup(key);
  std::vector<double> out;
  if (!v) {
    if (!fallback) fail(source_, key, "required key is missing");
    out = *fallback;
    std::string e = "[";
    for (std::size_t i = 0; i < out.size(); ++i) e += (i ? ", " : "") + format_double(out[i]);
    echo_[key] = e + "]";
    return out;
  }
  std::vector<std::string> items;
  try {
    items = split_list(v->first);
  } catch (const ConfigError& e) {
    fail(v->second, key, e.what());
  }
  for (const auto& s : items) {
    try {
      out.push_back(parse_real(s).convert_to<double>());
    } catch (const std::exception&) {
      fail(v->second, key, "expected a list of numbers, got '" + s + "'");
    }
  }
  std::string e = "[";
  for (std::size_t i = 0; i < items.size(); ++i) e += (i ? ", " : "") + items[i];
  echo_[key] = e + "]";
  return out;
}

void Config::check_consumed() const {
  for (const auto& [key, entry] : entries_)
    if (!used_.count(key))
      throw ConfigError((entry.line > 0 ? source_ + ":" + std::to_string(entry.line) : std::string("command line")) +
                        ": unknown key '" + key + "'");
}

}  // namespace qpkdv
