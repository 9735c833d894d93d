#include "meanfield/config.hpp"

#include <openssl/sha.h>

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "meanfield/error.hpp"
#include "meanfield/expr.hpp"

namespace meanfield {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
  }
  return true;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  auto fail = [&](const std::string& why) {
    throw ConfigError(origin + ":" + std::to_string(number) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') fail("unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (!valid_name(section)) fail("invalid section name '" + section + "'");
      cfg.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    if (section.empty()) fail("key outside of any [section]");
    const std::string key = trim(t.substr(0, eq));
    const std::string raw = trim(t.substr(eq + 1));
    if (!valid_name(key)) fail("invalid key '" + key + "'");
    if (raw.size() == 1 && raw[0] == '"') fail("unterminated string");
    if (raw.size() >= 2 && (raw.front() == '"') != (raw.back() == '"')) fail("unterminated string");
    if (cfg.sections_[section].count(key)) fail("duplicate key '" + key + "' in [" + section + "]");
    cfg.sections_[section][key] = unquote(raw);
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  if (!valid_name(section) || !valid_name(key)) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  set(section, key, unquote(trim(assignment.substr(eq + 1))));
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  sections_[section][key] = value;
}

void Config::erase(const std::string& section, const std::string& key) {
  auto it = sections_.find(section);
  if (it == sections_.end()) return;
  it->second.erase(key);
  if (it->second.empty()) sections_.erase(it);
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key).has_value(); }

std::optional<std::string> Config::find(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  auto k = s->second.find(key);
  if (k == s->second.end()) return std::nullopt;
  return k->second;
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return find(section, key).value_or(fallback);
}

std::string Config::require_string(const std::string& section, const std::string& key) const {
  auto v = find(section, key);
  if (!v) throw ConfigError("missing required key " + section + "." + key);
  return *v;
}

double parse_constant(const std::string& text, const std::string& what) {
  try {
    const Expr e = Expr::parse(text);
    const double a = e.eval(0.3, 0.2);
    const double b = e.eval(-0.7, 0.5);
    if (a != b) throw ConfigError(what + " must be a constant, got '" + text + "'");
    if (!std::isfinite(a)) throw ConfigError(what + " is not finite: '" + text + "'");
    return a;
  } catch (const ExprError& err) {
    throw ConfigError(what + ": cannot parse '" + text + "': " + err.what());
  }
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  auto v = find(section, key);
  return v ? parse_constant(*v, section + "." + key) : fallback;
}

double Config::require_double(const std::string& section, const std::string& key) const {
  return parse_constant(require_string(section, key), section + "." + key);
}

int Config::get_int(const std::string& section, const std::string& key, int fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  const double d = parse_constant(*v, section + "." + key);
  if (d != std::floor(d) || std::abs(d) > 2e9) {
    throw ConfigError(section + "." + key + " must be an integer, got '" + *v + "'");
  }
  return static_cast<int>(d);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigError(section + "." + key + " must be true or false, got '" + *v + "'");
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string piece;
  std::istringstream in(text);
  while (std::getline(in, piece, sep)) {
    piece = trim(piece);
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  auto v = find(section, key);
  if (!v) return fallback;
  std::vector<double> out;
  for (const auto& piece : split_list(*v, ',')) out.push_back(parse_constant(piece, section + "." + key));
  if (out.empty()) throw ConfigError(section + "." + key + " is an empty list");
  return out;
}

std::string Config::canonical_echo() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [name, section] : sections_) {
    if (section.empty()) continue;
    if (!first) out << '\n';
    first = false;
    out << '[' << name << "]\n";
    for (const auto& [key, value] : section) out << key << " = \"" << value << "\"\n";
  }
  return out.str();
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char digest[SHA_DIGEST_LENGTH];
  SHA1(reinterpret_cast<const unsigned char*>(blob.data()), blob.size(), digest);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned char byte : digest) {
    out += hex[byte >> 4];
    out += hex[byte & 0xf];
  }
  return out;
}

std::string Config::content_hash() const { return git_blob_hash(canonical_echo()); }

}  // namespace meanfield
