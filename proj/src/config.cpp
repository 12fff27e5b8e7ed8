// SPDX-License-Identifier: Apache-2.0

#include "qmcev/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace qmcev
{

namespace
{

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// Payload of a `# config: ...` line, or empty.
std::string artifact_payload(const std::string& line)
{
  const std::string t = trim(line);
  if (t.empty() || t[0] != '#') return {};
  const std::string rest = trim(t.substr(1));
  const std::string tag = "config:";
  if (rest.compare(0, tag.size(), tag) != 0) return {};
  return trim(rest.substr(tag.size()));
}

template <class Int>
bool parse_integer(const std::string& text, Int& out)
{
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(const std::string& text, double& out)
{
  if (text.empty()) return false;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  in >> out;
  return !in.fail() && in.eof();
}

std::vector<std::string> split_list(const std::string& text)
{
  std::string spaced = text;
  std::replace(spaced.begin(), spaced.end(), ',', ' ');
  std::istringstream in(spaced);
  std::vector<std::string> items;
  for (std::string item; in >> item;) items.push_back(item);
  return items;
}

}  // namespace

ConfigFile ConfigFile::parse(std::istream& is, const std::string& source)
{
  std::vector<std::string> lines;
  for (std::string line; std::getline(is, line);) lines.push_back(line);
  const bool artifact =
      std::any_of(lines.begin(), lines.end(), [](const std::string& l) { return !artifact_payload(l).empty(); });

  ConfigFile cfg;
  cfg.source_ = source;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const int lineno = int(i) + 1;
    std::string text;
    if (artifact) {
      text = artifact_payload(lines[i]);
    } else {
      text = lines[i];
      if (const auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
      text = trim(text);
    }
    if (text.empty()) continue;

    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(lineno) + ": expected `key = value`, got '" + text + "'");
    const std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": missing key before '='");
    if (value.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": missing value for '" + key + "'");
    if (cfg.has(key))
      throw ConfigError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "' (first on line " +
                        std::to_string(cfg.entries_[key].line) + ")");
    cfg.entries_[key] = {value, lineno};
  }
  return cfg;
}

ConfigFile ConfigFile::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse(in, path);
}

void ConfigFile::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

void ConfigFile::set_default(const std::string& key, const std::string& value)
{
  if (!has(key)) entries_[key] = {value, 0};
}

void ConfigFile::fail(const std::string& key, const std::string& message) const
{
  const auto it = entries_.find(key);
  std::string where = source_;
  if (it != entries_.end() && it->second.line > 0) where += ":" + std::to_string(it->second.line);
  throw ConfigError(where + ": " + message);
}

const std::string& ConfigFile::get(const std::string& key) const
{
  const auto it = entries_.find(key);
  if (it == entries_.end()) fail(key, "missing required key '" + key + "'");
  return it->second.value;
}

int ConfigFile::get_int(const std::string& key) const
{
  int v = 0;
  if (!parse_integer(get(key), v)) fail(key, "'" + key + "' must be an integer, got '" + get(key) + "'");
  return v;
}

std::uint64_t ConfigFile::get_u64(const std::string& key) const
{
  std::uint64_t v = 0;
  if (!parse_integer(get(key), v)) fail(key, "'" + key + "' must be a nonnegative integer, got '" + get(key) + "'");
  return v;
}

double ConfigFile::get_double(const std::string& key) const
{
  const std::string& text = get(key);
  double v = 0.0;
  bool ok = false;
  if (const auto slash = text.find('/'); slash != std::string::npos) {
    double num = 0.0, den = 0.0;
    ok = parse_real(trim(text.substr(0, slash)), num) && parse_real(trim(text.substr(slash + 1)), den) && den != 0.0;
    v = num / den;
  } else {
    ok = parse_real(text, v);
  }
  if (!ok || !std::isfinite(v)) fail(key, "'" + key + "' must be a number, got '" + text + "'");
  return v;
}

std::vector<int> ConfigFile::get_int_list(const std::string& key) const
{
  std::vector<int> out;
  for (const std::string& item : split_list(get(key))) {
    int v = 0;
    if (!parse_integer(item, v)) fail(key, "'" + key + "' must be a list of integers, got '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "'" + key + "' is an empty list");
  return out;
}

std::vector<std::uint64_t> ConfigFile::get_u64_list(const std::string& key) const
{
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(get(key))) {
    std::uint64_t v = 0;
    if (!parse_integer(item, v)) fail(key, "'" + key + "' must be a list of integers, got '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) fail(key, "'" + key + "' is an empty list");
  return out;
}

void ConfigFile::check_known(const std::set<std::string>& known) const
{
  for (const auto& [key, entry] : entries_)
    if (!known.count(key)) fail(key, "unknown key '" + key + "'");
}

void ConfigFile::require(const std::vector<std::string>& keys) const
{
  std::string missing;
  for (const std::string& key : keys)
    if (!has(key)) missing += (missing.empty() ? "" : ", ") + key;
  if (!missing.empty()) throw ConfigError(source_ + ": missing required key(s): " + missing);
}

std::vector<std::string> ConfigFile::resolved_lines() const
{
  std::vector<std::string> lines;
  for (const auto& [key, entry] : entries_) lines.push_back("config: " + key + " = " + entry.value);
  return lines;
}

const std::set<std::string>& known_config_keys()
{
  static const std::set<std::string> keys = {
      "family", "q",       "q_a",     "q_a_mod", "q_b",   "q_b_mod",   "s",         "m",
      "N",      "N_list",  "N_max",   "R",       "seed",  "quantity",  "threads",   "out",
      "s_list", "s_ref",   "m_list",  "m_ref",   "tol",   "max_iter",  "samples",   "fd_step",
      "fd_j",   "fd_samples", "fe_m_list", "fe_m_ref"};
  return keys;
}

std::vector<std::uint64_t> default_N_list(std::uint64_t n_max)
{
  static const std::vector<std::uint64_t> paper = {31, 61, 127, 251, 503, 997, 1999, 4001};
  std::vector<std::uint64_t> out;
  for (std::uint64_t N : paper)
    if (N <= n_max) out.push_back(N);
  return out;
}

CoefficientField field_from_config(const ConfigFile& cfg)
{
  const std::string& family = cfg.get("family");
  try {
    if (family == "constant" || family == "constant_laplace") return CoefficientField::constant_laplace();
    if (family == "problem1") return CoefficientField::problem1(cfg.get_double("q"));
    if (family == "problem2") {
      const double q = cfg.has("q") ? cfg.get_double("q") : 2.0;
      const auto decay = [&](const char* key) { return cfg.has(key) ? cfg.get_double(key) : q; };
      return CoefficientField::problem2(decay("q_a"), decay("q_a_mod"), decay("q_b"), decay("q_b_mod"));
    }
  } catch (const std::invalid_argument& e) {
    cfg.fail("family", std::string("invalid field parameters: ") + e.what());
  }
  cfg.fail("family", "unknown family '" + family + "' (expected constant, problem1 or problem2)");
}

RunConfig run_config_from(const ConfigFile& cfg)
{
  RunConfig run;
  run.field = field_from_config(cfg);
  if (cfg.has("s")) run.s = cfg.get_int("s");
  if (cfg.has("m")) run.m = cfg.get_int("m");
  if (cfg.has("N")) run.N = cfg.get_u64("N");
  if (cfg.has("R")) run.R = cfg.get_int("R");
  if (cfg.has("seed")) run.master_seed = cfg.get_u64("seed");
  if (cfg.has("threads")) run.threads = cfg.get_int("threads");
  if (cfg.has("tol")) run.solver.tol = cfg.get_double("tol");
  if (cfg.has("max_iter")) run.solver.max_iter = cfg.get_int("max_iter");
  if (cfg.has("quantity")) {
    try {
      run.quantity = quantity_from_string(cfg.get("quantity"));
    } catch (const std::invalid_argument& e) {
      cfg.fail("quantity", e.what());
    }
  }
  return run;
}

}  // namespace qmcev
