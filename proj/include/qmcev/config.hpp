// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_CONFIG_HPP
#define QMCEV_CONFIG_HPP

#include "qmcev/coeff.hpp"
#include "qmcev/estimator.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmcev
{

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// `key = value` text with `#` comments. Files written by the tools carry
/// their configuration as `# config: key = value` lines; when such lines are
/// present only they are read, so any emitted artifact is itself a config.
class ConfigFile
{
public:
  static ConfigFile parse(std::istream& is, const std::string& source = "<config>");
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// Sets or overrides a value (command-line flags).
  void set(const std::string& key, const std::string& value);
  /// Sets a value only if the key is absent.
  void set_default(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  int get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  /// Accepts decimal literals and fractions such as `4/3`.
  double get_double(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key) const;

  /// Throws ConfigError naming the line of the first key outside `known`.
  void check_known(const std::set<std::string>& known) const;
  /// Throws ConfigError listing the absent keys.
  void require(const std::vector<std::string>& keys) const;

  /// `config: key = value` for every entry, sorted by key.
  std::vector<std::string> resolved_lines() const;

  /// Throws ConfigError prefixed with the source and the key's line.
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
  struct Entry
  {
    std::string value;
    int line = 0;  // 0 for values not read from the file
  };

  std::string source_;
  std::map<std::string, Entry> entries_;
};

/// Every key the tools understand.
const std::set<std::string>& known_config_keys();

/// Paper N-list 31, 61, ..., 4001 truncated to n_max.
std::vector<std::uint64_t> default_N_list(std::uint64_t n_max);

/// `family` with `q` (problem1), or `q_a`, `q_a_mod`, `q_b`, `q_b_mod`
/// (problem2, each defaulting to `q`, then 2).
CoefficientField field_from_config(const ConfigFile& cfg);

/// RunConfig from family, s, m, N, R, seed, quantity, threads, tol, max_iter.
/// Keys the caller has not required fall back to RunConfig defaults.
RunConfig run_config_from(const ConfigFile& cfg);

}  // namespace qmcev

#endif  // QMCEV_CONFIG_HPP
