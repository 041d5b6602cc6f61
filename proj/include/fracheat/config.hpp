#pragma once

// Key-value configuration files.
//
//   # comment
//   key = value
//
// Keys are unique; values are trimmed.  Lists are comma separated ("0.1, 0.2"),
// matrices list rows separated by ';' ("1, 0; 0, 1").  Rationals such as 2/5 are
// accepted wherever a number is expected.

#include "fracheat/types.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fracheat {

class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Throws ConfigError("missing config field '<key>'") when absent.
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  int integer(const std::string& key) const;
  int integer_or(const std::string& key, int fallback) const;
  std::uint64_t unsigned_integer(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  Vec vector(const std::string& key) const;
  Mat matrix(const std::string& key) const;

  /// Throws ConfigError naming the first key outside `known` (prefix match when a known entry ends in '.').
  void check_known(const std::set<std::string>& known) const;

  std::string str() const;

 private:
  std::map<std::string, std::string> entries_;
};

double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);
Mat parse_matrix(const std::string& text);

}  // namespace fracheat
