#include "fracheat/config.hpp"

#include "fracheat/io.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace fracheat {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(s);
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  if (t.find('/') != std::string::npos) return Rational::parse(t).value();
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
    throw ConfigError("not a number: '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ','))
    if (!item.empty()) out.push_back(parse_number(item));
  return out;
}

Mat parse_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  for (const auto& r : split(text, ';'))
    if (!r.empty()) rows.push_back(parse_list(r));
  if (rows.empty()) throw ConfigError("empty matrix: '" + text + "'");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("ragged matrix: '" + text + "'");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (cfg.has(key)) throw ConfigError("duplicate config field '" + key + "'");
    cfg.entries_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) { return parse(read_text_file(path)); }

const std::string& KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing config field '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

namespace {

template <class F>
auto field(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  } catch (const Error& e) {
    throw ConfigError("config field '" + key + "': " + e.what());
  }
}

}  // namespace

double KeyValueConfig::number(const std::string& key) const {
  const std::string& v = get(key);
  return field(key, [&] { return parse_number(v); });
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

int KeyValueConfig::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError("config field '" + key + "': not an integer");
  return static_cast<int>(v);
}

int KeyValueConfig::integer_or(const std::string& key, int fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t KeyValueConfig::unsigned_integer(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw ConfigError("config field '" + key + "': not a nonnegative integer");
  return out;
}

std::vector<double> KeyValueConfig::list(const std::string& key) const {
  const std::string& v = get(key);
  return field(key, [&] { return parse_list(v); });
}

Vec KeyValueConfig::vector(const std::string& key) const {
  const auto l = list(key);
  return Eigen::Map<const Vec>(l.data(), static_cast<Eigen::Index>(l.size()));
}

Mat KeyValueConfig::matrix(const std::string& key) const {
  const std::string& v = get(key);
  return field(key, [&] { return parse_matrix(v); });
}

void KeyValueConfig::check_known(const std::set<std::string>& known) const {
  for (const auto& [key, value] : entries_) {
    bool ok = known.count(key) > 0;
    for (const auto& k : known) ok = ok || (!k.empty() && k.back() == '.' && key.rfind(k, 0) == 0);
    if (!ok) throw ConfigError("unknown config field '" + key + "'");
  }
}

std::string KeyValueConfig::str() const {
  std::string out;
  for (const auto& [key, value] : entries_) out += key + " = " + value + "\n";
  return out;
}

}  // namespace fracheat
