#include "fracheat/types.hpp"

#include <cctype>
#include <charconv>

namespace fracheat {

namespace {

std::int64_t parse_int(std::string_view s, const std::string& whole) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError("cannot parse rational '" + whole + "'");
  return v;
}

}  // namespace

Rational Rational::parse(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ConfigError("empty rational");
  if (auto slash = s.find('/'); slash != std::string::npos) {
    return Rational(parse_int(std::string_view(s).substr(0, slash), text),
                    parse_int(std::string_view(s).substr(slash + 1), text));
  }
  if (auto dot = s.find('.'); dot != std::string::npos) {
    const std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    const auto decimals = static_cast<int>(s.size() - dot - 1);
    if (decimals > 15) throw ConfigError("too many decimals in '" + text + "'");
    std::int64_t den = 1;
    for (int i = 0; i < decimals; ++i) den *= 10;
    return Rational(parse_int(digits, text), den);
  }
  return Rational(parse_int(s, text), 1);
}

std::string Rational::str() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Hurst::Hurst(Rational h) : h_(h) {
  if (!(h_ > Rational(1, 3)) || h_ > Rational(1, 2))
    throw ConfigError("Hurst parameter must lie in (1/3, 1/2], got " + h_.str());
}

}  // namespace fracheat
