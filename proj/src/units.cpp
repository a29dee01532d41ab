#include "qsense/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "qsense/error.hpp"

namespace qsense {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

// splits "<number><suffix>" where suffix may be separated by spaces
bool split_quantity(const std::string& text, double* value, std::string* unit) {
  const std::string t = trim(text);
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, *value);
  if (ec != std::errc()) return false;
  *unit = trim(std::string(ptr, last));
  return true;
}

struct UnitScale {
  const char* name;
  double scale;
};

double parse_with_units(const std::string& text, const UnitScale* units,
                        std::size_t count, const char* kind,
                        bool unit_required) {
  double value = 0.0;
  std::string unit;
  if (!split_quantity(text, &value, &unit))
    throw Error("cannot parse " + std::string(kind) + " '" + text + "'");
  if (unit.empty()) {
    if (!unit_required || value == 0.0) return value;
    throw Error(std::string(kind) + " '" + text + "' is missing a unit");
  }
  const std::string u = lower(unit);
  for (std::size_t i = 0; i < count; ++i)
    if (u == lower(units[i].name)) return value * units[i].scale;
  throw Error("unknown " + std::string(kind) + " unit '" + unit + "' in '" +
              text + "'");
}

constexpr std::array<UnitScale, 4> kTimeUnits = {
    {{"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0}}};

constexpr std::array<UnitScale, 4> kFreqUnits = {
    {{"hz", 1.0}, {"khz", 1e3}, {"mhz", 1e6}, {"ghz", 1e9}}};

constexpr std::array<UnitScale, 5> kFieldUnits = {
    {{"t", 1.0}, {"mt", 1e-3}, {"ut", 1e-6}, {"nt", 1e-9}, {"pt", 1e-12}}};

}  // namespace

double parse_duration(const std::string& text) {
  return parse_with_units(text, kTimeUnits.data(), kTimeUnits.size(),
                          "duration", true);
}

double parse_angular_rate(const std::string& text) {
  double value = 0.0;
  std::string unit;
  if (!split_quantity(text, &value, &unit))
    throw Error("cannot parse rate '" + text + "'");
  const std::string u = lower(unit);
  if (u == "rad/s") return value;
  if (u.empty()) {
    if (value == 0.0) return 0.0;
    throw Error("rate '" + text + "' is missing a unit");
  }
  for (const auto& f : kFreqUnits)
    if (u == f.name) return value * f.scale * kTwoPi;
  throw Error("unknown rate unit '" + unit + "' in '" + text + "'");
}

double parse_frequency_hz(const std::string& text) {
  return parse_with_units(text, kFreqUnits.data(), kFreqUnits.size(),
                          "frequency", true);
}

double parse_field(const std::string& text) {
  return parse_with_units(text, kFieldUnits.data(), kFieldUnits.size(),
                          "field", true);
}

double parse_gyromagnetic(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos)
    throw Error("gyromagnetic ratio '" + text +
                "' must look like '<frequency>/<field>', e.g. 30MHz/mT");
  const double num = parse_angular_rate(trim(text.substr(0, slash)));
  const std::string denom = trim(text.substr(slash + 1));
  // denominator is a bare field unit ("mT") or a quantity ("1 mT")
  std::string d = denom;
  if (!d.empty() && !(std::isdigit(static_cast<unsigned char>(d[0])) ||
                      d[0] == '.' || d[0] == '+' || d[0] == '-'))
    d = "1" + d;
  const double den = parse_field(d);
  if (den == 0.0) throw Error("zero field in gyromagnetic ratio '" + text + "'");
  return num / den;
}

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw Error("cannot parse number '" + text + "'");
  return value;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string format_duration_dsl(double seconds) {
  // prefer ns/us/ms when the scaled value survives a round trip exactly
  for (const auto& u : kTimeUnits) {
    if (u.scale == 1.0) continue;
    const double scaled = seconds / u.scale;
    if (scaled >= 1.0 && scaled < 1e4 && scaled * u.scale == seconds)
      return format_double(scaled) + u.name;
  }
  return format_double(seconds) + "s";
}

}  // namespace qsense
