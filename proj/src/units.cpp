#include "scc/units.hpp"

#include <cctype>
#include <cstdlib>
#include <map>
#include <utility>

namespace scc {

namespace {

const std::map<std::string, std::pair<Dimension, double>>& suffix_table() {
  using namespace units;
  static const std::map<std::string, std::pair<Dimension, double>> table = {
      {"nW", {Dimension::Power, nW}},
      {"uW", {Dimension::Power, uW}},
      {"µW", {Dimension::Power, uW}},  // µW
      {"μW", {Dimension::Power, uW}},  // μW
      {"mW", {Dimension::Power, mW}},
      {"W", {Dimension::Power, W}},
      {"ns", {Dimension::Duration, ns}},
      {"us", {Dimension::Duration, us}},
      {"µs", {Dimension::Duration, us}},
      {"μs", {Dimension::Duration, us}},
      {"ms", {Dimension::Duration, ms}},
      {"s", {Dimension::Duration, s}},
      {"Hz", {Dimension::Rate, Hz}},
      {"kHz", {Dimension::Rate, kHz}},
      {"MHz", {Dimension::Rate, MHz}},
      {"GHz", {Dimension::Rate, GHz}},
      {"Hz/W", {Dimension::RatePerPower, Hz / W}},
      {"kHz/W", {Dimension::RatePerPower, kHz / W}},
      {"MHz/W", {Dimension::RatePerPower, MHz / W}},
      {"GHz/W", {Dimension::RatePerPower, GHz / W}},
      {"Hz/uW", {Dimension::RatePerPower, Hz / uW}},
      {"Hz/µW", {Dimension::RatePerPower, Hz / uW}},
      {"Hz/μW", {Dimension::RatePerPower, Hz / uW}},
      {"kHz/uW", {Dimension::RatePerPower, kHz / uW}},
      {"MHz/uW", {Dimension::RatePerPower, MHz / uW}},
      {"Hz/mW", {Dimension::RatePerPower, Hz / mW}},
      {"kHz/mW", {Dimension::RatePerPower, kHz / mW}},
      {"eV", {Dimension::Energy, 1.0}},
  };
  return table;
}

}  // namespace

const char* dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::Power: return "power";
    case Dimension::Duration: return "duration";
    case Dimension::Rate: return "rate";
    case Dimension::RatePerPower: return "rate per power";
    case Dimension::Energy: return "energy";
    case Dimension::Frequency: return "frequency";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "unknown";
}

double parse_quantity(const std::string& text, Dimension dim) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double value = std::strtod(begin, &end);
  if (end == begin)
    throw std::invalid_argument("not a number: '" + text + "'");

  std::string suffix(end);
  while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front())))
    suffix.erase(suffix.begin());
  while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.back())))
    suffix.pop_back();

  if (suffix.empty()) return value;  // bare numbers are SI
  if (dim == Dimension::Dimensionless)
    throw std::invalid_argument("unexpected unit suffix '" + suffix + "' on dimensionless value");

  // Rates are accepted where frequencies are expected and vice versa.
  auto matches = [&](Dimension have) {
    if (have == dim) return true;
    return (have == Dimension::Rate && dim == Dimension::Frequency) ||
           (have == Dimension::Frequency && dim == Dimension::Rate);
  };

  auto it = suffix_table().find(suffix);
  if (it == suffix_table().end() || !matches(it->second.first))
    throw std::invalid_argument("unknown " + std::string(dimension_name(dim)) +
                                " unit suffix '" + suffix + "' in '" + text + "'");
  return value * it->second.second;
}

}  // namespace scc
