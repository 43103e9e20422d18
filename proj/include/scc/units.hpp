#ifndef SCC_UNITS_HPP
#define SCC_UNITS_HPP

#include <stdexcept>
#include <string>

namespace scc {

// Everything internal is SI: rates in Hz, powers in W, times in s,
// energies in eV. Config files may attach unit suffixes; parse_quantity
// normalizes them at the boundary.

namespace units {
constexpr double nW = 1e-9;
constexpr double uW = 1e-6;
constexpr double mW = 1e-3;
constexpr double W = 1.0;

constexpr double ns = 1e-9;
constexpr double us = 1e-6;
constexpr double ms = 1e-3;
constexpr double s = 1.0;

constexpr double Hz = 1.0;
constexpr double kHz = 1e3;
constexpr double MHz = 1e6;
constexpr double GHz = 1e9;
}  // namespace units

enum class Dimension { Power, Duration, Rate, RatePerPower, Energy, Frequency, Dimensionless };

// Parses "71 mW", "20ms", "10.6 MHz/W", "2.09 eV", or a bare number
// (interpreted as SI). Throws std::invalid_argument on an unknown suffix.
double parse_quantity(const std::string& text, Dimension dim);

const char* dimension_name(Dimension dim);

}  // namespace scc

#endif
