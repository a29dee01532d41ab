#pragma once

#include <string>

namespace qsense {

// Boundary-layer unit handling.  Internally all rates are angular (rad/s),
// all times are seconds and all fields are tesla.  Quantities written in
// frequency units (Hz, kHz, MHz, GHz) denote ordinary frequencies and are
// multiplied by 2*pi on the way in; "rad/s" is taken literally.

// "0.5us", "12 ns", "1e-3 s" -> seconds
double parse_duration(const std::string& text);

// "50kHz", "1 MHz", "3.1e5 rad/s" -> rad/s
double parse_angular_rate(const std::string& text);

// "50kHz", "1 MHz" -> Hz (ordinary frequency, no 2*pi)
double parse_frequency_hz(const std::string& text);

// "10uT", "1 mT", "2e-9 T" -> tesla
double parse_field(const std::string& text);

// "30MHz/mT" -> rad/s per tesla
double parse_gyromagnetic(const std::string& text);

// plain real number, locale independent
double parse_number(const std::string& text);

// Shortest representation that parses back to exactly the same double.
std::string format_double(double v);

// Formats a duration for the pulse DSL: picks ns/us/ms/s such that
// re-parsing reproduces the exact bit pattern, preferring readable units.
std::string format_duration_dsl(double seconds);

}  // namespace qsense
