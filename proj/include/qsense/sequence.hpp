#pragma once

#include <complex>
#include <string>
#include <variant>
#include <vector>

#include "qsense/error.hpp"
#include "qsense/qubit.hpp"
#include "qsense/waveform.hpp"

namespace qsense {

// Pulse sequences, the text format that describes them, the canonical
// sensing sequences, and the switching (sensitivity) function machinery.
//
// Text format, one statement per ';' or newline, '#' starts a comment,
// keywords are case-insensitive:
//   p2 <axis>           pi/2 pulse about x or y
//   pi <axis>           pi pulse about x or y
//   rot <angle> <axis>  rotation by <angle> radians about x or y
//   wait <duration>     free evolution; duration needs a unit: ns|us|ms|s
// Pulses written in the text form are ideal (instantaneous).

enum class PulseKind { PiHalf, Pi, Arbitrary };

struct Pulse {
  PulseKind kind = PulseKind::PiHalf;
  Axis axis = Axis::Y;
  double angle = 0.0;     // radians; pi/2 and pi kinds store their nominal angle
  double duration = 0.0;  // seconds; 0 = ideal instantaneous pulse

  bool operator==(const Pulse&) const = default;
};

struct Delay {
  double duration = 0.0;  // seconds, > 0

  bool operator==(const Delay&) const = default;
};

using Event = std::variant<Pulse, Delay>;

class PulseSequence {
 public:
  PulseSequence() = default;

  PulseSequence& pulse(PulseKind kind, Axis axis, double duration = 0.0);
  PulseSequence& rotation(double angle, Axis axis, double duration = 0.0);
  PulseSequence& wait(double duration);

  const std::vector<Event>& events() const { return events_; }
  bool empty() const { return events_.empty(); }

  std::size_t pulse_count() const;
  std::size_t pi_pulse_count() const;

  // total duration of the whole sequence (all delays and pulse widths)
  double span() const;

  // interrogation time T: time elapsed between the end of the first pulse
  // and the start of the last pulse (for the canonical sequences, the free
  // evolution enclosed by the two pi/2 pulses)
  double total_time() const;

  bool operator==(const PulseSequence&) const = default;

 private:
  std::vector<Event> events_;
};

enum class ParseErrorKind { Syntax, BadDelay, BadAxis };

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, int line, int column,
             const std::string& message);

  ParseErrorKind kind() const { return kind_; }
  int line() const { return line_; }      // 1-based
  int column() const { return column_; }  // 1-based

 private:
  ParseErrorKind kind_;
  int line_;
  int column_;
};

PulseSequence parse_sequence(const std::string& text);

// One statement per line; durations keep their exact value on re-parse.
// Throws for sequences with finite-width pulses (not expressible in text).
std::string format_sequence(const PulseSequence& seq);

// Canonical sequences.  The pi/2 pulses are about y; interior pi pulses are
// about x so that, with zero accumulated phase, the pulses of every sequence
// compose to a net pi rotation and the readout population is 1 regardless of
// the pulse count.
PulseSequence ramsey(double tau);
PulseSequence hahn(double tau);
// n pi pulses; edge delays tau/2, interior delays tau, T = n*tau, so the
// pass band sits exactly at 1/(2 tau)
PulseSequence cpmg(int n, double tau);
// n pi pulses at t_j = T sin^2(pi j / (2n + 2))
PulseSequence uhrig(int n, double total_time);

// Throws unless the sequence is a valid sensing sequence: at least two
// pulses, pi/2 first and last, every interior pulse a pi pulse about x or y.
void check_sensing_sequence(const PulseSequence& seq);

// Switching function g(t) on the absolute sequence time axis: +1 from the
// first pi/2 pulse, sign flip at each interior pi pulse (finite-width pulses
// flip at their midpoint), 0 outside.  Piecewise constant with
// pi_pulse_count + 1 segments.
class SensitivityFunction {
 public:
  SensitivityFunction(std::vector<double> breakpoints, std::vector<int> signs);

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<int>& signs() const { return signs_; }

  double start() const { return breakpoints_.front(); }
  double end() const { return breakpoints_.back(); }
  double total_time() const { return end() - start(); }

  // g(t); 0 outside [start, end)
  int value(double t) const;

 private:
  std::vector<double> breakpoints_;
  std::vector<int> signs_;
};

SensitivityFunction sensitivity_function(const PulseSequence& seq);

// phi = integral of g(t) * Delta(t); exact per segment for closed-form
// waveforms, trapezoid-on-grid for sampled ones (sample step <= T/1e4
// recommended).  Throws if the waveform does not cover the sequence.
double phase_from_signal(const SensitivityFunction& g, const Waveform& signal);

// Harmonic decomposition of g over its support: g_n = integral of
// g(t) e^{-i 2 pi n t / T} dt for n = -n_max .. n_max (only n >= 0 stored;
// g_{-n} = conj(g_n) since g is real).  The filter weight at harmonic n is
// S_g(nu_n) = |g_n|^2 / T at nu_n = n / T.
class FilterSpectrum {
 public:
  FilterSpectrum(double total_time, std::vector<std::complex<double>> coeff);

  double total_time() const { return total_time_; }
  int max_harmonic() const { return static_cast<int>(coeff_.size()) - 1; }

  std::complex<double> coefficient(int n) const;  // signed n
  double frequency(int n) const;                  // n / T, Hz
  double weight(int n) const;                     // |g_n|^2 / T
  // weight at the harmonic nearest to `nu` (nu in Hz, clamped to n_max)
  double weight_at(double nu) const;

  // sum over n = -n_max..n_max of |g_n|^2 / T^2; tends to 1 as n_max grows
  double parseval_total() const;

 private:
  double total_time_;
  std::vector<std::complex<double>> coeff_;  // n = 0 .. n_max
};

FilterSpectrum filter_spectrum(const SensitivityFunction& g, int n_max);

}  // namespace qsense
