#pragma once

#include <limits>
#include <variant>
#include <vector>

namespace qsense {

// One realization of a detuning signal Delta(t) in rad/s.  Closed forms
// (constant, sinusoid, piecewise constant and sums thereof) evaluate and
// integrate exactly; sampled data integrates its piecewise-linear
// interpolant (trapezoid rule on the sample grid).
class Waveform {
 public:
  static Waveform constant(double value);
  // amplitude in rad/s, frequency in Hz: amp * sin(2 pi f t + phase)
  static Waveform sinusoid(double amplitude, double frequency_hz, double phase);
  // values[i] on [knots[i], knots[i+1]); zero outside [knots.front(), knots.back())
  static Waveform piecewise_constant(std::vector<double> knots,
                                     std::vector<double> values);
  // samples[i] at t = i*dt; defined on [0, (n-1)*dt]
  static Waveform sampled(double dt, std::vector<double> samples);
  static Waveform sum(std::vector<Waveform> parts);

  double value(double t) const;
  // integral of Delta over [t0, t1]
  double integral(double t0, double t1) const;

  // end of the interval on which the waveform is defined (infinity for
  // closed forms); integrating past it throws
  double coverage() const;

 private:
  struct Constant {
    double value;
  };
  struct Sinusoid {
    double amplitude, frequency_hz, phase;
  };
  struct Piecewise {
    std::vector<double> knots;
    std::vector<double> values;
  };
  struct Sampled {
    double dt;
    std::vector<double> samples;
  };
  struct Sum {
    std::vector<Waveform> parts;
  };

  using Node = std::variant<Constant, Sinusoid, Piecewise, Sampled, Sum>;

  explicit Waveform(Node node) : node_(std::move(node)) {}

  Node node_;
};

}  // namespace qsense
