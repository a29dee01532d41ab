#pragma once

#include <cstdint>

namespace qsense {

// Physical parameters of the sensing qubit.  Defaults describe a typical
// solid-state spin: gyromagnetic ratio 2 pi * 30 MHz/mT, zero-field splitting
// 2 pi * 2.87 GHz, T2* = 1 us, T2 = 300 us, T1 = 6 ms.
struct SensorSpec {
  double gamma = 2.0 * 3.141592653589793 * 3.0e10;   // rad/s per tesla
  double omega0 = 2.0 * 3.141592653589793 * 2.87e9;  // rad/s
  double t2_star = 1.0e-6;                           // s
  double t2 = 3.0e-4;                                // s
  double t1 = 6.0e-3;                                // s

  void validate() const;
};

// Projective-readout budget.  One sweep point spends reps shots on each of
// sensors independent qubits; m0 shots are pooled per recorded sample, so the
// sample count is reps*sensors/m0.  contrast scales the visible probability
// swing: the recorded success rate is 1/2 + contrast*(p - 1/2).
struct ReadoutConfig {
  long reps = 1000;
  long sensors = 1;
  long m0 = 1;
  double contrast = 1.0;
  std::uint64_t root_seed = 1;

  long samples() const;  // reps*sensors/m0, at least 1
  void validate() const;
};

}  // namespace qsense
