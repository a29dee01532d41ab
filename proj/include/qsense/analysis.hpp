#pragma once

#include <span>
#include <string>
#include <vector>

#include "qsense/noise.hpp"
#include "qsense/sensor.hpp"
#include "qsense/sequence.hpp"

namespace qsense {

// coherence envelope under a frozen Gaussian detuning spread:
// exp(-sigma^2 tau^2 / 2)
double static_envelope(double sigma, double tau);

// Accumulated phase variance of a sensing sequence under a noise model,
// summed over the sequence's harmonic filter weights:
//   <phi^2> = W(0) S(0) + 2 sum_{n>=1} W(nu_n) S(nu_n)
//           + sum_lines T W(nearest harmonic) P_line.
// Harmonics are spaced 1/T, so the result is reliable when every continuous
// component decorrelates well inside the sequence (tau_c << T); quasi-static
// components belong in the line terms instead.  Weights fall off as 1/n^2,
// so the default cutoff keeps the truncation error well under 1% for the
// filters produced by the standard sequences.  Throws when the model has no
// ensemble spectrum (fixed-phase sinusoid).
double phase_variance(const FilterSpectrum& filter, const SignalModel& model);

// Gaussian-phase population: 1/2 (1 + exp(-variance/2))
double predicted_population(double phase_variance);

// --------------------------------------------------------------- spectrum

struct SpectrumPoint {
  double frequency_hz = 0.0;
  double density = 0.0;  // (rad/s)^2/Hz, symmetric-spectrum convention
};

struct SpectrumReconstruction {
  std::vector<SpectrumPoint> points;
  std::vector<std::string> diagnostics;  // skipped inputs, with reasons
};

// Invert measured multipulse coherences into spectral densities.  Input
// point i is the coherence of an n_pulses echo train with inter-pulse delay
// taus[i]; it probes nu = 1/(2 taus[i]).  The phase variance -2 ln C is
// divided by the filter weight pooled over the harmonics within 1/T of the
// peak.  Coherences <= 0 are skipped with a diagnostic; C > 1 is an error.
SpectrumReconstruction reconstruct_spectrum(std::span<const double> taus,
                                            std::span<const double> coherences,
                                            int n_pulses);

// ------------------------------------------------------------ sensitivity

struct SensitivityReport {
  std::string mode;                  // "dc" or "ac"
  double interrogation_time = 0.0;   // s per shot
  double eta = 0.0;                  // ideal-readout sensitivity, T/sqrt(Hz)
  double readout_penalty = 1.0;      // sqrt(m0)/contrast
  double eta_effective = 0.0;        // eta * readout_penalty
  double averaging_time = 0.0;       // s
  double sigma_b = 0.0;              // field error after averaging, T
  double sigma_delta = 0.0;          // gamma * sigma_b, rad/s
  double sigma_p = 0.0;              // per-shot population error implied
};

// Shot-noise-limited dc sensitivity with tau = T2*:
// eta = 1/(gamma sqrt(readout.sensors * T2*)), degraded by sqrt(m0)/contrast.
SensitivityReport sensitivity_dc(const SensorSpec& sensor, const ReadoutConfig& readout,
                                 double averaging_time);

// ac variant with echo-extended interrogation:
// eta = 1/(gamma sqrt(readout.sensors * T2))
SensitivityReport sensitivity_ac(const SensorSpec& sensor, const ReadoutConfig& readout,
                                 double averaging_time);

struct OptimalTau {
  double tau = 0.0;         // minimizer of exp(sigma^2 tau^2/2)/sqrt(tau)
  double eta_scale = 0.0;   // minimum of that objective
};

// Interrogation time that balances the frozen-Gaussian envelope against
// 1/sqrt(tau) shot-noise averaging; the exact answer is 1/(sigma sqrt(2)).
OptimalTau optimal_tau(double sigma);

struct EntanglementComparison {
  double eta_independent = 0.0;  // N uncorrelated sensors
  double eta_naive = 0.0;        // GHZ slope gain with unchanged T2*
  double eta_corrected = 0.0;    // GHZ slope gain with T2*/N dephasing
};

// N-sensor comparison at tau = T2* (independent) vs tau = T2*/N (GHZ):
// the corrected GHZ sensitivity equals the independent one.
EntanglementComparison entanglement_comparison(long n, double gamma, double t2_star);

}  // namespace qsense
