#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qsense/noise.hpp"
#include "qsense/sensor.hpp"
#include "qsense/sequence.hpp"
#include "qsense/waveform.hpp"

namespace qsense {

struct EngineOptions {
  long realizations = 1000;  // Monte Carlo draws for stochastic models
  int threads = 0;           // 0: hardware concurrency
  int pulse_substeps = 64;   // integration steps across one finite-width pulse

  void validate() const;
};

// Propagate |0> through the sequence with detuning waveform delta(t) and
// return the |1> population.  Ideal (zero-width) pulses are exact rotations;
// delays apply the exact accumulated phase integral of delta; finite-width
// pulses are integrated with pulse_substeps piecewise-constant detuning steps.
double run_once(const PulseSequence& seq, const Waveform& delta,
                int pulse_substeps = 64);

// Mean |1> population over realizations of the model (one realization when
// the model is deterministic).  Realization r draws derive_seed(seed, r).
double noise_averaged_population(const PulseSequence& seq, const SignalModel& model,
                                 const EngineOptions& opts, std::uint64_t seed);

// ----------------------------------------------------------------- readout

struct ReadoutSample {
  double p_hat = 0.0;    // estimated |1> population, contrast unfolded
  double std_err = 0.0;  // binomial standard error of p_hat
};

// Draw reps*sensors/m0 Bernoulli samples at the contrast-folded probability
// and invert the fold.  p_hat is clamped to [0, 1].
ReadoutSample simulate_readout(double p_true, const ReadoutConfig& readout,
                               std::uint64_t seed);

struct DetuningEstimate {
  double delta = 0.0;  // rad/s
  double sigma = 0.0;  // rad/s
};

// Linear fringe-slope estimator around the bias point delta0 (default
// pi/(2 tau), mid fringe): delta = delta0 - (2/tau)(p_hat - 1/2).  Valid for
// |delta - delta0| * tau < 0.5.
DetuningEstimate estimate_detuning(double p_hat, double tau, double sigma_p,
                                   double delta0);

// ------------------------------------------------------------- experiments

struct SweepSpec {
  enum class Kind { Tau, Detuning, PulseCount };
  Kind kind = Kind::Tau;
  std::vector<double> values;

  const char* column_label() const;  // CSV header for the swept variable
};

struct SweepPoint {
  double x = 0.0;
  double p_true = 0.0;   // noise-averaged population before readout
  double p_hat = 0.0;    // readout estimate
  double std_err = 0.0;  // readout standard error
};

struct ExperimentResult {
  SweepSpec sweep;
  std::vector<SweepPoint> points;
  std::string sequence_text;  // sequence at the first sweep value
  std::string model_text;
  ReadoutConfig readout;
  EngineOptions options;
};

// Run sequence_at(x) against the model at every sweep value.  A Detuning
// sweep adds a constant offset x to the model instead of re-deriving the
// sequence.  Point i uses derive_seed(readout.root_seed, i) for both the
// noise average and the readout draw, so results are independent of point
// order and thread count.
ExperimentResult run_experiment(const SweepSpec& sweep,
                                const std::function<PulseSequence(double)>& sequence_at,
                                const SignalModel& model, const ReadoutConfig& readout,
                                const EngineOptions& opts);

// ------------------------------------------------------------------ curves

struct DecayPoint {
  double tau = 0.0;        // swept delay parameter, s
  double coherence = 0.0;  // 2*p_mean - 1
};

// Noise-averaged coherence without readout sampling.
std::vector<DecayPoint> coherence_decay_curve(
    const std::function<PulseSequence(double)>& sequence_at, std::span<const double> taus,
    const SignalModel& model, const EngineOptions& opts, std::uint64_t seed);

// Lorentzian resonance dip: 1 - contrast / (1 + ((w - w0 - gamma B)/linewidth)^2)
// with linewidth the half width at half maximum (rad/s).
std::vector<double> odmr_scan(std::span<const double> omegas, double field,
                              const SensorSpec& sensor, double linewidth,
                              double contrast);

}  // namespace qsense
