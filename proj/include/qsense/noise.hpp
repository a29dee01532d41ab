#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qsense/waveform.hpp"

namespace qsense {

// Stochastic detuning models.  A model describes an ensemble; realize() draws
// one member as a Waveform, sample_trajectory() draws one member on a uniform
// time grid.  All rates are rad/s; spectra are indexed by ordinary frequency
// (Hz) and carry symmetric-spectrum densities in (rad/s)^2/Hz sampled on
// nu >= 0, so the total fluctuation power is S(0)*0-width + 2*integral over
// nu > 0.  Purely spectral lines (a static Gaussian offset, a random-phase
// tone) are reported separately with their integrated power in (rad/s)^2.

struct ConstantModel {
  double delta0 = 0.0;

  bool operator==(const ConstantModel&) const = default;
};

// frozen offset per realization: delta(t) = mean + sigma * xi, xi ~ N(0,1)
struct StaticGaussianModel {
  double mean = 0.0;
  double sigma = 0.0;

  bool operator==(const StaticGaussianModel&) const = default;
};

// amplitude * sin(2 pi frequency t + phase); phase = nullopt draws the phase
// uniformly per realization
struct SinusoidModel {
  double amplitude = 0.0;
  double frequency_hz = 0.0;
  std::optional<double> phase;

  bool operator==(const SinusoidModel&) const = default;
};

// Ornstein-Uhlenbeck process: stationary variance sigma^2, correlation time
// tau_c, autocovariance sigma^2 e^{-|u|/tau_c}
struct OrnsteinUhlenbeckModel {
  double sigma = 0.0;
  double tau_c = 0.0;

  bool operator==(const OrnsteinUhlenbeckModel&) const = default;
};

struct CompositeModel;

using SignalModel =
    std::variant<ConstantModel, StaticGaussianModel, SinusoidModel,
                 OrnsteinUhlenbeckModel, CompositeModel>;

// sum of independent component signals; nesting is not allowed (flatten)
struct CompositeModel {
  std::vector<SignalModel> parts;

  bool operator==(const CompositeModel&) const = default;
};

void validate_model(const SignalModel& model);

// true when every realization is the same signal (no random draws)
bool is_deterministic(const SignalModel& model);

// ------------------------------------------------------------------ spectra

struct SpectralLine {
  double frequency_hz = 0.0;
  double power = 0.0;  // integrated power, (rad/s)^2
};

// continuous spectral density at nu (>= 0, Hz), excluding line components;
// nullopt marks models without an ensemble spectrum (a fixed-phase sinusoid
// is deterministic but time dependent, so no stationary density exists)
std::optional<double> psd(const SignalModel& model, double nu_hz);

std::vector<SpectralLine> spectral_lines(const SignalModel& model);

bool psd_defined(const SignalModel& model);

// --------------------------------------------------------------- sampling

struct NoiseTrajectory {
  double dt = 0.0;
  std::vector<double> values;  // values[i] at t = i*dt
  std::uint64_t seed = 0;

  double span() const { return dt * static_cast<double>(values.size() - 1); }
};

// One realization sampled on t = 0, dt, ..., covering [0, total_time].
// Requires 0 < dt <= total_time; for OU components dt <= tau_c/10.
NoiseTrajectory sample_trajectory(const SignalModel& model, double total_time,
                                  double dt, std::uint64_t seed);

// One realization as a Waveform covering [0, total_time]: closed form where
// possible, sampled for OU components (grid min(tau_c/20, total_time/1000)).
// Composite members split the seed with derive_seed(seed, index).
Waveform realize(const SignalModel& model, double total_time,
                 std::uint64_t seed);

Waveform to_waveform(const NoiseTrajectory& traj);

void write_trajectory_csv(const NoiseTrajectory& traj, std::ostream& out);

// ------------------------------------------------------------- periodogram

struct Periodogram {
  std::vector<double> frequency_hz;
  std::vector<double> density;  // same convention as psd()
};

// Averaged periodogram over >= 100 equally sampled trajectories (the first
// 2^k samples of each are used).  Line components show up as bins growing
// linearly with the record length rather than converging densities.
Periodogram periodogram(std::span<const NoiseTrajectory> trajectories);

// ------------------------------------------------------------ text config

// Key-value model description:
//   model = constant | static_gaussian | sinusoid | ou | composite
//   # constant:         delta0
//   # static_gaussian:  mean (optional), sigma
//   # sinusoid:         amplitude, frequency, phase (radians or "random")
//   # ou:               sigma, tau_c
// Composite models list their parts in [component] sections.  Rates accept
// Hz-family units (converted by 2 pi) or rad/s; times accept ns|us|ms|s.
SignalModel parse_model(const std::string& text);

// canonical form (SI units); parse_model(format_model(m)) == m
std::string format_model(const SignalModel& model);

}  // namespace qsense
