#include "qsense/engine.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "qsense/error.hpp"
#include "qsense/qubit.hpp"
#include "qsense/rng.hpp"
#include "qsense/util.hpp"

namespace qsense {

void SensorSpec::validate() const {
  if (!(gamma > 0.0)) throw Error("sensor: gamma must be > 0");
  if (!(omega0 > 0.0)) throw Error("sensor: omega0 must be > 0");
  if (!(t2_star > 0.0)) throw Error("sensor: t2_star must be > 0");
  if (!(t2 >= t2_star)) throw Error("sensor: t2 must be >= t2_star");
  if (!(t1 >= t2)) throw Error("sensor: t1 must be >= t2");
}

long ReadoutConfig::samples() const { return std::max(1L, reps * sensors / m0); }

void ReadoutConfig::validate() const {
  if (reps < 1) throw Error("readout: reps must be >= 1");
  if (sensors < 1) throw Error("readout: sensors must be >= 1");
  if (m0 < 1) throw Error("readout: m0 must be >= 1");
  if (!(contrast > 0.0 && contrast <= 1.0))
    throw Error("readout: contrast must be in (0, 1]");
}

void EngineOptions::validate() const {
  if (realizations < 1) throw Error("engine: realizations must be >= 1");
  if (threads < 0) throw Error("engine: threads must be >= 0");
  if (pulse_substeps < 1) throw Error("engine: pulse_substeps must be >= 1");
}

double run_once(const PulseSequence& seq, const Waveform& delta, int pulse_substeps) {
  if (pulse_substeps < 1) throw Error("run_once: pulse_substeps must be >= 1");
  const double span = seq.span();
  if (delta.coverage() < span * (1.0 - 1e-12))
    throw Error("run_once: waveform does not cover the sequence");

  Cplx a0(1.0, 0.0);
  Cplx a1(0.0, 0.0);
  const auto apply = [&](const Mat2& u) {
    const Cplx b0 = u.a00 * a0 + u.a01 * a1;
    const Cplx b1 = u.a10 * a0 + u.a11 * a1;
    a0 = b0;
    a1 = b1;
  };

  double t = 0.0;
  for (const Event& ev : seq.events()) {
    if (const auto* d = std::get_if<Delay>(&ev)) {
      const double phi = delta.integral(t, t + d->duration);
      apply(free_evolution_operator(1.0, phi));
      t += d->duration;
    } else {
      const auto& p = std::get<Pulse>(ev);
      if (p.duration == 0.0) {
        apply(rotation_operator(p.axis, p.angle));
      } else {
        const double rabi = p.angle / p.duration;
        const double h = p.duration / pulse_substeps;
        for (int k = 0; k < pulse_substeps; ++k) {
          const double t1 = t + k * h;
          const double t2 = (k + 1 == pulse_substeps) ? t + p.duration : t + (k + 1) * h;
          const double mean_delta = delta.integral(t1, t2) / (t2 - t1);
          apply(rabi_operator(rabi, mean_delta, t2 - t1, p.axis));
        }
        t += p.duration;
      }
    }
  }
  return std::clamp(std::norm(a1), 0.0, 1.0);
}

double noise_averaged_population(const PulseSequence& seq, const SignalModel& model,
                                 const EngineOptions& opts, std::uint64_t seed) {
  opts.validate();
  validate_model(model);
  const double span = seq.span();
  if (span <= 0.0) return run_once(seq, Waveform::constant(0.0), opts.pulse_substeps);

  const long n = is_deterministic(model) ? 1 : opts.realizations;
  std::vector<double> populations(static_cast<std::size_t>(n));
  parallel_for(populations.size(), opts.threads, [&](std::size_t r) {
    const Waveform delta = realize(model, span, derive_seed(seed, r));
    populations[r] = run_once(seq, delta, opts.pulse_substeps);
  });
  return std::clamp(pairwise_mean(populations), 0.0, 1.0);
}

ReadoutSample simulate_readout(double p_true, const ReadoutConfig& readout,
                               std::uint64_t seed) {
  readout.validate();
  if (!(p_true >= -1e-9 && p_true <= 1.0 + 1e-9))
    throw Error("simulate_readout: probability out of range");
  const double p = std::clamp(p_true, 0.0, 1.0);
  const double folded = 0.5 + readout.contrast * (p - 0.5);
  const long k = readout.samples();

  Rng rng(seed);
  long successes = 0;
  for (long i = 0; i < k; ++i) successes += rng.bernoulli(folded) ? 1 : 0;

  const double kd = static_cast<double>(k);
  const double f = static_cast<double>(successes) / kd;
  // clamp away from 0/1 so the error bar stays positive on degenerate draws
  const double fc = std::clamp(f, 0.5 / kd, 1.0 - 0.5 / kd);
  ReadoutSample out;
  out.p_hat = std::clamp(0.5 + (f - 0.5) / readout.contrast, 0.0, 1.0);
  out.std_err = std::sqrt(fc * (1.0 - fc) / kd) / readout.contrast;
  return out;
}

DetuningEstimate estimate_detuning(double p_hat, double tau, double sigma_p,
                                   double delta0) {
  if (!(tau > 0.0)) throw Error("estimate_detuning: tau must be > 0");
  if (!(sigma_p >= 0.0)) throw Error("estimate_detuning: sigma_p must be >= 0");
  if (!(p_hat >= 0.0 && p_hat <= 1.0))
    throw Error("estimate_detuning: p_hat out of range");
  DetuningEstimate est;
  est.delta = delta0 - (2.0 / tau) * (p_hat - 0.5);
  est.sigma = 2.0 * sigma_p / tau;
  return est;
}

const char* SweepSpec::column_label() const {
  switch (kind) {
    case Kind::Tau: return "tau_s";
    case Kind::Detuning: return "detuning_rad_per_s";
    case Kind::PulseCount: return "n_pulses";
  }
  throw Error("sweep: unknown kind");
}

namespace {

SignalModel with_offset(const SignalModel& model, double offset) {
  CompositeModel comp;
  if (const auto* base = std::get_if<CompositeModel>(&model))
    comp = *base;
  else
    comp.parts.push_back(model);
  comp.parts.push_back(ConstantModel{offset});
  return comp;
}

}  // namespace

ExperimentResult run_experiment(const SweepSpec& sweep,
                                const std::function<PulseSequence(double)>& sequence_at,
                                const SignalModel& model, const ReadoutConfig& readout,
                                const EngineOptions& opts) {
  if (sweep.values.empty()) throw Error("run_experiment: empty sweep");
  for (double x : sweep.values) {
    if (!std::isfinite(x)) throw Error("run_experiment: sweep values must be finite");
    if (sweep.kind == SweepSpec::Kind::PulseCount &&
        (x < 1.0 || x != std::floor(x)))
      throw Error("run_experiment: pulse counts must be positive integers");
  }
  readout.validate();
  opts.validate();
  validate_model(model);

  ExperimentResult result;
  result.sweep = sweep;
  result.readout = readout;
  result.options = opts;
  result.model_text = format_model(model);
  try {
    result.sequence_text = format_sequence(sequence_at(sweep.values.front()));
  } catch (const Error&) {
    result.sequence_text = "";  // finite-width pulses have no text form
  }

  result.points.reserve(sweep.values.size());
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    const double x = sweep.values[i];
    const PulseSequence seq = sequence_at(x);
    const SignalModel local =
        sweep.kind == SweepSpec::Kind::Detuning ? with_offset(model, x) : model;
    const std::uint64_t point_seed = derive_seed(readout.root_seed, i);
    const double p_true =
        noise_averaged_population(seq, local, opts, derive_seed(point_seed, 0));
    const ReadoutSample sample =
        simulate_readout(p_true, readout, derive_seed(point_seed, 1));
    result.points.push_back({x, p_true, sample.p_hat, sample.std_err});
  }
  return result;
}

std::vector<DecayPoint> coherence_decay_curve(
    const std::function<PulseSequence(double)>& sequence_at, std::span<const double> taus,
    const SignalModel& model, const EngineOptions& opts, std::uint64_t seed) {
  if (taus.empty()) throw Error("decay: empty tau grid");
  for (std::size_t i = 0; i + 1 < taus.size(); ++i)
    if (!(taus[i] < taus[i + 1])) throw Error("decay: tau grid must ascend");
  std::vector<DecayPoint> curve;
  curve.reserve(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double p = noise_averaged_population(sequence_at(taus[i]), model, opts,
                                               derive_seed(seed, i));
    curve.push_back({taus[i], 2.0 * p - 1.0});
  }
  return curve;
}

std::vector<double> odmr_scan(std::span<const double> omegas, double field,
                              const SensorSpec& sensor, double linewidth,
                              double contrast) {
  sensor.validate();
  if (!(linewidth > 0.0)) throw Error("odmr_scan: linewidth must be > 0");
  if (!(contrast > 0.0 && contrast <= 1.0))
    throw Error("odmr_scan: contrast must be in (0, 1]");
  const double center = sensor.omega0 + sensor.gamma * field;
  std::vector<double> fluorescence;
  fluorescence.reserve(omegas.size());
  for (double w : omegas) {
    const double u = (w - center) / linewidth;
    fluorescence.push_back(1.0 - contrast / (1.0 + u * u));
  }
  return fluorescence;
}

}  // namespace qsense
