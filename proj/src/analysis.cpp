#include "qsense/analysis.hpp"

#include <cmath>
#include <cstddef>

#include "qsense/error.hpp"
#include "qsense/units.hpp"

namespace qsense {

double static_envelope(double sigma, double tau) {
  if (!(sigma >= 0.0)) throw Error("static_envelope: sigma must be >= 0");
  if (!(tau >= 0.0)) throw Error("static_envelope: tau must be >= 0");
  return std::exp(-0.5 * sigma * sigma * tau * tau);
}

double phase_variance(const FilterSpectrum& filter, const SignalModel& model) {
  if (!psd_defined(model))
    throw Error("phase_variance: model has no ensemble spectrum");
  double v = filter.weight(0) * *psd(model, 0.0);
  for (int n = 1; n <= filter.max_harmonic(); ++n)
    v += 2.0 * filter.weight(n) * *psd(model, filter.frequency(n));
  for (const SpectralLine& line : spectral_lines(model))
    v += filter.total_time() * filter.weight_at(line.frequency_hz) * line.power;
  return v;
}

double predicted_population(double phase_variance) {
  if (!(phase_variance >= 0.0))
    throw Error("predicted_population: variance must be >= 0");
  return 0.5 * (1.0 + std::exp(-0.5 * phase_variance));
}

SpectrumReconstruction reconstruct_spectrum(std::span<const double> taus,
                                            std::span<const double> coherences,
                                            int n_pulses) {
  if (taus.size() != coherences.size())
    throw Error("reconstruct_spectrum: taus and coherences differ in length");
  if (n_pulses < 1) throw Error("reconstruct_spectrum: n_pulses must be >= 1");

  SpectrumReconstruction out;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double tau = taus[i];
    const double c = coherences[i];
    if (!(tau > 0.0)) throw Error("reconstruct_spectrum: tau must be > 0");
    if (c > 1.0 + 1e-12)
      throw Error("reconstruct_spectrum: coherence " + format_double(c) +
                  " exceeds 1");
    if (c <= 0.0) {
      out.diagnostics.push_back("tau = " + format_double(tau) +
                                " s skipped: coherence " + format_double(c) +
                                " has no usable phase variance");
      continue;
    }
    const double variance = -2.0 * std::log(std::min(c, 1.0));

    const PulseSequence seq = cpmg(n_pulses, tau);
    const FilterSpectrum filter =
        filter_spectrum(sensitivity_function(seq), 2 * n_pulses + 16);
    const double total = filter.total_time();
    const double peak = 1.0 / (2.0 * tau);
    // pool the filter weight over the harmonics within 1/T of the peak
    double pooled = 0.0;
    for (int n = 1; n <= filter.max_harmonic(); ++n) {
      if (std::abs(filter.frequency(n) - peak) <= 1.0 / total * (1.0 + 1e-9))
        pooled += 2.0 * filter.weight(n);
    }
    if (!(pooled > 0.0)) {
      out.diagnostics.push_back("tau = " + format_double(tau) +
                                " s skipped: filter has no weight at " +
                                format_double(peak) + " Hz");
      continue;
    }
    out.points.push_back({peak, variance / pooled});
  }
  return out;
}

namespace {

SensitivityReport make_report(const char* mode, double gamma, long sensors,
                              double interrogation, const ReadoutConfig& readout,
                              double averaging_time) {
  if (!(gamma > 0.0)) throw Error("sensitivity: gamma must be > 0");
  if (sensors < 1) throw Error("sensitivity: sensors must be >= 1");
  if (!(interrogation > 0.0)) throw Error("sensitivity: interrogation time must be > 0");
  if (!(averaging_time > 0.0)) throw Error("sensitivity: averaging time must be > 0");
  readout.validate();

  SensitivityReport r;
  r.mode = mode;
  r.interrogation_time = interrogation;
  r.eta = 1.0 / (gamma * std::sqrt(static_cast<double>(sensors) * interrogation));
  r.readout_penalty = std::sqrt(static_cast<double>(readout.m0)) / readout.contrast;
  r.eta_effective = r.eta * r.readout_penalty;
  r.averaging_time = averaging_time;
  r.sigma_b = r.eta_effective / std::sqrt(averaging_time);
  r.sigma_delta = gamma * r.sigma_b;
  r.sigma_p = 0.5 * r.sigma_delta * interrogation;
  return r;
}

}  // namespace

SensitivityReport sensitivity_dc(const SensorSpec& sensor, const ReadoutConfig& readout,
                                 double averaging_time) {
  sensor.validate();
  return make_report("dc", sensor.gamma, readout.sensors, sensor.t2_star, readout,
                     averaging_time);
}

SensitivityReport sensitivity_ac(const SensorSpec& sensor, const ReadoutConfig& readout,
                                 double averaging_time) {
  sensor.validate();
  return make_report("ac", sensor.gamma, readout.sensors, sensor.t2, readout,
                     averaging_time);
}

OptimalTau optimal_tau(double sigma) {
  if (!(sigma > 0.0)) throw Error("optimal_tau: sigma must be > 0");
  const auto objective = [&](double log_tau) {
    const double tau = std::exp(log_tau);
    return std::exp(0.5 * sigma * sigma * tau * tau) / std::sqrt(tau);
  };
  // golden-section search on log tau; the minimum sits at 1/(sigma sqrt(2)),
  // safely inside [0.01, 100]/sigma
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = std::log(0.01 / sigma);
  double hi = std::log(100.0 / sigma);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > 1e-12) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = objective(x2);
    }
  }
  OptimalTau best;
  best.tau = std::exp(0.5 * (lo + hi));
  best.eta_scale = objective(0.5 * (lo + hi));
  return best;
}

EntanglementComparison entanglement_comparison(long n, double gamma, double t2_star) {
  if (n < 1) throw Error("entanglement_comparison: n must be >= 1");
  if (!(gamma > 0.0)) throw Error("entanglement_comparison: gamma must be > 0");
  if (!(t2_star > 0.0)) throw Error("entanglement_comparison: t2_star must be > 0");
  const double nd = static_cast<double>(n);
  EntanglementComparison cmp;
  cmp.eta_independent = 1.0 / (gamma * std::sqrt(nd * t2_star));
  cmp.eta_naive = 1.0 / (gamma * nd * std::sqrt(t2_star));
  cmp.eta_corrected = 1.0 / (gamma * nd * std::sqrt(t2_star / nd));
  return cmp;
}

}  // namespace qsense
