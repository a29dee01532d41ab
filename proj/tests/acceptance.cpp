// End-to-end acceptance gate.  Each criterion prints one [PASS]/[FAIL] line;
// the process exits nonzero if any criterion fails.  Tolerances are pinned
// next to the checks they guard.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "qsense/analysis.hpp"
#include "qsense/cli.hpp"
#include "qsense/engine.hpp"
#include "qsense/noise.hpp"
#include "qsense/rng.hpp"
#include "qsense/sequence.hpp"
#include "qsense/units.hpp"
#include "qsense/waveform.hpp"

using namespace qsense;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

using Failures = std::vector<std::string>;

std::string num(double v) { return format_double(v); }

void expect(Failures& f, bool ok, const std::string& what) {
  if (!ok) f.push_back(what);
}

double sample_sd(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------- criteria

// free precession: two pi/2 pulses around a delay read out the accumulated
// phase as p = (1 + cos(delta tau)) / 2, exactly
Failures fringe_identity() {
  constexpr double kTol = 1e-10;
  constexpr double kBudget = 1.0;  // seconds, single core
  Failures f;
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (int i = 0; i < 40; ++i) {
    const double tau = 5e-8 * std::pow(400.0, i / 39.0);  // 50 ns .. 20 us
    for (int j = 0; j < 25; ++j) {
      const double delta = kTwoPi * 3e6 * (j - 12) / 12.0;
      const double p = run_once(ramsey(tau), Waveform::constant(delta));
      const double expected = 0.5 * (1.0 + std::cos(delta * tau));
      worst = std::max(worst, std::abs(p - expected));
    }
  }
  expect(f, worst < kTol,
         "worst |p - (1+cos)/2| = " + num(worst) + " (tolerance " + num(kTol) + ")");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  expect(f, elapsed < kBudget,
         "1000-point scan took " + num(elapsed) + " s, budget " + num(kBudget) +
             " s");
  return f;
}

// frozen gaussian detuning spread: ensemble fringe decays as
// exp(-sigma^2 tau^2 / 2), with the 1/e crossing at t2* = 1/sigma
Failures static_decoherence() {
  constexpr double kMaxDev = 0.01;     // per-point tolerance, 1e5 draws
  constexpr double kCrossTol = 0.02;   // relative error of the 1/e time
  constexpr double kBudget = 30.0;     // seconds, single core
  Failures f;
  const auto t0 = std::chrono::steady_clock::now();

  const double sigma = kTwoPi * 1e5;
  const double t2_star = 1.0 / sigma;
  const SignalModel model = StaticGaussianModel{0.0, sigma};
  EngineOptions opts;
  opts.realizations = 100000;

  std::vector<double> taus, coh;
  double worst = 0.0;
  for (int i = 1; i <= 30; ++i) {
    const double tau = 3.0 * t2_star * i / 30.0;
    const double p = noise_averaged_population(ramsey(tau), model, opts,
                                               derive_seed(77, i));
    const double expected = 0.5 * (1.0 + std::exp(-0.5 * sigma * sigma * tau * tau));
    worst = std::max(worst, std::abs(p - expected));
    taus.push_back(tau);
    coh.push_back(2.0 * p - 1.0);
  }
  expect(f, worst < kMaxDev,
         "worst |p - gaussian envelope| = " + num(worst) + " (tolerance " +
             num(kMaxDev) + ")");

  const double target = std::exp(-0.5);
  double crossing = 0.0;
  for (std::size_t i = 1; i < coh.size(); ++i) {
    if (coh[i - 1] >= target && coh[i] < target) {
      crossing = taus[i - 1] + (coh[i - 1] - target) * (taus[i] - taus[i - 1]) /
                                   (coh[i - 1] - coh[i]);
      break;
    }
  }
  expect(f, crossing > 0.0, "coherence never crossed exp(-1/2)");
  if (crossing > 0.0)
    expect(f, std::abs(crossing - t2_star) < kCrossTol * t2_star,
           "1/e crossing at " + num(crossing) + " s, expected " + num(t2_star) +
               " s +- 2%");
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  expect(f, elapsed < kBudget,
         "3e6-realization sweep took " + num(elapsed) + " s, budget " +
             num(kBudget) + " s");
  return f;
}

// a single refocusing pulse cancels any static detuning: the switching
// function integrates to zero and the echo closes at p = 1
Failures echo_refocusing() {
  constexpr double kPhaseTol = 1e-12;  // rad
  constexpr double kPopTol = 1e-12;
  Failures f;

  const PulseSequence seq = hahn(4e-6);
  const SensitivityFunction g = sensitivity_function(seq);
  double worst_phi = 0.0, worst_p = 0.0;
  for (int j = 0; j <= 20; ++j) {
    const double delta = kTwoPi * 1e7 * (j - 10) / 10.0;
    worst_phi = std::max(
        worst_phi, std::abs(phase_from_signal(g, Waveform::constant(delta))));
    const double p = run_once(seq, Waveform::constant(delta));
    worst_p = std::max(worst_p, std::abs(p - 1.0));
  }
  expect(f, worst_phi < kPhaseTol,
         "worst residual echo phase " + num(worst_phi) + " rad (tolerance " +
             num(kPhaseTol) + ")");
  expect(f, worst_p < kPopTol,
         "worst |p - 1| = " + num(worst_p) + " (tolerance " + num(kPopTol) + ")");
  return f;
}

// multipulse train: the filter peaks at 1/(2 tau), carries no dc weight for
// even pulse counts, and its harmonic weights obey parseval
Failures filter_properties() {
  constexpr int kHarmonics = 10000;
  constexpr double kParsevalTol = 0.01;
  Failures f;

  const double tau = 2e-6;
  const PulseSequence seq = cpmg(8, tau);
  const FilterSpectrum spec =
      filter_spectrum(sensitivity_function(seq), kHarmonics);
  const double total = sensitivity_function(seq).total_time();

  int argmax = 0;
  for (int n = 0; n <= spec.max_harmonic(); ++n)
    if (spec.weight(n) > spec.weight(argmax)) argmax = n;
  const double peak_freq = spec.frequency(argmax);
  const double expected_peak = 1.0 / (2.0 * tau);
  expect(f, std::abs(peak_freq - expected_peak) <= 1.0 / total + 1e-9,
         "filter peak at " + num(peak_freq) + " Hz, expected " +
             num(expected_peak) + " Hz within 1/T = " + num(1.0 / total));

  const double dc_weight = std::norm(spec.coefficient(0));
  expect(f, dc_weight < 1e-18 * total * total,
         "dc filter weight |g_0|^2 = " + num(dc_weight) + " s^2, tolerance " +
             num(1e-18 * total * total));

  const double parseval = spec.parseval_total();
  expect(f, std::abs(parseval - 1.0) < kParsevalTol,
         "parseval sum " + num(parseval) + " differs from 1 by more than 1%");
  return f;
}

// the propagator agrees with the switching-function phase integral for
// arbitrary pulse placements and piecewise-constant detuning histories
Failures switching_phase_identity() {
  constexpr double kTol = 1e-9;
  Failures f;

  Rng rng(123456);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n_pi = static_cast<int>(rng.uniform() * 6.0);  // 0..5
    PulseSequence seq;
    seq.pulse(PulseKind::PiHalf, Axis::Y);
    for (int k = 0; k <= n_pi; ++k) {
      seq.wait(5e-8 + rng.uniform() * 3e-6);
      if (k < n_pi) seq.pulse(PulseKind::Pi, Axis::X);
    }
    seq.pulse(PulseKind::PiHalf, Axis::Y);

    // random piecewise-constant detuning across the sequence
    const double span = seq.span();
    const int pieces = 1 + static_cast<int>(rng.uniform() * 5.0);
    std::vector<double> knots{0.0};
    for (int k = 1; k < pieces; ++k)
      knots.push_back(span * rng.uniform());
    knots.push_back(span);
    std::sort(knots.begin(), knots.end());
    std::vector<double> values;
    for (int k = 0; k < pieces; ++k)
      values.push_back(kTwoPi * 3e6 * (2.0 * rng.uniform() - 1.0));
    const Waveform delta = Waveform::piecewise_constant(knots, values);

    const double phi = phase_from_signal(sensitivity_function(seq), delta);
    const double expected = 0.5 * (1.0 + std::cos(phi));
    worst = std::max(worst, std::abs(run_once(seq, delta) - expected));
  }
  expect(f, worst < kTol,
         "worst |p - (1+cos phi)/2| = " + num(worst) + " over 1000 random cases");
  return f;
}

// projection noise: the population error per point is 1/(2 sqrt(M N)) at
// mid fringe and scales as M^-1/2 across three decades
Failures projection_noise_scaling() {
  constexpr double kSdTol = 0.05;      // relative, 1000 trials
  constexpr double kSlopeTol = 0.02;   // on the log-log slope
  Failures f;

  // mid-fringe operating point: p = 1/2 at the bias detuning pi/(2 tau)
  const double tau = 1e-6;
  const double delta0 = 0.5 * kPi / tau;

  ReadoutConfig readout;
  std::vector<double> log_m, log_sd;
  std::uint64_t seed = 1;
  for (long m : {100L, 1000L, 10000L, 100000L}) {
    readout.reps = m;
    std::vector<double> p_hats, deltas;
    p_hats.reserve(1000);
    deltas.reserve(1000);
    for (int t = 0; t < 1000; ++t) {
      const ReadoutSample s = simulate_readout(0.5, readout, seed++);
      p_hats.push_back(s.p_hat);
      deltas.push_back(estimate_detuning(s.p_hat, tau, s.std_err, delta0).delta);
    }
    const double sd_p = sample_sd(p_hats);
    const double expected_p = 0.5 / std::sqrt(static_cast<double>(m));
    expect(f, std::abs(sd_p - expected_p) < kSdTol * expected_p,
           "sigma_p at M = " + std::to_string(m) + ": " + num(sd_p) +
               ", expected " + num(expected_p) + " +- 5%");

    // the fringe slope maps that onto the detuning as 1/(tau sqrt(M))
    const double sd_delta = sample_sd(deltas);
    const double expected_delta = 1.0 / (tau * std::sqrt(static_cast<double>(m)));
    expect(f, std::abs(sd_delta - expected_delta) < kSdTol * expected_delta,
           "sigma_delta at M = " + std::to_string(m) + ": " + num(sd_delta) +
               ", expected " + num(expected_delta) + " +- 5%");
    log_m.push_back(std::log10(static_cast<double>(m)));
    log_sd.push_back(std::log10(sd_delta));
  }

  // least-squares slope of log sigma_delta vs log M
  const double n = static_cast<double>(log_m.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_m.size(); ++i) {
    sx += log_m[i];
    sy += log_sd[i];
    sxx += log_m[i] * log_m[i];
    sxy += log_m[i] * log_sd[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  expect(f, std::abs(slope + 0.5) <= kSlopeTol,
         "log-log slope " + num(slope) + ", expected -0.500 +- 0.02");

  // independent sensors multiply the shot count: N = 4 quarters the variance
  readout.reps = 1000;
  readout.sensors = 4;
  std::vector<double> pooled;
  pooled.reserve(1000);
  for (int t = 0; t < 1000; ++t)
    pooled.push_back(simulate_readout(0.5, readout, 700000 + t).p_hat);
  const double sd4 = sample_sd(pooled);
  const double expected4 = 0.5 / std::sqrt(4000.0);
  expect(f, std::abs(sd4 - expected4) < kSdTol * expected4,
         "sigma_p at M = 1000, N = 4: " + num(sd4) + ", expected " +
             num(expected4) + " +- 5%");
  return f;
}

// shot-noise sensitivity budget at the reference sensor parameters
Failures sensitivity_budget() {
  constexpr double kEtaDc = 5.3052e-9;  // T/sqrt(Hz), 3 significant figures
  Failures f;

  SensorSpec sensor;
  ReadoutConfig ideal;
  const SensitivityReport dc = sensitivity_dc(sensor, ideal, 1.0);
  expect(f, std::abs(dc.eta - kEtaDc) < 1e-3 * kEtaDc,
         "dc sensitivity " + num(dc.eta) + " T/sqrt(Hz), expected " +
             num(kEtaDc));

  const SensitivityReport ac = sensitivity_ac(sensor, ideal, 1.0);
  const double expected_ratio = std::sqrt(sensor.t2_star / sensor.t2);
  expect(f, std::abs(ac.eta / dc.eta - expected_ratio) < 1e-12,
         "ac/dc sensitivity ratio " + num(ac.eta / dc.eta) + ", expected " +
             num(expected_ratio));

  ReadoutConfig dim;  // low-contrast averaged readout
  dim.m0 = 3200;
  dim.contrast = 0.3;
  const SensitivityReport eff = sensitivity_dc(sensor, dim, 1.0);
  expect(f, std::abs(eff.eta_effective - 1.0e-6) < 0.01e-6,
         "effective sensitivity " + num(eff.eta_effective) +
             " T/sqrt(Hz), expected 1.0e-6 +- 1%");
  return f;
}

// interrogation time that minimizes exp(sigma^2 tau^2/2)/sqrt(tau)
Failures optimal_interrogation() {
  constexpr double kRelTol = 1e-6;
  Failures f;
  const double sigma = kTwoPi * 1e5;
  const OptimalTau opt = optimal_tau(sigma);
  const double expected = 1.0 / (sigma * std::sqrt(2.0));
  expect(f, std::abs(opt.tau - expected) < kRelTol * expected,
         "optimal tau " + num(opt.tau) + " s, expected " + num(expected) +
             " s (rel tol 1e-6)");
  return f;
}

// full spectroscopy loop: simulate multipulse decays against a lorentzian
// bath, invert them, and recover the spectrum over a decade
Failures spectroscopy_loop() {
  constexpr double kRelTol = 0.10;    // per-point recovery tolerance
  constexpr double kBudget = 120.0;   // seconds, single core
  constexpr int kPoints = 13;
  Failures f;

  const auto t0 = std::chrono::steady_clock::now();

  const double sigma = kTwoPi * 5e4;
  const double tau_c = 5e-6;
  const SignalModel model = OrnsteinUhlenbeckModel{sigma, tau_c};
  const double nu_c = 1.0 / (kTwoPi * tau_c);
  const int n = 8;

  std::vector<double> taus, coherences;
  for (int i = 0; i < kPoints; ++i) {
    const double nu = 2.5 * nu_c * std::pow(10.0, i / (kPoints - 1.0));
    const double tau = 1.0 / (2.0 * nu);
    const PulseSequence seq = cpmg(n, tau);

    // size the ensemble from the predicted decay so every point resolves
    // its coherence to ~kRelTol/3 of the spectral density
    const double v = phase_variance(
        filter_spectrum(sensitivity_function(seq), 2000), model);
    const double c_pred = std::exp(-0.5 * v);
    const double var_cos =
        std::max(1e-12, 0.5 * (1.0 + std::exp(-2.0 * v)) - std::exp(-v));
    const double se_needed = kRelTol * c_pred * v / 6.0;
    const long k = std::lround(
        std::clamp(var_cos / (se_needed * se_needed), 2000.0, 200000.0));

    EngineOptions opts;
    opts.realizations = k;
    const double p = noise_averaged_population(seq, model, opts,
                                               derive_seed(4242, i));
    taus.push_back(tau);
    coherences.push_back(2.0 * p - 1.0);
  }

  const SpectrumReconstruction rec = reconstruct_spectrum(taus, coherences, n);
  expect(f, rec.diagnostics.empty(),
         rec.diagnostics.empty() ? "" : "diagnostics: " + rec.diagnostics[0]);
  expect(f, rec.points.size() == taus.size(), "reconstruction dropped points");
  for (const auto& pt : rec.points) {
    const double truth = *psd(model, pt.frequency_hz);
    const double rel = std::abs(pt.density - truth) / truth;
    expect(f, rel <= kRelTol,
           "recovered " + num(pt.density) + " at " + num(pt.frequency_hz) +
               " Hz, truth " + num(truth) + " (rel err " + num(rel) + ")");
  }

  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  expect(f, elapsed < kBudget,
         "loop took " + num(elapsed) + " s, budget " + num(kBudget) + " s");
  return f;
}

// correlated-ensemble slope gain is exactly cancelled by the shorter
// coherence window: no sensitivity advantage over independent averaging
Failures entanglement_bound() {
  constexpr double kRelTol = 1e-12;
  Failures f;
  SensorSpec sensor;
  for (long n = 1; n <= 1024; n *= 2) {
    const EntanglementComparison cmp =
        entanglement_comparison(n, sensor.gamma, sensor.t2_star);
    expect(f,
           std::abs(cmp.eta_corrected - cmp.eta_independent) <=
               kRelTol * cmp.eta_independent,
           "N = " + std::to_string(n) + ": corrected " +
               num(cmp.eta_corrected) + " vs independent " +
               num(cmp.eta_independent));
  }
  return f;
}

// a result file re-executes to byte-identical outputs
Failures cli_round_trip() {
  Failures f;
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() /
                        ("qsense_acceptance_" + std::to_string(::getpid()));
  const fs::path a = base / "a";
  const fs::path b = base / "b";
  fs::create_directories(a);
  fs::create_directories(b);

  const fs::path noise = base / "ou.cfg";
  std::ofstream(noise) << "model = ou\nsigma = 50kHz\ntau_c = 5us\n";

  const auto run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "qsense");
    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& s : args) argv.push_back(s.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
  };
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };

  const int rc1 = run({"fringes", "--builder", "cpmg", "--pulses", "4",
                       "--tau", "2us", "--noise", noise.string(), "--sweep",
                       "delta:-1MHz:1MHz:9", "--realizations", "150",
                       "--reps", "200", "--seed", "31", "--out", a.string()});
  expect(f, rc1 == 0, "first run exited " + std::to_string(rc1));
  const int rc2 = run({"fringes", "--config", (a / "fringes.json").string(),
                       "--out", b.string()});
  expect(f, rc2 == 0, "re-run exited " + std::to_string(rc2));

  if (rc1 == 0 && rc2 == 0) {
    expect(f, slurp(a / "fringes.csv") == slurp(b / "fringes.csv"),
           "re-run CSV differs from the original");
    expect(f, slurp(a / "fringes.json") == slurp(b / "fringes.json"),
           "re-run JSON differs from the original");
  }

  // a second verb round-trips the same way
  const int rc3 = run({"decay", "--builder", "hahn", "--noise", noise.string(),
                       "--sweep", "tau:2us:20us:4:log", "--realizations",
                       "150", "--seed", "7", "--out", a.string()});
  expect(f, rc3 == 0, "decay run exited " + std::to_string(rc3));
  const int rc4 = run({"decay", "--config", (a / "decay.json").string(),
                       "--out", b.string()});
  expect(f, rc4 == 0, "decay re-run exited " + std::to_string(rc4));
  if (rc3 == 0 && rc4 == 0) {
    expect(f, slurp(a / "decay.csv") == slurp(b / "decay.csv"),
           "decay re-run CSV differs from the original");
    expect(f, slurp(a / "decay.json") == slurp(b / "decay.json"),
           "decay re-run JSON differs from the original");
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  return f;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Failures (*body)();
  };
  const std::vector<Criterion> criteria = {
      {"free-precession fringes follow the cosine law", fringe_identity},
      {"static gaussian spread decoheres on the gaussian envelope",
       static_decoherence},
      {"echo cancels static detuning to rounding", echo_refocusing},
      {"multipulse filter peak, dc blindness and parseval", filter_properties},
      {"propagator matches the switching-function phase", switching_phase_identity},
      {"projection noise at and below the 1/sqrt(M) line", projection_noise_scaling},
      {"dc/ac sensitivity budget and readout penalty", sensitivity_budget},
      {"optimal interrogation time", optimal_interrogation},
      {"noise spectroscopy recovers a lorentzian over a decade", spectroscopy_loop},
      {"correlated ensembles buy no sensitivity", entanglement_bound},
      {"result files re-execute byte-identically", cli_round_trip},
  };

  std::cout << "acceptance: " << criteria.size() << " criteria\n";
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Failures failures;
    try {
      failures = criteria[i].body();
    } catch (const std::exception& e) {
      failures.push_back(std::string("exception: ") + e.what());
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    std::ostringstream line;
    line << (failures.empty() ? "[PASS] " : "[FAIL] ") << (i + 1) << ": "
         << criteria[i].name << " (" << std::fixed << std::setprecision(2)
         << dt << " s)";
    std::cout << line.str() << "\n";
    for (const auto& msg : failures)
      if (!msg.empty()) std::cout << "       - " << msg << "\n";
    if (!failures.empty()) ++failed;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << " of "
            << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
