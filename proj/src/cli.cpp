#include "qsense/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsense/analysis.hpp"
#include "qsense/engine.hpp"
#include "qsense/error.hpp"
#include "qsense/io.hpp"
#include "qsense/noise.hpp"
#include "qsense/rng.hpp"
#include "qsense/sensor.hpp"
#include "qsense/sequence.hpp"
#include "qsense/units.hpp"

namespace qsense {

namespace {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

// ----------------------------------------------------------------- sweeps

struct Sweep {
  std::string kind;  // tau | delta | n | ttotal | domega
  std::vector<double> values;
};

std::vector<double> linspace(double a, double b, long count) {
  std::vector<double> v(static_cast<std::size_t>(count));
  if (count == 1) {
    v[0] = a;
    return v;
  }
  for (long i = 0; i < count; ++i)
    v[static_cast<std::size_t>(i)] =
        a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  return v;
}

// "kind:start:stop:count[:log]"; start/stop carry units fitting the kind
Sweep parse_sweep(const std::string& text) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto colon = text.find(':', pos);
    if (colon == std::string::npos) {
      fields.push_back(text.substr(pos));
      break;
    }
    fields.push_back(text.substr(pos, colon - pos));
    pos = colon + 1;
  }
  if (fields.size() != 4 && fields.size() != 5)
    throw Error("sweep: expected kind:start:stop:count[:log], got '" + text + "'");
  Sweep sweep;
  sweep.kind = fields[0];
  const bool log_spaced = fields.size() == 5;
  if (log_spaced && fields[4] != "log")
    throw Error("sweep: fifth field must be 'log'");

  double start = 0.0;
  double stop = 0.0;
  if (sweep.kind == "tau" || sweep.kind == "ttotal") {
    start = parse_duration(fields[1]);
    stop = parse_duration(fields[2]);
  } else if (sweep.kind == "delta" || sweep.kind == "domega") {
    start = parse_angular_rate(fields[1]);
    stop = parse_angular_rate(fields[2]);
  } else if (sweep.kind == "n") {
    start = parse_number(fields[1]);
    stop = parse_number(fields[2]);
  } else {
    throw Error("sweep: unknown kind '" + sweep.kind +
                "' (expected tau|delta|n|ttotal|domega)");
  }
  const double count_raw = parse_number(fields[3]);
  if (count_raw < 1 || count_raw != std::floor(count_raw) || count_raw > 1e7)
    throw Error("sweep: count must be a positive integer");
  const long count = static_cast<long>(count_raw);

  if (log_spaced) {
    if (!(start > 0.0) || !(stop > 0.0))
      throw Error("sweep: log spacing needs positive endpoints");
    sweep.values = linspace(std::log(start), std::log(stop), count);
    for (auto& v : sweep.values) v = std::exp(v);
  } else {
    sweep.values = linspace(start, stop, count);
  }
  if (sweep.kind == "n")
    for (auto& v : sweep.values) v = std::round(v);
  return sweep;
}

SweepSpec::Kind sweep_kind_of(const std::string& kind) {
  if (kind == "tau") return SweepSpec::Kind::Tau;
  if (kind == "delta") return SweepSpec::Kind::Detuning;
  if (kind == "n") return SweepSpec::Kind::PulseCount;
  throw Error("sweep kind '" + kind + "' is not valid here");
}

// --------------------------------------------------------------- json bits

ordered_json sweep_to_json(const Sweep& sweep) {
  return ordered_json{{"kind", sweep.kind}, {"values", sweep.values}};
}

Sweep sweep_from_json(const ordered_json& j) {
  Sweep sweep;
  sweep.kind = j.at("kind").get<std::string>();
  sweep.values = j.at("values").get<std::vector<double>>();
  return sweep;
}

ordered_json readout_to_json(const ReadoutConfig& r) {
  return ordered_json{{"reps", r.reps},
                      {"sensors", r.sensors},
                      {"m0", r.m0},
                      {"contrast", r.contrast},
                      {"seed", r.root_seed}};
}

ReadoutConfig readout_from_json(const ordered_json& j) {
  ReadoutConfig r;
  r.reps = j.at("reps").get<long>();
  r.sensors = j.at("sensors").get<long>();
  r.m0 = j.at("m0").get<long>();
  r.contrast = j.at("contrast").get<double>();
  r.root_seed = j.at("seed").get<std::uint64_t>();
  return r;
}

ordered_json engine_to_json(const EngineOptions& e) {
  return ordered_json{{"realizations", e.realizations},
                      {"threads", e.threads},
                      {"substeps", e.pulse_substeps}};
}

EngineOptions engine_from_json(const ordered_json& j) {
  EngineOptions e;
  e.realizations = j.at("realizations").get<long>();
  e.threads = j.at("threads").get<int>();
  e.pulse_substeps = j.at("substeps").get<int>();
  return e;
}

ordered_json sensor_to_json(const SensorSpec& s) {
  return ordered_json{{"gamma", s.gamma},
                      {"omega0", s.omega0},
                      {"t2_star", s.t2_star},
                      {"t2", s.t2},
                      {"t1", s.t1}};
}

SensorSpec sensor_from_json(const ordered_json& j) {
  SensorSpec s;
  s.gamma = j.at("gamma").get<double>();
  s.omega0 = j.at("omega0").get<double>();
  s.t2_star = j.at("t2_star").get<double>();
  s.t2 = j.at("t2").get<double>();
  s.t1 = j.at("t1").get<double>();
  return s;
}

// --------------------------------------------------------------- plumbing

struct OutputSpec {
  std::string dir = ".";
  std::string format = "both";  // csv | json | both

  bool want_csv() const { return format == "csv" || format == "both"; }
  bool want_json() const { return format == "json" || format == "both"; }

  void check() const {
    if (format != "csv" && format != "json" && format != "both")
      throw Error("--format must be csv, json or both");
    require_writable_dir(dir);
  }
};

void write_outputs(const OutputSpec& out, const std::string& stem,
                   const std::optional<std::string>& csv, const ordered_json& doc) {
  // render everything first so a failure cannot leave partial outputs
  const std::string json_text = doc.dump(2) + "\n";
  if (out.want_csv() && csv) {
    const fs::path p = fs::path(out.dir) / (stem + ".csv");
    atomic_write(p, *csv);
    std::cout << "wrote " << p.string() << "\n";
  }
  if (out.want_json()) {
    const fs::path p = fs::path(out.dir) / (stem + ".json");
    atomic_write(p, json_text);
    std::cout << "wrote " << p.string() << "\n";
  }
}

ordered_json load_config(const std::string& path, const std::string& verb) {
  const ordered_json doc = ordered_json::parse(read_file(path));
  if (!doc.contains("verb") || doc.at("verb").get<std::string>() != verb)
    throw Error("config file " + path + " is not a '" + verb + "' result");
  if (!doc.contains("config")) throw Error("config file " + path + " has no config");
  return doc.at("config");
}

// sequence source shared by fringes/decay/spectrum
struct SequenceSource {
  std::string builder = "ramsey";  // ramsey | hahn | cpmg | uhrig | file
  double tau = 1e-6;               // inter-pulse delay (total time for uhrig)
  int pulses = 1;
  std::string text;                // canonical DSL of the fixed-x sequence
};

PulseSequence build_sequence(const SequenceSource& src, double tau, int pulses) {
  if (src.builder == "ramsey") return ramsey(tau);
  if (src.builder == "hahn") return hahn(tau);
  if (src.builder == "cpmg") return cpmg(pulses, tau);
  if (src.builder == "uhrig") return uhrig(pulses, tau);
  throw Error("unknown builder '" + src.builder +
              "' (expected ramsey|hahn|cpmg|uhrig)");
}

void resolve_sequence_text(SequenceSource& src) {
  if (src.builder != "file")
    src.text = format_sequence(build_sequence(src, src.tau, src.pulses));
}

std::function<PulseSequence(double)> sequence_factory(const SequenceSource& src,
                                                      const std::string& sweep_kind) {
  if (sweep_kind == "tau") {
    if (src.builder == "file")
      throw Error("a tau sweep needs --builder, not --seq");
    SequenceSource fixed = src;
    return [fixed](double x) { return build_sequence(fixed, x, fixed.pulses); };
  }
  if (sweep_kind == "n") {
    if (src.builder != "cpmg" && src.builder != "uhrig")
      throw Error("an n sweep needs --builder cpmg or uhrig");
    SequenceSource fixed = src;
    return [fixed](double x) {
      return build_sequence(fixed, fixed.tau, static_cast<int>(x));
    };
  }
  // fixed sequence (delta sweep): always from the canonical text
  const PulseSequence seq = parse_sequence(src.text);
  return [seq](double) { return seq; };
}

SignalModel model_from_text(const std::string& text) {
  if (text.empty()) return ConstantModel{0.0};
  return parse_model(text);
}

// ----------------------------------------------------------- verb: fringes

struct FringesConfig {
  SequenceSource seq;
  std::string model_text;
  Sweep sweep{.kind = "delta", .values = {}};
  ReadoutConfig readout;
  EngineOptions engine;
};

ordered_json fringes_config_json(const FringesConfig& c) {
  return ordered_json{{"builder", c.seq.builder},
                      {"tau", c.seq.tau},
                      {"pulses", c.seq.pulses},
                      {"sequence", c.seq.text},
                      {"model", c.model_text},
                      {"sweep", sweep_to_json(c.sweep)},
                      {"readout", readout_to_json(c.readout)},
                      {"engine", engine_to_json(c.engine)}};
}

FringesConfig fringes_config_from_json(const ordered_json& j) {
  FringesConfig c;
  c.seq.builder = j.at("builder").get<std::string>();
  c.seq.tau = j.at("tau").get<double>();
  c.seq.pulses = j.at("pulses").get<int>();
  c.seq.text = j.at("sequence").get<std::string>();
  c.model_text = j.at("model").get<std::string>();
  c.sweep = sweep_from_json(j.at("sweep"));
  c.readout = readout_from_json(j.at("readout"));
  c.engine = engine_from_json(j.at("engine"));
  return c;
}

int cmd_fringes(const FringesConfig& cfg, const OutputSpec& out) {
  out.check();
  if (cfg.sweep.values.empty()) throw Error("fringes: empty sweep");
  const SignalModel model = model_from_text(cfg.model_text);
  SweepSpec spec{sweep_kind_of(cfg.sweep.kind), cfg.sweep.values};
  const auto factory = sequence_factory(cfg.seq, cfg.sweep.kind);
  const ExperimentResult result =
      run_experiment(spec, factory, model, cfg.readout, cfg.engine);

  std::vector<std::vector<double>> rows;
  rows.reserve(result.points.size());
  ordered_json points = ordered_json::array();
  for (const auto& p : result.points) {
    rows.push_back({p.x, p.p_true, p.p_hat, p.std_err});
    points.push_back(ordered_json{{"x", p.x},
                                  {"p_true", p.p_true},
                                  {"p_est", p.p_hat},
                                  {"std_err", p.std_err}});
  }
  const std::string csv = make_csv(
      {spec.column_label(), "p_true", "p_est", "std_err"}, rows);

  ordered_json doc;
  doc["verb"] = "fringes";
  doc["config"] = fringes_config_json(cfg);
  doc["results"] = ordered_json{{"points", points}};
  write_outputs(out, "fringes", csv, doc);
  return 0;
}

// ------------------------------------------------------------- verb: decay

struct DecayConfig {
  SequenceSource seq;
  std::string model_text;
  Sweep sweep{.kind = "tau", .values = {}};
  EngineOptions engine;
  std::uint64_t seed = 1;
};

ordered_json decay_config_json(const DecayConfig& c) {
  return ordered_json{{"builder", c.seq.builder},
                      {"tau", c.seq.tau},
                      {"pulses", c.seq.pulses},
                      {"model", c.model_text},
                      {"sweep", sweep_to_json(c.sweep)},
                      {"engine", engine_to_json(c.engine)},
                      {"seed", c.seed}};
}

DecayConfig decay_config_from_json(const ordered_json& j) {
  DecayConfig c;
  c.seq.builder = j.at("builder").get<std::string>();
  c.seq.tau = j.at("tau").get<double>();
  c.seq.pulses = j.at("pulses").get<int>();
  c.model_text = j.at("model").get<std::string>();
  c.sweep = sweep_from_json(j.at("sweep"));
  c.engine = engine_from_json(j.at("engine"));
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

int cmd_decay(const DecayConfig& cfg, const OutputSpec& out) {
  out.check();
  if (cfg.sweep.kind != "tau") throw Error("decay: sweep kind must be tau");
  if (cfg.sweep.values.empty()) throw Error("decay: empty sweep");
  if (cfg.seq.builder == "file") throw Error("decay: needs --builder");
  const SignalModel model = model_from_text(cfg.model_text);
  const auto factory = sequence_factory(cfg.seq, "tau");
  const auto curve = coherence_decay_curve(factory, cfg.sweep.values, model,
                                           cfg.engine, cfg.seed);

  const bool have_prediction = psd_defined(model);
  std::vector<std::string> columns{"tau_s", "coherence"};
  if (have_prediction) columns.push_back("coherence_pred");

  std::vector<std::vector<double>> rows;
  ordered_json points = ordered_json::array();
  for (const auto& pt : curve) {
    ordered_json jp{{"tau_s", pt.tau}, {"coherence", pt.coherence}};
    std::vector<double> row{pt.tau, pt.coherence};
    if (have_prediction) {
      const PulseSequence seq = factory(pt.tau);
      const FilterSpectrum filter =
          filter_spectrum(sensitivity_function(seq), 10000);
      const double v = phase_variance(filter, model);
      const double pred = 2.0 * predicted_population(v) - 1.0;
      row.push_back(pred);
      jp["coherence_pred"] = pred;
    }
    rows.push_back(std::move(row));
    points.push_back(std::move(jp));
  }
  const std::string csv = make_csv(columns, rows);

  ordered_json doc;
  doc["verb"] = "decay";
  doc["config"] = decay_config_json(cfg);
  doc["results"] = ordered_json{{"points", points}};
  write_outputs(out, "decay", csv, doc);
  return 0;
}

// ---------------------------------------------------------- verb: spectrum

struct SpectrumConfig {
  int pulses = 8;
  std::string model_text;
  Sweep sweep{.kind = "tau", .values = {}};
  EngineOptions engine;
  std::uint64_t seed = 1;
};

ordered_json spectrum_config_json(const SpectrumConfig& c) {
  return ordered_json{{"pulses", c.pulses},
                      {"model", c.model_text},
                      {"sweep", sweep_to_json(c.sweep)},
                      {"engine", engine_to_json(c.engine)},
                      {"seed", c.seed}};
}

SpectrumConfig spectrum_config_from_json(const ordered_json& j) {
  SpectrumConfig c;
  c.pulses = j.at("pulses").get<int>();
  c.model_text = j.at("model").get<std::string>();
  c.sweep = sweep_from_json(j.at("sweep"));
  c.engine = engine_from_json(j.at("engine"));
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

int cmd_spectrum(const SpectrumConfig& cfg, const OutputSpec& out) {
  out.check();
  if (cfg.sweep.kind != "tau") throw Error("spectrum: sweep kind must be tau");
  if (cfg.sweep.values.empty()) throw Error("spectrum: empty sweep");
  if (cfg.model_text.empty()) throw Error("spectrum: needs --noise");
  if (cfg.pulses < 1) throw Error("spectrum: pulses must be >= 1");
  const SignalModel model = parse_model(cfg.model_text);

  const int n = cfg.pulses;
  const auto factory = [n](double tau) { return cpmg(n, tau); };
  const auto curve = coherence_decay_curve(factory, cfg.sweep.values, model,
                                           cfg.engine, cfg.seed);
  std::vector<double> taus;
  std::vector<double> coherences;
  for (const auto& pt : curve) {
    taus.push_back(pt.tau);
    coherences.push_back(pt.coherence);
  }
  const SpectrumReconstruction rec =
      reconstruct_spectrum(taus, coherences, cfg.pulses);

  const bool have_truth = psd_defined(model);
  std::vector<std::string> columns{"freq_hz", "s_est"};
  if (have_truth) columns.push_back("s_true");

  std::vector<std::vector<double>> rows;
  ordered_json points = ordered_json::array();
  for (const auto& pt : rec.points) {
    std::vector<double> row{pt.frequency_hz, pt.density};
    ordered_json jp{{"freq_hz", pt.frequency_hz}, {"s_est", pt.density}};
    if (have_truth) {
      const double truth = *psd(model, pt.frequency_hz);
      row.push_back(truth);
      jp["s_true"] = truth;
    }
    rows.push_back(std::move(row));
    points.push_back(std::move(jp));
  }
  const std::string csv = make_csv(columns, rows);

  ordered_json doc;
  doc["verb"] = "spectrum";
  doc["config"] = spectrum_config_json(cfg);
  doc["results"] =
      ordered_json{{"points", points}, {"diagnostics", rec.diagnostics}};
  write_outputs(out, "spectrum", csv, doc);
  for (const auto& d : rec.diagnostics) std::cerr << "note: " << d << "\n";
  return 0;
}

// ------------------------------------------------------------- verb: sense

struct SenseConfig {
  std::string mode = "dc";  // dc | ac
  SensorSpec sensor;
  ReadoutConfig readout;
  Sweep sweep{.kind = "ttotal", .values = {1.0}};
  bool estimate = false;  // also run a seeded single-point field estimation
  double field = 0.0;     // true field for that estimation, tesla
};

ordered_json sense_config_json(const SenseConfig& c) {
  return ordered_json{{"mode", c.mode},
                      {"sensor", sensor_to_json(c.sensor)},
                      {"readout", readout_to_json(c.readout)},
                      {"sweep", sweep_to_json(c.sweep)},
                      {"estimate", c.estimate},
                      {"field_tesla", c.field}};
}

SenseConfig sense_config_from_json(const ordered_json& j) {
  SenseConfig c;
  c.mode = j.at("mode").get<std::string>();
  c.sensor = sensor_from_json(j.at("sensor"));
  c.readout = readout_from_json(j.at("readout"));
  c.sweep = sweep_from_json(j.at("sweep"));
  c.estimate = j.at("estimate").get<bool>();
  c.field = j.at("field_tesla").get<double>();
  return c;
}

// One seeded shot of the mid-fringe protocol: interrogate at tau = T2* with
// the bias detuning pi/(2 tau), read out, and invert the fringe slope.
ordered_json run_field_estimation(const SenseConfig& cfg) {
  const double tau = cfg.sensor.t2_star;
  const double delta0 = 0.5 * kPi / tau;
  const double delta_true = delta0 + cfg.sensor.gamma * cfg.field;
  if (std::abs(cfg.sensor.gamma * cfg.field) * tau > 0.5)
    throw Error(
        "sense: field too large for the linear fringe estimator "
        "(|gamma B| tau > 0.5 rad); reduce --field");

  const double p_true =
      run_once(ramsey(tau), Waveform::constant(delta_true));
  const ReadoutSample s = simulate_readout(
      p_true, cfg.readout, derive_seed(cfg.readout.root_seed, 1000003));
  const DetuningEstimate est =
      estimate_detuning(s.p_hat, tau, s.std_err, delta0);
  const double field_est = (est.delta - delta0) / cfg.sensor.gamma;
  const double sigma_field = est.sigma / cfg.sensor.gamma;
  return ordered_json{
      {"tau_s", tau},
      {"field_true_tesla", cfg.field},
      {"field_est_tesla", field_est},
      {"sigma_field_tesla", sigma_field},
      {"within_3sigma", std::abs(field_est - cfg.field) <= 3.0 * sigma_field}};
}

int cmd_sense(const SenseConfig& cfg, const OutputSpec& out) {
  out.check();
  if (cfg.mode != "dc" && cfg.mode != "ac") throw Error("sense: mode must be dc or ac");
  if (cfg.sweep.kind != "ttotal") throw Error("sense: sweep kind must be ttotal");
  if (cfg.sweep.values.empty()) throw Error("sense: empty sweep");

  std::vector<std::vector<double>> rows;
  ordered_json points = ordered_json::array();
  SensitivityReport first;
  for (std::size_t i = 0; i < cfg.sweep.values.size(); ++i) {
    const double t_total = cfg.sweep.values[i];
    const SensitivityReport r = cfg.mode == "dc"
                                    ? sensitivity_dc(cfg.sensor, cfg.readout, t_total)
                                    : sensitivity_ac(cfg.sensor, cfg.readout, t_total);
    if (i == 0) first = r;
    rows.push_back({t_total, r.sigma_b, r.sigma_delta, r.sigma_p});
    points.push_back(ordered_json{{"t_total_s", t_total},
                                  {"sigma_b_tesla", r.sigma_b},
                                  {"sigma_delta_rad_per_s", r.sigma_delta},
                                  {"sigma_p", r.sigma_p}});
  }
  const std::string csv = make_csv(
      {"t_total_s", "sigma_b_tesla", "sigma_delta_rad_per_s", "sigma_p"}, rows);

  // interrogation-time optimum for the frozen-Gaussian envelope with
  // sigma = 1/T2*: tau* = T2*/sqrt(2)
  const OptimalTau opt = optimal_tau(1.0 / cfg.sensor.t2_star);

  ordered_json doc;
  doc["verb"] = "sense";
  doc["config"] = sense_config_json(cfg);
  doc["results"] = ordered_json{
      {"report",
       ordered_json{{"mode", first.mode},
                    {"interrogation_time_s", first.interrogation_time},
                    {"eta_t_per_sqrt_hz", first.eta},
                    {"readout_penalty", first.readout_penalty},
                    {"eta_effective_t_per_sqrt_hz", first.eta_effective}}},
      {"optimal_tau_s", opt.tau},
      {"points", points}};
  if (cfg.estimate) {
    if (cfg.mode != "dc")
      throw Error("sense: field estimation runs the dc protocol; use --mode dc");
    doc["results"]["estimate"] = run_field_estimation(cfg);
  }
  write_outputs(out, "sense", csv, doc);

  std::cout << "mode " << first.mode << ": eta = " << format_double(first.eta)
            << " T/sqrt(Hz), effective " << format_double(first.eta_effective)
            << " T/sqrt(Hz) (penalty " << format_double(first.readout_penalty)
            << ")\n";
  return 0;
}

// -------------------------------------------------------------- verb: odmr

struct OdmrConfig {
  SensorSpec sensor;
  double field = 0.0;        // tesla
  double linewidth = 0.0;    // rad/s, HWHM
  double contrast = 0.3;
  Sweep sweep{.kind = "domega", .values = {}};  // offsets around the dip
};

ordered_json odmr_config_json(const OdmrConfig& c) {
  return ordered_json{{"sensor", sensor_to_json(c.sensor)},
                      {"field", c.field},
                      {"linewidth", c.linewidth},
                      {"contrast", c.contrast},
                      {"sweep", sweep_to_json(c.sweep)}};
}

OdmrConfig odmr_config_from_json(const ordered_json& j) {
  OdmrConfig c;
  c.sensor = sensor_from_json(j.at("sensor"));
  c.field = j.at("field").get<double>();
  c.linewidth = j.at("linewidth").get<double>();
  c.contrast = j.at("contrast").get<double>();
  c.sweep = sweep_from_json(j.at("sweep"));
  return c;
}

int cmd_odmr(const OdmrConfig& cfg, const OutputSpec& out) {
  out.check();
  if (cfg.sweep.kind != "domega") throw Error("odmr: sweep kind must be domega");
  if (cfg.sweep.values.empty()) throw Error("odmr: empty sweep");
  const double center = cfg.sensor.omega0 + cfg.sensor.gamma * cfg.field;
  std::vector<double> omegas;
  omegas.reserve(cfg.sweep.values.size());
  for (double off : cfg.sweep.values) omegas.push_back(center + off);
  const std::vector<double> fl =
      odmr_scan(omegas, cfg.field, cfg.sensor, cfg.linewidth, cfg.contrast);

  std::vector<std::vector<double>> rows;
  ordered_json points = ordered_json::array();
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    rows.push_back({omegas[i], fl[i]});
    points.push_back(
        ordered_json{{"omega_rad_per_s", omegas[i]}, {"fluorescence", fl[i]}});
  }
  const std::string csv = make_csv({"omega_rad_per_s", "fluorescence"}, rows);

  ordered_json doc;
  doc["verb"] = "odmr";
  doc["config"] = odmr_config_json(cfg);
  doc["results"] = ordered_json{{"dip_rad_per_s", center}, {"points", points}};
  write_outputs(out, "odmr", csv, doc);
  return 0;
}

// ---------------------------------------------------------- verb: validate

int cmd_validate(const std::string& seq_file, const std::string& noise_file) {
  if (seq_file.empty() && noise_file.empty())
    throw Error("validate: needs --seq and/or --noise");
  int failures = 0;
  if (!seq_file.empty()) {
    try {
      const PulseSequence seq = parse_sequence(read_file(seq_file));
      std::cout << seq_file << ": sequence ok, " << seq.pulse_count()
                << " pulses, span " << format_double(seq.span()) << " s\n";
      try {
        check_sensing_sequence(seq);
        std::cout << seq_file << ": valid sensing sequence, T = "
                  << format_double(seq.total_time()) << " s\n";
      } catch (const Error& e) {
        std::cout << seq_file << ": not a sensing sequence (" << e.what()
                  << ")\n";
      }
    } catch (const Error& e) {
      std::cerr << seq_file << ": " << e.what() << "\n";
      ++failures;
    }
  }
  if (!noise_file.empty()) {
    try {
      const SignalModel model = parse_model(read_file(noise_file));
      std::cout << noise_file << ": model ok\n" << format_model(model);
      if (!psd_defined(model))
        std::cout << noise_file
                  << ": note: no ensemble spectrum (fixed-phase sinusoid)\n";
    } catch (const Error& e) {
      std::cerr << noise_file << ": " << e.what() << "\n";
      ++failures;
    }
  }
  return failures == 0 ? 0 : 2;
}

// ------------------------------------------------------------------ wiring

// shared flag bundle; each field is applied only when the flag was given
struct Flags {
  std::string seq_file, builder, tau, ttotal, noise_file, sweep, config;
  int pulses = 0;
  long reps = 0, sensors = 0, m0 = 0;
  double contrast = 0.0;
  std::uint64_t seed = 0;
  long realizations = 0;
  int threads = -1, substeps = 0;
  std::string gamma, omega0, t2star, t2, t1;
  std::string field, linewidth, mode;
  OutputSpec out;
};

void add_output_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--out", f.out.dir,
                  "output directory, created if missing (default .)");
  cmd->add_option("--format", f.out.format, "csv | json | both (default both)");
  cmd->add_option("--config", f.config,
                  "re-run from the config block of a previous result JSON");
}

void add_sequence_flags(CLI::App* cmd, Flags& f, bool allow_file) {
  if (allow_file)
    cmd->add_option("--seq", f.seq_file, "pulse sequence file (text form)");
  cmd->add_option("--builder", f.builder, "ramsey | hahn | cpmg | uhrig");
  cmd->add_option("--tau", f.tau,
                  "inter-pulse delay, e.g. 1us (total time for uhrig)");
  cmd->add_option("--pulses", f.pulses, "pi-pulse count for cpmg/uhrig");
}

void add_engine_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--realizations", f.realizations,
                  "Monte Carlo realizations (default 1000)");
  cmd->add_option("--threads", f.threads, "worker threads, 0 = all cores");
  cmd->add_option("--substeps", f.substeps,
                  "integration substeps across finite pulses");
}

void add_readout_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--reps", f.reps, "readout repetitions per point");
  cmd->add_option("--sensors", f.sensors, "independent sensors");
  cmd->add_option("--m0", f.m0, "shots pooled per recorded sample");
  cmd->add_option("--contrast", f.contrast, "readout contrast in (0, 1]");
  cmd->add_option("--seed", f.seed, "root random seed");
}

void add_sensor_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--gamma", f.gamma, "gyromagnetic ratio, e.g. 30MHz/mT");
  cmd->add_option("--omega0", f.omega0, "zero-field resonance, e.g. 2.87GHz");
  cmd->add_option("--t2star", f.t2star, "dephasing time, e.g. 1us");
  cmd->add_option("--t2", f.t2, "echo coherence time, e.g. 300us");
  cmd->add_option("--t1", f.t1, "relaxation time, e.g. 6ms");
}

// count() that tolerates flags a verb never registered
bool given(const CLI::App* cmd, const std::string& name) {
  const CLI::Option* opt = cmd->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

void apply_sensor_flags(const CLI::App* cmd, const Flags& f, SensorSpec& s) {
  if (given(cmd, "--gamma")) s.gamma = parse_gyromagnetic(f.gamma);
  if (given(cmd, "--omega0")) s.omega0 = parse_angular_rate(f.omega0);
  if (given(cmd, "--t2star")) s.t2_star = parse_duration(f.t2star);
  if (given(cmd, "--t2")) s.t2 = parse_duration(f.t2);
  if (given(cmd, "--t1")) s.t1 = parse_duration(f.t1);
}

void apply_readout_flags(const CLI::App* cmd, const Flags& f, ReadoutConfig& r) {
  if (given(cmd, "--reps")) r.reps = f.reps;
  if (given(cmd, "--sensors")) r.sensors = f.sensors;
  if (given(cmd, "--m0")) r.m0 = f.m0;
  if (given(cmd, "--contrast")) r.contrast = f.contrast;
  if (given(cmd, "--seed")) r.root_seed = f.seed;
}

void apply_engine_flags(const CLI::App* cmd, const Flags& f, EngineOptions& e) {
  if (given(cmd, "--realizations")) e.realizations = f.realizations;
  if (given(cmd, "--threads")) e.threads = f.threads;
  if (given(cmd, "--substeps")) e.pulse_substeps = f.substeps;
}

// returns true when any sequence-defining flag was given
bool apply_sequence_flags(const CLI::App* cmd, const Flags& f, SequenceSource& src) {
  if (given(cmd, "--seq") && given(cmd, "--builder"))
    throw Error("--seq and --builder are mutually exclusive");
  bool touched = false;
  if (given(cmd, "--seq")) {
    src.builder = "file";
    src.text = format_sequence(parse_sequence(read_file(f.seq_file)));
    touched = true;
  }
  if (given(cmd, "--builder")) {
    src.builder = f.builder;
    touched = true;
  }
  if (given(cmd, "--tau")) {
    src.tau = parse_duration(f.tau);
    touched = true;
  }
  if (given(cmd, "--pulses")) {
    src.pulses = f.pulses;
    touched = true;
  }
  return touched;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{
      "qsense: single-qubit sensing simulator (fringes, decoherence, noise "
      "spectroscopy, sensitivity budgets, resonance scans)"};
  app.require_subcommand(1);

  Flags f;
  int exit_code = 0;

  // fringes -------------------------------------------------------------
  auto* fringes_cmd = app.add_subcommand(
      "fringes", "sweep a sequence against a noise model and read out");
  add_sequence_flags(fringes_cmd, f, true);
  fringes_cmd->add_option("--noise", f.noise_file, "noise model file");
  fringes_cmd->add_option("--sweep", f.sweep,
                          "tau|delta|n:start:stop:count[:log]");
  add_readout_flags(fringes_cmd, f);
  add_engine_flags(fringes_cmd, f);
  add_output_flags(fringes_cmd, f);
  fringes_cmd->callback([&] {
    FringesConfig cfg;
    if (!f.config.empty())
      cfg = fringes_config_from_json(load_config(f.config, "fringes"));
    else
      cfg.sweep = parse_sweep("delta:-2MHz:2MHz:201");
    const bool seq_touched = apply_sequence_flags(fringes_cmd, f, cfg.seq);
    if (fringes_cmd->count("--noise"))
      cfg.model_text = format_model(parse_model(read_file(f.noise_file)));
    if (fringes_cmd->count("--sweep")) cfg.sweep = parse_sweep(f.sweep);
    apply_readout_flags(fringes_cmd, f, cfg.readout);
    apply_engine_flags(fringes_cmd, f, cfg.engine);
    if (seq_touched || cfg.seq.text.empty()) resolve_sequence_text(cfg.seq);
    exit_code = cmd_fringes(cfg, f.out);
  });

  // decay ---------------------------------------------------------------
  auto* decay_cmd = app.add_subcommand(
      "decay", "noise-averaged coherence versus interrogation time");
  add_sequence_flags(decay_cmd, f, false);
  decay_cmd->add_option("--noise", f.noise_file, "noise model file");
  decay_cmd->add_option("--sweep", f.sweep, "tau:start:stop:count[:log]");
  decay_cmd->add_option("--seed", f.seed, "root random seed");
  add_engine_flags(decay_cmd, f);
  add_output_flags(decay_cmd, f);
  decay_cmd->callback([&] {
    DecayConfig cfg;
    if (!f.config.empty())
      cfg = decay_config_from_json(load_config(f.config, "decay"));
    else {
      cfg.seq.builder = "hahn";
      cfg.sweep = parse_sweep("tau:1us:100us:25:log");
    }
    apply_sequence_flags(decay_cmd, f, cfg.seq);
    if (decay_cmd->count("--noise"))
      cfg.model_text = format_model(parse_model(read_file(f.noise_file)));
    if (decay_cmd->count("--sweep")) cfg.sweep = parse_sweep(f.sweep);
    if (decay_cmd->count("--seed")) cfg.seed = f.seed;
    apply_engine_flags(decay_cmd, f, cfg.engine);
    exit_code = cmd_decay(cfg, f.out);
  });

  // spectrum ------------------------------------------------------------
  auto* spectrum_cmd = app.add_subcommand(
      "spectrum", "reconstruct the noise spectrum from multipulse decays");
  spectrum_cmd->add_option("--pulses", f.pulses, "pi pulses per train (default 8)");
  spectrum_cmd->add_option("--noise", f.noise_file, "noise model file (required)");
  spectrum_cmd->add_option("--sweep", f.sweep, "tau:start:stop:count[:log]");
  spectrum_cmd->add_option("--seed", f.seed, "root random seed");
  add_engine_flags(spectrum_cmd, f);
  add_output_flags(spectrum_cmd, f);
  spectrum_cmd->callback([&] {
    SpectrumConfig cfg;
    if (!f.config.empty())
      cfg = spectrum_config_from_json(load_config(f.config, "spectrum"));
    if (spectrum_cmd->count("--pulses")) cfg.pulses = f.pulses;
    if (spectrum_cmd->count("--noise"))
      cfg.model_text = format_model(parse_model(read_file(f.noise_file)));
    if (spectrum_cmd->count("--sweep")) cfg.sweep = parse_sweep(f.sweep);
    if (spectrum_cmd->count("--seed")) cfg.seed = f.seed;
    apply_engine_flags(spectrum_cmd, f, cfg.engine);
    if (cfg.sweep.values.empty() && f.config.empty())
      throw Error("spectrum: needs --sweep tau:start:stop:count");
    exit_code = cmd_spectrum(cfg, f.out);
  });

  // sense ---------------------------------------------------------------
  auto* sense_cmd = app.add_subcommand(
      "sense", "shot-noise-limited field sensitivity budget");
  sense_cmd->add_option("--mode", f.mode, "dc | ac (default dc)");
  add_sensor_flags(sense_cmd, f);
  sense_cmd->add_option("--sensors", f.sensors, "independent sensors");
  sense_cmd->add_option("--m0", f.m0, "shots pooled per recorded sample");
  sense_cmd->add_option("--contrast", f.contrast, "readout contrast in (0, 1]");
  sense_cmd->add_option("--ttotal", f.ttotal, "averaging time, e.g. 1s");
  sense_cmd->add_option("--sweep", f.sweep, "ttotal:start:stop:count[:log]");
  sense_cmd->add_option("--reps", f.reps, "readout repetitions per shot");
  sense_cmd->add_option("--seed", f.seed, "root random seed");
  sense_cmd->add_option("--field", f.field,
                        "also estimate this known field, e.g. 1uT");
  add_output_flags(sense_cmd, f);
  sense_cmd->callback([&] {
    SenseConfig cfg;
    if (!f.config.empty())
      cfg = sense_config_from_json(load_config(f.config, "sense"));
    if (sense_cmd->count("--mode")) cfg.mode = f.mode;
    apply_sensor_flags(sense_cmd, f, cfg.sensor);
    if (sense_cmd->count("--sensors")) cfg.readout.sensors = f.sensors;
    if (sense_cmd->count("--m0")) cfg.readout.m0 = f.m0;
    if (sense_cmd->count("--contrast")) cfg.readout.contrast = f.contrast;
    if (sense_cmd->count("--reps")) cfg.readout.reps = f.reps;
    if (sense_cmd->count("--seed")) cfg.readout.root_seed = f.seed;
    if (sense_cmd->count("--ttotal"))
      cfg.sweep = Sweep{"ttotal", {parse_duration(f.ttotal)}};
    if (sense_cmd->count("--sweep")) cfg.sweep = parse_sweep(f.sweep);
    if (sense_cmd->count("--field")) {
      cfg.estimate = true;
      cfg.field = parse_field(f.field);
    }
    exit_code = cmd_sense(cfg, f.out);
  });

  // odmr ----------------------------------------------------------------
  auto* odmr_cmd = app.add_subcommand(
      "odmr", "swept-frequency resonance scan of the field-shifted dip");
  add_sensor_flags(odmr_cmd, f);
  odmr_cmd->add_option("--field", f.field, "applied field, e.g. 1mT");
  odmr_cmd->add_option("--linewidth", f.linewidth, "dip half width, e.g. 1MHz");
  odmr_cmd->add_option("--contrast", f.contrast, "dip depth in (0, 1]");
  odmr_cmd->add_option("--sweep", f.sweep,
                       "domega:start:stop:count (offsets around the dip)");
  add_output_flags(odmr_cmd, f);
  odmr_cmd->callback([&] {
    OdmrConfig cfg;
    if (!f.config.empty())
      cfg = odmr_config_from_json(load_config(f.config, "odmr"));
    else {
      cfg.linewidth = parse_angular_rate("1MHz");
      cfg.sweep = parse_sweep("domega:-20MHz:20MHz:401");
    }
    apply_sensor_flags(odmr_cmd, f, cfg.sensor);
    if (odmr_cmd->count("--field")) cfg.field = parse_field(f.field);
    if (odmr_cmd->count("--linewidth"))
      cfg.linewidth = parse_angular_rate(f.linewidth);
    if (odmr_cmd->count("--contrast")) cfg.contrast = f.contrast;
    if (odmr_cmd->count("--sweep")) cfg.sweep = parse_sweep(f.sweep);
    exit_code = cmd_odmr(cfg, f.out);
  });

  // validate --------------------------------------------------------------
  auto* validate_cmd = app.add_subcommand(
      "validate", "check sequence and noise model files without running");
  validate_cmd->add_option("--seq", f.seq_file, "pulse sequence file");
  validate_cmd->add_option("--noise", f.noise_file, "noise model file");
  validate_cmd->callback(
      [&] { exit_code = cmd_validate(f.seq_file, f.noise_file); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return exit_code;
}

}  // namespace qsense
