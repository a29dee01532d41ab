#include "qsense/noise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

#include "qsense/error.hpp"
#include "qsense/rng.hpp"
#include "qsense/units.hpp"
#include "qsense/util.hpp"

namespace qsense {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_part(const SignalModel& model, bool nested) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          if (!std::isfinite(m.delta0)) throw Error("constant: delta0 must be finite");
        } else if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          if (!std::isfinite(m.mean)) throw Error("static_gaussian: mean must be finite");
          if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma))
            throw Error("static_gaussian: sigma must be >= 0");
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          if (!std::isfinite(m.amplitude)) throw Error("sinusoid: amplitude must be finite");
          if (!(m.frequency_hz > 0.0)) throw Error("sinusoid: frequency must be > 0");
          if (m.phase && !std::isfinite(*m.phase))
            throw Error("sinusoid: phase must be finite or random");
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeckModel>) {
          if (!(m.sigma >= 0.0) || !std::isfinite(m.sigma))
            throw Error("ou: sigma must be >= 0");
          if (!(m.tau_c > 0.0)) throw Error("ou: tau_c must be > 0");
        } else {
          static_assert(std::is_same_v<T, CompositeModel>);
          if (nested) throw Error("composite models cannot be nested; flatten the part list");
          if (m.parts.empty()) throw Error("composite: needs at least one part");
          for (const auto& p : m.parts) validate_part(p, true);
        }
      },
      model);
}

}  // namespace

void validate_model(const SignalModel& model) { validate_part(model, false); }

bool is_deterministic(const SignalModel& model) {
  return std::visit(
      [](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return true;
        } else if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          return m.sigma == 0.0;
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          return m.phase.has_value();
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeckModel>) {
          return m.sigma == 0.0;
        } else {
          return std::all_of(m.parts.begin(), m.parts.end(),
                             [](const SignalModel& p) { return is_deterministic(p); });
        }
      },
      model);
}

std::optional<double> psd(const SignalModel& model, double nu_hz) {
  if (!(nu_hz >= 0.0)) throw Error("psd: frequency must be >= 0");
  return std::visit(
      [&](const auto& m) -> std::optional<double> {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          return 0.0;  // pure line at nu = 0
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          if (!m.phase) return 0.0;  // pure line at the tone frequency
          return std::nullopt;       // fixed phase: no stationary ensemble density
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeckModel>) {
          const double w = kTwoPi * nu_hz * m.tau_c;
          return 2.0 * m.sigma * m.sigma * m.tau_c / (1.0 + w * w);
        } else {
          double total = 0.0;
          for (const auto& p : m.parts) {
            auto s = psd(p, nu_hz);
            if (!s) return std::nullopt;
            total += *s;
          }
          return total;
        }
      },
      model);
}

std::vector<SpectralLine> spectral_lines(const SignalModel& model) {
  std::vector<SpectralLine> lines;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          if (m.sigma > 0.0) lines.push_back({0.0, m.sigma * m.sigma});
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          if (!m.phase && m.amplitude != 0.0)
            lines.push_back({m.frequency_hz, 0.5 * m.amplitude * m.amplitude});
        } else if constexpr (std::is_same_v<T, CompositeModel>) {
          for (const auto& p : m.parts)
            for (const auto& l : spectral_lines(p)) lines.push_back(l);
        }
      },
      model);
  return lines;
}

bool psd_defined(const SignalModel& model) { return psd(model, 0.0).has_value(); }

// --------------------------------------------------------------- sampling

namespace {

std::size_t grid_size(double total_time, double dt) {
  // cover [0, total_time]; the (1 - 1e-12) guard keeps exact multiples from
  // picking up a spurious extra step
  const double steps = std::ceil(total_time / dt * (1.0 - 1e-12));
  return static_cast<std::size_t>(steps) + 1;
}

void add_sampled(const SignalModel& model, double dt, std::vector<double>& values,
                 std::uint64_t seed) {
  const std::size_t n = values.size();
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          for (auto& v : values) v += m.delta0;
        } else if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          Rng rng(seed);
          const double offset = m.mean + m.sigma * rng.gaussian();
          for (auto& v : values) v += offset;
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          Rng rng(seed);
          const double phase = m.phase ? *m.phase : rng.uniform() * kTwoPi;
          const double w = kTwoPi * m.frequency_hz;
          for (std::size_t i = 0; i < n; ++i)
            values[i] += m.amplitude * std::sin(w * (static_cast<double>(i) * dt) + phase);
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeckModel>) {
          if (dt > m.tau_c / 10.0)
            throw Error("sample_trajectory: dt must be <= tau_c/10 for an OU component");
          Rng rng(seed);
          // exact discrete update for the stationary process
          const double decay = std::exp(-dt / m.tau_c);
          const double kick = m.sigma * std::sqrt(1.0 - decay * decay);
          double x = m.sigma * rng.gaussian();
          values[0] += x;
          for (std::size_t i = 1; i < n; ++i) {
            x = x * decay + kick * rng.gaussian();
            values[i] += x;
          }
        } else {
          static_assert(std::is_same_v<T, CompositeModel>);
          for (std::size_t i = 0; i < m.parts.size(); ++i)
            add_sampled(m.parts[i], dt, values, derive_seed(seed, i));
        }
      },
      model);
}

}  // namespace

NoiseTrajectory sample_trajectory(const SignalModel& model, double total_time,
                                  double dt, std::uint64_t seed) {
  validate_model(model);
  if (!(total_time > 0.0)) throw Error("sample_trajectory: total_time must be > 0");
  if (!(dt > 0.0)) throw Error("sample_trajectory: dt must be > 0");
  if (dt > total_time) throw Error("sample_trajectory: dt must be <= total_time");
  NoiseTrajectory traj;
  traj.dt = dt;
  traj.seed = seed;
  traj.values.assign(grid_size(total_time, dt), 0.0);
  add_sampled(model, dt, traj.values, seed);
  return traj;
}

Waveform to_waveform(const NoiseTrajectory& traj) {
  return Waveform::sampled(traj.dt, traj.values);
}

Waveform realize(const SignalModel& model, double total_time, std::uint64_t seed) {
  validate_model(model);
  if (!(total_time > 0.0)) throw Error("realize: total_time must be > 0");
  return std::visit(
      [&](const auto& m) -> Waveform {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          return Waveform::constant(m.delta0);
        } else if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          Rng rng(seed);
          return Waveform::constant(m.mean + m.sigma * rng.gaussian());
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          if (m.phase) return Waveform::sinusoid(m.amplitude, m.frequency_hz, *m.phase);
          Rng rng(seed);
          return Waveform::sinusoid(m.amplitude, m.frequency_hz, rng.uniform() * kTwoPi);
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeckModel>) {
          const double dt = std::min(m.tau_c / 20.0, total_time / 1000.0);
          return to_waveform(sample_trajectory(model, total_time, dt, seed));
        } else {
          std::vector<Waveform> parts;
          parts.reserve(m.parts.size());
          for (std::size_t i = 0; i < m.parts.size(); ++i)
            parts.push_back(realize(m.parts[i], total_time, derive_seed(seed, i)));
          return Waveform::sum(std::move(parts));
        }
      },
      model);
}

void write_trajectory_csv(const NoiseTrajectory& traj, std::ostream& out) {
  out << "time_s,delta_rad_per_s\n";
  for (std::size_t i = 0; i < traj.values.size(); ++i)
    out << format_double(static_cast<double>(i) * traj.dt) << ','
        << format_double(traj.values[i]) << '\n';
}

// ------------------------------------------------------------- periodogram

namespace {

void fft_in_place(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -kTwoPi / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

}  // namespace

Periodogram periodogram(std::span<const NoiseTrajectory> trajectories) {
  if (trajectories.size() < 100)
    throw Error("periodogram: needs at least 100 trajectories");
  const double dt = trajectories.front().dt;
  const std::size_t total = trajectories.front().values.size();
  for (const auto& t : trajectories) {
    if (t.dt != dt) throw Error("periodogram: trajectories must share dt");
    if (t.values.size() != total)
      throw Error("periodogram: trajectories must share length");
  }
  std::size_t m = 1;
  while (m * 2 <= total) m *= 2;
  if (m < 2) throw Error("periodogram: trajectories too short");

  Periodogram pg;
  pg.frequency_hz.resize(m / 2 + 1);
  pg.density.assign(m / 2 + 1, 0.0);
  const double span = static_cast<double>(m) * dt;
  for (std::size_t k = 0; k <= m / 2; ++k)
    pg.frequency_hz[k] = static_cast<double>(k) / span;

  std::vector<std::complex<double>> buf(m);
  for (const auto& t : trajectories) {
    for (std::size_t i = 0; i < m; ++i) buf[i] = t.values[i];
    fft_in_place(buf);
    // |continuous transform|^2 / record length, with the transform
    // approximated by dt * DFT
    for (std::size_t k = 0; k <= m / 2; ++k)
      pg.density[k] += std::norm(buf[k]) * dt * dt / span;
  }
  const double inv = 1.0 / static_cast<double>(trajectories.size());
  for (auto& d : pg.density) d *= inv;
  return pg;
}

// ------------------------------------------------------------ text config

namespace {

struct Section {
  std::map<std::string, std::string> kv;
  int first_line = 0;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void config_fail(int line, const std::string& msg) {
  throw Error("model config line " + std::to_string(line) + ": " + msg);
}

// lowercased keys; values kept verbatim
std::vector<Section> split_sections(const std::string& text) {
  std::vector<Section> sections(1);
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[component]")
        config_fail(line_no, "unknown section '" + line + "' (expected [component])");
      sections.push_back({{}, line_no});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_fail(line_no, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) config_fail(line_no, "expected key = value");
    if (!sections.back().kv.emplace(key, value).second)
      config_fail(line_no, "duplicate key '" + key + "'");
  }
  return sections;
}

class SectionReader {
 public:
  explicit SectionReader(const Section& s) : kv_(s.kv), line_(s.first_line) {}

  std::string require(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end())
      config_fail(line_, "missing key '" + key + "'");
    used_.push_back(key);
    return it->second;
  }

  std::optional<std::string> optional(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    used_.push_back(key);
    return it->second;
  }

  void finish() const {
    for (const auto& [key, value] : kv_) {
      (void)value;
      if (std::find(used_.begin(), used_.end(), key) == used_.end())
        config_fail(line_, "unknown key '" + key + "'");
    }
  }

 private:
  const std::map<std::string, std::string>& kv_;
  int line_;
  std::vector<std::string> used_;
};

SignalModel parse_flat(const Section& section) {
  SectionReader rd(section);
  std::string kind = rd.require("model");
  std::transform(kind.begin(), kind.end(), kind.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  SignalModel model;
  if (kind == "constant") {
    model = ConstantModel{parse_angular_rate(rd.require("delta0"))};
  } else if (kind == "static_gaussian") {
    StaticGaussianModel m;
    if (auto mean = rd.optional("mean")) m.mean = parse_angular_rate(*mean);
    m.sigma = parse_angular_rate(rd.require("sigma"));
    model = m;
  } else if (kind == "sinusoid") {
    SinusoidModel m;
    m.amplitude = parse_angular_rate(rd.require("amplitude"));
    m.frequency_hz = parse_frequency_hz(rd.require("frequency"));
    if (auto phase = rd.optional("phase"); phase && *phase != "random")
      m.phase = parse_number(*phase);
    model = m;
  } else if (kind == "ou") {
    OrnsteinUhlenbeckModel m;
    m.sigma = parse_angular_rate(rd.require("sigma"));
    m.tau_c = parse_duration(rd.require("tau_c"));
    model = m;
  } else {
    config_fail(section.first_line, "unknown model '" + kind + "'");
  }
  rd.finish();
  return model;
}

}  // namespace

SignalModel parse_model(const std::string& text) {
  const auto sections = split_sections(text);
  const auto& head = sections.front();
  const auto it = head.kv.find("model");
  if (it == head.kv.end()) throw Error("model config: missing 'model' key");
  std::string kind = it->second;
  std::transform(kind.begin(), kind.end(), kind.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  SignalModel model;
  if (kind == "composite") {
    SectionReader rd(head);
    rd.require("model");
    rd.finish();
    CompositeModel comp;
    for (std::size_t i = 1; i < sections.size(); ++i)
      comp.parts.push_back(parse_flat(sections[i]));
    if (comp.parts.empty())
      throw Error("model config: composite needs at least one [component]");
    model = comp;
  } else {
    if (sections.size() > 1)
      config_fail(sections[1].first_line,
                  "[component] sections are only valid for model = composite");
    model = parse_flat(head);
  }
  validate_model(model);
  return model;
}

namespace {

void format_flat(const SignalModel& model, std::string& out) {
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, ConstantModel>) {
          out += "model = constant\n";
          out += "delta0 = " + format_double(m.delta0) + " rad/s\n";
        } else if constexpr (std::is_same_v<T, StaticGaussianModel>) {
          out += "model = static_gaussian\n";
          out += "mean = " + format_double(m.mean) + " rad/s\n";
          out += "sigma = " + format_double(m.sigma) + " rad/s\n";
        } else if constexpr (std::is_same_v<T, SinusoidModel>) {
          out += "model = sinusoid\n";
          out += "amplitude = " + format_double(m.amplitude) + " rad/s\n";
          out += "frequency = " + format_double(m.frequency_hz) + " Hz\n";
          out += "phase = " + (m.phase ? format_double(*m.phase) : std::string("random")) + "\n";
        } else if constexpr (std::is_same_v<T, OrnsteinUhlenbeckModel>) {
          out += "model = ou\n";
          out += "sigma = " + format_double(m.sigma) + " rad/s\n";
          out += "tau_c = " + format_double(m.tau_c) + " s\n";
        } else {
          throw Error("format_model: composite parts cannot nest");
        }
      },
      model);
}

}  // namespace

std::string format_model(const SignalModel& model) {
  validate_model(model);
  std::string out;
  if (const auto* comp = std::get_if<CompositeModel>(&model)) {
    out += "model = composite\n";
    for (const auto& part : comp->parts) {
      out += "\n[component]\n";
      format_flat(part, out);
    }
  } else {
    format_flat(model, out);
  }
  return out;
}

}  // namespace qsense
