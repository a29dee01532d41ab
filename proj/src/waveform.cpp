#include "qsense/waveform.hpp"

#include <algorithm>
#include <cmath>

#include "qsense/error.hpp"

namespace qsense {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Waveform Waveform::constant(double value) { return Waveform(Constant{value}); }

Waveform Waveform::sinusoid(double amplitude, double frequency_hz,
                            double phase) {
  if (frequency_hz <= 0.0) throw Error("sinusoid frequency must be positive");
  return Waveform(Sinusoid{amplitude, frequency_hz, phase});
}

Waveform Waveform::piecewise_constant(std::vector<double> knots,
                                      std::vector<double> values) {
  if (knots.size() != values.size() + 1 || values.empty())
    throw Error("piecewise waveform needs n values and n+1 knots");
  if (!std::is_sorted(knots.begin(), knots.end()))
    throw Error("piecewise waveform knots must be sorted");
  return Waveform(Piecewise{std::move(knots), std::move(values)});
}

Waveform Waveform::sampled(double dt, std::vector<double> samples) {
  if (dt <= 0.0) throw Error("sample step must be positive");
  if (samples.size() < 2) throw Error("sampled waveform needs >= 2 samples");
  return Waveform(Sampled{dt, std::move(samples)});
}

Waveform Waveform::sum(std::vector<Waveform> parts) {
  if (parts.empty()) throw Error("waveform sum needs at least one part");
  return Waveform(Sum{std::move(parts)});
}

double Waveform::value(double t) const {
  struct V {
    double t;
    double operator()(const Constant& c) const { return c.value; }
    double operator()(const Sinusoid& s) const {
      return s.amplitude * std::sin(kTwoPi * s.frequency_hz * t + s.phase);
    }
    double operator()(const Piecewise& p) const {
      if (t < p.knots.front() || t >= p.knots.back()) return 0.0;
      const auto it = std::upper_bound(p.knots.begin(), p.knots.end(), t);
      const auto i = static_cast<std::size_t>(it - p.knots.begin()) - 1;
      return p.values[std::min(i, p.values.size() - 1)];
    }
    double operator()(const Sampled& s) const {
      const double u = t / s.dt;
      if (u < 0.0) throw Error("sampled waveform queried before t = 0");
      const auto n = s.samples.size();
      const auto i = static_cast<std::size_t>(u);
      if (i + 1 >= n) {
        if (u > static_cast<double>(n - 1) + 1e-9)
          throw Error("sampled waveform queried past its coverage");
        return s.samples[n - 1];
      }
      const double f = u - static_cast<double>(i);
      return (1.0 - f) * s.samples[i] + f * s.samples[i + 1];
    }
    double operator()(const Sum& m) const {
      double acc = 0.0;
      for (const auto& part : m.parts) acc += part.value(t);
      return acc;
    }
  };
  return std::visit(V{t}, node_);
}

double Waveform::integral(double t0, double t1) const {
  if (t1 < t0) return -integral(t1, t0);
  struct V {
    double t0, t1;
    double operator()(const Constant& c) const {
      return c.value * (t1 - t0);
    }
    double operator()(const Sinusoid& s) const {
      const double w = kTwoPi * s.frequency_hz;
      return s.amplitude / w *
             (std::cos(w * t0 + s.phase) - std::cos(w * t1 + s.phase));
    }
    double operator()(const Piecewise& p) const {
      double acc = 0.0;
      for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double lo = std::max(t0, p.knots[i]);
        const double hi = std::min(t1, p.knots[i + 1]);
        if (hi > lo) acc += p.values[i] * (hi - lo);
      }
      return acc;
    }
    double operator()(const Sampled& s) const {
      const auto n = s.samples.size();
      const double cover = s.dt * static_cast<double>(n - 1);
      if (t0 < -1e-12 * s.dt || t1 > cover * (1.0 + 1e-12) + 1e-12 * s.dt)
        throw Error("sampled waveform does not cover the requested interval");
      // exact integral of the piecewise-linear interpolant
      auto interp = [&](double t) {
        const double u = std::clamp(t / s.dt, 0.0, double(n - 1));
        const auto i = std::min(static_cast<std::size_t>(u), n - 2);
        const double f = u - static_cast<double>(i);
        return (1.0 - f) * s.samples[i] + f * s.samples[i + 1];
      };
      const auto i0 = std::min(static_cast<std::size_t>(std::max(t0, 0.0) / s.dt), n - 2);
      const auto i1 = std::min(static_cast<std::size_t>(std::max(t1, 0.0) / s.dt), n - 2);
      if (i0 == i1)
        return 0.5 * (interp(t0) + interp(t1)) * (t1 - t0);
      double acc = 0.5 * (interp(t0) + s.samples[i0 + 1]) *
                   (s.dt * static_cast<double>(i0 + 1) - t0);
      for (std::size_t i = i0 + 1; i < i1; ++i)
        acc += 0.5 * (s.samples[i] + s.samples[i + 1]) * s.dt;
      acc += 0.5 * (s.samples[i1] + interp(t1)) *
             (t1 - s.dt * static_cast<double>(i1));
      return acc;
    }
    double operator()(const Sum& m) const {
      double acc = 0.0;
      for (const auto& part : m.parts) acc += part.integral(t0, t1);
      return acc;
    }
  };
  return std::visit(V{t0, t1}, node_);
}

double Waveform::coverage() const {
  struct V {
    double operator()(const Constant&) const { return kInf; }
    double operator()(const Sinusoid&) const { return kInf; }
    double operator()(const Piecewise&) const { return kInf; }
    double operator()(const Sampled& s) const {
      return s.dt * static_cast<double>(s.samples.size() - 1);
    }
    double operator()(const Sum& m) const {
      double c = kInf;
      for (const auto& part : m.parts) c = std::min(c, part.coverage());
      return c;
    }
  };
  return std::visit(V{}, node_);
}

}  // namespace qsense
