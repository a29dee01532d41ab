#include "qsense/sequence.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

#include "qsense/units.hpp"

namespace qsense {

namespace {

constexpr double kPi = 3.14159265358979323846;

double pulse_angle(PulseKind kind, double angle) {
  switch (kind) {
    case PulseKind::PiHalf: return 0.5 * kPi;
    case PulseKind::Pi: return kPi;
    case PulseKind::Arbitrary: return angle;
  }
  return angle;
}

}  // namespace

// ---------------------------------------------------------------- sequence

PulseSequence& PulseSequence::pulse(PulseKind kind, Axis axis,
                                    double duration) {
  if (axis == Axis::Z) throw Error("pulse axis must be x or y");
  if (duration < 0.0) throw Error("pulse duration must be >= 0");
  if (kind == PulseKind::Arbitrary)
    throw Error("use rotation() for arbitrary angles");
  events_.push_back(Pulse{kind, axis, pulse_angle(kind, 0.0), duration});
  return *this;
}

PulseSequence& PulseSequence::rotation(double angle, Axis axis,
                                       double duration) {
  if (axis == Axis::Z) throw Error("pulse axis must be x or y");
  if (duration < 0.0) throw Error("pulse duration must be >= 0");
  events_.push_back(Pulse{PulseKind::Arbitrary, axis, angle, duration});
  return *this;
}

PulseSequence& PulseSequence::wait(double duration) {
  if (duration <= 0.0) throw Error("wait duration must be > 0");
  events_.push_back(Delay{duration});
  return *this;
}

std::size_t PulseSequence::pulse_count() const {
  std::size_t n = 0;
  for (const auto& e : events_)
    if (std::holds_alternative<Pulse>(e)) ++n;
  return n;
}

std::size_t PulseSequence::pi_pulse_count() const {
  std::size_t n = 0;
  for (const auto& e : events_)
    if (const auto* p = std::get_if<Pulse>(&e); p && p->kind == PulseKind::Pi)
      ++n;
  return n;
}

double PulseSequence::span() const {
  double t = 0.0;
  for (const auto& e : events_)
    std::visit([&](const auto& ev) { t += ev.duration; }, e);
  return t;
}

double PulseSequence::total_time() const {
  std::ptrdiff_t first = -1, last = -1;
  for (std::size_t i = 0; i < events_.size(); ++i)
    if (std::holds_alternative<Pulse>(events_[i])) {
      if (first < 0) first = static_cast<std::ptrdiff_t>(i);
      last = static_cast<std::ptrdiff_t>(i);
    }
  if (first < 0 || first == last) return 0.0;
  double t = 0.0;
  for (std::ptrdiff_t i = first + 1; i < last; ++i)
    std::visit([&](const auto& ev) { t += ev.duration; }, events_[i]);
  return t;
}

// ------------------------------------------------------------------ parser

ParseError::ParseError(ParseErrorKind kind, int line, int column,
                       const std::string& message)
    : Error("line " + std::to_string(line) + ", column " +
            std::to_string(column) + ": " + message),
      kind_(kind),
      line_(line),
      column_(column) {}

namespace {

struct Token {
  std::string text;  // lowercased
  int column;        // 1-based
};

std::vector<Token> tokenize(const std::string& stmt, int col0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < stmt.size()) {
    if (std::isspace(static_cast<unsigned char>(stmt[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < stmt.size() && !std::isspace(static_cast<unsigned char>(stmt[j])))
      ++j;
    std::string t = stmt.substr(i, j - i);
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    out.push_back({t, col0 + static_cast<int>(i)});
    i = j;
  }
  return out;
}

std::optional<Axis> parse_axis(const std::string& t) {
  if (t == "x") return Axis::X;
  if (t == "y") return Axis::Y;
  return std::nullopt;
}

// number with attached or detached unit suffix, e.g. "0.5us" or "0.5 us"
double parse_wait_duration(const std::vector<Token>& tokens, std::size_t arg0,
                           int line) {
  std::string joined;
  for (std::size_t i = arg0; i < tokens.size(); ++i) joined += tokens[i].text;
  const int col = tokens[arg0].column;
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(joined.data(), joined.data() + joined.size(), value);
  if (ec != std::errc() || ptr == joined.data())
    throw ParseError(ParseErrorKind::Syntax, line, col,
                     "expected a duration like 0.5us after 'wait'");
  const std::string unit = joined.substr(static_cast<std::size_t>(ptr - joined.data()));
  double scale = 0.0;
  if (unit == "ns") scale = 1e-9;
  else if (unit == "us") scale = 1e-6;
  else if (unit == "ms") scale = 1e-3;
  else if (unit == "s") scale = 1.0;
  else
    throw ParseError(ParseErrorKind::Syntax, line, col,
                     unit.empty() ? "duration is missing a unit (ns|us|ms|s)"
                                  : "unknown duration unit '" + unit + "'");
  const double duration = value * scale;
  if (!(duration > 0.0))
    throw ParseError(ParseErrorKind::BadDelay, line, col,
                     "wait duration must be positive");
  return duration;
}

void parse_statement(PulseSequence& seq, const std::string& stmt, int line,
                     int col0) {
  const auto tokens = tokenize(stmt, col0);
  if (tokens.empty()) return;
  const auto& head = tokens[0];

  auto need_args = [&](std::size_t n, const char* what) {
    if (tokens.size() != n)
      throw ParseError(ParseErrorKind::Syntax, line, head.column, what);
  };
  auto get_axis = [&](const Token& t) {
    const auto axis = parse_axis(t.text);
    if (!axis)
      throw ParseError(ParseErrorKind::BadAxis, line, t.column,
                       "unknown axis '" + t.text + "' (expected x or y)");
    return *axis;
  };

  if (head.text == "p2") {
    need_args(2, "usage: p2 <axis>");
    seq.pulse(PulseKind::PiHalf, get_axis(tokens[1]));
  } else if (head.text == "pi") {
    need_args(2, "usage: pi <axis>");
    seq.pulse(PulseKind::Pi, get_axis(tokens[1]));
  } else if (head.text == "rot") {
    need_args(3, "usage: rot <angle_rad> <axis>");
    double angle = 0.0;
    const auto& t = tokens[1];
    auto [ptr, ec] =
        std::from_chars(t.text.data(), t.text.data() + t.text.size(), angle);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size())
      throw ParseError(ParseErrorKind::Syntax, line, t.column,
                       "expected an angle in radians");
    seq.rotation(angle, get_axis(tokens[2]));
  } else if (head.text == "wait") {
    if (tokens.size() < 2)
      throw ParseError(ParseErrorKind::Syntax, line, head.column,
                       "usage: wait <duration><unit>");
    seq.wait(parse_wait_duration(tokens, 1, line));
  } else {
    throw ParseError(ParseErrorKind::Syntax, line, head.column,
                     "unknown statement '" + head.text + "'");
  }
}

}  // namespace

PulseSequence parse_sequence(const std::string& text) {
  PulseSequence seq;
  int line = 1;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string body = text.substr(pos, eol - pos);
    if (const auto hash = body.find('#'); hash != std::string::npos)
      body = body.substr(0, hash);
    // ';' separates statements within a line
    std::size_t start = 0;
    while (start <= body.size()) {
      std::size_t semi = body.find(';', start);
      if (semi == std::string::npos) semi = body.size();
      parse_statement(seq, body.substr(start, semi - start), line,
                      static_cast<int>(start) + 1);
      start = semi + 1;
    }
    pos = eol + 1;
    ++line;
  }
  return seq;
}

std::string format_sequence(const PulseSequence& seq) {
  std::string out;
  for (const auto& e : seq.events()) {
    if (const auto* p = std::get_if<Pulse>(&e)) {
      if (p->duration != 0.0)
        throw Error("finite-width pulses have no text form");
      const char axis = p->axis == Axis::X ? 'x' : 'y';
      switch (p->kind) {
        case PulseKind::PiHalf: out += "p2 "; out += axis; break;
        case PulseKind::Pi: out += "pi "; out += axis; break;
        case PulseKind::Arbitrary:
          out += "rot " + format_double(p->angle) + " ";
          out += axis;
          break;
      }
    } else {
      out += "wait " + format_duration_dsl(std::get<Delay>(e).duration);
    }
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------- builders

PulseSequence ramsey(double tau) {
  if (tau <= 0.0) throw Error("ramsey needs tau > 0");
  PulseSequence seq;
  seq.pulse(PulseKind::PiHalf, Axis::Y).wait(tau).pulse(PulseKind::PiHalf,
                                                        Axis::Y);
  return seq;
}

PulseSequence hahn(double tau) { return cpmg(1, tau); }

PulseSequence cpmg(int n, double tau) {
  if (n < 1) throw Error("cpmg needs n >= 1");
  if (tau <= 0.0) throw Error("cpmg needs tau > 0");
  PulseSequence seq;
  seq.pulse(PulseKind::PiHalf, Axis::Y);
  seq.wait(0.5 * tau);
  for (int i = 0; i < n; ++i) {
    seq.pulse(PulseKind::Pi, Axis::X);
    seq.wait(i + 1 < n ? tau : 0.5 * tau);
  }
  seq.pulse(PulseKind::PiHalf, Axis::Y);
  return seq;
}

PulseSequence uhrig(int n, double total_time) {
  if (n < 1) throw Error("uhrig needs n >= 1");
  if (total_time <= 0.0) throw Error("uhrig needs total time > 0");
  PulseSequence seq;
  seq.pulse(PulseKind::PiHalf, Axis::Y);
  double prev = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double s = std::sin(kPi * j / (2.0 * n + 2.0));
    const double tj = total_time * s * s;
    seq.wait(tj - prev);
    seq.pulse(PulseKind::Pi, Axis::X);
    prev = tj;
  }
  seq.wait(total_time - prev);
  seq.pulse(PulseKind::PiHalf, Axis::Y);
  return seq;
}

// ---------------------------------------------------- sensitivity function

void check_sensing_sequence(const PulseSequence& seq) {
  std::vector<const Pulse*> pulses;
  for (const auto& e : seq.events())
    if (const auto* p = std::get_if<Pulse>(&e)) pulses.push_back(p);
  if (pulses.size() < 2)
    throw Error("sensing sequence needs at least two pulses");
  if (pulses.front()->kind != PulseKind::PiHalf ||
      pulses.back()->kind != PulseKind::PiHalf)
    throw Error("sensing sequence must start and end with a pi/2 pulse");
  for (std::size_t i = 1; i + 1 < pulses.size(); ++i)
    if (pulses[i]->kind != PulseKind::Pi)
      throw Error("interior pulses of a sensing sequence must be pi pulses");
  if (seq.total_time() <= 0.0)
    throw Error("sensing sequence has zero interrogation time");
}

SensitivityFunction::SensitivityFunction(std::vector<double> breakpoints,
                                         std::vector<int> signs)
    : breakpoints_(std::move(breakpoints)), signs_(std::move(signs)) {
  if (breakpoints_.size() != signs_.size() + 1 || signs_.empty())
    throw Error("sensitivity function needs n signs and n+1 breakpoints");
  if (!std::is_sorted(breakpoints_.begin(), breakpoints_.end()))
    throw Error("sensitivity breakpoints must be sorted");
}

int SensitivityFunction::value(double t) const {
  if (t < breakpoints_.front() || t >= breakpoints_.back()) return 0;
  const auto it =
      std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  const auto i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
  return signs_[std::min(i, signs_.size() - 1)];
}

SensitivityFunction sensitivity_function(const PulseSequence& seq) {
  check_sensing_sequence(seq);
  std::vector<double> breaks;
  std::vector<int> signs;
  double t = 0.0;
  int sign = 1;
  bool open = false;
  for (const auto& e : seq.events()) {
    if (const auto* p = std::get_if<Pulse>(&e)) {
      if (p->kind == PulseKind::PiHalf && !open) {
        t += p->duration;
        breaks.push_back(t);  // g starts when the first pi/2 ends
        open = true;
        continue;
      }
      if (p->kind == PulseKind::Pi && open) {
        breaks.push_back(t + 0.5 * p->duration);  // flip at pulse midpoint
        signs.push_back(sign);
        sign = -sign;
      }
      if (p->kind == PulseKind::PiHalf && open) {
        breaks.push_back(t);  // g ends when the last pi/2 starts
        signs.push_back(sign);
        return SensitivityFunction(std::move(breaks), std::move(signs));
      }
      t += p->duration;
    } else {
      t += std::get<Delay>(e).duration;
    }
  }
  throw Error("sensing sequence did not terminate with a pi/2 pulse");
}

double phase_from_signal(const SensitivityFunction& g, const Waveform& signal) {
  if (signal.coverage() < g.end() * (1.0 - 1e-12))
    throw Error("signal does not cover the sensing window");
  double phi = 0.0;
  const auto& b = g.breakpoints();
  const auto& s = g.signs();
  for (std::size_t i = 0; i < s.size(); ++i)
    phi += static_cast<double>(s[i]) * signal.integral(b[i], b[i + 1]);
  return phi;
}

// ------------------------------------------------------------------ filter

FilterSpectrum::FilterSpectrum(double total_time,
                               std::vector<std::complex<double>> coeff)
    : total_time_(total_time), coeff_(std::move(coeff)) {
  if (total_time_ <= 0.0) throw Error("filter needs total time > 0");
  if (coeff_.empty()) throw Error("filter needs at least the DC coefficient");
}

std::complex<double> FilterSpectrum::coefficient(int n) const {
  const int a = std::abs(n);
  if (a >= static_cast<int>(coeff_.size()))
    throw Error("harmonic index out of range");
  return n >= 0 ? coeff_[a] : std::conj(coeff_[a]);
}

double FilterSpectrum::frequency(int n) const {
  return static_cast<double>(n) / total_time_;
}

double FilterSpectrum::weight(int n) const {
  return std::norm(coefficient(n)) / total_time_;
}

double FilterSpectrum::weight_at(double nu) const {
  const double idx = std::abs(nu) * total_time_;
  const int n = std::min(static_cast<int>(std::lround(idx)), max_harmonic());
  return weight(n);
}

double FilterSpectrum::parseval_total() const {
  const double t2 = total_time_ * total_time_;
  double acc = std::norm(coeff_[0]) / t2;
  for (std::size_t n = 1; n < coeff_.size(); ++n)
    acc += 2.0 * std::norm(coeff_[n]) / t2;
  return acc;
}

FilterSpectrum filter_spectrum(const SensitivityFunction& g, int n_max) {
  if (n_max < 0) throw Error("filter needs n_max >= 0");
  const double T = g.total_time();
  const double t0 = g.start();
  const auto& b = g.breakpoints();
  const auto& s = g.signs();
  std::vector<std::complex<double>> coeff(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    std::complex<double> acc(0.0, 0.0);
    if (n == 0) {
      for (std::size_t i = 0; i < s.size(); ++i)
        acc += static_cast<double>(s[i]) * (b[i + 1] - b[i]);
    } else {
      const double w = 2.0 * kPi * static_cast<double>(n) / T;
      // integral of e^{-i w (t - t0)} over each constant segment
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::complex<double> ea = std::polar(1.0, -w * (b[i] - t0));
        const std::complex<double> eb = std::polar(1.0, -w * (b[i + 1] - t0));
        acc += static_cast<double>(s[i]) * (ea - eb) /
               std::complex<double>(0.0, w);
      }
    }
    coeff[static_cast<std::size_t>(n)] = acc;
  }
  return FilterSpectrum(T, std::move(coeff));
}

}  // namespace qsense
