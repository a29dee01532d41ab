#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "qsense/engine.hpp"
#include "qsense/rng.hpp"
#include "qsense/sequence.hpp"
#include "qsense/units.hpp"
#include "qsense/waveform.hpp"

#include "oracles.hpp"

using namespace qsense;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> pi_pulse_times(const PulseSequence& seq) {
  std::vector<double> times;
  double t = 0.0;
  for (const auto& ev : seq.events()) {
    if (const auto* p = std::get_if<Pulse>(&ev)) {
      if (p->kind == PulseKind::Pi) times.push_back(t + 0.5 * p->duration);
      t += p->duration;
    } else {
      t += std::get<Delay>(ev).duration;
    }
  }
  return times;
}

}  // namespace

// ----------------------------------------------------------------- parsing

TEST_CASE("the canonical echo text parses into the expected events") {
  const PulseSequence seq =
      parse_sequence("p2 y; wait 0.5us; pi x; wait 0.5us; p2 y");
  REQUIRE(seq.events().size() == 5);
  const auto& first = std::get<Pulse>(seq.events()[0]);
  CHECK(first.kind == PulseKind::PiHalf);
  CHECK(first.axis == Axis::Y);
  CHECK(first.duration == 0.0);
  CHECK(std::get<Delay>(seq.events()[1]).duration == 0.5e-6);
  const auto& mid = std::get<Pulse>(seq.events()[2]);
  CHECK(mid.kind == PulseKind::Pi);
  CHECK(mid.axis == Axis::X);
  CHECK(seq.total_time() == doctest::Approx(1e-6).epsilon(1e-15));
  CHECK(seq.pulse_count() == 3);
  CHECK(seq.pi_pulse_count() == 1);
  CHECK(seq == hahn(1e-6));
}

TEST_CASE("parsing is case insensitive, supports newlines and comments") {
  const PulseSequence seq = parse_sequence(
      "# prepare\nP2 Y\nWAIT 1 us  # free evolution\np2 y\n\n");
  CHECK(seq == ramsey(1e-6));
  CHECK(parse_sequence("rot 1.5707963267948966 x; wait 2ns; rot -0.5 y")
            .pulse_count() == 2);
}

TEST_CASE("parse errors carry kind, line and column") {
  try {
    parse_sequence("p2 y\nwait 0.5us\nfoo y\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::Syntax);
    CHECK(e.line() == 3);
    CHECK(e.column() == 1);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  try {
    parse_sequence("p2 y; wait -1us; p2 y");
    FAIL("expected a delay error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::BadDelay);
    CHECK(e.line() == 1);
    CHECK(e.column() > 1);
  }

  try {
    parse_sequence("p2 z");
    FAIL("expected an axis error");
  } catch (const ParseError& e) {
    CHECK(e.kind() == ParseErrorKind::BadAxis);
  }

  CHECK_THROWS_AS(parse_sequence("wait 1"), ParseError);      // missing unit
  CHECK_THROWS_AS(parse_sequence("wait us"), ParseError);     // missing number
  CHECK_THROWS_AS(parse_sequence("p2"), ParseError);          // missing axis
  CHECK_THROWS_AS(parse_sequence("rot x"), ParseError);       // missing angle
  CHECK_THROWS_AS(parse_sequence("wait 0us"), ParseError);    // zero delay
  CHECK_THROWS_AS(parse_sequence("pi y extra"), ParseError);  // trailing token
}

TEST_CASE("format and parse round-trip bit-exactly") {
  std::vector<PulseSequence> cases = {
      ramsey(1e-6),
      hahn(0.7e-6),
      cpmg(4, 1.3e-6),
      cpmg(8, 2.2e-6),
      uhrig(5, 1e-5),
      uhrig(8, 3.7e-5),
  };
  // awkward durations and arbitrary rotations
  PulseSequence odd;
  odd.rotation(0.123456789, Axis::X)
      .wait(1.0 / 3.0 * 1e-6)
      .rotation(-2.5, Axis::Y)
      .wait(7.77e-10)
      .pulse(PulseKind::PiHalf, Axis::X);
  cases.push_back(odd);

  for (const auto& seq : cases) {
    const std::string text = format_sequence(seq);
    const PulseSequence back = parse_sequence(text);
    CHECK(back == seq);
    CHECK(format_sequence(back) == text);
  }
}

TEST_CASE("finite-width pulses have no text form") {
  PulseSequence seq;
  seq.pulse(PulseKind::PiHalf, Axis::Y, 1e-8).wait(1e-6);
  CHECK_THROWS_AS(format_sequence(seq), Error);
}

// ---------------------------------------------------------------- builders

TEST_CASE("cpmg pulse times follow the tau/2, tau, ..., tau/2 pattern") {
  const double tau = 1e-6;
  const PulseSequence seq = cpmg(4, tau);
  const std::vector<double> times = pi_pulse_times(seq);
  REQUIRE(times.size() == 4);
  CHECK(times[0] == doctest::Approx(0.5e-6).epsilon(1e-12));
  CHECK(times[1] == doctest::Approx(1.5e-6).epsilon(1e-12));
  CHECK(times[2] == doctest::Approx(2.5e-6).epsilon(1e-12));
  CHECK(times[3] == doctest::Approx(3.5e-6).epsilon(1e-12));
  CHECK(seq.total_time() == doctest::Approx(4.0 * tau).epsilon(1e-15));
  CHECK(seq.span() == seq.total_time());  // ideal pulses have zero width
}

TEST_CASE("uhrig pulse times follow the sine-squared schedule") {
  const double total = 2e-5;
  const int n = 6;
  const std::vector<double> times = pi_pulse_times(uhrig(n, total));
  REQUIRE(times.size() == static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) {
    const double expected =
        total * std::pow(std::sin(kPi * j / (2.0 * (n + 1))), 2);
    CHECK(times[j - 1] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("single-pulse uhrig is the hahn echo") {
  const std::vector<double> a = pi_pulse_times(uhrig(1, 2e-6));
  const std::vector<double> b = pi_pulse_times(hahn(2e-6));
  REQUIRE(a.size() == 1);
  REQUIRE(b.size() == 1);
  CHECK(a[0] == doctest::Approx(b[0]).epsilon(1e-12));
  CHECK(uhrig(1, 2e-6).total_time() ==
        doctest::Approx(hahn(2e-6).total_time()).epsilon(1e-12));
}

TEST_CASE("builders reject nonsense parameters") {
  CHECK_THROWS_AS(ramsey(0.0), Error);
  CHECK_THROWS_AS(cpmg(0, 1e-6), Error);
  CHECK_THROWS_AS(cpmg(4, -1e-6), Error);
  CHECK_THROWS_AS(uhrig(0, 1e-6), Error);
  PulseSequence seq;
  CHECK_THROWS_AS(seq.wait(-1e-6), Error);
  CHECK_THROWS_AS(seq.pulse(PulseKind::Pi, Axis::Z), Error);
  CHECK_THROWS_AS(seq.pulse(PulseKind::Pi, Axis::X, -1e-9), Error);
}

TEST_CASE("sensing-sequence checks catch malformed sequences") {
  CHECK_NOTHROW(check_sensing_sequence(ramsey(1e-6)));
  CHECK_NOTHROW(check_sensing_sequence(cpmg(8, 1e-6)));

  PulseSequence no_close;
  no_close.pulse(PulseKind::PiHalf, Axis::Y).wait(1e-6);
  CHECK_THROWS_AS(check_sensing_sequence(no_close), Error);

  PulseSequence pi_first;
  pi_first.pulse(PulseKind::Pi, Axis::Y).wait(1e-6).pulse(PulseKind::PiHalf, Axis::Y);
  CHECK_THROWS_AS(check_sensing_sequence(pi_first), Error);

  PulseSequence rot_inside;
  rot_inside.pulse(PulseKind::PiHalf, Axis::Y)
      .wait(1e-6)
      .rotation(kPi, Axis::X)  // right angle, wrong kind
      .wait(1e-6)
      .pulse(PulseKind::PiHalf, Axis::Y);
  CHECK_THROWS_AS(check_sensing_sequence(rot_inside), Error);
}

// ------------------------------------------------------- switching function

TEST_CASE("switching function segments and signs") {
  const double tau = 2e-6;
  const SensitivityFunction g = sensitivity_function(hahn(tau));
  REQUIRE(g.breakpoints().size() == 3);
  CHECK(g.breakpoints()[0] == 0.0);
  CHECK(g.breakpoints()[1] == doctest::Approx(0.5 * tau).epsilon(1e-15));
  CHECK(g.breakpoints()[2] == doctest::Approx(tau).epsilon(1e-15));
  CHECK(g.signs() == std::vector<int>{1, -1});
  CHECK(g.value(0.25 * tau) == 1);
  CHECK(g.value(0.75 * tau) == -1);
  CHECK(g.value(-1e-9) == 0);
  CHECK(g.value(tau + 1e-9) == 0);

  const SensitivityFunction gr = sensitivity_function(ramsey(tau));
  CHECK(gr.signs() == std::vector<int>{1});
  CHECK(gr.total_time() == doctest::Approx(tau).epsilon(1e-15));

  const SensitivityFunction g2 = sensitivity_function(cpmg(2, tau));
  CHECK(g2.signs() == std::vector<int>{1, -1, 1});
  CHECK(g2.breakpoints()[1] == doctest::Approx(0.5 * tau).epsilon(1e-12));
  CHECK(g2.breakpoints()[2] == doctest::Approx(1.5 * tau).epsilon(1e-12));
}

TEST_CASE("accumulated phase for constant signals") {
  const double tau = 3e-6;
  const double delta = 2.0 * kPi * 7.5e4;
  // ramsey integrates the constant; any echo train cancels it
  CHECK(phase_from_signal(sensitivity_function(ramsey(tau)),
                          Waveform::constant(delta)) ==
        doctest::Approx(delta * tau).epsilon(1e-13));
  for (int n : {1, 2, 5, 8}) {
    const double phi = phase_from_signal(sensitivity_function(cpmg(n, tau)),
                                         Waveform::constant(delta));
    CHECK(std::abs(phi) < 1e-12 * std::abs(delta * tau * n));
  }
}

TEST_CASE("accumulated phase matches quadrature for a sinusoid") {
  const double tau = 1.7e-6;
  const PulseSequence seq = cpmg(4, tau);
  const SensitivityFunction g = sensitivity_function(seq);
  const double amp = 2.0 * kPi * 3e4;
  const double freq = 2.3e5;
  const double phase = 0.77;
  const Waveform wave = Waveform::sinusoid(amp, freq, phase);
  const double got = phase_from_signal(g, wave);

  double want = 0.0;
  for (std::size_t s = 0; s + 1 < g.breakpoints().size(); ++s) {
    const double a = g.breakpoints()[s];
    const double b = g.breakpoints()[s + 1];
    const int sign = g.signs()[s];
    want += sign * oracle::simpson(
                       [&](double t) {
                         return amp * std::sin(2.0 * kPi * freq * t + phase);
                       },
                       a, b, 20000);
  }
  CHECK(got == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("phase-aligned lock-in signal accumulates 2/pi of b*T") {
  // sinusoid at the pass-band frequency 1/(2 tau) with phase pi/2 has its
  // zeros exactly at the pulse flips; the rectified average is 2/pi
  const double tau = 2e-6;
  const double b = 2.0 * kPi * 1e4;
  for (int n : {2, 4, 8}) {
    const PulseSequence seq = cpmg(n, tau);
    const double total = seq.total_time();
    const double phi =
        phase_from_signal(sensitivity_function(seq),
                          Waveform::sinusoid(b, 1.0 / (2.0 * tau), kPi / 2));
    CHECK(phi == doctest::Approx(b * total * 2.0 / kPi).epsilon(1e-10));
  }
}

// ------------------------------------------------------------------ filter

TEST_CASE("filter weights match a blunt Riemann DFT") {
  const double tau = 1.7e-6;
  const PulseSequence seq = cpmg(3, tau);
  const SensitivityFunction g = sensitivity_function(seq);
  const FilterSpectrum fs = filter_spectrum(g, 16);
  const double total = fs.total_time();
  for (int n : {0, 1, 2, 3, 5, 8, 12}) {
    const double want = oracle::filter_weight_riemann(
        [&](double t) { return g.value(t); }, g.start(), g.end(),
        static_cast<double>(n) / total, 400000);
    const double got = fs.weight(n);
    CHECK(got == doctest::Approx(want).epsilon(5e-5));
  }
}

TEST_CASE("ramsey filter is a pure dc window") {
  const double tau = 2.5e-6;
  const FilterSpectrum fs = filter_spectrum(sensitivity_function(ramsey(tau)), 64);
  CHECK(std::abs(fs.coefficient(0)) == doctest::Approx(tau).epsilon(1e-14));
  CHECK(fs.weight(0) == doctest::Approx(tau).epsilon(1e-13));
  for (int n = 1; n <= 64; ++n) CHECK(std::abs(fs.coefficient(n)) < 1e-12 * tau);
}

TEST_CASE("even pulse trains have no dc weight and peak at 1/(2 tau)") {
  const double tau = 1e-6;
  for (int n : {2, 4, 6, 8}) {
    const PulseSequence seq = cpmg(n, tau);
    const FilterSpectrum fs = filter_spectrum(sensitivity_function(seq), 200);
    const double total = seq.total_time();
    CHECK(std::abs(fs.coefficient(0)) < 1e-9 * total);

    int best = 0;
    for (int k = 1; k <= fs.max_harmonic(); ++k)
      if (fs.weight(k) > fs.weight(best)) best = k;
    CHECK(best == n / 2);  // harmonic n/2 of 1/T = n/(2 n tau) = 1/(2 tau)
    CHECK(fs.frequency(best) == doctest::Approx(1.0 / (2.0 * tau)).epsilon(1e-12));
  }
}

TEST_CASE("odd pulse trains also peak at 1/(2 tau)") {
  // odd n puts the peak between harmonics; the nearest-harmonic lookup
  // must still find a dominant weight within 1/T of 1/(2 tau)
  const double tau = 1e-6;
  const PulseSequence seq = cpmg(3, tau);
  const FilterSpectrum fs = filter_spectrum(sensitivity_function(seq), 200);
  int best = 0;
  for (int k = 1; k <= fs.max_harmonic(); ++k)
    if (fs.weight(k) > fs.weight(best)) best = k;
  CHECK(std::abs(fs.frequency(best) - 1.0 / (2.0 * tau)) <=
        1.0 / seq.total_time() + 1e-9);
}

TEST_CASE("filter power sums to the Parseval limit") {
  for (int n : {1, 2, 8}) {
    const FilterSpectrum fs =
        filter_spectrum(sensitivity_function(cpmg(n, 1e-6)), 10000);
    CHECK(fs.parseval_total() == doctest::Approx(1.0).epsilon(0.01));
    CHECK(fs.parseval_total() <= 1.0 + 1e-9);
  }
}

TEST_CASE("negative harmonics are conjugates") {
  const FilterSpectrum fs = filter_spectrum(sensitivity_function(cpmg(3, 1e-6)), 8);
  for (int n = 1; n <= 8; ++n) {
    const auto c = fs.coefficient(n);
    const auto cm = fs.coefficient(-n);
    CHECK(std::abs(cm - std::conj(c)) < 1e-18);
  }
  CHECK(fs.weight(-3) == fs.weight(3));
}

TEST_CASE("weight_at picks the nearest harmonic and clamps") {
  const double tau = 1e-6;
  const FilterSpectrum fs = filter_spectrum(sensitivity_function(cpmg(4, tau)), 50);
  const double total = 4.0 * tau;
  CHECK(fs.weight_at(2.0 / total) == fs.weight(2));
  CHECK(fs.weight_at(2.4 / total) == fs.weight(2));
  CHECK(fs.weight_at(2.6 / total) == fs.weight(3));
  CHECK(fs.weight_at(1e12) == fs.weight(50));
  CHECK(fs.weight_at(0.0) == fs.weight(0));
}

// ----------------------------------------------------- sequence invariants

TEST_CASE("zero detuning returns every ideal sequence to |1>") {
  const Waveform zero = Waveform::constant(0.0);
  CHECK(run_once(ramsey(1e-6), zero) == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 1; n <= 8; ++n) {
    CHECK(run_once(cpmg(n, 1e-6), zero) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(run_once(uhrig(n, 8e-6), zero) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("echoes cancel arbitrary static detuning exactly") {
  for (double delta : {2.0 * kPi * 1e7, -2.0 * kPi * 1e7, 2.0 * kPi * 3.3e5}) {
    const Waveform wave = Waveform::constant(delta);
    for (int n = 1; n <= 8; ++n) {
      CHECK(run_once(cpmg(n, 1e-6), wave) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(run_once(uhrig(n, 8e-6), wave) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("population follows the cosine of the switched phase integral") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    // random echo train with uneven delays
    const int pis = static_cast<int>(rng.uniform() * 6.0);
    PulseSequence seq;
    seq.pulse(PulseKind::PiHalf, Axis::Y);
    seq.wait(1e-7 + 2e-6 * rng.uniform());
    for (int k = 0; k < pis; ++k) {
      seq.pulse(PulseKind::Pi, Axis::X);
      seq.wait(1e-7 + 2e-6 * rng.uniform());
    }
    seq.pulse(PulseKind::PiHalf, Axis::Y);

    // random piecewise-constant detuning over the span
    const double span = seq.span();
    const int cells = 1 + static_cast<int>(rng.uniform() * 7.0);
    std::vector<double> knots{0.0};
    for (int c = 0; c < cells - 1; ++c)
      knots.push_back(span * rng.uniform());
    knots.push_back(span * 1.0000001);
    std::sort(knots.begin(), knots.end());
    std::vector<double> values;
    for (int c = 0; c < cells; ++c)
      values.push_back(2.0 * kPi * 4e5 * (rng.uniform() - 0.5));
    const Waveform wave = Waveform::piecewise_constant(knots, values);

    const double phi = phase_from_signal(sensitivity_function(seq), wave);
    const double expected = 0.5 * (1.0 + std::cos(phi));
    CHECK(run_once(seq, wave) == doctest::Approx(expected).epsilon(1e-9));
  }
}

// --------------------------------------------------------------- waveforms

TEST_CASE("waveform integrals are exact for closed forms") {
  CHECK(Waveform::constant(3.5).integral(-1.0, 2.0) ==
        doctest::Approx(10.5).epsilon(1e-15));

  const Waveform s = Waveform::sinusoid(2.0, 1.5e5, 0.3);
  const double got = s.integral(1e-7, 8e-6);
  const double want = oracle::simpson(
      [&](double t) { return 2.0 * std::sin(2.0 * kPi * 1.5e5 * t + 0.3); },
      1e-7, 8e-6, 40000);
  CHECK(got == doctest::Approx(want).epsilon(1e-10));
  CHECK(s.value(2e-6) ==
        doctest::Approx(2.0 * std::sin(2.0 * kPi * 1.5e5 * 2e-6 + 0.3))
            .epsilon(1e-15));

  const Waveform pw = Waveform::piecewise_constant({0.0, 1.0, 3.0}, {2.0, -1.0});
  CHECK(pw.integral(0.0, 3.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(pw.integral(0.5, 2.0) == doctest::Approx(1.0 - 1.0).epsilon(1e-15));
  CHECK(pw.value(0.5) == 2.0);
  CHECK(pw.value(2.9) == -1.0);
  CHECK(pw.value(3.1) == 0.0);
}

TEST_CASE("sampled waveforms integrate their linear interpolant") {
  const Waveform w = Waveform::sampled(0.5, {0.0, 1.0, 0.0, -1.0});
  // trapezoid pieces: 0.25, 0.25, -0.25
  CHECK(w.integral(0.0, 1.5) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(w.value(0.25) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(w.integral(0.25, 0.75) == doctest::Approx(0.375).epsilon(1e-14));
  CHECK(w.coverage() == doctest::Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(w.integral(0.0, 2.0), Error);  // past the record
}

TEST_CASE("waveform sums add values and integrals") {
  const Waveform sum = Waveform::sum(
      {Waveform::constant(1.0), Waveform::sinusoid(3.0, 1e5, 0.0),
       Waveform::piecewise_constant({0.0, 1e-5}, {2.0})});
  const double t = 3e-6;
  CHECK(sum.value(t) ==
        doctest::Approx(1.0 + 3.0 * std::sin(2.0 * kPi * 1e5 * t) + 2.0)
            .epsilon(1e-14));
  CHECK(sum.integral(0.0, 1e-5) ==
        doctest::Approx(Waveform::constant(1.0).integral(0.0, 1e-5) +
                        Waveform::sinusoid(3.0, 1e5, 0.0).integral(0.0, 1e-5) +
                        2e-5)
            .epsilon(1e-13));
}

TEST_CASE("waveform constructors reject malformed input") {
  CHECK_THROWS_AS(Waveform::sinusoid(1.0, 0.0, 0.0), Error);
  CHECK_THROWS_AS(Waveform::sinusoid(1.0, -2.0, 0.0), Error);
  CHECK_THROWS_AS(Waveform::piecewise_constant({0.0, 1.0}, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(Waveform::piecewise_constant({1.0, 0.0}, {1.0}), Error);
  CHECK_THROWS_AS(Waveform::sampled(0.0, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(Waveform::sampled(0.5, {1.0}), Error);
}

TEST_CASE("boundary unit parsing") {
  CHECK(parse_duration("0.5us") == doctest::Approx(5e-7).epsilon(1e-15));
  CHECK(parse_duration("12 ns") == doctest::Approx(1.2e-8).epsilon(1e-15));
  CHECK(parse_angular_rate("50kHz") ==
        doctest::Approx(2.0 * kPi * 5e4).epsilon(1e-15));
  CHECK(parse_angular_rate("3.1e5 rad/s") == 3.1e5);
  CHECK(parse_frequency_hz("2 MHz") == 2e6);
  CHECK(parse_field("10uT") == doctest::Approx(1e-5).epsilon(1e-15));
  CHECK(parse_gyromagnetic("30MHz/mT") ==
        doctest::Approx(2.0 * kPi * 3e7 / 1e-3).epsilon(1e-15));

  // zero is unit-independent; anything else must name its unit
  CHECK(parse_duration("0") == 0.0);
  CHECK(parse_angular_rate("0") == 0.0);
  CHECK(parse_field("0") == 0.0);
  CHECK_THROWS_AS(parse_duration("5"), Error);
  CHECK_THROWS_AS(parse_angular_rate("5"), Error);
  CHECK_THROWS_AS(parse_duration("5 parsec"), Error);
  CHECK_THROWS_AS(parse_angular_rate("bogus"), Error);
  CHECK_THROWS_AS(parse_gyromagnetic("30MHz"), Error);
}
