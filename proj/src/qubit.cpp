#include "qsense/qubit.hpp"

#include <cmath>

#include "qsense/error.hpp"

namespace qsense {

namespace {

constexpr double kNormTol = 1e-12;
constexpr double kTraceTol = 1e-9;

const Cplx kI(0.0, 1.0);

}  // namespace

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

Mat2 su2_rotation(double nx, double ny, double nz, double angle) {
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  // cos(a/2) I - i sin(a/2) (n . sigma)
  return {Cplx(c, -s * nz), Cplx(-s * ny, -s * nx), Cplx(s * ny, -s * nx),
          Cplx(c, s * nz)};
}

PureState::PureState(Cplx amp0, Cplx amp1) : amp0_(amp0), amp1_(amp1) {
  if (std::abs(norm_squared() - 1.0) > kNormTol)
    throw Error("pure state is not normalized (|a0|^2+|a1|^2 = " +
                std::to_string(norm_squared()) +
                "); use PureState::normalized for explicit rescaling");
}

PureState PureState::normalized(Cplx amp0, Cplx amp1) {
  const double n = std::sqrt(std::norm(amp0) + std::norm(amp1));
  if (n == 0.0) throw Error("cannot normalize the zero vector");
  return PureState(amp0 / n, amp1 / n);
}

PureState PureState::equatorial(double phi) {
  const double r = 1.0 / std::sqrt(2.0);
  return PureState(Cplx(r, 0.0), r * std::exp(kI * phi));
}

DensityMatrix PureState::to_density() const {
  return DensityMatrix(std::norm(amp0_), amp0_ * std::conj(amp1_),
                       std::norm(amp1_));
}

DensityMatrix::DensityMatrix(double rho00, Cplx rho01, double rho11)
    : rho00_(rho00), rho11_(rho11), rho01_(rho01) {
  if (std::abs(rho00_ + rho11_ - 1.0) > kTraceTol)
    throw Error("density matrix trace differs from 1");
  if (rho00_ < -kTraceTol || rho11_ < -kTraceTol)
    throw Error("density matrix has a negative population");
  const double det = rho00_ * rho11_ - std::norm(rho01_);
  if (det < -kTraceTol)
    throw Error("density matrix is not positive semidefinite");
  const double p = purity();
  if (p < 0.5 - kTraceTol || p > 1.0 + kTraceTol)
    throw Error("density matrix purity outside [1/2, 1]");
}

double DensityMatrix::purity() const {
  return rho00_ * rho00_ + rho11_ * rho11_ + 2.0 * std::norm(rho01_);
}

BlochVector to_bloch(const PureState& psi) { return to_bloch(psi.to_density()); }

BlochVector to_bloch(const DensityMatrix& rho) {
  return {2.0 * rho.rho01().real(), -2.0 * rho.rho01().imag(),
          rho.rho11() - rho.rho00()};
}

double population_one(const PureState& psi) { return psi.population_one(); }
double population_one(const DensityMatrix& rho) { return rho.population_one(); }

DensityMatrix mix(std::span<const DensityMatrix> states,
                  std::span<const double> weights) {
  if (states.empty() || states.size() != weights.size())
    throw Error("mix needs matching, non-empty state and weight lists");
  double wsum = 0.0;
  double r00 = 0.0, r11 = 0.0;
  Cplx r01(0.0, 0.0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (weights[i] < 0.0) throw Error("mix weights must be nonnegative");
    wsum += weights[i];
    r00 += weights[i] * states[i].rho00();
    r11 += weights[i] * states[i].rho11();
    r01 += weights[i] * states[i].rho01();
  }
  if (std::abs(wsum - 1.0) > kTraceTol)
    throw Error("mix weights must sum to 1");
  return DensityMatrix(r00, r01, r11);
}

PureState apply(const Mat2& u, const PureState& psi) {
  return PureState(u.a00 * psi.amp0() + u.a01 * psi.amp1(),
                   u.a10 * psi.amp0() + u.a11 * psi.amp1());
}

DensityMatrix apply(const Mat2& u, const DensityMatrix& rho) {
  const Mat2 m{Cplx(rho.rho00(), 0.0), rho.rho01(), rho.rho10(),
               Cplx(rho.rho11(), 0.0)};
  const Mat2 r = u * m * u.dagger();
  return DensityMatrix(r.a00.real(), r.a01, r.a11.real());
}

Mat2 rotation_operator(Axis axis, double angle) {
  switch (axis) {
    case Axis::X: return su2_rotation(1.0, 0.0, 0.0, angle);
    case Axis::Y: return su2_rotation(0.0, 1.0, 0.0, angle);
    case Axis::Z: return su2_rotation(0.0, 0.0, 1.0, angle);
  }
  throw Error("bad rotation axis");
}

PureState rotate(const PureState& psi, Axis axis, double angle) {
  return apply(rotation_operator(axis, angle), psi);
}

DensityMatrix rotate(const DensityMatrix& rho, Axis axis, double angle) {
  return apply(rotation_operator(axis, angle), rho);
}

Mat2 free_evolution_operator(double delta, double t) {
  return su2_rotation(0.0, 0.0, 1.0, delta * t);
}

PureState free_evolve(const PureState& psi, double delta, double t) {
  return apply(free_evolution_operator(delta, t), psi);
}

DensityMatrix free_evolve(const DensityMatrix& rho, double delta, double t) {
  return apply(free_evolution_operator(delta, t), rho);
}

Mat2 rabi_operator(double rabi, double delta, double t, Axis axis) {
  if (axis == Axis::Z)
    throw Error("drive axis must be equatorial (x or y)");
  const double g = std::hypot(rabi, delta);
  if (g == 0.0) return {Cplx(1.0, 0.0), Cplx(0.0, 0.0), Cplx(0.0, 0.0),
                        Cplx(1.0, 0.0)};
  const double nd = delta / g;
  const double nr = rabi / g;
  if (axis == Axis::X) return su2_rotation(nr, 0.0, nd, g * t);
  return su2_rotation(0.0, nr, nd, g * t);
}

PureState rabi_oscillation(const PureState& psi, double rabi, double delta,
                           double t, Axis axis) {
  return apply(rabi_operator(rabi, delta, t, axis), psi);
}

DensityMatrix rabi_oscillation(const DensityMatrix& rho, double rabi,
                               double delta, double t, Axis axis) {
  return apply(rabi_operator(rabi, delta, t, axis), rho);
}

}  // namespace qsense
