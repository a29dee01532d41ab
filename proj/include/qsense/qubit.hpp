#pragma once

#include <complex>
#include <span>
#include <vector>

namespace qsense {

// Two-level-system states and exact rotating-frame propagators.
//
// Frozen conventions (asserted by tests, do not change one without the rest):
//  * basis order (|0>, |1>); |0> is the initialized level
//  * Bloch map: x = 2 Re rho01, y = -2 Im rho01, z = rho11 - rho00,
//    so |0> sits at the SOUTH pole (0,0,-1) and the equal superposition
//    (|0> + e^{i phi}|1>)/sqrt(2) sits on the equator at longitude phi
//  * rotations use the generator exp(-i angle sigma_axis / 2) with
//      sigma_x = [[0,1],[1,0]], sigma_y = [[0,-i],[i,0]], sigma_z = [[1,0],[0,-1]]
//    hence rotate(y, pi/2)|0> = (|0>+|1>)/sqrt(2) and rotate(y, pi)|0> = |1>
//  * free evolution at detuning Delta for time t multiplies the relative
//    phase of |1> by e^{+i Delta t} (longitude advances by Delta*t); it equals
//    rotate(z, Delta*t) and is diag(e^{-i Delta t/2}, e^{+i Delta t/2})
//  * all rates are angular (rad/s), all times are seconds
//
// States are never renormalized silently: constructors reject non-normalized
// input and PureState::normalized() / DensityMatrix validation are explicit.

using Cplx = std::complex<double>;

enum class Axis { X, Y, Z };

// 2x2 complex matrix, row major
struct Mat2 {
  Cplx a00, a01, a10, a11;

  Mat2 operator*(const Mat2& o) const {
    return {a00 * o.a00 + a01 * o.a10, a00 * o.a01 + a01 * o.a11,
            a10 * o.a00 + a11 * o.a10, a10 * o.a01 + a11 * o.a11};
  }
  Mat2 dagger() const {
    return {std::conj(a00), std::conj(a10), std::conj(a01), std::conj(a11)};
  }
};

// SU(2) element exp(-i angle (n . sigma) / 2) for unit axis n
Mat2 su2_rotation(double nx, double ny, double nz, double angle);

struct BlochVector {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const;
};

class DensityMatrix;

class PureState {
 public:
  // requires |amp0|^2 + |amp1|^2 = 1 within 1e-12
  PureState(Cplx amp0, Cplx amp1);

  // explicit renormalization of arbitrary (non-null) amplitudes
  static PureState normalized(Cplx amp0, Cplx amp1);

  static PureState ket0() { return PureState(1.0, 0.0); }
  static PureState ket1() { return PureState(0.0, 1.0); }
  // (|0> + e^{i phi}|1>)/sqrt(2)
  static PureState equatorial(double phi);

  Cplx amp0() const { return amp0_; }
  Cplx amp1() const { return amp1_; }
  double population_one() const { return std::norm(amp1_); }
  double norm_squared() const { return std::norm(amp0_) + std::norm(amp1_); }

  DensityMatrix to_density() const;

 private:
  Cplx amp0_, amp1_;
};

class DensityMatrix {
 public:
  // Hermiticity holds by construction (rho10 is stored as conj(rho01));
  // requires trace 1 within 1e-9, positive semidefiniteness and purity
  // tr(rho^2) in [1/2 - eps, 1 + eps]
  DensityMatrix(double rho00, Cplx rho01, double rho11);

  double rho00() const { return rho00_; }
  double rho11() const { return rho11_; }
  Cplx rho01() const { return rho01_; }
  Cplx rho10() const { return std::conj(rho01_); }

  double population_one() const { return rho11_; }
  // off-diagonal coherence magnitude |rho01|
  double coherence() const { return std::abs(rho01_); }
  double purity() const;

 private:
  double rho00_, rho11_;
  Cplx rho01_;
};

BlochVector to_bloch(const PureState& psi);
BlochVector to_bloch(const DensityMatrix& rho);

double population_one(const PureState& psi);
double population_one(const DensityMatrix& rho);

// convex combination sum_i w_i rho_i; weights nonnegative, summing to 1
// within 1e-9
DensityMatrix mix(std::span<const DensityMatrix> states,
                  std::span<const double> weights);

PureState apply(const Mat2& u, const PureState& psi);
DensityMatrix apply(const Mat2& u, const DensityMatrix& rho);

// rotation by `angle` about a Bloch axis: exp(-i angle sigma_axis / 2)
Mat2 rotation_operator(Axis axis, double angle);
PureState rotate(const PureState& psi, Axis axis, double angle);
DensityMatrix rotate(const DensityMatrix& rho, Axis axis, double angle);

// free evolution at constant detuning: conjugation by
// diag(e^{-i delta t/2}, e^{+i delta t/2})
Mat2 free_evolution_operator(double delta, double t);
PureState free_evolve(const PureState& psi, double delta, double t);
DensityMatrix free_evolve(const DensityMatrix& rho, double delta, double t);

// driven evolution with Rabi rate `rabi` about an equatorial axis (X or Y)
// plus detuning `delta`, for time t.  At delta = 0 this is
// rotate(axis, rabi*t); from |0> the |1> population oscillates with
// amplitude rabi^2/(rabi^2 + delta^2) at the generalized Rabi rate
// sqrt(rabi^2 + delta^2).
Mat2 rabi_operator(double rabi, double delta, double t, Axis axis = Axis::Y);
PureState rabi_oscillation(const PureState& psi, double rabi, double delta,
                           double t, Axis axis = Axis::Y);
DensityMatrix rabi_oscillation(const DensityMatrix& rho, double rabi,
                               double delta, double t, Axis axis = Axis::Y);

}  // namespace qsense
