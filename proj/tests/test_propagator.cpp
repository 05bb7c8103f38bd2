#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "lzi/errors.hpp"
#include "lzi/propagator.hpp"
#include "test_support.hpp"

using namespace lzi;
using lzi::testing::make_rng;
using lzi::testing::uniform;

namespace {

const double kPi = std::numbers::pi;
const cplx I(0.0, 1.0);

OperatorMatrix random_hermitian(std::mt19937_64& rng, int dim) {
  OperatorMatrix m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) m(i, j) = cplx(uniform(rng, -1, 1), uniform(rng, -1, 1));
  }
  return 0.5 * (m + m.adjoint());
}

// A smooth, non-commuting three-level Hamiltonian for order studies.
OperatorMatrix smooth_h(double t) {
  OperatorMatrix h(3, 3);
  h << t, 0.7 * std::cos(t), cplx(0.2, 0.3),
       0.7 * std::cos(t), -0.5 * t, 0.4 * std::sin(2 * t),
       cplx(0.2, -0.3), 0.4 * std::sin(2 * t), 0.3;
  return h;
}

LinearSweep two_level_lz(double v) {
  LinearSweep s{OperatorMatrix::Zero(2, 2), OperatorMatrix::Zero(2, 2)};
  s.slope(0, 0) = 1.0;
  s.constant(0, 1) = s.constant(1, 0) = v;
  return s;
}

}  // namespace

TEST_CASE("exponential of a Hermitian matrix against the Pade matrix exponential") {
  auto rng = make_rng(1);
  for (int dim = 1; dim <= 6; ++dim) {
    for (int trial = 0; trial < 10; ++trial) {
      const OperatorMatrix h = random_hermitian(rng, dim);
      const double s = uniform(rng, -3, 3);
      const OperatorMatrix expected = (I * s * h).exp();
      CHECK(max_abs(expi_hermitian(h, s) - expected) < 1e-12);
    }
  }
  CHECK(max_abs(expi_hermitian(OperatorMatrix::Zero(2, 2), 1.0) - OperatorMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("sign convention: psi(t) = exp(iHt) psi(0)") {
  OperatorMatrix sz(2, 2);
  sz << 1, 0, 0, -1;
  const HamiltonianFn h = [&](double) { return sz; };
  StateVector psi0(2);
  psi0 << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  for (Method m : {Method::rk4, Method::magnus2, Method::cf4, Method::adaptive}) {
    PropagationSpec spec;
    spec.t1 = kPi / 2;
    spec.rtol = 1e-9;
    const auto half = propagate(h, psi0, spec);
    spec.t1 = kPi;
    spec.method = m;
    const auto full = propagate(h, psi0, spec);
    CHECK(std::norm(psi0.dot(half.psi)) < 1e-12);
    CHECK(std::norm(psi0.dot(full.psi)) == doctest::Approx(1.0).epsilon(1e-9));
    const StateVector expected = (I * kPi * sz).exp() * psi0;
    CHECK((full.psi - expected).cwiseAbs().maxCoeff() < 1e-8);
  }
  // Opposite sign would give exp(-iHt); distinguishable at t = pi/4.
  PropagationSpec quarter;
  quarter.t1 = kPi / 4;
  const auto q = propagate(h, psi0, quarter);
  CHECK((q.psi - (I * (kPi / 4) * sz).exp() * psi0).norm() < 1e-10);
  CHECK((q.psi - (-I * (kPi / 4) * sz).exp() * psi0).norm() > 0.5);
}

TEST_CASE("zero Hamiltonian leaves the state unchanged") {
  const HamiltonianFn h = [](double) { return OperatorMatrix::Zero(3, 3); };
  const StateVector psi0 = StateVector::Unit(3, 1);
  PropagationSpec spec;
  spec.t0 = -2.0;
  spec.t1 = 5.0;
  for (Method m : {Method::rk4, Method::magnus2, Method::cf4, Method::adaptive}) {
    spec.method = m;
    CHECK((propagate(h, psi0, spec).psi - psi0).norm() == 0.0);
  }
}

TEST_CASE("fixed-step methods show their nominal order") {
  const OperatorMatrix y0 = OperatorMatrix::Identity(3, 3);
  const OperatorMatrix ref = fixed_step_evolve(smooth_h, y0, 0.0, 2.0, 20000, Method::cf4);
  struct Case {
    Method method;
    double ratio;
    long n;
  };
  for (const Case c : {Case{Method::rk4, 16.0, 100}, Case{Method::magnus2, 4.0, 100}, Case{Method::cf4, 16.0, 100}}) {
    const double e1 = max_abs(fixed_step_evolve(smooth_h, y0, 0.0, 2.0, c.n, c.method) - ref);
    const double e2 = max_abs(fixed_step_evolve(smooth_h, y0, 0.0, 2.0, 2 * c.n, c.method) - ref);
    CAPTURE(static_cast<int>(c.method));
    CHECK(e1 / e2 == doctest::Approx(c.ratio).epsilon(0.1));
  }
}

TEST_CASE("unitarity") {
  PropagationSpec spec;
  spec.t0 = -3.0;
  spec.t1 = 3.0;
  for (Method m : {Method::magnus2, Method::cf4, Method::adaptive}) {
    spec.method = m;
    spec.rtol = m == Method::magnus2 ? 1e-3 : 1e-9;
    const auto u = propagate_unitary(smooth_h, 3, spec);
    CHECK(unitarity_defect(u.u) < 1e-12);
  }
  SUBCASE("norm drift of the exponential midpoint rule over 10^6 steps") {
    const OperatorMatrix y0 = StateVector::Unit(2, 0);
    const HamiltonianFn h = [](double t) {
      OperatorMatrix m(2, 2);
      m << 0.5 * t, 0.3, 0.3, -0.5 * t;
      return m;
    };
    const OperatorMatrix y = fixed_step_evolve(h, y0, -50.0, 50.0, 1'000'000, Method::magnus2);
    CHECK(std::abs(y.norm() - 1.0) < 1e-8);
  }
}

TEST_CASE("error control") {
  PropagationSpec spec;
  spec.t1 = 2.0;
  spec.rtol = 1e-10;
  spec.method = Method::adaptive;
  const StateVector psi0 = StateVector::Unit(3, 0);
  const auto adaptive = propagate(smooth_h, psi0, spec);
  const StateVector ref = fixed_step_evolve(smooth_h, psi0, 0.0, 2.0, 20000, Method::cf4);
  CHECK((adaptive.psi - ref).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(adaptive.error_estimate < 1e-9);

  spec.method = Method::cf4;
  spec.step = 0.5;
  CHECK_THROWS_AS(propagate(smooth_h, psi0, spec), NumericalError);
  spec.step = 1e-3;
  spec.max_steps = 100;
  CHECK_THROWS_AS(propagate(smooth_h, psi0, spec), NumericalError);

  PropagationSpec bad;
  bad.t0 = 1.0;
  bad.t1 = 0.0;
  CHECK_THROWS_AS(propagate(smooth_h, psi0, bad), InvalidArgument);
  bad = PropagationSpec{};
  bad.rtol = 0.0;
  CHECK_THROWS_AS(propagate(smooth_h, psi0, bad), InvalidArgument);
}

TEST_CASE("interaction picture") {
  SUBCASE("diagonal Hamiltonian maps to zero") {
    LinearSweep s{OperatorMatrix::Zero(3, 3), OperatorMatrix::Zero(3, 3)};
    s.constant.diagonal() << 0.5, -1.0, 2.0;
    s.slope.diagonal() << 1.0, 0.0, -0.5;
    CHECK(max_abs(interaction_picture(s)(1.3)) == 0.0);
    CHECK(max_abs(interaction_picture(as_function(s))(1.3)) < 1e-14);
  }
  SUBCASE("two-level sweep: off-diagonal is v e^{-i t^2 / 2}") {
    LinearSweep s{OperatorMatrix::Zero(2, 2), OperatorMatrix::Zero(2, 2)};
    s.slope.diagonal() << 0.5, -0.5;
    s.constant(0, 1) = s.constant(1, 0) = 0.3;
    const auto ht = interaction_picture(s);
    for (double t : {-4.0, -0.7, 0.0, 2.5}) {
      const OperatorMatrix m = ht(t);
      CHECK(std::abs(m(0, 1) - 0.3 * std::exp(-I * (0.5 * t * t))) < 1e-14);
      CHECK(std::abs(m(0, 1)) == doctest::Approx(0.3));
      CHECK(hermiticity_defect(m) < 1e-15);
    }
  }
  SUBCASE("general callable agrees with the exact sweep phases") {
    auto rng = make_rng(3);
    LinearSweep s{random_hermitian(rng, 3), OperatorMatrix::Zero(3, 3)};
    s.slope.diagonal() << 1.0, -0.4, 0.0;
    const auto exact = interaction_picture(s);
    const auto general = interaction_picture(as_function(s));
    for (double t : {-3.3, 0.4, 2.0}) CHECK(max_abs(exact(t) - general(t)) < 1e-12);
  }
  SUBCASE("lab frame and interaction picture give the same populations") {
    auto rng = make_rng(5);
    LinearSweep s{random_hermitian(rng, 4), OperatorMatrix::Zero(4, 4)};
    s.slope.diagonal() << 1.0, 0.0, -0.5, 0.3;
    PropagationSpec spec;
    spec.t0 = -6.0;
    spec.t1 = 6.0;
    spec.rtol = 1e-11;
    spec.step = 2e-3;
    const StateVector psi0 = StateVector::Unit(4, 0);
    const auto lab = propagate(as_function(s), psi0, spec);
    // phi(t0) = W(t0)^dagger psi0 carries only a phase on a basis state.
    const auto rotated = propagate(interaction_picture(s), psi0, spec);
    CHECK((lab.psi.cwiseAbs2() - rotated.psi.cwiseAbs2()).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("transition matrices") {
  SUBCASE("zero couplings give the identity") {
    LinearSweep s{OperatorMatrix::Zero(3, 3), OperatorMatrix::Zero(3, 3)};
    s.slope.diagonal() << 1.0, 0.0, -1.0;
    s.constant.diagonal() << 0.0, 0.5, 0.2;
    const auto r = transition_matrix(s, 20.0);
    // Exact up to the roundoff accumulated over ~10^4 unit-modulus phase products.
    CHECK((r.matrix - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(r.T_used == 40.0);
  }
  SUBCASE("two-level Landau-Zener survival") {
    const double v = 0.25;
    const auto r = transition_matrix(two_level_lz(v), 100.0);
    const double exact = std::exp(-2 * kPi * v * v);
    CHECK(std::abs(r.extrapolated(0, 0) - exact) < 1e-2);
    CHECK(std::abs(r.matrix(0, 0) - exact) < 1e-2);
    for (int c = 0; c < 2; ++c) CHECK(std::abs(r.matrix.col(c).sum() - 1.0) < 1e-8);
    CHECK(r.unitarity_defect < 1e-8);
    CHECK((r.matrix.array() >= 0.0).all());
    CHECK((r.matrix.array() <= 1.0 + 1e-9).all());
    // The finite-T error shrinks as the horizon grows.
    CHECK(std::abs(r.matrix(0, 0) - exact) <= std::abs(r.matrix_half(0, 0) - exact) + 1e-4);
  }
  CHECK_THROWS_AS(transition_matrix(two_level_lz(0.1), 0.0), InvalidArgument);
}
