#include "lzi/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "lzi/errors.hpp"
#include "lzi/parallel.hpp"

namespace lzi {

namespace {

const cplx kI(0.0, 1.0);

double max_abs_entry(const OperatorMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

OperatorMatrix rk4_step(const HamiltonianFn& h, const OperatorMatrix& y, double t, double dt) {
  const OperatorMatrix hm = h(t + 0.5 * dt);
  const OperatorMatrix k1 = kI * (h(t) * y);
  const OperatorMatrix k2 = kI * (hm * (y + 0.5 * dt * k1));
  const OperatorMatrix k3 = kI * (hm * (y + 0.5 * dt * k2));
  const OperatorMatrix k4 = kI * (h(t + dt) * (y + dt * k3));
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

OperatorMatrix magnus2_step(const HamiltonianFn& h, const OperatorMatrix& y, double t, double dt) {
  return expi_hermitian(h(t + 0.5 * dt), dt) * y;
}

OperatorMatrix cf4_step(const HamiltonianFn& h, const OperatorMatrix& y, double t, double dt) {
  static const double r3 = std::sqrt(3.0);
  static const double c1 = 0.5 - r3 / 6.0;
  static const double c2 = 0.5 + r3 / 6.0;
  static const double a1 = (3.0 - 2.0 * r3) / 12.0;
  static const double a2 = (3.0 + 2.0 * r3) / 12.0;
  const OperatorMatrix h1 = h(t + c1 * dt);
  const OperatorMatrix h2 = h(t + c2 * dt);
  const OperatorMatrix first = expi_hermitian(a2 * h1 + a1 * h2, dt);
  const OperatorMatrix second = expi_hermitian(a1 * h1 + a2 * h2, dt);
  return second * (first * y);
}

OperatorMatrix one_step(Method m, const HamiltonianFn& h, const OperatorMatrix& y, double t, double dt) {
  switch (m) {
    case Method::rk4:
      return rk4_step(h, y, t, dt);
    case Method::magnus2:
      return magnus2_step(h, y, t, dt);
    case Method::cf4:
    case Method::adaptive:
      return cf4_step(h, y, t, dt);
  }
  throw InvalidArgument("unknown propagation method");
}

struct Evolved {
  OperatorMatrix y;
  double error = 0.0;
  long steps = 0;
};

long step_count(double span, double step) {
  const double n = std::ceil(span / step - 1e-9);
  return std::max(1L, static_cast<long>(n));
}

Evolved evolve_fixed(const HamiltonianFn& h, const OperatorMatrix& y0, const PropagationSpec& spec) {
  const double span = spec.t1 - spec.t0;
  const double step = spec.step.value_or(default_step(h, spec.t0, spec.t1));
  const long n = step_count(span, step);
  const long total = spec.estimate_error ? 3 * n : n;
  if (total > spec.max_steps) {
    throw NumericalError("propagate: " + std::to_string(total) + " steps needed, max_steps is " +
                         std::to_string(spec.max_steps));
  }
  if (!spec.estimate_error) return {fixed_step_evolve(h, y0, spec.t0, spec.t1, n, spec.method), 0.0, n};

  const OperatorMatrix coarse = fixed_step_evolve(h, y0, spec.t0, spec.t1, n, spec.method);
  const OperatorMatrix fine = fixed_step_evolve(h, y0, spec.t0, spec.t1, 2 * n, spec.method);
  const double err = max_abs_entry(fine - coarse);
  const double tol = spec.atol + spec.rtol * max_abs_entry(y0);
  if (err > tol) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "propagate: step-halving error %.3g exceeds tolerance %.3g (step %.3g)", err,
                  tol, span / static_cast<double>(n));
    throw NumericalError(buf);
  }
  return {fine, err, 2 * n};
}

Evolved evolve_adaptive(const HamiltonianFn& h, const OperatorMatrix& y0, const PropagationSpec& spec) {
  const double span = spec.t1 - spec.t0;
  double dt = std::min(span, spec.step.value_or(default_step(h, spec.t0, spec.t1)));
  const double min_step = 1e-14 * std::max(1.0, span);
  const double scale = spec.atol + spec.rtol * max_abs_entry(y0);
  OperatorMatrix y = y0;
  double t = spec.t0;
  Evolved out;
  long attempts = 0;
  while (spec.t1 - t > 1e-14 * std::max(1.0, std::abs(spec.t1))) {
    if (++attempts > spec.max_steps) throw NumericalError("propagate: max_steps exceeded (adaptive)");
    const double hh = std::min(dt, spec.t1 - t);
    const OperatorMatrix full = cf4_step(h, y, t, hh);
    const OperatorMatrix half = cf4_step(h, cf4_step(h, y, t, 0.5 * hh), t + 0.5 * hh, 0.5 * hh);
    const double err = max_abs_entry(full - half);
    // Never ask for less than the roundoff floor of a single step.
    const double local_tol = std::max(scale * hh / span, 64.0 * std::numeric_limits<double>::epsilon() * max_abs_entry(y));
    if (err <= local_tol) {
      y = half;
      t += hh;
      out.error += err;
      out.steps += 2;
      if (err < local_tol / 32.0) dt = 2.0 * hh;
    } else {
      dt = 0.5 * hh;
      if (dt < min_step) throw NumericalError("propagate: adaptive step underflow at t = " + std::to_string(t));
    }
  }
  out.y = std::move(y);
  return out;
}

Evolved evolve(const HamiltonianFn& h, const OperatorMatrix& y0, const PropagationSpec& spec) {
  spec.validate();
  return spec.method == Method::adaptive ? evolve_adaptive(h, y0, spec) : evolve_fixed(h, y0, spec);
}

// Five-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 5> kGLx = {-0.906179845938663992797626878299, -0.538469310105683091036314420700, 0.0,
                                        0.538469310105683091036314420700, 0.906179845938663992797626878299};
constexpr std::array<double, 5> kGLw = {0.236926885056189087514264040720, 0.478628670499366468041291514836,
                                        0.568888888888888888888888888889, 0.478628670499366468041291514836,
                                        0.236926885056189087514264040720};

}  // namespace

void PropagationSpec::validate() const {
  if (!(t0 < t1)) throw InvalidArgument("PropagationSpec: need t0 < t1");
  if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidArgument("PropagationSpec: tolerances must be positive");
  if (max_steps <= 0) throw InvalidArgument("PropagationSpec: max_steps must be positive");
  if (step && !(*step > 0.0)) throw InvalidArgument("PropagationSpec: step must be positive");
}

OperatorMatrix expi_hermitian(const OperatorMatrix& h, double scale) {
  if (h.rows() != h.cols()) throw DimensionError("expi_hermitian: matrix must be square");
  if (h.rows() == 1) return OperatorMatrix::Constant(1, 1, std::exp(kI * (scale * h(0, 0).real())));
  if (h.rows() == 2) {
    // h = c0 + c . sigma, exp(i s h) = e^{i s c0} (cos(s|c|) + i sin(s|c|) c.sigma/|c|).
    const double c0 = 0.5 * (h(0, 0).real() + h(1, 1).real());
    const double cz = 0.5 * (h(0, 0).real() - h(1, 1).real());
    const cplx off = 0.5 * (h(0, 1) + std::conj(h(1, 0)));
    const double norm = std::sqrt(cz * cz + std::norm(off));
    const double angle = scale * norm;
    // sin(angle)/norm, with the removable singularity at norm = 0.
    const double sinc = norm > 0.0 ? std::sin(angle) / norm : scale;
    const cplx phase = std::exp(kI * (scale * c0));
    OperatorMatrix out(2, 2);
    out(0, 0) = phase * cplx(std::cos(angle), sinc * cz);
    out(1, 1) = phase * cplx(std::cos(angle), -sinc * cz);
    out(0, 1) = phase * kI * sinc * off;
    out(1, 0) = phase * kI * sinc * std::conj(off);
    return out;
  }
  OperatorMatrix off = h;
  off.diagonal().setZero();
  if (max_abs_entry(off) == 0.0) {
    const Eigen::VectorXcd phases = (kI * scale * h.diagonal().real().cast<cplx>()).array().exp();
    return phases.asDiagonal();
  }
  Eigen::SelfAdjointEigenSolver<OperatorMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw NumericalError("expi_hermitian: eigendecomposition failed");
  const Eigen::VectorXcd phases = (kI * scale * solver.eigenvalues().cast<cplx>()).array().exp();
  return solver.eigenvectors() * phases.asDiagonal() * solver.eigenvectors().adjoint();
}

double default_step(const HamiltonianFn& h, double t0, double t1) {
  double coupling = 0.0;
  for (double t : {t0, 0.5 * (t0 + t1), t1}) {
    OperatorMatrix m = h(t);
    m.diagonal().setZero();
    coupling = std::max(coupling, max_abs_entry(m));
  }
  return coupling > 0.0 ? std::min(0.01, 0.1 / coupling) : 0.01;
}

OperatorMatrix fixed_step_evolve(const HamiltonianFn& h, const OperatorMatrix& y, double t0, double t1, long n,
                                 Method method) {
  if (n <= 0) throw InvalidArgument("fixed_step_evolve: need a positive step count");
  if (method == Method::adaptive) throw InvalidArgument("fixed_step_evolve: adaptive is not a fixed-step method");
  const double dt = (t1 - t0) / static_cast<double>(n);
  OperatorMatrix cur = y;
  for (long k = 0; k < n; ++k) cur = one_step(method, h, cur, t0 + static_cast<double>(k) * dt, dt);
  return cur;
}

WaveState propagate(const HamiltonianFn& h, const StateVector& psi0, const PropagationSpec& spec) {
  const Evolved e = evolve(h, psi0, spec);
  return {spec.t1, StateVector(e.y.col(0)), e.error, e.steps};
}

UnitaryResult propagate_unitary(const HamiltonianFn& h, Eigen::Index dim, const PropagationSpec& spec) {
  const Evolved e = evolve(h, OperatorMatrix::Identity(dim, dim), spec);
  return {e.y, e.error, e.steps};
}

double unitarity_defect(const OperatorMatrix& u) {
  return max_abs_entry(u.adjoint() * u - OperatorMatrix::Identity(u.cols(), u.cols()));
}

Eigen::VectorXd diagonal_phase(const LinearSweep& h, double t) {
  return h.constant.diagonal().real() * t + h.slope.diagonal().real() * (0.5 * t * t);
}

Eigen::VectorXd diagonal_phase(const HamiltonianFn& h, double t) {
  const Eigen::Index dim = h(0.0).rows();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  if (t == 0.0) return theta;
  const long panels = std::max(1L, static_cast<long>(std::ceil(std::abs(t))));
  const double width = t / static_cast<double>(panels);
  for (long p = 0; p < panels; ++p) {
    const double mid = (static_cast<double>(p) + 0.5) * width;
    for (std::size_t q = 0; q < kGLx.size(); ++q) {
      theta += (0.5 * width * kGLw[q]) * h(mid + 0.5 * width * kGLx[q]).diagonal().real();
    }
  }
  return theta;
}

namespace {

OperatorMatrix rotate(const OperatorMatrix& m, const Eigen::VectorXd& theta) {
  OperatorMatrix out = m;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    out(j, j) = 0.0;
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (j != k) out(j, k) = std::exp(kI * (theta(k) - theta(j))) * m(j, k);
    }
  }
  return out;
}

}  // namespace

HamiltonianFn interaction_picture(const LinearSweep& h) {
  return [h](double t) { return rotate(h.at(t), diagonal_phase(h, t)); };
}

HamiltonianFn interaction_picture(const HamiltonianFn& h) {
  return [h](double t) { return rotate(h(t), diagonal_phase(h, t)); };
}

TransitionResult transition_matrix(const LinearSweep& h, double T, const PropagationSpec& spec) {
  if (!(T > 0.0)) throw InvalidArgument("transition_matrix: T must be positive");
  const Eigen::Index dim = h.dim();
  const HamiltonianFn fn = as_function(h);

  // Jobs: (horizon index, column). Each propagates one diabatic basis state.
  const std::array<double, 2> horizons{T, 2.0 * T};
  std::vector<StateVector> columns(static_cast<std::size_t>(2 * dim));
  std::vector<double> errors(columns.size(), 0.0);
  parallel_for(columns.size(), [&](std::size_t job) {
    const std::size_t which = job / static_cast<std::size_t>(dim);
    const Eigen::Index col = static_cast<Eigen::Index>(job % static_cast<std::size_t>(dim));
    PropagationSpec s = spec;
    s.t0 = -horizons[which];
    s.t1 = horizons[which];
    const WaveState w = propagate(fn, StateVector::Unit(dim, col), s);
    columns[job] = w.psi;
    errors[job] = w.error_estimate;
  });

  // Lab-frame U to interaction picture: U~ = W(T)^dagger U W(-T), W = diag(e^{i Theta}).
  auto assemble = [&](std::size_t which) {
    const double horizon = horizons[which];
    const Eigen::VectorXd after = diagonal_phase(h, horizon);
    const Eigen::VectorXd before = diagonal_phase(h, -horizon);
    OperatorMatrix u(dim, dim);
    for (Eigen::Index c = 0; c < dim; ++c) u.col(c) = columns[which * static_cast<std::size_t>(dim) + c];
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (Eigen::Index k = 0; k < dim; ++k) u(j, k) *= std::exp(kI * (before(k) - after(j)));
    }
    return u;
  };
  const OperatorMatrix u_half = assemble(0);
  const OperatorMatrix u_full = assemble(1);

  TransitionResult r;
  r.T_used = 2.0 * T;
  r.amplitudes = u_full;
  r.matrix = u_full.cwiseAbs2();
  r.matrix_half = u_half.cwiseAbs2();
  r.extrapolated = 2.0 * r.matrix - r.matrix_half;
  r.extrapolation_estimate = (r.matrix - r.matrix_half).cwiseAbs().maxCoeff();
  r.unitarity_defect = std::max(unitarity_defect(u_full), unitarity_defect(u_half));
  r.error_estimate = *std::max_element(errors.begin(), errors.end());
  return r;
}

}  // namespace lzi
