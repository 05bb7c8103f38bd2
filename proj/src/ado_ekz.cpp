#include "lzi/ado_ekz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "lzi/errors.hpp"

namespace lzi {

namespace {

const cplx kI(0.0, 1.0);

double spatial_norm(const FourVector& b) {
  return std::sqrt(b[1] * b[1] + b[2] * b[2] + b[3] * b[3]);
}

double spatial_dot(const FourVector& b, const ThreeVector& n) {
  return b[1] * n[0] + b[2] * n[1] + b[3] * n[2];
}

void check_point(const BVectorSet& b, std::span<const double> a) {
  if (a.size() != b.bk.size()) {
    throw DimensionError("EKZ: expected " + std::to_string(b.bk.size()) + " classical parameters, got " +
                         std::to_string(a.size()));
  }
}

// 1/(x - y), refusing exact coincidence.
double inverse_gap(double x, double y, const char* what) {
  if (x == y) throw DegenerateSpectralError(std::string("EKZ: coincident ") + what);
  return 1.0 / (x - y);
}

bool in_classical_sum(std::size_t k, std::size_t other, ClassicalSum mode) {
  if (other == k) return false;
  return mode == ClassicalSum::symmetric || other > k;
}

}  // namespace

void ADOParams::validate() const {
  if (gamma.size() < 3) throw InvalidArgument("ADOParams: need gamma_0..gamma_n with n >= 2");
  if (a.size() != gamma.size() - 2) {
    throw DimensionError("ADOParams: need one a_k for each flat level k = 2..n");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (a[i] == a[j]) {
        throw DegenerateSpectralError("ADOParams: a_" + std::to_string(i + 2) + " and a_" +
                                      std::to_string(j + 2) + " coincide");
      }
    }
  }
}

Eigen::MatrixXd parallel_couplings(const ADOParams& p) {
  p.validate();
  const Eigen::Map<const Eigen::VectorXd> g(p.gamma.data(), static_cast<Eigen::Index>(p.gamma.size()));
  return g * g.transpose();
}

LinearSweep ado_sweep(const ADOParams& p, const Eigen::MatrixXd& v) {
  p.validate();
  const auto dim = static_cast<Eigen::Index>(p.gamma.size());
  if (v.rows() != dim || v.cols() != dim) throw DimensionError("ado_sweep: coupling matrix size mismatch");
  LinearSweep s{OperatorMatrix::Zero(dim, dim), OperatorMatrix::Zero(dim, dim)};
  s.slope(0, 0) = 1.0;
  s.slope(1, 1) = 1.0;
  s.constant(0, 0) = v(0, 0);
  s.constant(1, 1) = v(1, 1);
  s.constant(0, 1) = s.constant(1, 0) = v(0, 1);
  for (Eigen::Index k = 2; k < dim; ++k) {
    s.constant(k, k) = p.a[static_cast<std::size_t>(k - 2)];
    s.constant(0, k) = s.constant(k, 0) = v(0, k);
    s.constant(1, k) = s.constant(k, 1) = v(1, k);
  }
  return s;
}

LinearSweep ado_sweep(const ADOParams& p) { return ado_sweep(p, parallel_couplings(p)); }

OperatorMatrix build_ado_hamiltonian(const ADOParams& p, double t, const Eigen::MatrixXd& v) {
  return ado_sweep(p, v).at(t);
}

OperatorMatrix build_ado_hamiltonian(const ADOParams& p, double t) {
  return ado_sweep(p).at(t);
}

OperatorMatrix build_ado_hamiltonian(const ADOParams& p, double t, double v00, double v11) {
  Eigen::MatrixXd v = parallel_couplings(p);
  v(0, 0) = v00;
  v(1, 1) = v11;
  return ado_sweep(p, v).at(t);
}

BVectorSet b_vectors(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() < 3) {
    throw DimensionError("b_vectors: need a square coupling matrix of size >= 3");
  }
  BVectorSet out;
  out.b1 = {0.5 * (v(0, 0) + v(1, 1)), v(0, 1), 0.0, 0.5 * (v(0, 0) - v(1, 1))};
  out.beta1 = spatial_norm(out.b1);
  for (Eigen::Index k = 2; k < v.rows(); ++k) {
    const double x = v(0, k);
    const double y = v(1, k);
    out.bk.push_back({0.5 * (x * x + y * y), x * y, 0.0, 0.5 * (x * x - y * y)});
    out.betak.push_back(spatial_norm(out.bk.back()));
  }

  const FourVector* reference = out.beta1 > 0.0 ? &out.b1 : nullptr;
  for (std::size_t k = 0; reference == nullptr && k < out.bk.size(); ++k) {
    if (out.betak[k] > 0.0) reference = &out.bk[k];
  }
  if (reference != nullptr) {
    const double norm = spatial_norm(*reference);
    out.unit_n = {(*reference)[1] / norm, (*reference)[2] / norm, (*reference)[3] / norm};
  }

  auto collinearity = [&](const FourVector& b) {
    const double proj = spatial_dot(b, out.unit_n);
    const double dx = b[1] - proj * out.unit_n[0];
    const double dy = b[2] - proj * out.unit_n[1];
    const double dz = b[3] - proj * out.unit_n[2];
    return std::max({std::abs(dx), std::abs(dy), std::abs(dz)});
  };
  out.parallel_defect = collinearity(out.b1);
  out.beta_identity_defect = std::abs(out.beta1 - out.b1[0]);
  for (std::size_t k = 0; k < out.bk.size(); ++k) {
    out.parallel_defect = std::max(out.parallel_defect, collinearity(out.bk[k]));
    out.beta_identity_defect = std::max(out.beta_identity_defect, std::abs(out.betak[k] - out.bk[k][0]));
  }
  return out;
}

BVectorSet b_vectors(const ADOParams& p) { return b_vectors(parallel_couplings(p)); }

double parallelism_defect(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols()) throw DimensionError("parallelism_defect: matrix must be square");
  const Eigen::MatrixXd sym = 0.5 * (v + v.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  const Eigen::Index top = v.rows() - 1;
  const double lambda = solver.eigenvalues()(top);
  Eigen::MatrixXd fit = Eigen::MatrixXd::Zero(v.rows(), v.cols());
  if (lambda > 0.0) {
    const Eigen::VectorXd u = solver.eigenvectors().col(top);
    fit = lambda * u * u.transpose();
  }
  return (v - fit).cwiseAbs().maxCoeff();
}

OperatorMatrix u2_contract(const FourVector& b) {
  OperatorMatrix m(2, 2);
  m(0, 0) = b[0] + b[3];
  m(1, 1) = b[0] - b[3];
  m(0, 1) = cplx(b[1], -b[2]);
  m(1, 0) = cplx(b[1], b[2]);
  return m;
}

double contract(const FourVector& x, const FourVector& y, Contraction c) {
  const double spatial = x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
  return c == Contraction::euclidean ? x[0] * y[0] + spatial : spatial;
}

OperatorMatrix ekz_hamiltonian_H1(const BVectorSet& b, double omega, std::span<const double> a) {
  check_point(b, a);
  OperatorMatrix h = u2_contract(b.b1);
  for (std::size_t k = 0; k < a.size(); ++k) {
    h += u2_contract(b.bk[k]) * inverse_gap(omega, a[k], "omega and a_k");
  }
  return h;
}

ClassicalIntegral ekz_hamiltonian_Hk(const BVectorSet& b, std::size_t k, double omega,
                                     std::span<const double> a, EKZOptions opts) {
  check_point(b, a);
  if (k < 2 || k - 2 >= a.size()) throw InvalidArgument("ekz_hamiltonian_Hk: k must lie in 2..n");
  const std::size_t ik = k - 2;
  ClassicalIntegral out;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (!in_classical_sum(ik, j, opts.classical_sum)) continue;
    out.scalar += contract(b.bk[ik], b.bk[j], opts.contraction) * inverse_gap(a[ik], a[j], "a_k");
  }
  out.quantum = u2_contract(b.bk[ik]) * inverse_gap(a[ik], omega, "omega and a_k");
  return out;
}

OperatorMatrix ekz_connection(const BVectorSet& b, std::size_t index, double omega,
                              std::span<const double> a, EKZOptions opts) {
  if (index == 0) return ekz_hamiltonian_H1(b, omega, a);
  if (index == 1) throw InvalidArgument("ekz_connection: index 1 is not a connection direction");
  return ekz_hamiltonian_Hk(b, index, omega, a, opts).full();
}

OperatorMatrix ekz_connection_derivative(const BVectorSet& b, std::size_t index, std::size_t wrt,
                                         double omega, std::span<const double> a,
                                         EKZOptions opts) {
  check_point(b, a);
  const std::size_t n = a.size() + 1;
  if (index == 1 || wrt == 1 || index > n || wrt > n) {
    throw InvalidArgument("ekz_connection_derivative: indices must lie in {0, 2, ..., n}");
  }
  const OperatorMatrix id = OperatorMatrix::Identity(2, 2);
  OperatorMatrix d = OperatorMatrix::Zero(2, 2);

  if (index == 0) {
    if (wrt == 0) {
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double g = inverse_gap(omega, a[k], "omega and a_k");
        d -= u2_contract(b.bk[k]) * (g * g);
      }
    } else {
      const double g = inverse_gap(omega, a[wrt - 2], "omega and a_k");
      d += u2_contract(b.bk[wrt - 2]) * (g * g);
    }
    return d;
  }

  const std::size_t ik = index - 2;
  const double gw = inverse_gap(a[ik], omega, "omega and a_k");
  if (wrt == 0) {
    d += u2_contract(b.bk[ik]) * (gw * gw);
  } else if (wrt == index) {
    d -= u2_contract(b.bk[ik]) * (gw * gw);
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (!in_classical_sum(ik, j, opts.classical_sum)) continue;
      const double g = inverse_gap(a[ik], a[j], "a_k");
      d -= contract(b.bk[ik], b.bk[j], opts.contraction) * (g * g) * id;
    }
  } else {
    const std::size_t j = wrt - 2;
    if (in_classical_sum(ik, j, opts.classical_sum)) {
      const double g = inverse_gap(a[ik], a[j], "a_k");
      d += contract(b.bk[ik], b.bk[j], opts.contraction) * (g * g) * id;
    }
  }
  return d;
}

double zero_curvature_residual(const BVectorSet& b, double omega, std::span<const double> a,
                               std::size_t i, std::size_t j, EKZOptions opts) {
  if (i == j) throw InvalidArgument("zero_curvature_residual: indices must differ");
  const OperatorMatrix hi = ekz_connection(b, i, omega, a, opts);
  const OperatorMatrix hj = ekz_connection(b, j, omega, a, opts);
  const OperatorMatrix r = ekz_connection_derivative(b, j, i, omega, a, opts) -
                           ekz_connection_derivative(b, i, j, omega, a, opts) +
                           kI * commutator(hi, hj);
  return max_abs(r);
}

double max_zero_curvature_residual(const BVectorSet& b, double omega, std::span<const double> a,
                                   EKZOptions opts) {
  std::vector<std::size_t> idx{0};
  for (std::size_t k = 2; k <= a.size() + 1; ++k) idx.push_back(k);
  double worst = 0.0;
  for (std::size_t x = 0; x < idx.size(); ++x) {
    for (std::size_t y = x + 1; y < idx.size(); ++y) {
      worst = std::max(worst, zero_curvature_residual(b, omega, a, idx[x], idx[y], opts));
    }
  }
  return worst;
}

std::vector<OperatorMatrix> ekz_integrals(const BVectorSet& b, double omega,
                                          std::span<const double> a, EKZOptions opts) {
  std::vector<OperatorMatrix> out{ekz_hamiltonian_H1(b, omega, a)};
  for (std::size_t k = 2; k <= a.size() + 1; ++k) out.push_back(ekz_hamiltonian_Hk(b, k, omega, a, opts).full());
  return out;
}

SpinorPair spinor_eigenbasis(const ThreeVector& n) {
  const double norm = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
  if (std::abs(norm - 1.0) > 1e-12) throw InvalidArgument("spinor_eigenbasis: n must be a unit vector");
  const cplx up(n[0], n[1]);    // n1 + i n2
  const cplx down(n[0], -n[1]); // n1 - i n2

  Eigen::Vector2cd plus;
  Eigen::Vector2cd minus;
  if (n[2] >= 0.0) {
    plus << 1.0 + n[2], up;
    minus << down, -(1.0 + n[2]);
  } else {
    plus << down, 1.0 - n[2];
    minus << 1.0 - n[2], -up;
  }
  auto fix_phase = [](Eigen::Vector2cd v) {
    v.normalize();
    const int lead = std::abs(v(0)) > 1e-14 ? 0 : 1;
    return Eigen::Vector2cd(v * std::conj(v(lead)) / std::abs(v(lead)));
  };
  return {fix_phase(plus), fix_phase(minus)};
}

cplx imaginary_power(double z, double c) {
  if (z == 0.0) throw BranchPointError("imaginary_power: base at the branch point");
  const double arg = z > 0.0 ? 0.0 : std::numbers::pi;
  return std::exp(c * arg) * std::exp(cplx(0.0, -c * std::log(std::abs(z))));
}

EKZSolution::EKZSolution(const ADOParams& p, int m) : params_(p), b_(b_vectors(p)), m_(m) {
  if (m != 1 && m != -1) throw InvalidArgument("closed_form_solution: m must be +1 or -1");
  const auto basis = spinor_eigenbasis(b_.unit_n);
  xi_ = m > 0 ? basis.plus : basis.minus;
}

Eigen::Vector2cd EKZSolution::evaluate_rotated(double omega, std::span<const double> a) const {
  if (a.size() != b_.bk.size()) throw DimensionError("EKZSolution: wrong number of a_k");
  // Signed projections on n; equal to the norms beta_k in the parallel case.
  auto proj = [&](const FourVector& b) { return spatial_dot(b, b_.unit_n); };
  const double mm = static_cast<double>(m_);
  cplx scalar = std::exp(cplx(0.0, -omega * (b_.b1[0] + proj(b_.b1) * mm)));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double exponent = b_.bk[i][0] * b_.bk[j][0] + proj(b_.bk[i]) * proj(b_.bk[j]);
      if (a[i] == a[j]) throw BranchPointError("EKZSolution: coincident a_k");
      scalar *= imaginary_power(a[i] - a[j], exponent);
    }
    if (omega == a[i]) throw BranchPointError("EKZSolution: omega at a branch point a_k");
    scalar *= imaginary_power(omega - a[i], b_.bk[i][0] + proj(b_.bk[i]) * mm);
  }
  return scalar * xi_;
}

Eigen::Vector2cd EKZSolution::evaluate(double omega, std::span<const double> a) const {
  return std::exp(cplx(0.0, 0.5 * omega * omega)) * evaluate_rotated(omega, a);
}

EKZSolution closed_form_solution(const ADOParams& p, int m) { return EKZSolution(p, m); }

EKZResidual ekz_residual_check(const EKZSolution& sol, double omega, std::span<const double> a,
                               double h, EKZOptions opts) {
  if (!(h > 0.0)) throw InvalidArgument("ekz_residual_check: step must be positive");
  const double guard = 10.0 * h;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(omega - a[i]) <= guard) throw BranchPointError("ekz_residual_check: omega too close to a_k");
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (std::abs(a[i] - a[j]) <= guard) throw BranchPointError("ekz_residual_check: a_i too close to a_j");
    }
  }
  const BVectorSet& b = sol.b();
  const Eigen::Vector2cd phi = sol.evaluate(omega, a);
  const double scale = phi.cwiseAbs().maxCoeff();

  EKZResidual r;
  {
    const Eigen::Vector2cd fd = (sol.evaluate(omega + h, a) - sol.evaluate(omega - h, a)) / (2.0 * h);
    const OperatorMatrix gen = kI * (omega * OperatorMatrix::Identity(2, 2) - ekz_hamiltonian_H1(b, omega, a));
    r.r_omega = (fd - gen * phi).cwiseAbs().maxCoeff() / scale;
  }
  std::vector<double> shifted(a.begin(), a.end());
  for (std::size_t i = 0; i < a.size(); ++i) {
    shifted[i] = a[i] + h;
    const Eigen::Vector2cd fp = sol.evaluate(omega, shifted);
    shifted[i] = a[i] - h;
    const Eigen::Vector2cd fm = sol.evaluate(omega, shifted);
    shifted[i] = a[i];
    const Eigen::Vector2cd fd = (fp - fm) / (2.0 * h);
    const OperatorMatrix gen = -kI * ekz_hamiltonian_Hk(b, i + 2, omega, a, opts).full();
    r.r_a = std::max(r.r_a, (fd - gen * phi).cwiseAbs().maxCoeff() / scale);
  }
  return r;
}

double lz_probability(double gamma0, double gamma1, double gamma2) {
  return std::exp(-2.0 * std::numbers::pi * (gamma0 * gamma0 + gamma1 * gamma1) * gamma2 * gamma2);
}

}  // namespace lzi
