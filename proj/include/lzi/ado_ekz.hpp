#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "lzi/linear_sweep.hpp"
#include "lzi/spin_algebra.hpp"

namespace lzi {

/// Alternated Demkov-Osherov model in the parallel (rank-one) parameterisation
/// v_ij = gamma_i gamma_j. Levels 0 and 1 carry unit slope; levels k = 2..n are
/// flat at a_k and couple only to levels 0 and 1.
struct ADOParams {
  std::vector<double> gamma;  ///< gamma_0..gamma_n
  std::vector<double> a;      ///< a_2..a_n, stored at a[k - 2]

  std::size_t n() const noexcept { return gamma.empty() ? 0 : gamma.size() - 1; }
  double a_of(std::size_t k) const { return a.at(k - 2); }
  void validate() const;
};

/// gamma gamma^T, the coupling matrix of the parallel case.
Eigen::MatrixXd parallel_couplings(const ADOParams& p);

/// H_ADO(t) with couplings v (symmetric, (n+1)x(n+1)). Only v_00, v_11, v_01 and
/// the rows 0, 1 enter; entries among flat levels are ignored.
OperatorMatrix build_ado_hamiltonian(const ADOParams& p, double t, const Eigen::MatrixXd& v);
OperatorMatrix build_ado_hamiltonian(const ADOParams& p, double t);
/// Parallel couplings with the two sloped diagonal offsets overridden.
OperatorMatrix build_ado_hamiltonian(const ADOParams& p, double t, double v00, double v11);

LinearSweep ado_sweep(const ADOParams& p, const Eigen::MatrixXd& v);
LinearSweep ado_sweep(const ADOParams& p);

/// Components (b^0, b^1, b^2, b^3) of a u(2) four-vector.
using FourVector = std::array<double, 4>;
using ThreeVector = std::array<double, 3>;

/// Classical four-vectors of the Fourier-reduced 2x2 problem.
struct BVectorSet {
  FourVector b1{};
  std::vector<FourVector> bk;  ///< bk[k - 2] for k = 2..n
  double beta1 = 0.0;          ///< |spatial part of b1|
  std::vector<double> betak;   ///< |spatial part of b_k|
  ThreeVector unit_n{0.0, 0.0, 1.0};
  /// Largest component of b_k(spatial) orthogonal to n, including b1; zero
  /// when all spatial parts are collinear (the condition for [H_1, H_k] = 0).
  double parallel_defect = 0.0;
  /// max_k |beta_k - b_k^0|, including b1; zero in the gamma parameterisation.
  double beta_identity_defect = 0.0;

  const FourVector& classical(std::size_t k) const { return bk.at(k - 2); }
  double beta(std::size_t k) const { return betak.at(k - 2); }
  std::size_t n() const noexcept { return bk.size() + 1; }
};

BVectorSet b_vectors(const ADOParams& p);
BVectorSet b_vectors(const Eigen::MatrixXd& v);

/// Max-abs residual of the best rank-one fit gamma gamma^T to a symmetric v.
double parallelism_defect(const Eigen::MatrixXd& v);

/// b^mu S^mu with S = (1, sigma_x, sigma_y, sigma_z).
OperatorMatrix u2_contract(const FourVector& b);

enum class Contraction {
  euclidean,     ///< b_i^0 b_j^0 + b_i . b_j
  spatial_only,  ///< b_i . b_j
};

enum class ClassicalSum {
  symmetric,   ///< sum over all k' != k
  upper_only,  ///< sum over k' > k only
};

struct EKZOptions {
  Contraction contraction = Contraction::euclidean;
  ClassicalSum classical_sum = ClassicalSum::symmetric;
};

double contract(const FourVector& x, const FourVector& y, Contraction c);

/// H_1 = b_1^mu S^mu + sum_k b_k^mu S^mu / (omega - a_k).
OperatorMatrix ekz_hamiltonian_H1(const BVectorSet& b, double omega, std::span<const double> a);

struct ClassicalIntegral {
  double scalar = 0.0;    ///< classical-classical part
  OperatorMatrix quantum;  ///< b_k^mu S^mu / (a_k - omega)

  OperatorMatrix full() const { return scalar * OperatorMatrix::Identity(2, 2) + quantum; }
};

/// H_k = sum_{k'} b_k.b_k' / (a_k - a_k') + b_k^mu S^mu / (a_k - omega), k = 2..n.
ClassicalIntegral ekz_hamiltonian_Hk(const BVectorSet& b, std::size_t k, double omega,
                                     std::span<const double> a, EKZOptions opts = {});

/// Connection component for index i in {0, 2, ..., n}; index 0 is the omega
/// direction (H_1), index k >= 2 is H_k.
OperatorMatrix ekz_connection(const BVectorSet& b, std::size_t index, double omega,
                              std::span<const double> a, EKZOptions opts = {});

/// Closed-form derivative of ekz_connection(index) with respect to the
/// variable `wrt` (0 = omega, k = a_k).
OperatorMatrix ekz_connection_derivative(const BVectorSet& b, std::size_t index, std::size_t wrt,
                                         double omega, std::span<const double> a,
                                         EKZOptions opts = {});

/// max_abs(d_i H_j - d_j H_i + i [H_i, H_j]), the integrability condition of
/// d_i Phi = -i H_i Phi.
double zero_curvature_residual(const BVectorSet& b, double omega, std::span<const double> a,
                               std::size_t i, std::size_t j, EKZOptions opts = {});

/// Largest zero_curvature_residual over all index pairs in {0, 2, ..., n}.
double max_zero_curvature_residual(const BVectorSet& b, double omega, std::span<const double> a,
                                   EKZOptions opts = {});

/// Every matrix {H_1, H_2, ..., H_n} at one point.
std::vector<OperatorMatrix> ekz_integrals(const BVectorSet& b, double omega,
                                          std::span<const double> a, EKZOptions opts = {});

struct SpinorPair {
  Eigen::Vector2cd plus;
  Eigen::Vector2cd minus;
};

/// Eigenvectors of n . sigma for eigenvalues +1 and -1, first nonzero
/// component real and positive.
SpinorPair spinor_eigenbasis(const ThreeVector& unit_n);

/// Complex power z^{-i c} of a real base, principal branch with z -> z + i0:
/// arg z = 0 for z > 0 and pi for z < 0.
cplx imaginary_power(double z, double c);

/// Exact solution Phi^(m)(omega, a_2..a_n) of the frequency-domain problem,
/// including the e^{i omega^2 / 2} factor.
class EKZSolution {
public:
  EKZSolution(const ADOParams& p, int m);

  int m() const noexcept { return m_; }
  const Eigen::Vector2cd& xi() const noexcept { return xi_; }
  const BVectorSet& b() const noexcept { return b_; }
  const ADOParams& params() const noexcept { return params_; }

  /// Throws BranchPointError at omega = a_k or a_i = a_j.
  Eigen::Vector2cd evaluate(double omega, std::span<const double> a) const;
  Eigen::Vector2cd evaluate(double omega) const { return evaluate(omega, params_.a); }

  /// Same without the e^{i omega^2 / 2} factor: solves i dPhi/domega = H_1 Phi.
  Eigen::Vector2cd evaluate_rotated(double omega, std::span<const double> a) const;

private:
  ADOParams params_;
  BVectorSet b_;
  int m_;
  Eigen::Vector2cd xi_;
};

EKZSolution closed_form_solution(const ADOParams& p, int m);

struct EKZResidual {
  double r_omega = 0.0;  ///< relative residual of dPhi/domega = i(omega - H_1) Phi
  double r_a = 0.0;      ///< max over k of the residual of dPhi/da_k = -i H_k Phi
};

/// Central differences of step h against the frequency-domain system.
EKZResidual ekz_residual_check(const EKZSolution& sol, double omega, std::span<const double> a,
                               double h, EKZOptions opts = {});

struct QuadratureSpec {
  double tolerance = 1e-6;          ///< relative to |result|
  double initial_half_width = 16.0;
  int max_doublings = 8;
  double taper_fraction = 0.1;
};

struct TimeDomainValue {
  Eigen::Vector2cd amplitude;
  double error_estimate = 0.0;
  double half_width = 0.0;
  long evaluations = 0;
};

/// Psi(t) = integral dOmega Phi(omega) e^{-i omega t} over a tapered window
/// centred on the stationary point omega ~ t, widened until converged.
TimeDomainValue time_domain_wavefunction(const EKZSolution& sol, double t,
                                         const QuadratureSpec& spec = {});

/// |Psi(t_obs)|^2 / |Psi(-t_obs)|^2, the survival probability of the
/// initial spinor between -t_obs and t_obs.
double time_domain_survival(const EKZSolution& sol, double t_obs, const QuadratureSpec& spec = {});

/// exp(-2 pi (gamma_0^2 + gamma_1^2) gamma_2^2).
double lz_probability(double gamma0, double gamma1, double gamma2);

}  // namespace lzi
