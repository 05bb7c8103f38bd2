#pragma once

#include <optional>

#include "lzi/linear_sweep.hpp"
#include "lzi/spin_algebra.hpp"

namespace lzi {

/// Time-stepping schemes for -i dpsi/dt = H(t) psi.
enum class Method {
  rk4,      ///< classical Runge-Kutta, fixed step
  magnus2,  ///< exponential midpoint rule, fixed step
  cf4,      ///< fourth-order commutator-free Magnus, fixed step
  adaptive, ///< cf4 with step-doubling error control
};

struct PropagationSpec {
  double t0 = 0.0;
  double t1 = 1.0;
  double rtol = 1e-8;
  double atol = 1e-12;
  Method method = Method::cf4;
  long max_steps = 100'000'000;
  /// Fixed step (or initial step for adaptive); default_step() when empty.
  std::optional<double> step;
  /// Fixed-step methods: rerun at half the step and report the difference.
  bool estimate_error = true;

  void validate() const;
};

struct WaveState {
  double t = 0.0;
  StateVector psi;
  double error_estimate = 0.0;  ///< max-abs difference to the refined solution
  long steps = 0;               ///< steps of the reported solution
};

struct UnitaryResult {
  OperatorMatrix u;
  double error_estimate = 0.0;
  long steps = 0;
};

/// exp(i h H) for Hermitian H (eigendecomposition; closed form for 2x2).
OperatorMatrix expi_hermitian(const OperatorMatrix& h, double scale);

/// min(0.01, 0.1 / c), c the largest off-diagonal coupling magnitude of H
/// sampled at both ends and the midpoint of [t0, t1].
double default_step(const HamiltonianFn& h, double t0, double t1);

/// n fixed steps of `method` (not adaptive) from t0 to t1 applied to the
/// columns of y. No error estimate; used directly for order studies.
OperatorMatrix fixed_step_evolve(const HamiltonianFn& h, const OperatorMatrix& y, double t0, double t1,
                                 long n, Method method);

/// psi(t1) for -i dpsi/dt = H psi with psi(t0) = psi0, so psi(t) = e^{iHt} psi0
/// for constant H. Throws NumericalError when max_steps is exceeded, the
/// adaptive step underflows, or the step-halving estimate exceeds the
/// tolerance atol + rtol |psi|.
WaveState propagate(const HamiltonianFn& h, const StateVector& psi0, const PropagationSpec& spec);

/// Evolution operator U(t1, t0) under the same contract as propagate.
UnitaryResult propagate_unitary(const HamiltonianFn& h, Eigen::Index dim, const PropagationSpec& spec);

/// ||U^dagger U - I||, max-abs entry.
double unitarity_defect(const OperatorMatrix& u);

/// Diagonal phases Theta_j(t) = integral_{0}^{t} H_jj(s) ds.
Eigen::VectorXd diagonal_phase(const LinearSweep& h, double t);
Eigen::VectorXd diagonal_phase(const HamiltonianFn& h, double t);

/// Interaction-picture generator H~_jk = e^{-i Theta_j} H_jk e^{i Theta_k},
/// zero diagonal. With psi = W phi, W = diag(e^{i Theta}), phi obeys
/// -i dphi/dt = H~ phi; populations are unchanged.
HamiltonianFn interaction_picture(const LinearSweep& h);
HamiltonianFn interaction_picture(const HamiltonianFn& h);

struct TransitionResult {
  /// |<j|U|i>|^2 between diabatic states, column i = initial state, at T_used.
  Eigen::MatrixXd matrix;
  /// Same at half the horizon (T_used / 2).
  Eigen::MatrixXd matrix_half;
  /// 2 P(T_used) - P(T_used / 2), the 1/T-extrapolated limit.
  Eigen::MatrixXd extrapolated;
  /// Interaction-picture amplitudes <j|U~|i> at T_used.
  OperatorMatrix amplitudes;
  double T_used = 0.0;
  /// max |P(T_used) - P(T_used / 2)|.
  double extrapolation_estimate = 0.0;
  double unitarity_defect = 0.0;
  double error_estimate = 0.0;
};

/// Transition probabilities for a sweep run from -T to T and from -2T to 2T;
/// one propagation per initial basis state, in parallel. spec.t0 / t1 are
/// ignored; method, tolerances and step are honoured.
TransitionResult transition_matrix(const LinearSweep& h, double T, const PropagationSpec& spec = {});

}  // namespace lzi
