#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lzi/linear_sweep.hpp"
#include "lzi/spin_algebra.hpp"

namespace lzi {

/// Exact-solvability coordinates of the Demkov-Osherov model: couplings
/// gamma_0..gamma_n and pole positions epsilon_0..epsilon_n.
///
/// gamma_0 must be nonzero. A vanishing gamma_k (k >= 1) decouples level k;
/// it is accepted and reported through decoupled_levels().
struct DOParams {
  std::vector<double> gamma;
  std::vector<double> epsilon;

  std::size_t n() const noexcept { return gamma.empty() ? 0 : gamma.size() - 1; }
  void validate() const;
  std::vector<std::size_t> decoupled_levels() const;
};

/// Matrix entries of H_DO: a00, flat levels a_{0i} and couplings v_{0i}, i = 1..n.
struct DOHamiltonianEntries {
  double a00 = 0.0;
  std::vector<double> a0;
  std::vector<double> v0;

  std::size_t n() const noexcept { return a0.size(); }
  /// a00 - sum_i v_{0i}^2 / a_{0i}; zero for entries produced from DOParams.
  double consistency_defect() const;
};

/// (t + a00)|0><0| + sum a_{0i}|i><i| + sum v_{0i}(|0><i| + |i><0|).
OperatorMatrix build_do_hamiltonian(const DOHamiltonianEntries& entries, double t);

/// H_DO(t) as A + B t with B = |0><0|.
LinearSweep do_sweep(const DOHamiltonianEntries& entries);

DOHamiltonianEntries entries_from_gamma(const DOParams& p);

struct Interval {
  double lo;
  double hi;
};

struct GaugeFixedParams {
  DOParams params;  ///< epsilon_0 = 0 and gamma_0 = 1
  double shift;     ///< constant a added to every diagonal entry
};

/// Real roots of (a00 + a) prod_i (a_{0i} + a) - sum_i v_{0i}^2 prod_{j != i} (a_{0j} + a),
/// ascending.
std::vector<double> shift_polynomial_roots(const DOHamiltonianEntries& entries);

/// Shifts all diagonal entries by the smallest-|a| real root inside
/// `shift_search` and maps the shifted entries to (gamma, epsilon).
GaugeFixedParams gamma_from_entries(const DOHamiltonianEntries& entries,
                                    Interval shift_search = {-1e6, 1e6});

/// Adds `shift` to a00 and to every a_{0i}.
DOHamiltonianEntries shifted(const DOHamiltonianEntries& entries, double shift);

/// The n + 1 solutions x of t = sum_k gamma_k^2 / (x - epsilon_k), ascending.
/// At t = 0 the exterior root sits at +infinity. Decoupled levels contribute
/// x = epsilon_k.
std::vector<double> spectral_roots(const DOParams& p, double t);

/// One root per gap between consecutive coupled poles plus one exterior root
/// on the side given by sign(t).
bool interlacing_holds(const DOParams& p, double t, std::span<const double> roots);

/// E = gamma_0^2 / (x - epsilon_0); zero for the root at infinity.
double energy_of_root(const DOParams& p, double x);

struct DOEigenpair {
  double root;
  double energy;
  Eigen::VectorXd vector;  ///< unnormalised, v_k = gamma_k / (x - epsilon_k)
};

DOEigenpair eigenpair_at_root(const DOParams& p, double x);
DOEigenpair eigenpair(const DOParams& p, double t, std::size_t branch);

/// Bow-tie reparameterisation a_{0i} = (r_i + 1) t at a fixed time.
DOHamiltonianEntries bow_tie_entries(std::span<const double> r, const DOHamiltonianEntries& base,
                                     double t);

/// Bow-tie Hamiltonian as a linear sweep: slopes 1 and r_i + 1 on the diagonal.
LinearSweep bow_tie_sweep(std::span<const double> r, const DOHamiltonianEntries& base);

/// Root branches x_m(t) labelled continuously along a monotone time grid.
struct SpectralFlow {
  std::vector<double> t;
  std::vector<std::vector<double>> roots;     ///< roots[k][m] = x_m(t_k)
  std::vector<std::vector<double>> energies;  ///< energies[k][m] = E_m(t_k)
  std::vector<std::size_t> decoupled;

  std::size_t branches() const noexcept { return roots.empty() ? 0 : roots.front().size(); }
};

SpectralFlow track_spectral_flow(const DOParams& p, std::span<const double> t_grid);

}  // namespace lzi
