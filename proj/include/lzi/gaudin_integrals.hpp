#pragma once

#include <cstddef>
#include <vector>

#include "lzi/spin_algebra.hpp"

namespace lzi {

/// Spectral data of the (extended) KZ system: one parameter w_l per site,
/// the Cartan coefficient lambda and the level shift k + 2.
struct SpectralConfig {
  std::vector<cplx> w;
  double lambda = 0.0;
  double level_shift = 3.0;  // k = 1

  /// Throws DegenerateSpectralError when two w_l are closer than
  /// 1e-9 * max|w|, InvalidArgument when level_shift == 0.
  void validate() const;
  bool is_real() const;
};

/// H_l^G = sum_{l' != l} S_l . S_l' / (w_l - w_l').
OperatorMatrix gaudin_integral(std::size_t site, const SpectralConfig& cfg, const SiteSystem& sys);

/// H_l^R = lambda S_l^z + H_l^G.
OperatorMatrix richardson_integral(std::size_t site, const SpectralConfig& cfg, const SiteSystem& sys);

/// H^G = 2 sum_l w_l H_l^G.
OperatorMatrix gaudin_hamiltonian(const SpectralConfig& cfg, const SiteSystem& sys);

/// Closed-form d H_l^R / d w_m. The lambda term carries no w dependence.
OperatorMatrix richardson_integral_derivative(std::size_t site, std::size_t wrt,
                                              const SpectralConfig& cfg, const SiteSystem& sys);

struct CommutativityReport {
  double max_defect = 0.0;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
  bool pass = true;
};

/// Largest pairwise max_abs([A_i, A_j]) over the set.
CommutativityReport verify_commuting(const std::vector<OperatorMatrix>& ops, double tol);

/// || d_l H_l' - d_l' H_l - [H_l, H_l'] / (k+2) || with analytic derivatives.
double kz_flatness_residual(const SpectralConfig& cfg, const SiteSystem& sys, std::size_t site,
                            std::size_t other);

}  // namespace lzi
