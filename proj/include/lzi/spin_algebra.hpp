#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace lzi {

using cplx = std::complex<double>;

/// Dense complex square matrix. Hamiltonians, integrals of motion and
/// propagators all share this representation.
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

/// Irreducible su(2) representation labelled by twice the spin, so that
/// half-integer spins stay exact.
class SpinRep {
public:
  /// Throws InvalidArgument for negative values or spins above 8.
  explicit SpinRep(int twice_spin);

  static SpinRep half() { return SpinRep(1); }

  int twice_spin() const noexcept { return twice_spin_; }
  double spin() const noexcept { return 0.5 * twice_spin_; }
  int dim() const noexcept { return twice_spin_ + 1; }

  friend bool operator==(SpinRep, SpinRep) = default;

private:
  int twice_spin_;
};

struct SpinGenerators {
  OperatorMatrix x;
  OperatorMatrix y;
  OperatorMatrix z;

  const OperatorMatrix& operator[](int a) const;
};

/// Standard spin matrices in the |s, m> basis ordered m = s, s-1, ..., -s.
SpinGenerators spin_generators(SpinRep rep);

/// u(2) basis (1, sigma_x, sigma_y, sigma_z). Pauli normalisation, not s = 1/2.
std::array<OperatorMatrix, 4> pauli_u2_basis();

/// Tensor-product space of N sites. Site 0 is the most significant factor
/// of the Kronecker product.
class SiteSystem {
public:
  explicit SiteSystem(std::vector<SpinRep> reps);

  static SiteSystem uniform(std::size_t sites, SpinRep rep = SpinRep::half());

  std::size_t sites() const noexcept { return reps_.size(); }
  int site_dim(std::size_t site) const { return reps_.at(site).dim(); }
  int total_dim() const noexcept { return total_dim_; }
  const std::vector<SpinRep>& reps() const noexcept { return reps_; }

private:
  std::vector<SpinRep> reps_;
  int total_dim_;
};

/// 1 (x) ... (x) op (x) ... (x) 1 with op on `site`.
OperatorMatrix embed(const OperatorMatrix& op, std::size_t site, const SiteSystem& sys);

/// S_l . S_l' = sum_a S_l^a S_l'^a on the full space.
OperatorMatrix dot_coupling(std::size_t site, std::size_t other, const SiteSystem& sys);

/// S^z summed over all sites.
OperatorMatrix total_spin_z(const SiteSystem& sys);

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b);

/// Largest absolute entry; the norm used for every tolerance in the library.
double max_abs(const OperatorMatrix& m);

/// max_abs(M - M^dagger).
double hermiticity_defect(const OperatorMatrix& m);

}  // namespace lzi
