#include "lzi/spin_algebra.hpp"

#include <cmath>
#include <string>

#include "lzi/errors.hpp"

namespace lzi {

SpinRep::SpinRep(int twice_spin) : twice_spin_(twice_spin) {
  if (twice_spin < 0 || twice_spin > 16) {
    throw InvalidArgument("SpinRep: 2s must lie in [0, 16], got " + std::to_string(twice_spin));
  }
}

const OperatorMatrix& SpinGenerators::operator[](int a) const {
  switch (a) {
    case 0: return x;
    case 1: return y;
    case 2: return z;
    default: throw InvalidArgument("SpinGenerators: component index must be 0, 1 or 2");
  }
}

SpinGenerators spin_generators(SpinRep rep) {
  const int d = rep.dim();
  const double s = rep.spin();
  OperatorMatrix plus = OperatorMatrix::Zero(d, d);
  OperatorMatrix z = OperatorMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = s - i;
    z(i, i) = m;
    // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and |m+1> sits at row i-1.
    if (i > 0) plus(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  const OperatorMatrix minus = plus.adjoint();
  SpinGenerators g;
  g.x = 0.5 * (plus + minus);
  g.y = cplx(0.0, -0.5) * (plus - minus);
  g.z = std::move(z);
  return g;
}

std::array<OperatorMatrix, 4> pauli_u2_basis() {
  std::array<OperatorMatrix, 4> s;
  s[0] = OperatorMatrix::Identity(2, 2);
  s[1] = OperatorMatrix::Zero(2, 2);
  s[1](0, 1) = 1.0;
  s[1](1, 0) = 1.0;
  s[2] = OperatorMatrix::Zero(2, 2);
  s[2](0, 1) = cplx(0.0, -1.0);
  s[2](1, 0) = cplx(0.0, 1.0);
  s[3] = OperatorMatrix::Zero(2, 2);
  s[3](0, 0) = 1.0;
  s[3](1, 1) = -1.0;
  return s;
}

SiteSystem::SiteSystem(std::vector<SpinRep> reps) : reps_(std::move(reps)), total_dim_(1) {
  if (reps_.empty()) throw InvalidArgument("SiteSystem: at least one site required");
  for (const auto& r : reps_) total_dim_ *= r.dim();
}

SiteSystem SiteSystem::uniform(std::size_t sites, SpinRep rep) {
  return SiteSystem(std::vector<SpinRep>(sites, rep));
}

namespace {

OperatorMatrix kron(const OperatorMatrix& a, const OperatorMatrix& b) {
  OperatorMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace

OperatorMatrix embed(const OperatorMatrix& op, std::size_t site, const SiteSystem& sys) {
  if (site >= sys.sites()) {
    throw DimensionError("embed: site " + std::to_string(site) + " out of range");
  }
  if (op.rows() != sys.site_dim(site) || op.cols() != sys.site_dim(site)) {
    throw DimensionError("embed: operator dimension " + std::to_string(op.rows()) +
                         " does not match site dimension " + std::to_string(sys.site_dim(site)));
  }
  OperatorMatrix out = OperatorMatrix::Identity(1, 1);
  for (std::size_t l = 0; l < sys.sites(); ++l) {
    if (l == site) {
      out = kron(out, op);
    } else {
      const int d = sys.site_dim(l);
      out = kron(out, OperatorMatrix::Identity(d, d));
    }
  }
  return out;
}

OperatorMatrix dot_coupling(std::size_t site, std::size_t other, const SiteSystem& sys) {
  if (site == other) throw SameSiteError("dot_coupling: sites must differ");
  const auto gl = spin_generators(sys.reps().at(site));
  const auto gm = spin_generators(sys.reps().at(other));
  OperatorMatrix out = OperatorMatrix::Zero(sys.total_dim(), sys.total_dim());
  for (int a = 0; a < 3; ++a) out += embed(gl[a], site, sys) * embed(gm[a], other, sys);
  return out;
}

OperatorMatrix total_spin_z(const SiteSystem& sys) {
  OperatorMatrix out = OperatorMatrix::Zero(sys.total_dim(), sys.total_dim());
  for (std::size_t l = 0; l < sys.sites(); ++l) {
    out += embed(spin_generators(sys.reps()[l]).z, l, sys);
  }
  return out;
}

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionError("commutator: operands must be square with equal dimensions");
  }
  return a * b - b * a;
}

double max_abs(const OperatorMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_defect(const OperatorMatrix& m) {
  return max_abs(m - m.adjoint());
}

}  // namespace lzi
