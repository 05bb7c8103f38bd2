#include "lzi/gaudin_integrals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lzi/errors.hpp"

namespace lzi {

void SpectralConfig::validate() const {
  if (level_shift == 0.0) throw InvalidArgument("SpectralConfig: level_shift (k + 2) must be nonzero");
  double scale = 0.0;
  for (const auto& x : w) scale = std::max(scale, std::abs(x));
  const double min_gap = 1e-9 * scale;
  for (std::size_t i = 0; i < w.size(); ++i) {
    for (std::size_t j = i + 1; j < w.size(); ++j) {
      if (std::abs(w[i] - w[j]) <= min_gap) {
        throw DegenerateSpectralError("SpectralConfig: w[" + std::to_string(i) + "] and w[" +
                                      std::to_string(j) + "] coincide");
      }
    }
  }
}

bool SpectralConfig::is_real() const {
  return std::all_of(w.begin(), w.end(), [](cplx x) { return x.imag() == 0.0; });
}

namespace {

void check_sizes(const SpectralConfig& cfg, const SiteSystem& sys, std::size_t site) {
  if (cfg.w.size() != sys.sites()) {
    throw DimensionError("SpectralConfig: " + std::to_string(cfg.w.size()) +
                         " spectral parameters for " + std::to_string(sys.sites()) + " sites");
  }
  if (site >= sys.sites()) throw DimensionError("site index out of range");
  cfg.validate();
}

}  // namespace

OperatorMatrix gaudin_integral(std::size_t site, const SpectralConfig& cfg, const SiteSystem& sys) {
  check_sizes(cfg, sys, site);
  OperatorMatrix h = OperatorMatrix::Zero(sys.total_dim(), sys.total_dim());
  for (std::size_t other = 0; other < sys.sites(); ++other) {
    if (other == site) continue;
    h += dot_coupling(site, other, sys) / (cfg.w[site] - cfg.w[other]);
  }
  return h;
}

OperatorMatrix richardson_integral(std::size_t site, const SpectralConfig& cfg, const SiteSystem& sys) {
  OperatorMatrix h = gaudin_integral(site, cfg, sys);
  if (cfg.lambda != 0.0) {
    h += cfg.lambda * embed(spin_generators(sys.reps()[site]).z, site, sys);
  }
  return h;
}

OperatorMatrix gaudin_hamiltonian(const SpectralConfig& cfg, const SiteSystem& sys) {
  check_sizes(cfg, sys, 0);
  OperatorMatrix h = OperatorMatrix::Zero(sys.total_dim(), sys.total_dim());
  for (std::size_t l = 0; l < sys.sites(); ++l) h += 2.0 * cfg.w[l] * gaudin_integral(l, cfg, sys);
  return h;
}

OperatorMatrix richardson_integral_derivative(std::size_t site, std::size_t wrt,
                                              const SpectralConfig& cfg, const SiteSystem& sys) {
  check_sizes(cfg, sys, site);
  if (wrt >= sys.sites()) throw DimensionError("derivative index out of range");
  OperatorMatrix d = OperatorMatrix::Zero(sys.total_dim(), sys.total_dim());
  if (wrt == site) {
    for (std::size_t other = 0; other < sys.sites(); ++other) {
      if (other == site) continue;
      const cplx diff = cfg.w[site] - cfg.w[other];
      d -= dot_coupling(site, other, sys) / (diff * diff);
    }
  } else {
    const cplx diff = cfg.w[site] - cfg.w[wrt];
    d += dot_coupling(site, wrt, sys) / (diff * diff);
  }
  return d;
}

CommutativityReport verify_commuting(const std::vector<OperatorMatrix>& ops, double tol) {
  CommutativityReport report;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (std::size_t j = i + 1; j < ops.size(); ++j) {
      const double defect = max_abs(commutator(ops[i], ops[j]));
      if (defect > report.max_defect) {
        report.max_defect = defect;
        report.worst_i = i;
        report.worst_j = j;
      }
    }
  }
  report.pass = report.max_defect < tol;
  return report;
}

double kz_flatness_residual(const SpectralConfig& cfg, const SiteSystem& sys, std::size_t site,
                            std::size_t other) {
  if (site == other) throw SameSiteError("kz_flatness_residual: indices must differ");
  const OperatorMatrix hl = richardson_integral(site, cfg, sys);
  const OperatorMatrix hm = richardson_integral(other, cfg, sys);
  const OperatorMatrix r = richardson_integral_derivative(other, site, cfg, sys) -
                           richardson_integral_derivative(site, other, cfg, sys) -
                           commutator(hl, hm) / cfg.level_shift;
  return max_abs(r);
}

}  // namespace lzi
