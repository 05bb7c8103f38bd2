#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <vector>

#include "lzi/ado_ekz.hpp"
#include "lzi/errors.hpp"
#include "lzi/quadrature.hpp"

namespace lzi {

namespace {

// Each panel spans about one oscillation, so 2^10 subdivisions is far beyond
// what a smooth integrand needs; the cap bounds the work for unattainable
// tolerances, which then surface as QuadratureError.
constexpr int kMaxPanelDepth = 10;

struct WindowResult {
  Eigen::Vector2cd value = Eigen::Vector2cd::Zero();
  double error = 0.0;
  long evaluations = 0;
};

// Integrates Phi(omega) e^{-i omega t} w(omega) over [c - half, c + half], where
// w is 1 in the interior and falls off as cos^2 over the outer taper band.
WindowResult integrate_window(const EKZSolution& sol, double t, double centre, double half,
                              double taper_fraction, double abs_tol) {
  const double lo = centre - half;
  const double hi = centre + half;
  const double band = taper_fraction * half;
  const auto& a = sol.params().a;

  auto integrand = [&](double omega) -> Eigen::Vector2cd {
    double w = 1.0;
    const double edge = std::min(omega - lo, hi - omega);
    if (band > 0.0 && edge < band) {
      const double c = std::cos(0.5 * std::numbers::pi * (1.0 - edge / band));
      w = c * c;
    }
    return sol.evaluate(omega, a) * (w * std::exp(cplx(0.0, -omega * t)));
  };

  std::vector<double> breaks{lo, hi};
  for (double ak : a) {
    if (ak > lo && ak < hi) breaks.push_back(ak);
  }
  if (centre > lo && centre < hi) breaks.push_back(centre);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  WindowResult out;
  const double per_unit = abs_tol / (hi - lo);
  for (std::size_t s = 0; s + 1 < breaks.size(); ++s) {
    double x = breaks[s];
    const double end = breaks[s + 1];
    while (x < end) {
      // Panels of about one oscillation of the chirp e^{i (omega - t)^2 / 2}.
      const double step = std::min(1.0, 2.0 * std::numbers::pi / (std::abs(x - centre) + 1.0));
      const double next = std::min(end, x + step);
      const auto est = quad::adaptive_gauss_kronrod(integrand, x, next, per_unit * (next - x), kMaxPanelDepth);
      out.value += est.value;
      out.error += est.error;
      out.evaluations += est.evaluations;
      x = next;
    }
  }
  return out;
}

}  // namespace

TimeDomainValue time_domain_wavefunction(const EKZSolution& sol, double t, const QuadratureSpec& spec) {
  if (!(spec.tolerance > 0.0) || !(spec.initial_half_width > 0.0) || spec.max_doublings < 1 ||
      spec.taper_fraction < 0.0 || spec.taper_fraction >= 0.5) {
    throw InvalidArgument("time_domain_wavefunction: invalid quadrature settings");
  }
  // Stationary point of omega^2 / 2 - omega t; the window must also contain
  // every branch point so that the phase jumps across them are resolved.
  const double centre = t;
  double half = spec.initial_half_width;
  for (double ak : sol.params().a) half = std::max(half, std::abs(ak - centre) + 8.0);

  // |Psi| ~ sqrt(2 pi) |Phi| near the stationary point sets the absolute scale.
  double scale = 0.0;
  for (double probe : {centre + 0.5, centre - 0.5}) {
    try {
      scale = std::max(scale, sol.evaluate(probe).norm());
    } catch (const BranchPointError&) {
    }
  }
  const double abs_tol = 0.1 * spec.tolerance * std::sqrt(2.0 * std::numbers::pi) * std::max(scale, 1e-300);

  WindowResult prev = integrate_window(sol, t, centre, half, spec.taper_fraction, abs_tol);
  long evaluations = prev.evaluations;
  for (int d = 0; d < spec.max_doublings; ++d) {
    half *= 2.0;
    WindowResult cur = integrate_window(sol, t, centre, half, spec.taper_fraction, abs_tol);
    evaluations += cur.evaluations;
    const double change = (cur.value - prev.value).cwiseAbs().maxCoeff();
    const double size = cur.value.cwiseAbs().maxCoeff();
    if (change <= spec.tolerance * size) {
      if (cur.error > spec.tolerance * size) {
        char msg[160];
        std::snprintf(msg, sizeof msg, "time_domain_wavefunction: panel error estimate %.3g above %.3g at t = %.17g",
                      cur.error, spec.tolerance * size, t);
        throw QuadratureError(msg);
      }
      return {cur.value, change + cur.error, half, evaluations};
    }
    prev = cur;
  }
  throw QuadratureError("time_domain_wavefunction: no convergence at t = " + std::to_string(t) +
                        " after widening the window to half-width " + std::to_string(half));
}

double time_domain_survival(const EKZSolution& sol, double t_obs, const QuadratureSpec& spec) {
  if (!(t_obs > 0.0)) throw InvalidArgument("time_domain_survival: t_obs must be positive");
  const auto late = time_domain_wavefunction(sol, t_obs, spec);
  const auto early = time_domain_wavefunction(sol, -t_obs, spec);
  return late.amplitude.squaredNorm() / early.amplitude.squaredNorm();
}

}  // namespace lzi
