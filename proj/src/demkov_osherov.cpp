#include "lzi/demkov_osherov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "lzi/errors.hpp"
#include "lzi/polynomial.hpp"

namespace lzi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

void check_entries(const DOHamiltonianEntries& e) {
  if (e.a0.size() != e.v0.size()) {
    throw DimensionError("DOHamiltonianEntries: a0 and v0 must have equal length");
  }
}

struct Pole {
  double position;
  double weight;  // gamma^2
};

std::vector<Pole> coupled_poles(const DOParams& p) {
  std::vector<Pole> poles;
  for (std::size_t k = 0; k < p.gamma.size(); ++k) {
    if (p.gamma[k] != 0.0) poles.push_back({p.epsilon[k], p.gamma[k] * p.gamma[k]});
  }
  std::sort(poles.begin(), poles.end(),
            [](const Pole& a, const Pole& b) { return a.position < b.position; });
  return poles;
}

// g(x) = t - sum w / (x - p), strictly increasing between consecutive poles.
struct RationalForm {
  const std::vector<Pole>& poles;
  double t;

  double value(double x) const {
    double s = 0.0;
    for (const auto& p : poles) s += p.weight / (x - p.position);
    return t - s;
  }
  double derivative(double x) const {
    double s = 0.0;
    for (const auto& p : poles) {
      const double d = x - p.position;
      s += p.weight / (d * d);
    }
    return s;
  }
};

// Safeguarded Newton inside (lo, hi), where g(lo+) < 0 < g(hi-).
double polish_root(const RationalForm& g, double lo, double hi, double guess) {
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  for (int iter = 0; iter < 400; ++iter) {
    const double gx = g.value(x);
    if (gx == 0.0) return x;
    if (gx < 0.0) lo = x; else hi = x;
    const double dg = g.derivative(x);
    double next = x - gx / dg;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - x);
    x = next;
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (step <= 2.0 * kEps * std::abs(x) || hi - lo <= 4.0 * kEps * scale) return x;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "spectral_roots: no convergence in bracket (" << lo << ", " << hi << ") at t = " << g.t;
  throw NumericalError(msg.str());
}

}  // namespace

void DOParams::validate() const {
  if (gamma.size() != epsilon.size()) throw DimensionError("DOParams: gamma and epsilon sizes differ");
  if (gamma.size() < 2) throw InvalidArgument("DOParams: at least two levels required");
  if (gamma[0] == 0.0) throw DegenerateSpectralError("DOParams: gamma_0 must be nonzero");
  for (std::size_t i = 0; i < epsilon.size(); ++i) {
    for (std::size_t j = i + 1; j < epsilon.size(); ++j) {
      if (epsilon[i] == epsilon[j]) {
        throw DegenerateSpectralError("DOParams: epsilon_" + std::to_string(i) + " and epsilon_" +
                                      std::to_string(j) + " coincide");
      }
    }
  }
}

std::vector<std::size_t> DOParams::decoupled_levels() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 1; k < gamma.size(); ++k) {
    if (gamma[k] == 0.0) out.push_back(k);
  }
  return out;
}

double DOHamiltonianEntries::consistency_defect() const {
  check_entries(*this);
  double s = 0.0;
  for (std::size_t i = 0; i < a0.size(); ++i) s += v0[i] * v0[i] / a0[i];
  return a00 - s;
}

OperatorMatrix build_do_hamiltonian(const DOHamiltonianEntries& entries, double t) {
  return do_sweep(entries).at(t);
}

LinearSweep do_sweep(const DOHamiltonianEntries& entries) {
  check_entries(entries);
  const auto dim = static_cast<Eigen::Index>(entries.n() + 1);
  LinearSweep s{OperatorMatrix::Zero(dim, dim), OperatorMatrix::Zero(dim, dim)};
  s.constant(0, 0) = entries.a00;
  s.slope(0, 0) = 1.0;
  for (Eigen::Index i = 1; i < dim; ++i) {
    s.constant(i, i) = entries.a0[i - 1];
    s.constant(0, i) = entries.v0[i - 1];
    s.constant(i, 0) = entries.v0[i - 1];
  }
  return s;
}

DOHamiltonianEntries entries_from_gamma(const DOParams& p) {
  p.validate();
  const double g0 = p.gamma[0];
  const double e0 = p.epsilon[0];
  DOHamiltonianEntries e;
  for (std::size_t i = 1; i < p.gamma.size(); ++i) {
    const double gap = p.epsilon[i] - e0;
    e.v0.push_back(-g0 * p.gamma[i] / gap);
    e.a0.push_back(g0 * g0 / gap);
    e.a00 += p.gamma[i] * p.gamma[i] / gap;
  }
  return e;
}

DOHamiltonianEntries shifted(const DOHamiltonianEntries& entries, double shift) {
  DOHamiltonianEntries out = entries;
  out.a00 += shift;
  for (auto& a : out.a0) a += shift;
  return out;
}

std::vector<double> shift_polynomial_roots(const DOHamiltonianEntries& entries) {
  check_entries(entries);
  const std::size_t n = entries.n();
  std::vector<double> neg(n);
  for (std::size_t i = 0; i < n; ++i) neg[i] = -entries.a0[i];

  const double lead_root[1] = {-entries.a00};
  poly::Coeffs p = poly::multiply(poly::from_roots(lead_root), poly::from_roots(neg));
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> others;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) others.push_back(neg[j]);
    }
    p = poly::add(p, poly::scale(poly::from_roots(others), -entries.v0[i] * entries.v0[i]));
  }

  // The polynomial is the characteristic polynomial of -H(0), so every root
  // is real; companion eigenvalues only carry roundoff in the imaginary part.
  std::vector<double> roots;
  for (const auto& z : poly::companion_roots(p)) {
    double x = z.real();
    for (int iter = 0; iter < 8; ++iter) {
      const double fx = poly::evaluate(p, x);
      const double dfx = poly::evaluate_derivative(p, x);
      if (fx == 0.0 || dfx == 0.0) break;
      const double next = x - fx / dfx;
      if (std::abs(poly::evaluate(p, next)) >= std::abs(fx)) break;
      x = next;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

GaugeFixedParams gamma_from_entries(const DOHamiltonianEntries& entries, Interval shift_search) {
  const auto roots = shift_polynomial_roots(entries);
  double best = kInf;
  bool found = false;
  for (double r : roots) {
    if (r < shift_search.lo || r > shift_search.hi) continue;
    if (!found || std::abs(r) < std::abs(best)) {
      best = r;
      found = true;
    }
  }
  if (!found) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "gamma_from_entries: no real shift in [" << shift_search.lo << ", " << shift_search.hi << "]";
    throw NoRealShiftError(msg.str());
  }

  const DOHamiltonianEntries s = shifted(entries, best);
  GaugeFixedParams out{{{1.0}, {0.0}}, best};
  for (std::size_t i = 0; i < s.n(); ++i) {
    if (s.a0[i] == 0.0) {
      throw DegenerateSpectralError("gamma_from_entries: shifted a_0" + std::to_string(i + 1) +
                                    " vanishes");
    }
    out.params.epsilon.push_back(1.0 / s.a0[i]);
    out.params.gamma.push_back(-s.v0[i] / s.a0[i]);
  }
  out.params.validate();
  return out;
}

std::vector<double> spectral_roots(const DOParams& p, double t) {
  p.validate();
  const auto poles = coupled_poles(p);
  const std::size_t c = poles.size();
  double total_weight = 0.0;
  for (const auto& pole : poles) total_weight += pole.weight;

  std::vector<double> roots;
  for (std::size_t k : p.decoupled_levels()) roots.push_back(p.epsilon[k]);

  // Initial guesses from the companion matrix of
  // t prod_j (x - e_j) - sum_i w_i prod_{j != i} (x - e_j).
  std::vector<double> positions(c);
  for (std::size_t j = 0; j < c; ++j) positions[j] = poles[j].position;
  poly::Coeffs poly = poly::scale(poly::from_roots(positions), t);
  for (std::size_t i = 0; i < c; ++i) {
    std::vector<double> others;
    for (std::size_t j = 0; j < c; ++j) {
      if (j != i) others.push_back(positions[j]);
    }
    poly = poly::add(poly, poly::scale(poly::from_roots(others), -poles[i].weight));
  }
  std::vector<double> guesses;
  if (!poly::trim(poly).empty()) {
    for (const auto& z : poly::companion_roots(poly)) guesses.push_back(z.real());
  }

  const RationalForm g{poles, t};
  auto guess_in = [&](double lo, double hi) {
    for (double x : guesses) {
      if (x > lo && x < hi) return x;
    }
    return 0.5 * (lo + hi);
  };

  for (std::size_t j = 0; j + 1 < c; ++j) {
    const double lo = positions[j];
    const double hi = positions[j + 1];
    roots.push_back(polish_root(g, lo, hi, guess_in(lo, hi)));
  }

  const double reach = total_weight / t;
  if (t == 0.0 || !std::isfinite(reach)) {
    roots.push_back(kInf);
  } else if (t > 0.0) {
    const double lo = std::max(positions.back(), positions.front() + reach);
    const double hi = positions.back() + reach;
    // The outer bound is attained only for a single pole; widen by a few ulps.
    const double hi_safe = hi + 8.0 * kEps * std::abs(hi) + std::numeric_limits<double>::min();
    roots.push_back(polish_root(g, lo == positions.back() ? lo : std::nextafter(lo, -kInf), hi_safe,
                                guess_in(lo, hi_safe)));
  } else {
    const double hi = std::min(positions.front(), positions.back() + reach);
    const double lo = positions.front() + reach;
    const double lo_safe = lo - 8.0 * kEps * std::abs(lo) - std::numeric_limits<double>::min();
    roots.push_back(polish_root(g, lo_safe, hi == positions.front() ? hi : std::nextafter(hi, kInf),
                                guess_in(lo_safe, hi)));
  }

  std::sort(roots.begin(), roots.end());
  return roots;
}

bool interlacing_holds(const DOParams& p, double t, std::span<const double> roots) {
  const auto poles = coupled_poles(p);
  const auto decoupled = p.decoupled_levels();
  if (roots.size() != p.gamma.size()) return false;

  std::vector<double> active;
  std::size_t decoupled_hits = 0;
  for (double x : roots) {
    const bool is_decoupled = std::any_of(decoupled.begin(), decoupled.end(),
                                          [&](std::size_t k) { return p.epsilon[k] == x; });
    if (is_decoupled && decoupled_hits < decoupled.size()) {
      ++decoupled_hits;
    } else {
      active.push_back(x);
    }
  }
  if (decoupled_hits != decoupled.size() || active.size() != poles.size()) return false;
  std::sort(active.begin(), active.end());

  std::size_t cursor = 0;
  if (t < 0.0) {
    if (!(active[0] < poles.front().position)) return false;
    cursor = 1;
  }
  for (std::size_t j = 0; j + 1 < poles.size(); ++j, ++cursor) {
    if (!(active[cursor] > poles[j].position && active[cursor] < poles[j + 1].position)) return false;
  }
  if (t >= 0.0) {
    const double last = active.back();
    if (!(last > poles.back().position)) return false;
  }
  return true;
}

double energy_of_root(const DOParams& p, double x) {
  if (std::isinf(x)) return 0.0;
  return p.gamma[0] * p.gamma[0] / (x - p.epsilon[0]);
}

DOEigenpair eigenpair_at_root(const DOParams& p, double x) {
  p.validate();
  const auto dim = static_cast<Eigen::Index>(p.gamma.size());
  DOEigenpair out{x, energy_of_root(p, x), Eigen::VectorXd::Zero(dim)};
  if (std::isinf(x)) {
    // x v_k -> gamma_k as x -> infinity.
    for (Eigen::Index k = 0; k < dim; ++k) out.vector(k) = p.gamma[k];
    return out;
  }
  for (Eigen::Index k = 0; k < dim; ++k) {
    if (x == p.epsilon[k]) {
      if (p.gamma[k] != 0.0) {
        throw DegenerateSpectralError("eigenpair: root coincides with coupled pole epsilon_" +
                                      std::to_string(k));
      }
      out.vector.setZero();
      out.vector(k) = 1.0;
      return out;
    }
    out.vector(k) = p.gamma[k] / (x - p.epsilon[k]);
  }
  return out;
}

DOEigenpair eigenpair(const DOParams& p, double t, std::size_t branch) {
  const auto roots = spectral_roots(p, t);
  if (branch >= roots.size()) throw InvalidArgument("eigenpair: branch index out of range");
  return eigenpair_at_root(p, roots[branch]);
}

DOHamiltonianEntries bow_tie_entries(std::span<const double> r, const DOHamiltonianEntries& base,
                                     double t) {
  check_entries(base);
  if (r.size() != base.n()) throw DimensionError("bow_tie_entries: need one slope per flat level");
  DOHamiltonianEntries out = base;
  for (std::size_t i = 0; i < r.size(); ++i) out.a0[i] = (r[i] + 1.0) * t;
  return out;
}

LinearSweep bow_tie_sweep(std::span<const double> r, const DOHamiltonianEntries& base) {
  check_entries(base);
  if (r.size() != base.n()) throw DimensionError("bow_tie_sweep: need one slope per flat level");
  LinearSweep s = do_sweep(base);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i + 1);
    s.constant(k, k) = 0.0;
    s.slope(k, k) = r[i] + 1.0;
  }
  return s;
}

namespace {

struct FlowState {
  std::vector<double> roots;
  std::vector<double> energies;
};

FlowState flow_state(const DOParams& p, double t) {
  FlowState s;
  s.roots = spectral_roots(p, t);
  if (!interlacing_holds(p, t, s.roots)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "track_spectral_flow: interlacing violated at t = " << t;
    throw NumericalError(msg.str());
  }
  for (double x : s.roots) s.energies.push_back(energy_of_root(p, x));
  return s;
}

// Assigns to each previous branch the nearest new energy. Empty result when
// the assignment is ambiguous or not a bijection.
std::vector<std::size_t> nearest_assignment(const std::vector<double>& prev,
                                            const std::vector<double>& next) {
  const std::size_t m = prev.size();
  std::vector<std::size_t> pick(m);
  std::vector<bool> taken(m, false);
  for (std::size_t b = 0; b < m; ++b) {
    double best = std::numeric_limits<double>::infinity();
    double second = best;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = std::abs(next[j] - prev[b]);
      if (d < best) {
        second = best;
        best = d;
        arg = j;
      } else if (d < second) {
        second = d;
      }
    }
    if (second - best <= 1e-12 * std::max(1.0, std::abs(prev[b]))) return {};
    if (taken[arg]) return {};
    taken[arg] = true;
    pick[b] = arg;
  }
  return pick;
}

// Labels the state at t_to consistently with `from` (already labelled),
// bisecting the step when the nearest-energy rule is ambiguous.
FlowState advance(const DOParams& p, const FlowState& from, double t_from, double t_to, int depth) {
  FlowState raw = flow_state(p, t_to);
  const auto pick = nearest_assignment(from.energies, raw.energies);
  if (!pick.empty()) {
    FlowState labelled;
    for (std::size_t b = 0; b < pick.size(); ++b) {
      labelled.roots.push_back(raw.roots[pick[b]]);
      labelled.energies.push_back(raw.energies[pick[b]]);
    }
    return labelled;
  }
  if (depth >= 10) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "track_spectral_flow: ambiguous branch assignment between t = " << t_from
        << " and t = " << t_to << " after 10 bisections";
    throw NumericalError(msg.str());
  }
  const double mid = 0.5 * (t_from + t_to);
  const FlowState half = advance(p, from, t_from, mid, depth + 1);
  return advance(p, half, mid, t_to, depth + 1);
}

}  // namespace

SpectralFlow track_spectral_flow(const DOParams& p, std::span<const double> t_grid) {
  p.validate();
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    if (!(t_grid[k] > t_grid[k - 1])) {
      throw InvalidArgument("track_spectral_flow: time grid must be strictly increasing");
    }
  }
  SpectralFlow flow;
  flow.decoupled = p.decoupled_levels();
  if (t_grid.empty()) return flow;

  FlowState state = flow_state(p, t_grid[0]);
  flow.t.push_back(t_grid[0]);
  flow.roots.push_back(state.roots);
  flow.energies.push_back(state.energies);
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    try {
      state = advance(p, state, t_grid[k - 1], t_grid[k], 0);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " [grid row " + std::to_string(k) + "]");
    }
    flow.t.push_back(t_grid[k]);
    flow.roots.push_back(state.roots);
    flow.energies.push_back(state.energies);
  }
  return flow;
}

}  // namespace lzi
