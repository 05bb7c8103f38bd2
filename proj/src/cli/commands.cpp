#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "config.hpp"
#include "csv.hpp"
#include "lzi/gaudin_integrals.hpp"
#include "lzi/parallel.hpp"

namespace lzi::cli {

namespace {

using Command = std::function<CommandResult(const RunConfig&)>;

std::mt19937_64 make_rng(const RunConfig& cfg) { return std::mt19937_64(cfg.seed); }

double draw(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random point at least `gap` away from every entry of `avoid`.
double draw_away(std::mt19937_64& rng, double lo, double hi, const std::vector<double>& avoid, double gap) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const double x = draw(rng, lo, hi);
    if (std::all_of(avoid.begin(), avoid.end(), [&](double a) { return std::abs(x - a) > gap; })) return x;
  }
  throw ConfigError("could not place a sample point away from the branch points");
}

void require_model(const RunConfig& cfg, std::initializer_list<const char*> allowed, const char* command) {
  for (const char* m : allowed) {
    if (cfg.model == m) return;
  }
  std::string list;
  for (const char* m : allowed) list += (list.empty() ? "" : ", ") + std::string(m);
  throw ConfigError(std::string(command) + ": model must be one of " + list);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

LinearSweep model_sweep(const RunConfig& cfg) {
  const json& params = cfg.block("params");
  if (cfg.model == "do") return do_sweep(entries_from_gamma(parse_do_params(params)));
  if (cfg.model == "bow-tie") {
    const auto base = entries_from_gamma(parse_do_params(params));
    return bow_tie_sweep(parse_bow_tie_slopes(params), base);
  }
  if (cfg.model == "ado") {
    const ADOParams p = parse_ado_params(params);
    return ado_sweep(p, parse_ado_couplings(params, p));
  }
  throw ConfigError("a model (\"do\", \"bow-tie\" or \"ado\") is required");
}

PropagationSpec propagation_of(const RunConfig& cfg) {
  return cfg.has("propagation") ? parse_propagation(cfg.block("propagation")) : PropagationSpec{};
}

QuadratureSpec quadrature_of(const RunConfig& cfg) {
  return cfg.has("quadrature") ? parse_quadrature(cfg.block("quadrature")) : QuadratureSpec{};
}

// ---------------------------------------------------------------- verify-integrals

CommandResult verify_integrals(const RunConfig& cfg) {
  const double tol = cfg.tolerance.value_or(1e-12);
  auto rng = make_rng(cfg);
  json suites = json::array();
  double max_comm = 0.0;
  double max_curv = 0.0;

  if (cfg.has("richardson")) {
    const json& r = cfg.block("richardson");
    const long sites = integer(r, "sites", 3);
    if (sites < 2 || sites > 8) throw ConfigError("richardson.sites must lie in 2..8");
    const auto sys = SiteSystem::uniform(static_cast<std::size_t>(sites));
    const bool fixed_w = r.contains("w");
    const long samples = integer(r, "samples", fixed_w ? 1 : 20);
    double comm = 0.0;
    double curv = 0.0;
    for (long s = 0; s < samples; ++s) {
      SpectralConfig sc;
      sc.lambda = number(r, "lambda", 0.0);
      sc.level_shift = number(r, "level_shift", 3.0);
      if (fixed_w) {
        for (double w : numbers(r, "w")) sc.w.emplace_back(w);
      } else {
        std::vector<double> placed;
        while (placed.size() < static_cast<std::size_t>(sites)) placed.push_back(draw_away(rng, -2.0, 2.0, placed, 0.1));
        for (double w : placed) sc.w.emplace_back(w);
      }
      std::vector<OperatorMatrix> ops;
      for (std::size_t l = 0; l < sys.sites(); ++l) ops.push_back(richardson_integral(l, sc, sys));
      comm = std::max(comm, verify_commuting(ops, tol).max_defect);
      for (std::size_t l = 0; l < sys.sites(); ++l) {
        for (std::size_t m = l + 1; m < sys.sites(); ++m) curv = std::max(curv, kz_flatness_residual(sc, sys, l, m));
      }
    }
    suites.push_back({{"suite", "richardson"},
                      {"sites", sites},
                      {"samples", samples},
                      {"max_commutator_defect", comm},
                      {"max_curvature_residual", curv}});
    max_comm = std::max(max_comm, comm);
    max_curv = std::max(max_curv, curv);
  }

  if (cfg.model == "ado") {
    const json& params = cfg.block("params");
    const ADOParams p = parse_ado_params(params);
    const Eigen::MatrixXd v = parse_ado_couplings(params, p);
    const BVectorSet b = b_vectors(v);
    std::vector<double> omegas;
    const json verification = cfg.has("verification") ? cfg.block("verification") : json::object();
    if (verification.contains("omega")) {
      omegas = numbers(verification, "omega");
    } else {
      const long samples = integer(verification, "samples", 20);
      const auto [lo, hi] = std::minmax_element(p.a.begin(), p.a.end());
      for (long s = 0; s < samples; ++s) omegas.push_back(draw_away(rng, *lo - 3.0, *hi + 3.0, p.a, 0.1));
    }
    double comm = 0.0;
    double curv = 0.0;
    for (double w : omegas) {
      comm = std::max(comm, verify_commuting(ekz_integrals(b, w, p.a), tol).max_defect);
      curv = std::max(curv, max_zero_curvature_residual(b, w, p.a));
    }
    suites.push_back({{"suite", "ado"},
                      {"points", omegas.size()},
                      {"parallelism_defect", parallelism_defect(v)},
                      {"max_commutator_defect", comm},
                      {"max_curvature_residual", curv}});
    max_comm = std::max(max_comm, comm);
    max_curv = std::max(max_curv, curv);
  }

  if (suites.empty()) throw ConfigError("verify-integrals: need a \"richardson\" block or model \"ado\"");
  const bool pass = max_comm <= tol && max_curv <= tol;
  json report{{"command", "verify-integrals"},
              {"tolerance", tol},
              {"max_commutator_defect", max_comm},
              {"max_curvature_residual", max_curv},
              {"pass", pass},
              {"suites", suites}};
  CommandResult out{pass ? kPass : kVerificationFailed, dump(report), ""};
  if (!pass) out.diagnostics = "verify-integrals: defect above tolerance " + CsvWriter::format(tol);
  return out;
}

// ---------------------------------------------------------------- spectral-flow

CommandResult spectral_flow(const RunConfig& cfg) {
  require_model(cfg, {"do"}, "spectral-flow");
  const DOParams p = parse_do_params(cfg.block("params"));
  const auto grid = parse_grid(cfg.block("grid"));
  const SpectralFlow flow = track_spectral_flow(p, grid);
  std::vector<std::string> header{"t"};
  for (std::size_t m = 0; m < flow.branches(); ++m) header.push_back("x_" + std::to_string(m));
  for (std::size_t m = 0; m < flow.branches(); ++m) header.push_back("E_" + std::to_string(m));
  CsvWriter csv(header);
  for (std::size_t k = 0; k < flow.t.size(); ++k) {
    std::vector<double> row{flow.t[k]};
    row.insert(row.end(), flow.roots[k].begin(), flow.roots[k].end());
    row.insert(row.end(), flow.energies[k].begin(), flow.energies[k].end());
    csv.row(row);
  }
  return {kPass, csv.str(), ""};
}

// ---------------------------------------------------------------- evolve

struct Populations {
  double norm;
  std::vector<double> p;
};

StateVector initial_state(const RunConfig& cfg, Eigen::Index dim) {
  const json default_initial = cfg.model == "ado" ? json("bright") : json(0);
  const json initial = cfg.doc.value("initial", default_initial);
  if (initial.is_string() && initial.get<std::string>() == "bright") {
    if (cfg.model != "ado") throw ConfigError("initial \"bright\" is only defined for model \"ado\"");
    const ADOParams p = parse_ado_params(cfg.block("params"));
    StateVector psi = StateVector::Zero(dim);
    const double g = std::hypot(p.gamma[0], p.gamma[1]);
    if (g == 0.0) throw ConfigError("bright state undefined for gamma_0 = gamma_1 = 0");
    psi(0) = p.gamma[0] / g;
    psi(1) = p.gamma[1] / g;
    return psi;
  }
  if (!initial.is_number_integer()) throw ConfigError("initial must be a level index or \"bright\"");
  const long k = initial.get<long>();
  if (k < 0 || k >= dim) throw ConfigError("initial level index out of range");
  return StateVector::Unit(dim, k);
}

std::vector<Populations> oracle_populations(const RunConfig& cfg, const std::vector<double>& grid) {
  const LinearSweep sweep = model_sweep(cfg);
  const HamiltonianFn h = as_function(sweep);
  PropagationSpec spec = propagation_of(cfg);
  StateVector psi = initial_state(cfg, sweep.dim());
  std::vector<Populations> out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (k > 0) {
      spec.t0 = grid[k - 1];
      spec.t1 = grid[k];
      psi = propagate(h, psi, spec).psi;
    }
    const Eigen::VectorXd p = psi.cwiseAbs2();
    out.push_back({p.sum(), std::vector<double>(p.data(), p.data() + p.size())});
  }
  return out;
}

std::vector<Populations> closed_form_populations(const RunConfig& cfg, const std::vector<double>& grid) {
  require_model(cfg, {"ado"}, "evolve (closed-form engine)");
  const json& params = cfg.block("params");
  const ADOParams p = parse_ado_params(params);
  if (p.n() != 2) throw ConfigError("closed-form engine: populations are available for n = 2 only");
  if (b_vectors(parse_ado_couplings(params, p)).parallel_defect > 1e-12 ||
      parallelism_defect(parse_ado_couplings(params, p)) > 1e-12) {
    throw ConfigError("closed-form engine: couplings must be parallel (v_ij = gamma_i gamma_j)");
  }
  if (cfg.doc.contains("initial") && cfg.doc["initial"] != json("bright")) {
    throw ConfigError("closed-form engine: the exact solution starts in the bright state (initial \"bright\")");
  }
  const EKZSolution sol = closed_form_solution(p, 1);
  const QuadratureSpec q = quadrature_of(cfg);
  std::vector<Eigen::Vector2cd> psi(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { psi[k] = time_domain_wavefunction(sol, grid[k], q).amplitude; });
  // The first grid time plays the role of the initial time: all weight in the bright state.
  const double scale = psi[0].squaredNorm();
  std::vector<Populations> out;
  for (const auto& v : psi) {
    const double p0 = std::norm(v(0)) / scale;
    const double p1 = std::norm(v(1)) / scale;
    out.push_back({1.0, {p0, p1, 1.0 - p0 - p1}});
  }
  return out;
}

CommandResult evolve(const RunConfig& cfg) {
  const auto grid = parse_grid(cfg.block("grid"));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) throw ConfigError("evolve: time grid must be strictly increasing");
  }
  const std::string engine = text(cfg.doc, "engine", "oracle");
  if (engine != "oracle" && engine != "closed-form" && engine != "both") {
    throw ConfigError("engine must be \"oracle\", \"closed-form\" or \"both\"");
  }
  std::vector<Populations> oracle;
  std::vector<Populations> closed;
  if (engine != "closed-form") oracle = oracle_populations(cfg, grid);
  if (engine != "oracle") closed = closed_form_populations(cfg, grid);

  const std::size_t levels = (oracle.empty() ? closed : oracle).front().p.size();
  std::vector<std::string> header{"t"};
  auto add_columns = [&](const std::string& suffix) {
    header.push_back("norm" + suffix);
    for (std::size_t j = 0; j < levels; ++j) header.push_back("p_" + std::to_string(j) + suffix);
  };
  if (engine == "both") {
    add_columns("_oracle");
    add_columns("_closed_form");
    header.push_back("delta");
  } else {
    add_columns("");
  }
  CsvWriter csv(header);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::vector<double> row{grid[k]};
    for (const auto* set : {&oracle, &closed}) {
      if (set->empty()) continue;
      row.push_back((*set)[k].norm);
      row.insert(row.end(), (*set)[k].p.begin(), (*set)[k].p.end());
    }
    if (engine == "both") {
      double delta = 0.0;
      for (std::size_t j = 0; j < levels; ++j) delta = std::max(delta, std::abs(oracle[k].p[j] - closed[k].p[j]));
      worst = std::max(worst, delta);
      row.push_back(delta);
    }
    csv.row(row);
  }
  CommandResult out{kPass, csv.str(), ""};
  const double tol = cfg.tolerance.value_or(1e-2);
  if (engine == "both" && worst > tol) {
    out.exit_code = kVerificationFailed;
    out.diagnostics = "evolve: engines differ by " + CsvWriter::format(worst) + " > " + CsvWriter::format(tol);
  }
  return out;
}

// ---------------------------------------------------------------- lz-probability

// A sweep axis is either a list of values or {"min", "max", "count"}.
std::vector<double> sweep_axis(const json& sweep, const char* key) {
  if (!sweep.contains(key)) throw ConfigError(std::string("sweep: missing \"") + key + "\"");
  const json& axis = sweep[key];
  if (axis.is_array()) {
    if (axis.empty()) throw ConfigError(std::string("sweep.") + key + ": empty list");
    return numbers(sweep, key);
  }
  if (!axis.is_object()) throw ConfigError(std::string("sweep.") + key + ": expected a list or a range");
  json range{{"x_min", number(axis, "min")}, {"x_max", number(axis, "max")}, {"count", integer(axis, "count")}};
  return parse_grid(range, "x");
}

std::vector<std::array<double, 3>> sweep_tuples(const RunConfig& cfg) {
  if (!cfg.has("sweep")) {
    const double q = 1.0 / std::sqrt(4.0 * 3.14159265358979323846);
    return {{0.3, 0.4, 0.5}, {0.5, 0.5, 0.3}, {0.2, 0.7, 0.4}, {q, q, 1.0}};
  }
  const json& s = cfg.block("sweep");
  std::vector<std::array<double, 3>> out;
  if (s.contains("gamma")) {
    if (!s["gamma"].is_array()) throw ConfigError("sweep.gamma must be a list of [g0, g1, g2] triples");
    for (const auto& t : s["gamma"]) {
      if (!t.is_array() || t.size() != 3 || !t[0].is_number() || !t[1].is_number() || !t[2].is_number()) {
        throw ConfigError("sweep.gamma entries must be [g0, g1, g2] number triples");
      }
      out.push_back({t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
    }
  } else {
    const auto g0 = sweep_axis(s, "gamma0");
    const auto g1 = sweep_axis(s, "gamma1");
    const auto g2 = sweep_axis(s, "gamma2");
    for (double a : g0) {
      for (double b : g1) {
        for (double c : g2) out.push_back({a, b, c});
      }
    }
  }
  if (out.empty()) throw ConfigError("sweep: no gamma tuples");
  return out;
}

CommandResult lz_probability_cmd(const RunConfig& cfg) {
  std::vector<std::array<double, 3>> tuples;
  try {
    tuples = sweep_tuples(cfg);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sweep: ") + e.what());
  }
  const json prop = cfg.has("propagation") ? cfg.block("propagation") : json::object();
  const double T = number(prop, "T", 200.0);
  if (!(T > 0.0)) throw ConfigError("propagation.T must be positive");
  const PropagationSpec spec = propagation_of(cfg);
  const double a2 = cfg.has("sweep") ? number(cfg.block("sweep"), "a2", 0.0) : 0.0;

  std::vector<double> oracle(tuples.size());
  parallel_for(tuples.size(), [&](std::size_t i) {
    const auto& g = tuples[i];
    const ADOParams p{{g[0], g[1], g[2]}, {a2}};
    oracle[i] = transition_matrix(ado_sweep(p), T, spec).extrapolated(2, 2);
  });
  CsvWriter csv({"gamma0", "gamma1", "gamma2", "P_formula", "P_oracle", "abs_delta"});
  double worst = 0.0;
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& g = tuples[i];
    const double formula = lz_probability(g[0], g[1], g[2]);
    const double delta = std::abs(formula - oracle[i]);
    worst = std::max(worst, delta);
    csv.row({g[0], g[1], g[2], formula, oracle[i], delta});
  }
  CommandResult out{kPass, csv.str(), ""};
  const double tol = cfg.tolerance.value_or(1e-2);
  if (worst > tol) {
    out.exit_code = kVerificationFailed;
    out.diagnostics = "lz-probability: |delta| " + CsvWriter::format(worst) + " > " + CsvWriter::format(tol);
  }
  return out;
}

// ---------------------------------------------------------------- verify-ekz

CommandResult verify_ekz(const RunConfig& cfg) {
  require_model(cfg, {"ado"}, "verify-ekz");
  const ADOParams p = parse_ado_params(cfg.block("params"));
  p.validate();
  const json verification = cfg.has("verification") ? cfg.block("verification") : json::object();
  const long samples = integer(verification, "samples", 100);
  const double h = number(verification, "h", 1e-4);
  if (samples < 1 || !(h > 0.0)) throw ConfigError("verification: samples >= 1 and h > 0 required");
  const double tol = cfg.tolerance.value_or(1e-6);
  auto rng = make_rng(cfg);
  const auto [lo, hi] = std::minmax_element(p.a.begin(), p.a.end());
  const double gap = std::max(0.1, 20.0 * h);

  double r_omega = 0.0;
  double r_a = 0.0;
  double curvature = 0.0;
  for (int m : {1, -1}) {
    const EKZSolution sol = closed_form_solution(p, m);
    for (long s = 0; s < samples; ++s) {
      const double w = draw_away(rng, *lo - 3.0, *hi + 3.0, p.a, gap);
      const auto r = ekz_residual_check(sol, w, p.a, h);
      r_omega = std::max(r_omega, r.r_omega);
      r_a = std::max(r_a, r.r_a);
      if (m == 1) curvature = std::max(curvature, max_zero_curvature_residual(sol.b(), w, p.a));
    }
  }
  const bool pass = r_omega <= tol && r_a <= tol && curvature <= 1e-12;
  json report{{"command", "verify-ekz"},
              {"n", p.n()},
              {"samples_per_branch", samples},
              {"h", h},
              {"tolerance", tol},
              {"max_residual_omega", r_omega},
              {"max_residual_a", r_a},
              {"max_curvature_residual", curvature},
              {"pass", pass}};
  CommandResult out{pass ? kPass : kVerificationFailed, dump(report), ""};
  if (!pass) out.diagnostics = "verify-ekz: residual above tolerance";
  return out;
}

// ---------------------------------------------------------------- closed-form

CommandResult closed_form_cmd(const RunConfig& cfg) {
  require_model(cfg, {"ado"}, "closed-form");
  const ADOParams p = parse_ado_params(cfg.block("params"));
  const long m = integer(cfg.doc, "branch", 1);
  if (m != 1 && m != -1) throw ConfigError("branch must be 1 or -1");
  const EKZSolution sol = closed_form_solution(p, static_cast<int>(m));
  const std::string domain = text(cfg.doc, "domain", "frequency");
  const json& grid = cfg.block("grid");

  if (domain == "frequency") {
    CsvWriter csv({"omega", "re_0", "im_0", "re_1", "im_1", "modulus"});
    for (double w : parse_grid(grid, "omega")) {
      const Eigen::Vector2cd v = sol.evaluate(w);
      csv.row({w, v(0).real(), v(0).imag(), v(1).real(), v(1).imag(), v.norm()});
    }
    return {kPass, csv.str(), ""};
  }
  if (domain != "time") throw ConfigError("domain must be \"frequency\" or \"time\"");
  const auto ts = parse_grid(grid, "t");
  const QuadratureSpec q = quadrature_of(cfg);
  std::vector<TimeDomainValue> values(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) { values[k] = time_domain_wavefunction(sol, ts[k], q); });
  CsvWriter csv({"t", "re_0", "im_0", "re_1", "im_1", "norm2", "error_estimate"});
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const auto& v = values[k].amplitude;
    csv.row({ts[k], v(0).real(), v(0).imag(), v(1).real(), v(1).imag(), v.squaredNorm(), values[k].error_estimate});
  }
  return {kPass, csv.str(), ""};
}

// ---------------------------------------------------------------- transition-matrix

CommandResult transition_matrix_cmd(const RunConfig& cfg) {
  const LinearSweep sweep = model_sweep(cfg);
  const json prop = cfg.has("propagation") ? cfg.block("propagation") : json::object();
  const double T = number(prop, "T", 200.0);
  if (!(T > 0.0)) throw ConfigError("propagation.T must be positive");
  const TransitionResult r = transition_matrix(sweep, T, propagation_of(cfg));
  CsvWriter csv({"initial", "final", "p_T", "p_2T", "p_extrapolated"});
  for (Eigen::Index i = 0; i < r.matrix.cols(); ++i) {
    for (Eigen::Index j = 0; j < r.matrix.rows(); ++j) {
      csv.row({static_cast<double>(i), static_cast<double>(j), r.matrix_half(j, i), r.matrix(j, i),
               r.extrapolated(j, i)});
    }
  }
  CommandResult out{kPass, csv.str(), ""};
  out.diagnostics = "transition-matrix: T_used " + CsvWriter::format(r.T_used) + ", unitarity defect " +
                    CsvWriter::format(r.unitarity_defect) + ", step-halving error " +
                    CsvWriter::format(r.error_estimate) + ", max |P(2T) - P(T)| " +
                    CsvWriter::format(r.extrapolation_estimate);
  return out;
}

const std::map<std::string, Command>& registry() {
  static const std::map<std::string, Command> commands{
      {"verify-integrals", verify_integrals}, {"spectral-flow", spectral_flow},
      {"evolve", evolve},                     {"lz-probability", lz_probability_cmd},
      {"verify-ekz", verify_ekz},             {"closed-form", closed_form_cmd},
      {"transition-matrix", transition_matrix_cmd},
  };
  return commands;
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

CommandResult run_command(const std::string& command, const std::string& config_json, const Overrides& overrides) {
  const auto it = registry().find(command);
  if (it == registry().end()) return {kConfigError, "", "unknown command \"" + command + "\""};
  try {
    return it->second(parse_config(config_json, overrides));
  } catch (const ConfigError& e) {
    return {kConfigError, "", std::string("configuration error: ") + e.what()};
  } catch (const json::exception& e) {
    return {kConfigError, "", std::string("configuration error: ") + e.what()};
  } catch (const InvalidArgument& e) {
    return {kConfigError, "", std::string("invalid parameters: ") + e.what()};
  } catch (const DimensionError& e) {
    return {kConfigError, "", std::string("invalid parameters: ") + e.what()};
  } catch (const DegenerateSpectralError& e) {
    return {kConfigError, "", std::string("invalid parameters: ") + e.what()};
  } catch (const SameSiteError& e) {
    return {kConfigError, "", std::string("invalid parameters: ") + e.what()};
  } catch (const std::exception& e) {
    return {kNumericalError, "", std::string("numerical error: ") + e.what()};
  }
}

}  // namespace lzi::cli
