#include "config.hpp"

#include <cmath>

namespace lzi::cli {

namespace {

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

const json& member(const json& obj, const char* key) {
  if (!obj.is_object()) fail(std::string("expected an object around \"") + key + "\"");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field \"") + key + "\"");
  return *it;
}

}  // namespace

const json& RunConfig::block(const char* name) const {
  const json& b = member(doc, name);
  if (!b.is_object()) fail(std::string("\"") + name + "\" must be an object");
  return b;
}

RunConfig parse_config(const std::string& source, const Overrides& overrides) {
  RunConfig cfg;
  try {
    cfg.doc = json::parse(source);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  if (!cfg.doc.is_object()) fail("configuration must be a JSON object");
  if (integer(cfg.doc, "schema_version") != kSchemaVersion) {
    fail("unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  if (cfg.doc.contains("model")) {
    cfg.model = text(cfg.doc, "model");
    if (cfg.model != "do" && cfg.model != "bow-tie" && cfg.model != "ado") {
      fail("model must be one of \"do\", \"bow-tie\", \"ado\"");
    }
  }
  const long seed = integer(cfg.doc, "seed", 0);
  if (seed < 0) fail("seed must be non-negative");
  cfg.seed = overrides.seed.value_or(static_cast<unsigned long>(seed));
  if (cfg.doc.contains("tolerance")) cfg.tolerance = number(cfg.doc, "tolerance");
  if (overrides.tolerance) cfg.tolerance = overrides.tolerance;
  if (cfg.tolerance && !(*cfg.tolerance > 0.0)) fail("tolerance must be positive");
  return cfg;
}

double number(const json& obj, const char* key, std::optional<double> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    member(obj, key);
  }
  const json& v = obj.at(key);
  if (!v.is_number()) fail(std::string("\"") + key + "\" must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail(std::string("\"") + key + "\" must be finite");
  return x;
}

long integer(const json& obj, const char* key, std::optional<long> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    member(obj, key);
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(std::string("\"") + key + "\" must be an integer");
  return v.get<long>();
}

std::string text(const json& obj, const char* key, std::optional<std::string> fallback) {
  if (!obj.contains(key)) {
    if (fallback) return *fallback;
    member(obj, key);
  }
  const json& v = obj.at(key);
  if (!v.is_string()) fail(std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const json& obj, const char* key) {
  const json& v = member(obj, key);
  if (!v.is_array()) fail(std::string("\"") + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) fail(std::string("\"") + key + "\" must contain only numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

DOParams parse_do_params(const json& params) {
  DOParams p{numbers(params, "gamma"), numbers(params, "epsilon")};
  if (p.gamma.size() != p.epsilon.size()) fail("params: gamma and epsilon must have equal length");
  if (p.gamma.size() < 2) fail("params: at least two levels are required");
  return p;
}

ADOParams parse_ado_params(const json& params) {
  ADOParams p{numbers(params, "gamma"), numbers(params, "a")};
  if (p.gamma.size() < 3) fail("params: ADO needs gamma_0..gamma_n with n >= 2");
  if (p.a.size() + 2 != p.gamma.size()) fail("params: ADO needs one a_k per flat level (n - 1 values)");
  return p;
}

Eigen::MatrixXd parse_ado_couplings(const json& params, const ADOParams& p) {
  Eigen::MatrixXd v = parallel_couplings(p);
  v(0, 0) = number(params, "v00", v(0, 0));
  v(1, 1) = number(params, "v11", v(1, 1));
  const double delta = number(params, "break_parallelism", 0.0);
  v(0, 1) += delta;
  v(1, 0) += delta;
  return v;
}

std::vector<double> parse_bow_tie_slopes(const json& params) { return numbers(params, "r"); }

std::vector<double> parse_grid(const json& grid, const char* prefix) {
  if (grid.contains(prefix)) {
    auto v = numbers(grid, prefix);
    if (v.empty()) fail("grid: empty list");
    return v;
  }
  const std::string lo_key = std::string(prefix) + "_min";
  const std::string hi_key = std::string(prefix) + "_max";
  const double lo = number(grid, lo_key.c_str());
  const double hi = number(grid, hi_key.c_str());
  const long count = integer(grid, "count");
  if (count < 1) fail("grid: count must be positive");
  if (count > 1 && !(hi > lo)) fail("grid: need " + hi_key + " > " + lo_key);
  std::vector<double> out;
  for (long k = 0; k < count; ++k) {
    out.push_back(count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  return out;
}

PropagationSpec parse_propagation(const json& block) {
  PropagationSpec s;
  s.rtol = number(block, "rtol", s.rtol);
  s.atol = number(block, "atol", s.atol);
  s.max_steps = integer(block, "max_steps", s.max_steps);
  if (block.contains("step")) s.step = number(block, "step");
  const std::string method = text(block, "method", "cf4");
  if (method == "rk4") {
    s.method = Method::rk4;
  } else if (method == "magnus2") {
    s.method = Method::magnus2;
  } else if (method == "cf4") {
    s.method = Method::cf4;
  } else if (method == "adaptive") {
    s.method = Method::adaptive;
  } else {
    fail("propagation.method must be one of rk4, magnus2, cf4, adaptive");
  }
  if (!(s.rtol > 0.0) || !(s.atol > 0.0)) fail("propagation: tolerances must be positive");
  if (s.step && !(*s.step > 0.0)) fail("propagation.step must be positive");
  if (s.max_steps <= 0) fail("propagation.max_steps must be positive");
  return s;
}

QuadratureSpec parse_quadrature(const json& block) {
  QuadratureSpec q;
  q.tolerance = number(block, "tolerance", q.tolerance);
  q.initial_half_width = number(block, "initial_half_width", q.initial_half_width);
  q.max_doublings = static_cast<int>(integer(block, "max_doublings", q.max_doublings));
  q.taper_fraction = number(block, "taper_fraction", q.taper_fraction);
  if (!(q.tolerance > 0.0) || !(q.initial_half_width > 0.0) || q.max_doublings < 1 || q.taper_fraction < 0.0 ||
      q.taper_fraction >= 0.5) {
    fail("quadrature: invalid settings");
  }
  return q;
}

}  // namespace lzi::cli
