#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "lzi/ado_ekz.hpp"
#include "lzi/cli/cli.hpp"
#include "lzi/demkov_osherov.hpp"
#include "lzi/propagator.hpp"

namespace lzi::cli {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Validated top-level view of a configuration document.
struct RunConfig {
  json doc;
  std::string model;  ///< "do", "bow-tie", "ado" or empty
  unsigned long seed = 0;
  std::optional<double> tolerance;

  const json& block(const char* name) const;  ///< required object block
  bool has(const char* name) const { return doc.contains(name); }
};

RunConfig parse_config(const std::string& text, const Overrides& overrides);

double number(const json& obj, const char* key, std::optional<double> fallback = std::nullopt);
long integer(const json& obj, const char* key, std::optional<long> fallback = std::nullopt);
std::string text(const json& obj, const char* key, std::optional<std::string> fallback = std::nullopt);
std::vector<double> numbers(const json& obj, const char* key);

DOParams parse_do_params(const json& params);
ADOParams parse_ado_params(const json& params);
/// Coupling matrix of an ADO block: gamma gamma^T with optional "v00", "v11"
/// overrides and "break_parallelism" added to v_01 = v_10.
Eigen::MatrixXd parse_ado_couplings(const json& params, const ADOParams& p);
/// Bow-tie slopes r_i (one per flat level).
std::vector<double> parse_bow_tie_slopes(const json& params);

/// Either {"t": [...]} or {"t_min", "t_max", "count"} (inclusive, uniform).
std::vector<double> parse_grid(const json& grid, const char* prefix = "t");

PropagationSpec parse_propagation(const json& block);
QuadratureSpec parse_quadrature(const json& block);

}  // namespace lzi::cli
