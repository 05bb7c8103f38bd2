#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "lzi/cli/cli.hpp"

using namespace lzi::cli;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream cs(line);
    std::string cell;
    while (std::getline(cs, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

double cell(const std::vector<std::vector<std::string>>& rows, std::size_t r, std::size_t c) {
  return std::stod(rows.at(r).at(c));
}

CommandResult run(const std::string& command, const json& config, const Overrides& o = {}) {
  return run_command(command, config.dump(), o);
}

json ado_config(std::vector<double> gamma, std::vector<double> a) {
  return {{"schema_version", 1}, {"model", "ado"}, {"seed", 3}, {"params", {{"gamma", gamma}, {"a", a}}}};
}

}  // namespace

TEST_CASE("exit code 3 for configuration problems") {
  CHECK(run_command("no-such-command", "{}").exit_code == kConfigError);
  CHECK(run_command("spectral-flow", "{not json").exit_code == kConfigError);
  CHECK(run_command("spectral-flow", R"({"model": "do"})").exit_code == kConfigError);
  CHECK(run_command("spectral-flow", R"({"schema_version": 2, "model": "do"})").exit_code == kConfigError);

  json missing_grid{{"schema_version", 1}, {"model", "do"}, {"params", {{"gamma", {1.0, 0.5}}, {"epsilon", {0.0, 1.0}}}}};
  const auto r = run("spectral-flow", missing_grid);
  CHECK(r.exit_code == kConfigError);
  CHECK(r.output.empty());
  CHECK(r.diagnostics.find("grid") != std::string::npos);

  json coincident = missing_grid;
  coincident["params"]["epsilon"] = {1.0, 1.0};
  coincident["grid"] = {{"t", {1.0, 2.0}}};
  CHECK(run("spectral-flow", coincident).exit_code == kConfigError);

  json wrong_model = ado_config({0.3, 0.4, 0.5}, {0.0});
  wrong_model["grid"] = {{"t", {1.0}}};
  CHECK(run("spectral-flow", wrong_model).exit_code == kConfigError);
  CHECK(run("verify-ekz", ado_config({0.3, 0.4, 0.5}, {0.0, 1.0})).exit_code == kConfigError);
}

TEST_CASE("spectral-flow golden file and quadratic oracle") {
  const std::string fixture = slurp(LZI_SOURCE_DIR "/tests/fixtures/spectral_flow_n1.json");
  const std::string golden = slurp(LZI_SOURCE_DIR "/tests/golden/spectral_flow_n1.csv");
  const auto first = run_command("spectral-flow", fixture);
  REQUIRE(first.exit_code == kPass);
  CHECK(first.output == golden);
  CHECK(run_command("spectral-flow", fixture).output == first.output);

  // Independent check: for n = 1, t (x - e0)(x - e1) = g0^2 (x - e1) + g1^2 (x - e0).
  const double g0 = 1.0, g1 = 0.6, e0 = 0.0, e1 = 1.5;
  const auto rows = parse_csv(golden);
  REQUIRE(rows.front() == std::vector<std::string>{"t", "x_0", "x_1", "E_0", "E_1"});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    REQUIRE(rows[r].size() == 5);
    const double t = cell(rows, r, 0);
    std::vector<double> x{cell(rows, r, 1), cell(rows, r, 2)};
    for (int m = 0; m < 2; ++m) {
      const double e = std::isinf(x[m]) ? 0.0 : g0 * g0 / (x[m] - e0);
      CHECK(std::abs(cell(rows, r, 3 + m) - e) <= 1e-12 * std::max(1.0, std::abs(e)));
    }
    std::sort(x.begin(), x.end());
    if (t == 0.0) {
      CHECK(x[1] == std::numeric_limits<double>::infinity());
      CHECK(std::abs(x[0] - (g0 * g0 * e1 + g1 * g1 * e0) / (g0 * g0 + g1 * g1)) < 1e-12);
      continue;
    }
    const double b = -(t * (e0 + e1) + g0 * g0 + g1 * g1);
    const double c = t * e0 * e1 + g0 * g0 * e1 + g1 * g1 * e0;
    const double disc = std::sqrt(b * b - 4.0 * t * c);
    // Cancellation-free pair of quadratic roots.
    const double q = -0.5 * (b + std::copysign(disc, b));
    std::vector<double> oracle{q / t, c / q};
    std::sort(oracle.begin(), oracle.end());
    for (int m = 0; m < 2; ++m) CHECK(std::abs(x[m] - oracle[m]) <= 1e-12 * std::max(1.0, std::abs(oracle[m])));
  }
}

TEST_CASE("spectral-flow header matches branch count and uses 17 digits") {
  json cfg{{"schema_version", 1},
           {"model", "do"},
           {"params", {{"gamma", {1.0, 0.5, 0.8, 0.3}}, {"epsilon", {0.0, -1.0, 2.0, 0.5}}}},
           {"grid", {{"t_min", -2.0}, {"t_max", 2.0}, {"count", 5}}}};
  const auto r = run("spectral-flow", cfg);
  REQUIRE(r.exit_code == kPass);
  const auto rows = parse_csv(r.output);
  CHECK(rows.front().size() == 1 + 2 * 4);
  CHECK(rows.front().back() == "E_3");
  CHECK(rows.size() == 6);
  CHECK(r.output.find('\r') == std::string::npos);

  cfg["grid"] = {{"t", {0.1}}};
  CHECK(parse_csv(run("spectral-flow", cfg).output).at(1).at(0) == "0.10000000000000001");

  cfg["grid"] = {{"t", {1.0, 0.5}}};
  CHECK(run("spectral-flow", cfg).exit_code == kConfigError);
}

TEST_CASE("verify-integrals") {
  SUBCASE("parallel ADO passes") {
    const auto r = run("verify-integrals", ado_config({0.3, 0.4, 0.5, 0.2}, {0.0, 1.5}));
    CHECK(r.exit_code == kPass);
    const json report = json::parse(r.output);
    CHECK(report["pass"] == true);
    CHECK(report["max_commutator_defect"].get<double>() <= 1e-12);
    CHECK(report["max_curvature_residual"].get<double>() <= 1e-12);
  }
  SUBCASE("break_parallelism is a negative control") {
    json cfg = ado_config({0.3, 0.4, 0.5, 0.2}, {0.0, 1.5});
    cfg["params"]["break_parallelism"] = 0.1;
    const auto r = run("verify-integrals", cfg);
    CHECK(r.exit_code == kVerificationFailed);
    const json report = json::parse(r.output);
    CHECK(report["pass"] == false);
    CHECK(report["max_commutator_defect"].get<double>() > 1e-4);
  }
  SUBCASE("N = 3 Richardson with lambda = 0.5 passes") {
    json cfg{{"schema_version", 1}, {"seed", 5}, {"richardson", {{"sites", 3}, {"lambda", 0.5}}}};
    const auto r = run("verify-integrals", cfg);
    CHECK(r.exit_code == kPass);
    CHECK(json::parse(r.output)["suites"][0]["samples"] == 20);
    CHECK(run("verify-integrals", cfg).output == r.output);

    cfg["richardson"]["w"] = {0.0, 0.0, 1.0};
    CHECK(run("verify-integrals", cfg).exit_code == kConfigError);
  }
  SUBCASE("nothing to verify") {
    CHECK(run("verify-integrals", json{{"schema_version", 1}}).exit_code == kConfigError);
  }
}

TEST_CASE("verify-ekz and the tolerance override") {
  json cfg = ado_config({0.5, -0.3, 0.6, 0.4}, {-1.0, 0.7});
  cfg["verification"] = {{"samples", 20}};
  const auto r = run("verify-ekz", cfg);
  CHECK(r.exit_code == kPass);
  CHECK(json::parse(r.output)["max_residual_omega"].get<double>() < 1e-6);
  CHECK(run("verify-ekz", cfg).output == r.output);

  Overrides strict;
  strict.tolerance = 1e-13;
  CHECK(run("verify-ekz", cfg, strict).exit_code == kVerificationFailed);
  Overrides other_seed;
  other_seed.seed = 99;
  CHECK(run("verify-ekz", cfg, other_seed).output != r.output);
}

TEST_CASE("evolve") {
  SUBCASE("zero coupling keeps populations 1/0") {
    json cfg = ado_config({1.0, 0.0, 0.0}, {0.0});
    cfg["initial"] = 2;
    cfg["grid"] = {{"t_min", -5.0}, {"t_max", 5.0}, {"count", 6}};
    const auto r = run("evolve", cfg);
    REQUIRE(r.exit_code == kPass);
    const auto rows = parse_csv(r.output);
    CHECK(rows.front().size() == 2 + 3);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      CHECK(cell(rows, k, 2) == 0.0);
      CHECK(cell(rows, k, 3) == 0.0);
      CHECK(std::abs(cell(rows, k, 4) - 1.0) < 1e-12);
    }
  }
  SUBCASE("oracle and closed form agree for n = 2") {
    json cfg = ado_config({0.3, 0.4, 0.5}, {0.0});
    cfg["engine"] = "both";
    cfg["grid"] = {{"t", {-60.0, -20.0, 0.0, 20.0, 60.0}}};
    const auto r = run("evolve", cfg);
    CHECK(r.exit_code == kPass);
    const auto rows = parse_csv(r.output);
    CHECK(rows.front().size() == 2 * (2 + 3));
    CHECK(rows.front().back() == "delta");
    for (std::size_t k = 1; k < rows.size(); ++k) CHECK(cell(rows, k, 9) < 1e-2);

    Overrides strict;
    strict.tolerance = 1e-6;
    CHECK(run("evolve", cfg, strict).exit_code == kVerificationFailed);
  }
  SUBCASE("closed form is restricted to parallel n = 2 from the bright state") {
    json cfg = ado_config({0.3, 0.4, 0.5, 0.2}, {0.0, 1.0});
    cfg["engine"] = "closed-form";
    cfg["grid"] = {{"t", {-10.0, 0.0}}};
    CHECK(run("evolve", cfg).exit_code == kConfigError);
    json broken = ado_config({0.3, 0.4, 0.5}, {0.0});
    broken["engine"] = "closed-form";
    broken["grid"] = cfg["grid"];
    broken["params"]["break_parallelism"] = 0.1;
    CHECK(run("evolve", broken).exit_code == kConfigError);
    broken["params"].erase("break_parallelism");
    broken["initial"] = 0;
    CHECK(run("evolve", broken).exit_code == kConfigError);
  }
}

TEST_CASE("lz-probability rows") {
  json cfg{{"schema_version", 1},
           {"sweep", {{"gamma", {{0.3, 0.4, 0.0}, {0.3, 0.4, 0.5}}}}},
           {"propagation", {{"T", 40.0}}}};
  const auto r = run("lz-probability", cfg);
  const auto rows = parse_csv(r.output);
  REQUIRE(rows.size() == 3);
  CHECK(rows.front() == std::vector<std::string>{"gamma0", "gamma1", "gamma2", "P_formula", "P_oracle", "abs_delta"});
  CHECK(rows[1][3] == "1");
  CHECK(std::abs(cell(rows, 1, 4) - 1.0) < 1e-6);
  CHECK(cell(rows, 2, 3) == doctest::Approx(0.675232).epsilon(1e-6));
  CHECK(r.exit_code == (cell(rows, 2, 5) > 1e-2 ? kVerificationFailed : kPass));

  json grid{{"schema_version", 1},
            {"sweep",
             {{"gamma0", {0.3}},
              {"gamma1", {{"min", 0.4}, {"max", 0.5}, {"count", 2}}},
              {"gamma2", json::array({0.0})}}},
            {"propagation", {{"T", 20.0}}}};
  CHECK(parse_csv(run("lz-probability", grid).output).size() == 3);
}

TEST_CASE("closed-form and transition-matrix") {
  json cfg = ado_config({0.3, 0.4, 0.5}, {0.0});
  cfg["grid"] = {{"omega", {-1.0, 0.5}}};
  const auto r = run("closed-form", cfg);
  CHECK(r.exit_code == kPass);
  CHECK(parse_csv(r.output).front().size() == 6);
  cfg["grid"] = {{"omega", {0.0}}};
  CHECK(run("closed-form", cfg).exit_code == kNumericalError);
  cfg["branch"] = 2;
  CHECK(run("closed-form", cfg).exit_code == kConfigError);

  json tm{{"schema_version", 1},
          {"model", "bow-tie"},
          {"params", {{"gamma", {1.0, 0.5}}, {"epsilon", {0.0, 1.0}}, {"r", {0.5}}}},
          {"propagation", {{"T", 20.0}}}};
  const auto t = run("transition-matrix", tm);
  REQUIRE(t.exit_code == kPass);
  const auto rows = parse_csv(t.output);
  CHECK(rows.size() == 1 + 4);
  for (int i = 0; i < 2; ++i) {
    double column = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) {
      if (cell(rows, k, 0) == i) column += cell(rows, k, 3);
    }
    CHECK(std::abs(column - 1.0) < 1e-8);
  }
}
