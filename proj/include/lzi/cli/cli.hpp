#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lzi/errors.hpp"

namespace lzi::cli {

/// Process exit codes shared by every command.
enum ExitCode : int {
  kPass = 0,
  kVerificationFailed = 1,
  kNumericalError = 2,
  kConfigError = 3,
};

/// Malformed, schema-invalid or incomplete configuration.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Command-line values that take precedence over the configuration file.
struct Overrides {
  std::optional<unsigned long> seed;
  std::optional<double> tolerance;
};

struct CommandResult {
  int exit_code = kPass;
  std::string output;       ///< CSV or JSON document
  std::string diagnostics;  ///< human-readable messages for stderr
};

std::vector<std::string> command_names();

/// Parses `config_json` and runs `command`. Never throws: library and
/// configuration errors are mapped onto exit codes with a diagnostic.
CommandResult run_command(const std::string& command, const std::string& config_json,
                          const Overrides& overrides = {});

}  // namespace lzi::cli
