#pragma once

#include <string>

#include "pullin/config.hpp"

namespace pullin {

/// Runs one CLI command against a validated config, writing artifacts into
/// the config's output directory. Returns the process exit code: 0 on
/// success, 2 when a mathematical check or invariant failed. Usage and
/// config problems throw ConfigError (mapped to exit code 1 by the CLI).
int run_command(const std::string& command, const Config& cfg);

}  // namespace pullin
