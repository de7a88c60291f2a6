#pragma once

#include <stdexcept>
#include <string>

#include "cotrack/sim.hpp"

namespace cotrack {

struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// The built-in four-follower demonstration scenario.
ScenarioConfig builtin_scenario(const std::string& name);  // throws ParseError

/// Parse a JSON scenario file. Collects every malformed or invariant-violating
/// field (with its path) into a single ValidationError.
ScenarioConfig load_config(const std::string& path);

/// Inverse of load_config for round-trip checks and manifest hashing.
std::string dump_config(const ScenarioConfig& cfg);

}  // namespace cotrack
