#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "cotrack/sim.hpp"

namespace cotrack {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct RunManifest {
  std::string scenario;
  std::string config_hash;  // stable across reruns of an identical config
  unsigned seed = 0;
  std::string tool_version;
  std::vector<std::string> outputs;
};

/// FNV-1a over the canonical config dump.
std::string config_hash(const std::string& canonical_dump);

/// One row per recorded time: t, per-node err_eta/err_omega/err_E(/err_track),
/// then V and the per-node V_i. 12 significant digits, newline-terminated.
void emit_csv(const SimResult& result, const std::string& path);

/// One SVG per error family (eta, omega, E, and tracking when present), plus a
/// log-scale variant of the eta plot for rate inspection.
std::vector<std::string> emit_plots(const SimResult& result,
                                    const std::string& path_prefix);

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace cotrack
