#pragma once

#include "crfeff/characterize.hpp"
#include "crfeff/creinstein.hpp"
#include "crfeff/gallery.hpp"
#include "crfeff/report.hpp"

namespace crfeff {

struct RunConfig {
  std::string gallery;    // gallery name, or
  std::string spec_path;  // geometry file path
  std::string suite = "all";  // webster | cr-einstein | fefferman | characterize | scales | all
  int points = 50;
  std::uint64_t seed = 0;
  int order = 0;  // 0 = per-suite defaults; otherwise caps the solve order
  std::map<std::string, double> tol;  // per-suite tolerance overrides
  std::string format = "human";       // human | structured
  int workers = 1;
};

/// Run the selected verification suites over sampled points.
VerificationReport run_suites(const CRGeometry& g, const RunConfig& cfg);

/// Convenience wrapper used by the CLI: resolves the geometry, runs, and
/// renders.  Throws on input errors; numeric failures propagate.
VerificationReport run_config(const RunConfig& cfg);

}  // namespace crfeff
