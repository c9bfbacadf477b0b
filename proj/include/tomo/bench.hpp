#pragma once

#include <optional>
#include <string>

#include "tomo/solver.hpp"

namespace tomo {

struct RunConfig {
  int n = 128;
  int d = 1;
  Preset preset = Preset::digits6;
  BackendKind backend = BackendKind::fused;
  int r = 1;  // surrogate radius
  double alpha = 1.0;
  double lambda = 1.0;
  int iters = 200;
  int cg_steps = 5;
  double tol = 1e-8;
  bool feedback = false;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string cache_dir = "cache";
  std::string output_dir = "out";

  void validate() const;
  std::string describe() const;    // canonical key=value line
  std::string config_hash() const; // FNV-1a of describe()
  SolverConfig solver_config() const;
};

/// Assembled operator set for one run configuration, with disk caching of
/// the sparse operators keyed by the config metadata.
struct RunSetup {
  std::shared_ptr<const SliceTransform> transform;
  NormalBackend backend;
  Image phantom;
  ComplexVector data;
};

/// Builds (or loads from cache) everything a run needs. `log` receives one
/// line per cache event.
RunSetup prepare_run(const RunConfig& config, std::ostream* log = nullptr);

/// Builds and caches the sparse operators for the config; returns the paths.
std::vector<std::string> precompute(const RunConfig& config, std::ostream* log = nullptr);

struct RunSummary {
  RunConfig config;
  int iterations = 0;
  double total_s = 0.0;
  double cg_s = 0.0;
  double final_rel_l1 = 0.0;
  std::string stopping_reason;
  // Threshold crossings of update_l1 relative to the first update:
  // {1e-2, 1e-4, 1e-6, 1e-8} -> (iteration, seconds); -1 if never reached.
  std::vector<std::pair<int, double>> threshold_crossings;
};

RunSummary summarize(const RunConfig& config, const SolveTrace& trace);

/// Full reconstruction pipeline: phantom -> data -> solve -> image + trace
/// CSV + JSON-lines summary under config.output_dir.
RunSummary run_reconstruct(const RunConfig& config, std::ostream* log = nullptr);

void append_summary_jsonl(const RunSummary& summary, const std::string& path);

/// Benchmark suites (desk: n in {64,128}; paper: n in {128,256,512}).
/// Writes one CSV per suite under config.output_dir; returns false if any
/// row failed.
bool run_bench_suite(const std::string& suite, const std::string& scale,
                     const RunConfig& base, std::ostream& log);

}  // namespace tomo
