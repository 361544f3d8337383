#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pmace/baselines.hpp"
#include "pmace/metrics.hpp"
#include "pmace/pmace.hpp"

namespace pmace {

inline constexpr const char* kVersion = "0.1.0";

struct MethodPlan {
  std::string name;          // pmace | epie | awf | sharp
  std::vector<double> grid;  // tunable values to search
};

/// One experiment: synthetic scene, scan spacings to sweep, methods with
/// their tunable grids, iteration budget, and seeds. Loaded from a JSON
/// document; CLI flags override individual fields.
struct ExperimentConfig {
  int image_size = 256;
  PhantomSpec phantom;
  int probe_size = 64;
  ProbeSpec probe;
  std::vector<int> spacings = {16};
  int jitter = 2;
  NoiseConfig noise;
  std::vector<MethodPlan> methods;
  int iterations = 100;
  std::vector<uint64_t> seeds = {0};
  double kappa = 1.5;
  double rho = 0.5;
  std::filesystem::path output_dir = "out";
  bool write_artifacts = true;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::filesystem::path& path);
};

/// Default tunable grids used when a method entry gives none:
/// pmace alpha and sharp beta over {0.1, ..., 0.9}; epie step over
/// {0.25, 0.5, 1.0, 2.0}; awf step scale log-spaced over [0.2, 2].
std::vector<double> default_grid(const std::string& method);

struct SweepCell {
  int spacing = 0;
  uint64_t seed = 0;
  std::string method;
  double overlap_ratio = 0.0;
  double best_tunable = 0.0;
  double final_nrmse = 0.0;
  std::map<std::string, double> grid_nrmse;  // tunable value (formatted) -> nrmse
  std::string error;                         // empty when the cell succeeded
};

struct ExperimentReport {
  std::vector<SweepCell> cells;
  std::string summary_json;  // the exact bytes written to summary.json
};

/// Runs the grid-search sweep: for every seed and spacing, simulates
/// measurements, then for each method searches its tunable grid at the full
/// iteration budget and records the best final NRMSE. Per-run artifacts
/// (reconstruction, trace CSV, metadata) land under output_dir; a failing
/// cell is recorded and does not abort the sweep.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

struct RenderOptions {
  std::optional<std::pair<double, double>> magnitude_limits;  // default [0, max]
  std::optional<std::pair<double, double>> phase_limits;      // default [-pi, pi]
  std::optional<CropRegion> phase_align_rect;  // default: central quarter
};

/// Writes magnitude/phase PNGs (phase shifted to zero circular mean over the
/// alignment rectangle), the trace CSV, error images and NRMSE when ground
/// truth is given, and a sidecar JSON recording the scales used.
void render_outputs(const ReconstructionResult& result, const ComplexImage* ground_truth,
                    const std::filesystem::path& out_dir, const RenderOptions& opts = {});

void write_scan_json(const std::filesystem::path& path, const ScanPattern& scan);
ScanPattern read_scan_json(const std::filesystem::path& path);

}  // namespace pmace
