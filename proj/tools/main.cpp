// Command-line frontend: synthetic data generation, measured-data
// preprocessing, single reconstructions, grid-search sweeps, evaluation,
// and rendering. Exit codes: 0 success, 1 usage/config error, 2 runtime
// failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "pmace/array_io.hpp"
#include "pmace/experiment.hpp"
#include "pmace/preprocess.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pmace;

namespace {

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
}

struct SimulateArgs {
  std::string config_path;
  std::string out_dir = "sim_out";
  uint64_t seed = 0;
  int image_size = 256;
  int probe_size = 64;
  int spacing = 16;
  int jitter = 2;
  std::string phantom_kind = "smooth";
  std::string probe_kind = "disk";
  double peak_rate = 1e4;
  double dark = 0.5;
  bool noiseless = false;
  std::string phantom_magnitude_file, phantom_phase_file, probe_file;
};

int cmd_simulate(const SimulateArgs& args) {
  PhantomSpec phantom_spec;
  ProbeSpec probe_spec;
  int image_size = args.image_size;
  int probe_size = args.probe_size;
  if (!args.config_path.empty()) {
    ExperimentConfig cfg = ExperimentConfig::from_json_file(args.config_path);
    phantom_spec = cfg.phantom;
    probe_spec = cfg.probe;
    image_size = cfg.image_size;
    probe_size = cfg.probe_size;
  }
  phantom_spec.kind = args.phantom_kind;
  phantom_spec.seed = args.seed;
  probe_spec.kind = args.probe_kind;
  probe_spec.seed = args.seed;

  fs::create_directories(args.out_dir);

  ComplexImage truth;
  if (!args.phantom_magnitude_file.empty()) {
    // imported pair: magnitude file + phase file
    RealImage mag = read_real_image(args.phantom_magnitude_file);
    RealImage ph = read_real_image(args.phantom_phase_file);
    truth = compose_complex(mag, ph);
    image_size = truth.rows();
  } else {
    truth = generate_phantom(image_size, image_size, phantom_spec);
  }

  Probe probe = args.probe_file.empty()
                    ? generate_probe(probe_size, probe_spec)
                    : Probe(read_complex_image(args.probe_file));

  ScanPattern scan = generate_scan_pattern(truth.rows(), truth.cols(), probe.rows(),
                                           args.spacing, args.jitter, args.seed);
  NoiseConfig noise{args.peak_rate, args.dark, args.seed, args.noiseless};
  MeasurementSet y = simulate_measurements(truth, probe, scan, noise);

  fs::path out(args.out_dir);
  write_array(out / "ground_truth.arrf", truth);
  write_array(out / "probe.arrf", probe.field());
  write_scan_json(out / "scan.json", scan);
  write_array(out / "measurements.arrf", y.amplitudes);

  json meta;
  meta["seed"] = args.seed;
  meta["image_size"] = image_size;
  meta["probe_size"] = probe.rows();
  meta["spacing"] = args.spacing;
  meta["jitter"] = args.jitter;
  meta["phantom_kind"] = phantom_spec.kind;
  meta["probe_kind"] = probe_spec.kind;
  meta["noise"] = {{"peak_rate", noise.peak_rate},
                   {"dark_current", noise.dark_current},
                   {"noiseless", noise.noiseless}};
  meta["overlap_ratio"] = overlap_ratio(probe, scan);
  meta["version"] = kVersion;
  write_text_file(out / "simulate_meta.json", meta.dump(2) + "\n");

  std::printf("simulated %d measurements (overlap ratio %.4f) into %s\n", scan.count(),
              meta["overlap_ratio"].get<double>(), args.out_dir.c_str());
  return 0;
}

struct ReconstructArgs {
  std::string data_dir;
  std::string measurements, probe, scan, truth;
  std::string method = "pmace";
  double tunable = 0.5;
  int iterations = 100;
  double kappa = 1.5;
  double rho = 0.5;
  double residual_tol = 0.0;
  std::string out_dir = "recon_out";
};

int cmd_reconstruct(const ReconstructArgs& args) {
  fs::path meas_path = args.measurements, probe_path = args.probe, scan_path = args.scan;
  fs::path truth_path = args.truth;
  if (!args.data_dir.empty()) {
    fs::path d(args.data_dir);
    if (meas_path.empty()) meas_path = d / "measurements.arrf";
    if (probe_path.empty()) probe_path = d / "probe.arrf";
    if (scan_path.empty()) scan_path = d / "scan.json";
    if (truth_path.empty() && fs::exists(d / "ground_truth.arrf"))
      truth_path = d / "ground_truth.arrf";
  }
  if (meas_path.empty() || probe_path.empty() || scan_path.empty())
    throw ConfigError("reconstruct: need --data or all of --measurements/--probe/--scan");

  MeasurementSet y;
  y.amplitudes = read_real_stack(meas_path);
  Probe probe(read_complex_image(probe_path));
  ScanPattern scan = read_scan_json(scan_path);
  ComplexImage truth;
  bool have_truth = !truth_path.empty();
  if (have_truth) truth = read_complex_image(truth_path);

  ReconstructionResult result;
  if (args.method == "pmace") {
    PmaceConfig cfg;
    cfg.alpha = args.tunable;
    cfg.kappa = args.kappa;
    cfg.rho = args.rho;
    cfg.max_iters = args.iterations;
    cfg.residual_tol = args.residual_tol;
    result = pmace_reconstruct(y, probe, scan, cfg, have_truth ? &truth : nullptr);
  } else {
    BaselineConfig cfg;
    cfg.method = args.method;
    cfg.tunable = args.tunable;
    cfg.max_iters = args.iterations;
    result = baseline_reconstruct(y, probe, scan, cfg, have_truth ? &truth : nullptr);
  }

  fs::create_directories(args.out_dir);
  fs::path out(args.out_dir);
  write_array(out / "reconstruction.arrf", result.image);
  write_trace_csv(out / "trace.csv", result.trace);

  json meta;
  meta["method"] = result.method;
  meta["params"] = result.params;
  meta["iterations_run"] = result.iterations_run;
  meta["inputs"] = {{"measurements", meas_path.string()},
                    {"probe", probe_path.string()},
                    {"scan", scan_path.string()}};
  meta["version"] = kVersion;
  if (have_truth) {
    double nrmse = aligned_nrmse_masked(result.image, truth, illuminated_support(probe, scan));
    meta["final_nrmse"] = nrmse;
    std::printf("%s: %d iterations, aligned NRMSE %.6f\n", result.method.c_str(),
                result.iterations_run, nrmse);
  } else {
    std::printf("%s: %d iterations\n", result.method.c_str(), result.iterations_run);
  }
  write_text_file(out / "metadata.json", meta.dump(2) + "\n");
  return 0;
}

struct PreprocessArgs {
  std::string raw, dark;
  int crop = 512;
  double window_shape = 0.5;
  std::string out = "measurements.arrf";
  std::string report_path;
};

int cmd_preprocess(const PreprocessArgs& args) {
  std::vector<RealImage> raw = read_real_stack(args.raw);
  std::vector<RealImage> dark;
  if (!args.dark.empty()) dark = read_real_stack(args.dark);

  PreprocessReport report;
  MeasurementSet y = preprocess_measured(raw, dark, args.crop, args.window_shape, &report);
  write_array(args.out, y.amplitudes);

  json j;
  j["frames"] = raw.size();
  j["dark_frames"] = dark.size();
  j["crop"] = args.crop;
  j["window_shape"] = args.window_shape;
  j["deviation_scores"] = report.deviation_scores;
  j["flagged_frames"] = report.flagged_frames;
  j["flag_threshold"] = report.threshold;
  j["version"] = kVersion;
  if (!args.report_path.empty()) write_text_file(args.report_path, j.dump(2) + "\n");
  std::printf("preprocessed %zu frames; %zu flagged as abnormal\n", raw.size(),
              report.flagged_frames.size());
  for (int f : report.flagged_frames) std::printf("  flagged frame %d\n", f);
  return 0;
}

struct EvaluateArgs {
  std::string recon, truth;
  std::string measurements, probe, scan;
  bool raw_amplitudes = false;
  std::vector<int> crop;  // row0 col0 rows cols
  std::string out;
};

int cmd_evaluate(const EvaluateArgs& args) {
  json j;
  if (!args.truth.empty()) {
    ComplexImage xhat = read_complex_image(args.recon);
    ComplexImage truth = read_complex_image(args.truth);
    std::optional<CropRegion> region;
    if (!args.crop.empty()) {
      if (args.crop.size() != 4) throw ConfigError("evaluate: --crop needs row0 col0 rows cols");
      region = CropRegion{args.crop[0], args.crop[1], args.crop[2], args.crop[3]};
    }
    j["aligned_nrmse"] = aligned_nrmse(xhat, truth, region);
  }
  if (!args.measurements.empty()) {
    if (args.probe.empty() || args.scan.empty())
      throw ConfigError("evaluate: forward NRMSE needs --probe and --scan");
    ComplexImage xhat = read_complex_image(args.recon);
    MeasurementSet y;
    y.amplitudes = read_real_stack(args.measurements);
    Probe probe(read_complex_image(args.probe));
    ScanPattern scan = read_scan_json(args.scan);
    j["forward_nrmse"] = forward_nrmse(xhat, y, probe, scan, !args.raw_amplitudes);
    j["normalized_model"] = !args.raw_amplitudes;
  }
  if (j.empty()) throw ConfigError("evaluate: nothing to evaluate (need --truth or --measurements)");
  std::string text = j.dump(2) + "\n";
  if (!args.out.empty())
    write_text_file(args.out, text);
  else
    std::printf("%s", text.c_str());
  return 0;
}

struct RenderArgs {
  std::string recon, truth;
  std::string out_dir = "render_out";
  std::vector<double> phase_limits, magnitude_limits;
  std::vector<int> align_rect;
};

int cmd_render(const RenderArgs& args) {
  ReconstructionResult result;
  result.image = read_complex_image(args.recon);
  result.method = "file";

  ComplexImage truth;
  bool have_truth = !args.truth.empty();
  if (have_truth) truth = read_complex_image(args.truth);

  RenderOptions opts;
  if (!args.phase_limits.empty()) {
    if (args.phase_limits.size() != 2) throw ConfigError("render: --phase-limits needs lo hi");
    opts.phase_limits = {args.phase_limits[0], args.phase_limits[1]};
  }
  if (!args.magnitude_limits.empty()) {
    if (args.magnitude_limits.size() != 2)
      throw ConfigError("render: --magnitude-limits needs lo hi");
    opts.magnitude_limits = {args.magnitude_limits[0], args.magnitude_limits[1]};
  }
  if (!args.align_rect.empty()) {
    if (args.align_rect.size() != 4)
      throw ConfigError("render: --align-rect needs row0 col0 rows cols");
    opts.phase_align_rect = CropRegion{args.align_rect[0], args.align_rect[1],
                                       args.align_rect[2], args.align_rect[3]};
  }
  render_outputs(result, have_truth ? &truth : nullptr, args.out_dir, opts);
  std::printf("rendered into %s\n", args.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PMACE ptychographic reconstruction toolkit"};
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread count (default: OMP_NUM_THREADS)");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
  sim_cmd->add_option("--config", sim.config_path, "Experiment JSON for phantom/probe specs");
  sim_cmd->add_option("--out", sim.out_dir, "Output directory");
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--image-size", sim.image_size, "Phantom side length");
  sim_cmd->add_option("--probe-size", sim.probe_size, "Probe side length");
  sim_cmd->add_option("--spacing", sim.spacing, "Nominal grid spacing in pixels");
  sim_cmd->add_option("--jitter", sim.jitter, "Max uniform grid perturbation in pixels");
  sim_cmd->add_option("--phantom-kind", sim.phantom_kind, "smooth | blobs | constant");
  sim_cmd->add_option("--probe-kind", sim.probe_kind, "disk | gaussian");
  sim_cmd->add_option("--peak-rate", sim.peak_rate, "Peak photon rate r_p");
  sim_cmd->add_option("--dark", sim.dark, "Mean dark current");
  sim_cmd->add_flag("--noiseless", sim.noiseless, "Skip Poisson sampling");
  sim_cmd->add_option("--phantom-magnitude", sim.phantom_magnitude_file,
                      "Import phantom magnitude from an array file");
  sim_cmd->add_option("--phantom-phase", sim.phantom_phase_file,
                      "Import phantom phase from an array file");
  sim_cmd->add_option("--probe-file", sim.probe_file, "Import probe from an array file");

  ReconstructArgs rec;
  auto* rec_cmd = app.add_subcommand("reconstruct", "Run one reconstruction");
  rec_cmd->add_option("--data", rec.data_dir, "Directory produced by simulate");
  rec_cmd->add_option("--measurements", rec.measurements, "Amplitude stack (.arrf)");
  rec_cmd->add_option("--probe", rec.probe, "Probe field (.arrf)");
  rec_cmd->add_option("--scan", rec.scan, "Scan pattern (.json)");
  rec_cmd->add_option("--truth", rec.truth, "Ground truth for NRMSE tracing (.arrf)");
  rec_cmd->add_option("--method", rec.method, "pmace | epie | awf | sharp");
  rec_cmd->add_option("--tunable,--alpha", rec.tunable,
                      "Method tunable: pmace alpha / epie step / awf scale / sharp beta");
  rec_cmd->add_option("--iterations", rec.iterations, "Iteration budget");
  rec_cmd->add_option("--kappa", rec.kappa, "PMACE probe-weight exponent");
  rec_cmd->add_option("--rho", rec.rho, "PMACE Mann parameter");
  rec_cmd->add_option("--residual-tol", rec.residual_tol, "Early-stop update tolerance");
  rec_cmd->add_option("--out", rec.out_dir, "Output directory");

  PreprocessArgs pre;
  auto* pre_cmd = app.add_subcommand("preprocess", "Preprocess measured diffraction frames");
  pre_cmd->add_option("--raw", pre.raw, "Raw frame stack (.arrf)")->required();
  pre_cmd->add_option("--dark", pre.dark, "Dark frame stack (.arrf)");
  pre_cmd->add_option("--crop", pre.crop, "Center-crop size");
  pre_cmd->add_option("--window-shape", pre.window_shape, "Tukey shape parameter");
  pre_cmd->add_option("--out", pre.out, "Output amplitude stack (.arrf)");
  pre_cmd->add_option("--report", pre.report_path, "Write outlier report JSON here");

  std::string sweep_config, sweep_out;
  uint64_t sweep_seed = 0;
  bool sweep_seed_set = false;
  auto* sweep_cmd = app.add_subcommand("sweep", "Grid-search sweep over spacings and methods");
  sweep_cmd->add_option("--config", sweep_config, "Experiment JSON")->required();
  sweep_cmd->add_option("--out", sweep_out, "Override the config's output directory");
  sweep_cmd->add_option("--seed", sweep_seed, "Override the config's seed list")
      ->each([&](const std::string&) { sweep_seed_set = true; });

  EvaluateArgs eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Compute reconstruction metrics");
  eval_cmd->add_option("--recon", eval.recon, "Reconstruction (.arrf)")->required();
  eval_cmd->add_option("--truth", eval.truth, "Ground truth (.arrf)");
  eval_cmd->add_option("--measurements", eval.measurements, "Amplitude stack (.arrf)");
  eval_cmd->add_option("--probe", eval.probe, "Probe field (.arrf)");
  eval_cmd->add_option("--scan", eval.scan, "Scan pattern (.json)");
  eval_cmd->add_flag("--raw-amplitudes", eval.raw_amplitudes,
                     "Compare raw model amplitudes (measured-data convention)");
  eval_cmd->add_option("--crop", eval.crop, "Evaluation crop: row0 col0 rows cols")->expected(4);
  eval_cmd->add_option("--out", eval.out, "Write metrics JSON here instead of stdout");

  RenderArgs ren;
  auto* ren_cmd = app.add_subcommand("render", "Render magnitude/phase images");
  ren_cmd->add_option("--recon", ren.recon, "Reconstruction (.arrf)")->required();
  ren_cmd->add_option("--truth", ren.truth, "Ground truth (.arrf)");
  ren_cmd->add_option("--out", ren.out_dir, "Output directory");
  ren_cmd->add_option("--phase-limits", ren.phase_limits, "Phase color scale: lo hi")->expected(2);
  ren_cmd->add_option("--magnitude-limits", ren.magnitude_limits, "Magnitude scale: lo hi")
      ->expected(2);
  ren_cmd->add_option("--align-rect", ren.align_rect,
                      "Zero-mean phase rectangle: row0 col0 rows cols")
      ->expected(4);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    if (*sim_cmd) return cmd_simulate(sim);
    if (*rec_cmd) return cmd_reconstruct(rec);
    if (*pre_cmd) return cmd_preprocess(pre);
    if (*sweep_cmd) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(sweep_config);
      if (!sweep_out.empty()) cfg.output_dir = sweep_out;
      if (sweep_seed_set) cfg.seeds = {sweep_seed};
      ExperimentReport report = run_experiment(cfg);
      int failed = 0;
      for (const auto& cell : report.cells)
        if (!cell.error.empty()) ++failed;
      std::printf("sweep finished: %zu cells, %d with failures; summary at %s\n",
                  report.cells.size(), failed, (cfg.output_dir / "summary.json").c_str());
      return failed == 0 ? 0 : 2;
    }
    if (*eval_cmd) return cmd_evaluate(eval);
    if (*ren_cmd) return cmd_render(ren);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime failure: %s\n", e.what());
    return 2;
  }
  return 1;
}
