#include "pmace/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "pmace/array_io.hpp"
#include "pmace/image_io.hpp"

namespace pmace {

using nlohmann::json;

namespace {

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

PhantomSpec phantom_from_json(const json& j) {
  PhantomSpec spec;
  spec.kind = j.value("kind", spec.kind);
  spec.magnitude_min = j.value("magnitude_min", spec.magnitude_min);
  spec.phase_range = j.value("phase_range", spec.phase_range);
  return spec;
}

ProbeSpec probe_from_json(const json& j) {
  ProbeSpec spec;
  spec.kind = j.value("kind", spec.kind);
  spec.radius_frac = j.value("radius_frac", spec.radius_frac);
  spec.defocus = j.value("defocus", spec.defocus);
  spec.phase_strength = j.value("phase_strength", spec.phase_strength);
  return spec;
}

json config_snapshot(const ExperimentConfig& cfg) {
  json j;
  j["image_size"] = cfg.image_size;
  j["phantom"] = {{"kind", cfg.phantom.kind},
                  {"magnitude_min", cfg.phantom.magnitude_min},
                  {"phase_range", cfg.phantom.phase_range}};
  j["probe"] = {{"kind", cfg.probe.kind},
                {"size", cfg.probe_size},
                {"radius_frac", cfg.probe.radius_frac},
                {"defocus", cfg.probe.defocus},
                {"phase_strength", cfg.probe.phase_strength}};
  j["scan"] = {{"spacings", cfg.spacings}, {"jitter", cfg.jitter}};
  j["noise"] = {{"peak_rate", cfg.noise.peak_rate},
                {"dark_current", cfg.noise.dark_current},
                {"noiseless", cfg.noise.noiseless}};
  json methods = json::object();
  for (const auto& m : cfg.methods) methods[m.name] = m.grid;
  j["methods"] = methods;
  j["iterations"] = cfg.iterations;
  j["seeds"] = cfg.seeds;
  j["kappa"] = cfg.kappa;
  j["rho"] = cfg.rho;
  j["version"] = kVersion;
  return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<double> default_grid(const std::string& method) {
  if (method == "pmace" || method == "sharp")
    return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  if (method == "epie") return {0.25, 0.5, 1.0, 2.0};
  if (method == "awf") return {0.2, 0.356, 0.632, 1.125, 2.0};
  throw ConfigError("default_grid: unknown method '" + method + "'");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.image_size = j.value("image_size", cfg.image_size);
  if (j.contains("phantom")) cfg.phantom = phantom_from_json(j["phantom"]);
  if (j.contains("probe")) {
    cfg.probe = probe_from_json(j["probe"]);
    cfg.probe_size = j["probe"].value("size", cfg.probe_size);
  }
  if (j.contains("scan")) {
    const json& s = j["scan"];
    if (s.contains("spacings"))
      cfg.spacings = s["spacings"].get<std::vector<int>>();
    else if (s.contains("spacing"))
      cfg.spacings = {s["spacing"].get<int>()};
    cfg.jitter = s.value("jitter", cfg.jitter);
  }
  if (j.contains("noise")) {
    const json& n = j["noise"];
    cfg.noise.peak_rate = n.value("peak_rate", cfg.noise.peak_rate);
    cfg.noise.dark_current = n.value("dark_current", cfg.noise.dark_current);
    cfg.noise.noiseless = n.value("noiseless", cfg.noise.noiseless);
  }
  if (j.contains("methods")) {
    for (const auto& [name, value] : j["methods"].items()) {
      MethodPlan plan;
      plan.name = name;
      if (value.is_object() && value.contains("grid"))
        plan.grid = value["grid"].get<std::vector<double>>();
      else if (value.is_array())
        plan.grid = value.get<std::vector<double>>();
      if (plan.grid.empty()) plan.grid = default_grid(name);
      cfg.methods.push_back(std::move(plan));
    }
  }
  cfg.iterations = j.value("iterations", cfg.iterations);
  if (j.contains("seeds"))
    cfg.seeds = j["seeds"].get<std::vector<uint64_t>>();
  else if (j.contains("seed"))
    cfg.seeds = {j["seed"].get<uint64_t>()};
  cfg.kappa = j.value("kappa", cfg.kappa);
  cfg.rho = j.value("rho", cfg.rho);
  if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();

  if (cfg.methods.empty()) throw ConfigError("config: at least one method is required");
  if (cfg.spacings.empty()) throw ConfigError("config: at least one spacing is required");
  if (cfg.seeds.empty()) throw ConfigError("config: at least one seed is required");
  if (cfg.iterations <= 0) throw ConfigError("config: iterations must be positive");
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

namespace {

ReconstructionResult run_method(const std::string& method, double tunable,
                                const ExperimentConfig& cfg, const MeasurementSet& y,
                                const Probe& probe, const ScanPattern& scan,
                                const ComplexImage& truth, uint64_t seed) {
  if (method == "pmace") {
    PmaceConfig pc;
    pc.alpha = tunable;
    pc.kappa = cfg.kappa;
    pc.rho = cfg.rho;
    pc.max_iters = cfg.iterations;
    pc.residual_tol = 0.0;  // fixed-budget protocol
    pc.seed = seed;
    return pmace_reconstruct(y, probe, scan, pc, &truth);
  }
  BaselineConfig bc;
  bc.method = method;
  bc.tunable = tunable;
  bc.max_iters = cfg.iterations;
  bc.seed = seed;
  return baseline_reconstruct(y, probe, scan, bc, &truth);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  ExperimentReport report;
  if (cfg.write_artifacts) fs::create_directories(cfg.output_dir);

  Probe probe = generate_probe(cfg.probe_size, cfg.probe);

  for (uint64_t seed : cfg.seeds) {
    PhantomSpec phantom_spec = cfg.phantom;
    phantom_spec.seed = seed;
    ComplexImage truth = generate_phantom(cfg.image_size, cfg.image_size, phantom_spec);

    for (int spacing : cfg.spacings) {
      ScanPattern scan = generate_scan_pattern(cfg.image_size, cfg.image_size,
                                               cfg.probe_size, spacing, cfg.jitter, seed);
      double overlap = overlap_ratio(probe, scan);
      NoiseConfig noise = cfg.noise;
      noise.seed = seed;
      MeasurementSet y = simulate_measurements(truth, probe, scan, noise);

      for (const auto& plan : cfg.methods) {
        SweepCell cell;
        cell.spacing = spacing;
        cell.seed = seed;
        cell.method = plan.name;
        cell.overlap_ratio = overlap;
        double best = std::numeric_limits<double>::infinity();
        for (double tunable : plan.grid) {
          std::string key = format_value(tunable);
          try {
            ReconstructionResult result =
                run_method(plan.name, tunable, cfg, y, probe, scan, truth, seed);
            double nrmse =
                aligned_nrmse_masked(result.image, truth, illuminated_support(probe, scan));
            cell.grid_nrmse[key] = nrmse;
            if (nrmse < best) {
              best = nrmse;
              cell.best_tunable = tunable;
              cell.final_nrmse = nrmse;
            }
            if (cfg.write_artifacts) {
              fs::path run_dir = cfg.output_dir /
                                 ("spacing_" + std::to_string(spacing)) /
                                 ("seed_" + std::to_string(seed)) / plan.name /
                                 ("tunable_" + key);
              fs::create_directories(run_dir);
              write_array(run_dir / "reconstruction.arrf", result.image);
              write_trace_csv(run_dir / "trace.csv", result.trace);
              json meta;
              meta["method"] = result.method;
              meta["params"] = result.params;
              meta["tunable"] = tunable;
              meta["seed"] = seed;
              meta["spacing"] = spacing;
              meta["overlap_ratio"] = overlap;
              meta["final_nrmse"] = nrmse;
              meta["iterations_run"] = result.iterations_run;
              meta["version"] = kVersion;
              write_text(run_dir / "metadata.json", meta.dump(2) + "\n");
            }
          } catch (const Error& e) {
            cell.grid_nrmse[key] = std::numeric_limits<double>::quiet_NaN();
            cell.error += (cell.error.empty() ? "" : "; ") + key + ": " + e.what();
          }
        }
        if (!std::isfinite(best)) {
          cell.final_nrmse = std::numeric_limits<double>::quiet_NaN();
          cell.best_tunable = std::numeric_limits<double>::quiet_NaN();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  // summary: one record per cell plus seed-averaged NRMSE per spacing/method
  json summary;
  summary["config"] = config_snapshot(cfg);
  json cells = json::array();
  for (const auto& cell : report.cells) {
    json c;
    c["spacing"] = cell.spacing;
    c["seed"] = cell.seed;
    c["method"] = cell.method;
    c["overlap_ratio"] = cell.overlap_ratio;
    if (std::isfinite(cell.final_nrmse)) {
      c["best_tunable"] = cell.best_tunable;
      c["final_nrmse"] = cell.final_nrmse;
    }
    json grid = json::object();
    for (const auto& [key, value] : cell.grid_nrmse) {
      if (std::isfinite(value))
        grid[key] = value;
      else
        grid[key] = nullptr;
    }
    c["grid_nrmse"] = grid;
    if (!cell.error.empty()) c["error"] = cell.error;
    cells.push_back(c);
  }
  summary["cells"] = cells;

  json means = json::object();
  for (int spacing : cfg.spacings) {
    json per_method = json::object();
    for (const auto& plan : cfg.methods) {
      double sum = 0;
      int n = 0;
      for (const auto& cell : report.cells) {
        if (cell.spacing == spacing && cell.method == plan.name &&
            std::isfinite(cell.final_nrmse)) {
          sum += cell.final_nrmse;
          ++n;
        }
      }
      if (n > 0) per_method[plan.name] = sum / n;
    }
    means[std::to_string(spacing)] = per_method;
  }
  summary["mean_nrmse"] = means;

  report.summary_json = summary.dump(2) + "\n";
  if (cfg.write_artifacts)
    write_text(cfg.output_dir / "summary.json", report.summary_json);
  return report;
}

void render_outputs(const ReconstructionResult& result, const ComplexImage* ground_truth,
                    const std::filesystem::path& out_dir, const RenderOptions& opts) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec && !fs::is_directory(out_dir))
    throw IoError("render_outputs: cannot create '" + out_dir.string() + "'");

  const ComplexImage& image = result.image;
  CropRegion rect;
  if (opts.phase_align_rect) {
    rect = *opts.phase_align_rect;
  } else {
    rect = {image.rows() / 4, image.cols() / 4,
            std::max(1, image.rows() / 2), std::max(1, image.cols() / 2)};
  }

  // zero-mean phase (circular mean over the alignment rectangle)
  Complex dir = 0;
  for (int r = rect.row0; r < rect.row0 + rect.rows; ++r)
    for (int c = rect.col0; c < rect.col0 + rect.cols; ++c) {
      double mag = std::abs(image(r, c));
      if (mag > 0) dir += image(r, c) / mag;
    }
  double mean_phase = std::abs(dir) > 0 ? std::arg(dir) : 0.0;
  ComplexImage aligned = std::polar(1.0, -mean_phase) * image;

  RealImage mag = magnitude(aligned);
  double mag_lo = 0, mag_hi = 0;
  if (opts.magnitude_limits) {
    std::tie(mag_lo, mag_hi) = *opts.magnitude_limits;
  } else {
    for (size_t i = 0; i < mag.size(); ++i) mag_hi = std::max(mag_hi, mag[i]);
    if (mag_hi <= 0) mag_hi = 1.0;
  }
  write_png_gray(out_dir / "magnitude.png", mag, mag_lo, mag_hi);

  double ph_lo = -M_PI, ph_hi = M_PI;
  if (opts.phase_limits) std::tie(ph_lo, ph_hi) = *opts.phase_limits;
  write_png_gray(out_dir / "phase.png", phase(aligned), ph_lo, ph_hi);

  write_trace_csv(out_dir / "trace.csv", result.trace);

  json meta;
  meta["method"] = result.method;
  meta["params"] = result.params;
  meta["iterations_run"] = result.iterations_run;
  meta["magnitude_limits"] = {mag_lo, mag_hi};
  meta["phase_limits"] = {ph_lo, ph_hi};
  meta["phase_align_rect"] = {rect.row0, rect.col0, rect.rows, rect.cols};
  meta["phase_shift_applied"] = -mean_phase;
  meta["version"] = kVersion;

  if (ground_truth) {
    if (!ground_truth->same_shape(image))
      throw ShapeError("render_outputs: ground truth shape mismatch");
    double nrmse = aligned_nrmse(image, *ground_truth);
    meta["nrmse"] = nrmse;
    // error magnitude |c xhat - x| with the NRMSE-optimal alignment factor
    Complex dot = inner(image, *ground_truth);
    double denom = norm2_sq(image);
    Complex c_opt = denom > 0 ? dot / denom : Complex(0.0);
    RealImage err(image.rows(), image.cols());
    double err_hi = 0;
    for (size_t i = 0; i < err.size(); ++i) {
      err[i] = std::abs(c_opt * image[i] - (*ground_truth)[i]);
      err_hi = std::max(err_hi, err[i]);
    }
    write_png_gray(out_dir / "error_magnitude.png", err, 0.0, err_hi > 0 ? err_hi : 1.0);
    meta["error_magnitude_limits"] = {0.0, err_hi > 0 ? err_hi : 1.0};
  }
  write_text(out_dir / "render_meta.json", meta.dump(2) + "\n");
}

void write_scan_json(const std::filesystem::path& path, const ScanPattern& scan) {
  json j;
  j["image_shape"] = {scan.image_rows(), scan.image_cols()};
  j["patch_shape"] = {scan.patch_rows(), scan.patch_cols()};
  json positions = json::array();
  for (const auto& p : scan.positions()) positions.push_back({p.row, p.col});
  j["positions"] = positions;
  if (scan.grid_shape()) j["grid_shape"] = {scan.grid_shape()->first, scan.grid_shape()->second};
  write_text(path, j.dump(2) + "\n");
}

ScanPattern read_scan_json(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("read_scan_json: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw IoError("read_scan_json: " + path.string() + ": " + e.what());
  }
  try {
    std::vector<ScanPoint> positions;
    for (const auto& p : j.at("positions"))
      positions.push_back({p.at(0).get<int>(), p.at(1).get<int>()});
    ScanPattern scan(std::move(positions), j.at("patch_shape").at(0).get<int>(),
                     j.at("patch_shape").at(1).get<int>(),
                     j.at("image_shape").at(0).get<int>(),
                     j.at("image_shape").at(1).get<int>());
    if (j.contains("grid_shape"))
      scan.set_grid_shape(j["grid_shape"].at(0).get<int>(), j["grid_shape"].at(1).get<int>());
    return scan;
  } catch (const json::exception& e) {
    throw IoError("read_scan_json: " + path.string() + ": malformed: " + e.what());
  }
}

}  // namespace pmace
