// numpy-facing bindings for the core operations.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pmace/array_io.hpp"
#include "pmace/baselines.hpp"
#include "pmace/experiment.hpp"
#include "pmace/metrics.hpp"
#include "pmace/pmace.hpp"
#include "pmace/preprocess.hpp"

namespace py = pybind11;
using namespace pmace;

namespace {

ComplexImage to_image(const py::array_t<std::complex<double>>& arr) {
  if (arr.ndim() != 2) throw ShapeError("expected a 2D complex array");
  auto r = arr.unchecked<2>();
  ComplexImage out(static_cast<int>(r.shape(0)), static_cast<int>(r.shape(1)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    for (py::ssize_t j = 0; j < r.shape(1); ++j)
      out(static_cast<int>(i), static_cast<int>(j)) = r(i, j);
  return out;
}

RealImage to_real(const py::array_t<double>& arr) {
  if (arr.ndim() != 2) throw ShapeError("expected a 2D real array");
  auto r = arr.unchecked<2>();
  RealImage out(static_cast<int>(r.shape(0)), static_cast<int>(r.shape(1)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i)
    for (py::ssize_t j = 0; j < r.shape(1); ++j)
      out(static_cast<int>(i), static_cast<int>(j)) = r(i, j);
  return out;
}

py::array_t<std::complex<double>> from_image(const ComplexImage& img) {
  py::array_t<std::complex<double>> out({img.rows(), img.cols()});
  auto w = out.mutable_unchecked<2>();
  for (int i = 0; i < img.rows(); ++i)
    for (int j = 0; j < img.cols(); ++j) w(i, j) = img(i, j);
  return out;
}

py::array_t<double> from_real(const RealImage& img) {
  py::array_t<double> out({img.rows(), img.cols()});
  auto w = out.mutable_unchecked<2>();
  for (int i = 0; i < img.rows(); ++i)
    for (int j = 0; j < img.cols(); ++j) w(i, j) = img(i, j);
  return out;
}

MeasurementSet to_measurements(const py::array_t<double>& arr) {
  if (arr.ndim() != 3) throw ShapeError("expected a 3D amplitude stack (J, rows, cols)");
  auto r = arr.unchecked<3>();
  MeasurementSet y;
  y.amplitudes.reserve(static_cast<size_t>(r.shape(0)));
  for (py::ssize_t k = 0; k < r.shape(0); ++k) {
    RealImage patch(static_cast<int>(r.shape(1)), static_cast<int>(r.shape(2)));
    for (py::ssize_t i = 0; i < r.shape(1); ++i)
      for (py::ssize_t j = 0; j < r.shape(2); ++j)
        patch(static_cast<int>(i), static_cast<int>(j)) = r(k, i, j);
    y.amplitudes.push_back(std::move(patch));
  }
  return y;
}

py::array_t<double> from_measurements(const MeasurementSet& y) {
  if (y.count() == 0) throw ShapeError("empty measurement set");
  int rows = y.amplitudes.front().rows(), cols = y.amplitudes.front().cols();
  py::array_t<double> out({y.count(), rows, cols});
  auto w = out.mutable_unchecked<3>();
  for (int k = 0; k < y.count(); ++k)
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(k, i, j) = y.amplitudes[k](i, j);
  return out;
}

ScanPattern to_scan(const py::array_t<int>& positions, int patch_size, int image_rows,
                    int image_cols, std::optional<std::pair<int, int>> grid_shape) {
  if (positions.ndim() != 2 || positions.shape(1) != 2)
    throw ShapeError("positions must be a (J, 2) int array");
  auto r = positions.unchecked<2>();
  std::vector<ScanPoint> pts;
  pts.reserve(static_cast<size_t>(r.shape(0)));
  for (py::ssize_t i = 0; i < r.shape(0); ++i) pts.push_back({r(i, 0), r(i, 1)});
  ScanPattern scan(std::move(pts), patch_size, patch_size, image_rows, image_cols);
  if (grid_shape) scan.set_grid_shape(grid_shape->first, grid_shape->second);
  return scan;
}

py::dict result_to_dict(const ReconstructionResult& result) {
  py::dict out;
  out["image"] = from_image(result.image);
  out["method"] = result.method;
  out["iterations_run"] = result.iterations_run;
  out["params"] = result.params;
  py::list iters, residuals, nrmse, seconds;
  for (const auto& rec : result.trace.records) {
    iters.append(rec.iteration);
    residuals.append(rec.residual);
    nrmse.append(rec.nrmse ? py::object(py::float_(*rec.nrmse)) : py::none());
    seconds.append(rec.seconds);
  }
  py::dict trace;
  trace["iteration"] = iters;
  trace["residual"] = residuals;
  trace["nrmse"] = nrmse;
  trace["seconds"] = seconds;
  out["trace"] = trace;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "PMACE ptychographic reconstruction core";

  py::register_exception<Error>(m, "PmaceError");

  m.def(
      "generate_phantom",
      [](int rows, int cols, const std::string& kind, uint64_t seed, double magnitude_min,
         double phase_range) {
        PhantomSpec spec;
        spec.kind = kind;
        spec.seed = seed;
        spec.magnitude_min = magnitude_min;
        spec.phase_range = phase_range;
        return from_image(generate_phantom(rows, cols, spec));
      },
      py::arg("rows"), py::arg("cols"), py::arg("kind") = "smooth", py::arg("seed") = 0,
      py::arg("magnitude_min") = 0.6, py::arg("phase_range") = M_PI / 2,
      "Synthetic complex transmittance image");

  m.def(
      "generate_probe",
      [](int size, const std::string& kind, double radius_frac, double defocus, uint64_t seed) {
        ProbeSpec spec;
        spec.kind = kind;
        spec.radius_frac = radius_frac;
        spec.defocus = defocus;
        spec.seed = seed;
        return from_image(generate_probe(size, spec).field());
      },
      py::arg("size"), py::arg("kind") = "disk", py::arg("radius_frac") = 0.35,
      py::arg("defocus") = 1.0, py::arg("seed") = 0, "Synthetic complex probe field");

  m.def(
      "generate_scan_pattern",
      [](int image_rows, int image_cols, int patch_size, int spacing, int jitter,
         uint64_t seed) {
        ScanPattern scan =
            generate_scan_pattern(image_rows, image_cols, patch_size, spacing, jitter, seed);
        py::array_t<int> pos({scan.count(), 2});
        auto w = pos.mutable_unchecked<2>();
        for (int j = 0; j < scan.count(); ++j) {
          w(j, 0) = scan.position(j).row;
          w(j, 1) = scan.position(j).col;
        }
        auto grid = *scan.grid_shape();
        return py::make_tuple(pos, py::make_tuple(grid.first, grid.second));
      },
      py::arg("image_rows"), py::arg("image_cols"), py::arg("patch_size"), py::arg("spacing"),
      py::arg("jitter") = 0, py::arg("seed") = 0,
      "Perturbed-grid scan positions and the generating grid shape");

  m.def(
      "simulate_measurements",
      [](const py::array_t<std::complex<double>>& x, const py::array_t<std::complex<double>>& d,
         const py::array_t<int>& positions, double peak_rate, double dark_current,
         uint64_t seed, bool noiseless) {
        ComplexImage truth = to_image(x);
        Probe probe(to_image(d));
        ScanPattern scan =
            to_scan(positions, probe.rows(), truth.rows(), truth.cols(), std::nullopt);
        NoiseConfig noise{peak_rate, dark_current, seed, noiseless};
        return from_measurements(simulate_measurements(truth, probe, scan, noise));
      },
      py::arg("x"), py::arg("probe"), py::arg("positions"), py::arg("peak_rate") = 1e4,
      py::arg("dark_current") = 0.5, py::arg("seed") = 0, py::arg("noiseless") = false,
      "Poisson amplitude measurements for every scan position");

  m.def(
      "reconstruct",
      [](const py::array_t<double>& measurements, const py::array_t<std::complex<double>>& d,
         const py::array_t<int>& positions, std::pair<int, int> image_shape,
         const std::string& method, double tunable, int iterations, double kappa, double rho,
         std::optional<py::array_t<std::complex<double>>> ground_truth) {
        MeasurementSet y = to_measurements(measurements);
        Probe probe(to_image(d));
        ScanPattern scan = to_scan(positions, probe.rows(), image_shape.first,
                                   image_shape.second, std::nullopt);
        ComplexImage truth;
        const ComplexImage* truth_ptr = nullptr;
        if (ground_truth) {
          truth = to_image(*ground_truth);
          truth_ptr = &truth;
        }
        ReconstructionResult result;
        if (method == "pmace") {
          PmaceConfig cfg;
          cfg.alpha = tunable;
          cfg.kappa = kappa;
          cfg.rho = rho;
          cfg.max_iters = iterations;
          cfg.residual_tol = 0.0;
          result = pmace_reconstruct(y, probe, scan, cfg, truth_ptr);
        } else {
          BaselineConfig cfg;
          cfg.method = method;
          cfg.tunable = tunable;
          cfg.max_iters = iterations;
          result = baseline_reconstruct(y, probe, scan, cfg, truth_ptr);
        }
        return result_to_dict(result);
      },
      py::arg("measurements"), py::arg("probe"), py::arg("positions"), py::arg("image_shape"),
      py::arg("method") = "pmace", py::arg("tunable") = 0.5, py::arg("iterations") = 100,
      py::arg("kappa") = 1.5, py::arg("rho") = 0.5, py::arg("ground_truth") = py::none(),
      "Run one reconstruction (pmace | epie | awf | sharp)");

  m.def(
      "aligned_nrmse",
      [](const py::array_t<std::complex<double>>& xhat,
         const py::array_t<std::complex<double>>& x) {
        return aligned_nrmse(to_image(xhat), to_image(x));
      },
      py::arg("xhat"), py::arg("x"),
      "NRMSE minimized over a global complex phase/gain factor");

  m.def(
      "overlap_ratio",
      [](const py::array_t<std::complex<double>>& d, const py::array_t<int>& positions,
         std::pair<int, int> image_shape, std::pair<int, int> grid_shape) {
        Probe probe(to_image(d));
        ScanPattern scan = to_scan(positions, probe.rows(), image_shape.first,
                                   image_shape.second, grid_shape);
        return overlap_ratio(probe, scan);
      },
      py::arg("probe"), py::arg("positions"), py::arg("image_shape"), py::arg("grid_shape"),
      "Mean probe-magnitude overlap over grid-adjacent pairs");

  m.def(
      "forward_nrmse",
      [](const py::array_t<std::complex<double>>& xhat, const py::array_t<double>& measurements,
         const py::array_t<std::complex<double>>& d, const py::array_t<int>& positions,
         std::pair<int, int> image_shape, bool normalized) {
        MeasurementSet y = to_measurements(measurements);
        Probe probe(to_image(d));
        ScanPattern scan = to_scan(positions, probe.rows(), image_shape.first,
                                   image_shape.second, std::nullopt);
        return forward_nrmse(to_image(xhat), y, probe, scan, normalized);
      },
      py::arg("xhat"), py::arg("measurements"), py::arg("probe"), py::arg("positions"),
      py::arg("image_shape"), py::arg("normalized") = true,
      "Amplitude misfit of the forward-propagated reconstruction");

  m.def(
      "tukey_window_2d",
      [](int size, double shape) { return from_real(tukey_window_2d(size, shape)); },
      py::arg("size"), py::arg("shape") = 0.5, "Rotated 1D Tukey window");

  m.def(
      "preprocess_measured",
      [](const py::array_t<double>& raw, const py::array_t<double>& dark, int crop_size,
         double window_shape) {
        MeasurementSet raw_set = to_measurements(raw);
        std::vector<RealImage> dark_frames;
        if (dark.size() > 0) dark_frames = to_measurements(dark).amplitudes;
        PreprocessReport report;
        MeasurementSet y = preprocess_measured(raw_set.amplitudes, dark_frames, crop_size,
                                               window_shape, &report);
        py::dict rep;
        rep["deviation_scores"] = report.deviation_scores;
        rep["flagged_frames"] = report.flagged_frames;
        return py::make_tuple(from_measurements(y), rep);
      },
      py::arg("raw"), py::arg("dark"), py::arg("crop_size"), py::arg("window_shape") = 0.5,
      "Dark-subtract, crop, window, and square-root measured frames");

  m.def(
      "write_array",
      [](const std::string& path, const py::array_t<std::complex<double>>& arr) {
        write_array(path, to_image(arr));
      },
      py::arg("path"), py::arg("array"), "Write a complex image to an array file");

  m.def(
      "read_array",
      [](const std::string& path) { return from_image(read_complex_image(path)); },
      py::arg("path"), "Read a complex image from an array file");

  m.attr("__version__") = kVersion;
}
