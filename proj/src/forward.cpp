#include "pmace/forward.hpp"

#include <algorithm>

#include "pmace/fft.hpp"
#include "pmace/rng.hpp"
#include "smooth_field.hpp"

namespace pmace {

RealImage forward_intensity(const Probe& probe, const ComplexImage& v) {
  if (!v.same_shape(probe.field())) throw ShapeError("forward_intensity: shape mismatch");
  ComplexImage spectrum = fft2(hadamard(probe.field(), v));
  RealImage out(v.rows(), v.cols());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::norm(spectrum[i]);
  return out;
}

MeasurementSet simulate_measurements(const ComplexImage& x, const Probe& probe,
                                     const ScanPattern& scan, const NoiseConfig& noise) {
  if (noise.peak_rate <= 0) throw ConfigError("simulate_measurements: peak_rate must be positive");
  if (noise.dark_current < 0) throw ConfigError("simulate_measurements: negative dark current");

  int count = scan.count();
  std::vector<RealImage> intensities(count);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < count; ++j)
    intensities[j] = forward_intensity(probe, extract_patch(x, scan, j));

  double peak = 0.0;
  for (const auto& patch : intensities)
    for (size_t i = 0; i < patch.size(); ++i) peak = std::max(peak, patch[i]);
  if (peak <= 0)
    throw ConfigError("simulate_measurements: all diffraction intensities are zero");

  double scale = noise.peak_rate / peak;
  MeasurementSet out;
  out.amplitudes.resize(count);
#pragma omp parallel for schedule(static)
  for (int j = 0; j < count; ++j) {
    const RealImage& intensity = intensities[j];
    RealImage y(intensity.rows(), intensity.cols());
    auto rng = substream(noise.seed, "noise", static_cast<uint64_t>(j));
    for (size_t i = 0; i < y.size(); ++i) {
      double rate = scale * intensity[i] + noise.dark_current;
      if (noise.noiseless) {
        y[i] = std::sqrt(rate);
      } else {
        std::poisson_distribution<long> pois(rate);
        y[i] = std::sqrt(static_cast<double>(rate > 0 ? pois(rng) : 0));
      }
    }
    out.amplitudes[j] = std::move(y);
  }
  return out;
}

ComplexImage compose_complex(const RealImage& mag, const RealImage& ph) {
  if (!mag.same_shape(ph)) throw ShapeError("compose_complex: shape mismatch");
  ComplexImage out(mag.rows(), mag.cols());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::polar(mag[i], ph[i]);
  return out;
}

namespace {

// Map a unit-std field through tanh into [0, 1]; keeps values well inside the
// range so magnitudes stay strictly positive.
double squash(double t) { return 0.5 * (1.0 + std::tanh(0.8 * t)); }

ComplexImage smooth_phantom(int rows, int cols, const PhantomSpec& spec) {
  auto rng = substream(spec.seed, "phantom");
  RealImage a = detail::smooth_random_field(rows, cols, 0.05, rng);
  RealImage b = detail::smooth_random_field(rows, cols, 0.05, rng);
  ComplexImage out(rows, cols);
  for (size_t i = 0; i < out.size(); ++i) {
    double mag = spec.magnitude_min + (1.0 - spec.magnitude_min) * squash(a[i]);
    double ph = spec.phase_range * (squash(b[i]) - 0.5);
    out[i] = std::polar(mag, ph);
  }
  return out;
}

ComplexImage blob_phantom(int rows, int cols, const PhantomSpec& spec) {
  auto rng = substream(spec.seed, "phantom");
  int n_blobs = std::max(6, rows * cols / 2048);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RealImage mag(rows, cols, 1.0);
  RealImage ph(rows, cols, 0.0);
  for (int b = 0; b < n_blobs; ++b) {
    double cr = unit(rng) * rows;
    double cc = unit(rng) * cols;
    double radius = (0.03 + 0.10 * unit(rng)) * std::min(rows, cols);
    double dmag = (spec.magnitude_min - 1.0) * unit(rng);
    double dph = spec.phase_range * (unit(rng) - 0.5);
    int r0 = std::max(0, static_cast<int>(cr - radius) - 1);
    int r1 = std::min(rows - 1, static_cast<int>(cr + radius) + 1);
    int c0 = std::max(0, static_cast<int>(cc - radius) - 1);
    int c1 = std::min(cols - 1, static_cast<int>(cc + radius) + 1);
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (std::hypot(r - cr, c - cc) <= radius) {
          mag(r, c) = std::clamp(mag(r, c) + dmag, spec.magnitude_min, 1.0);
          ph(r, c) = std::clamp(ph(r, c) + dph, -spec.phase_range / 2, spec.phase_range / 2);
        }
      }
    }
  }
  return compose_complex(mag, ph);
}

}  // namespace

ComplexImage generate_phantom(int rows, int cols, const PhantomSpec& spec) {
  if (rows <= 0 || cols <= 0) throw ConfigError("generate_phantom: non-positive shape");
  if (!(spec.magnitude_min > 0.0 && spec.magnitude_min <= 1.0))
    throw ConfigError("generate_phantom: magnitude_min must be in (0, 1]");
  if (spec.kind == "constant") return ComplexImage(rows, cols, Complex(1.0, 0.0));
  if (spec.kind == "smooth") return smooth_phantom(rows, cols, spec);
  if (spec.kind == "blobs") return blob_phantom(rows, cols, spec);
  throw ConfigError("generate_phantom: unknown kind '" + spec.kind + "'");
}

}  // namespace pmace
