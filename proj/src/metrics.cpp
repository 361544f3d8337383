#include "pmace/metrics.hpp"

#include <algorithm>

#include "pmace/fft.hpp"

namespace pmace {

namespace {

double aligned_nrmse_vectors(const std::vector<Complex>& xhat, const std::vector<Complex>& x) {
  double xhat_sq = 0, x_sq = 0;
  Complex dot = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    xhat_sq += std::norm(xhat[i]);
    x_sq += std::norm(x[i]);
    dot += std::conj(xhat[i]) * x[i];
  }
  if (x_sq <= 0) throw ConfigError("aligned_nrmse: reference image has zero norm");
  if (xhat_sq <= 0) return 1.0;
  Complex c = dot / xhat_sq;
  double err_sq = 0;
  for (size_t i = 0; i < x.size(); ++i) err_sq += std::norm(c * xhat[i] - x[i]);
  return std::sqrt(err_sq / x_sq);
}

}  // namespace

double aligned_nrmse(const ComplexImage& xhat, const ComplexImage& x,
                     const std::optional<CropRegion>& region) {
  if (!xhat.same_shape(x)) throw ShapeError("aligned_nrmse: shape mismatch");
  std::vector<Complex> a, b;
  if (region) {
    const CropRegion& cr = *region;
    if (cr.row0 < 0 || cr.col0 < 0 || cr.rows <= 0 || cr.cols <= 0 ||
        cr.row0 + cr.rows > x.rows() || cr.col0 + cr.cols > x.cols())
      throw ShapeError("aligned_nrmse: crop region out of bounds");
    a.reserve(static_cast<size_t>(cr.rows) * cr.cols);
    b.reserve(a.capacity());
    for (int r = cr.row0; r < cr.row0 + cr.rows; ++r) {
      for (int c = cr.col0; c < cr.col0 + cr.cols; ++c) {
        a.push_back(xhat(r, c));
        b.push_back(x(r, c));
      }
    }
  } else {
    a.assign(xhat.data(), xhat.data() + xhat.size());
    b.assign(x.data(), x.data() + x.size());
  }
  return aligned_nrmse_vectors(a, b);
}

double aligned_nrmse_masked(const ComplexImage& xhat, const ComplexImage& x,
                            const Grid2<uint8_t>& mask) {
  if (!xhat.same_shape(x)) throw ShapeError("aligned_nrmse_masked: shape mismatch");
  if (mask.rows() != x.rows() || mask.cols() != x.cols())
    throw ShapeError("aligned_nrmse_masked: mask shape mismatch");
  std::vector<Complex> a, b;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) {
      a.push_back(xhat[i]);
      b.push_back(x[i]);
    }
  }
  if (a.empty()) throw ConfigError("aligned_nrmse_masked: empty mask");
  return aligned_nrmse_vectors(a, b);
}

double overlap_ratio_pair(const Probe& probe, const ScanPattern& scan, int j, int k) {
  if (j == k || j < 0 || k < 0 || j >= scan.count() || k >= scan.count())
    throw ConfigError("overlap_ratio_pair: invalid index pair");
  const ComplexImage& d = probe.field();

  double denom = 0;
  for (size_t i = 0; i < d.size(); ++i) denom += std::norm(d[i]);
  if (denom <= 0) throw ConfigError("overlap_ratio_pair: zero probe");

  const ScanPoint& a = scan.position(j);
  const ScanPoint& b = scan.position(k);
  int r0 = std::max(a.row, b.row);
  int r1 = std::min(a.row + scan.patch_rows(), b.row + scan.patch_rows());
  int c0 = std::max(a.col, b.col);
  int c1 = std::min(a.col + scan.patch_cols(), b.col + scan.patch_cols());

  double numer = 0;
  for (int r = r0; r < r1; ++r)
    for (int c = c0; c < c1; ++c)
      numer += std::abs(d(r - a.row, c - a.col)) * std::abs(d(r - b.row, c - b.col));
  return numer / denom;
}

double overlap_ratio(const Probe& probe, const ScanPattern& scan) {
  auto grid = scan.grid_shape();
  if (!grid) throw ConfigError("overlap_ratio: scan has no generating grid");
  auto [gr, gc] = *grid;
  if (static_cast<int>(gr) * gc != scan.count())
    throw ConfigError("overlap_ratio: grid shape inconsistent with position count");

  double sum = 0;
  int pairs = 0;
  for (int r = 0; r < gr; ++r) {
    for (int c = 0; c < gc; ++c) {
      int j = r * gc + c;
      if (c + 1 < gc) {
        sum += overlap_ratio_pair(probe, scan, j, j + 1);
        ++pairs;
      }
      if (r + 1 < gr) {
        sum += overlap_ratio_pair(probe, scan, j, j + gc);
        ++pairs;
      }
    }
  }
  if (pairs == 0) throw ConfigError("overlap_ratio: no adjacent pairs");
  return sum / pairs;
}

double forward_nrmse(const ComplexImage& xhat, const MeasurementSet& y, const Probe& probe,
                     const ScanPattern& scan, bool normalized) {
  if (y.count() != scan.count()) throw ShapeError("forward_nrmse: measurement count mismatch");

  std::vector<RealImage> intensities(scan.count());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < scan.count(); ++j)
    intensities[j] = forward_intensity(probe, extract_patch(xhat, scan, j));

  double scale = 1.0;
  if (normalized) {
    double peak = 0;
    for (const auto& patch : intensities)
      for (size_t i = 0; i < patch.size(); ++i) peak = std::max(peak, patch[i]);
    scale = peak > 0 ? 1.0 / std::sqrt(peak) : 1.0;
  }

  double err_sq = 0, y_sq = 0;
  for (int j = 0; j < scan.count(); ++j) {
    const RealImage& intensity = intensities[j];
    const RealImage& yj = y.amplitudes[j];
    if (!intensity.same_shape(yj)) throw ShapeError("forward_nrmse: amplitude shape mismatch");
    for (size_t i = 0; i < yj.size(); ++i) {
      double model = scale * std::sqrt(intensity[i]);
      err_sq += (model - yj[i]) * (model - yj[i]);
      y_sq += yj[i] * yj[i];
    }
  }
  if (y_sq <= 0) throw ConfigError("forward_nrmse: measurements have zero norm");
  return std::sqrt(err_sq / y_sq);
}

}  // namespace pmace
