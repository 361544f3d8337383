#include "pmace/preprocess.hpp"

#include <algorithm>

namespace pmace {

namespace {

double tukey_1d(double n, int length, double shape) {
  double m = length - 1;
  if (n < 0 || n > m) return 0.0;
  double edge = shape * m / 2.0;
  if (n < edge) return 0.5 * (1.0 + std::cos(M_PI * (n / edge - 1.0)));
  if (n > m - edge) return 0.5 * (1.0 + std::cos(M_PI * ((n - m + edge) / edge)));
  return 1.0;
}

double median_of(std::vector<double> v) {
  size_t n = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + n, v.end());
  return v[n];
}

}  // namespace

RealImage tukey_window_2d(int size, double shape) {
  if (size <= 0) throw ConfigError("tukey_window_2d: non-positive size");
  if (shape < 0.0 || shape > 1.0) throw ConfigError("tukey_window_2d: shape must be in [0, 1]");
  RealImage w(size, size);
  double center = (size - 1) / 2.0;
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      double radius = std::hypot(r - center, c - center);
      w(r, c) = shape == 0.0 ? (radius <= center ? 1.0 : 0.0)
                             : tukey_1d(center + radius, size, shape);
    }
  }
  return w;
}

MeasurementSet preprocess_measured(const std::vector<RealImage>& raw,
                                   const std::vector<RealImage>& dark, int crop_size,
                                   double window_shape, PreprocessReport* report) {
  if (raw.empty()) throw ConfigError("preprocess_measured: no frames");
  for (const auto& f : raw)
    if (!f.same_shape(raw.front())) throw ShapeError("preprocess_measured: ragged raw frames");
  for (const auto& f : dark)
    if (!f.same_shape(raw.front())) throw ShapeError("preprocess_measured: dark frame shape mismatch");
  if (crop_size <= 0 || crop_size > raw.front().rows() || crop_size > raw.front().cols())
    throw ConfigError("preprocess_measured: crop larger than frame");

  RealImage mean_dark(raw.front().rows(), raw.front().cols());
  if (!dark.empty()) {
    for (const auto& f : dark)
      for (size_t i = 0; i < f.size(); ++i) mean_dark[i] += f[i];
    for (size_t i = 0; i < mean_dark.size(); ++i) mean_dark[i] /= static_cast<double>(dark.size());
  }

  int row0 = (raw.front().rows() - crop_size) / 2;
  int col0 = (raw.front().cols() - crop_size) / 2;
  RealImage window = tukey_window_2d(crop_size, window_shape);

  MeasurementSet out;
  out.amplitudes.reserve(raw.size());
  std::vector<double> totals;
  totals.reserve(raw.size());
  for (const auto& frame : raw) {
    RealImage amp(crop_size, crop_size);
    double total = 0;
    for (int r = 0; r < crop_size; ++r) {
      for (int c = 0; c < crop_size; ++c) {
        double v = frame(row0 + r, col0 + c) - mean_dark(row0 + r, col0 + c);
        v = std::max(v, 0.0) * window(r, c);
        total += v;
        amp(r, c) = std::sqrt(v);
      }
    }
    totals.push_back(total);
    out.amplitudes.push_back(std::move(amp));
  }

  if (report) {
    report->deviation_scores.clear();
    report->flagged_frames.clear();
    double med = median_of(totals);
    std::vector<double> abs_dev(totals.size());
    for (size_t i = 0; i < totals.size(); ++i) abs_dev[i] = std::abs(totals[i] - med);
    double mad = median_of(abs_dev);
    double sigma = 1.4826 * mad;
    for (size_t i = 0; i < totals.size(); ++i) {
      double score = sigma > 0 ? std::abs(totals[i] - med) / sigma : 0.0;
      report->deviation_scores.push_back(score);
      if (score > report->threshold) report->flagged_frames.push_back(static_cast<int>(i));
    }
  }
  return out;
}

}  // namespace pmace
