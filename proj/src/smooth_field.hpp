#pragma once

#include <random>

#include "pmace/fft.hpp"
#include "pmace/grid.hpp"

namespace pmace::detail {

// Gaussian-filtered white noise, normalized to zero mean and unit std.
// correlation is the low-pass scale as a fraction of the smaller dimension.
inline RealImage smooth_random_field(int rows, int cols, double correlation,
                                     std::mt19937_64& rng) {
  ComplexImage noise(rows, cols);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t i = 0; i < noise.size(); ++i) noise[i] = Complex(gauss(rng), 0.0);

  ComplexImage spectrum = fft2(noise);
  double cutoff = correlation * std::min(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      // centered frequency indices
      double fr = (r <= rows / 2) ? r : r - rows;
      double fc = (c <= cols / 2) ? c : c - cols;
      double f2 = fr * fr + fc * fc;
      spectrum(r, c) *= std::exp(-0.5 * f2 * cutoff * cutoff /
                                 (static_cast<double>(rows) * cols) * 4.0 * M_PI);
    }
  }
  ComplexImage filtered = ifft2(spectrum);

  RealImage out(rows, cols);
  double mean = 0;
  for (size_t i = 0; i < filtered.size(); ++i) mean += filtered[i].real();
  mean /= static_cast<double>(filtered.size());
  double var = 0;
  for (size_t i = 0; i < filtered.size(); ++i) {
    out[i] = filtered[i].real() - mean;
    var += out[i] * out[i];
  }
  double std_dev = std::sqrt(var / static_cast<double>(out.size()));
  if (std_dev > 0) {
    for (size_t i = 0; i < out.size(); ++i) out[i] /= std_dev;
  }
  return out;
}

}  // namespace pmace::detail
