#pragma once

#include <vector>

#include "pmace/forward.hpp"
#include "pmace/grid.hpp"

namespace pmace {

/// 2D window obtained by rotating a 1D Tukey window (tapered cosine, shape
/// parameter in [0, 1]) about the center: 1 at the center, 0 beyond the
/// half-width, so all four corners are 0.
RealImage tukey_window_2d(int size, double shape);

struct PreprocessReport {
  std::vector<double> deviation_scores;  // robust z-score of each frame's total counts
  std::vector<int> flagged_frames;       // frames whose score exceeds the threshold
  double threshold = 5.0;
};

/// Measured-data ingestion: subtract the mean dark frame, clamp negatives to
/// zero, center-crop to crop_size (extra pixels split floor on the top/left,
/// ceil on the bottom/right), multiply by the 2D Tukey window, and take the
/// elementwise square root into amplitudes. Outlier frames are flagged in the
/// report for manual removal, never dropped silently.
MeasurementSet preprocess_measured(const std::vector<RealImage>& raw,
                                   const std::vector<RealImage>& dark, int crop_size,
                                   double window_shape, PreprocessReport* report = nullptr);

}  // namespace pmace
