#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pmace/grid.hpp"

namespace pmace {

struct ScanPoint {
  int row, col;  // top-left corner of the patch in the image
};

/// Ordered list of patch placements. The position order defines the agent
/// index j everywhere downstream.
class ScanPattern {
public:
  ScanPattern(std::vector<ScanPoint> positions, int patch_rows, int patch_cols,
              int image_rows, int image_cols);

  int count() const { return static_cast<int>(positions_.size()); }
  const ScanPoint& position(int j) const { return positions_[j]; }
  const std::vector<ScanPoint>& positions() const { return positions_; }
  int patch_rows() const { return patch_rows_; }
  int patch_cols() const { return patch_cols_; }
  int image_rows() const { return image_rows_; }
  int image_cols() const { return image_cols_; }

  /// Rows x cols of the generating grid; set by generate_scan_pattern and
  /// required by the adjacency-based overlap ratio.
  std::optional<std::pair<int, int>> grid_shape() const { return grid_shape_; }
  void set_grid_shape(int rows, int cols) { grid_shape_ = {rows, cols}; }

private:
  std::vector<ScanPoint> positions_;
  int patch_rows_, patch_cols_;
  int image_rows_, image_cols_;
  std::optional<std::pair<int, int>> grid_shape_;
};

/// P_j: the patch_rows x patch_cols sub-block of x at position j.
ComplexImage extract_patch(const ComplexImage& x, const ScanPattern& scan, int j);

/// P_j^T: image that is zero except for the block at position j.
/// Satisfies <extract(x), v> = <x, embed(v)> exactly.
ComplexImage embed_patch(const ComplexImage& v, const ScanPattern& scan, int j);

/// Accumulate a real patch into an image-sized map at position j.
void accumulate_patch(RealImage& acc, const RealImage& patch, const ScanPattern& scan, int j);
/// Accumulate a complex patch into an image-sized field at position j.
void accumulate_patch(ComplexImage& acc, const ComplexImage& patch, const ScanPattern& scan, int j);

/// Number of patches covering each pixel (the unweighted Lambda_0).
RealImage coverage_counts(const ScanPattern& scan);

/// Rectangular grid with the given nominal spacing, each position perturbed
/// by independent uniform integer offsets in [-jitter, jitter] per axis and
/// clamped so every patch stays inside the image. Deterministic given seed.
ScanPattern generate_scan_pattern(int image_rows, int image_cols, int patch_size,
                                  int spacing, int jitter, uint64_t seed);

}  // namespace pmace
