#include "pmace/scan.hpp"

#include <algorithm>

#include "pmace/rng.hpp"

namespace pmace {

ScanPattern::ScanPattern(std::vector<ScanPoint> positions, int patch_rows, int patch_cols,
                         int image_rows, int image_cols)
    : positions_(std::move(positions)),
      patch_rows_(patch_rows),
      patch_cols_(patch_cols),
      image_rows_(image_rows),
      image_cols_(image_cols) {
  if (positions_.empty()) throw ConfigError("ScanPattern: needs at least one position");
  if (patch_rows_ <= 0 || patch_cols_ <= 0) throw ConfigError("ScanPattern: non-positive patch size");
  for (const auto& p : positions_) {
    if (p.row < 0 || p.col < 0 || p.row + patch_rows_ > image_rows_ ||
        p.col + patch_cols_ > image_cols_) {
      throw ConfigError("ScanPattern: patch at (" + std::to_string(p.row) + "," +
                        std::to_string(p.col) + ") is out of image bounds");
    }
  }
}

ComplexImage extract_patch(const ComplexImage& x, const ScanPattern& scan, int j) {
  if (j < 0 || j >= scan.count()) throw ShapeError("extract_patch: index out of range");
  if (x.rows() != scan.image_rows() || x.cols() != scan.image_cols())
    throw ShapeError("extract_patch: image shape does not match scan");
  const ScanPoint& p = scan.position(j);
  ComplexImage out(scan.patch_rows(), scan.patch_cols());
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) out(r, c) = x(p.row + r, p.col + c);
  return out;
}

ComplexImage embed_patch(const ComplexImage& v, const ScanPattern& scan, int j) {
  if (j < 0 || j >= scan.count()) throw ShapeError("embed_patch: index out of range");
  if (v.rows() != scan.patch_rows() || v.cols() != scan.patch_cols())
    throw ShapeError("embed_patch: patch shape mismatch");
  ComplexImage out(scan.image_rows(), scan.image_cols());
  const ScanPoint& p = scan.position(j);
  for (int r = 0; r < v.rows(); ++r)
    for (int c = 0; c < v.cols(); ++c) out(p.row + r, p.col + c) = v(r, c);
  return out;
}

void accumulate_patch(RealImage& acc, const RealImage& patch, const ScanPattern& scan, int j) {
  const ScanPoint& p = scan.position(j);
  for (int r = 0; r < patch.rows(); ++r)
    for (int c = 0; c < patch.cols(); ++c) acc(p.row + r, p.col + c) += patch(r, c);
}

void accumulate_patch(ComplexImage& acc, const ComplexImage& patch, const ScanPattern& scan, int j) {
  const ScanPoint& p = scan.position(j);
  for (int r = 0; r < patch.rows(); ++r)
    for (int c = 0; c < patch.cols(); ++c) acc(p.row + r, p.col + c) += patch(r, c);
}

RealImage coverage_counts(const ScanPattern& scan) {
  RealImage counts(scan.image_rows(), scan.image_cols());
  RealImage ones(scan.patch_rows(), scan.patch_cols(), 1.0);
  for (int j = 0; j < scan.count(); ++j) accumulate_patch(counts, ones, scan, j);
  return counts;
}

ScanPattern generate_scan_pattern(int image_rows, int image_cols, int patch_size,
                                  int spacing, int jitter, uint64_t seed) {
  if (spacing <= 0) throw ConfigError("generate_scan_pattern: spacing must be positive");
  if (jitter < 0) throw ConfigError("generate_scan_pattern: jitter must be non-negative");
  int max_row = image_rows - patch_size;
  int max_col = image_cols - patch_size;
  if (max_row < 0 || max_col < 0)
    throw ConfigError("generate_scan_pattern: patch does not fit the image");

  auto axis_positions = [&](int max_pos) {
    std::vector<int> v;
    for (int p = 0; p <= max_pos; p += spacing) v.push_back(p);
    return v;
  };
  std::vector<int> row_grid = axis_positions(max_row);
  std::vector<int> col_grid = axis_positions(max_col);

  auto rng = substream(seed, "pattern");
  std::uniform_int_distribution<int> offset(-jitter, jitter);
  std::vector<ScanPoint> positions;
  positions.reserve(row_grid.size() * col_grid.size());
  for (int r : row_grid) {
    for (int c : col_grid) {
      int pr = r, pc = c;
      if (jitter > 0) {
        pr += offset(rng);
        pc += offset(rng);
      }
      pr = std::clamp(pr, 0, max_row);
      pc = std::clamp(pc, 0, max_col);
      positions.push_back({pr, pc});
    }
  }
  ScanPattern scan(std::move(positions), patch_size, patch_size, image_rows, image_cols);
  scan.set_grid_shape(static_cast<int>(row_grid.size()), static_cast<int>(col_grid.size()));
  return scan;
}

}  // namespace pmace
