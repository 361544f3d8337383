#pragma once

#include <filesystem>

#include "pmace/grid.hpp"

namespace pmace {

/// 8-bit grayscale PNG; values are clipped to [vmin, vmax] and scaled.
void write_png_gray(const std::filesystem::path& path, const RealImage& image,
                    double vmin, double vmax);

}  // namespace pmace
