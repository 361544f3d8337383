#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pmace/consensus.hpp"
#include "pmace/grid.hpp"

namespace pmace {

/// Array container file: a small textual header followed by a raw
/// little-endian row-major payload.
///
///   arrayfile 1
///   kind complex64-pair        (or float64 / float32)
///   order little-endian
///   layout row-major
///   shape 256 256              (1 to 3 dimensions)
///   data
///   <payload bytes>
///
/// complex64-pair stores each element as an interleaved (real, imaginary)
/// pair of 64-bit floats. Round trips are bit-exact.

void write_array(const std::filesystem::path& path, const ComplexImage& image);
void write_array(const std::filesystem::path& path, const RealImage& image);
/// 3D stack of equally-shaped real frames (shape J H W).
void write_array(const std::filesystem::path& path, const std::vector<RealImage>& frames);

ComplexImage read_complex_image(const std::filesystem::path& path);
RealImage read_real_image(const std::filesystem::path& path);
std::vector<RealImage> read_real_stack(const std::filesystem::path& path);

/// Convergence trace CSV with the fixed header iteration,residual,nrmse,seconds
/// and one row per record; nrmse is left empty when not tracked.
void write_trace_csv(const std::filesystem::path& path, const ConvergenceTrace& trace);

}  // namespace pmace
