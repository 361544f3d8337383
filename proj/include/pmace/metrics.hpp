#pragma once

#include <optional>

#include "pmace/forward.hpp"
#include "pmace/grid.hpp"
#include "pmace/probe.hpp"
#include "pmace/scan.hpp"

namespace pmace {

struct CropRegion {
  int row0 = 0, col0 = 0, rows = 0, cols = 0;
};

/// NRMSE minimized over a global complex factor c (phase shift and gain):
/// min_c ||c xhat - x|| / ||x||, with the closed form c = <xhat, x>/||xhat||^2.
/// Returns 1 when xhat is identically zero; throws when ||x|| = 0.
double aligned_nrmse(const ComplexImage& xhat, const ComplexImage& x,
                     const std::optional<CropRegion>& region = std::nullopt);

/// Same, restricted to pixels where mask is nonzero (e.g. the reconstruction
/// support of a consensus operator).
double aligned_nrmse_masked(const ComplexImage& xhat, const ComplexImage& x,
                            const Grid2<uint8_t>& mask);

/// Probe-magnitude overlap between scan positions j and k:
/// || P_j^T|d| .* P_k^T|d| ||_1 / || |d| .* |d| ||_1, in [0, 1].
double overlap_ratio_pair(const Probe& probe, const ScanPattern& scan, int j, int k);

/// Mean pairwise overlap over 4-connected neighbors of the generating grid.
/// Requires a pattern produced by generate_scan_pattern (grid shape known).
double overlap_ratio(const Probe& probe, const ScanPattern& scan);

/// Amplitude misfit at the detector plane: propagate xhat through the
/// noiseless forward model and compare against the measured amplitudes,
/// || |F D P_j xhat| - y || / ||y|| over the whole stack.
/// normalized=true rescales the model by the global peak intensity, matching
/// the synthetic-measurement normalization (peak_rate 1, no dark current);
/// normalized=false compares raw amplitudes (measured-data convention).
double forward_nrmse(const ComplexImage& xhat, const MeasurementSet& y, const Probe& probe,
                     const ScanPattern& scan, bool normalized = true);

}  // namespace pmace
