#pragma once

#include <cstdint>
#include <string>

#include "pmace/forward.hpp"
#include "pmace/probe.hpp"
#include "pmace/result.hpp"

namespace pmace {

/// Shared configuration for the reference methods. Each method reads the one
/// tunable the comparison protocol grid-searches: the ePIE step size, the AWF
/// step scale, or the SHARP relaxation beta.
struct BaselineConfig {
  std::string method = "epie";  // epie | awf | sharp
  double tunable = 1.0;
  int max_iters = 100;
  uint64_t seed = 0;
  bool epie_shuffle = false;  // shuffled update order; off keeps runs deterministic
  bool awf_momentum = true;   // Nesterov acceleration on/off
};

/// Pixels illuminated by at least one scan position (the evaluation mask
/// shared by every method's NRMSE trace).
Grid2<uint8_t> illuminated_support(const Probe& probe, const ScanPattern& scan);

/// Serial ptychographic iterative engine with a fixed probe: one epoch sweeps
/// all positions in order, replacing diffraction magnitudes and updating the
/// object block by conj(d)/max|d|^2 times the exit-wave correction.
ReconstructionResult epie_reconstruct(const MeasurementSet& y, const Probe& probe,
                                      const ScanPattern& scan, const BaselineConfig& cfg,
                                      const ComplexImage* ground_truth = nullptr);

/// Amplitude-loss gradient descent with Nesterov momentum. The step size is
/// tunable / max(Lambda_2), with Lambda_2 the summed probe power.
ReconstructionResult awf_reconstruct(const MeasurementSet& y, const Probe& probe,
                                     const ScanPattern& scan, const BaselineConfig& cfg,
                                     const ComplexImage* ground_truth = nullptr);

/// SHARP's frame-domain operators (exit waves u_j = d .* P_j x): P_a replaces
/// Fourier magnitudes with the measured amplitudes, P_Q is the probe-power
/// weighted consensus projector, and one iteration is
///   u <- 2 beta P_Q P_a u + (1 - 2 beta) P_a u + beta (P_Q - I) u.
class SharpOperators {
public:
  SharpOperators(const MeasurementSet& y, const Probe& probe, const ScanPattern& scan);

  std::vector<ComplexImage> magnitude_project(const std::vector<ComplexImage>& u) const;
  std::vector<ComplexImage> consensus_project(const std::vector<ComplexImage>& u) const;
  std::vector<ComplexImage> iterate(const std::vector<ComplexImage>& u, double beta) const;

  /// xbar = Lambda_2^{-1} sum_j P_j^T (conj(d) .* u_j); zero off the
  /// probe-power support.
  ComplexImage frame_mean(const std::vector<ComplexImage>& u) const;
  std::vector<ComplexImage> frames_from_image(const ComplexImage& x) const;
  const Grid2<uint8_t>& support() const { return support_; }

private:
  const MeasurementSet& y_;
  const Probe& probe_;
  const ScanPattern& scan_;
  RealImage lambda2_;
  Grid2<uint8_t> support_;
};

/// RAAR-style SHARP reconstruction built on SharpOperators; beta is the
/// tunable relaxation parameter.
ReconstructionResult sharp_reconstruct(const MeasurementSet& y, const Probe& probe,
                                       const ScanPattern& scan, const BaselineConfig& cfg,
                                       const ComplexImage* ground_truth = nullptr);

/// Dispatch on cfg.method.
ReconstructionResult baseline_reconstruct(const MeasurementSet& y, const Probe& probe,
                                          const ScanPattern& scan, const BaselineConfig& cfg,
                                          const ComplexImage* ground_truth = nullptr);

/// Amplitude loss 1/2 sum_j || |F D P_j x| - y_j ||^2 and its gradient in the
/// stacked real/imaginary parametrization. Exposed for verification.
double awf_loss(const ComplexImage& x, const MeasurementSet& y, const Probe& probe,
                const ScanPattern& scan);
ComplexImage awf_gradient(const ComplexImage& x, const MeasurementSet& y, const Probe& probe,
                          const ScanPattern& scan);

}  // namespace pmace
