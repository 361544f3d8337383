#pragma once

#include <cstdint>

#include "pmace/consensus.hpp"
#include "pmace/forward.hpp"
#include "pmace/probe.hpp"
#include "pmace/result.hpp"

namespace pmace {

struct PmaceConfig {
  double alpha = 0.5;   // data-fit strength, strictly inside (0, 1)
  double kappa = 1.5;   // probe-power weight exponent, in [1, 2]
  double rho = 0.5;     // Mann averaging parameter, strictly inside (0, 1)
  int max_iters = 100;
  double residual_tol = 1e-6;
  uint64_t seed = 0;
};

/// The ptychography data-fitting agent
///   F_j(v) = (1 - alpha) v + alpha Dinv F*( y_j . F D v / |F D v| ).
/// Where |F D v| = 0 the phase factor is taken as 1. With stabilized=true
/// (the reconstruction path) Dinv is the probe's epsilon-stabilized inverse;
/// with stabilized=false it is the exact inverse d*/|d|^2, the variant whose
/// inversion round-trips exactly.
Agent data_fit_agent(const Probe& probe, RealImage y_j, double alpha,
                     bool stabilized = true);

/// Inverts the data-fitting agent: recovers v with agent(v) = w, using
///   |F D v| = (|F D w| - alpha y_j) / (1 - alpha)
/// and the exact probe inverse d*/|d|^2, so round trips are exact.
/// Throws when the solved magnitude goes negative (w outside the agent's
/// range) or when zero-probe pixels meet a nonzero field.
ComplexImage invert_data_fit_agent(const Probe& probe, const RealImage& y_j, double alpha,
                                   const ComplexImage& w);

/// Constant-per-patch initialization
///   x0 = Lambda_0^{-1} sum_j P_j^T ( ||y_j|| / ||d|| ) 1 ,
/// real-valued on the coverage support.
ComplexImage init_guess(const MeasurementSet& y, const Probe& probe, const ScanPattern& scan);

/// Full reconstruction: data-fitting agents, |d|^kappa consensus weighting,
/// the constant init projected to patches, Mann iterations, and the final
/// weighted readout of the patch stack. If ground_truth is given, the trace
/// carries the support-masked aligned NRMSE per iteration.
ReconstructionResult pmace_reconstruct(const MeasurementSet& y, const Probe& probe,
                                       const ScanPattern& scan, const PmaceConfig& cfg,
                                       const ComplexImage* ground_truth = nullptr);

}  // namespace pmace
