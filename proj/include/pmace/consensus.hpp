#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "pmace/grid.hpp"
#include "pmace/scan.hpp"

namespace pmace {

/// The stacked state v = [v_0, ..., v_{J-1}]: one complex patch per scan
/// position, all sharing the same shape.
class PatchStack {
public:
  explicit PatchStack(std::vector<ComplexImage> patches);
  static PatchStack zeros(int count, int rows, int cols);
  /// v_j = P_j x for all j.
  static PatchStack project_from(const ComplexImage& x, const ScanPattern& scan);

  int count() const { return static_cast<int>(patches_.size()); }
  int patch_rows() const { return patches_.front().rows(); }
  int patch_cols() const { return patches_.front().cols(); }
  ComplexImage& patch(int j) { return patches_[j]; }
  const ComplexImage& patch(int j) const { return patches_[j]; }

private:
  std::vector<ComplexImage> patches_;
};

double norm2_sq(const PatchStack& v);
double norm2(const PatchStack& v);
double distance(const PatchStack& a, const PatchStack& b);
bool all_finite(const PatchStack& v);

/// One update map per scan position; must preserve the patch shape.
using Agent = std::function<ComplexImage(const ComplexImage&)>;

class AgentSet {
public:
  explicit AgentSet(std::vector<Agent> agents);
  int count() const { return static_cast<int>(agents_.size()); }
  const Agent& agent(int j) const { return agents_[j]; }

private:
  std::vector<Agent> agents_;
};

/// F(v) = [F_0(v_0), ..., F_{J-1}(v_{J-1})]. Patches are independent, so the
/// result is identical under any evaluation order; evaluation runs in
/// parallel across j.
PatchStack apply_agents(const AgentSet& agents, const PatchStack& v);

/// Pixel-weighted projection averaging G^P.
///
/// Carries the per-pixel weight map W (patch-shaped) and the precomputed
/// normalizer Lambda = sum_j P_j^T W P_j over the image. The reconstruction
/// support is the set of pixels with Lambda > 0; the weighted mean is zero
/// off support. With strict=true, construction fails if any pixel covered by
/// a patch has zero total weight, reporting the offending pixels.
class ConsensusOperator {
public:
  ConsensusOperator(ScanPattern scan, RealImage weight, bool strict = true);

  const ScanPattern& scan() const { return scan_; }
  const RealImage& weight() const { return weight_; }
  const RealImage& lambda() const { return lambda_; }
  const Grid2<uint8_t>& support() const { return support_; }

  /// xbar(v) = Lambda^{-1} sum_j P_j^T W v_j (ascending-j accumulation).
  ComplexImage weighted_mean(const PatchStack& v) const;

  /// G^P(v) = [P_0 xbar(v), ..., P_{J-1} xbar(v)].
  PatchStack project(const PatchStack& v) const;

private:
  void check_stack(const PatchStack& v) const;

  ScanPattern scan_;
  RealImage weight_;
  RealImage lambda_;
  Grid2<uint8_t> support_;
};

/// T(v) = (2 G^P - I)(2 F - I)(v), composed exactly in that order.
PatchStack fixed_point_map(const ConsensusOperator& op, const AgentSet& agents,
                           const PatchStack& v);

struct MannConfig {
  double rho = 0.5;          // averaging parameter, strictly inside (0, 1)
  int max_iters = 100;
  double residual_tol = 1e-6;  // relative update norm stopping threshold
  bool record_trace = true;
};

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;  // ||v_{k+1} - v_k|| / ||v_k||
  std::optional<double> nrmse;
  double seconds = 0.0;
};

struct ConvergenceTrace {
  std::vector<IterationRecord> records;
};

/// Hook invoked after each iteration (and once for the initial point with
/// iteration 0); may fill in the record's nrmse.
using IterationObserver = std::function<void(const PatchStack& v, IterationRecord& rec)>;

struct MannResult {
  PatchStack v;
  ConvergenceTrace trace;
  int iterations_run = 0;
};

/// Mann iteration v <- (1 - rho) v + rho T v, run as the three-step body
///   w <- F(v);  z <- G^P(2w - v);  v <- v + 2 rho (z - w).
/// Stops at max_iters or when the relative update norm drops to
/// residual_tol. Throws DivergenceError when the state goes non-finite.
MannResult mann_solve(const ConsensusOperator& op, const AgentSet& agents, PatchStack v0,
                      const MannConfig& cfg, const IterationObserver& observer = nullptr);

/// Closed-form proximal map of f(v) = 1/2 ||v - b||^2 with prox parameter
/// sigma: v -> (v + sigma^2 b) / (1 + sigma^2).
Agent proximal_quadratic_agent(ComplexImage b, double sigma);

}  // namespace pmace
