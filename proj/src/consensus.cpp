#include "pmace/consensus.hpp"

#include <chrono>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pmace {

PatchStack::PatchStack(std::vector<ComplexImage> patches) : patches_(std::move(patches)) {
  if (patches_.empty()) throw ShapeError("PatchStack: empty stack");
  for (const auto& p : patches_) {
    if (!p.same_shape(patches_.front()))
      throw ShapeError("PatchStack: patches must share one shape");
  }
}

PatchStack PatchStack::zeros(int count, int rows, int cols) {
  return PatchStack(std::vector<ComplexImage>(count, ComplexImage(rows, cols)));
}

PatchStack PatchStack::project_from(const ComplexImage& x, const ScanPattern& scan) {
  std::vector<ComplexImage> patches;
  patches.reserve(scan.count());
  for (int j = 0; j < scan.count(); ++j) patches.push_back(extract_patch(x, scan, j));
  return PatchStack(std::move(patches));
}

double norm2_sq(const PatchStack& v) {
  double s = 0;
  for (int j = 0; j < v.count(); ++j) s += norm2_sq(v.patch(j));
  return s;
}

double norm2(const PatchStack& v) { return std::sqrt(norm2_sq(v)); }

double distance(const PatchStack& a, const PatchStack& b) {
  if (a.count() != b.count()) throw ShapeError("distance: stack length mismatch");
  double s = 0;
  for (int j = 0; j < a.count(); ++j) s += norm2_sq(a.patch(j) - b.patch(j));
  return std::sqrt(s);
}

bool all_finite(const PatchStack& v) {
  for (int j = 0; j < v.count(); ++j)
    if (!all_finite(v.patch(j))) return false;
  return true;
}

AgentSet::AgentSet(std::vector<Agent> agents) : agents_(std::move(agents)) {
  if (agents_.empty()) throw ShapeError("AgentSet: empty set");
  for (const auto& a : agents_)
    if (!a) throw ConfigError("AgentSet: null agent");
}

PatchStack apply_agents(const AgentSet& agents, const PatchStack& v) {
  if (agents.count() != v.count())
    throw ShapeError("apply_agents: agent/stack length mismatch (" +
                     std::to_string(agents.count()) + " vs " + std::to_string(v.count()) + ")");
  std::vector<ComplexImage> out(v.count());
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < v.count(); ++j) {
    try {
      out[j] = agents.agent(j)(v.patch(j));
      if (!out[j].same_shape(v.patch(j)))
        throw ShapeError("apply_agents: agent " + std::to_string(j) + " changed the patch shape");
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return PatchStack(std::move(out));
}

ConsensusOperator::ConsensusOperator(ScanPattern scan, RealImage weight, bool strict)
    : scan_(std::move(scan)),
      weight_(std::move(weight)),
      lambda_(scan_.image_rows(), scan_.image_cols()),
      support_(scan_.image_rows(), scan_.image_cols()) {
  if (weight_.rows() != scan_.patch_rows() || weight_.cols() != scan_.patch_cols())
    throw ShapeError("ConsensusOperator: weight map must match the patch shape");
  for (size_t i = 0; i < weight_.size(); ++i) {
    if (!(weight_[i] >= 0) || !std::isfinite(weight_[i]))
      throw ConfigError("ConsensusOperator: weights must be finite and non-negative");
  }

  for (int j = 0; j < scan_.count(); ++j) accumulate_patch(lambda_, weight_, scan_, j);
  RealImage covered = coverage_counts(scan_);

  size_t n_support = 0, n_dead = 0;
  std::ostringstream dead;
  for (int r = 0; r < lambda_.rows(); ++r) {
    for (int c = 0; c < lambda_.cols(); ++c) {
      if (lambda_(r, c) > 0) {
        support_(r, c) = 1;
        ++n_support;
      } else if (covered(r, c) > 0) {
        // covered by some patch but with zero total weight
        if (n_dead < 8) dead << " (" << r << "," << c << ")";
        ++n_dead;
      }
    }
  }
  if (n_support == 0) throw CoverageError("ConsensusOperator: empty reconstruction support");
  if (strict && n_dead > 0) {
    throw CoverageError("ConsensusOperator: " + std::to_string(n_dead) +
                        " covered pixel(s) have zero weight, e.g." + dead.str());
  }
}

void ConsensusOperator::check_stack(const PatchStack& v) const {
  if (v.count() != scan_.count())
    throw ShapeError("ConsensusOperator: stack length " + std::to_string(v.count()) +
                     " does not match scan count " + std::to_string(scan_.count()));
  if (v.patch_rows() != scan_.patch_rows() || v.patch_cols() != scan_.patch_cols())
    throw ShapeError("ConsensusOperator: patch shape mismatch");
}

ComplexImage ConsensusOperator::weighted_mean(const PatchStack& v) const {
  check_stack(v);
  ComplexImage acc(scan_.image_rows(), scan_.image_cols());
  ComplexImage weighted(scan_.patch_rows(), scan_.patch_cols());
  for (int j = 0; j < scan_.count(); ++j) {
    const ComplexImage& vj = v.patch(j);
    for (size_t i = 0; i < weighted.size(); ++i) weighted[i] = weight_[i] * vj[i];
    accumulate_patch(acc, weighted, scan_, j);
  }
  for (size_t i = 0; i < acc.size(); ++i) acc[i] = support_[i] ? acc[i] / lambda_[i] : Complex(0.0);
  return acc;
}

PatchStack ConsensusOperator::project(const PatchStack& v) const {
  ComplexImage xbar = weighted_mean(v);
  std::vector<ComplexImage> out(scan_.count());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < scan_.count(); ++j) out[j] = extract_patch(xbar, scan_, j);
  return PatchStack(std::move(out));
}

PatchStack fixed_point_map(const ConsensusOperator& op, const AgentSet& agents,
                           const PatchStack& v) {
  PatchStack w = apply_agents(agents, v);
  std::vector<ComplexImage> reflected;
  reflected.reserve(v.count());
  for (int j = 0; j < v.count(); ++j)
    reflected.push_back(Complex(2.0) * w.patch(j) - v.patch(j));
  PatchStack z = op.project(PatchStack(std::move(reflected)));
  std::vector<ComplexImage> out;
  out.reserve(v.count());
  for (int j = 0; j < v.count(); ++j)
    out.push_back(Complex(2.0) * z.patch(j) - (Complex(2.0) * w.patch(j) - v.patch(j)));
  return PatchStack(std::move(out));
}

MannResult mann_solve(const ConsensusOperator& op, const AgentSet& agents, PatchStack v0,
                      const MannConfig& cfg, const IterationObserver& observer) {
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0))
    throw ConfigError("mann_solve: rho must be strictly inside (0, 1)");
  if (cfg.max_iters <= 0) throw ConfigError("mann_solve: max_iters must be positive");
  if (cfg.residual_tol < 0) throw ConfigError("mann_solve: residual_tol must be non-negative");

  MannResult result{std::move(v0), {}, 0};
  PatchStack& v = result.v;
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (cfg.record_trace) {
    IterationRecord rec{0, 0.0, std::nullopt, 0.0};
    if (observer) observer(v, rec);
    result.trace.records.push_back(rec);
  }

  for (int k = 1; k <= cfg.max_iters; ++k) {
    double v_norm = norm2(v);

    PatchStack w = apply_agents(agents, v);
    std::vector<ComplexImage> reflected;
    reflected.reserve(v.count());
    for (int j = 0; j < v.count(); ++j)
      reflected.push_back(Complex(2.0) * w.patch(j) - v.patch(j));
    PatchStack z = op.project(PatchStack(std::move(reflected)));

    double update_sq = 0.0;
    for (int j = 0; j < v.count(); ++j) {
      ComplexImage& vj = v.patch(j);
      const ComplexImage& wj = w.patch(j);
      const ComplexImage& zj = z.patch(j);
      for (size_t i = 0; i < vj.size(); ++i) {
        Complex step = 2.0 * cfg.rho * (zj[i] - wj[i]);
        update_sq += std::norm(step);
        vj[i] += step;
      }
    }

    if (!all_finite(v))
      throw DivergenceError("mann_solve: non-finite state at iteration " + std::to_string(k), k);

    double residual = v_norm > 0 ? std::sqrt(update_sq) / v_norm : std::sqrt(update_sq);
    result.iterations_run = k;
    if (cfg.record_trace || observer) {
      IterationRecord rec{k, residual, std::nullopt, elapsed()};
      if (observer) observer(v, rec);
      if (cfg.record_trace) result.trace.records.push_back(rec);
    }
    if (residual <= cfg.residual_tol) break;
  }
  return result;
}

Agent proximal_quadratic_agent(ComplexImage b, double sigma) {
  if (sigma <= 0) throw ConfigError("proximal_quadratic_agent: sigma must be positive");
  double s2 = sigma * sigma;
  return [b = std::move(b), s2](const ComplexImage& v) {
    if (!v.same_shape(b)) throw ShapeError("proximal_quadratic_agent: shape mismatch");
    ComplexImage out(v.rows(), v.cols());
    for (size_t i = 0; i < v.size(); ++i) out[i] = (v[i] + s2 * b[i]) / (1.0 + s2);
    return out;
  };
}

}  // namespace pmace
