#include "pmace/pmace.hpp"

#include "pmace/fft.hpp"
#include "pmace/metrics.hpp"

namespace pmace {

namespace {

inline Complex unit_phase(Complex u) {
  double mag = std::abs(u);
  return mag > 0 ? u / mag : Complex(1.0, 0.0);
}

}  // namespace

Agent data_fit_agent(const Probe& probe, RealImage y_j, double alpha, bool stabilized) {
  if (!(alpha > 0.0 && alpha < 1.0))
    throw ConfigError("data_fit_agent: alpha must be strictly inside (0, 1)");
  if (y_j.rows() != probe.rows() || y_j.cols() != probe.cols())
    throw ShapeError("data_fit_agent: amplitude/probe shape mismatch");
  for (size_t i = 0; i < y_j.size(); ++i)
    if (!(y_j[i] >= 0)) throw ConfigError("data_fit_agent: negative amplitude");

  const ComplexImage& d = probe.field();
  const ComplexImage& d_inv = stabilized ? probe.stable_inverse() : probe.exact_inverse();
  return [d, d_inv, y = std::move(y_j), alpha](const ComplexImage& v) {
    if (!v.same_shape(d)) throw ShapeError("data_fit_agent: patch shape mismatch");
    ComplexImage spectrum = fft2(hadamard(d, v));
    for (size_t i = 0; i < spectrum.size(); ++i)
      spectrum[i] = y[i] * unit_phase(spectrum[i]);
    ComplexImage projected = ifft2(spectrum);
    ComplexImage out(v.rows(), v.cols());
    for (size_t i = 0; i < out.size(); ++i)
      out[i] = (1.0 - alpha) * v[i] + alpha * d_inv[i] * projected[i];
    return out;
  };
}

ComplexImage invert_data_fit_agent(const Probe& probe, const RealImage& y_j, double alpha,
                                   const ComplexImage& w) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw ConfigError("invert_data_fit_agent: alpha must be in [0, 1)");
  if (!w.same_shape(probe.field()) || y_j.rows() != w.rows() || y_j.cols() != w.cols())
    throw ShapeError("invert_data_fit_agent: shape mismatch");

  ComplexImage u = fft2(hadamard(probe.field(), w));
  double scale = norm2(u);
  ComplexImage fdv(u.rows(), u.cols());
  for (size_t i = 0; i < u.size(); ++i) {
    double mag = (std::abs(u[i]) - alpha * y_j[i]) / (1.0 - alpha);
    if (mag < -1e-12 * (scale + 1.0))
      throw ConfigError("invert_data_fit_agent: negative solved magnitude; "
                        "input is not in the agent's range");
    fdv[i] = std::max(mag, 0.0) * unit_phase(u[i]);
  }

  ComplexImage field = ifft2(fdv);
  const ComplexImage& d = probe.field();
  ComplexImage v(w.rows(), w.cols());
  double field_scale = norm2(field);
  for (size_t i = 0; i < v.size(); ++i) {
    if (std::norm(d[i]) > 0) {
      v[i] = probe.exact_inverse()[i] * field[i];
    } else if (std::abs(field[i]) > 1e-9 * (field_scale + 1.0)) {
      throw ConfigError("invert_data_fit_agent: zero probe pixel meets nonzero field");
    }
  }
  return v;
}

ComplexImage init_guess(const MeasurementSet& y, const Probe& probe, const ScanPattern& scan) {
  if (y.count() != scan.count()) throw ShapeError("init_guess: measurement count mismatch");
  double d_norm = norm2(probe.field());

  RealImage counts = coverage_counts(scan);
  RealImage acc(scan.image_rows(), scan.image_cols());
  for (int j = 0; j < scan.count(); ++j) {
    RealImage level(scan.patch_rows(), scan.patch_cols(), norm2(y.amplitudes[j]) / d_norm);
    accumulate_patch(acc, level, scan, j);
  }
  ComplexImage x0(scan.image_rows(), scan.image_cols());
  for (size_t i = 0; i < x0.size(); ++i)
    x0[i] = counts[i] > 0 ? Complex(acc[i] / counts[i], 0.0) : Complex(0.0);
  return x0;
}

ReconstructionResult pmace_reconstruct(const MeasurementSet& y, const Probe& probe,
                                       const ScanPattern& scan, const PmaceConfig& cfg,
                                       const ComplexImage* ground_truth) {
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
    throw ConfigError("pmace_reconstruct: alpha must be strictly inside (0, 1)");
  if (cfg.kappa < 1.0 || cfg.kappa > 2.0)
    throw ConfigError("pmace_reconstruct: kappa must be in [1, 2]");
  if (y.count() != scan.count())
    throw ShapeError("pmace_reconstruct: measurement count mismatch");

  ConsensusOperator op(scan, weight_map(probe, cfg.kappa), /*strict=*/false);

  std::vector<Agent> agents;
  agents.reserve(scan.count());
  for (int j = 0; j < scan.count(); ++j)
    agents.push_back(data_fit_agent(probe, y.amplitudes[j], cfg.alpha));

  PatchStack v0 = PatchStack::project_from(init_guess(y, probe, scan), scan);

  IterationObserver observer;
  if (ground_truth) {
    observer = [&op, ground_truth](const PatchStack& v, IterationRecord& rec) {
      rec.nrmse = aligned_nrmse_masked(op.weighted_mean(v), *ground_truth, op.support());
    };
  }

  MannConfig mann{cfg.rho, cfg.max_iters, cfg.residual_tol, /*record_trace=*/true};
  MannResult solved = mann_solve(op, AgentSet(std::move(agents)), std::move(v0), mann, observer);

  ReconstructionResult result;
  result.image = op.weighted_mean(solved.v);
  result.trace = std::move(solved.trace);
  result.iterations_run = solved.iterations_run;
  result.method = "pmace";
  result.params = {{"alpha", cfg.alpha},
                   {"kappa", cfg.kappa},
                   {"rho", cfg.rho},
                   {"max_iters", static_cast<double>(cfg.max_iters)},
                   {"residual_tol", cfg.residual_tol}};
  return result;
}

}  // namespace pmace
