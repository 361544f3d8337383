#include "pmace/baselines.hpp"

#include <algorithm>
#include <chrono>

#include "pmace/consensus.hpp"
#include "pmace/fft.hpp"
#include "pmace/metrics.hpp"
#include "pmace/pmace.hpp"
#include "pmace/rng.hpp"

namespace pmace {

namespace {

inline Complex unit_phase(Complex u) {
  double mag = std::abs(u);
  return mag > 0 ? u / mag : Complex(1.0, 0.0);
}

double elapsed_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void validate_measurements(const MeasurementSet& y, const Probe& probe,
                           const ScanPattern& scan) {
  if (y.count() != scan.count()) throw ShapeError("baseline: measurement count mismatch");
  if (probe.rows() != scan.patch_rows() || probe.cols() != scan.patch_cols())
    throw ShapeError("baseline: probe/patch shape mismatch");
}

// Summed probe power Lambda_2 = sum_j P_j^T |d|^2 P_j over the image.
RealImage probe_power_map(const Probe& probe, const ScanPattern& scan) {
  RealImage power(probe.rows(), probe.cols());
  for (size_t i = 0; i < power.size(); ++i) power[i] = std::norm(probe.field()[i]);
  RealImage lambda2(scan.image_rows(), scan.image_cols());
  for (int j = 0; j < scan.count(); ++j) accumulate_patch(lambda2, power, scan, j);
  return lambda2;
}

}  // namespace

Grid2<uint8_t> illuminated_support(const Probe& probe, const ScanPattern& scan) {
  RealImage lambda2 = probe_power_map(probe, scan);
  Grid2<uint8_t> mask(lambda2.rows(), lambda2.cols());
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = lambda2[i] > 0 ? 1 : 0;
  return mask;
}

ReconstructionResult epie_reconstruct(const MeasurementSet& y, const Probe& probe,
                                      const ScanPattern& scan, const BaselineConfig& cfg,
                                      const ComplexImage* ground_truth) {
  validate_measurements(y, probe, scan);
  if (cfg.tunable <= 0) throw ConfigError("epie: step size must be positive");
  if (cfg.max_iters <= 0) throw ConfigError("epie: max_iters must be positive");

  const ComplexImage& d = probe.field();
  double peak_power = 0;
  for (size_t i = 0; i < d.size(); ++i) peak_power = std::max(peak_power, std::norm(d[i]));

  ComplexImage x = init_guess(y, probe, scan);
  Grid2<uint8_t> mask = illuminated_support(probe, scan);

  ReconstructionResult result;
  result.method = "epie";
  result.params = {{"step", cfg.tunable}, {"max_iters", static_cast<double>(cfg.max_iters)}};

  auto t0 = std::chrono::steady_clock::now();
  auto record = [&](int iteration, double residual) {
    IterationRecord rec{iteration, residual, std::nullopt, elapsed_since(t0)};
    if (ground_truth) rec.nrmse = aligned_nrmse_masked(x, *ground_truth, mask);
    result.trace.records.push_back(rec);
  };
  record(0, 0.0);

  std::vector<int> order(scan.count());
  for (int j = 0; j < scan.count(); ++j) order[j] = j;

  for (int epoch = 1; epoch <= cfg.max_iters; ++epoch) {
    ComplexImage x_prev = x;
    if (cfg.epie_shuffle) {
      auto rng = substream(cfg.seed, "epie-order", static_cast<uint64_t>(epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    for (int j : order) {
      const ScanPoint& p = scan.position(j);
      ComplexImage exit(scan.patch_rows(), scan.patch_cols());
      for (int r = 0; r < exit.rows(); ++r)
        for (int c = 0; c < exit.cols(); ++c) exit(r, c) = d(r, c) * x(p.row + r, p.col + c);

      ComplexImage spectrum = fft2(exit);
      const RealImage& yj = y.amplitudes[j];
      for (size_t i = 0; i < spectrum.size(); ++i)
        spectrum[i] = yj[i] * unit_phase(spectrum[i]);
      ComplexImage corrected = ifft2(spectrum);

      for (int r = 0; r < exit.rows(); ++r) {
        for (int c = 0; c < exit.cols(); ++c) {
          Complex delta = corrected(r, c) - exit(r, c);
          x(p.row + r, p.col + c) +=
              cfg.tunable * std::conj(d(r, c)) / peak_power * delta;
        }
      }
    }
    if (!all_finite(x))
      throw DivergenceError("epie: non-finite state at epoch " + std::to_string(epoch), epoch);
    double prev_norm = norm2(x_prev);
    double residual = norm2(x - x_prev) / (prev_norm > 0 ? prev_norm : 1.0);
    result.iterations_run = epoch;
    record(epoch, residual);
  }
  result.image = std::move(x);
  return result;
}

double awf_loss(const ComplexImage& x, const MeasurementSet& y, const Probe& probe,
                const ScanPattern& scan) {
  validate_measurements(y, probe, scan);
  double loss = 0;
  for (int j = 0; j < scan.count(); ++j) {
    ComplexImage u = fft2(hadamard(probe.field(), extract_patch(x, scan, j)));
    const RealImage& yj = y.amplitudes[j];
    for (size_t i = 0; i < u.size(); ++i) {
      double diff = std::abs(u[i]) - yj[i];
      loss += 0.5 * diff * diff;
    }
  }
  return loss;
}

ComplexImage awf_gradient(const ComplexImage& x, const MeasurementSet& y, const Probe& probe,
                          const ScanPattern& scan) {
  validate_measurements(y, probe, scan);
  std::vector<ComplexImage> contributions(scan.count());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < scan.count(); ++j) {
    ComplexImage u = fft2(hadamard(probe.field(), extract_patch(x, scan, j)));
    const RealImage& yj = y.amplitudes[j];
    for (size_t i = 0; i < u.size(); ++i) u[i] -= yj[i] * unit_phase(u[i]);
    ComplexImage back = ifft2(u);
    for (size_t i = 0; i < back.size(); ++i) back[i] *= std::conj(probe.field()[i]);
    contributions[j] = std::move(back);
  }
  ComplexImage grad(scan.image_rows(), scan.image_cols());
  for (int j = 0; j < scan.count(); ++j) accumulate_patch(grad, contributions[j], scan, j);
  return grad;
}

ReconstructionResult awf_reconstruct(const MeasurementSet& y, const Probe& probe,
                                     const ScanPattern& scan, const BaselineConfig& cfg,
                                     const ComplexImage* ground_truth) {
  validate_measurements(y, probe, scan);
  if (cfg.tunable <= 0) throw ConfigError("awf: step scale must be positive");
  if (cfg.max_iters <= 0) throw ConfigError("awf: max_iters must be positive");

  RealImage lambda2 = probe_power_map(probe, scan);
  double lipschitz = 0;
  for (size_t i = 0; i < lambda2.size(); ++i) lipschitz = std::max(lipschitz, lambda2[i]);
  if (lipschitz <= 0) throw ConfigError("awf: zero probe power");
  double step = cfg.tunable / lipschitz;

  ComplexImage x = init_guess(y, probe, scan);
  ComplexImage x_prev = x;
  Grid2<uint8_t> mask = illuminated_support(probe, scan);

  ReconstructionResult result;
  result.method = "awf";
  result.params = {{"step_scale", cfg.tunable},
                   {"max_iters", static_cast<double>(cfg.max_iters)},
                   {"momentum", cfg.awf_momentum ? 1.0 : 0.0}};

  auto t0 = std::chrono::steady_clock::now();
  auto record = [&](int iteration, double residual) {
    IterationRecord rec{iteration, residual, std::nullopt, elapsed_since(t0)};
    if (ground_truth) rec.nrmse = aligned_nrmse_masked(x, *ground_truth, mask);
    result.trace.records.push_back(rec);
  };
  record(0, 0.0);

  for (int t = 1; t <= cfg.max_iters; ++t) {
    ComplexImage z = x;
    if (cfg.awf_momentum && t > 1) {
      double beta = (t - 1.0) / (t + 2.0);
      for (size_t i = 0; i < z.size(); ++i) z[i] = x[i] + beta * (x[i] - x_prev[i]);
    }
    ComplexImage grad = awf_gradient(z, y, probe, scan);
    x_prev = std::move(x);
    x = ComplexImage(z.rows(), z.cols());
    for (size_t i = 0; i < x.size(); ++i) x[i] = z[i] - step * grad[i];

    if (!all_finite(x))
      throw DivergenceError("awf: non-finite state at iteration " + std::to_string(t), t);
    double prev_norm = norm2(x_prev);
    double residual = norm2(x - x_prev) / (prev_norm > 0 ? prev_norm : 1.0);
    result.iterations_run = t;
    record(t, residual);
  }
  result.image = std::move(x);
  return result;
}

SharpOperators::SharpOperators(const MeasurementSet& y, const Probe& probe,
                               const ScanPattern& scan)
    : y_(y),
      probe_(probe),
      scan_(scan),
      lambda2_(probe_power_map(probe, scan)),
      support_(scan.image_rows(), scan.image_cols()) {
  validate_measurements(y, probe, scan);
  bool any = false;
  for (size_t i = 0; i < support_.size(); ++i) {
    support_[i] = lambda2_[i] > 0 ? 1 : 0;
    any = any || support_[i];
  }
  if (!any) throw CoverageError("sharp: empty probe-power support");
}

ComplexImage SharpOperators::frame_mean(const std::vector<ComplexImage>& u) const {
  const ComplexImage& d = probe_.field();
  ComplexImage acc(scan_.image_rows(), scan_.image_cols());
  ComplexImage demod(scan_.patch_rows(), scan_.patch_cols());
  for (int j = 0; j < scan_.count(); ++j) {
    for (size_t i = 0; i < demod.size(); ++i) demod[i] = std::conj(d[i]) * u[j][i];
    accumulate_patch(acc, demod, scan_, j);
  }
  for (size_t i = 0; i < acc.size(); ++i)
    acc[i] = support_[i] ? acc[i] / lambda2_[i] : Complex(0.0);
  return acc;
}

std::vector<ComplexImage> SharpOperators::frames_from_image(const ComplexImage& x) const {
  const ComplexImage& d = probe_.field();
  std::vector<ComplexImage> u(scan_.count());
  for (int j = 0; j < scan_.count(); ++j) {
    u[j] = extract_patch(x, scan_, j);
    for (size_t i = 0; i < u[j].size(); ++i) u[j][i] *= d[i];
  }
  return u;
}

std::vector<ComplexImage> SharpOperators::consensus_project(
    const std::vector<ComplexImage>& u) const {
  const ComplexImage& d = probe_.field();
  ComplexImage xbar = frame_mean(u);
  std::vector<ComplexImage> out(scan_.count());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < scan_.count(); ++j) {
    out[j] = extract_patch(xbar, scan_, j);
    for (size_t i = 0; i < out[j].size(); ++i) out[j][i] *= d[i];
  }
  return out;
}

std::vector<ComplexImage> SharpOperators::magnitude_project(
    const std::vector<ComplexImage>& u) const {
  std::vector<ComplexImage> out(scan_.count());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < scan_.count(); ++j) {
    ComplexImage spectrum = fft2(u[j]);
    const RealImage& yj = y_.amplitudes[j];
    for (size_t i = 0; i < spectrum.size(); ++i)
      spectrum[i] = yj[i] * unit_phase(spectrum[i]);
    out[j] = ifft2(spectrum);
  }
  return out;
}

std::vector<ComplexImage> SharpOperators::iterate(const std::vector<ComplexImage>& u,
                                                  double beta) const {
  std::vector<ComplexImage> pa = magnitude_project(u);
  std::vector<ComplexImage> pq_pa = consensus_project(pa);
  std::vector<ComplexImage> pq_u = consensus_project(u);
  std::vector<ComplexImage> out(scan_.count());
  for (int j = 0; j < scan_.count(); ++j) {
    out[j] = ComplexImage(u[j].rows(), u[j].cols());
    for (size_t i = 0; i < out[j].size(); ++i)
      out[j][i] = 2.0 * beta * pq_pa[j][i] + (1.0 - 2.0 * beta) * pa[j][i] +
                  beta * (pq_u[j][i] - u[j][i]);
  }
  return out;
}

ReconstructionResult sharp_reconstruct(const MeasurementSet& y, const Probe& probe,
                                       const ScanPattern& scan, const BaselineConfig& cfg,
                                       const ComplexImage* ground_truth) {
  if (!(cfg.tunable > 0.0 && cfg.tunable < 1.0))
    throw ConfigError("sharp: beta must be strictly inside (0, 1)");
  if (cfg.max_iters <= 0) throw ConfigError("sharp: max_iters must be positive");
  double beta = cfg.tunable;

  SharpOperators ops(y, probe, scan);
  std::vector<ComplexImage> u = ops.frames_from_image(init_guess(y, probe, scan));

  ReconstructionResult result;
  result.method = "sharp";
  result.params = {{"beta", beta}, {"max_iters", static_cast<double>(cfg.max_iters)}};

  ComplexImage x = ops.frame_mean(u);
  auto t0 = std::chrono::steady_clock::now();
  auto record = [&](int iteration, double residual) {
    IterationRecord rec{iteration, residual, std::nullopt, elapsed_since(t0)};
    if (ground_truth) rec.nrmse = aligned_nrmse_masked(x, *ground_truth, ops.support());
    result.trace.records.push_back(rec);
  };
  record(0, 0.0);

  for (int t = 1; t <= cfg.max_iters; ++t) {
    std::vector<ComplexImage> next = ops.iterate(u, beta);
    double u_sq = 0, step_sq = 0;
    for (int j = 0; j < scan.count(); ++j) {
      u_sq += norm2_sq(u[j]);
      step_sq += norm2_sq(next[j] - u[j]);
      if (!all_finite(next[j]))
        throw DivergenceError("sharp: non-finite state at iteration " + std::to_string(t), t);
    }
    u = std::move(next);
    x = ops.frame_mean(u);
    double residual = u_sq > 0 ? std::sqrt(step_sq / u_sq) : std::sqrt(step_sq);
    result.iterations_run = t;
    record(t, residual);
  }
  result.image = std::move(x);
  return result;
}

ReconstructionResult baseline_reconstruct(const MeasurementSet& y, const Probe& probe,
                                          const ScanPattern& scan, const BaselineConfig& cfg,
                                          const ComplexImage* ground_truth) {
  if (cfg.method == "epie") return epie_reconstruct(y, probe, scan, cfg, ground_truth);
  if (cfg.method == "awf") return awf_reconstruct(y, probe, scan, cfg, ground_truth);
  if (cfg.method == "sharp") return sharp_reconstruct(y, probe, scan, cfg, ground_truth);
  throw ConfigError("baseline_reconstruct: unknown method '" + cfg.method + "'");
}

}  // namespace pmace
