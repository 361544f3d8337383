#include "pmace/probe.hpp"

#include "pmace/rng.hpp"
#include "smooth_field.hpp"

namespace pmace {

Probe::Probe(ComplexImage d) : d_(std::move(d)) {
  if (d_.empty()) throw ConfigError("Probe: empty field");
  if (!all_finite(d_)) throw ConfigError("Probe: non-finite field");
  double power = norm2_sq(d_);
  if (power <= 0) throw ConfigError("Probe: zero field");
  epsilon_ = 1e-6 * std::sqrt(power / static_cast<double>(d_.size()));

  d_inv_ = ComplexImage(d_.rows(), d_.cols());
  d_inv_exact_ = ComplexImage(d_.rows(), d_.cols());
  for (size_t i = 0; i < d_.size(); ++i) {
    double mag2 = std::norm(d_[i]);
    d_inv_[i] = std::conj(d_[i]) / (mag2 + epsilon_);
    d_inv_exact_[i] = mag2 > 0 ? std::conj(d_[i]) / mag2 : Complex(0.0);
  }
}

RealImage weight_map(const Probe& probe, double kappa) {
  if (kappa < 1.0 || kappa > 2.0) throw ConfigError("weight_map: kappa must be in [1, 2]");
  const ComplexImage& d = probe.field();
  RealImage w(d.rows(), d.cols());
  for (size_t i = 0; i < d.size(); ++i) w[i] = std::pow(std::abs(d[i]), kappa);
  return w;
}

Probe generate_probe(int patch_size, const ProbeSpec& spec) {
  if (patch_size <= 0) throw ConfigError("generate_probe: non-positive patch size");
  int n = patch_size;
  double center = (n - 1) / 2.0;
  ComplexImage d(n, n);

  if (spec.kind == "disk") {
    double radius = spec.radius_frac * n;
    if (radius <= 0) throw ConfigError("generate_probe: non-positive disk radius");
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double rr = std::hypot(r - center, c - center);
        // 1px linear rolloff at the aperture edge
        double mag = std::clamp(radius + 0.5 - rr, 0.0, 1.0);
        double ph = spec.defocus * M_PI * (rr / radius) * (rr / radius);
        d(r, c) = mag * std::polar(1.0, spec.defocus == 0.0 ? 0.0 : ph);
      }
    }
  } else if (spec.kind == "gaussian") {
    double sigma = spec.radius_frac * n;
    auto rng = substream(spec.seed, "probe");
    RealImage ph = detail::smooth_random_field(n, n, 0.08, rng);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) {
        double rr2 = (r - center) * (r - center) + (c - center) * (c - center);
        double mag = std::exp(-rr2 / (2.0 * sigma * sigma));
        d(r, c) = mag * std::polar(1.0, spec.phase_strength * ph(r, c));
      }
    }
  } else {
    throw ConfigError("generate_probe: unknown kind '" + spec.kind + "'");
  }
  return Probe(std::move(d));
}

}  // namespace pmace
