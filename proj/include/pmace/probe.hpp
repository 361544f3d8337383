#pragma once

#include <cstdint>
#include <string>

#include "pmace/grid.hpp"

namespace pmace {

/// Complex illumination function d with its derived stabilizer and inverses.
///
/// epsilon = 1e-6 * sqrt(||d||^2 / dim(d)); the stable inverse
/// d*/(|d|^2 + epsilon) is what the data-fitting agent uses, while the exact
/// inverse d*/|d|^2 (zero where d is zero) is kept for agent inversion.
class Probe {
public:
  explicit Probe(ComplexImage d);

  const ComplexImage& field() const { return d_; }
  double epsilon() const { return epsilon_; }
  const ComplexImage& stable_inverse() const { return d_inv_; }
  const ComplexImage& exact_inverse() const { return d_inv_exact_; }

  int rows() const { return d_.rows(); }
  int cols() const { return d_.cols(); }

private:
  ComplexImage d_;
  double epsilon_;
  ComplexImage d_inv_;
  ComplexImage d_inv_exact_;
};

/// W = |d|^kappa, the consensus weighting derived from probe power.
RealImage weight_map(const Probe& probe, double kappa);

struct ProbeSpec {
  std::string kind = "disk";   // disk | gaussian
  // illumination radius (disk) or sigma (gaussian) as a fraction of the patch
  // size; the default keeps the probe well inside the detector patch so the
  // diffraction patterns stay adequately sampled
  double radius_frac = 0.18;
  double defocus = 1.0;        // quadratic phase at the disk edge, in units of pi radians
  double phase_strength = 1.0; // gaussian kind: rms of the random smooth phase, radians
  uint64_t seed = 0;
};

/// Synthetic probes:
///  - "disk": aperture of radius radius_frac*size with quadratic (defocus) phase,
///    zero outside the aperture, anti-aliased edge;
///  - "gaussian": gaussian envelope with a random smooth phase, nonzero everywhere.
Probe generate_probe(int patch_size, const ProbeSpec& spec);

}  // namespace pmace
