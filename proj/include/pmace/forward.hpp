#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmace/grid.hpp"
#include "pmace/probe.hpp"
#include "pmace/scan.hpp"

namespace pmace {

/// Far-field intensity |F(d .* v)|^2 with the orthonormal 2D DFT.
RealImage forward_intensity(const Probe& probe, const ComplexImage& v);

struct NoiseConfig {
  double peak_rate = 1e4;    // r_p, photons at the brightest detector pixel
  double dark_current = 0.5; // mean dark counts added inside the Poisson rate
  uint64_t seed = 0;
  bool noiseless = false;    // use the Poisson mean instead of sampling
};

/// J non-negative amplitude patches (square-rooted diffraction intensities).
struct MeasurementSet {
  std::vector<RealImage> amplitudes;
  int count() const { return static_cast<int>(amplitudes.size()); }
};

/// Synthesizes measurements y_j = sqrt(Pois(r_p I_j / max_k max(I_k) + dark)).
/// Per-patch RNG substreams make the result independent of evaluation order
/// and deterministic given the seed.
MeasurementSet simulate_measurements(const ComplexImage& x, const Probe& probe,
                                     const ScanPattern& scan, const NoiseConfig& noise);

struct PhantomSpec {
  std::string kind = "smooth";  // smooth | blobs | constant
  double magnitude_min = 0.6;   // magnitude mapped into [magnitude_min, 1]
  double phase_range = M_PI / 2;  // phase mapped into [-phase_range/2, phase_range/2]
  uint64_t seed = 0;
};

/// Synthetic complex transmittance with magnitude in (0, 1] and bounded phase.
ComplexImage generate_phantom(int rows, int cols, const PhantomSpec& spec);

/// Compose a complex image from separate magnitude and phase arrays.
ComplexImage compose_complex(const RealImage& mag, const RealImage& ph);

}  // namespace pmace
