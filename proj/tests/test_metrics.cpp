#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pmace/metrics.hpp"

using namespace pmace;
using namespace pmace::testing;

namespace {

// independent 1-D oracle: scan the phase on a fine grid (with refinement),
// solving the real gain per phase by least squares
double nrmse_grid_oracle(const ComplexImage& xhat, const ComplexImage& x) {
  double xhat_sq = norm2_sq(xhat);
  double x_norm = norm2(x);
  Complex dot = inner(xhat, x);

  auto value_at = [&](double theta) {
    double gain = std::max(0.0, (std::exp(Complex(0, -theta)) * dot).real() / xhat_sq);
    double err_sq = 0;
    Complex c = gain * std::exp(Complex(0, theta));
    for (size_t i = 0; i < x.size(); ++i) err_sq += std::norm(c * xhat[i] - x[i]);
    return std::sqrt(err_sq) / x_norm;
  };

  double lo = 0, hi = 2 * M_PI, best_theta = 0, best = 1e300;
  for (int level = 0; level < 4; ++level) {
    int n = 4000;
    double step = (hi - lo) / n;
    for (int i = 0; i <= n; ++i) {
      double theta = lo + i * step;
      double v = value_at(theta);
      if (v < best) {
        best = v;
        best_theta = theta;
      }
    }
    lo = best_theta - 2 * step;
    hi = best_theta + 2 * step;
  }
  return best;
}

}  // namespace

TEST_CASE("aligned_nrmse") {
  SUBCASE("exact match gives zero") {
    ComplexImage x = random_image(8, 8, 1);
    CHECK(aligned_nrmse(x, x) <= 1e-14);
  }
  SUBCASE("global phase rotations vanish") {
    ComplexImage x = random_image(8, 8, 2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(0, 2 * M_PI);
    for (int k = 0; k < 20; ++k) {
      Complex rot = std::polar(1.0, angle(rng));
      CHECK(aligned_nrmse(rot * x, x) <= 1e-12);
    }
  }
  SUBCASE("closed form matches the grid-search oracle") {
    // 3-element vectors with explicit numbers
    ComplexImage xhat(1, 3), x(1, 3);
    xhat(0, 0) = Complex(1.0, 0.5);
    xhat(0, 1) = Complex(-0.3, 1.2);
    xhat(0, 2) = Complex(0.8, -0.7);
    x(0, 0) = Complex(0.4, -0.2);
    x(0, 1) = Complex(1.5, 0.3);
    x(0, 2) = Complex(-0.6, 0.9);
    CHECK(std::abs(aligned_nrmse(xhat, x) - nrmse_grid_oracle(xhat, x)) <= 1e-6);

    for (uint64_t seed = 0; seed < 5; ++seed) {
      ComplexImage a = random_image(2, 3, 10 + seed);
      ComplexImage b = random_image(2, 3, 20 + seed);
      CHECK(std::abs(aligned_nrmse(a, b) - nrmse_grid_oracle(a, b)) <= 1e-6);
    }
  }
  SUBCASE("alignment never hurts") {
    for (uint64_t seed = 0; seed < 10; ++seed) {
      ComplexImage a = random_image(6, 6, 30 + seed);
      ComplexImage b = random_image(6, 6, 40 + seed);
      CHECK(aligned_nrmse(a, b) <= norm2(a - b) / norm2(b) + 1e-14);
    }
  }
  SUBCASE("invariant under simultaneous rotation") {
    ComplexImage a = random_image(6, 6, 50);
    ComplexImage b = random_image(6, 6, 51);
    Complex rot = std::polar(1.0, 1.234);
    CHECK(std::abs(aligned_nrmse(a, b) - aligned_nrmse(rot * a, rot * b)) <= 1e-12);
  }
  SUBCASE("zero estimate gives one, zero reference throws") {
    ComplexImage x = random_image(4, 4, 60);
    CHECK(aligned_nrmse(ComplexImage(4, 4), x) == 1.0);
    CHECK_THROWS_AS(aligned_nrmse(x, ComplexImage(4, 4)), ConfigError);
  }
  SUBCASE("crop region restricts the comparison") {
    ComplexImage a = random_image(8, 8, 61);
    ComplexImage b = a;
    b(0, 0) = Complex(100, 100);  // corrupt a corner outside the crop
    CropRegion crop{2, 2, 4, 4};
    CHECK(aligned_nrmse(b, a, crop) <= 1e-14);
    CHECK(aligned_nrmse(b, a) > 0.1);
    CHECK_THROWS_AS(aligned_nrmse(b, a, CropRegion{6, 6, 4, 4}), ShapeError);
  }
  SUBCASE("masked variant ignores out-of-mask pixels") {
    ComplexImage a = random_image(4, 4, 62);
    ComplexImage b = a;
    b(3, 3) = Complex(50, 0);
    Grid2<uint8_t> mask(4, 4);
    for (size_t i = 0; i < mask.size(); ++i) mask[i] = 1;
    mask(3, 3) = 0;
    CHECK(aligned_nrmse_masked(b, a, mask) <= 1e-14);
  }
}

TEST_CASE("overlap_ratio_pair") {
  Probe uniform(ComplexImage(16, 16, Complex(1.0, 0.0)));

  SUBCASE("identical positions give 1") {
    ScanPattern scan({{0, 0}, {0, 0}}, 16, 16, 32, 32);
    CHECK(overlap_ratio_pair(uniform, scan, 0, 1) == 1.0);
  }
  SUBCASE("disjoint patches give 0") {
    ScanPattern scan({{0, 0}, {16, 16}}, 16, 16, 32, 32);
    CHECK(overlap_ratio_pair(uniform, scan, 0, 1) == 0.0);
  }
  SUBCASE("uniform probe horizontal neighbors: (N - s)/N exactly") {
    std::vector<std::pair<int, int>> cases = {{16, 4},  {16, 7},  {32, 10}, {32, 15}, {8, 3},
                                              {8, 5},   {24, 6},  {24, 17}, {64, 20}, {64, 48}};
    for (auto [n, s] : cases) {
      Probe p(ComplexImage(n, n, Complex(1.0, 0.0)));
      ScanPattern scan({{0, 0}, {0, s}}, n, n, n, n + s);
      double expected = static_cast<double>((n - s) * n) / (static_cast<double>(n) * n);
      CHECK(overlap_ratio_pair(p, scan, 0, 1) == expected);
    }
  }
  SUBCASE("symmetric in (j, k) and invariant under probe rescaling") {
    Probe p(random_image(8, 8, 70));
    ScanPattern scan({{0, 0}, {3, 2}}, 8, 8, 16, 16);
    double a = overlap_ratio_pair(p, scan, 0, 1);
    CHECK(a == overlap_ratio_pair(p, scan, 1, 0));
    Probe scaled(Complex(2.5, 1.0) * p.field());
    CHECK(overlap_ratio_pair(scaled, scan, 0, 1) == doctest::Approx(a).epsilon(1e-12));
  }
  SUBCASE("rejects j == k") {
    ScanPattern scan({{0, 0}, {0, 0}}, 16, 16, 32, 32);
    CHECK_THROWS_AS(overlap_ratio_pair(uniform, scan, 1, 1), ConfigError);
  }
}

TEST_CASE("overlap_ratio") {
  SUBCASE("two-position pattern equals the pair ratio") {
    Probe uniform(ComplexImage(8, 8, Complex(1.0, 0.0)));
    ScanPattern scan = generate_scan_pattern(8, 13, 8, 5, 0, 0);  // 1x2 grid
    REQUIRE(scan.count() == 2);
    CHECK(overlap_ratio(uniform, scan) == overlap_ratio_pair(uniform, scan, 0, 1));
  }
  SUBCASE("unperturbed uniform grid hits the closed form") {
    Probe uniform(ComplexImage(8, 8, Complex(1.0, 0.0)));
    ScanPattern scan = generate_scan_pattern(20, 20, 8, 4, 0, 0);
    // both directional ratios are (8-4)/8 = 0.5
    CHECK(overlap_ratio(uniform, scan) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("patterns without a generating grid are rejected") {
    Probe uniform(ComplexImage(4, 4, Complex(1.0, 0.0)));
    ScanPattern scan({{0, 0}, {2, 2}}, 4, 4, 8, 8);
    CHECK_THROWS_AS(overlap_ratio(uniform, scan), ConfigError);
  }
}

TEST_CASE("forward_nrmse") {
  ComplexImage x = random_image(16, 16, 80);
  Probe probe(random_image(8, 8, 81));
  ScanPattern scan = generate_scan_pattern(16, 16, 8, 4, 0, 0);

  SUBCASE("self-consistent noiseless data gives zero") {
    MeasurementSet y = simulate_measurements(x, probe, scan, NoiseConfig{1.0, 0.0, 0, true});
    CHECK(forward_nrmse(x, y, probe, scan, /*normalized=*/true) <= 1e-10);
  }
  SUBCASE("zero reconstruction gives one") {
    MeasurementSet y = simulate_measurements(x, probe, scan, NoiseConfig{1.0, 0.0, 0, true});
    CHECK(forward_nrmse(ComplexImage(16, 16), y, probe, scan) == 1.0);
  }
  SUBCASE("invariant under global phase rotation") {
    MeasurementSet y = simulate_measurements(x, probe, scan, NoiseConfig{1e4, 0.5, 1, false});
    double base = forward_nrmse(x, y, probe, scan);
    double rotated = forward_nrmse(std::polar(1.0, 0.77) * x, y, probe, scan);
    CHECK(std::abs(base - rotated) <= 1e-12);
  }
  SUBCASE("zero measurements throw") {
    MeasurementSet y;
    for (int j = 0; j < scan.count(); ++j) y.amplitudes.push_back(RealImage(8, 8));
    CHECK_THROWS_AS(forward_nrmse(x, y, probe, scan), ConfigError);
  }
}
