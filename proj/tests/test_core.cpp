#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "pmace/fft.hpp"
#include "pmace/grid.hpp"
#include "pmace/probe.hpp"
#include "pmace/rng.hpp"
#include "pmace/scan.hpp"

using namespace pmace;

namespace {

ComplexImage random_image(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexImage out(rows, cols);
  for (size_t i = 0; i < out.size(); ++i) out[i] = Complex(gauss(rng), gauss(rng));
  return out;
}

}  // namespace

TEST_CASE("fft2 is orthonormal") {
  ComplexImage x = random_image(16, 16, 1);

  SUBCASE("inverse identity") {
    ComplexImage back = ifft2(fft2(x));
    CHECK(norm2(back - x) <= 1e-12 * norm2(x));
  }
  SUBCASE("Parseval") {
    CHECK(norm2_sq(fft2(x)) == doctest::Approx(norm2_sq(x)).epsilon(1e-10));
  }
  SUBCASE("delta spreads flat") {
    ComplexImage delta(8, 8);
    delta(0, 0) = 1.0;
    ComplexImage spectrum = fft2(delta);
    for (size_t i = 0; i < spectrum.size(); ++i)
      CHECK(std::norm(spectrum[i]) == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
  }
}

TEST_CASE("fft call counter") {
  reset_fft_call_count();
  ComplexImage x = random_image(4, 4, 2);
  fft2(x);
  ifft2(x);
  CHECK(fft_call_count() == 2);
}

TEST_CASE("patch extraction") {
  // 4x4 ramp image, position (1,1), 2x2 patch -> the middle block
  ComplexImage x(4, 4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) x(r, c) = Complex(r * 4 + c, 0);
  ScanPattern scan({{1, 1}}, 2, 2, 4, 4);
  ComplexImage patch = extract_patch(x, scan, 0);
  CHECK(patch(0, 0) == Complex(5, 0));
  CHECK(patch(0, 1) == Complex(6, 0));
  CHECK(patch(1, 0) == Complex(9, 0));
  CHECK(patch(1, 1) == Complex(10, 0));

  SUBCASE("constant image gives constant patch") {
    ComplexImage c(4, 4, Complex(3.5, -1.0));
    ComplexImage p = extract_patch(c, scan, 0);
    for (size_t i = 0; i < p.size(); ++i) CHECK(p[i] == Complex(3.5, -1.0));
  }
  SUBCASE("out-of-range index") {
    CHECK_THROWS_AS(extract_patch(x, scan, 1), ShapeError);
  }
}

TEST_CASE("embed/extract identities") {
  ScanPattern scan({{1, 2}, {3, 0}}, 3, 3, 8, 8);
  ComplexImage v = random_image(3, 3, 3);

  SUBCASE("P_j P_j^T = I") {
    CHECK(norm2(extract_patch(embed_patch(v, scan, 0), scan, 0) - v) == 0.0);
  }
  SUBCASE("zero patch embeds to zero image") {
    ComplexImage z = embed_patch(ComplexImage(3, 3), scan, 1);
    CHECK(norm2(z) == 0.0);
  }
  SUBCASE("adjoint identity <extract(x), v> = <x, embed(v)>") {
    ComplexImage x = random_image(8, 8, 4);
    Complex lhs = inner(extract_patch(x, scan, 1), v);
    Complex rhs = inner(x, embed_patch(v, scan, 1));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }
  SUBCASE("coverage-count oracle: sum_j embed(extract(x)) = counts .* x") {
    ComplexImage x = random_image(8, 8, 5);
    ComplexImage acc(8, 8);
    for (int j = 0; j < scan.count(); ++j)
      acc = acc + embed_patch(extract_patch(x, scan, j), scan, j);
    RealImage counts = coverage_counts(scan);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c)
        CHECK(std::abs(acc(r, c) - counts(r, c) * x(r, c)) <= 1e-14);
  }
}

TEST_CASE("generate_scan_pattern") {
  SUBCASE("jitter 0 gives the exact grid") {
    ScanPattern scan = generate_scan_pattern(16, 16, 4, 4, 0, 7);
    REQUIRE(scan.count() == 16);
    CHECK(scan.position(0).row == 0);
    CHECK(scan.position(0).col == 0);
    CHECK(scan.position(5).row == 4);
    CHECK(scan.position(5).col == 4);
    CHECK(scan.grid_shape() == std::pair<int, int>{4, 4});
  }
  SUBCASE("never out of bounds over many seeds") {
    for (uint64_t seed = 0; seed < 1000; ++seed) {
      ScanPattern scan = generate_scan_pattern(64, 64, 16, 12, 5, seed);
      for (const auto& p : scan.positions()) {
        CHECK(p.row >= 0);
        CHECK(p.col >= 0);
        CHECK(p.row + 16 <= 64);
        CHECK(p.col + 16 <= 64);
      }
    }
  }
  SUBCASE("deterministic given seed") {
    ScanPattern a = generate_scan_pattern(64, 64, 16, 12, 5, 42);
    ScanPattern b = generate_scan_pattern(64, 64, 16, 12, 5, 42);
    REQUIRE(a.count() == b.count());
    for (int j = 0; j < a.count(); ++j) {
      CHECK(a.position(j).row == b.position(j).row);
      CHECK(a.position(j).col == b.position(j).col);
    }
  }
  SUBCASE("full coverage at the reference sweep geometry") {
    // spacing 68, patch 256 on 800x800 covers the whole image
    ScanPattern scan = generate_scan_pattern(800, 800, 256, 68, 0, 0);
    RealImage counts = coverage_counts(scan);
    for (size_t i = 0; i < counts.size(); ++i) REQUIRE(counts[i] > 0);
  }
  SUBCASE("infeasible grid") {
    CHECK_THROWS_AS(generate_scan_pattern(8, 8, 16, 4, 0, 0), ConfigError);
  }
}

TEST_CASE("probe epsilon and inverses") {
  ComplexImage d(4, 4, Complex(2.0, 0.0));
  Probe probe(d);
  // epsilon = 1e-6 sqrt(||d||^2 / dim(d)) = 1e-6 * 2
  CHECK(probe.epsilon() == doctest::Approx(2e-6).epsilon(1e-12));
  CHECK(probe.stable_inverse()(0, 0).real() ==
        doctest::Approx(2.0 / (4.0 + 2e-6)).epsilon(1e-12));
  CHECK(probe.exact_inverse()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));

  SUBCASE("zero probe rejected") {
    CHECK_THROWS_AS(Probe(ComplexImage(4, 4)), ConfigError);
  }
  SUBCASE("exact inverse is zero at zero pixels") {
    ComplexImage mixed(2, 2, Complex(1.0, 0.0));
    mixed(0, 0) = 0.0;
    Probe p(mixed);
    CHECK(p.exact_inverse()(0, 0) == Complex(0.0));
  }
}

TEST_CASE("generated probes") {
  SUBCASE("disk with defocus 0 is real and non-negative") {
    ProbeSpec spec;
    spec.kind = "disk";
    spec.defocus = 0.0;
    Probe probe = generate_probe(32, spec);
    for (size_t i = 0; i < probe.field().size(); ++i) {
      CHECK(probe.field()[i].imag() == 0.0);
      CHECK(probe.field()[i].real() >= 0.0);
    }
    CHECK(norm2(probe.field()) > 0);
  }
  SUBCASE("epsilon follows the stabilizer formula") {
    Probe probe = generate_probe(32, ProbeSpec{});
    double expected = 1e-6 * std::sqrt(norm2_sq(probe.field()) / (32.0 * 32.0));
    CHECK(probe.epsilon() == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("gaussian probe is zero-free") {
    ProbeSpec spec;
    spec.kind = "gaussian";
    spec.radius_frac = 0.25;
    Probe probe = generate_probe(32, spec);
    for (size_t i = 0; i < probe.field().size(); ++i)
      CHECK(std::abs(probe.field()[i]) > 0.0);
  }
  SUBCASE("unknown kind") {
    ProbeSpec spec;
    spec.kind = "bessel";
    CHECK_THROWS_AS(generate_probe(32, spec), ConfigError);
  }
}

TEST_CASE("weight map") {
  ComplexImage d(2, 2, Complex(0.0, 2.0));  // |d| = 2 everywhere
  Probe probe(d);
  RealImage w2 = weight_map(probe, 2.0);
  CHECK(w2(0, 0) == doctest::Approx(4.0).epsilon(1e-14));

  SUBCASE("kappa=1 dominates kappa=2 for |d| <= 1") {
    ComplexImage dim(3, 3);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> mag(0.05, 1.0);
    for (size_t i = 0; i < dim.size(); ++i) dim[i] = Complex(mag(rng), 0.0);
    Probe p(dim);
    RealImage w1 = weight_map(p, 1.0);
    RealImage w2b = weight_map(p, 2.0);
    for (size_t i = 0; i < w1.size(); ++i) CHECK(w1[i] >= w2b[i]);
  }
  SUBCASE("kappa outside [1,2]") {
    CHECK_THROWS_AS(weight_map(probe, 0.5), ConfigError);
    CHECK_THROWS_AS(weight_map(probe, 2.5), ConfigError);
  }
}

TEST_CASE("rng substreams") {
  auto a = substream(1, "noise", 3);
  auto b = substream(1, "noise", 3);
  CHECK(a() == b());
  auto c = substream(1, "noise", 4);
  auto d = substream(1, "pattern", 3);
  CHECK(a() != c());  // overwhelmingly likely for distinct substreams
  CHECK(b() != d());
}
