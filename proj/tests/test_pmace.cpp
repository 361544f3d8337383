#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "pmace/fft.hpp"
#include "pmace/metrics.hpp"
#include "pmace/pmace.hpp"

using namespace pmace;
using namespace pmace::testing;

namespace {

// zero-free probe with |d| >= 0.5 so the stabilized inverse stays benign
Probe benign_probe(int size, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.5, 1.5);
  std::uniform_real_distribution<double> ph(-M_PI, M_PI);
  ComplexImage d(size, size);
  for (size_t i = 0; i < d.size(); ++i) d[i] = std::polar(mag(rng), ph(rng));
  return Probe(d);
}

RealImage positive_amplitudes(int size, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  RealImage y(size, size);
  for (size_t i = 0; i < y.size(); ++i) y[i] = unit(rng);
  return y;
}

// explicit orthonormal 2x2 DFT, written out by hand
ComplexImage dft2x2(const ComplexImage& v, bool inverse) {
  ComplexImage out(2, 2);
  Complex a = v(0, 0), b = v(0, 1), c = v(1, 0), d = v(1, 1);
  out(0, 0) = (a + b + c + d) / 2.0;
  out(0, 1) = (a - b + c - d) / 2.0;
  out(1, 0) = (a + b - c - d) / 2.0;
  out(1, 1) = (a - b - c + d) / 2.0;
  (void)inverse;  // the 2x2 orthonormal DFT is self-inverse
  return out;
}

}  // namespace

TEST_CASE("data_fit_agent") {
  SUBCASE("alpha -> 0 leaves the input unchanged") {
    Probe probe = benign_probe(4, 1);
    RealImage y = positive_amplitudes(4, 2);
    ComplexImage v = random_image(4, 4, 3);
    Agent agent = data_fit_agent(probe, y, 1e-12);
    CHECK(norm2(agent(v) - v) <= 1e-10 * norm2(v));
  }

  SUBCASE("data-consistent inputs are fixed up to the stabilizer") {
    Probe probe = benign_probe(8, 4);
    ComplexImage v = random_image(8, 8, 5);
    ComplexImage spectrum = fft2(hadamard(probe.field(), v));
    RealImage y(8, 8);
    for (size_t i = 0; i < y.size(); ++i) y[i] = std::abs(spectrum[i]);

    for (double alpha : {0.1, 0.5, 0.9}) {
      Agent agent = data_fit_agent(probe, y, alpha);
      // D_eps^{-1} D = 1 - eps/(|d|^2 + eps), so the error is bounded by
      // alpha * eps / min|d|^2 * ||v||; with |d| >= 0.5 that constant is <= 10
      CHECK(norm2(agent(v) - v) <= 10.0 * probe.epsilon() * norm2(v));
    }
  }

  SUBCASE("2x2 patch matches the hand-computed pipeline") {
    ComplexImage d(2, 2, Complex(1.0, 0.0));
    Probe probe(d);
    RealImage y(2, 2);
    y(0, 0) = 2.0;
    y(0, 1) = 0.5;
    y(1, 0) = 1.0;
    y(1, 1) = 0.25;
    ComplexImage v(2, 2);
    v(0, 0) = Complex(1, 1);
    v(0, 1) = Complex(-2, 0.5);
    v(1, 0) = Complex(0, -1);
    v(1, 1) = Complex(3, 2);
    double alpha = 0.4;

    ComplexImage spectrum = dft2x2(v, false);
    ComplexImage rescaled(2, 2);
    for (size_t i = 0; i < rescaled.size(); ++i) {
      double mag = std::abs(spectrum[i]);
      rescaled[i] = y[i] * (mag > 0 ? spectrum[i] / mag : Complex(1.0));
    }
    ComplexImage back = dft2x2(rescaled, true);
    ComplexImage expected(2, 2);
    for (size_t i = 0; i < expected.size(); ++i) {
      Complex dinv = std::conj(d[i]) / (std::norm(d[i]) + probe.epsilon());
      expected[i] = (1 - alpha) * v[i] + alpha * dinv * back[i];
    }

    Agent agent = data_fit_agent(probe, y, alpha);
    CHECK(norm2(agent(v) - expected) <= 1e-13 * norm2(expected));
  }

  SUBCASE("parameter validation") {
    Probe probe = benign_probe(4, 6);
    RealImage y = positive_amplitudes(4, 7);
    CHECK_THROWS_AS(data_fit_agent(probe, y, 0.0), ConfigError);
    CHECK_THROWS_AS(data_fit_agent(probe, y, 1.0), ConfigError);
    RealImage bad = y;
    bad(0, 0) = -1.0;
    CHECK_THROWS_AS(data_fit_agent(probe, bad, 0.5), ConfigError);
  }

  SUBCASE("the Jacobian is not symmetric (non-proximal witness)") {
    Probe probe = benign_probe(2, 8);
    RealImage y = positive_amplitudes(2, 9);
    Agent agent = data_fit_agent(probe, y, 0.6);
    ComplexImage v0 = random_image(2, 2, 10);

    // real-vectorized forward-difference Jacobian, h = 1e-6
    auto pack = [](const ComplexImage& z) {
      std::vector<double> out;
      for (size_t i = 0; i < z.size(); ++i) {
        out.push_back(z[i].real());
        out.push_back(z[i].imag());
      }
      return out;
    };
    auto unpack = [](const std::vector<double>& z) {
      ComplexImage out(2, 2);
      for (size_t i = 0; i < out.size(); ++i) out[i] = Complex(z[2 * i], z[2 * i + 1]);
      return out;
    };
    std::vector<double> base = pack(v0);
    std::vector<double> f0 = pack(agent(v0));
    double h = 1e-6;
    Eigen::MatrixXd jac(8, 8);
    for (int k = 0; k < 8; ++k) {
      std::vector<double> shifted = base;
      shifted[k] += h;
      std::vector<double> fk = pack(agent(unpack(shifted)));
      for (int r = 0; r < 8; ++r) jac(r, k) = (fk[r] - f0[r]) / h;
    }
    double asym = (jac.transpose() - jac).norm() / jac.norm();
    CHECK(asym > 1e-3);
  }
}

TEST_CASE("invert_data_fit_agent") {
  SUBCASE("round trip on random patches (exact-inverse agent)") {
    Probe probe = benign_probe(16, 11);
    for (double alpha : {0.1, 0.5, 0.9}) {
      for (uint64_t seed = 0; seed < 5; ++seed) {
        ComplexImage v = random_image(16, 16, 100 + seed);
        RealImage y = positive_amplitudes(16, 200 + seed);
        Agent agent = data_fit_agent(probe, y, alpha, /*stabilized=*/false);
        ComplexImage recovered = invert_data_fit_agent(probe, y, alpha, agent(v));
        CHECK(norm2(recovered - v) <= 1e-10 * norm2(v));
      }
    }
  }

  SUBCASE("stabilized agent round-trips to the epsilon scale") {
    Probe probe = benign_probe(16, 11);
    ComplexImage v = random_image(16, 16, 300);
    RealImage y = positive_amplitudes(16, 301);
    Agent agent = data_fit_agent(probe, y, 0.5);
    ComplexImage recovered = invert_data_fit_agent(probe, y, 0.5, agent(v));
    CHECK(norm2(recovered - v) <= 100 * probe.epsilon() * norm2(v));
  }

  SUBCASE("alpha = 0 is the identity") {
    Probe probe = benign_probe(8, 12);
    RealImage y = positive_amplitudes(8, 13);
    ComplexImage w = random_image(8, 8, 14);
    CHECK(norm2(invert_data_fit_agent(probe, y, 0.0, w) - w) <= 1e-12 * norm2(w));
  }

  SUBCASE("hand-solved 2x2 instance") {
    ComplexImage d(2, 2, Complex(1.0, 0.0));
    Probe probe(d);
    RealImage y(2, 2);
    y(0, 0) = 1.5;
    y(0, 1) = 0.75;
    y(1, 0) = 0.5;
    y(1, 1) = 2.0;
    double alpha = 0.25;
    ComplexImage v(2, 2);
    v(0, 0) = Complex(2, -1);
    v(0, 1) = Complex(0.5, 0.5);
    v(1, 0) = Complex(-1, 0);
    v(1, 1) = Complex(1, 2);
    Agent agent = data_fit_agent(probe, y, alpha);
    ComplexImage w = agent(v);

    // appendix algebra carried out with the explicit 2x2 DFT
    ComplexImage u = dft2x2(w, false);
    ComplexImage fdv(2, 2);
    for (size_t i = 0; i < u.size(); ++i) {
      double mag = (std::abs(u[i]) - alpha * y[i]) / (1 - alpha);
      REQUIRE(mag >= 0);
      fdv[i] = mag * u[i] / std::abs(u[i]);
    }
    ComplexImage expected = dft2x2(fdv, true);
    ComplexImage recovered = invert_data_fit_agent(probe, y, alpha, w);
    CHECK(norm2(recovered - expected) <= 1e-10 * norm2(expected));
    // the stabilized inverse inside the agent perturbs at the eps scale only
    CHECK(norm2(recovered - v) <= 1e-5 * norm2(v));
  }

  SUBCASE("negative solved magnitude is rejected") {
    Probe probe = benign_probe(4, 15);
    RealImage y = positive_amplitudes(4, 16);
    ComplexImage w(4, 4);  // zero field cannot be in the range for y > 0
    CHECK_THROWS_AS(invert_data_fit_agent(probe, y, 0.5, w), ConfigError);
  }
}

TEST_CASE("init_guess") {
  SUBCASE("single covering patch with matched norms gives ones") {
    ComplexImage d = random_image(4, 4, 20);
    Probe probe(d);
    ScanPattern scan({{0, 0}}, 4, 4, 4, 4);
    MeasurementSet y;
    RealImage amp(4, 4);
    double target = norm2(d) / 4.0;  // ||y_0|| = ||d|| with 16 equal entries
    for (size_t i = 0; i < amp.size(); ++i) amp[i] = target;
    y.amplitudes.push_back(amp);
    ComplexImage x0 = init_guess(y, probe, scan);
    for (size_t i = 0; i < x0.size(); ++i)
      CHECK(std::abs(x0[i] - Complex(1.0, 0.0)) <= 1e-12);
  }

  SUBCASE("two disjoint patches give piecewise constants") {
    Probe probe(ComplexImage(2, 2, Complex(1.0, 0.0)));  // ||d|| = 2
    ScanPattern scan({{0, 0}, {2, 2}}, 2, 2, 4, 4);
    MeasurementSet y;
    y.amplitudes.push_back(RealImage(2, 2, 3.0));  // ||y_0|| = 6 -> level 3
    y.amplitudes.push_back(RealImage(2, 2, 5.0));  // ||y_1|| = 10 -> level 5
    ComplexImage x0 = init_guess(y, probe, scan);
    CHECK(std::abs(x0(0, 0) - Complex(3.0, 0)) <= 1e-12);
    CHECK(std::abs(x0(2, 2) - Complex(5.0, 0)) <= 1e-12);
    CHECK(std::abs(x0(0, 2)) == 0.0);  // uncovered
  }

  SUBCASE("overlapping case matches the explicit coverage-count assembly") {
    Probe probe(random_image(3, 3, 21));
    ScanPattern scan({{0, 0}, {1, 1}, {2, 2}}, 3, 3, 6, 6);
    MeasurementSet y;
    for (int j = 0; j < 3; ++j) y.amplitudes.push_back(positive_amplitudes(3, 30 + j));
    ComplexImage x0 = init_guess(y, probe, scan);

    double d_norm = norm2(probe.field());
    RealImage num(6, 6), counts(6, 6);
    for (int j = 0; j < 3; ++j) {
      RealImage level(3, 3, norm2(y.amplitudes[j]) / d_norm);
      accumulate_patch(num, level, scan, j);
      accumulate_patch(counts, RealImage(3, 3, 1.0), scan, j);
    }
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) {
        double expected = counts(r, c) > 0 ? num(r, c) / counts(r, c) : 0.0;
        CHECK(std::abs(x0(r, c) - Complex(expected, 0)) <= 1e-12);
      }
  }
}

TEST_CASE("pmace_reconstruct") {
  // shared noiseless instance: 96x96 smooth phantom, 32x32 disk probe,
  // spacing 8, jitter 1
  PhantomSpec phantom_spec;
  phantom_spec.seed = 77;
  ComplexImage truth = generate_phantom(96, 96, phantom_spec);
  ProbeSpec probe_spec;
  probe_spec.seed = 77;
  Probe probe = generate_probe(32, probe_spec);
  ScanPattern scan = generate_scan_pattern(96, 96, 32, 8, 1, 77);
  MeasurementSet y = simulate_measurements(truth, probe, scan, NoiseConfig{1.0, 0.0, 77, true});

  SUBCASE("noiseless recovery on the small instance") {
    PmaceConfig cfg;
    cfg.alpha = 0.9;  // noiseless data wants a strong data fit
    cfg.max_iters = 100;
    cfg.residual_tol = 0.0;
    ReconstructionResult result = pmace_reconstruct(y, probe, scan, cfg, &truth);
    REQUIRE(result.trace.records.size() == 101);
    double final_nrmse = *result.trace.records.back().nrmse;
    CHECK(final_nrmse < 0.01);
    // coarse convergence: iteration 100 no worse than iteration 10
    CHECK(final_nrmse <= *result.trace.records[10].nrmse);
    // residual decreased from the first iteration
    CHECK(result.trace.records.back().residual < result.trace.records[1].residual);
  }

  SUBCASE("tiny alpha keeps the first iterate near the initialization") {
    PmaceConfig cfg;
    cfg.alpha = 1e-3;
    cfg.max_iters = 1;
    cfg.residual_tol = 0.0;
    ReconstructionResult result = pmace_reconstruct(y, probe, scan, cfg);
    ConsensusOperator op(scan, weight_map(probe, cfg.kappa), false);
    ComplexImage x0_read =
        op.weighted_mean(PatchStack::project_from(init_guess(y, probe, scan), scan));
    CHECK(norm2(result.image - x0_read) <= 10 * cfg.alpha * norm2(x0_read));
  }

  SUBCASE("relabeling the scan positions leaves x unchanged") {
    PmaceConfig cfg;
    cfg.alpha = 0.6;
    cfg.max_iters = 20;
    cfg.residual_tol = 0.0;
    ReconstructionResult a = pmace_reconstruct(y, probe, scan, cfg);

    std::vector<int> perm(scan.count());
    for (int j = 0; j < scan.count(); ++j) perm[j] = j;
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ScanPoint> positions;
    MeasurementSet y_perm;
    for (int j : perm) {
      positions.push_back(scan.position(j));
      y_perm.amplitudes.push_back(y.amplitudes[j]);
    }
    ScanPattern permuted(std::move(positions), 32, 32, 96, 96);
    ReconstructionResult b = pmace_reconstruct(y_perm, probe, permuted, cfg);
    CHECK(norm2(a.image - b.image) <= 1e-12 * norm2(a.image));
  }

  SUBCASE("config validation") {
    PmaceConfig cfg;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(pmace_reconstruct(y, probe, scan, cfg), ConfigError);
    cfg.alpha = 0.5;
    cfg.kappa = 2.5;
    CHECK_THROWS_AS(pmace_reconstruct(y, probe, scan, cfg), ConfigError);
  }
}
