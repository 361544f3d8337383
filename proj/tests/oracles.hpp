// Test-only dense linear-algebra oracles. Everything here builds explicit
// matrices and stays independent of the implementation paths it checks.
#pragma once

#include <Eigen/Dense>

#include <random>

#include "pmace/consensus.hpp"
#include "pmace/scan.hpp"

namespace pmace::testing {

inline Eigen::VectorXcd stack_to_vector(const PatchStack& v) {
  size_t pp = static_cast<size_t>(v.patch_rows()) * v.patch_cols();
  Eigen::VectorXcd out(static_cast<Eigen::Index>(v.count() * pp));
  for (int j = 0; j < v.count(); ++j)
    for (size_t i = 0; i < pp; ++i) out(j * pp + i) = v.patch(j)[i];
  return out;
}

inline PatchStack vector_to_stack(const Eigen::VectorXcd& vec, int count, int rows, int cols) {
  size_t pp = static_cast<size_t>(rows) * cols;
  std::vector<ComplexImage> patches;
  for (int j = 0; j < count; ++j) {
    ComplexImage p(rows, cols);
    for (size_t i = 0; i < pp; ++i) p[i] = vec(j * pp + i);
    patches.push_back(std::move(p));
  }
  return PatchStack(std::move(patches));
}

// E_j: (image pixels) x (patch pixels) 0/1 selector with E_j^T x = P_j x.
inline Eigen::MatrixXd embedding_matrix(const ScanPattern& scan, int j) {
  int n = scan.image_rows() * scan.image_cols();
  int pp = scan.patch_rows() * scan.patch_cols();
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, pp);
  const ScanPoint& p = scan.position(j);
  for (int r = 0; r < scan.patch_rows(); ++r)
    for (int c = 0; c < scan.patch_cols(); ++c) {
      int image_idx = (p.row + r) * scan.image_cols() + (p.col + c);
      int patch_idx = r * scan.patch_cols() + c;
      e(image_idx, patch_idx) = 1.0;
    }
  return e;
}

// Dense weighted-mean matrix: x = M v with M = Lambda^+ [E_0 W, ..., E_{J-1} W].
inline Eigen::MatrixXd dense_mean_matrix(const ScanPattern& scan, const RealImage& w) {
  int n = scan.image_rows() * scan.image_cols();
  int pp = scan.patch_rows() * scan.patch_cols();
  Eigen::VectorXd weights(pp);
  for (int i = 0; i < pp; ++i) weights(i) = w[i];

  Eigen::MatrixXd gather(n, scan.count() * pp);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < scan.count(); ++j) {
    Eigen::MatrixXd e = embedding_matrix(scan, j);
    gather.block(0, j * pp, n, pp) = e * weights.asDiagonal();
    lambda += e * weights;
  }
  Eigen::VectorXd lambda_inv(n);
  for (int i = 0; i < n; ++i) lambda_inv(i) = lambda(i) > 0 ? 1.0 / lambda(i) : 0.0;
  return lambda_inv.asDiagonal() * gather;
}

// Dense G^P in stack space: G = S Lambda^+ [E_j W] with S stacking the E_j^T.
inline Eigen::MatrixXd dense_projector(const ScanPattern& scan, const RealImage& w) {
  int n = scan.image_rows() * scan.image_cols();
  int pp = scan.patch_rows() * scan.patch_cols();
  Eigen::MatrixXd scatter(scan.count() * pp, n);
  for (int j = 0; j < scan.count(); ++j)
    scatter.block(j * pp, 0, pp, n) = embedding_matrix(scan, j).transpose();
  return scatter * dense_mean_matrix(scan, w);
}

// argmin_x sum_j 1/2 ||P_j x - b_j||^2 over the covered pixels, by dense
// normal equations; uncovered pixels are returned as zero.
inline Eigen::VectorXcd dense_consensus_least_squares(const ScanPattern& scan,
                                                      const std::vector<ComplexImage>& b) {
  int n = scan.image_rows() * scan.image_cols();
  int pp = scan.patch_rows() * scan.patch_cols();
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(n);
  for (int j = 0; j < scan.count(); ++j) {
    Eigen::MatrixXd e = embedding_matrix(scan, j);
    normal += e * e.transpose();
    Eigen::VectorXcd bj(pp);
    for (int i = 0; i < pp; ++i) bj(i) = b[j][i];
    rhs += e * bj;
  }
  std::vector<int> covered;
  for (int i = 0; i < n; ++i)
    if (normal(i, i) > 0) covered.push_back(i);

  Eigen::MatrixXd sub(covered.size(), covered.size());
  Eigen::VectorXcd sub_rhs(covered.size());
  for (size_t a = 0; a < covered.size(); ++a) {
    sub_rhs(a) = rhs(covered[a]);
    for (size_t c = 0; c < covered.size(); ++c) sub(a, c) = normal(covered[a], covered[c]);
  }
  Eigen::VectorXcd sub_x = sub.ldlt().solve(sub_rhs);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(n);
  for (size_t a = 0; a < covered.size(); ++a) x(covered[a]) = sub_x(a);
  return x;
}

inline ComplexImage random_image(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexImage out(rows, cols);
  for (size_t i = 0; i < out.size(); ++i) out[i] = Complex(gauss(rng), gauss(rng));
  return out;
}

inline RealImage random_weights(int rows, int cols, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  RealImage out(rows, cols);
  for (size_t i = 0; i < out.size(); ++i) out[i] = unit(rng);
  return out;
}

inline PatchStack random_stack(int count, int rows, int cols, uint64_t seed) {
  std::vector<ComplexImage> patches;
  for (int j = 0; j < count; ++j) patches.push_back(random_image(rows, cols, seed * 1000 + j));
  return PatchStack(std::move(patches));
}

}  // namespace pmace::testing
