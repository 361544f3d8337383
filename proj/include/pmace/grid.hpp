#pragma once

#include <cassert>
#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "pmace/errors.hpp"

namespace pmace {

using Complex = std::complex<double>;

/// Dense row-major 2D array. The one array type used throughout: complex
/// fields (reconstructions, probes, patches) and real maps (weights,
/// amplitudes) are Grid2<Complex> and Grid2<double>.
template <class T>
class Grid2 {
public:
  Grid2() : rows_(0), cols_(0) {}
  Grid2(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw ShapeError("Grid2: negative dimension");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_shape(const Grid2& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

private:
  int rows_, cols_;
  std::vector<T> data_;
};

using ComplexImage = Grid2<Complex>;
using RealImage = Grid2<double>;

inline double norm2_sq(const ComplexImage& a) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::norm(a[i]);
  return s;
}

inline double norm2_sq(const RealImage& a) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * a[i];
  return s;
}

template <class T>
double norm2(const Grid2<T>& a) {
  return std::sqrt(norm2_sq(a));
}

/// Inner product <a, b> = sum conj(a_i) b_i, conjugate-linear in a.
inline Complex inner(const ComplexImage& a, const ComplexImage& b) {
  if (!a.same_shape(b)) throw ShapeError("inner: shape mismatch");
  Complex s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

template <class T>
bool all_finite(const Grid2<T>& a) {
  for (size_t i = 0; i < a.size(); ++i) {
    if constexpr (std::is_same_v<T, Complex>) {
      if (!std::isfinite(a[i].real()) || !std::isfinite(a[i].imag())) return false;
    } else {
      if (!std::isfinite(a[i])) return false;
    }
  }
  return true;
}

inline RealImage magnitude(const ComplexImage& a) {
  RealImage out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i]);
  return out;
}

inline RealImage phase(const ComplexImage& a) {
  RealImage out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = std::arg(a[i]);
  return out;
}

ComplexImage operator+(const ComplexImage& a, const ComplexImage& b);
ComplexImage operator-(const ComplexImage& a, const ComplexImage& b);
ComplexImage operator*(Complex s, const ComplexImage& a);
ComplexImage hadamard(const ComplexImage& a, const ComplexImage& b);

}  // namespace pmace
