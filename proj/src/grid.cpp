#include "pmace/grid.hpp"

namespace pmace {

ComplexImage operator+(const ComplexImage& a, const ComplexImage& b) {
  if (!a.same_shape(b)) throw ShapeError("operator+: shape mismatch");
  ComplexImage out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

ComplexImage operator-(const ComplexImage& a, const ComplexImage& b) {
  if (!a.same_shape(b)) throw ShapeError("operator-: shape mismatch");
  ComplexImage out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

ComplexImage operator*(Complex s, const ComplexImage& a) {
  ComplexImage out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = s * a[i];
  return out;
}

ComplexImage hadamard(const ComplexImage& a, const ComplexImage& b) {
  if (!a.same_shape(b)) throw ShapeError("hadamard: shape mismatch");
  ComplexImage out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

}  // namespace pmace
