#pragma once

#include <cstdint>

#include "pmace/grid.hpp"

namespace pmace {

/// Orthonormal 2D DFT (scaled by 1/sqrt(rows*cols)); F in the forward model.
ComplexImage fft2(const ComplexImage& in);

/// Orthonormal inverse 2D DFT; the adjoint F* of fft2.
ComplexImage ifft2(const ComplexImage& in);

/// Number of 2D transforms executed since start or the last reset.
/// Every reconstruction method is budgeted in these units (2 per probe
/// location per iteration), so the counter makes cost parity checkable.
uint64_t fft_call_count();
void reset_fft_call_count();

}  // namespace pmace
