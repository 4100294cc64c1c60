#pragma once

#include <vector>

#include "hypdec/common.hpp"

namespace hypdec::fft {

// In-place 2D complex DFT on an n1 x n2 row-major array,
// sign = -1 forward (e^{-i}), +1 backward (e^{+i}). Unnormalized.
void dft2(cd* data, int n1, int n2, int sign);

// In-place 1D complex DFT, unnormalized.
void dft1(cd* data, int n, int sign);

// Chirp-z evaluation of out[k] = sum_m in[m] * exp(i * (x0 + k*dx) * xi[m])
// for k in [0, nout), with xi[m] = xi0 + m*dxi. Exact trigonometric sum
// (computed via Bluestein), valid for any real spacings.
void czt_line(const cd* in, int nin, double xi0, double dxi, cd* out, int nout,
              double x0, double dx);

}  // namespace hypdec::fft
