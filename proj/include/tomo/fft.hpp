#pragma once

#include "tomo/image.hpp"

namespace tomo {

// Complex FFTs on row-major data. Forward uses the e^{-i...} sign and is
// unnormalized; inverse uses e^{+i...} and scales by 1/len (1/m per axis).

void fft_1d(ComplexVector& data, bool inverse);

/// In-place 2-D transform of an m x m row-major grid.
void fft_2d(ComplexVector& grid, int m, bool inverse);

}  // namespace tomo
