#include "tomo/fft.hpp"

#include <unsupported/Eigen/FFT>

#include "tomo/instrument.hpp"

namespace tomo {

namespace {
Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;  // caches kissfft plans per length
  return fft;
}
}  // namespace

void fft_1d(ComplexVector& data, bool inverse) {
  const int m = static_cast<int>(data.size());
  ComplexVector out(m);
  if (inverse)
    engine().inv(out.data(), data.data(), m);  // scales by 1/m
  else
    engine().fwd(out.data(), data.data(), m);
  data.swap(out);
}

void fft_2d(ComplexVector& grid, int m, bool inverse) {
  if (grid.size() != static_cast<Eigen::Index>(m) * m)
    throw ConfigError("fft_2d: grid size mismatch");
  auto& fft = engine();
  ComplexVector buf(m), out(m);
  // Rows are contiguous in row-major storage.
  for (int r = 0; r < m; ++r) {
    Complex* row = grid.data() + static_cast<Eigen::Index>(r) * m;
    if (inverse)
      fft.inv(out.data(), row, m);
    else
      fft.fwd(out.data(), row, m);
    std::copy(out.data(), out.data() + m, row);
  }
  // Columns via gather/scatter.
  for (int c = 0; c < m; ++c) {
    for (int r = 0; r < m; ++r) buf[r] = grid[static_cast<Eigen::Index>(r) * m + c];
    if (inverse)
      fft.inv(out.data(), buf.data(), m);
    else
      fft.fwd(out.data(), buf.data(), m);
    for (int r = 0; r < m; ++r) grid[static_cast<Eigen::Index>(r) * m + c] = out[r];
  }
  instrument::fft2_count++;
}

}  // namespace tomo

namespace tomo::instrument {
std::atomic<std::uint64_t> fft2_count{0};
std::atomic<std::uint64_t> spmv_count{0};
std::atomic<std::uint64_t> diag_scale_count{0};
}  // namespace tomo::instrument
