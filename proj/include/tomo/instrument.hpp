#pragma once

#include <atomic>
#include <cstdint>

namespace tomo::instrument {

// Operation counters used by tests to pin backend cost models. Counting is
// always on; the atomics are uncontended in single-threaded runs.
extern std::atomic<std::uint64_t> fft2_count;
extern std::atomic<std::uint64_t> spmv_count;
extern std::atomic<std::uint64_t> diag_scale_count;

struct Counts {
  std::uint64_t fft2;
  std::uint64_t spmv;
  std::uint64_t diag_scale;
};

inline Counts snapshot() {
  return {fft2_count.load(), spmv_count.load(), diag_scale_count.load()};
}

inline void reset() {
  fft2_count = 0;
  spmv_count = 0;
  diag_scale_count = 0;
}

}  // namespace tomo::instrument
