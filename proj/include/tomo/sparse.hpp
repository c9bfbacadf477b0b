#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tomo/image.hpp"

namespace tomo {

/// Compressed sparse row matrix with sorted column indices per row.
struct SparseOperator {
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<std::int64_t> row_offsets;  // length rows+1, nondecreasing
  std::vector<std::int32_t> col_indices;  // strictly increasing within a row
  std::vector<double> values;
  bool symmetric_flag = false;

  /// Provenance of precomputed operators; persisted as a file trailer and
  /// used to refuse mismatched caches.
  struct Meta {
    std::int32_t n = 0;
    std::int32_t m_sp = 0;
    double tau = 0.0;
    std::int32_t angle_count = 0;
    std::int32_t d = 0;
    std::int32_t r = 0;  // 0 for B*B
  };
  Meta meta;

  std::int64_t nnz() const { return static_cast<std::int64_t>(values.size()); }

  void multiply(const double* x, double* y) const;
  Vector apply(const Vector& x) const;
  ComplexVector apply(const ComplexVector& x) const;

  /// Structural + ordering invariants; throws on violation.
  void validate() const;
};

void save_sparse(const SparseOperator& op, const std::string& path);
SparseOperator load_sparse(const std::string& path);

}  // namespace tomo
