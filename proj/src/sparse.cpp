#include "tomo/sparse.hpp"

#include <cstring>
#include <fstream>

#include "tomo/instrument.hpp"

namespace tomo {

void SparseOperator::multiply(const double* x, double* y) const {
  for (std::int64_t i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
      acc += values[k] * x[col_indices[k]];
    y[i] = acc;
  }
}

Vector SparseOperator::apply(const Vector& x) const {
  if (x.size() != cols) throw ConfigError("SparseOperator: size mismatch");
  Vector y(rows);
  multiply(x.data(), y.data());
  instrument::spmv_count++;
  return y;
}

ComplexVector SparseOperator::apply(const ComplexVector& x) const {
  if (x.size() != cols) throw ConfigError("SparseOperator: size mismatch");
  // One pass over the matrix; real and imaginary parts treated identically.
  ComplexVector y(rows);
  for (std::int64_t i = 0; i < rows; ++i) {
    double re = 0.0, im = 0.0;
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      const Complex v = x[col_indices[k]];
      re += values[k] * v.real();
      im += values[k] * v.imag();
    }
    y[i] = Complex(re, im);
  }
  instrument::spmv_count++;
  return y;
}

void SparseOperator::validate() const {
  if (rows < 0 || cols < 0) throw ConfigError("SparseOperator: negative dimensions");
  if (row_offsets.size() != static_cast<size_t>(rows) + 1)
    throw ConfigError("SparseOperator: row_offsets length");
  if (row_offsets.front() != 0 || row_offsets.back() != nnz())
    throw ConfigError("SparseOperator: row_offsets range");
  if (col_indices.size() != values.size())
    throw ConfigError("SparseOperator: col/value length mismatch");
  for (std::int64_t i = 0; i < rows; ++i) {
    if (row_offsets[i] > row_offsets[i + 1])
      throw ConfigError("SparseOperator: row_offsets not nondecreasing");
    for (std::int64_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      if (col_indices[k] < 0 || col_indices[k] >= cols)
        throw ConfigError("SparseOperator: column out of bounds");
      if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
        throw ConfigError("SparseOperator: columns not strictly increasing in row");
    }
  }
}

namespace {

constexpr char kSparseMagic[8] = {'T', 'O', 'M', 'O', 'S', 'P', 'M', '1'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));  // little-endian host
}

template <typename T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("sparse file: unexpected end of data");
  return v;
}

}  // namespace

void save_sparse(const SparseOperator& op, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_sparse: cannot open " + path);
  os.write(kSparseMagic, 8);
  put<std::uint32_t>(os, kVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(op.rows));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(op.cols));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(op.nnz()));
  put<std::uint8_t>(os, op.symmetric_flag ? 1 : 0);
  os.write(reinterpret_cast<const char*>(op.row_offsets.data()),
           static_cast<std::streamsize>(sizeof(std::int64_t) * op.row_offsets.size()));
  os.write(reinterpret_cast<const char*>(op.col_indices.data()),
           static_cast<std::streamsize>(sizeof(std::int32_t) * op.col_indices.size()));
  os.write(reinterpret_cast<const char*>(op.values.data()),
           static_cast<std::streamsize>(sizeof(double) * op.values.size()));
  put<std::int32_t>(os, op.meta.n);
  put<std::int32_t>(os, op.meta.m_sp);
  put<double>(os, op.meta.tau);
  put<std::int32_t>(os, op.meta.angle_count);
  put<std::int32_t>(os, op.meta.d);
  put<std::int32_t>(os, op.meta.r);
  if (!os) throw IoError("save_sparse: short write on " + path);
}

SparseOperator load_sparse(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_sparse: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSparseMagic, 8) != 0)
    throw IoError("load_sparse: bad magic in " + path);
  const auto version = get<std::uint32_t>(is);
  if (version != kVersion)
    throw IoError("load_sparse: unsupported version " + std::to_string(version));
  SparseOperator op;
  op.rows = get<std::uint32_t>(is);
  op.cols = get<std::uint32_t>(is);
  const auto nnz = get<std::uint64_t>(is);
  op.symmetric_flag = get<std::uint8_t>(is) != 0;
  op.row_offsets.resize(static_cast<size_t>(op.rows) + 1);
  is.read(reinterpret_cast<char*>(op.row_offsets.data()),
          static_cast<std::streamsize>(sizeof(std::int64_t) * op.row_offsets.size()));
  op.col_indices.resize(nnz);
  is.read(reinterpret_cast<char*>(op.col_indices.data()),
          static_cast<std::streamsize>(sizeof(std::int32_t) * nnz));
  op.values.resize(nnz);
  is.read(reinterpret_cast<char*>(op.values.data()),
          static_cast<std::streamsize>(sizeof(double) * nnz));
  if (!is) throw IoError("load_sparse: truncated data in " + path);
  op.meta.n = get<std::int32_t>(is);
  op.meta.m_sp = get<std::int32_t>(is);
  op.meta.tau = get<double>(is);
  op.meta.angle_count = get<std::int32_t>(is);
  op.meta.d = get<std::int32_t>(is);
  op.meta.r = get<std::int32_t>(is);
  op.validate();
  return op;
}

}  // namespace tomo
