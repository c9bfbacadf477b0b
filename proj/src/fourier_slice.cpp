#include "tomo/fourier_slice.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace tomo {

AngleSet make_angle_set(int n_x, int d) {
  if (n_x < 4) throw ConfigError("make_angle_set: n_x must be >= 4");
  if (d < 1) throw ConfigError("make_angle_set: d must be >= 1");
  const int count = static_cast<int>(std::lround(n_x * M_PI / (4.0 * d)));
  if (count < 2) throw ConfigError("make_angle_set: fewer than 2 angles");
  AngleSet set;
  set.subsample_d = d;
  set.angles.resize(count);
  for (int a = 0; a < count; ++a) set.angles[a] = a * M_PI / count;
  return set;
}

SliceGrid slice_points(const AngleSet& angle_set, int n) {
  if (n % 2 != 0) throw ConfigError("slice_points: n must be even");
  const int n_ang = angle_set.count();
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(n_ang) * n, 2);
  Eigen::Index row = 0;
  for (int a = 0; a < n_ang; ++a) {
    const double c = std::cos(angle_set.angles[a]);
    const double s = std::sin(angle_set.angles[a]);
    for (int t = 0; t < n; ++t, ++row) {
      const double k_r = (2.0 * M_PI / n) * (t - n / 2);
      coords(row, 0) = k_r * c;
      coords(row, 1) = k_r * s;
    }
  }
  SliceGrid grid;
  grid.angle_set = angle_set;
  grid.n = n;
  grid.points = FrequencyPointSet::make(2, std::move(coords));
  return grid;
}

SliceTransform::SliceTransform(SliceGrid grid, NufftParams params)
    : grid_(std::move(grid)), params_(params),
      plan_(plan_spreading(grid_.points, params_)) {
  if (grid_.n != params_.n)
    throw ConfigError("SliceTransform: grid and params disagree on n");
}

ComplexVector SliceTransform::forward(const ComplexImage& image) const {
  if (image.n != grid_.n) throw ConfigError("forward: image side mismatch");
  return nufft_type2(plan_, image.data);
}

ComplexImage SliceTransform::adjoint(const ComplexVector& slice_values) const {
  if (slice_values.size() != grid_.points.count())
    throw ConfigError("adjoint: slice value count mismatch");
  return ComplexImage(grid_.n, nufft_type1(plan_, slice_values));
}

ComplexVector forward_transform(const Image& image, const SliceGrid& grid,
                                const NufftParams& params) {
  return SliceTransform(grid, params).forward(ComplexImage::from_real(image));
}

ComplexImage adjoint_transform(const ComplexVector& slice_values, const SliceGrid& grid,
                               const NufftParams& params) {
  return SliceTransform(grid, params).adjoint(slice_values);
}

ComplexVector synthesize_data(const Image& phantom, const SliceGrid& grid,
                              const NufftParams& params, double noise_sigma,
                              std::uint64_t seed) {
  if (noise_sigma < 0.0) throw ConfigError("synthesize_data: negative noise level");
  ComplexVector values = forward_transform(phantom, grid, params);
  if (noise_sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, noise_sigma);
    for (Eigen::Index i = 0; i < values.size(); ++i)
      values[i] += Complex(gauss(rng), gauss(rng));
  }
  return values;
}

namespace {

constexpr char kSliceMagic[8] = {'T', 'O', 'M', 'O', 'S', 'L', 'C', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("slice file: unexpected end of header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_slice_data(const SliceGrid& grid, const ComplexVector& values,
                      const std::string& path) {
  if (values.size() != grid.points.count())
    throw ConfigError("write_slice_data: value count mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("write_slice_data: cannot open " + path);
  os.write(kSliceMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(grid.n));
  put_u32(os, static_cast<std::uint32_t>(grid.angle_set.count()));
  os.write(reinterpret_cast<const char*>(grid.angle_set.angles.data()),
           static_cast<std::streamsize>(sizeof(double) * grid.angle_set.count()));
  os.write(reinterpret_cast<const char*>(values.data()),
           static_cast<std::streamsize>(2 * sizeof(double) * values.size()));
  if (!os) throw IoError("write_slice_data: short write on " + path);
}

SliceFile read_slice_data(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("read_slice_data: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kSliceMagic, 8) != 0)
    throw IoError("read_slice_data: bad magic in " + path);
  SliceFile out;
  out.n = static_cast<int>(get_u32(is));
  const std::uint32_t n_ang = get_u32(is);
  if (out.n < 4 || out.n % 2 != 0 || n_ang == 0 || n_ang > (1u << 20))
    throw IoError("read_slice_data: implausible header in " + path);
  out.angles.resize(n_ang);
  is.read(reinterpret_cast<char*>(out.angles.data()),
          static_cast<std::streamsize>(sizeof(double) * n_ang));
  out.values.resize(static_cast<Eigen::Index>(n_ang) * out.n);
  is.read(reinterpret_cast<char*>(out.values.data()),
          static_cast<std::streamsize>(2 * sizeof(double) * out.values.size()));
  if (!is) throw IoError("read_slice_data: truncated data in " + path);
  return out;
}

}  // namespace tomo
