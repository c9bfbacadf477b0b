#include "tomo/image.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace tomo {

Image::Image(int side, Vector values) : n(side), data(std::move(values)) {
  if (n <= 0 || data.size() != static_cast<Eigen::Index>(n) * n)
    throw ConfigError("Image: data length must equal n^2");
}

ComplexImage::ComplexImage(int side, ComplexVector values)
    : n(side), data(std::move(values)) {
  if (n <= 0 || data.size() != static_cast<Eigen::Index>(n) * n)
    throw ConfigError("ComplexImage: data length must equal n^2");
}

bool Ellipse::contains(double x, double y) const {
  const double c = std::cos(rotation), s = std::sin(rotation);
  const double dx = x - center_x, dy = y - center_y;
  const double xr = dx * c + dy * s;
  const double yr = -dx * s + dy * c;
  const double u = xr / semi_axis_a, v = yr / semi_axis_b;
  return u * u + v * v <= 1.0;
}

namespace {
constexpr double kDeg = M_PI / 180.0;
}

const std::vector<Ellipse>& shepp_logan_ellipses() {
  // Original Shepp-Logan table: intensity, a, b, x0, y0, rotation.
  static const std::vector<Ellipse> table = {
      {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
      {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
      {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0 * kDeg},
      {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0 * kDeg},
      {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
      {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
      {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
      {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
      {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
      {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
  };
  return table;
}

Image generate_shepp_logan(int n) {
  if (n < 4) throw ConfigError("generate_shepp_logan: n must be >= 4");
  Image out = Image::zero(n);
  const auto& ellipses = shepp_logan_ellipses();
  for (int i = 0; i < n; ++i) {
    const double y = -1.0 + (2.0 * i + 1.0) / n;
    for (int j = 0; j < n; ++j) {
      const double x = -1.0 + (2.0 * j + 1.0) / n;
      double v = 0.0;
      for (const auto& e : ellipses)
        if (e.contains(x, y)) v += e.intensity;
      out.at(i, j) = v;
    }
  }
  return out;
}

double relative_l1_error(const Image& candidate, const Image& reference) {
  if (candidate.n != reference.n)
    throw ConfigError("relative_l1_error: image sides differ");
  const double denom = reference.data.cwiseAbs().sum();
  if (denom == 0.0)
    throw ConfigError("relative_l1_error: degenerate reference (all zero)");
  return (candidate.data - reference.data).cwiseAbs().sum() / denom;
}

namespace {

void put_u32_le(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32_le(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw IoError("unexpected end of file reading u32");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr char kImageMagic[8] = {'T', 'O', 'M', 'O', 'I', 'M', 'G', '1'};

std::string sidecar_path(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".f64") == 0) return path;
  return path + ".f64";
}

}  // namespace

void write_image(const Image& image, const std::string& path) {
  if (!image.all_finite()) throw ConfigError("write_image: non-finite values");
  // 16-bit P5 for viewing.
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("write_image: cannot open " + path);
    os << "P5\n" << image.n << " " << image.n << "\n65535\n";
    const double lo = image.data.minCoeff(), hi = image.data.maxCoeff();
    const double scale = hi > lo ? 65535.0 / (hi - lo) : 0.0;
    std::vector<unsigned char> buf(static_cast<size_t>(image.n) * image.n * 2);
    for (Eigen::Index t = 0; t < image.data.size(); ++t) {
      const auto q = static_cast<std::uint16_t>(std::lround((image.data[t] - lo) * scale));
      buf[2 * t] = static_cast<unsigned char>(q >> 8);  // big-endian samples
      buf[2 * t + 1] = static_cast<unsigned char>(q & 0xff);
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw IoError("write_image: short write on " + path);
  }
  // Exact sidecar.
  {
    const std::string sc = sidecar_path(path);
    std::ofstream os(sc, std::ios::binary);
    if (!os) throw IoError("write_image: cannot open " + sc);
    os.write(kImageMagic, 8);
    put_u32_le(os, static_cast<std::uint32_t>(image.n));
    os.write(reinterpret_cast<const char*>(image.data.data()),
             static_cast<std::streamsize>(sizeof(double) * image.data.size()));
    if (!os) throw IoError("write_image: short write on " + sc);
  }
}

Image read_image(const std::string& path) {
  const std::string sc = sidecar_path(path);
  std::ifstream is(sc, std::ios::binary);
  if (!is) throw IoError("read_image: cannot open " + sc);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kImageMagic, 8) != 0)
    throw IoError("read_image: bad magic in " + sc);
  const std::uint32_t n = get_u32_le(is);
  if (n == 0 || n > (1u << 16)) throw IoError("read_image: implausible side " + std::to_string(n));
  Vector data(static_cast<Eigen::Index>(n) * n);
  is.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(sizeof(double) * data.size()));
  if (!is) throw IoError("read_image: truncated data in " + sc);
  Image out(static_cast<int>(n), std::move(data));
  if (!out.all_finite()) throw IoError("read_image: non-finite values in " + sc);
  return out;
}

}  // namespace tomo
