#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>

#include "tomo/errors.hpp"

namespace tomo {

using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Square n x n real image, row-major storage.
struct Image {
  int n = 0;
  Vector data;  // length n*n, row index i (slow), column index j (fast)

  Image() = default;
  Image(int side, Vector values);
  static Image zero(int side) { return Image(side, Vector::Zero(side * side)); }

  double& at(int i, int j) { return data[static_cast<Eigen::Index>(i) * n + j]; }
  double at(int i, int j) const { return data[static_cast<Eigen::Index>(i) * n + j]; }

  bool all_finite() const { return data.allFinite(); }
};

/// Square n x n complex image, row-major storage.
struct ComplexImage {
  int n = 0;
  ComplexVector data;

  ComplexImage() = default;
  ComplexImage(int side, ComplexVector values);
  static ComplexImage zero(int side) {
    return ComplexImage(side, ComplexVector::Zero(side * side));
  }
  static ComplexImage from_real(const Image& im) {
    return ComplexImage(im.n, im.data.cast<Complex>());
  }

  Complex& at(int i, int j) { return data[static_cast<Eigen::Index>(i) * n + j]; }
  Complex at(int i, int j) const { return data[static_cast<Eigen::Index>(i) * n + j]; }

  Image real_part() const { return Image(n, data.real()); }
};

/// Additive-density ellipse of a piecewise-constant phantom.
struct Ellipse {
  double intensity;
  double semi_axis_a;
  double semi_axis_b;
  double center_x;
  double center_y;
  double rotation;  // radians, in [-pi, pi]

  bool contains(double x, double y) const;
};

/// The standard ten-ellipse Shepp-Logan table (original intensities).
const std::vector<Ellipse>& shepp_logan_ellipses();

/// Rasterize the Shepp-Logan phantom at pixel centers of an n x n grid over
/// [-1,1]^2. Pixel (i,j) samples x = -1+(2j+1)/n, y = -1+(2i+1)/n.
Image generate_shepp_logan(int n);

/// ||candidate - reference||_1 / ||reference||_1.
double relative_l1_error(const Image& candidate, const Image& reference);

/// Writes a 16-bit binary P5 graymap at `path` (values rescaled [min,max] ->
/// [0,65535]) plus a lossless sidecar at `path + ".f64"` holding the exact
/// doubles. read_image() restores from the sidecar bit-exactly.
void write_image(const Image& image, const std::string& path);
Image read_image(const std::string& path);

}  // namespace tomo
