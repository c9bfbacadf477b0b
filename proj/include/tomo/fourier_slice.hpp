#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "tomo/nufft.hpp"

namespace tomo {

/// Evenly spaced projection angles in [0, pi).
struct AngleSet {
  Eigen::VectorXd angles;  // strictly increasing
  int subsample_d = 1;     // provenance: the d used to build the set

  int count() const { return static_cast<int>(angles.size()); }
};

/// count = round(n_x * pi / (4d)); angles theta_a = a*pi/count.
AngleSet make_angle_set(int n_x, int d);

/// The Fourier-slice sample lattice: for each angle, n radial frequencies
/// k_r in [-n/2, n/2) at coordinates (2*pi/n) * k_r * (cos theta, sin theta),
/// reduced mod 2*pi. Points are laid out angle-major.
struct SliceGrid {
  AngleSet angle_set;
  int n = 0;
  FrequencyPointSet points;  // |angles| * n rows
};

SliceGrid slice_points(const AngleSet& angle_set, int n);

/// Image<->slice transform pair over a fixed grid. The image array is
/// identified with the type-2 coefficient array: pixel (i,j) carries the
/// integer frequency k = (i - n/2, j - n/2), so the image center is the
/// phase origin.
class SliceTransform {
 public:
  SliceTransform(SliceGrid grid, NufftParams params);

  /// F_NU^*: evaluates the image's Fourier transform on the slice points
  /// (type-2 NUFFT). Output aligned with grid().points.
  ComplexVector forward(const ComplexImage& image) const;

  /// F_NU: exact adjoint of forward (type-1 NUFFT).
  ComplexImage adjoint(const ComplexVector& slice_values) const;

  const SliceGrid& grid() const { return grid_; }
  const NufftParams& params() const { return params_; }
  const SpreadingPlan& plan() const { return plan_; }

 private:
  SliceGrid grid_;
  NufftParams params_;
  SpreadingPlan plan_;
};

ComplexVector forward_transform(const Image& image, const SliceGrid& grid,
                                const NufftParams& params);
ComplexImage adjoint_transform(const ComplexVector& slice_values, const SliceGrid& grid,
                               const NufftParams& params);

/// forward_transform of the phantom plus optional complex white noise of
/// standard deviation `noise_sigma` per component, seeded deterministically.
ComplexVector synthesize_data(const Image& phantom, const SliceGrid& grid,
                              const NufftParams& params, double noise_sigma = 0.0,
                              std::uint64_t seed = 0);

void write_slice_data(const SliceGrid& grid, const ComplexVector& values,
                      const std::string& path);
/// Returns (n, angles, values); validates the header.
struct SliceFile {
  int n;
  Eigen::VectorXd angles;
  ComplexVector values;
};
SliceFile read_slice_data(const std::string& path);

}  // namespace tomo
