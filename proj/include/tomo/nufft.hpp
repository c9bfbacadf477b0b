#pragma once

#include <Eigen/Core>

#include "tomo/image.hpp"

namespace tomo {

/// Accuracy presets from the Gaussian-gridding digit rules (m_sp spreading
/// half-width, tau = m_sp / n^2).
enum class Preset { digits2, digits6, digits12 };

const char* preset_name(Preset p);
Preset preset_from_name(const std::string& name);

struct NufftParams {
  int m_sp = 0;      // spreading half-width in grid points
  double tau = 0.0;  // Gaussian variance parameter
  int n = 0;         // uniform modes per dimension
  int m_r = 0;       // oversampled grid size per dimension, always 2n
};

NufftParams make_params(Preset preset, int n);
NufftParams make_params(int m_sp, double tau, int n);

/// Nonuniform sample coordinates, one point per row, each coordinate reduced
/// into [0, 2*pi).
struct FrequencyPointSet {
  int dim = 0;            // 1 or 2
  Eigen::MatrixXd coords; // count x dim

  Eigen::Index count() const { return coords.rows(); }

  /// Reduces coordinates modulo 2*pi and validates dim.
  static FrequencyPointSet make(int dim, Eigen::MatrixXd coords);
};

/// Precomputed fast-Gaussian-gridding factors. The spreading weight of point
/// j at grid offset l (|l| <= m_sp) in a given dimension factors as
///   e1 * e2^l * e3[l + m_sp] == exp(-(x - pi*(m_j + l)/M)^2 / (4 tau)),
/// with M = m_r/2 and m_j = sup{m : pi*m/M <= x}.
struct SpreadingPlan {
  NufftParams params;
  FrequencyPointSet points;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> nearest_index;  // count x dim
  Eigen::MatrixXd e1;  // count x dim
  Eigen::MatrixXd e2;  // count x dim
  Eigen::VectorXd e3;  // 2*m_sp+1, offset l at index l+m_sp (same in each dim)

  int window() const { return 2 * params.m_sp + 1; }

  /// Reconstructs the window weights of one point in one dimension.
  void weights(Eigen::Index point, int dim_index, double* w) const;
};

SpreadingPlan plan_spreading(const FrequencyPointSet& points, const NufftParams& params);

/// Gridding (operator B): grid[m] = sum_j samples[j] w(j, m) over each point's
/// (2*m_sp+1)^dim window, periodic at the grid edges. Output length m_r^dim.
ComplexVector spread(const SpreadingPlan& plan, const ComplexVector& samples);

/// Adjoint of spread (B*): samples[j] = sum_{m in window(j)} grid[m] w(j, m).
ComplexVector interpolate(const SpreadingPlan& plan, const ComplexVector& grid);

/// Diagonal deconvolution (operator A): multiplies coefficient k by
/// sqrt(pi/tau) e^{k^2 tau} per dimension; coefficients are indexed
/// k = t - n/2 in each dimension (pixel/array index t in [0, n)).
void deconvolve(const NufftParams& params, int dim, ComplexVector& coefficients);

/// Type-1 NUFFT: F(k) ~= sum_j samples[j] e^{-i k.x_j}, k in [-n/2, n/2)^dim.
ComplexVector nufft_type1(const SpreadingPlan& plan, const ComplexVector& samples);

/// Type-2 NUFFT: f(x_j) ~= sum_k coefficients[k] e^{+i k.x_j}. Exact adjoint
/// of nufft_type1.
ComplexVector nufft_type2(const SpreadingPlan& plan, const ComplexVector& coefficients);

enum class NdftDirection { type1, type2 };

/// Exact direct summation oracle; refuses more than 1e8 terms.
ComplexVector direct_ndft(const FrequencyPointSet& points, int n,
                          const ComplexVector& input, NdftDirection direction);

}  // namespace tomo
