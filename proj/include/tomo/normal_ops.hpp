#pragma once

#include <memory>

#include "tomo/fourier_slice.hpp"
#include "tomo/sparse.hpp"

namespace tomo {

enum class BackendKind { direct, fused, surrogate };

const char* backend_name(BackendKind k);
BackendKind backend_from_name(const std::string& name);

struct SurrogateConfig {
  int radius_r = 1;
  bool euclidean = false;  // Chebyshev (square) truncation by default
};

/// Uniform handle over the three normal-operator backends. All kinds carry
/// the slice transform (the solver needs forward/adjoint regardless of how
/// the normal operator itself is applied).
struct NormalBackend {
  BackendKind kind = BackendKind::direct;
  NufftParams params;
  std::shared_ptr<const SliceTransform> transform;
  std::shared_ptr<const SparseOperator> btb;  // fused only
  std::shared_ptr<const SparseOperator> t;    // surrogate only
  Vector sample_weights;  // surrogate only: radial density weights per point
  int surrogate_r = 0;
};

inline constexpr std::int64_t kDefaultBtbMemCap = 8ll << 30;  // 8 GiB

NormalBackend make_direct_backend(std::shared_ptr<const SliceTransform> transform);
NormalBackend make_fused_backend(std::shared_ptr<const SliceTransform> transform,
                                 std::int64_t mem_cap_bytes = kDefaultBtbMemCap);
NormalBackend make_surrogate_backend(const NormalBackend& fused,
                                     const SurrogateConfig& config);

/// F_NU F_NU^* via type-2 followed by type-1 over the slice points.
ComplexImage apply_normal_direct(const SliceTransform& transform, const ComplexImage& image);

/// Gram matrix of the spreading operator over the oversampled grid:
/// entry (m, k) = sum_j w(j,m) w(j,k). Symmetric; rows touch only nodes
/// within 2*m_sp per dimension (periodic).
SparseOperator build_btb(const SpreadingPlan& plan,
                         std::int64_t mem_cap_bytes = kDefaultBtbMemCap);

/// A F (B*B) F^* A rearrangement of the direct composition: 2 FFTs, one
/// sparse matvec, 2 diagonal scalings per application.
ComplexImage apply_normal_fused(const SparseOperator& btb, const NufftParams& params,
                                const ComplexImage& image);

/// Truncated translated-stencil surrogate. The stencil is the center-pixel
/// response of the density-weighted normal operator (see
/// radial_density_weights), truncated to radius r, symmetrized, and
/// translated to every pixel with out-of-image entries dropped (no
/// wraparound).
SparseOperator build_surrogate(const NormalBackend& fused, const SurrogateConfig& config);

ComplexImage apply_surrogate(const SparseOperator& t, const ComplexImage& image);

/// Backend-dispatching application of the normal operator.
ComplexImage apply_normal(const NormalBackend& backend, const ComplexImage& image);

/// Real-subspace application: complex apply, real part (sparse backends act
/// on the real data directly).
Vector apply_normal_real(const NormalBackend& backend, const Vector& image_data);

/// Polar-grid density weights per slice sample, angle-major: |k_r|, with the
/// duplicated DC sample weighted 1/4 (quarter cell).
Vector radial_density_weights(const SliceGrid& grid);

/// F W F^* on the real subspace (the surrogate's truncation target).
Vector apply_weighted_normal_real(const SliceTransform& transform, const Vector& weights,
                                  const Vector& image_data);

}  // namespace tomo
