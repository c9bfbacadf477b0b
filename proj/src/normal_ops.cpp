#include "tomo/normal_ops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "tomo/fft.hpp"
#include "tomo/instrument.hpp"

namespace tomo {

const char* backend_name(BackendKind k) {
  switch (k) {
    case BackendKind::direct: return "direct";
    case BackendKind::fused: return "fused";
    case BackendKind::surrogate: return "surrogate";
  }
  return "?";
}

BackendKind backend_from_name(const std::string& name) {
  if (name == "direct") return BackendKind::direct;
  if (name == "fused") return BackendKind::fused;
  if (name == "surrogate") return BackendKind::surrogate;
  throw ConfigError("unknown backend: " + name);
}

ComplexImage apply_normal_direct(const SliceTransform& transform, const ComplexImage& image) {
  return transform.adjoint(transform.forward(image));
}

namespace {

inline int wrap(int idx, int m) {
  if (idx < 0) return idx + m;
  if (idx >= m) return idx - m;
  return idx;
}

SparseOperator::Meta meta_from(const SliceGrid& grid, const NufftParams& params, int r) {
  SparseOperator::Meta meta;
  meta.n = params.n;
  meta.m_sp = params.m_sp;
  meta.tau = params.tau;
  meta.angle_count = grid.angle_set.count();
  meta.d = grid.angle_set.subsample_d;
  meta.r = r;
  return meta;
}

}  // namespace

SparseOperator build_btb(const SpreadingPlan& plan, std::int64_t mem_cap_bytes) {
  if (plan.points.dim != 2) throw ConfigError("build_btb: 2-D plans only");
  const int m_r = plan.params.m_r;
  const int m_sp = plan.params.m_sp;
  const int w = plan.window();          // window width per dimension
  const int band = 4 * m_sp + 1;        // column reach per dimension
  const int band2 = band * band;
  const Eigen::Index count = plan.points.count();
  const std::int64_t grid_nodes = static_cast<std::int64_t>(m_r) * m_r;

  // Per-point window weights, precomputed once.
  std::vector<double> wx(static_cast<size_t>(count) * w), wy(static_cast<size_t>(count) * w);
  for (Eigen::Index j = 0; j < count; ++j) {
    plan.weights(j, 0, &wx[static_cast<size_t>(j) * w]);
    plan.weights(j, 1, &wy[static_cast<size_t>(j) * w]);
  }

  // Estimate nnz from the touched-row count; refuse absurd builds up front.
  std::vector<std::uint8_t> touched(grid_nodes, 0);
  for (Eigen::Index j = 0; j < count; ++j) {
    const int mjx = plan.nearest_index(j, 0), mjy = plan.nearest_index(j, 1);
    for (int a = 0; a < w; ++a) {
      const std::int64_t row = static_cast<std::int64_t>(wrap(mjx - m_sp + a, m_r)) * m_r;
      for (int b = 0; b < w; ++b) touched[row + wrap(mjy - m_sp + b, m_r)] = 1;
    }
  }
  std::int64_t touched_rows = 0;
  for (auto t : touched) touched_rows += t;
  const std::int64_t est_bytes = touched_rows * static_cast<std::int64_t>(band2) * 16;
  if (est_bytes > mem_cap_bytes)
    throw ConfigError("build_btb: estimated " + std::to_string(est_bytes >> 20) +
                      " MiB exceeds cap; raise the cap or use a smaller m_sp");

  SparseOperator op;
  op.rows = grid_nodes;
  op.cols = grid_nodes;
  op.symmetric_flag = true;
  op.row_offsets.reserve(grid_nodes + 1);
  op.row_offsets.push_back(0);
  op.col_indices.reserve(touched_rows * band2 / 2);
  op.values.reserve(touched_rows * band2 / 2);

  // Process the grid in blocks of tx lines with a dense band accumulator:
  // acc[(tx-b0)*m_r + ty][doff] holds entry (row, row+offset) with
  // doff = (dx+2*m_sp)*band + (dy+2*m_sp).
  const std::int64_t block_bytes = 128ll << 20;
  int lines_per_block =
      static_cast<int>(std::max<std::int64_t>(1, block_bytes / (static_cast<std::int64_t>(m_r) * band2 * 8)));
  lines_per_block = std::min(lines_per_block, m_r);
  std::vector<double> acc(static_cast<size_t>(lines_per_block) * m_r * band2);
  std::vector<double> px(static_cast<size_t>(w) * w), py(static_cast<size_t>(w) * w);
  std::vector<std::pair<std::int32_t, double>> row_entries;
  row_entries.reserve(band2);

  for (int b0 = 0; b0 < m_r; b0 += lines_per_block) {
    const int b1 = std::min(m_r, b0 + lines_per_block);
    std::fill(acc.begin(), acc.begin() + static_cast<size_t>(b1 - b0) * m_r * band2, 0.0);

    for (Eigen::Index j = 0; j < count; ++j) {
      const int mjx = plan.nearest_index(j, 0);
      // Skip points whose (wrapped) tx window misses the block entirely.
      bool hits = false;
      for (int a = 0; a < w && !hits; ++a) {
        const int tx = wrap(mjx - m_sp + a, m_r);
        hits = tx >= b0 && tx < b1;
      }
      if (!hits) continue;

      const double* wxj = &wx[static_cast<size_t>(j) * w];
      const double* wyj = &wy[static_cast<size_t>(j) * w];
      for (int a = 0; a < w; ++a)
        for (int a2 = 0; a2 < w; ++a2) px[static_cast<size_t>(a) * w + a2] = wxj[a] * wxj[a2];
      for (int b = 0; b < w; ++b)
        for (int b2 = 0; b2 < w; ++b2) py[static_cast<size_t>(b) * w + b2] = wyj[b] * wyj[b2];

      const int mjy = plan.nearest_index(j, 1);
      for (int a = 0; a < w; ++a) {
        const int tx = wrap(mjx - m_sp + a, m_r);
        if (tx < b0 || tx >= b1) continue;
        for (int b = 0; b < w; ++b) {
          const int ty = wrap(mjy - m_sp + b, m_r);
          double* cell =
              acc.data() + (static_cast<size_t>(tx - b0) * m_r + ty) * band2;
          for (int a2 = 0; a2 < w; ++a2) {
            const double vx = px[static_cast<size_t>(a) * w + a2];
            double* dst = cell + static_cast<size_t>(a2 - a + 2 * m_sp) * band + (2 * m_sp - b);
            const double* pyb = &py[static_cast<size_t>(b) * w];
            for (int b2 = 0; b2 < w; ++b2) dst[b2] += vx * pyb[b2];
          }
        }
      }
    }

    // Emit CSR rows of this block in global row order, columns sorted.
    for (int tx = b0; tx < b1; ++tx) {
      for (int ty = 0; ty < m_r; ++ty) {
        const double* cell =
            acc.data() + (static_cast<size_t>(tx - b0) * m_r + ty) * band2;
        row_entries.clear();
        for (int i = 0; i < band; ++i) {
          const int cx = wrap(tx + i - 2 * m_sp, m_r);
          for (int k = 0; k < band; ++k) {
            const double v = cell[static_cast<size_t>(i) * band + k];
            if (v != 0.0) {
              const int cy = wrap(ty + k - 2 * m_sp, m_r);
              row_entries.emplace_back(static_cast<std::int32_t>(cx) * m_r + cy, v);
            }
          }
        }
        std::sort(row_entries.begin(), row_entries.end(),
                  [](const auto& l, const auto& r) { return l.first < r.first; });
        for (const auto& [c, v] : row_entries) {
          op.col_indices.push_back(c);
          op.values.push_back(v);
        }
        op.row_offsets.push_back(static_cast<std::int64_t>(op.values.size()));
      }
    }
  }
  return op;
}

ComplexImage apply_normal_fused(const SparseOperator& btb, const NufftParams& params,
                                const ComplexImage& image) {
  const int n = params.n;
  const int m_r = params.m_r;
  if (image.n != n) throw ConfigError("apply_normal_fused: image side mismatch");
  if (btb.rows != static_cast<std::int64_t>(m_r) * m_r)
    throw ConfigError("apply_normal_fused: B*B size does not match params");

  ComplexVector work = image.data;
  deconvolve(params, 2, work);

  ComplexVector grid = ComplexVector::Zero(static_cast<Eigen::Index>(m_r) * m_r);
  auto bin = [n, m_r](int t) { return (t - n / 2 + m_r) % m_r; };
  for (int t1 = 0; t1 < n; ++t1) {
    const Eigen::Index dst = static_cast<Eigen::Index>(bin(t1)) * m_r;
    for (int t2 = 0; t2 < n; ++t2)
      grid[dst + bin(t2)] = work[static_cast<Eigen::Index>(t1) * n + t2];
  }
  fft_2d(grid, m_r, true);
  grid = btb.apply(grid);
  fft_2d(grid, m_r, false);

  ComplexVector out(static_cast<Eigen::Index>(n) * n);
  const double scale = 1.0 / (static_cast<double>(m_r) * m_r);
  for (int t1 = 0; t1 < n; ++t1) {
    const Eigen::Index src = static_cast<Eigen::Index>(bin(t1)) * m_r;
    for (int t2 = 0; t2 < n; ++t2)
      out[static_cast<Eigen::Index>(t1) * n + t2] = grid[src + bin(t2)] * scale;
  }
  deconvolve(params, 2, out);
  return ComplexImage(n, std::move(out));
}

Vector radial_density_weights(const SliceGrid& grid) {
  const int n = grid.n;
  const int n_ang = grid.angle_set.count();
  Vector w(static_cast<Eigen::Index>(n_ang) * n);
  Eigen::Index row = 0;
  for (int a = 0; a < n_ang; ++a)
    for (int t = 0; t < n; ++t, ++row) {
      const int k_r = t - n / 2;
      w[row] = k_r == 0 ? 0.25 : std::abs(static_cast<double>(k_r));
    }
  return w;
}

Vector apply_weighted_normal_real(const SliceTransform& transform, const Vector& weights,
                                  const Vector& image_data) {
  const int n = transform.grid().n;
  ComplexImage img(n, image_data.cast<Complex>());
  ComplexVector slice = transform.forward(img);
  if (weights.size() != slice.size())
    throw ConfigError("apply_weighted_normal_real: weight count mismatch");
  slice.array() *= weights.array().cast<Complex>();
  return transform.adjoint(slice).data.real();
}

SparseOperator build_surrogate(const NormalBackend& fused, const SurrogateConfig& config) {
  if (fused.kind != BackendKind::fused)
    throw ConfigError("build_surrogate: expects the fused backend");
  const int n = fused.params.n;
  const int r = config.radius_r;
  if (n % 2 != 0) throw ConfigError("build_surrogate: n must be even");
  if (r < 1 || r >= n / 2) throw ConfigError("build_surrogate: radius out of range");

  // Center-pixel response of the density-weighted normal operator.
  const Vector weights = radial_density_weights(fused.transform->grid());
  Vector delta = Vector::Zero(static_cast<Eigen::Index>(n) * n);
  delta[static_cast<Eigen::Index>(n / 2) * n + n / 2] = 1.0;
  const Vector response = apply_weighted_normal_real(*fused.transform, weights, delta);

  // Truncated, symmetrized stencil indexed by offset (di, dj).
  const int side = 2 * r + 1;
  Eigen::MatrixXd stencil(side, side);
  for (int di = -r; di <= r; ++di)
    for (int dj = -r; dj <= r; ++dj) {
      const double fwd = response[static_cast<Eigen::Index>(n / 2 + di) * n + (n / 2 + dj)];
      const double bwd = response[static_cast<Eigen::Index>(n / 2 - di) * n + (n / 2 - dj)];
      stencil(di + r, dj + r) = 0.5 * (fwd + bwd);
    }

  SparseOperator op;
  op.rows = static_cast<std::int64_t>(n) * n;
  op.cols = op.rows;
  op.symmetric_flag = true;
  op.meta = meta_from(fused.transform->grid(), fused.params, r);
  op.row_offsets.reserve(op.rows + 1);
  op.row_offsets.push_back(0);
  op.col_indices.reserve(static_cast<size_t>(op.rows) * side * side);
  op.values.reserve(static_cast<size_t>(op.rows) * side * side);

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int di = -r; di <= r; ++di) {
        const int ii = i + di;
        if (ii < 0 || ii >= n) continue;  // edge translations clipped, no wraparound
        for (int dj = -r; dj <= r; ++dj) {
          const int jj = j + dj;
          if (jj < 0 || jj >= n) continue;
          if (config.euclidean && di * di + dj * dj > r * r) continue;
          op.col_indices.push_back(static_cast<std::int32_t>(ii) * n + jj);
          op.values.push_back(stencil(di + r, dj + r));
        }
      }
      op.row_offsets.push_back(static_cast<std::int64_t>(op.values.size()));
    }
  }
  return op;
}

ComplexImage apply_surrogate(const SparseOperator& t, const ComplexImage& image) {
  if (t.cols != image.data.size()) throw ConfigError("apply_surrogate: size mismatch");
  return ComplexImage(image.n, t.apply(image.data));
}

NormalBackend make_direct_backend(std::shared_ptr<const SliceTransform> transform) {
  NormalBackend b;
  b.kind = BackendKind::direct;
  b.params = transform->params();
  b.transform = std::move(transform);
  return b;
}

NormalBackend make_fused_backend(std::shared_ptr<const SliceTransform> transform,
                                 std::int64_t mem_cap_bytes) {
  NormalBackend b;
  b.kind = BackendKind::fused;
  b.params = transform->params();
  auto btb = std::make_shared<SparseOperator>(build_btb(transform->plan(), mem_cap_bytes));
  btb->meta = meta_from(transform->grid(), transform->params(), 0);
  b.btb = std::move(btb);
  b.transform = std::move(transform);
  return b;
}

NormalBackend make_surrogate_backend(const NormalBackend& fused, const SurrogateConfig& config) {
  NormalBackend b;
  b.kind = BackendKind::surrogate;
  b.params = fused.params;
  b.transform = fused.transform;
  b.t = std::make_shared<SparseOperator>(build_surrogate(fused, config));
  b.sample_weights = radial_density_weights(fused.transform->grid());
  b.surrogate_r = config.radius_r;
  return b;
}

ComplexImage apply_normal(const NormalBackend& backend, const ComplexImage& image) {
  switch (backend.kind) {
    case BackendKind::direct:
      return apply_normal_direct(*backend.transform, image);
    case BackendKind::fused:
      return apply_normal_fused(*backend.btb, backend.params, image);
    case BackendKind::surrogate:
      return apply_surrogate(*backend.t, image);
  }
  throw ConfigError("apply_normal: bad backend kind");
}

Vector apply_normal_real(const NormalBackend& backend, const Vector& image_data) {
  if (backend.kind == BackendKind::surrogate) return backend.t->apply(image_data);
  const int n = backend.params.n;
  if (image_data.size() != static_cast<Eigen::Index>(n) * n)
    throw ConfigError("apply_normal_real: size mismatch");
  ComplexImage img(n, image_data.cast<Complex>());
  return apply_normal(backend, img).data.real();
}

}  // namespace tomo
