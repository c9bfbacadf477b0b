#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tomo/normal_ops.hpp"

namespace tomo {

/// Forward-difference gradient pair with replicate (Neumann) boundary.
struct GradientField {
  int n = 0;
  Vector gx;  // gx(i,j) = u(i,j+1) - u(i,j), last column 0
  Vector gy;  // gy(i,j) = u(i+1,j) - u(i,j), last row 0
};

GradientField grad(const Vector& u, int n);
/// Exact transpose of grad (negative divergence with matching boundary).
Vector grad_adjoint(const GradientField& g);

double shrink(double x, double gamma);
Vector shrink(const Vector& x, double gamma);

using LinOp = std::function<void(const Vector&, Vector&)>;

struct CgOptions {
  int steps = 5;
  double rel_residual_tol = 0.0;  // 0 disables early exit
  std::string context;            // named in divergence errors
};

struct CgStats {
  std::vector<double> residual_norms;  // after each step
  double min_ritz = 0.0;               // smallest p.Ap/p.p seen
  int steps_run = 0;
};

/// Runs exactly opts.steps CG iterations from x0 (warm start), no restarts.
/// Returns the final iterate; an exactly-zero residual ends early. Raises
/// NumericalError on non-finite iterates.
Vector cg_solve(const LinOp& op, const Vector& rhs, const Vector& x0,
                const CgOptions& opts, CgStats* stats = nullptr);

/// Largest (or smallest) Ritz value of a symmetric operator from a fixed-seed
/// Lanczos sweep.
double lanczos_extreme_ritz(const LinOp& op, Eigen::Index dim, int iters,
                            std::uint64_t seed, bool largest);

struct SolverConfig {
  double alpha = 1.0;
  double lambda = 1.0;
  int max_bregman_iters = 6000;
  int cg_steps_per_update = 5;
  double update_tol_rel = 1e-8;
  const Image* record_reference = nullptr;
  // Outer Bregman residual feedback on the data term ("adding back the
  // residual"). Off by default; with a truncated surrogate operator the
  // feedback loop needs a large stabilization shift to stay contractive.
  bool data_feedback = false;
  bool warm_start = true;

  void validate() const;
};

struct SolveTrace {
  std::vector<double> update_l1;
  std::vector<double> rel_l1_err;  // empty unless record_reference set
  std::vector<double> t_total_s;   // cumulative wall time at each iteration
  std::vector<double> t_cg_s;      // cumulative CG-only time
  int iterations = 0;
  std::string stopping_reason;  // "tolerance" or "max_iterations"
  double first_update_l1 = 0.0;
  double stabilization_shift = 0.0;  // sigma added to the surrogate system
  double min_ritz = 0.0;             // smallest Ritz value seen across CG calls
  double imag_leakage = 0.0;         // |Im N u| / |N u| of the first application

  void write_csv(const std::string& path) const;
};

/// Anisotropic-TV split Bregman over any backend.
std::pair<Image, SolveTrace> split_bregman_tv(const NormalBackend& backend,
                                              const ComplexVector& slice_data,
                                              const SolverConfig& config);

enum class KChoice { identity, gradient };

/// Solves (alpha N + K^T K) mu = alpha F_NU(f) by CG to relative residual
/// 1e-8 or a step cap.
Image tikhonov_solve(const NormalBackend& backend, const ComplexVector& slice_data,
                     KChoice k_choice, const SolverConfig& config);

}  // namespace tomo
