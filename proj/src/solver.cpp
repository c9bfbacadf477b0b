#include "tomo/solver.hpp"

#include <Eigen/Eigenvalues>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

namespace tomo {

GradientField grad(const Vector& u, int n) {
  if (u.size() != static_cast<Eigen::Index>(n) * n) throw ConfigError("grad: size mismatch");
  GradientField g;
  g.n = n;
  g.gx = Vector::Zero(u.size());
  g.gy = Vector::Zero(u.size());
  for (int i = 0; i < n; ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
    for (int j = 0; j < n - 1; ++j) g.gx[row + j] = u[row + j + 1] - u[row + j];
    if (i < n - 1)
      for (int j = 0; j < n; ++j) g.gy[row + j] = u[row + n + j] - u[row + j];
  }
  return g;
}

Vector grad_adjoint(const GradientField& g) {
  const int n = g.n;
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n) * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Index row = static_cast<Eigen::Index>(i) * n;
    for (int j = 0; j < n - 1; ++j) {
      out[row + j + 1] += g.gx[row + j];
      out[row + j] -= g.gx[row + j];
    }
    if (i < n - 1)
      for (int j = 0; j < n; ++j) {
        out[row + n + j] += g.gy[row + j];
        out[row + j] -= g.gy[row + j];
      }
  }
  return out;
}

double shrink(double x, double gamma) {
  const double m = std::abs(x) - gamma;
  return m > 0.0 ? (x > 0.0 ? m : -m) : 0.0;
}

Vector shrink(const Vector& x, double gamma) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = shrink(x[i], gamma);
  return out;
}

Vector cg_solve(const LinOp& op, const Vector& rhs, const Vector& x0,
                const CgOptions& opts, CgStats* stats) {
  if (opts.steps < 1) throw ConfigError("cg_solve: steps must be >= 1");
  Vector x = x0;
  Vector ax(rhs.size());
  op(x, ax);
  Vector r = rhs - ax;
  Vector p = r;
  double rs = r.squaredNorm();
  const double rhs_norm = rhs.norm();
  double min_ritz = std::numeric_limits<double>::infinity();
  Vector ap(rhs.size());
  int step = 0;
  for (; step < opts.steps; ++step) {
    if (rs == 0.0) break;  // exact solution reached
    op(p, ap);
    const double p_ap = p.dot(ap);
    const double p_p = p.squaredNorm();
    if (p_p > 0.0) min_ritz = std::min(min_ritz, p_ap / p_p);
    if (p_ap == 0.0) break;
    const double alpha = rs / p_ap;
    x += alpha * p;
    r -= alpha * ap;
    const double rs_next = r.squaredNorm();
    if (!std::isfinite(rs_next) || !x.allFinite())
      throw NumericalError("cg_solve diverged (non-finite iterate)" +
                           (opts.context.empty() ? "" : " in " + opts.context));
    if (stats) stats->residual_norms.push_back(std::sqrt(rs_next));
    p = r + (rs_next / rs) * p;
    rs = rs_next;
    if (opts.rel_residual_tol > 0.0 && rhs_norm > 0.0 &&
        std::sqrt(rs) <= opts.rel_residual_tol * rhs_norm)
      break;
  }
  if (stats) {
    stats->min_ritz = std::isfinite(min_ritz) ? min_ritz : 0.0;
    stats->steps_run = step;
  }
  return x;
}

double lanczos_extreme_ritz(const LinOp& op, Eigen::Index dim, int iters,
                            std::uint64_t seed, bool largest) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  Vector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = gauss(rng);
  v.normalize();
  Vector v_prev = Vector::Zero(dim), w(dim);
  std::vector<double> alphas, betas;
  double beta = 0.0;
  double extreme = largest ? -std::numeric_limits<double>::infinity()
                           : std::numeric_limits<double>::infinity();
  for (int it = 0; it < iters; ++it) {
    op(v, w);
    const double a = v.dot(w);
    alphas.push_back(a);
    w -= a * v + beta * v_prev;
    beta = w.norm();
    const int m = static_cast<int>(alphas.size());
    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      tri(i, i) = alphas[i];
      if (i + 1 < m) tri(i, i + 1) = tri(i + 1, i) = betas[i];
    }
    const Eigen::VectorXd eigs =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(tri).eigenvalues();
    extreme = largest ? eigs.maxCoeff() : eigs.minCoeff();
    if (beta < 1e-12) break;
    betas.push_back(beta);
    v_prev = v;
    v = w / beta;
  }
  return extreme;
}

void SolverConfig::validate() const {
  if (!(alpha > 0.0)) throw ConfigError("SolverConfig: alpha must be positive");
  if (!(lambda > 0.0)) throw ConfigError("SolverConfig: lambda must be positive");
  if (max_bregman_iters < 1) throw ConfigError("SolverConfig: max_bregman_iters >= 1");
  if (cg_steps_per_update < 1) throw ConfigError("SolverConfig: cg_steps_per_update >= 1");
  if (update_tol_rel < 0.0) throw ConfigError("SolverConfig: update_tol_rel >= 0");
}

void SolveTrace::write_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("SolveTrace: cannot open " + path);
  os << "iter,update_l1,rel_l1_err,t_total_s,t_cg_s\n";
  for (size_t i = 0; i < update_l1.size(); ++i) {
    os << (i + 1) << ',' << update_l1[i] << ',';
    if (i < rel_l1_err.size()) os << rel_l1_err[i];
    os << ',' << t_total_s[i] << ',' << t_cg_s[i] << '\n';
  }
  if (!os) throw IoError("SolveTrace: short write on " + path);
}

namespace {

// System operator, fidelity right-hand side and stabilization shift for one
// backend. The surrogate approximates the density-weighted normal operator,
// so its fidelity terms carry the same weights; exact backends use the plain
// least-squares terms.
struct Subproblem {
  LinOp system;
  double sigma = 0.0;
  std::function<Vector(const ComplexVector&)> backproject;
};

Subproblem make_subproblem(const NormalBackend& backend, const SolverConfig& config) {
  Subproblem sub;
  const int n = backend.params.n;
  const double alpha = config.alpha;
  const double lambda = config.lambda;
  const bool surrogate = backend.kind == BackendKind::surrogate;

  auto base_op = [&backend, alpha, lambda, n](const Vector& u, Vector& out) {
    out = alpha * apply_normal_real(backend, u) + lambda * grad_adjoint(grad(u, n));
  };

  if (surrogate) {
    const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;
    if (config.data_feedback) {
      // Contraction floor: 2(alpha T + lambda K'K + sigma) must dominate the
      // weighted normal operator for the outer feedback loop to converge.
      const auto& transform = *backend.transform;
      const Vector& w = backend.sample_weights;
      LinOp gap = [&](const Vector& u, Vector& out) {
        Vector tmp(u.size());
        base_op(u, tmp);
        out = alpha * apply_weighted_normal_real(transform, w, u) - 2.0 * tmp;
      };
      sub.sigma = 1.2 * std::max(0.0, 0.5 * lanczos_extreme_ritz(gap, dim, 40, 7, true));
    } else {
      // PSD floor only: the truncated stencil can be indefinite.
      sub.sigma = 1.2 * std::max(0.0, -lanczos_extreme_ritz(base_op, dim, 40, 7, false));
    }
  }

  const double sigma = sub.sigma;
  sub.system = [base_op, sigma](const Vector& u, Vector& out) {
    base_op(u, out);
    if (sigma != 0.0) out += sigma * u;
  };

  if (surrogate) {
    Vector w = backend.sample_weights;
    auto transform = backend.transform;
    sub.backproject = [transform, w, alpha](const ComplexVector& f) {
      ComplexVector weighted = f;
      weighted.array() *= w.array().cast<Complex>();
      return Vector(alpha * transform->adjoint(weighted).data.real());
    };
  } else {
    auto transform = backend.transform;
    sub.backproject = [transform, alpha](const ComplexVector& f) {
      return Vector(alpha * transform->adjoint(f).data.real());
    };
  }
  return sub;
}

}  // namespace

std::pair<Image, SolveTrace> split_bregman_tv(const NormalBackend& backend,
                                              const ComplexVector& slice_data,
                                              const SolverConfig& config) {
  config.validate();
  const int n = backend.params.n;
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;
  if (slice_data.size() != backend.transform->grid().points.count())
    throw ConfigError("split_bregman_tv: slice data size mismatch");
  if (config.record_reference && config.record_reference->n != n)
    throw ConfigError("split_bregman_tv: reference side mismatch");

  Subproblem sub = make_subproblem(backend, config);

  SolveTrace trace;
  trace.stabilization_shift = sub.sigma;
  trace.min_ritz = std::numeric_limits<double>::infinity();

  // Diagnostic: conjugation-symmetry leakage of the first application.
  {
    Vector probe = Vector::Ones(dim);
    if (backend.kind != BackendKind::surrogate) {
      ComplexImage nu = apply_normal(backend, ComplexImage(n, probe.cast<Complex>()));
      const double total = nu.data.norm();
      trace.imag_leakage = total > 0.0 ? nu.data.imag().norm() / total : 0.0;
      if (trace.imag_leakage > 0.1)
        throw NumericalError("split_bregman_tv: conjugation symmetry broken (imag leakage " +
                             std::to_string(trace.imag_leakage) + ")");
    }
  }

  Vector mu = Vector::Zero(dim);
  Vector dx = Vector::Zero(dim), dy = Vector::Zero(dim);
  Vector bx = Vector::Zero(dim), by = Vector::Zero(dim);
  ComplexVector fk = slice_data;
  Vector fidelity_rhs = sub.backproject(fk);

  const auto t_start = std::chrono::steady_clock::now();
  double cg_seconds = 0.0;
  auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  const double shrink_gamma = 1.0 / config.lambda;
  trace.stopping_reason = "max_iterations";
  for (int iter = 0; iter < config.max_bregman_iters; ++iter) {
    GradientField db{n, dx - bx, dy - by};
    Vector rhs = fidelity_rhs + config.lambda * grad_adjoint(db);

    CgOptions cg_opts;
    cg_opts.steps = config.cg_steps_per_update;
    cg_opts.context = std::string("split_bregman_tv/") + backend_name(backend.kind);
    CgStats cg_stats;
    const auto t_cg = std::chrono::steady_clock::now();
    Vector mu_next = cg_solve(sub.system, rhs,
                              config.warm_start ? mu : Vector(Vector::Zero(dim)), cg_opts,
                              &cg_stats);
    cg_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t_cg).count();
    if (cg_stats.min_ritz != 0.0) trace.min_ritz = std::min(trace.min_ritz, cg_stats.min_ritz);

    GradientField g = grad(mu_next, n);
    dx = shrink(g.gx + bx, shrink_gamma);
    dy = shrink(g.gy + by, shrink_gamma);
    bx += g.gx - dx;
    by += g.gy - dy;
    if (config.data_feedback) {
      fk += slice_data - backend.transform->forward(ComplexImage(n, mu_next.cast<Complex>()));
      fidelity_rhs = sub.backproject(fk);
    }

    const double update = (mu_next - mu).cwiseAbs().sum();
    mu = std::move(mu_next);
    if (!mu.allFinite())
      throw NumericalError(std::string("split_bregman_tv: non-finite iterate with backend ") +
                           backend_name(backend.kind));
    trace.update_l1.push_back(update);
    if (config.record_reference)
      trace.rel_l1_err.push_back(relative_l1_error(Image(n, mu), *config.record_reference));
    trace.t_total_s.push_back(elapsed());
    trace.t_cg_s.push_back(cg_seconds);
    trace.iterations = iter + 1;
    if (iter == 0) trace.first_update_l1 = update;
    if (update <= config.update_tol_rel * trace.first_update_l1) {
      trace.stopping_reason = "tolerance";
      break;
    }
  }
  if (!std::isfinite(trace.min_ritz)) trace.min_ritz = 0.0;
  return {Image(n, std::move(mu)), std::move(trace)};
}

Image tikhonov_solve(const NormalBackend& backend, const ComplexVector& slice_data,
                     KChoice k_choice, const SolverConfig& config) {
  config.validate();
  const int n = backend.params.n;
  const Eigen::Index dim = static_cast<Eigen::Index>(n) * n;
  if (slice_data.size() != backend.transform->grid().points.count())
    throw ConfigError("tikhonov_solve: slice data size mismatch");

  Subproblem sub = make_subproblem(backend, config);
  const double alpha = config.alpha;
  LinOp system;
  if (k_choice == KChoice::gradient) {
    system = sub.system;  // alpha N + lambda K'K with lambda = config.lambda
  } else {
    const NormalBackend* b = &backend;
    const double sigma = sub.sigma;
    system = [b, alpha, sigma](const Vector& u, Vector& out) {
      out = alpha * apply_normal_real(*b, u) + u + sigma * u;
    };
  }

  Vector rhs = sub.backproject(slice_data);
  CgOptions opts;
  opts.steps = 5000;
  opts.rel_residual_tol = 1e-8;
  opts.context = std::string("tikhonov_solve/") + backend_name(backend.kind);
  Vector mu = cg_solve(system, rhs, Vector::Zero(dim), opts);
  return Image(n, std::move(mu));
}

}  // namespace tomo
