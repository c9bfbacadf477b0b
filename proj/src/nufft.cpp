#include "tomo/nufft.hpp"

#include <cmath>

#include "tomo/fft.hpp"
#include "tomo/instrument.hpp"

namespace tomo {

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::digits2: return "digits2";
    case Preset::digits6: return "digits6";
    case Preset::digits12: return "digits12";
  }
  return "?";
}

Preset preset_from_name(const std::string& name) {
  if (name == "digits2") return Preset::digits2;
  if (name == "digits6") return Preset::digits6;
  if (name == "digits12") return Preset::digits12;
  throw ConfigError("unknown preset: " + name);
}

NufftParams make_params(Preset preset, int n) {
  int m_sp = 0;
  switch (preset) {
    case Preset::digits2: m_sp = 2; break;
    case Preset::digits6: m_sp = 6; break;
    case Preset::digits12: m_sp = 12; break;
  }
  return make_params(m_sp, static_cast<double>(m_sp) / (static_cast<double>(n) * n), n);
}

NufftParams make_params(int m_sp, double tau, int n) {
  if (n < 4) throw ConfigError("make_params: n must be >= 4");
  if (m_sp < 1) throw ConfigError("make_params: m_sp must be positive");
  if (!(tau > 0.0)) throw ConfigError("make_params: tau must be positive");
  return NufftParams{m_sp, tau, n, 2 * n};
}

FrequencyPointSet FrequencyPointSet::make(int dim, Eigen::MatrixXd coords) {
  if (dim != 1 && dim != 2) throw ConfigError("FrequencyPointSet: dim must be 1 or 2");
  if (coords.cols() != dim) throw ConfigError("FrequencyPointSet: coords must have dim columns");
  constexpr double two_pi = 2.0 * M_PI;
  for (Eigen::Index i = 0; i < coords.size(); ++i) {
    double x = std::fmod(coords.data()[i], two_pi);
    if (x < 0.0) x += two_pi;
    if (x >= two_pi) x = 0.0;  // fmod rounding at the seam
    coords.data()[i] = x;
  }
  return FrequencyPointSet{dim, std::move(coords)};
}

void SpreadingPlan::weights(Eigen::Index point, int dim_index, double* w) const {
  const int m_sp = params.m_sp;
  const double f1 = e1(point, dim_index);
  const double f2 = e2(point, dim_index);
  const double f2inv = 1.0 / f2;
  w[m_sp] = f1;  // l = 0, e3[m_sp] == 1
  double p = f1, q = f1;
  for (int l = 1; l <= m_sp; ++l) {
    p *= f2;
    q *= f2inv;
    w[m_sp + l] = p * e3[m_sp + l];
    w[m_sp - l] = q * e3[m_sp - l];
  }
}

SpreadingPlan plan_spreading(const FrequencyPointSet& points, const NufftParams& params) {
  SpreadingPlan plan;
  plan.params = params;
  plan.points = points;
  const Eigen::Index count = points.count();
  const int dim = points.dim;
  const int m_sp = params.m_sp;
  const double tau = params.tau;
  const double big_m = params.m_r / 2.0;  // M in the gridding identity
  const double h = M_PI / big_m;          // oversampled grid spacing

  plan.nearest_index.resize(count, dim);
  plan.e1.resize(count, dim);
  plan.e2.resize(count, dim);
  plan.e3.resize(2 * m_sp + 1);
  for (int l = -m_sp; l <= m_sp; ++l)
    plan.e3[l + m_sp] = std::exp(-(M_PI * l / big_m) * (M_PI * l / big_m) / (4.0 * tau));

  for (Eigen::Index j = 0; j < count; ++j) {
    for (int d = 0; d < dim; ++d) {
      const double x = points.coords(j, d);
      int mj = static_cast<int>(std::floor(x / h));
      if (mj >= params.m_r) mj = params.m_r - 1;  // x just below 2*pi
      const double xi = x - h * mj;               // in [0, h)
      plan.nearest_index(j, d) = mj;
      plan.e1(j, d) = std::exp(-xi * xi / (4.0 * tau));
      plan.e2(j, d) = std::exp(xi * M_PI / (big_m * 2.0 * tau));
    }
  }
  return plan;
}

namespace {

inline int wrap(int idx, int m) {
  if (idx < 0) return idx + m;
  if (idx >= m) return idx - m;
  return idx;
}

constexpr int kMaxWindow = 64;  // supports m_sp up to 31

void check_window(const SpreadingPlan& plan) {
  if (plan.window() > kMaxWindow) throw ConfigError("spreading window too wide");
}

}  // namespace

ComplexVector spread(const SpreadingPlan& plan, const ComplexVector& samples) {
  if (samples.size() != plan.points.count())
    throw ConfigError("spread: sample count does not match plan");
  check_window(plan);
  const int m_sp = plan.params.m_sp;
  const int m_r = plan.params.m_r;
  const int w = plan.window();
  const int dim = plan.points.dim;

  double wx[kMaxWindow], wy[kMaxWindow];
  int ix[kMaxWindow], iy[kMaxWindow];

  if (dim == 1) {
    ComplexVector grid = ComplexVector::Zero(m_r);
    for (Eigen::Index j = 0; j < samples.size(); ++j) {
      plan.weights(j, 0, wx);
      const int mj = plan.nearest_index(j, 0);
      const Complex s = samples[j];
      for (int a = 0; a < w; ++a) grid[wrap(mj - m_sp + a, m_r)] += s * wx[a];
    }
    return grid;
  }

  ComplexVector grid = ComplexVector::Zero(static_cast<Eigen::Index>(m_r) * m_r);
  for (Eigen::Index j = 0; j < samples.size(); ++j) {
    plan.weights(j, 0, wx);
    plan.weights(j, 1, wy);
    const int mjx = plan.nearest_index(j, 0);
    const int mjy = plan.nearest_index(j, 1);
    for (int a = 0; a < w; ++a) ix[a] = wrap(mjx - m_sp + a, m_r);
    for (int b = 0; b < w; ++b) iy[b] = wrap(mjy - m_sp + b, m_r);
    const Complex s = samples[j];
    for (int a = 0; a < w; ++a) {
      const Complex sa = s * wx[a];
      Complex* row = grid.data() + static_cast<Eigen::Index>(ix[a]) * m_r;
      for (int b = 0; b < w; ++b) row[iy[b]] += sa * wy[b];
    }
  }
  return grid;
}

ComplexVector interpolate(const SpreadingPlan& plan, const ComplexVector& grid) {
  const int m_r = plan.params.m_r;
  const int dim = plan.points.dim;
  const Eigen::Index grid_len =
      dim == 1 ? m_r : static_cast<Eigen::Index>(m_r) * m_r;
  if (grid.size() != grid_len) throw ConfigError("interpolate: grid size mismatch");
  check_window(plan);
  const int m_sp = plan.params.m_sp;
  const int w = plan.window();

  double wx[kMaxWindow], wy[kMaxWindow];
  int ix[kMaxWindow], iy[kMaxWindow];
  ComplexVector samples(plan.points.count());

  if (dim == 1) {
    for (Eigen::Index j = 0; j < samples.size(); ++j) {
      plan.weights(j, 0, wx);
      const int mj = plan.nearest_index(j, 0);
      Complex acc = 0.0;
      for (int a = 0; a < w; ++a) acc += grid[wrap(mj - m_sp + a, m_r)] * wx[a];
      samples[j] = acc;
    }
    return samples;
  }

  for (Eigen::Index j = 0; j < samples.size(); ++j) {
    plan.weights(j, 0, wx);
    plan.weights(j, 1, wy);
    const int mjx = plan.nearest_index(j, 0);
    const int mjy = plan.nearest_index(j, 1);
    for (int a = 0; a < w; ++a) ix[a] = wrap(mjx - m_sp + a, m_r);
    for (int b = 0; b < w; ++b) iy[b] = wrap(mjy - m_sp + b, m_r);
    Complex acc = 0.0;
    for (int a = 0; a < w; ++a) {
      const Complex* row = grid.data() + static_cast<Eigen::Index>(ix[a]) * m_r;
      Complex rowacc = 0.0;
      for (int b = 0; b < w; ++b) rowacc += row[iy[b]] * wy[b];
      acc += rowacc * wx[a];
    }
    samples[j] = acc;
  }
  return samples;
}

void deconvolve(const NufftParams& params, int dim, ComplexVector& coefficients) {
  const int n = params.n;
  const double tau = params.tau;
  const double root = std::sqrt(M_PI / tau);
  if (dim == 1) {
    if (coefficients.size() != n) throw ConfigError("deconvolve: size mismatch");
    for (int t = 0; t < n; ++t) {
      const double k = t - n / 2;
      coefficients[t] *= root * std::exp(k * k * tau);
    }
  } else {
    if (coefficients.size() != static_cast<Eigen::Index>(n) * n)
      throw ConfigError("deconvolve: size mismatch");
    Eigen::VectorXd axis(n);
    for (int t = 0; t < n; ++t) {
      const double k = t - n / 2;
      axis[t] = root * std::exp(k * k * tau);
    }
    for (int t1 = 0; t1 < n; ++t1)
      for (int t2 = 0; t2 < n; ++t2)
        coefficients[static_cast<Eigen::Index>(t1) * n + t2] *= axis[t1] * axis[t2];
  }
  instrument::diag_scale_count++;
}

namespace {

// Coefficient k = t - n/2 lives in oversampled FFT bin (k mod m_r).
inline int coeff_bin(int t, int n, int m_r) { return (t - n / 2 + m_r) % m_r; }

}  // namespace

ComplexVector nufft_type1(const SpreadingPlan& plan, const ComplexVector& samples) {
  const int n = plan.params.n;
  const int m_r = plan.params.m_r;
  const int dim = plan.points.dim;
  ComplexVector grid = spread(plan, samples);
  if (dim == 1) {
    fft_1d(grid, false);
    ComplexVector coeffs(n);
    const double scale = 1.0 / m_r;
    for (int t = 0; t < n; ++t) coeffs[t] = grid[coeff_bin(t, n, m_r)] * scale;
    deconvolve(plan.params, 1, coeffs);
    return coeffs;
  }
  fft_2d(grid, m_r, false);
  ComplexVector coeffs(static_cast<Eigen::Index>(n) * n);
  const double scale = 1.0 / (static_cast<double>(m_r) * m_r);
  for (int t1 = 0; t1 < n; ++t1) {
    const Eigen::Index src_row = static_cast<Eigen::Index>(coeff_bin(t1, n, m_r)) * m_r;
    for (int t2 = 0; t2 < n; ++t2)
      coeffs[static_cast<Eigen::Index>(t1) * n + t2] = grid[src_row + coeff_bin(t2, n, m_r)] * scale;
  }
  deconvolve(plan.params, 2, coeffs);
  return coeffs;
}

ComplexVector nufft_type2(const SpreadingPlan& plan, const ComplexVector& coefficients) {
  const int n = plan.params.n;
  const int m_r = plan.params.m_r;
  const int dim = plan.points.dim;
  if (dim == 1) {
    if (coefficients.size() != n) throw ConfigError("nufft_type2: coefficient size mismatch");
    ComplexVector work = coefficients;
    deconvolve(plan.params, 1, work);
    ComplexVector grid = ComplexVector::Zero(m_r);
    for (int t = 0; t < n; ++t) grid[coeff_bin(t, n, m_r)] = work[t];
    fft_1d(grid, true);  // scales by 1/m_r
    return interpolate(plan, grid);
  }
  if (coefficients.size() != static_cast<Eigen::Index>(n) * n)
    throw ConfigError("nufft_type2: coefficient size mismatch");
  ComplexVector work = coefficients;
  deconvolve(plan.params, 2, work);
  ComplexVector grid = ComplexVector::Zero(static_cast<Eigen::Index>(m_r) * m_r);
  for (int t1 = 0; t1 < n; ++t1) {
    const Eigen::Index dst_row = static_cast<Eigen::Index>(coeff_bin(t1, n, m_r)) * m_r;
    for (int t2 = 0; t2 < n; ++t2)
      grid[dst_row + coeff_bin(t2, n, m_r)] = work[static_cast<Eigen::Index>(t1) * n + t2];
  }
  fft_2d(grid, m_r, true);  // scales by 1/m_r^2
  return interpolate(plan, grid);
}

ComplexVector direct_ndft(const FrequencyPointSet& points, int n,
                          const ComplexVector& input, NdftDirection direction) {
  const int dim = points.dim;
  const Eigen::Index count = points.count();
  const Eigen::Index modes = dim == 1 ? n : static_cast<Eigen::Index>(n) * n;
  if (count * modes > 100'000'000)
    throw ConfigError("direct_ndft: refusing more than 1e8 terms");

  if (direction == NdftDirection::type2) {
    if (input.size() != modes) throw ConfigError("direct_ndft: coefficient size mismatch");
    ComplexVector out(count);
    for (Eigen::Index j = 0; j < count; ++j) {
      Complex acc = 0.0;
      if (dim == 1) {
        const double x = points.coords(j, 0);
        for (int t = 0; t < n; ++t)
          acc += input[t] * std::polar(1.0, (t - n / 2) * x);
      } else {
        const double x = points.coords(j, 0), y = points.coords(j, 1);
        for (int t1 = 0; t1 < n; ++t1)
          for (int t2 = 0; t2 < n; ++t2)
            acc += input[static_cast<Eigen::Index>(t1) * n + t2] *
                   std::polar(1.0, (t1 - n / 2) * x + (t2 - n / 2) * y);
      }
      out[j] = acc;
    }
    return out;
  }

  if (input.size() != count) throw ConfigError("direct_ndft: sample size mismatch");
  ComplexVector out = ComplexVector::Zero(modes);
  for (Eigen::Index j = 0; j < count; ++j) {
    if (dim == 1) {
      const double x = points.coords(j, 0);
      for (int t = 0; t < n; ++t)
        out[t] += input[j] * std::polar(1.0, -(t - n / 2) * x);
    } else {
      const double x = points.coords(j, 0), y = points.coords(j, 1);
      for (int t1 = 0; t1 < n; ++t1)
        for (int t2 = 0; t2 < n; ++t2)
          out[static_cast<Eigen::Index>(t1) * n + t2] +=
              input[j] * std::polar(1.0, -((t1 - n / 2) * x + (t2 - n / 2) * y));
    }
  }
  return out;
}

}  // namespace tomo
