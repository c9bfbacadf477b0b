#include "tomo/bench.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace tomo {

void RunConfig::validate() const {
  if (n < 4 || n % 2 != 0) throw ConfigError("config: n must be even and >= 4");
  if (d < 1) throw ConfigError("config: d must be >= 1");
  if (backend == BackendKind::surrogate && (r < 1 || r >= n / 2))
    throw ConfigError("config: surrogate radius out of range");
  if (noise < 0.0) throw ConfigError("config: negative noise");
  SolverConfig sc = solver_config();
  sc.validate();
}

SolverConfig RunConfig::solver_config() const {
  SolverConfig sc;
  sc.alpha = alpha;
  sc.lambda = lambda;
  sc.max_bregman_iters = iters;
  sc.cg_steps_per_update = cg_steps;
  sc.update_tol_rel = tol;
  sc.data_feedback = feedback;
  return sc;
}

std::string RunConfig::describe() const {
  std::ostringstream os;
  os << "n=" << n << " d=" << d << " preset=" << preset_name(preset)
     << " backend=" << backend_name(backend) << " r=" << r << " alpha=" << alpha
     << " lambda=" << lambda << " iters=" << iters << " cg_steps=" << cg_steps
     << " tol=" << tol << " feedback=" << (feedback ? 1 : 0) << " noise=" << noise
     << " seed=" << seed;
  return os.str();
}

std::string RunConfig::config_hash() const {
  const std::string s = describe();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

std::string btb_cache_path(const RunConfig& c) {
  std::ostringstream os;
  os << c.cache_dir << "/btb_n" << c.n << "_" << preset_name(c.preset) << "_d" << c.d
     << ".tspm";
  return os.str();
}

std::string surrogate_cache_path(const RunConfig& c) {
  std::ostringstream os;
  os << c.cache_dir << "/surrogate_n" << c.n << "_" << preset_name(c.preset) << "_d" << c.d
     << "_r" << c.r << ".tspm";
  return os.str();
}

bool meta_matches(const SparseOperator::Meta& m, const RunConfig& c, int want_r,
                  const SliceGrid& grid) {
  return m.n == c.n && m.m_sp == make_params(c.preset, c.n).m_sp &&
         m.tau == make_params(c.preset, c.n).tau && m.angle_count == grid.angle_set.count() &&
         m.d == c.d && m.r == want_r;
}

std::shared_ptr<const SparseOperator> load_or_build_sparse(
    const RunConfig& c, const SliceTransform& transform, int want_r,
    const NormalBackend* fused_parent, std::ostream* log) {
  const std::string path = want_r == 0 ? btb_cache_path(c) : surrogate_cache_path(c);
  if (fs::exists(path)) {
    try {
      SparseOperator op = load_sparse(path);
      if (meta_matches(op.meta, c, want_r, transform.grid())) {
        if (log) *log << "cached: " << path << "\n";
        return std::make_shared<SparseOperator>(std::move(op));
      }
      if (log) *log << "cache metadata mismatch, rebuilding: " << path << "\n";
    } catch (const IoError& e) {
      if (log) *log << "cache unreadable (" << e.what() << "), rebuilding: " << path << "\n";
    }
  }
  std::shared_ptr<const SparseOperator> op;
  if (want_r == 0) {
    auto built = std::make_shared<SparseOperator>(build_btb(transform.plan()));
    built->meta = {c.n, transform.params().m_sp, transform.params().tau,
                   transform.grid().angle_set.count(), c.d, 0};
    op = std::move(built);
  } else {
    SurrogateConfig sc;
    sc.radius_r = c.r;
    op = std::make_shared<SparseOperator>(build_surrogate(*fused_parent, sc));
  }
  fs::create_directories(c.cache_dir);
  save_sparse(*op, path);
  if (log) *log << "built and cached: " << path << "\n";
  return op;
}

}  // namespace

RunSetup prepare_run(const RunConfig& config, std::ostream* log) {
  config.validate();
  RunSetup setup;
  const NufftParams params = make_params(config.preset, config.n);
  SliceGrid grid = slice_points(make_angle_set(config.n, config.d), config.n);
  setup.transform = std::make_shared<SliceTransform>(std::move(grid), params);
  setup.phantom = generate_shepp_logan(config.n);
  setup.data = synthesize_data(setup.phantom, setup.transform->grid(), params, config.noise,
                               config.seed);

  switch (config.backend) {
    case BackendKind::direct:
      setup.backend = make_direct_backend(setup.transform);
      break;
    case BackendKind::fused: {
      setup.backend = make_direct_backend(setup.transform);
      setup.backend.kind = BackendKind::fused;
      setup.backend.btb = load_or_build_sparse(config, *setup.transform, 0, nullptr, log);
      break;
    }
    case BackendKind::surrogate: {
      NormalBackend fused = make_direct_backend(setup.transform);
      fused.kind = BackendKind::fused;
      setup.backend.kind = BackendKind::surrogate;
      setup.backend.params = params;
      setup.backend.transform = setup.transform;
      setup.backend.t = load_or_build_sparse(config, *setup.transform, config.r, &fused, log);
      setup.backend.sample_weights = radial_density_weights(setup.transform->grid());
      setup.backend.surrogate_r = config.r;
      break;
    }
  }
  return setup;
}

std::vector<std::string> precompute(const RunConfig& config, std::ostream* log) {
  config.validate();
  const NufftParams params = make_params(config.preset, config.n);
  SliceGrid grid = slice_points(make_angle_set(config.n, config.d), config.n);
  auto transform = std::make_shared<SliceTransform>(std::move(grid), params);
  std::vector<std::string> paths;
  RunConfig c = config;
  c.backend = BackendKind::fused;
  load_or_build_sparse(c, *transform, 0, nullptr, log);
  paths.push_back(btb_cache_path(c));
  if (config.backend == BackendKind::surrogate || config.r >= 1) {
    NormalBackend fused = make_direct_backend(transform);
    fused.kind = BackendKind::fused;
    c.backend = BackendKind::surrogate;
    load_or_build_sparse(c, *transform, c.r, &fused, log);
    paths.push_back(surrogate_cache_path(c));
  }
  return paths;
}

RunSummary summarize(const RunConfig& config, const SolveTrace& trace) {
  RunSummary s;
  s.config = config;
  s.iterations = trace.iterations;
  s.total_s = trace.t_total_s.empty() ? 0.0 : trace.t_total_s.back();
  s.cg_s = trace.t_cg_s.empty() ? 0.0 : trace.t_cg_s.back();
  s.final_rel_l1 = trace.rel_l1_err.empty() ? 0.0 : trace.rel_l1_err.back();
  s.stopping_reason = trace.stopping_reason;
  for (double thr : {1e-2, 1e-4, 1e-6, 1e-8}) {
    int it = -1;
    double t = -1.0;
    for (size_t i = 0; i < trace.update_l1.size(); ++i) {
      if (trace.update_l1[i] < thr * trace.first_update_l1) {
        it = static_cast<int>(i + 1);
        t = trace.t_total_s[i];
        break;
      }
    }
    s.threshold_crossings.emplace_back(it, t);
  }
  return s;
}

RunSummary run_reconstruct(const RunConfig& config, std::ostream* log) {
  RunSetup setup = prepare_run(config, log);
  SolverConfig sc = config.solver_config();
  sc.record_reference = &setup.phantom;
  auto [mu, trace] = split_bregman_tv(setup.backend, setup.data, sc);

  fs::create_directories(config.output_dir);
  const std::string stem = config.output_dir + "/recon_" + config.config_hash();
  write_image(mu, stem + ".pgm");
  trace.write_csv(stem + "_trace.csv");
  RunSummary summary = summarize(config, trace);
  append_summary_jsonl(summary, config.output_dir + "/runs.jsonl");
  if (log)
    *log << "run " << config.config_hash() << ": iters=" << summary.iterations
         << " rel_l1=" << summary.final_rel_l1 << " reason=" << summary.stopping_reason
         << " sigma=" << trace.stabilization_shift << " min_ritz=" << trace.min_ritz << "\n";
  return summary;
}

void append_summary_jsonl(const RunSummary& summary, const std::string& path) {
  nlohmann::json j;
  j["config"] = summary.config.describe();
  j["config_hash"] = summary.config.config_hash();
  j["iterations"] = summary.iterations;
  j["total_s"] = summary.total_s;
  j["cg_s"] = summary.cg_s;
  j["final_rel_l1"] = summary.final_rel_l1;
  j["stopping_reason"] = summary.stopping_reason;
  nlohmann::json thr = nlohmann::json::array();
  const char* names[] = {"1e-2", "1e-4", "1e-6", "1e-8"};
  for (size_t i = 0; i < summary.threshold_crossings.size(); ++i) {
    thr.push_back({{"threshold", names[i]},
                   {"iteration", summary.threshold_crossings[i].first},
                   {"seconds", summary.threshold_crossings[i].second}});
  }
  j["thresholds"] = thr;
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("append_summary_jsonl: cannot open " + path);
  os << j.dump() << "\n";
}

namespace {

std::vector<int> scale_sizes(const std::string& scale) {
  if (scale == "desk") return {64, 128};
  if (scale == "paper") return {128, 256, 512};
  throw ConfigError("unknown scale: " + scale);
}

double time_apply(const NormalBackend& backend, const ComplexImage& probe, int min_reps) {
  using clock = std::chrono::steady_clock;
  // Warm-up application is not timed.
  ComplexImage sink = apply_normal(backend, probe);
  std::vector<double> times;
  for (int rep = 0; rep < min_reps; ++rep) {
    const auto t0 = clock::now();
    sink = apply_normal(backend, probe);
    times.push_back(std::chrono::duration<double>(clock::now() - t0).count());
  }
  std::sort(times.begin(), times.end());
  return times[times.size() / 2];
}

bool bench_table1(const std::string& scale, const RunConfig& base, std::ostream& log) {
  std::ofstream csv(base.output_dir + "/table1_" + scale + ".csv");
  csv << "config_hash,n,preset,backend,r,apply_ms\n";
  bool ok = true;
  for (int n : scale_sizes(scale)) {
    for (Preset p : {Preset::digits2, Preset::digits6, Preset::digits12}) {
      RunConfig c = base;
      c.n = n;
      c.preset = p;
      std::mt19937_64 rng(c.seed);
      std::normal_distribution<double> gauss;
      ComplexVector probe_data(static_cast<Eigen::Index>(n) * n);
      for (Eigen::Index i = 0; i < probe_data.size(); ++i)
        probe_data[i] = Complex(gauss(rng), gauss(rng));
      const ComplexImage probe(n, probe_data);
      for (BackendKind k : {BackendKind::direct, BackendKind::fused, BackendKind::surrogate}) {
        c.backend = k;
        try {
          RunSetup setup = prepare_run(c, &log);
          const double ms = 1e3 * time_apply(setup.backend, probe, 5);
          csv << c.config_hash() << ',' << n << ',' << preset_name(p) << ','
              << backend_name(k) << ',' << (k == BackendKind::surrogate ? c.r : 0) << ','
              << ms << "\n";
          log << "table1 " << n << " " << preset_name(p) << " " << backend_name(k) << ": "
              << ms << " ms/apply\n";
        } catch (const Error& e) {
          csv << c.config_hash() << ',' << n << ',' << preset_name(p) << ','
              << backend_name(k) << ",," << "\n";
          log << "table1 row failed: " << e.what() << "\n";
          ok = false;
        }
      }
    }
  }
  return ok;
}

bool bench_table2(const std::string& scale, const RunConfig& base, std::ostream& log) {
  std::ofstream csv(base.output_dir + "/table2_" + scale + ".csv");
  csv << "config_hash,n,preset,backend,r,iterations,total_s,cg_s,final_rel_l1\n";
  bool ok = true;
  for (int n : scale_sizes(scale)) {
    for (Preset p : {Preset::digits2, Preset::digits6, Preset::digits12}) {
      for (BackendKind k : {BackendKind::direct, BackendKind::fused, BackendKind::surrogate}) {
        RunConfig c = base;
        c.n = n;
        c.preset = p;
        c.backend = k;
        c.tol = 0.0;  // fixed iteration count
        try {
          RunSummary s = run_reconstruct(c, &log);
          csv << c.config_hash() << ',' << n << ',' << preset_name(p) << ','
              << backend_name(k) << ',' << (k == BackendKind::surrogate ? c.r : 0) << ','
              << s.iterations << ',' << s.total_s << ',' << s.cg_s << ',' << s.final_rel_l1
              << "\n";
        } catch (const Error& e) {
          log << "table2 row failed: " << e.what() << "\n";
          ok = false;
        }
      }
    }
  }
  return ok;
}

bool bench_tables345(const std::string& scale, const RunConfig& base, std::ostream& log) {
  std::ofstream csv(base.output_dir + "/tables345_" + scale + ".csv");
  csv << "config_hash,n,d,backend,r,threshold,iterations,seconds,rel_l1_at_threshold\n";
  bool ok = true;
  const int n = scale_sizes(scale).back();
  for (int d : {1, 2, 4}) {
    for (BackendKind k : {BackendKind::fused, BackendKind::surrogate}) {
      RunConfig c = base;
      c.n = n;
      c.d = d;
      c.backend = k;
      c.r = 3;
      c.tol = 1e-8;
      c.iters = base.iters;
      try {
        RunSetup setup = prepare_run(c, &log);
        SolverConfig sc = c.solver_config();
        sc.record_reference = &setup.phantom;
        auto [mu, trace] = split_bregman_tv(setup.backend, setup.data, sc);
        RunSummary s = summarize(c, trace);
        const char* names[] = {"1e-2", "1e-4", "1e-6", "1e-8"};
        for (size_t i = 0; i < s.threshold_crossings.size(); ++i) {
          const auto [it, secs] = s.threshold_crossings[i];
          csv << c.config_hash() << ',' << n << ',' << d << ',' << backend_name(k) << ','
              << c.r << ',' << names[i] << ',' << it << ',' << secs << ','
              << (it > 0 ? trace.rel_l1_err[it - 1] : -1.0) << "\n";
        }
        const std::string stem =
            base.output_dir + "/tables345_trace_" + c.config_hash() + ".csv";
        trace.write_csv(stem);
      } catch (const Error& e) {
        log << "tables345 row failed: " << e.what() << "\n";
        ok = false;
      }
    }
  }
  return ok;
}

}  // namespace

bool run_bench_suite(const std::string& suite, const std::string& scale,
                     const RunConfig& base, std::ostream& log) {
  fs::create_directories(base.output_dir);
  if (suite == "table1") return bench_table1(scale, base, log);
  if (suite == "table2") return bench_table2(scale, base, log);
  if (suite == "tables345") return bench_tables345(scale, base, log);
  if (suite == "all") {
    const bool a = bench_table1(scale, base, log);
    const bool b = bench_table2(scale, base, log);
    const bool c = bench_tables345(scale, base, log);
    return a && b && c;
  }
  throw ConfigError("unknown suite: " + suite);
}

}  // namespace tomo
