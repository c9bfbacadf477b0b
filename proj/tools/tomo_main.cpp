#include <CLI11.hpp>
#include <iostream>

#include "tomo/bench.hpp"

namespace {

void add_run_options(CLI::App* cmd, tomo::RunConfig& config, std::string& preset,
                     std::string& backend) {
  cmd->add_option("--n", config.n, "image side length");
  cmd->add_option("--d", config.d, "angle subsampling factor");
  cmd->add_option("--preset", preset, "NUFFT accuracy preset (digits2|digits6|digits12)");
  cmd->add_option("--backend", backend, "normal operator backend (direct|fused|surrogate)");
  cmd->add_option("--r", config.r, "surrogate truncation radius");
  cmd->add_option("--alpha", config.alpha, "data fidelity weight");
  cmd->add_option("--lambda", config.lambda, "TV splitting weight");
  cmd->add_option("--iters", config.iters, "maximum Bregman iterations");
  cmd->add_option("--cg-steps", config.cg_steps, "CG steps per Bregman update");
  cmd->add_option("--tol", config.tol, "relative L1 update stopping threshold");
  cmd->add_flag("--feedback", config.feedback, "outer Bregman data feedback");
  cmd->add_option("--noise", config.noise, "complex noise sigma added to the data");
  cmd->add_option("--seed", config.seed, "seed for all stochastic elements");
  cmd->add_option("--cache-dir", config.cache_dir, "precomputed operator cache directory");
  cmd->add_option("--out", config.output_dir, "output directory");
}

void finalize(tomo::RunConfig& config, const std::string& preset, const std::string& backend) {
  config.preset = tomo::preset_from_name(preset);
  config.backend = tomo::backend_from_name(backend);
  config.validate();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parallel-beam CT reconstruction via split Bregman with NUFFT, "
               "fused-convolution and sparse-surrogate normal operators"};
  app.set_config("--config", "", "flat key=value config file");
  app.require_subcommand(1);

  tomo::RunConfig config;
  std::string preset = "digits6";
  std::string backend = "fused";

  auto* phantom_cmd = app.add_subcommand("phantom", "write a Shepp-Logan phantom image");
  int phantom_n = 128;
  std::string phantom_out = "phantom.pgm";
  phantom_cmd->add_option("--n", phantom_n, "image side length");
  phantom_cmd->add_option("--out", phantom_out, "output image path (.pgm + .f64 sidecar)");

  auto* pre_cmd = app.add_subcommand("precompute", "build and cache sparse operators");
  add_run_options(pre_cmd, config, preset, backend);

  auto* rec_cmd = app.add_subcommand("reconstruct", "run a TV reconstruction");
  add_run_options(rec_cmd, config, preset, backend);

  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark suite");
  std::string suite = "table2";
  std::string scale = "desk";
  bench_cmd->add_option("--suite", suite, "table1|table2|tables345|all");
  bench_cmd->add_option("--scale", scale, "desk|paper");
  add_run_options(bench_cmd, config, preset, backend);

  CLI11_PARSE(app, argc, argv);

  try {
    if (phantom_cmd->parsed()) {
      if (phantom_n < 4) throw tomo::ConfigError("phantom: n must be >= 4");
      tomo::write_image(tomo::generate_shepp_logan(phantom_n), phantom_out);
      std::cout << "wrote " << phantom_out << " and sidecar\n";
    } else if (pre_cmd->parsed()) {
      finalize(config, preset, backend);
      for (const auto& p : tomo::precompute(config, &std::cout))
        std::cout << "cache file: " << p << "\n";
    } else if (rec_cmd->parsed()) {
      finalize(config, preset, backend);
      tomo::RunSummary s = tomo::run_reconstruct(config, &std::cout);
      std::cout << "iterations=" << s.iterations << " total_s=" << s.total_s
                << " cg_s=" << s.cg_s << " final_rel_l1=" << s.final_rel_l1
                << " stopping_reason=" << s.stopping_reason << "\n";
    } else if (bench_cmd->parsed()) {
      finalize(config, preset, backend);
      if (!tomo::run_bench_suite(suite, scale, config, std::cout)) {
        std::cerr << "bench: one or more rows failed\n";
        return 3;
      }
    }
  } catch (const tomo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const tomo::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const tomo::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
