// bench: run, tune and data-generation front end for the accvr library.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "accvr/config.hpp"
#include "accvr/data.hpp"
#include "accvr/experiment.hpp"

namespace {

void print_warnings(const accvr::ExperimentConfig& cfg) {
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
}

void print_algo(const accvr::AlgorithmSpec& a) {
  const std::string k = "algo." + a.name + ".";
  std::printf("%skind = %s\n", k.c_str(), std::string(accvr::to_string(a.kind)).c_str());
  std::printf("%saccelerated = %s\n", k.c_str(), a.accelerated ? "true" : "false");
  std::printf("%sb = %zu\n", k.c_str(), a.b);
  if (a.p) std::printf("%sp = %.17g\n", k.c_str(), *a.p);
  if (a.accelerated && a.step_scale != 1.0) {
    std::printf("%sstep_scale = %.17g\n", k.c_str(), a.step_scale);
  }
  if (a.tau0) std::printf("%stau0 = %.17g\n", k.c_str(), *a.tau0);
  if (a.gamma) std::printf("%sgamma = %.17g\n", k.c_str(), *a.gamma);
  if (a.tau) std::printf("%stau = %.17g\n", k.c_str(), *a.tau);
}

int cmd_run(const std::string& path) {
  const auto cfg = accvr::load_config(path);
  print_warnings(cfg);
  const auto out = accvr::run_experiment(cfg);
  std::printf("F* = %.17g\n", out.reference.F_star);
  for (const auto& f : out.run_files) std::printf("wrote %s\n", f.c_str());
  for (const auto& f : out.aggregate_files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

int cmd_tune(const std::string& path, const std::string& algo, double budget) {
  const auto cfg = accvr::load_config(path);
  print_warnings(cfg);
  const auto result = accvr::tune(cfg, cfg.algorithm(algo), budget);
  std::fprintf(stderr, "%-12s %-12s %-12s %-24s %s\n", "gamma", "tau", "step_scale",
               "score", "median_final");
  const auto cell = [](const std::optional<double>& v) {
    char buf[32];
    if (v) std::snprintf(buf, sizeof buf, "%.6g", *v);
    else std::snprintf(buf, sizeof buf, "-");
    return std::string(buf);
  };
  for (const auto& c : result.evaluated) {
    std::fprintf(stderr, "%-12s %-12s %-12.6g %-24.17g %.17g\n", cell(c.algo.gamma).c_str(),
                 cell(c.algo.tau).c_str(), c.algo.step_scale, c.score, c.median_final);
  }
  print_algo(result.best);
  return 0;
}

int cmd_gen(const accvr::SyntheticSpec& spec, const std::string& out) {
  const auto parent = std::filesystem::path(out).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  accvr::save_libsvm(out, accvr::make_synthetic_with_truth(spec).dataset);
  std::printf("wrote %s (%zu samples, %zu features)\n", out.c_str(), spec.n, spec.m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Accelerated variance-reduced solvers: experiments and tuning"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run every (algorithm, seed) pair of a config");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

  std::string algo;
  double budget = 0.0;
  auto* tune = app.add_subcommand("tune", "Grid-search one algorithm's parameters");
  tune->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  tune->add_option("--algo", algo, "Algorithm name from the config")->required();
  tune->add_option("--budget", budget, "Effective-pass budget per run")
      ->required()
      ->check(CLI::PositiveNumber);

  accvr::SyntheticSpec spec;
  std::string out;
  auto* gen = app.add_subcommand("gen-synthetic", "Write a synthetic LIBSVM dataset");
  gen->add_option("--n", spec.n, "Samples")->required()->check(CLI::PositiveNumber);
  gen->add_option("--m", spec.m, "Features")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", spec.seed, "RNG seed")->required();
  gen->add_option("--noise", spec.noise, "Label noise standard deviation")
      ->required()
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--out", out, "Output path")->required();
  gen->add_option("--density", spec.density, "Fraction of stored entries")
      ->check(CLI::Range(0.0, 1.0));
  gen->add_option("--latent-rank", spec.latent_rank,
                  "Rank of the correlated feature model (0: independent)");
  gen->add_option("--latent-noise", spec.latent_noise,
                  "Noise added to the latent features");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path);
    if (*tune) return cmd_tune(config_path, algo, budget);
    if (*gen) return cmd_gen(spec, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
