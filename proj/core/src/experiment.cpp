#include "accvr/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "accvr/errors.hpp"

namespace accvr {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string file_stem(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

double final_subopt(const RunResult& run) {
  if (run.trace.empty()) return kInf;
  const double s = run.trace.back().subopt;
  return std::isfinite(s) ? s : kInf;
}

double resolved_p(const AlgorithmSpec& algo, std::size_t n) {
  return algo.p.value_or(2.0 * static_cast<double>(n));
}

}  // namespace

double default_lambda(Problem problem, std::size_t n) {
  const double dn = static_cast<double>(n);
  return problem == Problem::Ridge ? 1.0 / dn : 1.0 / std::sqrt(dn);
}

SparseDataset load_dataset(const DatasetSource& src) {
  SparseDataset data = src.synthetic ? make_synthetic_with_truth(*src.synthetic).dataset
                                     : load_libsvm(src.path);
  if (src.dim > 0) data = with_dimension(std::move(data), src.dim);
  if (src.rescale) data = rescale_features(std::move(data));
  return data;
}

CompositeObjective make_objective(const ExperimentConfig& cfg,
                                  std::shared_ptr<const SparseDataset> data) {
  const double lambda = cfg.lambda.value_or(default_lambda(cfg.problem, data->n()));
  switch (cfg.problem) {
    case Problem::Ridge:
      return CompositeObjective(std::move(data), Loss::SquaredError,
                                ProxSpec{Regularizer::L2, lambda});
    case Problem::Lasso:
      return CompositeObjective(std::move(data), Loss::SquaredError,
                                ProxSpec{Regularizer::L1, lambda});
    case Problem::LogisticL1: {
      auto binary = std::make_shared<SparseDataset>(*data);
      for (double& y : binary->labels) y = y > 0.0 ? 1.0 : -1.0;
      return CompositeObjective(std::move(binary), Loss::Logistic,
                                ProxSpec{Regularizer::L1, lambda});
    }
  }
  throw ConfigError("unknown problem");
}

double effective_passes(EstimatorKind, std::size_t n, std::size_t, double,
                        std::size_t evals) {
  return static_cast<double>(evals) / static_cast<double>(n);
}

double expected_passes_per_iteration(EstimatorKind kind, std::size_t n,
                                     std::size_t b, double p) {
  const double dn = static_cast<double>(n);
  const double db = static_cast<double>(b);
  switch (kind) {
    case EstimatorKind::Full: return 1.0;
    case EstimatorKind::Saga: return db / dn;
    case EstimatorKind::Sarge: return 2.0 * db / dn;
    case EstimatorKind::Svrg:
    case EstimatorKind::Sarah: return 1.0 / p + (1.0 - 1.0 / p) * 2.0 * db / dn;
  }
  return 0.0;
}

Schedule schedule_for(const AlgorithmSpec& algo, const CompositeObjective& obj) {
  const std::size_t n = obj.n();
  const double mu = obj.mu();
  if (mu > 0.0 && algo.gamma && algo.tau) {
    return constant_schedule(*algo.gamma, *algo.tau, obj.L(), mu);
  }
  Schedule s = preset_schedule(algo.kind, n, algo.b, resolved_p(algo, n), obj.L(), mu);
  if (mu == 0.0 && (algo.step_scale != 1.0 || algo.tau0)) {
    s = scaled_schedule(s, algo.step_scale, algo.tau0.value_or(0.5));
  }
  return s;
}

double nonaccel_gamma(const AlgorithmSpec& algo, const CompositeObjective& obj) {
  return algo.gamma.value_or(1.0 / (3.0 * obj.L()));
}

RunResult run_algorithm(const CompositeObjective& obj, const AlgorithmSpec& algo,
                        double budget_passes, RunOptions opts) {
  const std::size_t n = obj.n();
  const EstimatorOptions est{algo.kind, algo.b, resolved_p(algo, n)};
  if (budget_passes > 0.0) {
    const double evals = std::ceil(budget_passes * static_cast<double>(n));
    opts.max_evals = static_cast<std::size_t>(evals);
    if (opts.T == 0) {
      opts.T = static_cast<std::size_t>(std::ceil(evals / static_cast<double>(algo.b))) + 1;
    }
  }
  const std::vector<double> x0(obj.m(), 0.0);
  if (algo.accelerated) {
    return run_accelerated(obj, est, schedule_for(algo, obj), x0, opts);
  }
  NonAccelOptions nacc;
  nacc.gamma = nonaccel_gamma(algo, obj);
  nacc.epoch_deterministic = algo.epoch_deterministic;
  nacc.epoch_length = algo.epoch_length;
  return run_nonaccelerated(obj, est, nacc, x0, opts);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ContractError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs,
                                         double bucket_width) {
  if (!(bucket_width > 0.0)) throw ContractError("bucket width must be > 0");
  double last = 0.0;
  for (const auto& r : runs) {
    if (!r.trace.empty()) last = std::max(last, r.trace.back().eff_passes);
  }
  std::vector<AggregateRow> out;
  std::vector<std::size_t> cursor(runs.size(), 0);
  const auto buckets = static_cast<std::size_t>(std::ceil(last / bucket_width - 1e-12));
  for (std::size_t j = 0; j <= buckets; ++j) {
    const double edge = static_cast<double>(j) * bucket_width;
    std::vector<double> values;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      const auto& trace = runs[r].trace;
      std::size_t& c = cursor[r];
      while (c + 1 < trace.size() && trace[c + 1].eff_passes <= edge + 1e-12) ++c;
      if (!trace.empty() && trace[c].eff_passes <= edge + 1e-12) {
        values.push_back(trace[c].subopt);
      }
    }
    if (values.empty()) continue;
    AggregateRow row;
    row.eff_passes = edge;
    row.median_subopt = median(values);
    row.q25 = quantile(values, 0.25);
    row.q75 = quantile(values, 0.75);
    row.n_seeds = values.size();
    out.push_back(row);
  }
  return out;
}

void write_trace_csv(std::ostream& out, const std::vector<TraceRow>& rows,
                     bool record_wall_ms) {
  out << kTraceHeader << '\n';
  for (const auto& r : rows) {
    out << r.k << ',' << fmt(r.eff_passes) << ',' << fmt(r.F) << ','
        << fmt(r.subopt) << ',' << fmt(r.dist_sq) << ','
        << fmt(record_wall_ms ? r.wall_ms : 0.0) << ',' << r.seed << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << kAggregateHeader << '\n';
  for (const auto& r : rows) {
    out << fmt(r.eff_passes) << ',' << fmt(r.median_subopt) << ',' << fmt(r.q25)
        << ',' << fmt(r.q75) << ',' << r.n_seeds << '\n';
  }
}

std::size_t max_parallel_runs() {
  if (const char* env = std::getenv("ACCVR_MAX_PARALLEL"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) {
      throw ConfigError("ACCVR_MAX_PARALLEL must be a positive integer, got '" +
                        std::string(env) + "'");
    }
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        if (failed.load()) return;
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

Reference compute_reference(const CompositeObjective& obj, double tol,
                            std::size_t max_iter) {
  const std::vector<double> x0(obj.m(), 0.0);
  ReferenceOptions opts;
  opts.tol = tol;
  opts.max_iter = max_iter;
  const ReferenceResult r = run_reference(obj, x0, opts);
  if (!r.converged) {
    throw ConfigError("reference solver did not converge: residual " + fmt(r.residual) +
                      " after " + std::to_string(r.iterations) +
                      " iterations (tol " + fmt(tol) + ")");
  }
  return Reference{r.x, r.F};
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  auto data = std::make_shared<const SparseDataset>(load_dataset(cfg.dataset));
  const CompositeObjective obj = make_objective(cfg, data);

  ExperimentOutput out;
  out.reference = compute_reference(obj, cfg.reference_tol, cfg.reference_max_iter);

  const std::size_t n_algos = cfg.algorithms.size();
  const std::size_t n_seeds = cfg.seeds.size();
  for (const auto& a : cfg.algorithms) {
    EstimatorOptions{a.kind, a.b, resolved_p(a, obj.n())}.validate(obj.n());
  }
  std::vector<RunResult> results(n_algos * n_seeds);
  parallel_for(results.size(), max_parallel_runs(), [&](std::size_t i) {
    RunOptions opts;
    opts.T = cfg.T.value_or(0);
    opts.seed = cfg.seeds[i % n_seeds];
    opts.trace_every = cfg.trace_every;
    opts.reference = &out.reference;
    results[i] = run_algorithm(obj, cfg.algorithms[i / n_seeds],
                               cfg.T ? 0.0 : cfg.budget_passes, opts);
  });

  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  auto open = [](const fs::path& p) {
    std::ofstream f(p);
    if (!f) throw ConfigError("cannot write '" + p.string() + "'");
    return f;
  };
  for (std::size_t a = 0; a < n_algos; ++a) {
    const std::string stem = file_stem(cfg.algorithms[a].name);
    std::vector<RunResult> runs;
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const auto& r = results[a * n_seeds + s];
      const fs::path p = dir / (stem + "_seed" + std::to_string(cfg.seeds[s]) + ".csv");
      auto f = open(p);
      write_trace_csv(f, r.trace, cfg.record_wall_ms);
      out.run_files.push_back(p.string());
      runs.push_back(r);
    }
    const fs::path p = dir / (stem + "_aggregate.csv");
    auto f = open(p);
    write_aggregate_csv(f, aggregate_runs(runs, cfg.bucket_passes));
    out.aggregate_files.push_back(p.string());
  }
  return out;
}

std::vector<std::size_t> grid_values(TuneGrid grid, std::size_t max) {
  std::vector<std::size_t> out;
  if (grid == TuneGrid::Linear) {
    for (std::size_t t = 1; t <= max; ++t) out.push_back(t);
  } else {
    for (std::size_t t = 1; t <= max; t *= 2) out.push_back(t);
  }
  return out;
}

std::vector<AlgorithmSpec> tuning_candidates(const AlgorithmSpec& algo,
                                             const CompositeObjective& obj,
                                             const TuningSpec& spec) {
  std::vector<AlgorithmSpec> out;
  const auto ts = grid_values(spec.grid, spec.t_max);
  if (!algo.accelerated) {
    for (auto t : ts) {
      AlgorithmSpec a = algo;
      a.gamma = 1.0 / static_cast<double>(t);
      out.push_back(a);
    }
  } else if (obj.mu() > 0.0) {
    for (auto tg : ts) {
      for (auto tt : ts) {
        AlgorithmSpec a = algo;
        a.gamma = 1.0 / static_cast<double>(tg);
        a.tau = 1.0 / static_cast<double>(tt);
        out.push_back(a);
      }
    }
  } else {
    for (auto s : grid_values(spec.grid, spec.s_max)) {
      AlgorithmSpec a = algo;
      a.step_scale = static_cast<double>(s);
      a.tau0 = 0.5;
      out.push_back(a);
    }
  }
  return out;
}

double passes_to_target(const RunResult& run, double target) {
  for (const auto& row : run.trace) {
    if (row.subopt <= target) return row.eff_passes;
  }
  return kInf;
}

TuneResult tune_over(const CompositeObjective& obj, const Reference& ref,
                     const std::vector<AlgorithmSpec>& candidates,
                     const TuningSpec& spec, double budget_passes,
                     std::size_t trace_every) {
  if (candidates.empty()) throw ContractError("no tuning candidates");
  if (!(budget_passes > 0.0)) throw ContractError("tuning budget must be > 0");
  const std::size_t n_seeds = spec.seeds.size();
  if (n_seeds == 0) throw ContractError("no tuning seeds");
  const bool to_target = spec.criterion == TuneCriterion::PassesToTarget;

  std::vector<double> finals(candidates.size() * n_seeds);
  std::vector<double> hits(finals.size());
  parallel_for(finals.size(), max_parallel_runs(), [&](std::size_t i) {
    RunOptions opts;
    opts.seed = spec.seeds[i % n_seeds];
    opts.trace_every = trace_every;
    opts.reference = &ref;
    if (to_target) opts.stop_below = spec.target;
    const RunResult r = run_algorithm(obj, candidates[i / n_seeds], budget_passes, opts);
    finals[i] = final_subopt(r);
    hits[i] = passes_to_target(r, spec.target);
  });

  TuneResult out;
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto first = finals.begin() + static_cast<std::ptrdiff_t>(c * n_seeds);
    const auto hfirst = hits.begin() + static_cast<std::ptrdiff_t>(c * n_seeds);
    TuneCandidate tc;
    tc.algo = candidates[c];
    tc.median_final = median({first, first + static_cast<std::ptrdiff_t>(n_seeds)});
    const std::vector<double> h(hfirst, hfirst + static_cast<std::ptrdiff_t>(n_seeds));
    // a setting that misses the target on any tuning seed is not eligible
    const bool all_hit = std::all_of(h.begin(), h.end(), [](double v) { return v < kInf; });
    tc.score = to_target ? (all_hit ? median(h) : kInf) : tc.median_final;
    if (std::isnan(tc.score)) tc.score = kInf;
    out.evaluated.push_back(tc);
    const auto& b = out.evaluated[best];
    if (tc.score < b.score ||
        (to_target && tc.score == b.score && tc.median_final < b.median_final)) {
      best = c;
    }
  }
  out.best = out.evaluated[best].algo;
  return out;
}

TuneResult tune(const ExperimentConfig& cfg, const AlgorithmSpec& algo,
                double budget_passes) {
  auto data = std::make_shared<const SparseDataset>(load_dataset(cfg.dataset));
  const CompositeObjective obj = make_objective(cfg, data);
  const Reference ref = compute_reference(obj, cfg.reference_tol, cfg.reference_max_iter);
  return tune_over(obj, ref, tuning_candidates(algo, obj, cfg.tuning), cfg.tuning,
                   budget_passes, cfg.trace_every);
}

}  // namespace accvr
