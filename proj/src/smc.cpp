// SPDX-License-Identifier: Apache-2.0

#include "peb/smc.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace peb {

namespace {

/// Evaluates a ProbReachWithin predicate while the run progresses and ends
/// the run as soon as the outcome is known.
class ReachMonitor final : public RunObserver {
 public:
  ReachMonitor(const Semantics& sem, const Query& q) : sem_(sem), q_(q) {}

  bool observe(std::uint64_t step, std::size_t, const MachineState& state) override {
    if (state_holds(sem_, q_, state)) {
      reached = true;
      return true;
    }
    return step >= q_.within;
  }

  bool reached = false;

 private:
  const Semantics& sem_;
  const Query& q_;
};

struct RunOutcome {
  double value = 0;
  bool truncated = false;
};

RunOutcome one_run(const Simulator& sim, const Query& q, std::uint64_t seed, std::uint64_t max_steps,
                   StepCache& cache) {
  RunConfig config;
  config.seed = seed;
  config.max_steps = max_steps;
  Rng rng(seed);
  if (q.kind == QueryKind::ProbReachWithin) {
    ReachMonitor monitor(sim.semantics(), q);
    auto summary = sim.run(config, rng, &monitor, &cache);
    return {monitor.reached ? 1.0 : 0.0, summary.reason == Termination::StepBound};
  }
  auto summary = sim.run(config, rng, nullptr, &cache);
  return {state_value(sim.semantics(), q, summary.final_state), summary.reason == Termination::StepBound};
}

void validate(const EstimateOptions& o) {
  if (!(o.alpha > 0 && o.alpha < 1)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (!(o.delta > 0)) throw std::invalid_argument("delta must be positive");
  if (o.batch < 2) throw std::invalid_argument("batch must be at least 2");
  if (o.max_runs < 2) throw std::invalid_argument("max_runs must be at least 2");
  if (o.jobs == 0) throw std::invalid_argument("jobs must be at least 1");
  if (o.max_steps == 0) throw std::invalid_argument("max_steps must be at least 1");
}

}  // namespace

double eval_query(const Semantics& sem, const Trace& trace, const Query& q) {
  if (q.kind != QueryKind::ProbReachWithin) return state_value(sem, q, trace.final_state());
  std::uint64_t last = std::min<std::uint64_t>(q.within, trace.steps.size());
  for (std::uint64_t k = 0; k <= last; ++k) {
    if (state_holds(sem, q, trace.state_at(k))) return 1.0;
  }
  return 0.0;
}

double t_half_width(double variance, std::uint64_t n, double alpha) {
  if (n < 2) return std::numeric_limits<double>::infinity();
  if (variance <= 0) return 0.0;
  boost::math::students_t dist(static_cast<double>(n - 1));
  double t = boost::math::quantile(dist, 1.0 - alpha / 2.0);
  return t * std::sqrt(variance / static_cast<double>(n));
}

Estimate estimate(const Semantics& sem, const Query& q, const EstimateOptions& options) {
  validate(options);
  auto started = std::chrono::steady_clock::now();
  Simulator sim(sem);

  Estimate est;
  est.query = q.text;
  est.kind = q.kind;
  est.seed = options.seed;
  est.confidence = 1.0 - options.alpha;

  // Welford accumulation in run-index order.
  double mean = 0;
  double m2 = 0;
  std::uint64_t n = 0;
  std::vector<RunOutcome> batch;
  std::vector<std::exception_ptr> errors;
  std::vector<StepCache> caches(options.jobs);

  while (true) {
    std::uint64_t size = std::min(options.batch, options.max_runs - n);
    batch.assign(size, {});
    errors.assign(size, nullptr);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&](unsigned j) {
      for (std::uint64_t i; (i = next.fetch_add(1)) < size;) {
        try {
          batch[i] = one_run(sim, q, derive_seed(options.seed, n + i), options.max_steps, caches[j]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    unsigned jobs = static_cast<unsigned>(std::min<std::uint64_t>(options.jobs, size));
    if (jobs <= 1) {
      worker(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker, j);
      for (auto& t : pool) t.join();
    }
    for (std::uint64_t i = 0; i < size; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      const RunOutcome& r = batch[i];
      ++n;
      double d = r.value - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (r.value - mean);
      if (r.truncated) ++est.truncated_runs;
      if (options.keep_samples) est.samples.push_back(r.value);
    }
    est.runs = n;
    est.mean = mean;
    est.variance = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    est.half_width = t_half_width(est.variance, n, options.alpha);
    est.converged = est.half_width <= options.delta;
    if ((est.converged && n >= options.min_runs) || n >= options.max_runs) break;
  }
  est.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return est;
}

nlohmann::json to_json(const Estimate& e, bool include_wall_time) {
  nlohmann::json j = {{"query", e.query},
                      {"kind", to_string(e.kind)},
                      {"mean", e.mean},
                      {"half_width", e.half_width},
                      {"confidence", e.confidence},
                      {"runs", e.runs},
                      {"seed", e.seed},
                      {"variance", e.variance},
                      {"converged", e.converged},
                      {"truncated_runs", e.truncated_runs},
                      {"rng", kRngAlgorithm}};
  if (include_wall_time) j["wall_time"] = e.wall_time;
  return j;
}

void write_samples_csv(std::ostream& os, const Estimate& e) {
  os << "run,value\n";
  for (std::size_t i = 0; i < e.samples.size(); ++i) os << i << ',' << e.samples[i] << '\n';
}

void write_histogram(std::ostream& os, const Estimate& e, std::size_t bins) {
  if (e.samples.empty() || bins == 0) return;
  auto [lo_it, hi_it] = std::minmax_element(e.samples.begin(), e.samples.end());
  double lo = *lo_it;
  double hi = *hi_it;
  double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  std::size_t used = hi > lo ? bins : 1;
  std::vector<std::uint64_t> counts(used, 0);
  for (double v : e.samples) {
    auto b = static_cast<std::size_t>((v - lo) / width);
    counts[std::min(b, used - 1)]++;
  }
  os << "# bin_center count\n";
  for (std::size_t b = 0; b < used; ++b) {
    os << lo + (static_cast<double>(b) + 0.5) * width << ' ' << counts[b] << '\n';
  }
}

}  // namespace peb
