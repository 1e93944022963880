// SPDX-License-Identifier: Apache-2.0
//
// Statistical estimation of queries over independent simulation runs, with
// Student-t confidence intervals computed after every batch.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "peb/query.hpp"
#include "peb/simulator.hpp"

namespace peb {

/// Value of `q` on a finished trace. ProbReachWithin looks at the states
/// after 0..k steps.
double eval_query(const Semantics& sem, const Trace& trace, const Query& q);

struct EstimateOptions {
  double alpha = 0.05;
  double delta = 0.01;
  std::uint64_t seed = 0;
  std::uint64_t min_runs = 0;  // in addition to the first batch
  std::uint64_t max_runs = 1'000'000;
  std::uint64_t batch = 100;
  unsigned jobs = 1;
  std::uint64_t max_steps = 1'000'000;
  bool keep_samples = false;
};

struct Estimate {
  std::string query;
  QueryKind kind = QueryKind::ExpectedAtEnd;
  double mean = 0;
  double half_width = 0;
  double confidence = 0;
  double variance = 0;  // unbiased sample variance
  std::uint64_t runs = 0;
  std::uint64_t seed = 0;
  std::uint64_t truncated_runs = 0;  // ended by max_steps
  bool converged = false;            // half_width <= delta
  double wall_time = 0;              // seconds; not part of the deterministic output
  std::vector<double> samples;       // per run, when requested
};

/// Validates options, then runs batches until the half-width target or
/// max_runs is reached. Run i uses derive_seed(seed, i); results do not depend
/// on `jobs`.
Estimate estimate(const Semantics& sem, const Query& q, const EstimateOptions& options);

/// Two-sided Student-t half-width at level 1 - alpha.
double t_half_width(double variance, std::uint64_t n, double alpha);

nlohmann::json to_json(const Estimate& e, bool include_wall_time = true);

/// `run,value` rows.
void write_samples_csv(std::ostream& os, const Estimate& e);

/// Gnuplot-friendly `bin_center count` rows.
void write_histogram(std::ostream& os, const Estimate& e, std::size_t bins = 20);

}  // namespace peb
