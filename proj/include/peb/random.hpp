// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <deque>
#include <random>

namespace peb {

/// Name recorded in trace and estimate metadata.
inline constexpr const char* kRngAlgorithm = "mt19937_64";

/// Source of the random draws consumed by the simulator. The two sampling
/// primitives are virtual so tests can script exact outcomes.
class RandomSource {
 public:
  virtual ~RandomSource() = default;

  virtual std::uint64_t next_u64() = 0;

  /// Uniform integer in [0, n) by rejection sampling; n > 0.
  virtual std::uint64_t uniform_index(std::uint64_t n);

  /// Uniform real in [0, 1) with 53 random bits.
  virtual double uniform_real();
};

class Rng final : public RandomSource {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  std::uint64_t next_u64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Replays queued results; throws std::out_of_range when exhausted.
class ScriptedSource final : public RandomSource {
 public:
  void push_index(std::uint64_t v) { indices_.push_back(v); }
  void push_real(double v) { reals_.push_back(v); }

  std::uint64_t next_u64() override;
  std::uint64_t uniform_index(std::uint64_t n) override;
  double uniform_real() override;

 private:
  std::deque<std::uint64_t> indices_;
  std::deque<double> reals_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of run `index` in a batch started from `master`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

}  // namespace peb
