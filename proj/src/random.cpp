// SPDX-License-Identifier: Apache-2.0

#include "peb/random.hpp"

#include <stdexcept>

namespace peb {

std::uint64_t RandomSource::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index over an empty range");
  // Largest multiple of n representable in 64 bits, computed without overflow.
  const std::uint64_t rem = (UINT64_MAX % n + 1) % n;
  const std::uint64_t limit = UINT64_MAX - rem;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (rem != 0 && x > limit);
  return x % n;
}

double RandomSource::uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t ScriptedSource::next_u64() {
  if (indices_.empty()) throw std::out_of_range("scripted source exhausted");
  auto v = indices_.front();
  indices_.pop_front();
  return v;
}

std::uint64_t ScriptedSource::uniform_index(std::uint64_t n) {
  auto v = next_u64();
  if (v >= n) throw std::out_of_range("scripted index out of range");
  return v;
}

double ScriptedSource::uniform_real() {
  if (reals_.empty()) throw std::out_of_range("scripted source exhausted");
  auto v = reals_.front();
  reals_.pop_front();
  return v;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

}  // namespace peb
