#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace cogload::rng {

/// All randomness in the toolkit funnels through this engine so that every
/// report can be replayed from a single recorded seed. Distribution sampling
/// is hand-rolled below because the draw sequences of std::normal_distribution
/// and std::shuffle are implementation-defined.
using Engine = std::mt19937_64;

/// Uniform in [0,1) with 53 random bits.
inline double uniform01(Engine& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (cosine branch only, no cached spare).
inline double gaussian(Engine& g) {
  double u1;
  do {
    u1 = uniform01(g);
  } while (u1 <= 0.0);
  const double u2 = uniform01(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

/// Exponential inter-arrival time for a Poisson process of the given rate.
inline double exponential(Engine& g, double rate) {
  double u;
  do {
    u = uniform01(g);
  } while (u <= 0.0);
  return -std::log(u) / rate;
}

/// splitmix64 scrambler. Raw nearby seeds (seed, seed^1, seed^2, ...) leave
/// mt19937_64 streams visibly correlated over their first draws; derived
/// seeds must pass through this first.
inline std::uint64_t scramble(std::uint64_t seed) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Unbiased integer in [0, n), n >= 1, by rejection.
inline std::uint64_t bounded(Engine& g, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle with a fixed draw order.
template <typename T>
void shuffle(std::vector<T>& v, Engine& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[static_cast<std::size_t>(bounded(g, i))]);
  }
}

}  // namespace cogload::rng
