#pragma once

// Uniform candidate sketches: random index subsets drawn without
// replacement, optionally combined with a fixed elite set.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "groupsel/objective.hpp"
#include "groupsel/random.hpp"

namespace groupsel {

struct SketchConfig {
  std::size_t sketchSize = 0;  // n_s
  std::size_t eliteCount = 0;  // n_e

  std::size_t randomCount() const { return sketchSize - eliteCount; }  // n_r

  void validate(std::size_t n) const {
    if (eliteCount > sketchSize) {
      throw std::domain_error("elite count n_e = " + std::to_string(eliteCount) +
                              " exceeds sketch size n_s = " +
                              std::to_string(sketchSize));
    }
    if (sketchSize > n) {
      throw std::domain_error("sketch size n_s = " + std::to_string(sketchSize) +
                              " exceeds candidate count n = " +
                              std::to_string(n));
    }
  }
};

// Partial Fisher-Yates over a copy of the population. Returned sorted.
inline std::vector<Index> sampleWithoutReplacement(
    std::span<const Index> population, std::size_t count, StreamKey key) {
  if (count > population.size()) {
    throw std::domain_error("cannot draw " + std::to_string(count) +
                            " items from a population of " +
                            std::to_string(population.size()));
  }
  std::vector<Index> pool(population.begin(), population.end());
  CounterRng rng(key);
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.bounded(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

// elites + a uniform draw of n_r indices from all \ elites. Returned sorted.
inline std::vector<Index> composeSketch(std::span<const Index> all,
                                        std::span<const Index> elites,
                                        const SketchConfig& cfg,
                                        StreamKey key) {
  if (elites.size() != cfg.eliteCount) {
    throw std::domain_error("elite set has " + std::to_string(elites.size()) +
                            " members but n_e = " +
                            std::to_string(cfg.eliteCount));
  }
  if (cfg.eliteCount > cfg.sketchSize) {
    throw std::domain_error("elite count exceeds sketch size");
  }
  std::vector<Index> sortedElites(elites.begin(), elites.end());
  std::sort(sortedElites.begin(), sortedElites.end());
  if (std::adjacent_find(sortedElites.begin(), sortedElites.end()) !=
      sortedElites.end()) {
    throw std::domain_error("elite set contains a duplicate index");
  }

  std::vector<Index> rest;
  rest.reserve(all.size());
  std::size_t matched = 0;
  for (Index i : all) {
    if (std::binary_search(sortedElites.begin(), sortedElites.end(), i)) {
      ++matched;
    } else {
      rest.push_back(i);
    }
  }
  if (matched != sortedElites.size()) {
    throw std::domain_error("elite set is not a subset of the candidates");
  }

  std::vector<Index> sketch = sampleWithoutReplacement(rest, cfg.randomCount(), key);
  sketch.insert(sketch.end(), sortedElites.begin(), sortedElites.end());
  std::sort(sketch.begin(), sketch.end());
  return sketch;
}

}  // namespace groupsel
