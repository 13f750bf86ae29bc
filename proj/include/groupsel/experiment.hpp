#pragma once

// Synthetic benchmark harness: Gaussian candidate matrices, paired
// multi-trial runs of several selectors, and aggregation of the per-step
// objective curves, wall times and evaluation counts.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "groupsel/objective.hpp"
#include "groupsel/random.hpp"
#include "groupsel/selection.hpp"

namespace groupsel {

// i.i.d. N(0, 1) entries. Entry (i, j) is element i * r + j of a Box-Muller
// sequence built on the counter stream of `key`.
inline CandidateMatrix generateCandidates(std::size_t n, std::size_t r,
                                          StreamKey key) {
  if (n < 1 || r < 1) {
    throw std::domain_error("candidate matrix must have n >= 1 and r >= 1");
  }
  RowMatrix data(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r));
  double* out = data.data();
  const std::size_t total = n * r;
  CounterRng rng(key);
  for (std::size_t t = 0; t < total; t += 2) {
    const NormalPair z = standardNormalPair(rng);
    out[t] = z.first;
    if (t + 1 < total) out[t + 1] = z.second;
  }
  return CandidateMatrix(std::move(data));
}

inline StreamKey trialMatrixKey(std::uint64_t masterSeed, std::size_t trial) {
  return StreamKey::of({masterSeed, trial, 0x4D41545249585FULL});
}

inline std::uint64_t trialSelectorSeed(std::uint64_t masterSeed,
                                       std::size_t trial) {
  return StreamKey::of({masterSeed, trial, 0x534B45544348ULL}).value;
}

enum class Method { Greedy, GroupGreedy, Randomized, EliteRandomized };

inline std::string methodName(Method m) {
  switch (m) {
    case Method::Greedy: return "greedy";
    case Method::GroupGreedy: return "gg";
    case Method::Randomized: return "rgg";
    case Method::EliteRandomized: return "ergg";
  }
  return "?";
}

inline Method parseMethod(const std::string& text) {
  if (text == "greedy" || text == "g") return Method::Greedy;
  if (text == "gg") return Method::GroupGreedy;
  if (text == "rgg") return Method::Randomized;
  if (text == "ergg") return Method::EliteRandomized;
  throw std::invalid_argument("unknown method '" + text +
                              "' (expected greedy, gg, rgg or ergg)");
}

struct MethodSpec {
  Method method = Method::Greedy;
  std::size_t groupSize = 10;   // L
  std::size_t sketchSize = 100; // n_s
  std::size_t eliteCount = 10;  // n_e
  bool sharedSketch = false;
  std::string customLabel;

  std::string label() const {
    return customLabel.empty() ? methodName(method) : customLabel;
  }

  void validate(std::size_t n, std::size_t pMax) const {
    if (pMax < 1 || pMax > n) {
      throw std::invalid_argument("p-max must satisfy 1 <= p-max <= n");
    }
    if (method == Method::Greedy) return;
    if (groupSize < 1) throw std::invalid_argument("L must be >= 1");
    if (method == Method::GroupGreedy) return;
    if (sketchSize < 1 || sketchSize > n) {
      throw std::invalid_argument("ns = " + std::to_string(sketchSize) +
                                  " must satisfy 1 <= ns <= n = " +
                                  std::to_string(n));
    }
    if (method == Method::EliteRandomized && eliteCount > sketchSize) {
      throw std::invalid_argument("ne = " + std::to_string(eliteCount) +
                                  " must not exceed ns = " +
                                  std::to_string(sketchSize));
    }
  }

  SelectorReport run(const CandidateMatrix& u, std::size_t p,
                     ObjectiveKind kind, std::uint64_t seed) const {
    SelectorOptions options;
    options.sharedSketch = sharedSketch;
    switch (method) {
      case Method::Greedy:
        return commonGreedy(u, p, kind, options);
      case Method::GroupGreedy:
        return groupGreedy(u, p, groupSize, kind, options);
      case Method::Randomized:
        return randomizedGroupGreedy(u, p, groupSize, sketchSize, seed, kind,
                                     options);
      case Method::EliteRandomized:
        return eliteRandomizedGroupGreedy(u, p, groupSize, sketchSize,
                                          eliteCount, seed, kind, options);
    }
    throw std::logic_error("unhandled method");
  }
};

struct ExperimentConfig {
  std::size_t n = 1000;
  std::size_t r = 10;
  std::size_t pMax = 30;
  std::size_t trials = 50;
  std::uint64_t masterSeed = 0;
  std::vector<MethodSpec> methods;
  ObjectiveKind objective = ObjectiveKind::E;
  // Measurement noise variance; documentation only, neither objective uses it.
  double noiseVariance = 1.0;
  std::size_t threads = 1;
  // When set, every trial uses this matrix instead of a generated one.
  std::optional<CandidateMatrix> input;

  std::size_t rows() const { return input ? input->rows() : n; }
  std::size_t cols() const { return input ? input->cols() : r; }

  void validate() const {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (rows() < 1 || cols() < 1) {
      throw std::invalid_argument("n and r must be >= 1");
    }
    if (pMax < 1 || pMax > rows()) {
      throw std::invalid_argument("p-max = " + std::to_string(pMax) +
                                  " must satisfy 1 <= p-max <= n = " +
                                  std::to_string(rows()));
    }
    if (methods.empty()) throw std::invalid_argument("no methods configured");
    for (const auto& m : methods) m.validate(rows(), pMax);
  }
};

struct TrialRecord {
  std::size_t trialIndex = 0;
  std::string method;
  std::vector<double> objectiveCurve;
  std::vector<std::uint64_t> evalsThroughStep;
  std::vector<double> secondsThroughStep;
  double wallTimeSeconds = 0.0;
  std::uint64_t evalCount = 0;
  SensorSubset finalSubset;
  std::optional<std::string> error;

  bool ok() const { return !error.has_value(); }
};

using TrialCallback = std::function<void(std::size_t trial, std::size_t trials)>;

// Records are ordered by trial, then by position in cfg.methods.
inline std::vector<TrialRecord> runExperiment(const ExperimentConfig& cfg,
                                              const TrialCallback& onTrialDone = {}) {
  cfg.validate();
  const std::size_t methodCount = cfg.methods.size();
  std::vector<TrialRecord> records(cfg.trials * methodCount);

  auto runTrial = [&](std::size_t t) {
    const CandidateMatrix generated =
        cfg.input ? CandidateMatrix{}
                  : generateCandidates(cfg.n, cfg.r, trialMatrixKey(cfg.masterSeed, t));
    const CandidateMatrix& u = cfg.input ? *cfg.input : generated;
    const std::uint64_t seed = trialSelectorSeed(cfg.masterSeed, t);
    for (std::size_t m = 0; m < methodCount; ++m) {
      TrialRecord& rec = records[t * methodCount + m];
      rec.trialIndex = t;
      rec.method = cfg.methods[m].label();
      try {
        SelectorReport report = cfg.methods[m].run(u, cfg.pMax, cfg.objective, seed);
        rec.objectiveCurve = std::move(report.objectiveCurve);
        rec.evalsThroughStep = std::move(report.evalsThroughStep);
        rec.secondsThroughStep = std::move(report.secondsThroughStep);
        rec.wallTimeSeconds = report.wallTime;
        rec.evalCount = report.evalCount;
        rec.finalSubset = std::move(report.finalSubset);
      } catch (const std::exception& e) {
        rec.error = rec.method + " failed on trial " + std::to_string(t) + ": " + e.what();
      }
    }
  };

  const std::size_t workers =
      std::max<std::size_t>(1, std::min(cfg.threads, cfg.trials));
  std::atomic<std::size_t> nextTrial{0};
  std::atomic<std::size_t> finished{0};
  std::mutex callbackMutex;
  auto worker = [&] {
    for (std::size_t t = nextTrial++; t < cfg.trials; t = nextTrial++) {
      runTrial(t);
      const std::size_t done = ++finished;
      if (onTrialDone) {
        std::lock_guard lock(callbackMutex);
        onTrialDone(done, cfg.trials);
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return records;
}

struct SummaryRow {
  std::string method;
  std::size_t k = 0;  // number of selected sensors
  std::size_t samples = 0;
  double mean = 0.0;
  double geometricMean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double meanWallTime = 0.0;  // cumulative seconds through step k
  double meanEvalCount = 0.0; // cumulative evaluations through step k
};

// One row per (method, k); methods in order of first appearance, k
// ascending. Failed records are skipped.
inline std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records) {
  if (records.empty()) throw std::domain_error("no trial records to aggregate");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TrialRecord*>> byMethod;
  for (const auto& rec : records) {
    if (!byMethod.contains(rec.method)) order.push_back(rec.method);
    auto& bucket = byMethod[rec.method];
    if (rec.ok()) bucket.push_back(&rec);
  }

  std::vector<SummaryRow> rows;
  for (const auto& method : order) {
    const auto& bucket = byMethod[method];
    if (bucket.empty()) continue;
    std::size_t steps = std::numeric_limits<std::size_t>::max();
    for (const auto* rec : bucket) steps = std::min(steps, rec->objectiveCurve.size());
    for (std::size_t k = 0; k < steps; ++k) {
      SummaryRow row;
      row.method = method;
      row.k = k + 1;
      row.samples = bucket.size();
      row.min = std::numeric_limits<double>::infinity();
      row.max = -std::numeric_limits<double>::infinity();
      double sum = 0.0;
      double logSum = 0.0;
      bool anyZero = false;
      double timeSum = 0.0;
      double evalSum = 0.0;
      for (const auto* rec : bucket) {
        const double v = rec->objectiveCurve[k];
        sum += v;
        if (v > 0.0) logSum += std::log(v); else anyZero = true;
        row.min = std::min(row.min, v);
        row.max = std::max(row.max, v);
        if (k < rec->secondsThroughStep.size()) timeSum += rec->secondsThroughStep[k];
        if (k < rec->evalsThroughStep.size()) {
          evalSum += static_cast<double>(rec->evalsThroughStep[k]);
        }
      }
      const double count = static_cast<double>(bucket.size());
      row.mean = sum / count;
      row.geometricMean = anyZero ? 0.0 : std::exp(logSum / count);
      double squares = 0.0;
      for (const auto* rec : bucket) {
        const double d = rec->objectiveCurve[k] - row.mean;
        squares += d * d;
      }
      row.stddev = std::sqrt(squares / count);
      row.meanWallTime = timeSum / count;
      row.meanEvalCount = evalSum / count;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace groupsel
