#pragma once

// Sensor selectors: common greedy, group-greedy (beam search over subsets),
// randomized group-greedy (RGG) and elite-and-randomized group-greedy (ERGG).
//
// The group-greedy family keeps the top-L unique subsets ("group") at each
// cardinality k. At k = 1 every candidate row is scored. At k >= 2 each
// stored member is expanded by its own candidate set (all rows for GG, a
// fresh random sketch per member for RGG, sketch + elites for ERGG), each
// expansion is truncated to its best L, the results are pooled,
// deduplicated by canonical index set and cut back to L.
//
// Ordering everywhere: higher objective first, then the lexicographically
// smallest canonical subset.

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "groupsel/objective.hpp"
#include "groupsel/random.hpp"
#include "groupsel/sketch.hpp"

namespace groupsel {

struct ScoredSubset {
  SensorSubset subset;
  double value = 0.0;
};

inline bool ranksBefore(const ScoredSubset& a, const ScoredSubset& b) {
  if (a.value != b.value) return a.value > b.value;
  return canonicalLess(a.subset, b.subset);
}

// Positions in `pool` of the best `capacity` distinct subsets, best first.
// Among entries sharing a canonical subset the highest value wins, then the
// earliest position.
inline std::vector<std::size_t> selectTopUnique(
    std::span<const ScoredSubset> pool, std::size_t capacity) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ca = pool[a].subset.canonical();
    const auto cb = pool[b].subset.canonical();
    if (!std::equal(ca.begin(), ca.end(), cb.begin(), cb.end())) {
      return std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(),
                                          cb.end());
    }
    return pool[a].value > pool[b].value;
  });
  std::vector<std::size_t> unique;
  unique.reserve(order.size());
  for (std::size_t pos : order) {
    if (!unique.empty() && pool[unique.back()].subset == pool[pos].subset) {
      continue;
    }
    unique.push_back(pos);
  }
  const std::size_t keep = std::min(capacity, unique.size());
  std::partial_sort(unique.begin(), unique.begin() + static_cast<std::ptrdiff_t>(keep),
                    unique.end(), [&](std::size_t a, std::size_t b) {
                      return ranksBefore(pool[a], pool[b]);
                    });
  unique.resize(keep);
  return unique;
}

// Capacity-L pool of the best unique scored subsets, sorted best first.
class Group {
 public:
  explicit Group(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ < 1) throw std::domain_error("group size L must be >= 1");
  }

  static Group fromPool(std::size_t capacity, std::vector<ScoredSubset> pool) {
    Group group(capacity);
    for (std::size_t pos : selectTopUnique(pool, capacity)) {
      group.members_.push_back(std::move(pool[pos]));
    }
    return group;
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<ScoredSubset>& members() const { return members_; }
  const ScoredSubset& best() const { return members_.front(); }

 private:
  std::size_t capacity_;
  std::vector<ScoredSubset> members_;
};

struct SelectorOptions {
  // Draw one sketch per step shared by all members instead of one per member.
  bool sharedSketch = false;
  // Keep the group members of every step in SelectorReport::trace.
  bool recordTrace = false;
};

struct SelectorReport {
  SensorSubset finalSubset;
  std::vector<double> objectiveCurve;  // best group value after k = 1..p
  std::uint64_t evalCount = 0;
  double wallTime = 0.0;  // seconds
  std::vector<std::uint64_t> evalsThroughStep;
  std::vector<double> secondsThroughStep;
  std::vector<std::vector<SensorSubset>> trace;
};

class DegenerateSketchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Extension {
  Index candidate;
  double value;
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double secondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline void checkSubsetSize(const CandidateMatrix& u, std::size_t p) {
  if (p < 1 || p > u.rows()) {
    throw std::domain_error("sensor count p = " + std::to_string(p) +
                            " must satisfy 1 <= p <= n = " +
                            std::to_string(u.rows()));
  }
}

inline void checkGroupSize(std::size_t groupSize) {
  if (groupSize < 1) throw std::domain_error("group size L must be >= 1");
}

// Scores parent + {i} for every candidate not already in parent and keeps
// the best `keep`, ties to the smaller index. `candidates` must be distinct.
inline std::vector<Extension> bestExtensions(const CandidateMatrix& u,
                                             const GramState& parent,
                                             std::span<const Index> candidates,
                                             std::size_t keep,
                                             ObjectiveKind kind,
                                             std::uint64_t& evals) {
  std::vector<Extension> scored;
  scored.reserve(candidates.size());
  for (Index i : candidates) {
    if (parent.subset().contains(i)) continue;
    scored.push_back({i, parent.evalExtended(u, i, kind)});
    ++evals;
  }
  const std::size_t top = std::min(keep, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(top),
                    scored.end(), [](const Extension& a, const Extension& b) {
                      if (a.value != b.value) return a.value > b.value;
                      return a.candidate < b.candidate;
                    });
  scored.resize(top);
  return scored;
}

struct SketchPlan {
  bool fullCandidates = true;
  SketchConfig config;
  std::vector<Index> elites;
  std::uint64_t seed = 0;
};

inline StreamKey sketchKey(std::uint64_t seed, std::size_t step,
                           std::size_t member) {
  return StreamKey::of({seed, step, member});
}

struct Member {
  GramState state;
  double value;
};

inline SelectorReport groupSearch(const CandidateMatrix& u, std::size_t p,
                                  std::size_t groupSize, ObjectiveKind kind,
                                  const SketchPlan& plan,
                                  const SelectorOptions& options,
                                  std::uint64_t priorEvals,
                                  Clock::time_point start) {
  const std::size_t n = u.rows();
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});

  SelectorReport report;
  report.evalCount = priorEvals;
  auto recordStep = [&](const std::vector<Member>& members) {
    report.objectiveCurve.push_back(members.front().value);
    report.evalsThroughStep.push_back(report.evalCount);
    report.secondsThroughStep.push_back(secondsSince(start));
    if (options.recordTrace) {
      std::vector<SensorSubset> step;
      step.reserve(members.size());
      for (const auto& m : members) step.push_back(m.state.subset());
      report.trace.push_back(std::move(step));
    }
  };

  std::vector<Member> members;
  {
    const GramState empty = GramState::build(u, SensorSubset{});
    for (const Extension& e :
         bestExtensions(u, empty, all, groupSize, kind, report.evalCount)) {
      members.push_back({empty.extend(u, e.candidate, e.value), e.value});
    }
  }
  recordStep(members);

  std::vector<Index> sharedSketch;
  for (std::size_t k = 2; k <= p; ++k) {
    std::vector<ScoredSubset> pool;
    std::vector<std::pair<std::size_t, Index>> origin;
    if (!plan.fullCandidates && options.sharedSketch) {
      sharedSketch = composeSketch(all, plan.elites, plan.config,
                                   sketchKey(plan.seed, k, 0));
    }
    for (std::size_t l = 0; l < members.size(); ++l) {
      std::vector<Index> sketch;
      std::span<const Index> candidates = all;
      if (!plan.fullCandidates) {
        if (options.sharedSketch) {
          candidates = sharedSketch;
        } else {
          sketch = composeSketch(all, plan.elites, plan.config,
                                 sketchKey(plan.seed, k, l));
          candidates = sketch;
        }
      }
      const GramState& parent = members[l].state;
      for (const Extension& e : bestExtensions(u, parent, candidates, groupSize,
                                               kind, report.evalCount)) {
        pool.push_back({parent.subset().with(e.candidate), e.value});
        origin.emplace_back(l, e.candidate);
      }
    }
    if (pool.empty()) {
      throw DegenerateSketchError(
          "no member could be extended at step k = " + std::to_string(k) +
          "; every sketched candidate is already selected (n_s < p?)");
    }
    std::vector<Member> next;
    for (std::size_t pos : selectTopUnique(pool, groupSize)) {
      const auto& [parentIndex, candidate] = origin[pos];
      next.push_back({members[parentIndex].state.extend(u, candidate, pool[pos].value),
                      pool[pos].value});
    }
    members = std::move(next);
    recordStep(members);
  }

  report.finalSubset = members.front().state.subset();
  report.wallTime = secondsSince(start);
  return report;
}

}  // namespace detail

inline SelectorReport commonGreedy(const CandidateMatrix& u, std::size_t p,
                                   ObjectiveKind kind,
                                   const SelectorOptions& options = {}) {
  detail::checkSubsetSize(u, p);
  const auto start = detail::Clock::now();
  const std::size_t n = u.rows();

  SelectorReport report;
  GramState state = GramState::build(u, SensorSubset{});
  for (std::size_t k = 1; k <= p; ++k) {
    Index best = n;
    double bestValue = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (state.subset().contains(i)) continue;
      const double value = state.evalExtended(u, i, kind);
      ++report.evalCount;
      if (best == n || value > bestValue) {
        best = i;
        bestValue = value;
      }
    }
    state = state.extend(u, best, bestValue);
    report.objectiveCurve.push_back(bestValue);
    report.evalsThroughStep.push_back(report.evalCount);
    report.secondsThroughStep.push_back(detail::secondsSince(start));
    if (options.recordTrace) report.trace.push_back({state.subset()});
  }
  report.finalSubset = state.subset();
  report.wallTime = detail::secondsSince(start);
  return report;
}

// Top min(L, usable) extensions of `parent` over `candidates`; indices
// already in parent are skipped.
inline std::vector<ScoredSubset> lBestSearch(const CandidateMatrix& u,
                                             const SensorSubset& parent,
                                             std::span<const Index> candidates,
                                             std::size_t groupSize,
                                             ObjectiveKind kind) {
  detail::checkGroupSize(groupSize);
  std::vector<Index> distinct(candidates.begin(), candidates.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  for (Index i : distinct) detail::checkIndex(u, i);

  const GramState state = GramState::build(u, parent);
  std::uint64_t evals = 0;
  auto best = detail::bestExtensions(u, state, distinct, groupSize, kind, evals);
  if (evals == 0) {
    throw std::domain_error("no usable candidate outside the parent subset");
  }
  std::vector<ScoredSubset> out;
  out.reserve(best.size());
  for (const Extension& e : best) out.push_back({parent.with(e.candidate), e.value});
  return out;
}

inline SelectorReport groupGreedy(const CandidateMatrix& u, std::size_t p,
                                  std::size_t groupSize, ObjectiveKind kind,
                                  const SelectorOptions& options = {}) {
  detail::checkSubsetSize(u, p);
  detail::checkGroupSize(groupSize);
  return detail::groupSearch(u, p, groupSize, kind, detail::SketchPlan{},
                             options, 0, detail::Clock::now());
}

// First n_e sensors chosen by common greedy, in selection order.
inline std::vector<Index> selectElites(const CandidateMatrix& u,
                                       std::size_t eliteCount,
                                       ObjectiveKind kind) {
  if (eliteCount < 1 || eliteCount > u.rows()) {
    throw std::domain_error("elite count n_e = " + std::to_string(eliteCount) +
                            " must satisfy 1 <= n_e <= n = " +
                            std::to_string(u.rows()));
  }
  const auto report = commonGreedy(u, eliteCount, kind);
  const auto order = report.finalSubset.indices();
  return {order.begin(), order.end()};
}

inline SelectorReport eliteRandomizedGroupGreedy(
    const CandidateMatrix& u, std::size_t p, std::size_t groupSize,
    std::size_t sketchSize, std::size_t eliteCount, std::uint64_t seed,
    ObjectiveKind kind, const SelectorOptions& options = {}) {
  detail::checkSubsetSize(u, p);
  detail::checkGroupSize(groupSize);
  if (sketchSize < 1) throw std::domain_error("sketch size n_s must be >= 1");
  const SketchConfig config{sketchSize, eliteCount};
  config.validate(u.rows());

  const auto start = detail::Clock::now();
  detail::SketchPlan plan;
  plan.fullCandidates = false;
  plan.config = config;
  plan.seed = seed;
  std::uint64_t priorEvals = 0;
  if (eliteCount > 0) {
    const auto elites = commonGreedy(u, eliteCount, kind);
    const auto order = elites.finalSubset.indices();
    plan.elites.assign(order.begin(), order.end());
    priorEvals = elites.evalCount;
  }
  return detail::groupSearch(u, p, groupSize, kind, plan, options, priorEvals,
                             start);
}

inline SelectorReport randomizedGroupGreedy(const CandidateMatrix& u,
                                            std::size_t p,
                                            std::size_t groupSize,
                                            std::size_t sketchSize,
                                            std::uint64_t seed,
                                            ObjectiveKind kind,
                                            const SelectorOptions& options = {}) {
  return eliteRandomizedGroupGreedy(u, p, groupSize, sketchSize, 0, seed, kind,
                                    options);
}

}  // namespace groupsel
