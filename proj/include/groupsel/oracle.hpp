#pragma once

// Brute-force references. Everything here is textbook and deliberately
// shares no numerical code with objective.hpp: matrices are plain nested
// vectors, determinants come from Gaussian elimination with partial
// pivoting and eigenvalues from the cyclic Jacobi method.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "groupsel/objective.hpp"
#include "groupsel/selection.hpp"

namespace groupsel::oracle {

using DenseMatrix = std::vector<std::vector<double>>;

inline constexpr double kMaxCombinations = 1e7;

class GuardExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double determinant(DenseMatrix a) {
  const std::size_t d = a.size();
  double det = 1.0;
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < d; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    if (a[pivot][col] == 0.0) return 0.0;
    if (pivot != col) {
      std::swap(a[pivot], a[col]);
      det = -det;
    }
    det *= a[col][col];
    for (std::size_t row = col + 1; row < d; ++row) {
      const double factor = a[row][col] / a[col][col];
      for (std::size_t j = col; j < d; ++j) a[row][j] -= factor * a[col][j];
    }
  }
  return det;
}

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double minEigenvalue(DenseMatrix a) {
  const std::size_t d = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        total += a[i][j] * a[i][j];
        if (i != j) off += a[i][j] * a[i][j];
      }
    }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t pi = 0; pi + 1 < d; ++pi) {
      for (std::size_t q = pi + 1; q < d; ++q) {
        if (a[pi][q] == 0.0) continue;
        const double theta = (a[q][q] - a[pi][pi]) / (2.0 * a[pi][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = a[k][pi];
          const double akq = a[k][q];
          a[k][pi] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = a[pi][k];
          const double aqk = a[q][k];
          a[pi][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < d; ++i) smallest = std::min(smallest, a[i][i]);
  return smallest;
}

inline double naiveEval(const CandidateMatrix& u, const SensorSubset& s,
                        ObjectiveKind kind) {
  if (s.empty()) throw std::domain_error("objective of an empty subset");
  const std::size_t r = u.cols();
  DenseMatrix c;
  for (Index i : s.indices()) {
    if (i >= u.rows()) throw std::domain_error("row index out of range");
    std::vector<double> row(r);
    for (std::size_t j = 0; j < r; ++j) row[j] = u(i, j);
    c.push_back(std::move(row));
  }
  const std::size_t p = c.size();
  const bool rowSide = p <= r;
  const std::size_t d = rowSide ? p : r;
  DenseMatrix m(d, std::vector<double>(d, 0.0));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      double sum = 0.0;
      if (rowSide) {
        for (std::size_t j = 0; j < r; ++j) sum += c[a][j] * c[b][j];
      } else {
        for (std::size_t k = 0; k < p; ++k) sum += c[k][a] * c[k][b];
      }
      m[a][b] = sum;
    }
  }
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += m[a][a];

  double value = 0.0;
  double scale = 0.0;
  if (kind == ObjectiveKind::D) {
    value = determinant(m);
    scale = std::pow(std::max(trace, 0.0) / static_cast<double>(d),
                     static_cast<double>(d));
  } else {
    value = minEigenvalue(m);
    scale = trace;
  }
  if (value < 0.0) {
    if (value >= -1e-12 * std::max(1.0, scale)) return 0.0;
    throw std::domain_error("negative objective " + std::to_string(value));
  }
  return value;
}

inline double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double result = 1.0;
  for (std::size_t i = 1; i <= k; ++i) {
    result = result * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(result);
}

// Best subset of size p over all C(n, p) subsets, enumerated in
// lexicographic order; the first maximum wins ties.
inline ScoredSubset exhaustiveBest(const CandidateMatrix& u, std::size_t p,
                                   ObjectiveKind kind) {
  const std::size_t n = u.rows();
  if (p < 1 || p > n) throw std::domain_error("p must satisfy 1 <= p <= n");
  const double count = binomial(n, p);
  if (count > kMaxCombinations) {
    throw GuardExceededError("exhaustive search refused: C(" +
                             std::to_string(n) + ", " + std::to_string(p) +
                             ") = " + std::to_string(count) +
                             " exceeds the limit of 1e7 subsets");
  }
  std::vector<Index> combo(p);
  for (std::size_t i = 0; i < p; ++i) combo[i] = i;

  ScoredSubset best{SensorSubset(combo), naiveEval(u, SensorSubset(combo), kind)};
  while (true) {
    std::size_t pos = p;
    while (pos > 0 && combo[pos - 1] == n - p + (pos - 1)) --pos;
    if (pos == 0) break;
    ++combo[pos - 1];
    for (std::size_t j = pos; j < p; ++j) combo[j] = combo[j - 1] + 1;
    SensorSubset candidate(combo);
    const double value = naiveEval(u, candidate, kind);
    if (value > best.value) best = {std::move(candidate), value};
  }
  return best;
}

}  // namespace groupsel::oracle
