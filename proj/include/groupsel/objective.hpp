#pragma once

// D- and E-optimality objectives over row subsets of a sensor candidate
// matrix U (n x r). For a subset S of size p with measurement matrix C
// (the rows of U indexed by S):
//
//   f_D(S) = det(C C^T)        if p <= r,   det(C^T C)        if p > r
//   f_E(S) = lambda_min(C C^T) if p <= r,   lambda_min(C^T C) if p > r
//
// evalDirect builds C from scratch. GramState caches A = C^T C, G = C C^T
// (while p <= r) and their Cholesky factors so that extending S by one row
// costs O(r^2) for f_D:
//
//   p + 1 <= r : det(G') = det(G) * (u^T u - g^T G^{-1} g),  g = C u
//   p >= r     : det(A + u u^T) = det(A) * (1 + u^T A^{-1} u)
//
// f_E has no cheap rank-one update; the bordered (p+1)x(p+1) or updated
// r x r matrix is handed to a dense symmetric eigensolver.
//
// Row indices are 0-based.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace groupsel {

using Index = std::size_t;
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class ObjectiveKind { D, E };

inline std::string_view toString(ObjectiveKind kind) {
  return kind == ObjectiveKind::D ? "D" : "E";
}

inline ObjectiveKind parseObjectiveKind(std::string_view text) {
  if (text == "d" || text == "D") return ObjectiveKind::D;
  if (text == "e" || text == "E") return ObjectiveKind::E;
  throw std::invalid_argument("unknown objective kind '" + std::string(text) +
                              "' (expected d or e)");
}

class CandidateMatrix {
 public:
  CandidateMatrix() = default;

  explicit CandidateMatrix(RowMatrix data) : data_(std::move(data)) {
    if (data_.rows() < 1 || data_.cols() < 1) {
      throw std::domain_error("candidate matrix must have n >= 1 and r >= 1");
    }
    if (!data_.allFinite()) {
      throw std::domain_error("candidate matrix has a non-finite entry");
    }
  }

  Index rows() const { return static_cast<Index>(data_.rows()); }
  Index cols() const { return static_cast<Index>(data_.cols()); }

  auto row(Index i) const { return data_.row(static_cast<Eigen::Index>(i)); }
  double operator()(Index i, Index j) const {
    return data_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const RowMatrix& data() const { return data_; }

 private:
  RowMatrix data_;
};

// Distinct row indices in selection order, plus a sorted copy used for
// equality and deduplication.
class SensorSubset {
 public:
  SensorSubset() = default;

  explicit SensorSubset(std::vector<Index> order)
      : order_(std::move(order)), sorted_(order_) {
    std::sort(sorted_.begin(), sorted_.end());
    if (std::adjacent_find(sorted_.begin(), sorted_.end()) != sorted_.end()) {
      throw std::domain_error("sensor subset contains a duplicate index");
    }
  }

  SensorSubset(std::initializer_list<Index> order)
      : SensorSubset(std::vector<Index>(order)) {}

  std::span<const Index> indices() const { return order_; }
  std::span<const Index> canonical() const { return sorted_; }
  Index size() const { return order_.size(); }
  bool empty() const { return order_.empty(); }

  bool contains(Index i) const {
    return std::binary_search(sorted_.begin(), sorted_.end(), i);
  }

  SensorSubset with(Index i) const {
    auto pos = std::lower_bound(sorted_.begin(), sorted_.end(), i);
    if (pos != sorted_.end() && *pos == i) {
      throw std::domain_error("index " + std::to_string(i) +
                              " is already in the subset");
    }
    SensorSubset out;
    out.order_.reserve(order_.size() + 1);
    out.order_ = order_;
    out.order_.push_back(i);
    out.sorted_.reserve(sorted_.size() + 1);
    out.sorted_.assign(sorted_.begin(), pos);
    out.sorted_.push_back(i);
    out.sorted_.insert(out.sorted_.end(), pos, sorted_.end());
    return out;
  }

  friend bool operator==(const SensorSubset& a, const SensorSubset& b) {
    return a.sorted_ == b.sorted_;
  }

  // Lexicographic order of canonical forms.
  friend bool canonicalLess(const SensorSubset& a, const SensorSubset& b) {
    return std::lexicographical_compare(a.sorted_.begin(), a.sorted_.end(),
                                        b.sorted_.begin(), b.sorted_.end());
  }

 private:
  std::vector<Index> order_;
  std::vector<Index> sorted_;
};

namespace detail {

inline constexpr double kNegativeTolerance = 1e-12;

// Objectives are functions of PSD matrices. Round-off below zero within
// kNegativeTolerance * scale becomes 0; anything more negative is an error.
inline double clampPsd(double value, double scale) {
  if (value >= 0.0) return value;
  if (value >= -kNegativeTolerance * std::max(1.0, scale)) return 0.0;
  throw std::domain_error("objective of a PSD matrix evaluated to " +
                          std::to_string(value));
}

// AM-GM bound (trace/d)^d on the determinant of a PSD matrix.
inline double determinantScale(const Eigen::MatrixXd& m) {
  const double d = static_cast<double>(m.rows());
  return std::pow(std::max(m.trace(), 0.0) / d, d);
}

inline double psdDeterminant(const Eigen::MatrixXd& m) {
  return clampPsd(m.determinant(), determinantScale(m));
}

inline double psdMinEigenvalue(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      m, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigensolver did not converge");
  }
  return clampPsd(solver.eigenvalues()(0), m.trace());
}

inline double psdObjective(const Eigen::MatrixXd& m, ObjectiveKind kind) {
  return kind == ObjectiveKind::D ? psdDeterminant(m) : psdMinEigenvalue(m);
}

inline void checkIndex(const CandidateMatrix& u, Index i) {
  if (i >= u.rows()) {
    throw std::domain_error("row index " + std::to_string(i) +
                            " out of range for n = " +
                            std::to_string(u.rows()));
  }
}

inline Eigen::MatrixXd gatherRows(const CandidateMatrix& u,
                                  std::span<const Index> indices) {
  Eigen::MatrixXd c(static_cast<Eigen::Index>(indices.size()),
                    static_cast<Eigen::Index>(u.cols()));
  for (std::size_t k = 0; k < indices.size(); ++k) {
    checkIndex(u, indices[k]);
    c.row(static_cast<Eigen::Index>(k)) = u.row(indices[k]);
  }
  return c;
}

// C C^T when p <= r, C^T C otherwise.
inline Eigen::MatrixXd informationMatrix(const Eigen::MatrixXd& c) {
  if (c.rows() <= c.cols()) return c * c.transpose();
  return c.transpose() * c;
}

}  // namespace detail

inline double evalDirect(const CandidateMatrix& u, const SensorSubset& s,
                         ObjectiveKind kind) {
  if (s.empty()) {
    throw std::domain_error("objective is undefined for an empty subset");
  }
  const Eigen::MatrixXd c = detail::gatherRows(u, s.indices());
  return detail::psdObjective(detail::informationMatrix(c), kind);
}

// Cached Gram matrices of one subset. Immutable once built.
class GramState {
 public:
  static GramState build(const CandidateMatrix& u, const SensorSubset& s) {
    GramState state;
    state.subset_ = s;
    const auto r = static_cast<Eigen::Index>(u.cols());
    const Eigen::MatrixXd c = detail::gatherRows(u, s.indices());
    state.gram_ = Eigen::MatrixXd::Zero(r, r);
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
      state.gram_.noalias() += c.row(k).transpose() * c.row(k);
    }
    if (s.size() <= u.cols()) state.rowGram_ = c * c.transpose();
    state.factorize(u.cols());
    return state;
  }

  Index subsetSize() const { return subset_.size(); }
  const SensorSubset& subset() const { return subset_; }
  const Eigen::MatrixXd& gram() const { return gram_; }
  // Empty once the subset is larger than r.
  const Eigen::MatrixXd& rowGram() const { return rowGram_; }
  std::optional<double> objectiveCache() const { return objectiveCache_; }

  // Objective of subset() + {candidate}; the state is not modified.
  double evalExtended(const CandidateMatrix& u, Index candidate,
                      ObjectiveKind kind) const {
    detail::checkIndex(u, candidate);
    if (subset_.contains(candidate)) {
      throw std::domain_error("candidate " + std::to_string(candidate) +
                              " is already in the subset");
    }
    const Index p = subset_.size();
    const Index r = u.cols();
    const Eigen::VectorXd v = u.row(candidate).transpose();
    const double vv = v.squaredNorm();
    if (p == 0) return vv;

    if (p + 1 <= r) {
      const Eigen::VectorXd g = crossProducts(u, v);
      if (kind == ObjectiveKind::D && rowFactorOk_) {
        const double schur =
            vv - rowFactor_.matrixL().solve(g).squaredNorm();
        if (schur >= -detail::kNegativeTolerance * std::max(1.0, vv)) {
          return rowDeterminant_ * std::max(schur, 0.0);
        }
      }
      const auto m = static_cast<Eigen::Index>(p);
      Eigen::MatrixXd bordered(m + 1, m + 1);
      bordered.topLeftCorner(m, m) = rowGram_;
      bordered.topRightCorner(m, 1) = g;
      bordered.bottomLeftCorner(1, m) = g.transpose();
      bordered(m, m) = vv;
      return detail::psdObjective(bordered, kind);
    }

    if (kind == ObjectiveKind::D && gramFactorOk_) {
      const double quad = gramFactor_.matrixL().solve(v).squaredNorm();
      return gramDeterminant_ * (1.0 + quad);
    }
    Eigen::MatrixXd updated = gram_;
    updated.noalias() += v * v.transpose();
    return detail::psdObjective(updated, kind);
  }

  GramState extend(const CandidateMatrix& u, Index candidate,
                   std::optional<double> knownValue = std::nullopt) const {
    detail::checkIndex(u, candidate);
    GramState next;
    next.subset_ = subset_.with(candidate);
    const Eigen::VectorXd v = u.row(candidate).transpose();
    next.gram_ = gram_;
    next.gram_.noalias() += v * v.transpose();
    const Index p = subset_.size();
    if (p + 1 <= u.cols()) {
      const auto m = static_cast<Eigen::Index>(p);
      const Eigen::VectorXd g = crossProducts(u, v);
      next.rowGram_.resize(m + 1, m + 1);
      if (m > 0) {
        next.rowGram_.topLeftCorner(m, m) = rowGram_;
        next.rowGram_.topRightCorner(m, 1) = g;
        next.rowGram_.bottomLeftCorner(1, m) = g.transpose();
      }
      next.rowGram_(m, m) = v.squaredNorm();
    }
    next.objectiveCache_ = knownValue;
    next.factorize(u.cols());
    return next;
  }

 private:
  Eigen::VectorXd crossProducts(const CandidateMatrix& u,
                                const Eigen::VectorXd& v) const {
    const auto idx = subset_.indices();
    Eigen::VectorXd g(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      g(static_cast<Eigen::Index>(k)) = u.row(idx[k]).dot(v.transpose());
    }
    return g;
  }

  void factorize(Index r) {
    const Index p = subset_.size();
    rowFactorOk_ = false;
    gramFactorOk_ = false;
    if (p >= 1 && p <= r) {
      rowFactor_.compute(rowGram_);
      if (rowFactor_.info() == Eigen::Success) {
        const auto diag = rowFactor_.matrixLLT().diagonal();
        rowDeterminant_ = diag.prod() * diag.prod();
        rowFactorOk_ = rowDeterminant_ > 0.0;
      }
    }
    if (p >= r) {
      gramFactor_.compute(gram_);
      if (gramFactor_.info() == Eigen::Success) {
        const auto diag = gramFactor_.matrixLLT().diagonal();
        gramDeterminant_ = diag.prod() * diag.prod();
        gramFactorOk_ = gramDeterminant_ > 0.0;
      }
    }
  }

  SensorSubset subset_;
  Eigen::MatrixXd gram_;
  Eigen::MatrixXd rowGram_;
  std::optional<double> objectiveCache_;

  Eigen::LLT<Eigen::MatrixXd> rowFactor_;
  Eigen::LLT<Eigen::MatrixXd> gramFactor_;
  double rowDeterminant_ = 0.0;
  double gramDeterminant_ = 0.0;
  bool rowFactorOk_ = false;
  bool gramFactorOk_ = false;
};

inline GramState buildState(const CandidateMatrix& u, const SensorSubset& s) {
  return GramState::build(u, s);
}

inline double evalExtended(const CandidateMatrix& u, const GramState& state,
                           Index candidate, ObjectiveKind kind) {
  return state.evalExtended(u, candidate, kind);
}

inline GramState extendState(const CandidateMatrix& u, const GramState& state,
                             Index candidate) {
  return state.extend(u, candidate);
}

}  // namespace groupsel
