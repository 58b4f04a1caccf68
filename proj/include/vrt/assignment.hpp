#pragma once

// SPDX-License-Identifier: Apache-2.0

#include <cstddef>
#include <vector>

namespace vrt {

/// Dense n x k matrix of pairing scores in [0,1]; rows are predictions,
/// columns ground truth.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  /// Throws std::invalid_argument on a size mismatch or a weight outside
  /// [0,1] (NaN included).
  WeightMatrix(std::size_t rows, std::size_t cols, std::vector<double> weights);
  static WeightMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const {
    return weights_[r * cols_ + c];
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> weights_;
};

struct Pair {
  std::size_t pred = 0;
  std::size_t gt = 0;
  double weight = 0.0;

  friend bool operator==(const Pair&, const Pair&) = default;
};

/// Injective pairing between the rows and columns of a WeightMatrix.
struct Assignment {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<Pair> pairs;

  double total() const;
};

struct MatchResult {
  std::vector<Pair> matched;
  std::vector<std::size_t> unmatched_pred;
  std::vector<std::size_t> unmatched_gt;
  double tau = 0.0;
};

/// Maximum-total-weight assignment (Kuhn-Munkres with potentials,
/// O(min(n,k)^2 max(n,k))). Pairs are listed by ascending pred index;
/// zero-weight pairs are dropped.
Assignment hungarian_match(const WeightMatrix& w);

/// Repeatedly takes the heaviest cell whose row and column are both still
/// free, ties broken by lower pred then lower gt index, until no
/// positive-weight cell is left. Pairs are listed in selection order.
Assignment greedy_match(const WeightMatrix& w);

/// Keeps pairs with weight strictly greater than `tau`; everything else
/// lands in the unmatched sets. Throws std::invalid_argument unless
/// 0 <= tau < 1.
MatchResult apply_threshold(const Assignment& a, double tau);

}  // namespace vrt
