// SPDX-License-Identifier: Apache-2.0

#include "vrt/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace vrt {

WeightMatrix::WeightMatrix(std::size_t rows, std::size_t cols,
                           std::vector<double> weights)
    : rows_(rows), cols_(cols), weights_(std::move(weights)) {
  if (weights_.size() != rows_ * cols_) {
    throw std::invalid_argument("weight matrix holds " +
                                std::to_string(weights_.size()) +
                                " entries, expected " +
                                std::to_string(rows_ * cols_));
  }
  for (double x : weights_) {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::invalid_argument("weight outside [0,1]: " + std::to_string(x));
    }
  }
}

WeightMatrix WeightMatrix::from_rows(
    const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  const std::size_t k = n == 0 ? 0 : rows[0].size();
  std::vector<double> flat;
  flat.reserve(n * k);
  for (const auto& row : rows) {
    if (row.size() != k) throw std::invalid_argument("ragged weight matrix");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return WeightMatrix(n, k, std::move(flat));
}

double Assignment::total() const {
  double sum = 0.0;
  for (const auto& p : pairs) sum += p.weight;
  return sum;
}

Assignment hungarian_match(const WeightMatrix& w) {
  Assignment result{w.rows(), w.cols(), {}};
  if (w.rows() == 0 || w.cols() == 0) return result;

  // Solve on the orientation with n <= m; cost is the negated weight.
  const bool transposed = w.rows() > w.cols();
  const std::size_t n = transposed ? w.cols() : w.rows();
  const std::size_t m = transposed ? w.rows() : w.cols();
  auto cost = [&](std::size_t i, std::size_t j) {
    return transposed ? -w(j, i) : -w(i, j);
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  // 1-based potentials; column 0 is the virtual source.
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<bool> used(m + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = owner[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (owner[j] == 0) continue;
    const std::size_t pred = transposed ? j - 1 : owner[j] - 1;
    const std::size_t gt = transposed ? owner[j] - 1 : j - 1;
    const double weight = w(pred, gt);
    if (weight > 0.0) result.pairs.push_back({pred, gt, weight});
  }
  std::sort(result.pairs.begin(), result.pairs.end(),
            [](const Pair& a, const Pair& b) { return a.pred < b.pred; });
  return result;
}

Assignment greedy_match(const WeightMatrix& w) {
  Assignment result{w.rows(), w.cols(), {}};
  std::vector<Pair> cells;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) {
      if (w(r, c) > 0.0) cells.push_back({r, c, w(r, c)});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Pair& a, const Pair& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    if (a.pred != b.pred) return a.pred < b.pred;
    return a.gt < b.gt;
  });
  std::vector<bool> row_used(w.rows(), false), col_used(w.cols(), false);
  for (const auto& cell : cells) {
    if (row_used[cell.pred] || col_used[cell.gt]) continue;
    row_used[cell.pred] = col_used[cell.gt] = true;
    result.pairs.push_back(cell);
  }
  return result;
}

MatchResult apply_threshold(const Assignment& a, double tau) {
  if (!(tau >= 0.0 && tau < 1.0)) {
    throw std::invalid_argument("tau must lie in [0,1), got " +
                                std::to_string(tau));
  }
  MatchResult result;
  result.tau = tau;
  std::vector<bool> pred_hit(a.rows, false), gt_hit(a.cols, false);
  for (const auto& p : a.pairs) {
    if (p.weight > tau) {
      result.matched.push_back(p);
      pred_hit[p.pred] = gt_hit[p.gt] = true;
    }
  }
  for (std::size_t i = 0; i < a.rows; ++i) {
    if (!pred_hit[i]) result.unmatched_pred.push_back(i);
  }
  for (std::size_t j = 0; j < a.cols; ++j) {
    if (!gt_hit[j]) result.unmatched_gt.push_back(j);
  }
  return result;
}

}  // namespace vrt
