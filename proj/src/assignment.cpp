#include "coopriv/assignment.hpp"

#include <cmath>
#include <stdexcept>

namespace coopriv {

CostMatrix::CostMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw std::invalid_argument("CostMatrix rows must have equal length");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

CostMatrix CostMatrix::transposed() const {
  CostMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

namespace {

// Shortest augmenting path Hungarian method (potentials u, v) for an n x m
// matrix with n <= m. a is 1-indexed as in the classic formulation; returns
// the column assigned to each row (0-based).
std::vector<std::size_t> solve_dense(const std::vector<std::vector<double>>& a, std::size_t n,
                                     std::size_t m) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a[i0][j] - u[i0] - v[j];
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
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment hungarian_assign(const CostMatrix& costs) {
  Assignment result;
  result.row_to_col.assign(costs.rows(), std::nullopt);
  if (costs.empty()) return result;

  // Rows and columns with no finite entry can never be matched; dropping
  // them keeps the dense problem small when many tracks are unmatchable.
  std::vector<std::size_t> live_rows, live_cols;
  std::vector<char> col_live(costs.cols(), 0);
  double spread = 0.0;
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    bool any = false;
    for (std::size_t c = 0; c < costs.cols(); ++c) {
      const double x = costs(r, c);
      if (std::isfinite(x)) {
        any = true;
        col_live[c] = 1;
        spread += std::abs(x);
      } else if (!(x > 0.0)) {
        throw std::invalid_argument("cost entries must be finite or +inf");
      }
    }
    if (any) live_rows.push_back(r);
  }
  for (std::size_t c = 0; c < costs.cols(); ++c)
    if (col_live[c]) live_cols.push_back(c);
  if (live_rows.empty()) return result;

  const bool transpose = live_rows.size() > live_cols.size();
  const auto& small = transpose ? live_cols : live_rows;
  const auto& large = transpose ? live_rows : live_cols;
  const std::size_t n = small.size();
  const std::size_t m = large.size();

  // Each small-side index may fall back to its own dummy column at cost
  // `unmatched`. That sentinel exceeds any achievable difference in matched
  // cost, so solutions with more matches always win; forbidden entries cost
  // more than the dummy, so they are never chosen.
  const double unmatched = spread + 1.0;
  const double forbidden = 2.0 * unmatched + 1.0;
  std::vector<std::vector<double>> a(n + 1, std::vector<double>(m + n + 1, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double x = transpose ? costs(large[j], small[i]) : costs(small[i], large[j]);
      a[i + 1][j + 1] = std::isfinite(x) ? x : forbidden;
    }
    for (std::size_t d = 0; d < n; ++d) a[i + 1][m + d + 1] = d == i ? unmatched : forbidden;
  }

  const auto assigned = solve_dense(a, n, m + n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = assigned[i];
    if (j >= m) continue;
    const std::size_t r = transpose ? large[j] : small[i];
    const std::size_t c = transpose ? small[i] : large[j];
    if (!std::isfinite(costs(r, c))) continue;
    result.row_to_col[r] = c;
  }
  for (std::size_t r = 0; r < costs.rows(); ++r) {
    if (result.row_to_col[r]) {
      result.total_cost += costs(r, *result.row_to_col[r]);
      ++result.matched;
    }
  }
  return result;
}

}  // namespace coopriv
