#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

namespace coopriv {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense row-major cost matrix. Entries are finite costs or +inf for pairs
/// that may not be matched.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(std::size_t rows, std::size_t cols, double fill = kForbidden)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  CostMatrix(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  CostMatrix transposed() const;

 private:
  std::size_t rows_{0};
  std::size_t cols_{0};
  std::vector<double> data_;
};

struct Assignment {
  /// Column matched to each row, or nullopt.
  std::vector<std::optional<std::size_t>> row_to_col;
  /// Sum of matched entries, accumulated in row order.
  double total_cost{0.0};
  std::size_t matched{0};
};

/// Optimal partial assignment. Among all injections of rows into columns that
/// use only finite entries, returns one with the most matched pairs and, among
/// those, the minimum total cost. O(n^2 m) for n = min(rows, cols),
/// m = max(rows, cols).
Assignment hungarian_assign(const CostMatrix& costs);

}  // namespace coopriv
