#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace rlink {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense row-major cost matrix for a rectangular assignment problem.
class CostMatrix {
  public:
    CostMatrix() = default;
    CostMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Assignment {
    std::vector<std::size_t> column_of_row;  // one column per row
    double cost = 0.0;                       // sum of the chosen entries
};

/// Minimum-cost assignment of every row to a distinct column (rows <= cols),
/// Hungarian algorithm with potentials, O(rows^2 * cols). Entries equal to
/// `kForbidden` are never chosen; throws std::invalid_argument when rows > cols
/// and std::runtime_error when no finite assignment exists.
///
/// Ties resolve deterministically: rows are inserted in index order and the
/// lowest-index column wins among equal reduced costs.
Assignment solve_lsap(const CostMatrix& cost);

}  // namespace rlink
