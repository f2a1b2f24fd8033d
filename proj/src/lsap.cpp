#include "rlink/lsap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rlink {

Assignment solve_lsap(const CostMatrix& cost) {
    const std::size_t n = cost.rows();
    const std::size_t m = cost.cols();
    if (n > m) throw std::invalid_argument("solve_lsap: more rows than columns");
    Assignment result;
    if (n == 0) return result;

    const double inf = std::numeric_limits<double>::infinity();
    // 1-based potentials; column 0 is the virtual root of each augmenting search.
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<std::size_t> row_of_col(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);

    for (std::size_t r = 1; r <= n; ++r) {
        row_of_col[0] = r;
        std::size_t c0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[c0] = 1;
            const std::size_t r0 = row_of_col[c0];
            double delta = inf;
            std::size_t c1 = 0;
            for (std::size_t c = 1; c <= m; ++c) {
                if (used[c]) continue;
                const double a = cost(r0 - 1, c - 1);
                if (a != kForbidden) {
                    const double cur = a - u[r0] - v[c];
                    if (cur < minv[c]) {
                        minv[c] = cur;
                        way[c] = c0;
                    }
                }
                if (minv[c] < delta) {
                    delta = minv[c];
                    c1 = c;
                }
            }
            if (c1 == 0 || !std::isfinite(delta)) {
                throw std::runtime_error("solve_lsap: no feasible assignment");
            }
            for (std::size_t c = 0; c <= m; ++c) {
                if (used[c]) {
                    u[row_of_col[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            c0 = c1;
        } while (row_of_col[c0] != 0);
        do {
            const std::size_t c1 = way[c0];
            row_of_col[c0] = row_of_col[c1];
            c0 = c1;
        } while (c0 != 0);
    }

    result.column_of_row.assign(n, 0);
    for (std::size_t c = 1; c <= m; ++c) {
        if (row_of_col[c] != 0) result.column_of_row[row_of_col[c] - 1] = c - 1;
    }
    for (std::size_t r = 0; r < n; ++r) result.cost += cost(r, result.column_of_row[r]);
    return result;
}

}  // namespace rlink
