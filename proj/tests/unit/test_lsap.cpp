#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "rlink/lsap.hpp"
#include "rlink/random.hpp"

using namespace rlink;

namespace {

double brute_min(const CostMatrix& c) {
    std::vector<std::size_t> cols(c.cols());
    std::iota(cols.begin(), cols.end(), 0);
    double best = kForbidden;
    // Every injection rows -> cols, via permutations of the columns.
    do {
        double s = 0.0;
        for (std::size_t r = 0; r < c.rows(); ++r) s += c(r, cols[r]);
        best = std::min(best, s);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

}  // namespace

TEST_SUITE("lsap") {

TEST_CASE("small square") {
    CostMatrix c(3, 3);
    const double v[3][3] = {{4, 1, 3}, {2, 0, 5}, {3, 2, 2}};
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) c(r, k) = v[r][k];
    const auto a = solve_lsap(c);
    CHECK(a.cost == 5.0);
    CHECK(a.column_of_row == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("rectangular against brute force") {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t rows = 1 + uniform_index(rng, 4), cols = rows + uniform_index(rng, 3);
        CostMatrix c(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t k = 0; k < cols; ++k) c(r, k) = std::round(uniform01(rng) * 20.0) - 5.0;
        const auto a = solve_lsap(c);
        CHECK(a.cost == doctest::Approx(brute_min(c)).epsilon(1e-12));
        std::vector<bool> used(cols, false);
        double s = 0.0;
        for (std::size_t r = 0; r < rows; ++r) {
            CHECK_FALSE(used[a.column_of_row[r]]);
            used[a.column_of_row[r]] = true;
            s += c(r, a.column_of_row[r]);
        }
        CHECK(s == a.cost);
    }
}

TEST_CASE("forbidden entries") {
    CostMatrix c(2, 2, kForbidden);
    c(0, 1) = 1.0;
    c(1, 0) = 2.0;
    const auto a = solve_lsap(c);
    CHECK(a.column_of_row == std::vector<std::size_t>{1, 0});
    CHECK(a.cost == 3.0);

    CostMatrix bad(2, 2, kForbidden);
    bad(0, 0) = 1.0;
    bad(1, 0) = 1.0;
    CHECK_THROWS_AS(solve_lsap(bad), std::runtime_error);
    CHECK_THROWS_AS(solve_lsap(CostMatrix(3, 2)), std::invalid_argument);
}

TEST_CASE("empty problem") {
    const auto a = solve_lsap(CostMatrix(0, 3));
    CHECK(a.column_of_row.empty());
    CHECK(a.cost == 0.0);
}

}  // TEST_SUITE
