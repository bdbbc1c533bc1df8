#include "spinach/eval/assignment.hpp"

#include <limits>

namespace spinach::eval {

namespace {

/// Minimum-cost assignment for n <= m; returns row -> column.
std::vector<int> min_cost_assignment(const std::vector<std::vector<std::int64_t>>& cost, std::size_t n, std::size_t m)
{
    constexpr auto inf = std::numeric_limits<std::int64_t>::max() / 4;
    // 1-based potentials; column 0 is the virtual start.
    std::vector<std::int64_t> u(n + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> owner(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        owner[0] = i;
        std::size_t j0 = 0;
        std::vector<std::int64_t> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = owner[j0];
            std::size_t j1 = 0;
            std::int64_t delta = inf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                auto cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
            std::size_t j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> assignment(n, -1);
    for (std::size_t j = 1; j <= m; ++j) {
        if (owner[j] != 0) {
            assignment[owner[j] - 1] = static_cast<int>(j - 1);
        }
    }
    return assignment;
}

} // namespace

std::vector<int> max_weight_assignment(const std::vector<std::vector<std::int64_t>>& weights)
{
    const std::size_t rows = weights.size();
    const std::size_t cols = rows == 0 ? 0 : weights.front().size();
    if (rows == 0 || cols == 0) {
        return std::vector<int>(rows, -1);
    }
    if (rows <= cols) {
        std::vector<std::vector<std::int64_t>> cost(rows, std::vector<std::int64_t>(cols));
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) {
                cost[i][j] = -weights[i][j];
            }
        }
        return min_cost_assignment(cost, rows, cols);
    }
    std::vector<std::vector<std::int64_t>> cost(cols, std::vector<std::int64_t>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            cost[j][i] = -weights[i][j];
        }
    }
    auto by_col = min_cost_assignment(cost, cols, rows);
    std::vector<int> assignment(rows, -1);
    for (std::size_t j = 0; j < cols; ++j) {
        if (by_col[j] >= 0) {
            assignment[static_cast<std::size_t>(by_col[j])] = static_cast<int>(j);
        }
    }
    return assignment;
}

} // namespace spinach::eval
