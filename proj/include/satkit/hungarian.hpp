#pragma once

// Assignment solver for speaker-label mapping. The core is the O(n^3)
// potential-based Hungarian method on a square cost matrix; on top of it,
// max_agreement_assignment handles rectangular agreement (count) matrices and
// canonical_max_agreement makes the tie-break deterministic: rows are fixed
// in order to the lowest column index that still attains the optimal total.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

namespace satkit {

namespace detail {

// Minimizes total cost over a square matrix; returns row -> column.
inline std::vector<int> hungarian_min_cost(
    const std::vector<std::vector<long long>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

    std::vector<long long> u(n + 1, 0), v(n + 1, 0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<long long> minv(n + 1, kInf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            long long delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const long long cand = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cand < minv[j]) {
                    minv[j] = cand;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
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
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j]) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace detail

struct AssignmentResult {
    std::vector<int> row_to_col;  // -1 = row unassigned (only when rows > cols)
    long long total = 0;          // summed agreement over assigned pairs
};

// Maximizes total agreement on a rectangular non-negative count matrix.
// Exactly min(rows, cols) pairs are assigned: the smaller side is fully
// matched, surplus rows stay at -1.
inline AssignmentResult max_agreement_assignment(
    const std::vector<std::vector<long long>>& counts) {
    const std::size_t rows = counts.size();
    const std::size_t cols = rows ? counts[0].size() : 0;
    AssignmentResult result;
    result.row_to_col.assign(rows, -1);
    if (rows == 0 || cols == 0) return result;

    const std::size_t n = std::max(rows, cols);
    long long max_count = 0;
    for (const auto& row : counts) {
        for (long long c : row) max_count = std::max(max_count, c);
    }
    // pad to square; dummy cells carry zero agreement
    std::vector<std::vector<long long>> cost(n, std::vector<long long>(n, max_count));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) cost[i][j] = max_count - counts[i][j];
    }

    const auto assign = detail::hungarian_min_cost(cost);
    for (std::size_t i = 0; i < rows; ++i) {
        const int j = assign[i];
        if (j >= 0 && static_cast<std::size_t>(j) < cols) {
            result.row_to_col[i] = j;
            result.total += counts[i][j];
        }
    }
    return result;
}

// Same optimum, deterministic selection among ties: row by row, the lowest
// column index that preserves the globally optimal total; a row is left
// unassigned only when no column can (surplus rows).
inline AssignmentResult canonical_max_agreement(
    const std::vector<std::vector<long long>>& counts) {
    const std::size_t rows = counts.size();
    const std::size_t cols = rows ? counts[0].size() : 0;
    AssignmentResult result;
    result.row_to_col.assign(rows, -1);
    if (rows == 0 || cols == 0) return result;

    const long long optimum = max_agreement_assignment(counts).total;

    std::vector<char> col_used(cols, 0);
    std::vector<std::size_t> free_rows;
    for (std::size_t i = 0; i < rows; ++i) free_rows.push_back(i);

    long long fixed_sum = 0;
    auto rest_total = [&](std::size_t skip_row, std::size_t take_col,
                          bool use_col) -> long long {
        std::vector<std::vector<long long>> sub;
        for (std::size_t i : free_rows) {
            if (i == skip_row) continue;
            std::vector<long long> row;
            for (std::size_t j = 0; j < cols; ++j) {
                if (col_used[j] || (use_col && j == take_col)) continue;
                row.push_back(counts[i][j]);
            }
            sub.push_back(std::move(row));
        }
        if (sub.empty() || sub[0].empty()) return 0;
        return max_agreement_assignment(sub).total;
    };

    for (std::size_t i = 0; i < rows; ++i) {
        bool fixed = false;
        for (std::size_t j = 0; j < cols && !fixed; ++j) {
            if (col_used[j]) continue;
            if (fixed_sum + counts[i][j] + rest_total(i, j, true) == optimum) {
                result.row_to_col[i] = static_cast<int>(j);
                fixed_sum += counts[i][j];
                col_used[j] = 1;
                fixed = true;
            }
        }
        // else: this row stays unassigned (possible only when rows > cols)
        free_rows.erase(std::find(free_rows.begin(), free_rows.end(), i));
    }

    result.total = fixed_sum;
    return result;
}

}  // namespace satkit
