#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "vitalsel/core/error.hpp"

namespace vitalsel {

using Objectives = std::vector<double>;

// a dominates b when a >= b in every objective and a > b in at least one.
// All objectives are maximized.
inline bool dominates(std::span<const double> a, std::span<const double> b)
{
    require(a.size() == b.size(), "dominates: objective vectors differ in length");
    bool strictly = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) {
            return false;
        }
        if (a[i] > b[i]) {
            strictly = true;
        }
    }
    return strictly;
}

// Partitions the population into non-dominated fronts, best first. Indices
// inside each front are ascending.
inline std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const Objectives> pop)
{
    require(!pop.empty(), "fast_nondominated_sort: empty population");
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated_by_me(n);
    std::vector<std::size_t> domination_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);

    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
            if (dominates(pop[p], pop[q])) {
                dominated_by_me[p].push_back(q);
                ++domination_count[q];
            } else if (dominates(pop[q], pop[p])) {
                dominated_by_me[q].push_back(p);
                ++domination_count[p];
            }
        }
    }
    for (std::size_t p = 0; p < n; ++p) {
        if (domination_count[p] == 0) {
            fronts[0].push_back(p);
        }
    }
    while (true) {
        std::vector<std::size_t> next;
        for (auto p : fronts.back()) {
            for (auto q : dominated_by_me[p]) {
                if (--domination_count[q] == 0) {
                    next.push_back(q);
                }
            }
        }
        if (next.empty()) {
            break;
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    return fronts;
}

// Per objective: sort the front, give both ends +inf, and add to every
// interior member the gap between its two neighbours. The raw gaps are used
// unless `normalized`, which divides each objective's gaps by its range.
// A member whose objective vector repeats an earlier member's gets 0 and is
// left out of the neighbour computation.
inline std::vector<double> crowding_distance(std::span<const Objectives> front, bool normalized = false)
{
    require(!front.empty(), "crowding_distance: empty front");
    const std::size_t n = front.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, 0.0);
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), inf);
        return dist;
    }
    std::vector<std::size_t> unique;
    for (std::size_t i = 0; i < n; ++i) {
        const bool repeat = std::any_of(unique.begin(), unique.end(), [&](std::size_t u) { return front[u] == front[i]; });
        if (!repeat) {
            unique.push_back(i);
        }
    }
    const std::size_t u = unique.size();
    if (u <= 2) {
        for (auto i : unique) {
            dist[i] = inf;
        }
        return dist;
    }
    const std::size_t m = front.front().size();
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < m; ++k) {
        order = unique;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return front[a][k] < front[b][k]; });
        dist[order.front()] = inf;
        dist[order.back()] = inf;
        double range = front[order.back()][k] - front[order.front()][k];
        if (!normalized) {
            range = 1.0;
        }
        if (!(range > 0.0)) {
            continue;
        }
        for (std::size_t i = 1; i + 1 < u; ++i) {
            const auto idx = order[i];
            if (std::isinf(dist[idx])) {
                continue;
            }
            dist[idx] += (front[order[i + 1]][k] - front[order[i - 1]][k]) / range;
        }
    }
    return dist;
}

} // namespace vitalsel
