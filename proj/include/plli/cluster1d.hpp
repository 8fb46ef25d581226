#ifndef PLLI_CLUSTER1D_HPP
#define PLLI_CLUSTER1D_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "plli/core.hpp"
#include "plli/local_models.hpp"
#include "plli/segment_cost.hpp"

namespace plli {

/**
 * Contiguous clustering of an ascending sequence. `boundaries[k]` is the sorted position where
 * cluster k+1 starts; cluster k spans [start_k, start_{k+1}).
 */
struct Clustering1D {
    std::vector<double> sorted_values;
    std::vector<std::size_t> boundaries;
    std::vector<double> centers;
    double total_cost = 0.0;
    Loss loss = Loss::squared;

    std::size_t k() const { return centers.size(); }
    std::size_t cluster_begin(std::size_t c) const { return c == 0 ? 0 : boundaries[c - 1]; }
    std::size_t cluster_end(std::size_t c) const { return c < boundaries.size() ? boundaries[c] : sorted_values.size(); }
};

namespace detail {

inline void check_cluster_args(std::size_t n, std::size_t k) {
    if (n == 0) throw Error(ErrorKind::EmptyRegion, "no values to cluster");
    if (k == 0) throw Error(ErrorKind::InvalidConfig, "K must be positive");
    if (k > n) throw Error(ErrorKind::KTooLarge, "K=" + std::to_string(k) + " exceeds " + std::to_string(n) + " values");
}

// Centers and exact cost from explicit boundaries, using direct per-cluster fits.
inline Clustering1D finish_clustering(std::vector<double> sorted, std::vector<std::size_t> boundaries, Loss loss) {
    Clustering1D out;
    out.sorted_values = std::move(sorted);
    out.boundaries = std::move(boundaries);
    out.loss = loss;
    const std::size_t k = out.boundaries.size() + 1;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t b = out.cluster_begin(c);
        const std::size_t e = out.cluster_end(c);
        const FitResult fit = fit_constant(std::span<const double>(out.sorted_values).subspan(b, e - b), loss);
        out.centers.push_back(fit.model.intercept);
        out.total_cost += fit.cost;
    }
    return out;
}

}  // namespace detail

/**
 * Globally optimal contiguous K-clustering (the H = K, W = 1, constant-model case of the range
 * DP). Segment costs come from prefix oracles; each layer is solved by divide and conquer over
 * the monotone optimal split, which holds for both the squared and absolute costs on sorted data.
 */
inline Clustering1D cluster_1d(std::span<const double> values, std::size_t K, Loss loss = Loss::squared) {
    detail::check_cluster_args(values.size(), K);
    for (double v : values) {
        if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteValue, "values must be finite");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();

    std::function<double(std::size_t, std::size_t)> cost;
    PrefixOracle prefix;
    MedianOracle median;
    if (loss == Loss::squared) {
        prefix = PrefixOracle(sorted);
        cost = [&](std::size_t i, std::size_t j) { return prefix.query(i, j); };
    } else {
        median = MedianOracle(sorted);
        cost = [&](std::size_t i, std::size_t j) { return median.query(i, j); };
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    // prev[i]: best cost of the first i values in (k-1) clusters.
    std::vector<double> prev(n + 1, inf);
    std::vector<double> cur(n + 1, inf);
    std::vector<std::vector<std::size_t>> split(K + 1, std::vector<std::size_t>(n + 1, 0));
    for (std::size_t i = 1; i <= n; ++i) prev[i] = cost(0, i - 1);

    for (std::size_t k = 2; k <= K; ++k) {
        std::fill(cur.begin(), cur.end(), inf);
        auto& arg = split[k];
        // cur[i] = min_{s in [k-1, i-1]} prev[s] + cost(s, i-1)
        std::function<void(std::size_t, std::size_t, std::size_t, std::size_t)> solve =
            [&](std::size_t lo, std::size_t hi, std::size_t opt_lo, std::size_t opt_hi) {
                if (lo > hi) return;
                const std::size_t mid = lo + (hi - lo) / 2;
                double best = inf;
                std::size_t best_s = std::max(opt_lo, k - 1);
                const std::size_t s_end = std::min(opt_hi, mid - 1);
                for (std::size_t s = std::max(opt_lo, k - 1); s <= s_end; ++s) {
                    const double v = prev[s] + cost(s, mid - 1);
                    if (v < best) {
                        best = v;
                        best_s = s;
                    }
                }
                cur[mid] = best;
                arg[mid] = best_s;
                if (mid > lo) solve(lo, mid - 1, opt_lo, best_s);
                solve(mid + 1, hi, best_s, opt_hi);
            };
        solve(k, n, k - 1, n - 1);
        std::swap(prev, cur);
    }

    std::vector<std::size_t> boundaries(K - 1);
    std::size_t upper = n;
    for (std::size_t k = K; k >= 2; --k) {
        upper = split[k][upper];
        boundaries[k - 2] = upper;
    }
    return detail::finish_clustering(std::move(sorted), std::move(boundaries), loss);
}

/// Exhaustive scan of all C(n-1, K-1) contiguous partitions. Test oracle; n <= 20.
inline Clustering1D brute_force_1d(std::span<const double> values, std::size_t K, Loss loss = Loss::squared) {
    if (values.size() > 20) throw Error(ErrorKind::TooLargeForOracle, "exhaustive oracle is limited to 20 values");
    detail::check_cluster_args(values.size(), K);
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::span<const double> all(sorted);

    auto segment = [&](std::size_t b, std::size_t e) { return fit_constant(all.subspan(b, e - b), loss).cost; };

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_cuts;
    std::vector<std::size_t> cuts;
    std::function<void(std::size_t, double)> enumerate = [&](std::size_t start, double acc) {
        if (cuts.size() == K - 1) {
            const double total = acc + segment(start, n);
            if (total < best) {
                best = total;
                best_cuts = cuts;
            }
            return;
        }
        const std::size_t remaining = K - 1 - cuts.size();
        for (std::size_t c = start + 1; c + remaining <= n; ++c) {
            cuts.push_back(c);
            enumerate(c, acc + segment(start, c));
            cuts.pop_back();
        }
    };
    enumerate(0, 0.0);
    return detail::finish_clustering(std::move(sorted), std::move(best_cuts), loss);
}

/**
 * For every adjacent pair of clusters with centers m_a <= m_b, the left cluster lies at or
 * below (m_a + m_b) / 2 and the right cluster at or above it.
 */
inline bool check_midpoint_property(const Clustering1D& c, std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() != c.sorted_values.size() || c.boundaries.size() + 1 != c.centers.size()) return false;

    for (std::size_t a = 0; a + 1 < c.k(); ++a) {
        const double ma = c.centers[a];
        const double mb = c.centers[a + 1];
        if (ma > mb) return false;
        const double mid = 0.5 * (ma + mb);
        const double tol = 1e-12 * std::max(1.0, std::abs(mid));
        for (std::size_t i = c.cluster_begin(a); i < c.cluster_end(a); ++i) {
            if (sorted[i] > mid + tol) return false;
        }
        for (std::size_t i = c.cluster_begin(a + 1); i < c.cluster_end(a + 1); ++i) {
            if (sorted[i] < mid - tol) return false;
        }
    }
    return true;
}

}  // namespace plli

#endif  // PLLI_CLUSTER1D_HPP
