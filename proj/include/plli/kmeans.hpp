#ifndef PLLI_KMEANS_HPP
#define PLLI_KMEANS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "plli/core.hpp"

namespace plli {

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Order-sensitive combination of several words into one seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (auto p : parts) h = mix64(h ^ mix64(p));
    return h;
}

struct KmeansResult {
    RowMatrix centroids;  // effective_k x d
    std::vector<std::size_t> assignment;
    double inertia = 0.0;
    std::size_t effective_k = 0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> inertia_trace;  // inertia after each Lloyd update
};

inline double squared_distance(const double* a, const double* b, Eigen::Index d) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
        const double t = a[j] - b[j];
        s += t * t;
    }
    return s;
}

/// Index of the closest centroid (Euclidean); ties go to the lowest index.
inline std::size_t nearest_centroid(std::span<const double> x, const Eigen::Ref<const RowMatrix>& centroids) {
    if (centroids.rows() == 0) throw Error(ErrorKind::EmptyCentroidList, "no centroids to compare against");
    if (static_cast<std::size_t>(centroids.cols()) != x.size()) {
        throw Error(ErrorKind::DimensionMismatch, "point and centroid dimensions differ");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double dist = squared_distance(x.data(), centroids.row(c).data(), centroids.cols());
        if (dist < best_d) {
            best_d = dist;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

inline std::size_t count_distinct_rows(const Eigen::Ref<const RowMatrix>& points) {
    const auto m = static_cast<std::size_t>(points.rows());
    const Eigen::Index d = points.cols();
    std::vector<std::size_t> idx(m);
    for (std::size_t i = 0; i < m; ++i) idx[i] = i;
    auto row_less = [&](std::size_t a, std::size_t b) {
        for (Eigen::Index j = 0; j < d; ++j) {
            const double x = points(static_cast<Eigen::Index>(a), j);
            const double y = points(static_cast<Eigen::Index>(b), j);
            if (x != y) return x < y;
        }
        return false;
    };
    std::sort(idx.begin(), idx.end(), row_less);
    std::size_t distinct = m == 0 ? 0 : 1;
    for (std::size_t i = 1; i < m; ++i) {
        if (row_less(idx[i - 1], idx[i])) ++distinct;
    }
    return distinct;
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    // 53 random mantissa bits; avoids implementation-defined distribution objects.
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline RowMatrix kmeanspp_init(const Eigen::Ref<const RowMatrix>& points, std::size_t k, std::mt19937_64& rng) {
    const Eigen::Index m = points.rows();
    const Eigen::Index d = points.cols();
    RowMatrix centers(static_cast<Eigen::Index>(k), d);

    auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(m));
    centers.row(0) = points.row(first);

    std::vector<double> mindist(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        mindist[static_cast<std::size_t>(i)] = squared_distance(points.row(i).data(), centers.row(0).data(), d);
    }

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (double v : mindist) total += v;
        const double target = uniform01(rng) * total;
        Eigen::Index chosen = -1;
        double running = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            const double w = mindist[static_cast<std::size_t>(i)];
            if (w <= 0.0) continue;
            running += w;
            chosen = i;
            if (running > target) break;
        }
        centers.row(static_cast<Eigen::Index>(c)) = points.row(chosen);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double dist =
                squared_distance(points.row(i).data(), centers.row(static_cast<Eigen::Index>(c)).data(), d);
            auto& slot = mindist[static_cast<std::size_t>(i)];
            slot = std::min(slot, dist);
        }
    }
    return centers;
}

}  // namespace detail

/**
 * Seeded k-means++ followed by Lloyd iterations until the assignment stops changing or
 * `max_iter` is reached. The random stream depends only on (seed, m, k), so identical inputs
 * give bit-identical results. k is reduced to the number of distinct points when larger.
 */
inline KmeansResult kmeans(const Eigen::Ref<const RowMatrix>& points, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 100) {
    const Eigen::Index m = points.rows();
    const Eigen::Index d = points.cols();
    if (m == 0) throw Error(ErrorKind::EmptyRegion, "k-means needs at least one point");
    if (k == 0) throw Error(ErrorKind::InvalidConfig, "k must be positive");

    const std::size_t distinct = k == 1 ? 1 : count_distinct_rows(points);
    const std::size_t keff = std::min(k, distinct);

    std::mt19937_64 rng(mix_seed({seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k)}));
    KmeansResult out;
    out.effective_k = keff;
    out.centroids = detail::kmeanspp_init(points, keff, rng);

    const auto mz = static_cast<std::size_t>(m);
    constexpr std::size_t unassigned = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> assignment(mz, unassigned);
    std::vector<std::size_t> next(mz);
    std::vector<std::size_t> counts(keff);

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        for (Eigen::Index i = 0; i < m; ++i) {
            next[static_cast<std::size_t>(i)] =
                nearest_centroid(std::span<const double>(points.row(i).data(), static_cast<std::size_t>(d)),
                                 out.centroids);
        }
        if (next == assignment) {
            out.converged = true;
            break;
        }
        assignment = next;
        ++out.iterations;

        // Repair empty clusters: steal the point farthest from its centroid, lowest index on ties.
        std::fill(counts.begin(), counts.end(), 0);
        for (auto a : assignment) ++counts[a];
        for (std::size_t c = 0; c < keff; ++c) {
            if (counts[c] != 0) continue;
            double worst = -1.0;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < mz; ++i) {
                if (counts[assignment[i]] < 2) continue;
                const double dist = squared_distance(points.row(static_cast<Eigen::Index>(i)).data(),
                                                     out.centroids.row(static_cast<Eigen::Index>(assignment[i])).data(), d);
                if (dist > worst) {
                    worst = dist;
                    pick = i;
                }
            }
            --counts[assignment[pick]];
            assignment[pick] = c;
            counts[c] = 1;
            out.centroids.row(static_cast<Eigen::Index>(c)) = points.row(static_cast<Eigen::Index>(pick));
        }

        out.centroids.setZero();
        for (std::size_t i = 0; i < mz; ++i) {
            out.centroids.row(static_cast<Eigen::Index>(assignment[i])) += points.row(static_cast<Eigen::Index>(i));
        }
        for (std::size_t c = 0; c < keff; ++c) {
            out.centroids.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
        }

        double inertia = 0.0;
        for (std::size_t i = 0; i < mz; ++i) {
            inertia += squared_distance(points.row(static_cast<Eigen::Index>(i)).data(),
                                        out.centroids.row(static_cast<Eigen::Index>(assignment[i])).data(), d);
        }
        out.inertia_trace.push_back(inertia);
    }

    out.assignment = std::move(assignment);
    out.inertia = out.inertia_trace.empty() ? 0.0 : out.inertia_trace.back();
    return out;
}

}  // namespace plli

#endif  // PLLI_KMEANS_HPP
