#ifndef PLLI_DP_PARTITIONER_HPP
#define PLLI_DP_PARTITIONER_HPP

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "plli/core.hpp"
#include "plli/kmeans.hpp"
#include "plli/local_models.hpp"
#include "plli/segment_cost.hpp"

/**
 * @file dp_partitioner.hpp
 * @brief Value/index tables over ordered range partitions and the model built from them.
 *
 * Table coordinates are counts: V(p, q) is the minimal unnormalized cost of splitting the
 * first p sorted points into q range intervals, and Phi(p, q) is the number of points in the
 * first q-1 intervals at the optimum, so interval q covers sorted positions Phi+1 .. p
 * (1-based). Every interval is non-empty.
 */

namespace plli {

/// Worker cap from PLLI_THREADS, otherwise the hardware concurrency.
inline std::size_t worker_count() {
    if (const char* env = std::getenv("PLLI_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Which cells to fill. `needed` skips row H except at p = n, which is all a fit consumes.
enum class TableScope { needed, full };

class ValueIndexTables {
public:
    ValueIndexTables() = default;
    ValueIndexTables(std::size_t n, std::size_t h)
        : n_(n), h_(h),
          value_((n + 1) * (h + 1), std::numeric_limits<double>::quiet_NaN()),
          split_((n + 1) * (h + 1), 0) {}

    std::size_t n() const { return n_; }
    std::size_t h() const { return h_; }

    double value(std::size_t p, std::size_t q) const { return value_[p * (h_ + 1) + q]; }
    std::size_t split(std::size_t p, std::size_t q) const { return split_[p * (h_ + 1) + q]; }
    bool evaluated(std::size_t p, std::size_t q) const { return !std::isnan(value(p, q)); }

    void set(std::size_t p, std::size_t q, double v, std::size_t s) {
        value_[p * (h_ + 1) + q] = v;
        split_[p * (h_ + 1) + q] = s;
    }

    friend bool operator==(const ValueIndexTables& a, const ValueIndexTables& b) {
        if (a.n_ != b.n_ || a.h_ != b.h_ || a.split_ != b.split_) return false;
        for (std::size_t k = 0; k < a.value_.size(); ++k) {
            const double x = a.value_[k];
            const double y = b.value_[k];
            if (!(x == y || (std::isnan(x) && std::isnan(y)))) return false;
        }
        return true;
    }

private:
    std::size_t n_ = 0;
    std::size_t h_ = 0;
    std::vector<double> value_;
    std::vector<std::size_t> split_;
};

/**
 * Segment cost provider used by the DP. For W = 1 constant models the cost comes from an
 * O(1) prefix oracle (mean for squared loss, median for absolute loss); otherwise every
 * query runs `segment_cost`.
 */
class SegmentCoster {
public:
    SegmentCoster(const SortedDataset& sd, const FitConfig& cfg) : sd_(sd), cfg_(cfg) {
        if (cfg.w == 1 && cfg.model_family == ModelFamily::constant) {
            if (cfg.loss == Loss::squared) {
                prefix_.emplace(sd.sorted_target());
            } else {
                median_.emplace(sd.sorted_target());
            }
        }
    }

    bool fast() const { return prefix_.has_value() || median_.has_value(); }

    /// Cost of 0-based inclusive segment [i..j].
    double operator()(std::size_t i, std::size_t j) const {
        if (prefix_) return prefix_->query(i, j);
        if (median_) return median_->query(i, j);
        return segment_cost(sd_, i, j, cfg_).cost;
    }

private:
    const SortedDataset& sd_;
    const FitConfig& cfg_;
    std::optional<PrefixOracle> prefix_;
    std::optional<MedianOracle> median_;
};

namespace detail {

// Fills costs[s] = G(s, p) (1-based start s) for every start in `starts`.
inline void fill_column(const SegmentCoster& coster, std::size_t p, const std::vector<std::size_t>& starts,
                        std::vector<double>& costs) {
    const std::size_t workers = coster.fast() ? 1 : std::min(worker_count(), starts.size());
    if (workers <= 1) {
        for (std::size_t s : starts) costs[s] = coster(s - 1, p - 1);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t k = w; k < starts.size(); k += workers) {
                const std::size_t s = starts[k];
                costs[s] = coster(s - 1, p - 1);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail

/**
 * Fills the value and index tables. With stride 1 every split count 1..p-1 is scanned; with
 * stride delta only counts 1, delta+1, 2*delta+1, ... are. Splits that would leave an earlier
 * interval empty are skipped, and ties go to the smallest split. V(1, q) = 0 and
 * V(p, 1) = G(1, p); cells with fewer points than intervals mirror V(p, p).
 */
inline ValueIndexTables compute_value_index(const SortedDataset& sd, const FitConfig& cfg,
                                            TableScope scope = TableScope::needed) {
    cfg.validate();
    const std::size_t n = sd.size();
    const std::size_t H = cfg.h;
    if (n < H) {
        throw Error(ErrorKind::InsufficientData,
                    std::to_string(n) + " points cannot form " + std::to_string(H) + " non-empty intervals");
    }

    constexpr double inf = std::numeric_limits<double>::infinity();
    ValueIndexTables t(n, H);
    const SegmentCoster coster(sd, cfg);

    for (std::size_t q = 1; q <= H; ++q) t.set(1, q, 0.0, 0);

    std::vector<double> column(n + 1, inf);
    std::vector<std::size_t> starts;
    for (std::size_t p = 2; p <= n; ++p) {
        const std::size_t top = (scope == TableScope::full || p == n) ? H : H - 1;
        if (top == 0) continue;

        starts.clear();
        starts.push_back(1);
        if (top >= 2) {
            for (std::size_t split = 1; split < p; split += cfg.stride) starts.push_back(split + 1);
        }
        detail::fill_column(coster, p, starts, column);

        t.set(p, 1, column[1], 0);
        for (std::size_t q = 2; q <= top; ++q) {
            if (p < q) {
                t.set(p, q, t.value(p, p), t.split(p, p));
                continue;
            }
            double best = inf;
            std::size_t best_split = 0;
            for (std::size_t split = 1; split < p; split += cfg.stride) {
                if (split < q - 1) continue;
                const double prev = t.value(split, q - 1);
                if (!std::isfinite(prev)) continue;
                const double v = prev + column[split + 1];
                if (v < best) {
                    best = v;
                    best_split = split;
                }
            }
            t.set(p, q, best, best_split);
        }
    }
    if (!std::isfinite(t.value(n, H))) {
        throw Error(ErrorKind::InsufficientData, "stride " + std::to_string(cfg.stride) +
                                                     " leaves no admissible split for H=" + std::to_string(H));
    }
    return t;
}

/// Builds a model from explicit 0-based inclusive sorted segments (ascending, covering 0..n-1).
inline PlliModel assemble_model(const SortedDataset& sd, const FitConfig& cfg,
                                const std::vector<std::pair<std::size_t, std::size_t>>& segments,
                                SegmentCostCache& cache, double total_cost, std::string algorithm) {
    const auto& y = sd.sorted_target();
    PlliModel model;
    model.config = cfg;
    model.n_train = sd.size();
    model.column_names = sd.base().column_names();
    model.target_name = sd.base().target_name();
    model.algorithm = std::move(algorithm);

    for (std::size_t r = 0; r + 1 < segments.size(); ++r) {
        model.boundaries.push_back(0.5 * (y[segments[r].second] + y[segments[r + 1].first]));
    }
    for (std::size_t r = 0; r < segments.size(); ++r) {
        const auto [first, last] = segments[r];
        Interval interval;
        interval.first = first;
        interval.last = last;
        interval.f_low = r == 0 ? y[first] : model.boundaries[r - 1];
        interval.f_high = r + 1 == segments.size() ? y[last] : model.boundaries[r];
        interval.regions = cache.get(first, last).regions;
        model.intervals.push_back(std::move(interval));
    }
    model.training_risk = total_cost / static_cast<double>(sd.size());
    return model;
}

/**
 * Walks the index table back from (n, H) and attaches the cached per-segment regions.
 * training_risk is V(n, H) / n.
 */
inline PlliModel reconstruct_partition(const ValueIndexTables& tables, const SortedDataset& sd, const FitConfig& cfg,
                                       SegmentCostCache& cache) {
    const std::size_t n = sd.size();
    const std::size_t H = cfg.h;
    if (tables.n() != n || tables.h() != H) {
        throw Error(ErrorKind::InconsistentTables, "tables were computed for a different dataset or H");
    }
    if (!tables.evaluated(n, H) || !std::isfinite(tables.value(n, H))) {
        throw Error(ErrorKind::InconsistentTables, "V(n, H) was not evaluated");
    }

    std::vector<std::pair<std::size_t, std::size_t>> segments;
    std::size_t upper = n;
    for (std::size_t q = H; q >= 1; --q) {
        const std::size_t lower = q == 1 ? 0 : tables.split(upper, q);
        if (lower >= upper || (q > 1 && lower < q - 1)) {
            throw Error(ErrorKind::InconsistentTables, "index table yields an empty or inverted interval");
        }
        segments.emplace_back(lower, upper - 1);
        upper = lower;
    }
    std::reverse(segments.begin(), segments.end());
    return assemble_model(sd, cfg, segments, cache, tables.value(n, H), "op");
}

inline PlliModel reconstruct_partition(const ValueIndexTables& tables, const SortedDataset& sd, const FitConfig& cfg) {
    SegmentCostCache cache(sd, cfg);
    return reconstruct_partition(tables, sd, cfg, cache);
}

/// Sort, fill the tables, reconstruct.
inline PlliModel fit_plli(const Dataset& ds, const FitConfig& cfg) {
    const SortedDataset sd = sort_by_target(ds);
    const ValueIndexTables tables = compute_value_index(sd, cfg);
    return reconstruct_partition(tables, sd, cfg);
}

struct Prediction {
    double value = 0.0;
    std::size_t region_id = 0;
};

/// Interval index for a black-box value: intervals are (a_{r-1}, a_r], outermost unbounded.
inline std::size_t route_interval(const PlliModel& model, double f_value) {
    const auto it = std::lower_bound(model.boundaries.begin(), model.boundaries.end(), f_value);
    return static_cast<std::size_t>(it - model.boundaries.begin());
}

/**
 * Applies the surrogate. With `f_value` the interval is chosen by the black-box value and the
 * region by the nearest centroid inside it. Without it the globally nearest centroid is used
 * (deployment mode for feature-only inputs).
 */
inline Prediction predict(const PlliModel& model, std::span<const double> x,
                          std::optional<double> f_value = std::nullopt) {
    if (x.size() != model.dim()) {
        throw Error(ErrorKind::DimensionMismatch, "feature vector length differs from model dimension");
    }

    std::size_t first_interval = 0;
    std::size_t last_interval = model.intervals.size();
    if (f_value) {
        first_interval = std::min(route_interval(model, *f_value), model.intervals.size() - 1);
        last_interval = first_interval + 1;
    }

    std::size_t offset = 0;
    for (std::size_t r = 0; r < first_interval; ++r) offset += model.intervals[r].regions.size();

    double best = std::numeric_limits<double>::infinity();
    std::size_t best_id = offset;
    const Region* best_region = nullptr;
    std::size_t id = offset;
    for (std::size_t r = first_interval; r < last_interval; ++r) {
        for (const auto& region : model.intervals[r].regions) {
            const double d = squared_distance(x.data(), region.centroid.data(), static_cast<Eigen::Index>(x.size()));
            if (d < best || best_region == nullptr) {
                best = d;
                best_id = id;
                best_region = &region;
            }
            ++id;
        }
    }
    if (best_region == nullptr) throw Error(ErrorKind::EmptyCentroidList, "model has no regions");
    return {predict_local(best_region->model, x), best_id};
}

}  // namespace plli

#endif  // PLLI_DP_PARTITIONER_HPP
