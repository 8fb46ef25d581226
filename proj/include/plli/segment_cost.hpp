#ifndef PLLI_SEGMENT_COST_HPP
#define PLLI_SEGMENT_COST_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "plli/core.hpp"
#include "plli/kmeans.hpp"
#include "plli/local_models.hpp"

/**
 * @file segment_cost.hpp
 * @brief Cost of covering a contiguous run of sorted points with W k-means regions.
 *
 * Segment indices here are 0-based and inclusive on both ends: [i..j] refers to sorted
 * positions i, i+1, ..., j.
 */

namespace plli {

struct SegmentView {
    std::size_t first = 0;
    Eigen::Map<const RowMatrix> features;
    std::span<const double> target;

    std::size_t size() const { return target.size(); }
};

inline SegmentView segment_slice(const SortedDataset& sd, std::size_t i, std::size_t j) {
    if (i > j) throw Error(ErrorKind::InvertedRange, "segment start exceeds segment end");
    if (j >= sd.size()) throw Error(ErrorKind::IndexOutOfRange, "segment end beyond dataset");
    const std::size_t m = j - i + 1;
    const auto d = static_cast<Eigen::Index>(sd.dim());
    return SegmentView{
        i,
        Eigen::Map<const RowMatrix>(sd.sorted_features().data() + static_cast<Eigen::Index>(i) * d,
                                    static_cast<Eigen::Index>(m), d),
        std::span<const double>(sd.sorted_target().data() + i, m),
    };
}

struct CostRecord {
    double cost = 0.0;
    std::vector<Region> regions;  // one per k-means cell, in cluster-index order
    std::size_t effective_w = 0;
};

namespace detail {

inline std::vector<double> column_stddev(const Eigen::Ref<const RowMatrix>& X) {
    const Eigen::RowVectorXd mean = X.colwise().mean();
    std::vector<double> out(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double var = (X.col(c).array() - mean(c)).square().mean();
        out[static_cast<std::size_t>(c)] = std::sqrt(var);
    }
    return out;
}

inline FitResult fit_region(const Eigen::Ref<const RowMatrix>& X, std::span<const double> y, const FitConfig& cfg) {
    if (cfg.model_family == ModelFamily::constant) {
        return fit_constant(y, cfg.loss, static_cast<std::size_t>(X.cols()));
    }
    return fit_linear(X, y, cfg.ridge_epsilon, cfg.clip);
}

}  // namespace detail

/// Seed used for the k-means run of segment [i..j].
inline std::uint64_t segment_seed(std::uint64_t seed, std::size_t i, std::size_t j) {
    return mix_seed({seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
}

/**
 * Runs k-means (k = W) on the segment's features, fits one local model per cell and sums
 * their costs.
 */
inline CostRecord segment_cost(const SortedDataset& sd, std::size_t i, std::size_t j, const FitConfig& cfg) {
    const SegmentView view = segment_slice(sd, i, j);
    const auto d = static_cast<Eigen::Index>(sd.dim());

    CostRecord rec;
    if (cfg.w == 1) {
        FitResult fit = detail::fit_region(view.features, view.target, cfg);
        Region region;
        region.centroid.resize(static_cast<std::size_t>(d));
        Eigen::Map<Eigen::RowVectorXd>(region.centroid.data(), d) = view.features.colwise().mean();
        region.model = std::move(fit.model);
        region.size = view.size();
        region.feature_stddev = detail::column_stddev(view.features);
        rec.cost = fit.cost;
        rec.regions.push_back(std::move(region));
        rec.effective_w = 1;
        return rec;
    }

    const KmeansResult km = kmeans(view.features, cfg.w, segment_seed(cfg.seed, i, j));
    rec.effective_w = km.effective_k;

    std::vector<std::vector<std::size_t>> members(km.effective_k);
    for (std::size_t r = 0; r < km.assignment.size(); ++r) members[km.assignment[r]].push_back(r);

    for (std::size_t u = 0; u < km.effective_k; ++u) {
        const auto& idx = members[u];
        RowMatrix X(static_cast<Eigen::Index>(idx.size()), d);
        std::vector<double> y(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            X.row(static_cast<Eigen::Index>(r)) = view.features.row(static_cast<Eigen::Index>(idx[r]));
            y[r] = view.target[idx[r]];
        }
        FitResult fit = detail::fit_region(X, y, cfg);
        Region region;
        region.centroid.assign(km.centroids.row(static_cast<Eigen::Index>(u)).data(),
                               km.centroids.row(static_cast<Eigen::Index>(u)).data() + d);
        region.model = std::move(fit.model);
        region.size = idx.size();
        region.feature_stddev = detail::column_stddev(X);
        rec.cost += fit.cost;
        rec.regions.push_back(std::move(region));
    }
    return rec;
}

namespace detail {

// Error-free transformation: a + b == s + e exactly.
inline void two_sum(double a, double b, double& s, double& e) {
    s = a + b;
    const double bb = s - a;
    e = (a - (s - bb)) + (b - bb);
}

// Compensated running sums stored as (hi, lo) pairs.
struct CompensatedPrefix {
    std::vector<double> hi;
    std::vector<double> lo;

    void build(std::span<const double> v) {
        hi.assign(v.size() + 1, 0.0);
        lo.assign(v.size() + 1, 0.0);
        for (std::size_t k = 0; k < v.size(); ++k) {
            double s = 0.0;
            double e = 0.0;
            two_sum(hi[k], v[k], s, e);
            hi[k + 1] = s;
            lo[k + 1] = lo[k] + e;
        }
    }

    // Sum of v[i..j].
    double range(std::size_t i, std::size_t j) const { return (hi[j + 1] - hi[i]) + (lo[j + 1] - lo[i]); }
};

inline double shift_for(std::span<const double> values) {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

}  // namespace detail

/**
 * O(1) within-segment sum of squared deviations from prefix sums of y and y^2. Values are
 * shifted by their global mean before accumulation to limit cancellation.
 */
class PrefixOracle {
public:
    PrefixOracle() = default;

    explicit PrefixOracle(std::span<const double> values) : shift_(detail::shift_for(values)) {
        std::vector<double> centered(values.size());
        std::vector<double> squares(values.size());
        for (std::size_t k = 0; k < values.size(); ++k) {
            centered[k] = values[k] - shift_;
            squares[k] = centered[k] * centered[k];
        }
        sum_.build(centered);
        sumsq_.build(squares);
    }

    std::size_t size() const { return sum_.hi.empty() ? 0 : sum_.hi.size() - 1; }

    double query(std::size_t i, std::size_t j) const {
        if (i > j) throw Error(ErrorKind::InvertedRange, "segment start exceeds segment end");
        if (j >= size()) throw Error(ErrorKind::IndexOutOfRange, "segment end beyond oracle");
        const double m = static_cast<double>(j - i + 1);
        const double s = sum_.range(i, j);
        const double q = sumsq_.range(i, j);
        return std::max(0.0, q - s * s / m);
    }

    /// Mean of values[i..j].
    double mean(std::size_t i, std::size_t j) const {
        return shift_ + sum_.range(i, j) / static_cast<double>(j - i + 1);
    }

private:
    double shift_ = 0.0;
    detail::CompensatedPrefix sum_;
    detail::CompensatedPrefix sumsq_;
};

inline PrefixOracle build_prefix_oracle(std::span<const double> values) { return PrefixOracle(values); }

/**
 * O(1) sum of absolute deviations from the lower median for segments of an ascending
 * sequence: the median of values[i..j] sits at position i + (m-1)/2.
 */
class MedianOracle {
public:
    MedianOracle() = default;

    explicit MedianOracle(std::span<const double> sorted_values)
        : values_(sorted_values.begin(), sorted_values.end()), shift_(detail::shift_for(sorted_values)) {
        for (std::size_t k = 1; k < values_.size(); ++k) {
            if (values_[k] < values_[k - 1]) throw Error(ErrorKind::InvalidConfig, "median oracle needs ascending values");
        }
        std::vector<double> centered(values_.size());
        for (std::size_t k = 0; k < values_.size(); ++k) centered[k] = values_[k] - shift_;
        sum_.build(centered);
    }

    std::size_t size() const { return values_.size(); }

    double median(std::size_t i, std::size_t j) const { return values_[i + (j - i) / 2]; }

    double query(std::size_t i, std::size_t j) const {
        if (i > j) throw Error(ErrorKind::InvertedRange, "segment start exceeds segment end");
        if (j >= size()) throw Error(ErrorKind::IndexOutOfRange, "segment end beyond oracle");
        const std::size_t mid = i + (j - i) / 2;
        const double med = values_[mid] - shift_;
        const double left = med * static_cast<double>(mid - i + 1) - sum_.range(i, mid);
        const double right = mid < j ? sum_.range(mid + 1, j) - med * static_cast<double>(j - mid) : 0.0;
        return std::max(0.0, left + right);
    }

private:
    std::vector<double> values_;
    double shift_ = 0.0;
    detail::CompensatedPrefix sum_;
};

/// Thread-safe memo of CostRecords keyed on (i, j); one instance per (dataset, config).
class SegmentCostCache {
public:
    SegmentCostCache(const SortedDataset& sd, FitConfig cfg) : sd_(sd), cfg_(std::move(cfg)) {}

    const FitConfig& config() const { return cfg_; }

    CostRecord get(std::size_t i, std::size_t j) {
        {
            std::lock_guard lock(mutex_);
            auto it = memo_.find({i, j});
            if (it != memo_.end()) return it->second;
        }
        CostRecord rec = segment_cost(sd_, i, j, cfg_);
        std::lock_guard lock(mutex_);
        return memo_.emplace(std::make_pair(i, j), std::move(rec)).first->second;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return memo_.size();
    }

private:
    const SortedDataset& sd_;
    FitConfig cfg_;
    mutable std::mutex mutex_;
    std::map<std::pair<std::size_t, std::size_t>, CostRecord> memo_;
};

}  // namespace plli

#endif  // PLLI_SEGMENT_COST_HPP
