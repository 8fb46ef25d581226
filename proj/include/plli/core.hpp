#ifndef PLLI_CORE_HPP
#define PLLI_CORE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "plli/error.hpp"

/**
 * @file core.hpp
 * @brief Domain types shared by every stage of a piecewise local-linear fit.
 */

namespace plli {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Loss { squared, absolute };
enum class ModelFamily { linear, constant };

inline const char* to_string(Loss loss) { return loss == Loss::squared ? "squared" : "absolute"; }
inline const char* to_string(ModelFamily family) { return family == ModelFamily::linear ? "linear" : "constant"; }

/// Per-point loss for a residual.
inline double pointwise_loss(Loss loss, double residual) {
    return loss == Loss::squared ? residual * residual : std::abs(residual);
}

struct Clip {
    double lo = 0.0;
    double hi = 1.0;

    double apply(double v) const { return std::min(std::max(v, lo), hi); }
    friend bool operator==(const Clip&, const Clip&) = default;
};

/**
 * In-memory numeric table prior to validation. `rows[r][c]` is the value of column `columns[c]`.
 * `row_ids` may be left empty, in which case rows are labelled by their position.
 */
struct RawTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> row_ids;
};

/**
 * Feature matrix plus one black-box value per row. Immutable once built.
 */
class Dataset {
public:
    Dataset(RowMatrix features, std::vector<double> target, std::vector<std::string> column_names,
            std::vector<std::string> row_ids = {}, std::string target_name = "f")
        : features_(std::move(features)),
          target_(std::move(target)),
          column_names_(std::move(column_names)),
          row_ids_(std::move(row_ids)),
          target_name_(std::move(target_name)) {
        const auto n = static_cast<std::size_t>(features_.rows());
        const auto d = static_cast<std::size_t>(features_.cols());
        if (n == 0 || d == 0) {
            throw Error(ErrorKind::EmptyTable, "dataset needs at least one row and one feature column");
        }
        if (target_.size() != n) {
            throw Error(ErrorKind::DimensionMismatch, "target length differs from feature row count");
        }
        if (column_names_.empty()) {
            for (std::size_t c = 0; c < d; ++c) column_names_.push_back("x" + std::to_string(c + 1));
        }
        if (column_names_.size() != d) {
            throw Error(ErrorKind::DimensionMismatch, "column name count differs from feature column count");
        }
        if (row_ids_.empty()) {
            row_ids_.reserve(n);
            for (std::size_t r = 0; r < n; ++r) row_ids_.push_back(std::to_string(r));
        }
        if (row_ids_.size() != n) {
            throw Error(ErrorKind::DimensionMismatch, "row id count differs from row count");
        }
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) {
                if (!std::isfinite(features_(r, c))) {
                    throw Error(ErrorKind::NonFiniteValue,
                                "row " + std::to_string(r) + ", column " + column_names_[c]);
                }
            }
            if (!std::isfinite(target_[r])) {
                throw Error(ErrorKind::NonFiniteValue, "row " + std::to_string(r) + ", column " + target_name_);
            }
        }
        std::unordered_set<std::string> seen(row_ids_.begin(), row_ids_.end());
        if (seen.size() != n) throw Error(ErrorKind::DuplicateRowId, "row ids must be unique");
    }

    std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(features_.cols()); }

    const RowMatrix& features() const { return features_; }
    std::span<const double> row(std::size_t r) const { return {features_.data() + r * dim(), dim()}; }
    const std::vector<double>& target() const { return target_; }
    const std::vector<std::string>& column_names() const { return column_names_; }
    const std::vector<std::string>& row_ids() const { return row_ids_; }
    const std::string& target_name() const { return target_name_; }

private:
    RowMatrix features_;
    std::vector<double> target_;
    std::vector<std::string> column_names_;
    std::vector<std::string> row_ids_;
    std::string target_name_;
};

/**
 * Dataset reordered by ascending black-box value. `order[i]` is the original row at sorted
 * position i. The sorted copies of features and targets make every index segment contiguous.
 */
class SortedDataset {
public:
    SortedDataset(Dataset base, std::vector<std::size_t> order)
        : base_(std::move(base)), order_(std::move(order)) {
        const std::size_t n = base_.size();
        if (order_.size() != n) throw Error(ErrorKind::DimensionMismatch, "order length differs from dataset size");
        sorted_features_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(base_.dim()));
        sorted_target_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            sorted_features_.row(static_cast<Eigen::Index>(i)) =
                base_.features().row(static_cast<Eigen::Index>(order_[i]));
            sorted_target_[i] = base_.target()[order_[i]];
        }
    }

    const Dataset& base() const { return base_; }
    const std::vector<std::size_t>& order() const { return order_; }
    std::size_t size() const { return base_.size(); }
    std::size_t dim() const { return base_.dim(); }

    const RowMatrix& sorted_features() const { return sorted_features_; }
    const std::vector<double>& sorted_target() const { return sorted_target_; }

    /// inverse[r] is the sorted position of original row r.
    std::vector<std::size_t> inverse_order() const {
        std::vector<std::size_t> inverse(order_.size());
        for (std::size_t i = 0; i < order_.size(); ++i) inverse[order_[i]] = i;
        return inverse;
    }

private:
    Dataset base_;
    std::vector<std::size_t> order_;
    RowMatrix sorted_features_;
    std::vector<double> sorted_target_;
};

struct FitConfig {
    std::size_t h = 1;
    std::size_t w = 1;
    Loss loss = Loss::squared;
    ModelFamily model_family = ModelFamily::linear;
    std::optional<Clip> clip;
    std::size_t stride = 1;
    std::uint64_t seed = 0;
    double ridge_epsilon = 1e-8;

    std::size_t k() const { return h * w; }

    void validate() const {
        if (h == 0) throw Error(ErrorKind::InvalidConfig, "H must be a positive integer");
        if (w == 0) throw Error(ErrorKind::InvalidConfig, "W must be a positive integer");
        if (stride == 0) throw Error(ErrorKind::InvalidConfig, "stride must be a positive integer");
        if (!(ridge_epsilon > 0.0) || !std::isfinite(ridge_epsilon)) {
            throw Error(ErrorKind::InvalidConfig, "ridge_epsilon must be a small positive real");
        }
        if (clip && !(clip->lo <= clip->hi)) throw Error(ErrorKind::InvalidConfig, "clip range needs lo <= hi");
        if (loss == Loss::absolute && model_family == ModelFamily::linear) {
            throw Error(ErrorKind::UnsupportedCombination, "absolute loss is only supported with constant models");
        }
    }

    friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

struct LocalModel {
    ModelFamily kind = ModelFamily::constant;
    std::vector<double> coefficients;  // zero for constant models
    double intercept = 0.0;
    std::optional<Clip> clip;

    friend bool operator==(const LocalModel&, const LocalModel&) = default;
};

/// One k-means cell of a range interval with its local model.
struct Region {
    std::vector<double> centroid;
    LocalModel model;
    std::size_t size = 0;
    std::vector<double> feature_stddev;  // within-region population standard deviation per feature

    friend bool operator==(const Region&, const Region&) = default;
};

struct Interval {
    double f_low = 0.0;
    double f_high = 0.0;
    std::size_t first = 0;  // sorted training positions, inclusive
    std::size_t last = 0;
    std::vector<Region> regions;

    friend bool operator==(const Interval&, const Interval&) = default;
};

/**
 * Fitted surrogate. Routing by black-box value uses `boundaries` with half-open intervals
 * (a_{r-1}, a_r]; the first and last intervals extend to -inf and +inf.
 */
struct PlliModel {
    std::vector<double> boundaries;
    std::vector<Interval> intervals;
    FitConfig config;
    double training_risk = 0.0;
    std::size_t n_train = 0;
    std::vector<std::string> column_names;
    std::string target_name = "f";
    std::string algorithm = "op";

    std::size_t dim() const { return column_names.size(); }

    std::size_t region_count() const {
        std::size_t k = 0;
        for (const auto& interval : intervals) k += interval.regions.size();
        return k;
    }

    /// Region ids are global: intervals in ascending order, regions in stored order.
    std::pair<std::size_t, std::size_t> locate(std::size_t region_id) const {
        for (std::size_t r = 0; r < intervals.size(); ++r) {
            if (region_id < intervals[r].regions.size()) return {r, region_id};
            region_id -= intervals[r].regions.size();
        }
        throw Error(ErrorKind::IndexOutOfRange, "region id beyond model");
    }

    const Region& region(std::size_t region_id) const {
        auto [r, u] = locate(region_id);
        return intervals[r].regions[u];
    }

    friend bool operator==(const PlliModel&, const PlliModel&) = default;
};

/**
 * Splits a raw table into features and the black-box column. Rejects empty tables, tables
 * without feature columns, a missing target column and non-finite cells.
 */
inline Dataset validate_dataset(const RawTable& table, const std::string& target_column) {
    if (table.rows.empty()) throw Error(ErrorKind::EmptyTable, "table has no rows");
    if (table.columns.size() < 2) throw Error(ErrorKind::EmptyTable, "table needs a target and at least one feature column");

    auto it = std::find(table.columns.begin(), table.columns.end(), target_column);
    if (it == table.columns.end()) throw Error(ErrorKind::MissingTargetColumn, "no column named '" + target_column + "'");
    const auto target_index = static_cast<std::size_t>(it - table.columns.begin());

    const std::size_t n = table.rows.size();
    const std::size_t d = table.columns.size() - 1;
    RowMatrix features(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<double> target(n);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c != target_index) names.push_back(table.columns[c]);
    }

    for (std::size_t r = 0; r < n; ++r) {
        const auto& row = table.rows[r];
        if (row.size() != table.columns.size()) {
            throw Error(ErrorKind::DimensionMismatch, "row " + std::to_string(r) + " has the wrong number of cells");
        }
        Eigen::Index fc = 0;
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (!std::isfinite(row[c])) {
                throw Error(ErrorKind::NonFiniteValue, "row " + std::to_string(r) + ", column " + table.columns[c]);
            }
            if (c == target_index) {
                target[r] = row[c];
            } else {
                features(static_cast<Eigen::Index>(r), fc++) = row[c];
            }
        }
    }
    return Dataset(std::move(features), std::move(target), std::move(names), table.row_ids, target_column);
}

/// Stable ascending sort on the black-box values; ties keep original row order.
inline SortedDataset sort_by_target(const Dataset& ds) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto& t = ds.target();
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t[a] < t[b]; });
    return SortedDataset(ds, std::move(order));
}

}  // namespace plli

#endif  // PLLI_CORE_HPP
