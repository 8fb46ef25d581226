#ifndef PLLI_BASELINES_METRICS_HPP
#define PLLI_BASELINES_METRICS_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "plli/core.hpp"
#include "plli/dp_partitioner.hpp"
#include "plli/local_models.hpp"
#include "plli/segment_cost.hpp"

namespace plli {

/// Sorted split positions floor(n*r/H), r = 1..H-1, as 0-based inclusive segments.
inline std::vector<std::pair<std::size_t, std::size_t>> equal_quantile_segments(std::size_t n, std::size_t H) {
    if (H == 0) throw Error(ErrorKind::InvalidConfig, "H must be a positive integer");
    if (n < H) {
        throw Error(ErrorKind::InsufficientData,
                    std::to_string(n) + " points cannot form " + std::to_string(H) + " non-empty intervals");
    }
    std::vector<std::pair<std::size_t, std::size_t>> segments;
    std::size_t start = 0;
    for (std::size_t r = 1; r <= H; ++r) {
        const std::size_t end = r == H ? n : n * r / H;
        segments.emplace_back(start, end - 1);
        start = end;
    }
    return segments;
}

/// Equal-quantile baseline: same per-interval clustering and fits as the optimal path.
inline PlliModel fit_eq_plli(const Dataset& ds, const FitConfig& cfg) {
    cfg.validate();
    const SortedDataset sd = sort_by_target(ds);
    const auto segments = equal_quantile_segments(sd.size(), cfg.h);
    SegmentCostCache cache(sd, cfg);
    double total = 0.0;
    for (const auto& [first, last] : segments) total += cache.get(first, last).cost;
    return assemble_model(sd, cfg, segments, cache, total, "eq");
}

struct EvalReport {
    double mse_f = 0.0;
    std::optional<double> mse_p;
    std::optional<double> r2;
    std::size_t n_eval = 0;
};

/**
 * MSE against the black-box values (which also route each row to its interval) and, when
 * labels are supplied, MSE and R^2 against them. R^2 is absent when the labels are constant.
 */
inline EvalReport evaluate(const PlliModel& model, const Dataset& ds,
                           std::optional<std::span<const double>> labels = std::nullopt) {
    if (ds.dim() != model.dim()) throw Error(ErrorKind::DimensionMismatch, "dataset and model dimensions differ");
    if (labels && labels->size() != ds.size()) throw Error(ErrorKind::DimensionMismatch, "label count differs from rows");

    const std::size_t n = ds.size();
    std::vector<double> pred(n);
    for (std::size_t r = 0; r < n; ++r) pred[r] = predict(model, ds.row(r), ds.target()[r]).value;

    EvalReport report;
    report.n_eval = n;
    double sse_f = 0.0;
    for (std::size_t r = 0; r < n; ++r) sse_f += (pred[r] - ds.target()[r]) * (pred[r] - ds.target()[r]);
    report.mse_f = sse_f / static_cast<double>(n);

    if (labels) {
        const auto& y = *labels;
        double sse = 0.0;
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            sse += (pred[r] - y[r]) * (pred[r] - y[r]);
            mean += y[r];
        }
        mean /= static_cast<double>(n);
        double sst = 0.0;
        for (std::size_t r = 0; r < n; ++r) sst += (y[r] - mean) * (y[r] - mean);
        report.mse_p = sse / static_cast<double>(n);
        if (sst > 0.0) report.r2 = 1.0 - sse / sst;
    }
    return report;
}

/// Sum of per-row losses under the model's training loss, routed by black-box value.
inline double training_cost(const PlliModel& model, const Dataset& ds) {
    double total = 0.0;
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const double p = predict(model, ds.row(r), ds.target()[r]).value;
        total += pointwise_loss(model.config.loss, ds.target()[r] - p);
    }
    return total;
}

/// Mean nearest-neighbour Euclidean distance over a point set.
inline double coverage(const std::vector<std::vector<double>>& points) {
    if (points.size() < 2) throw Error(ErrorKind::TooFewPoints, "coverage needs at least two points");
    const std::size_t d = points.front().size();
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].size() != d) throw Error(ErrorKind::DimensionMismatch, "points differ in dimension");
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < points.size(); ++j) {
            if (j == i) continue;
            best = std::min(best, squared_distance(points[i].data(), points[j].data(), static_cast<Eigen::Index>(d)));
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(points.size());
}

struct Representative {
    std::size_t region_id = 0;
    std::vector<double> centroid;
    std::size_t nearest_row = 0;  // row index in the dataset
    std::string nearest_row_id;
    double nearest_distance = 0.0;
    double black_box_value = 0.0;  // black-box value of the nearest row
    std::vector<double> importance;
};

struct RepresentativeSet {
    std::vector<Representative> records;
    std::optional<double> coverage_features;     // over centroids
    std::optional<double> coverage_predictions;  // over the representatives' black-box values
    std::optional<double> coverage_importances;  // over per-region importance vectors
};

/**
 * One record per region: its centroid and the closest training row among the rows routed to
 * that region (any row when none are). Coverage statistics need at least two regions.
 */
inline RepresentativeSet representatives(const PlliModel& model, const Dataset& ds) {
    if (ds.dim() != model.dim()) throw Error(ErrorKind::DimensionMismatch, "dataset and model dimensions differ");
    const std::size_t K = model.region_count();
    const auto d = static_cast<Eigen::Index>(ds.dim());

    std::vector<std::size_t> routed(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) routed[r] = predict(model, ds.row(r), ds.target()[r]).region_id;

    RepresentativeSet out;
    for (std::size_t k = 0; k < K; ++k) {
        const Region& region = model.region(k);
        Representative rep;
        rep.region_id = k;
        rep.centroid = region.centroid;
        rep.importance = feature_importance(region.model, region.feature_stddev);

        bool any_routed = false;
        for (std::size_t r = 0; r < ds.size(); ++r) any_routed = any_routed || routed[r] == k;

        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < ds.size(); ++r) {
            if (any_routed && routed[r] != k) continue;
            const double dist = squared_distance(ds.row(r).data(), region.centroid.data(), d);
            if (dist < best) {
                best = dist;
                rep.nearest_row = r;
            }
        }
        rep.nearest_distance = std::sqrt(best);
        rep.nearest_row_id = ds.row_ids()[rep.nearest_row];
        rep.black_box_value = ds.target()[rep.nearest_row];
        out.records.push_back(std::move(rep));
    }

    if (K >= 2) {
        std::vector<std::vector<double>> centroids;
        std::vector<std::vector<double>> values;
        std::vector<std::vector<double>> importances;
        for (const auto& rep : out.records) {
            centroids.push_back(rep.centroid);
            values.push_back({rep.black_box_value});
            importances.push_back(rep.importance);
        }
        out.coverage_features = coverage(centroids);
        out.coverage_predictions = coverage(values);
        out.coverage_importances = coverage(importances);
    }
    return out;
}

}  // namespace plli

#endif  // PLLI_BASELINES_METRICS_HPP
