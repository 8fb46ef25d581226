#ifndef PLLI_LOCAL_MODELS_HPP
#define PLLI_LOCAL_MODELS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "plli/core.hpp"

namespace plli {

struct FitResult {
    LocalModel model;
    double cost = 0.0;  // unnormalized sum of per-point losses
};

/**
 * Best constant under `loss`: the mean for squared loss, the lower median for absolute loss.
 * `dim` sets the length of the (all-zero) coefficient vector.
 */
inline FitResult fit_constant(std::span<const double> values, Loss loss, std::size_t dim = 0) {
    if (values.empty()) throw Error(ErrorKind::EmptyRegion, "cannot fit a model to an empty region");

    double center = 0.0;
    if (loss == Loss::squared) {
        for (double v : values) center += v;
        center /= static_cast<double>(values.size());
    } else {
        std::vector<double> copy(values.begin(), values.end());
        auto mid = copy.begin() + static_cast<std::ptrdiff_t>((copy.size() - 1) / 2);
        std::nth_element(copy.begin(), mid, copy.end());
        center = *mid;
    }

    double cost = 0.0;
    for (double v : values) cost += pointwise_loss(loss, v - center);

    FitResult out;
    out.model.kind = ModelFamily::constant;
    out.model.coefficients.assign(dim, 0.0);
    out.model.intercept = center;
    out.cost = cost;
    return out;
}

/// b.x + c, clipped when the model carries a clip range.
inline double predict_local(const LocalModel& model, std::span<const double> x) {
    if (!model.coefficients.empty() && model.coefficients.size() != x.size()) {
        throw Error(ErrorKind::DimensionMismatch, "feature vector length differs from model dimension");
    }
    double v = model.intercept;
    for (std::size_t j = 0; j < model.coefficients.size(); ++j) v += model.coefficients[j] * x[j];
    return model.clip ? model.clip->apply(v) : v;
}

/**
 * Least squares on [X | 1]. Columns are centered first, so the intercept is recovered as
 * mean(y) - b.mean(X). When m < d+1 or the centered normal matrix has a pivot below 1e-12
 * (relative to its largest diagonal entry), `ridge_epsilon` is added to its diagonal.
 * The returned cost applies `clip` to the predictions.
 */
inline FitResult fit_linear(const Eigen::Ref<const RowMatrix>& X, std::span<const double> y, double ridge_epsilon,
                            std::optional<Clip> clip = std::nullopt) {
    const Eigen::Index m = X.rows();
    const Eigen::Index d = X.cols();
    if (m == 0) throw Error(ErrorKind::EmptyRegion, "cannot fit a model to an empty region");
    if (static_cast<std::size_t>(m) != y.size()) {
        throw Error(ErrorKind::DimensionMismatch, "target length differs from design row count");
    }

    Eigen::Map<const Eigen::VectorXd> yv(y.data(), m);
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = yv.mean();
    const RowMatrix Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = yv.array() - y_mean;

    Eigen::MatrixXd normal = Xc.transpose() * Xc;
    const Eigen::VectorXd rhs = Xc.transpose() * yc;

    Eigen::VectorXd b;
    bool singular = m < d + 1;
    if (!singular) {
        Eigen::LLT<Eigen::MatrixXd> llt(normal);
        const double scale = std::max(1.0, normal.diagonal().maxCoeff());
        if (llt.info() != Eigen::Success) {
            singular = true;
        } else {
            const Eigen::VectorXd pivots = llt.matrixL().toDenseMatrix().diagonal().array().square();
            singular = d > 0 && pivots.minCoeff() < 1e-12 * scale;
        }
        if (!singular) {
            b = llt.solve(rhs);
            singular = !b.allFinite();
        }
    }
    if (singular) {
        normal.diagonal().array() += ridge_epsilon;
        b = normal.ldlt().solve(rhs);
    }
    const double c = y_mean - x_mean.dot(b);
    if (!b.allFinite() || !std::isfinite(c)) {
        throw Error(ErrorKind::NumericalFailure, "least-squares solve produced non-finite coefficients");
    }

    FitResult out;
    out.model.kind = ModelFamily::linear;
    out.model.coefficients.assign(b.data(), b.data() + d);
    out.model.intercept = c;
    out.model.clip = clip;

    double cost = 0.0;
    for (Eigen::Index r = 0; r < m; ++r) {
        double pred = c + X.row(r).dot(b.transpose());
        if (clip) pred = clip->apply(pred);
        const double res = y[static_cast<std::size_t>(r)] - pred;
        cost += res * res;
    }
    out.cost = cost;
    return out;
}

/// importance_j = |b_j| * sigma_j; constant models yield zeros.
inline std::vector<double> feature_importance(const LocalModel& model, std::span<const double> region_feature_stddev) {
    std::vector<double> out(region_feature_stddev.size(), 0.0);
    if (model.kind == ModelFamily::constant) return out;
    if (model.coefficients.size() != region_feature_stddev.size()) {
        throw Error(ErrorKind::DimensionMismatch, "stddev length differs from model dimension");
    }
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::abs(model.coefficients[j]) * region_feature_stddev[j];
    return out;
}

}  // namespace plli

#endif  // PLLI_LOCAL_MODELS_HPP
