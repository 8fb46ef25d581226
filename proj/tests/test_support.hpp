#ifndef PLLI_TESTS_TEST_SUPPORT_HPP
#define PLLI_TESTS_TEST_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "plli/plli.hpp"

namespace plli::testing {

inline std::vector<double> uniform_values(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

/// Gaussian features, black-box value given by `fn(row)`.
inline Dataset make_dataset(std::size_t n, std::size_t d, std::uint64_t seed,
                            const std::function<double(std::span<const double>)>& fn) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = normal(rng);
        y[r] = fn(std::span<const double>(X.row(static_cast<Eigen::Index>(r)).data(), d));
    }
    return Dataset(std::move(X), std::move(y), {});
}

/// One feature equal to the black-box value itself.
inline Dataset dataset_from_values(const std::vector<double>& values) {
    RowMatrix X(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t r = 0; r < values.size(); ++r) X(static_cast<Eigen::Index>(r), 0) = values[r];
    return Dataset(std::move(X), values, {"x"});
}

/**
 * Exhaustive minimum over every ordered partition of `sorted` into exactly H non-empty runs,
 * each run costed by a direct constant fit. Independent of the prefix oracle and the DP.
 */
inline double exhaustive_partition_cost(const std::vector<double>& sorted, std::size_t H, Loss loss) {
    const std::size_t n = sorted.size();
    const std::span<const double> all(sorted);
    double best = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::size_t, double)> rec = [&](std::size_t start, std::size_t left, double acc) {
        if (left == 1) {
            best = std::min(best, acc + fit_constant(all.subspan(start, n - start), loss).cost);
            return;
        }
        for (std::size_t end = start + 1; end + left - 1 <= n; ++end) {
            rec(end, left - 1, acc + fit_constant(all.subspan(start, end - start), loss).cost);
        }
    };
    rec(0, H, 0.0);
    return best;
}

}  // namespace plli::testing

#endif  // PLLI_TESTS_TEST_SUPPORT_HPP
