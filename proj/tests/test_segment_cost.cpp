#include <gtest/gtest.h>

#include "plli/segment_cost.hpp"
#include "test_support.hpp"

using namespace plli;
using plli::testing::dataset_from_values;

TEST(SegmentSlice, Bounds) {
    const SortedDataset sd = sort_by_target(dataset_from_values({4, 2, 9, 1}));
    const SegmentView one = segment_slice(sd, 0, 0);
    EXPECT_EQ(one.size(), 1u);
    EXPECT_DOUBLE_EQ(one.target[0], 1.0);

    const SegmentView all = segment_slice(sd, 0, 3);
    EXPECT_EQ(all.size(), 4u);
    EXPECT_EQ(all.features.rows(), 4);
    EXPECT_DOUBLE_EQ(all.features(3, 0), 9.0);

    // Views alias the sorted storage.
    EXPECT_EQ(segment_slice(sd, 1, 2).target.data(), sd.sorted_target().data() + 1);
}

TEST(SegmentSlice, Errors) {
    const SortedDataset sd = sort_by_target(dataset_from_values({4, 2, 9, 1}));
    try {
        segment_slice(sd, 2, 1);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvertedRange);
    }
    try {
        segment_slice(sd, 1, 4);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
    }
}

TEST(SegmentCost, ConstantSingleRegion) {
    const SortedDataset sd = sort_by_target(dataset_from_values({1, 0}));
    const FitConfig cfg{.h = 1, .w = 1, .model_family = ModelFamily::constant};
    const CostRecord rec = segment_cost(sd, 0, 1, cfg);
    EXPECT_DOUBLE_EQ(rec.cost, 0.5);
    EXPECT_EQ(rec.effective_w, 1u);
    ASSERT_EQ(rec.regions.size(), 1u);
    EXPECT_DOUBLE_EQ(rec.regions[0].model.intercept, 0.5);
    EXPECT_DOUBLE_EQ(rec.regions[0].centroid[0], 0.5);
    EXPECT_EQ(rec.regions[0].size, 2u);
}

TEST(SegmentCost, LinearCollinear) {
    RowMatrix X(3, 1);
    X << 0, 1, 2;
    const SortedDataset sd = sort_by_target(Dataset(X, {1, 3, 5}, {"x"}));
    const FitConfig cfg{.w = 1, .model_family = ModelFamily::linear};
    EXPECT_NEAR(segment_cost(sd, 0, 2, cfg).cost, 0.0, 1e-20);
}

TEST(SegmentCost, TwoRegionsMatchBruteForce) {
    const std::vector<double> v{0, 1, 10, 11};
    // Oracle: best split of 4 points into 2 groups, each costed by its mean.
    double oracle = std::numeric_limits<double>::infinity();
    for (unsigned mask = 1; mask < 15; ++mask) {
        std::vector<double> a, b;
        for (unsigned i = 0; i < 4; ++i) ((mask >> i) & 1 ? a : b).push_back(v[i]);
        oracle = std::min(oracle, fit_constant(a, Loss::squared).cost + fit_constant(b, Loss::squared).cost);
    }
    EXPECT_DOUBLE_EQ(oracle, 1.0);

    const SortedDataset sd = sort_by_target(dataset_from_values(v));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const FitConfig cfg{.w = 2, .model_family = ModelFamily::constant, .seed = seed};
        const CostRecord rec = segment_cost(sd, 0, 3, cfg);
        EXPECT_DOUBLE_EQ(rec.cost, oracle);
        EXPECT_EQ(rec.effective_w, 2u);
    }
}

TEST(SegmentCost, CostIsSumOfRegionFits) {
    const Dataset ds = plli::testing::make_dataset(90, 2, 4, [](auto x) { return x[0] * x[0] + x[1]; });
    const SortedDataset sd = sort_by_target(ds);
    const FitConfig cfg{.w = 3, .model_family = ModelFamily::linear, .seed = 5};
    const CostRecord rec = segment_cost(sd, 10, 70, cfg);
    ASSERT_EQ(rec.regions.size(), 3u);

    // Re-derive membership from nearest centroids and refit each region independently.
    RowMatrix centroids(3, 2);
    for (Eigen::Index u = 0; u < 3; ++u) {
        centroids(u, 0) = rec.regions[static_cast<std::size_t>(u)].centroid[0];
        centroids(u, 1) = rec.regions[static_cast<std::size_t>(u)].centroid[1];
    }
    std::vector<std::vector<std::size_t>> members(3);
    for (std::size_t i = 10; i <= 70; ++i) {
        std::span<const double> x(sd.sorted_features().row(static_cast<Eigen::Index>(i)).data(), 2);
        members[nearest_centroid(x, centroids)].push_back(i);
    }
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t u = 0; u < 3; ++u) {
        RowMatrix X(static_cast<Eigen::Index>(members[u].size()), 2);
        std::vector<double> y;
        for (std::size_t r = 0; r < members[u].size(); ++r) {
            X.row(static_cast<Eigen::Index>(r)) = sd.sorted_features().row(static_cast<Eigen::Index>(members[u][r]));
            y.push_back(sd.sorted_target()[members[u][r]]);
        }
        EXPECT_EQ(members[u].size(), rec.regions[u].size);
        total += fit_linear(X, y, cfg.ridge_epsilon).cost;
        count += members[u].size();
    }
    EXPECT_EQ(count, 61u);
    EXPECT_NEAR(rec.cost, total, 1e-9);
}

TEST(SegmentCost, Deterministic) {
    const Dataset ds = plli::testing::make_dataset(60, 3, 1, [](auto x) { return x[0] + x[1] * x[2]; });
    const SortedDataset sd = sort_by_target(ds);
    const FitConfig cfg{.w = 2, .model_family = ModelFamily::linear, .seed = 17};
    const CostRecord a = segment_cost(sd, 3, 50, cfg);
    const CostRecord b = segment_cost(sd, 3, 50, cfg);
    EXPECT_EQ(a.cost, b.cost);
    EXPECT_EQ(a.regions, b.regions);
}

TEST(SegmentCostCache, MemoizesRecords) {
    const Dataset ds = plli::testing::make_dataset(30, 2, 1, [](auto x) { return x[0]; });
    const SortedDataset sd = sort_by_target(ds);
    SegmentCostCache cache(sd, FitConfig{.w = 2, .seed = 3});
    const CostRecord a = cache.get(2, 20);
    const CostRecord b = cache.get(2, 20);
    EXPECT_EQ(cache.size(), 1u);
    EXPECT_EQ(a.cost, b.cost);
    EXPECT_EQ(a.cost, segment_cost(sd, 2, 20, cache.config()).cost);
}

TEST(PrefixOracle, Examples) {
    const std::vector<double> v{0, 1};
    const PrefixOracle o = build_prefix_oracle(v);
    EXPECT_NEAR(o.query(0, 1), 0.5, 1e-15);
    EXPECT_EQ(o.query(0, 0), 0.0);
    EXPECT_EQ(o.query(1, 1), 0.0);
    EXPECT_THROW(o.query(1, 0), Error);
    EXPECT_THROW(o.query(0, 2), Error);
}

TEST(PrefixOracle, MatchesDirectSummation) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto v = plli::testing::uniform_values(50, seed, -3.0, 8.0);
        std::sort(v.begin(), v.end());
        const PrefixOracle o(v);
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i; j < v.size(); ++j) {
                const auto direct = fit_constant(std::span<const double>(v).subspan(i, j - i + 1), Loss::squared);
                EXPECT_NEAR(o.query(i, j), direct.cost, 1e-9);
                EXPECT_NEAR(o.mean(i, j), direct.model.intercept, 1e-12);
            }
        }
    }
}

TEST(PrefixOracle, NeverNegativeUnderCancellation) {
    std::vector<double> v(2000, 1e8);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] += (k % 3) * 1e-7;
    const PrefixOracle o(v);
    for (std::size_t i = 0; i < v.size(); i += 37) {
        for (std::size_t j = i; j < v.size(); j += 53) EXPECT_GE(o.query(i, j), 0.0);
    }
    std::vector<double> flat(500, 123456.789);
    const PrefixOracle f(flat);
    EXPECT_EQ(f.query(0, 499), 0.0);
}

TEST(MedianOracle, MatchesDirectAbsoluteFit) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto v = plli::testing::uniform_values(40, 50 + seed, -2.0, 2.0);
        std::sort(v.begin(), v.end());
        const MedianOracle o(v);
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = i; j < v.size(); ++j) {
                const auto direct = fit_constant(std::span<const double>(v).subspan(i, j - i + 1), Loss::absolute);
                EXPECT_NEAR(o.query(i, j), direct.cost, 1e-9);
                EXPECT_EQ(o.median(i, j), direct.model.intercept);
            }
        }
    }
}

TEST(MedianOracle, RejectsUnsortedInput) {
    const std::vector<double> v{2, 1};
    EXPECT_THROW(MedianOracle{v}, Error);
}
