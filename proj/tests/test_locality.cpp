#include "linoct/locality.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "linoct/rng.hpp"
#include "support/oracles.hpp"

using namespace linoct;
using linoct::testing::knn_brute;
using linoct::testing::make_cloud;

namespace {

struct Built {
    CodedCloud coded;
    LinearOctree tree;

    explicit Built(const PointCloud& cloud, Curve curve = Curve::Hilbert)
        : coded(reorder_cloud(cloud, curve)), tree(coded, 64) {}
};

PointCloud shuffled_cloud(std::uint64_t n, std::uint64_t seed) {
    const PointCloud base = make_cloud(SyntheticSpec::Kind::Uniform, n, seed);
    std::vector<Point> pts = base.points();
    std::mt19937_64 gen(seed ^ 0x5eed);
    for (std::size_t i = pts.size(); i > 1; --i) {
        std::swap(pts[i - 1], pts[uniform_below(gen, i)]);
    }
    return PointCloud(std::move(pts));
}

}  // namespace

TEST(LocalityHistogram, BasicIdentities) {
    for (const auto kind :
         {SyntheticSpec::Kind::Uniform, SyntheticSpec::Kind::GaussianClusters}) {
        const Built b(make_cloud(kind, 3000, 17));
        for (std::uint32_t k : {2u, 10u}) {
            const LocalityHistogram h = locality_histogram(b.tree, b.coded, k);
            EXPECT_EQ(h.count_at(0), 3000u) << "every centre finds itself at distance 0";
            EXPECT_EQ(h.total(), std::uint64_t{k} * 3000u);
        }
    }
}

TEST(LocalityHistogram, CollinearHandExample) {
    // Four evenly spaced points stored in spatial order: each centre's other
    // neighbour is an adjacent index under the tie rule.
    const PointCloud line({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
    const Built b(line, Curve::Morton);
    ASSERT_EQ(b.coded.permutation, (std::vector<std::uint32_t>{0, 1, 2, 3}));
    const LocalityHistogram h = locality_histogram(b.tree, b.coded, 2);
    EXPECT_EQ(h.count_at(0), 4u);
    EXPECT_EQ(h.count_at(1), 4u);
    EXPECT_EQ(h.total(), 8u);
}

TEST(LocalityHistogram, RejectsBadK) {
    const Built b(make_cloud(SyntheticSpec::Kind::Uniform, 100, 3));
    EXPECT_THROW(locality_histogram(b.tree, b.coded, 101), std::invalid_argument);
    EXPECT_THROW(locality_histogram(b.tree, b.coded, 0), std::invalid_argument);
}

TEST(LocalityHistogram, MatchesBruteForceBackend) {
    const Built b(make_cloud(SyntheticSpec::Kind::GaussianClusters, 1200, 29));
    const std::uint32_t k = 7;
    const LocalityHistogram h = locality_histogram(b.tree, b.coded, k);

    std::map<std::uint32_t, std::uint64_t> want;
    for (std::uint32_t i = 0; i < b.coded.cloud.size(); ++i) {
        for (const KnnNeighbor& nb : knn_brute(b.coded.cloud, b.coded.cloud[i], k)) {
            ++want[i > nb.index ? i - nb.index : nb.index - i];
        }
    }
    const std::vector<std::pair<std::uint32_t, std::uint64_t>> want_bins(want.begin(),
                                                                         want.end());
    EXPECT_EQ(h.bins, want_bins);
}

TEST(LocalityHistogram, ThreadCountInvariance) {
    const Built b(make_cloud(SyntheticSpec::Kind::Surface, 4000, 31));
    const LocalityHistogram one = locality_histogram(b.tree, b.coded, 12, 1);
    const LocalityHistogram four = locality_histogram(b.tree, b.coded, 12, 4);
    EXPECT_EQ(one.bins, four.bins);
}

TEST(LocalityHistogram, IndexMapMeasuresMappedOrder) {
    // Mapping through the permutation reproduces the histogram of the
    // original storage order.
    const PointCloud original = shuffled_cloud(1500, 41);
    const Built b(original);
    const LocalityHistogram mapped =
        locality_histogram(b.tree, b.coded, 5, 1, &b.coded.permutation);

    std::map<std::uint32_t, std::uint64_t> want;
    for (std::uint32_t i = 0; i < original.size(); ++i) {
        for (const KnnNeighbor& nb : knn_brute(original, original[i], 5)) {
            ++want[i > nb.index ? i - nb.index : nb.index - i];
        }
    }
    std::uint64_t total = 0;
    for (const auto& [d, c] : mapped.bins) total += c;
    EXPECT_EQ(total, 5u * 1500u);
    const std::vector<std::pair<std::uint32_t, std::uint64_t>> want_bins(want.begin(),
                                                                         want.end());
    EXPECT_EQ(mapped.bins, want_bins);
}

TEST(Skewness, SymmetricAndDegenerateCases) {
    LocalityHistogram sym;
    sym.bins = {{0, 1}, {2, 1}};
    EXPECT_EQ(fisher_pearson_skewness(sym), 0.0);

    LocalityHistogram point_mass;
    point_mass.bins = {{5, 1000}};
    EXPECT_EQ(fisher_pearson_skewness(point_mass), 0.0);  // sigma = 0 convention
}

TEST(Skewness, MatchesDirectMomentOracle) {
    LocalityHistogram h;
    h.bins = {{0, 9}, {100, 1}};
    // Direct evaluation over the 10 samples.
    const double mu = (9 * 0.0 + 1 * 100.0) / 10.0;
    double var = 0.0, m3 = 0.0;
    for (int i = 0; i < 9; ++i) {
        var += (0 - mu) * (0 - mu);
        m3 += (0 - mu) * (0 - mu) * (0 - mu);
    }
    var += (100 - mu) * (100 - mu);
    m3 += (100 - mu) * (100 - mu) * (100 - mu);
    var /= 10.0;
    m3 /= 10.0;
    const double want = m3 / std::pow(std::sqrt(var), 3);
    EXPECT_NEAR(fisher_pearson_skewness(h), want, std::abs(want) * 1e-12);
}

TEST(Quantiles, ConventionPinned) {
    LocalityHistogram zero;
    zero.bins = {{0, 500}};
    EXPECT_EQ(histogram_quantiles(zero), (std::array<double, 3>{0, 0, 0}));

    LocalityHistogram half;  // cumulative at 0 is exactly half the mass
    half.bins = {{0, 700}, {1, 700}};
    const auto q = histogram_quantiles(half);
    EXPECT_EQ(q[0], 0.0);
    EXPECT_EQ(q[1], 0.0);
    EXPECT_EQ(q[2], 1.0);
}

TEST(Approximation, FullSampleEqualsExactAndSingleCentreSums) {
    const Built b(make_cloud(SyntheticSpec::Kind::Uniform, 2500, 43));
    const LocalityHistogram exact = locality_histogram(b.tree, b.coded, 9);
    const LocalityHistogram full =
        locality_histogram_approx(b.tree, b.coded, 9, 2500, 777);
    EXPECT_EQ(exact.bins, full.bins);

    const LocalityHistogram single = locality_histogram_approx(b.tree, b.coded, 9, 1, 777);
    EXPECT_EQ(single.count_at(0), 1u);
    EXPECT_EQ(single.total(), 9u);

    EXPECT_THROW(locality_histogram_approx(b.tree, b.coded, 9, 2501, 1),
                 std::invalid_argument);
}

TEST(Approximation, TenPercentSampleTracksExactSkewness) {
    const Built b(make_cloud(SyntheticSpec::Kind::Uniform, 100000, 47));
    const std::uint32_t k = 10;
    const double exact_g1 = fisher_pearson_skewness(locality_histogram(b.tree, b.coded, k, 4));
    const double approx_g1 = fisher_pearson_skewness(
        locality_histogram_approx(b.tree, b.coded, k, 10000, 4242, 4));
    EXPECT_NEAR(approx_g1, exact_g1, std::abs(exact_g1) * 0.15);
}

TEST(Direction, ReorderingRaisesSkewAndShrinksQuantiles) {
    const PointCloud shuffled = shuffled_cloud(20000, 53);
    const std::uint32_t k = 20;

    // Storage-order histogram of the shuffled cloud via the mapped path.
    const Built b(shuffled);
    const LocalityHistogram h_shuffled =
        locality_histogram(b.tree, b.coded, k, 2, &b.coded.permutation);

    const double g1_shuffled = fisher_pearson_skewness(h_shuffled);
    const auto q_shuffled = histogram_quantiles(h_shuffled);

    for (Curve curve : {Curve::Morton, Curve::Hilbert}) {
        const Built r(shuffled, curve);
        const LocalityHistogram h = locality_histogram(r.tree, r.coded, k, 2);
        const double g1 = fisher_pearson_skewness(h);
        const auto q = histogram_quantiles(h);
        EXPECT_GT(g1, g1_shuffled);
        for (int i = 0; i < 3; ++i) EXPECT_LT(q[i], q_shuffled[i]);
    }
}
