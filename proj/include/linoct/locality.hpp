#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "linoct/linear_octree.hpp"
#include "linoct/reorder.hpp"

namespace linoct {

/// kNN locality histogram: for every accumulated centre i and every member j
/// of its k-neighbourhood, the index distance |i - j| is counted. H(0)
/// equals the number of centres and the counts sum to k * centres. The
/// left-skew of this distribution is a proxy for memory locality of
/// neighbourhood queries.
struct LocalityHistogram {
    std::uint32_t k = 0;
    std::uint64_t cloud_size = 0;
    std::uint64_t centres = 0;
    std::vector<std::pair<std::uint32_t, std::uint64_t>> bins;  // (d, count), ascending d

    [[nodiscard]] std::uint64_t total() const {
        std::uint64_t t = 0;
        for (const auto& [d, c] : bins) t += c;
        return t;
    }

    [[nodiscard]] std::uint64_t count_at(std::uint32_t d) const;
    [[nodiscard]] double mean() const;
    [[nodiscard]] double stddev() const;
};

/// Exact histogram: runs kNN for every cloud index with the shared tie rule.
/// When `index_map` is given (size N), distances are accumulated between
/// mapped indices — this measures locality of a different storage order
/// (e.g. the original order of a shuffled cloud) while querying through the
/// reordered tree. Accumulation is parallel with per-thread partial
/// histograms merged by addition.
LocalityHistogram locality_histogram(const LinearOctree& tree, const CodedCloud& coded,
                                     std::uint32_t k, int threads = 1,
                                     const std::vector<std::uint32_t>* index_map = nullptr);

/// Subset approximation over `sample_size` seeded distinct centres;
/// sample_size == N reproduces the exact histogram.
LocalityHistogram locality_histogram_approx(const LinearOctree& tree, const CodedCloud& coded,
                                            std::uint32_t k, std::uint32_t sample_size,
                                            std::uint64_t seed, int threads = 1,
                                            const std::vector<std::uint32_t>* index_map = nullptr);

/// Fisher-Pearson coefficient G1 = E[((d - mean) / stddev)^3] of the
/// index-distance distribution; 0 when stddev is 0.
double fisher_pearson_skewness(const LocalityHistogram& hist);

/// Weighted empirical quartiles (Q1, Q2, Q3): smallest d whose cumulative
/// count reaches the quantile of the total mass.
std::array<double, 3> histogram_quantiles(const LocalityHistogram& hist);

}  // namespace linoct
