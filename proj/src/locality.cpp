#include "linoct/locality.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "linoct/rng.hpp"
#include "linoct/search.hpp"

namespace linoct {

std::uint64_t LocalityHistogram::count_at(std::uint32_t d) const {
    const auto it = std::lower_bound(bins.begin(), bins.end(), d,
                                     [](const auto& bin, std::uint32_t v) { return bin.first < v; });
    return (it != bins.end() && it->first == d) ? it->second : 0;
}

double LocalityHistogram::mean() const {
    const std::uint64_t t = total();
    if (t == 0) return 0.0;
    double sum = 0.0;
    for (const auto& [d, c] : bins) sum += static_cast<double>(d) * static_cast<double>(c);
    return sum / static_cast<double>(t);
}

double LocalityHistogram::stddev() const {
    const std::uint64_t t = total();
    if (t == 0) return 0.0;
    const double mu = mean();
    double sum = 0.0;
    for (const auto& [d, c] : bins) {
        const double dd = static_cast<double>(d) - mu;
        sum += dd * dd * static_cast<double>(c);
    }
    return std::sqrt(sum / static_cast<double>(t));
}

namespace {

LocalityHistogram accumulate(const LinearOctree& tree, const CodedCloud& coded,
                             std::uint32_t k, const std::vector<std::uint32_t>& centres,
                             int threads, const std::vector<std::uint32_t>* index_map) {
    const PointCloud& cloud = coded.cloud;
    const std::uint64_t n = cloud.size();
    if (k < 1) throw std::invalid_argument("locality histogram: k must be >= 1");
    if (k > n) throw std::invalid_argument("locality histogram: k exceeds cloud size");
    if (index_map && index_map->size() != n) {
        throw std::invalid_argument("locality histogram: index map size mismatch");
    }

    const int nthreads = std::max(1, threads);
    std::unordered_map<std::uint32_t, std::uint64_t> merged;
    merged.reserve(4096);

    const std::int64_t m = static_cast<std::int64_t>(centres.size());
#pragma omp parallel num_threads(nthreads)
    {
        thread_local std::vector<KnnNeighbor> found;
        std::unordered_map<std::uint32_t, std::uint64_t> local;
        local.reserve(4096);
#pragma omp for schedule(dynamic, 64)
        for (std::int64_t ci = 0; ci < m; ++ci) {
            const std::uint32_t i = centres[ci];
            knn_lin_oct(tree, coded, cloud[i], k, found);
            const std::uint64_t mi = index_map ? (*index_map)[i] : i;
            for (const KnnNeighbor& nb : found) {
                const std::uint64_t mj = index_map ? (*index_map)[nb.index] : nb.index;
                const std::uint64_t d = mi > mj ? mi - mj : mj - mi;
                ++local[static_cast<std::uint32_t>(d)];
            }
        }
        // Integer merge commutes, so arrival order cannot change the totals.
#pragma omp critical
        {
            for (const auto& [d, c] : local) merged[d] += c;
        }
    }

    LocalityHistogram hist;
    hist.k = k;
    hist.cloud_size = n;
    hist.centres = centres.size();
    hist.bins.assign(merged.begin(), merged.end());
    std::sort(hist.bins.begin(), hist.bins.end());
    return hist;
}

}  // namespace

LocalityHistogram locality_histogram(const LinearOctree& tree, const CodedCloud& coded,
                                     std::uint32_t k, int threads,
                                     const std::vector<std::uint32_t>* index_map) {
    std::vector<std::uint32_t> centres(coded.cloud.size());
    for (std::uint32_t i = 0; i < centres.size(); ++i) centres[i] = i;
    return accumulate(tree, coded, k, centres, threads, index_map);
}

LocalityHistogram locality_histogram_approx(const LinearOctree& tree, const CodedCloud& coded,
                                            std::uint32_t k, std::uint32_t sample_size,
                                            std::uint64_t seed, int threads,
                                            const std::vector<std::uint32_t>* index_map) {
    if (sample_size > coded.cloud.size()) {
        throw std::invalid_argument("locality histogram: sample size exceeds cloud size");
    }
    const auto centres =
        sample_indices(static_cast<std::uint32_t>(coded.cloud.size()), sample_size, seed);
    return accumulate(tree, coded, k, centres, threads, index_map);
}

double fisher_pearson_skewness(const LocalityHistogram& hist) {
    const std::uint64_t t = hist.total();
    if (t == 0) return 0.0;
    const double mu = hist.mean();
    const double sigma = hist.stddev();
    if (sigma == 0.0) return 0.0;
    double sum = 0.0;
    for (const auto& [d, c] : hist.bins) {
        const double z = (static_cast<double>(d) - mu) / sigma;
        sum += z * z * z * static_cast<double>(c);
    }
    return sum / static_cast<double>(t);
}

std::array<double, 3> histogram_quantiles(const LocalityHistogram& hist) {
    const std::uint64_t t = hist.total();
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (t == 0) return out;
    const std::array<double, 3> q{0.25, 0.5, 0.75};
    std::uint64_t cum = 0;
    std::size_t qi = 0;
    for (const auto& [d, c] : hist.bins) {
        cum += c;
        while (qi < 3 && static_cast<double>(cum) >= q[qi] * static_cast<double>(t)) {
            out[qi++] = static_cast<double>(d);
        }
        if (qi == 3) break;
    }
    return out;
}

}  // namespace linoct
