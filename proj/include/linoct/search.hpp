#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "linoct/geometry.hpp"
#include "linoct/linear_octree.hpp"
#include "linoct/pointer_octree.hpp"
#include "linoct/reorder.hpp"

namespace linoct {

/// Neighbourhood kept as disjoint, ascending [begin, end) cloud-index
/// ranges plus the individually checked survivor indices. Memory is
/// O(#ranges + #singles) rather than O(#members).
struct RangedResult {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> ranges;
    std::vector<std::uint32_t> singles;

    [[nodiscard]] std::size_t count() const {
        std::size_t n = singles.size();
        for (const auto& [b, e] : ranges) n += e - b;
        return n;
    }

    /// Visits member indices in ascending order (ranges and singles never
    /// overlap, so a two-pointer merge suffices).
    template <class Fn>
    void for_each_index(Fn&& fn) const {
        auto r = ranges.begin();
        auto s = singles.begin();
        while (r != ranges.end() || s != singles.end()) {
            if (s == singles.end() || (r != ranges.end() && r->first < *s)) {
                for (std::uint32_t i = r->first; i < r->second; ++i) fn(i);
                ++r;
            } else {
                fn(*s);
                ++s;
            }
        }
    }

    [[nodiscard]] std::vector<std::uint32_t> expand() const {
        std::vector<std::uint32_t> out;
        out.reserve(count());
        for_each_index([&](std::uint32_t i) { out.push_back(i); });
        return out;
    }

    void clear() {
        ranges.clear();
        singles.clear();
    }
};

/// Basic linear-octree search: descends into children meeting the kernel
/// and checks leaf points one by one. Returns ascending indices into the
/// reordered cloud.
std::vector<std::uint32_t> neighbours_lin(const LinearOctree& tree, const CodedCloud& coded,
                                          const SearchKernel& kernel);
void neighbours_lin(const LinearOctree& tree, const CodedCloud& coded,
                    const SearchKernel& kernel, std::vector<std::uint32_t>& out);

/// Like neighbours_lin, but a node fully contained in the kernel emits its
/// whole index range without per-point checks.
std::vector<std::uint32_t> neighbours_prune(const LinearOctree& tree, const CodedCloud& coded,
                                            const SearchKernel& kernel);
void neighbours_prune(const LinearOctree& tree, const CodedCloud& coded,
                      const SearchKernel& kernel, std::vector<std::uint32_t>& out);

/// Like neighbours_prune, but contained nodes contribute index ranges
/// instead of materialized indices.
RangedResult neighbours_struct(const LinearOctree& tree, const CodedCloud& coded,
                               const SearchKernel& kernel);
void neighbours_struct(const LinearOctree& tree, const CodedCloud& coded,
                       const SearchKernel& kernel, RangedResult& out);

struct KnnNeighbor {
    std::uint32_t index;
    double dist_sq;

    friend bool operator==(const KnnNeighbor&, const KnnNeighbor&) = default;
};

/// Test instrumentation for the kNN priority queue: `worst_margin` is the
/// largest (emitted distance - smallest queued octant bound) observed; a
/// correct best-first order keeps it <= 0.
struct KnnAudit {
    double worst_margin = -std::numeric_limits<double>::infinity();
    std::size_t emissions = 0;
};

/// Best-first kNN over the linear octree: a priority queue holds octants
/// keyed by clamped squared distance and points by exact squared distance.
/// At equal keys octants pop before points, so every point at the k-th
/// distance is queued before any of them is emitted and ties resolve by
/// ascending index. Returns (index, dist_sq) ascending by (dist_sq, index);
/// k > N returns all N points.
std::vector<KnnNeighbor> knn_lin_oct(const LinearOctree& tree, const CodedCloud& coded,
                                     const Point& center, std::uint32_t k,
                                     KnnAudit* audit = nullptr);
void knn_lin_oct(const LinearOctree& tree, const CodedCloud& coded, const Point& center,
                 std::uint32_t k, std::vector<KnnNeighbor>& out, KnnAudit* audit = nullptr);

enum class BatchMode { Full, RandomSubset };
enum class RadiusMethod { Ptr, Lin, Prune, Struct };

struct BatchOptions {
    BatchMode mode = BatchMode::Full;
    std::uint32_t subset_size = 5000;
    std::uint64_t seed = 0;
    int threads = 1;
    bool collect_results = false;  // retain per-centre index lists (small runs only)
    bool fingerprint = true;       // per-centre digests; disable for pure timing runs
};

/// Per-centre result digests plus the timing summary. counts, fingerprints
/// and results are bitwise identical for any thread count.
struct BatchResult {
    std::vector<std::uint32_t> centers;       // cloud indices, query order
    std::vector<std::uint32_t> counts;        // members found per centre
    std::vector<std::uint64_t> fingerprints;  // order-sensitive digest per centre
    std::vector<std::vector<std::uint32_t>> results;  // filled when collect_results
    double wall_seconds = 0.0;
    double mean_count = 0.0;  // mu
    [[nodiscard]] double mean_query_seconds() const {
        return centers.empty() ? 0.0 : wall_seconds / static_cast<double>(centers.size());
    }
};

/// Loop-level parallel batch over centres drawn from the cloud, dynamic
/// scheduling, results stored in centre order.
BatchResult run_radius_batch(const LinearOctree& tree, const CodedCloud& coded,
                             RadiusMethod method, KernelShape shape, double radius,
                             const BatchOptions& options);

/// Pointer-octree backend of the same batch loop (method `ptr`); works on
/// unordered clouds as well.
BatchResult run_radius_batch_ptr(const PointerOctree& tree, const PointCloud& cloud,
                                 KernelShape shape, double radius,
                                 const BatchOptions& options);

BatchResult run_knn_batch(const LinearOctree& tree, const CodedCloud& coded, std::uint32_t k,
                          const BatchOptions& options);

}  // namespace linoct
