#include "linoct/search.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <numeric>
#include <stdexcept>

#include "linoct/rng.hpp"

namespace linoct {

namespace {

using NodeRef = LinearOctree::NodeRef;

// Descent frame: node handle plus the octant's high grid bits and the
// curve's orientation state, so child octants come from table steps instead
// of code decoding.
struct Frame {
    NodeRef ref;
    std::uint32_t hx, hy, hz;
    std::uint8_t depth;
    std::uint8_t state;
};

thread_local std::vector<Frame> tl_stack;

inline void push_children(const LinearOctree& tree, const CurveStepper& step,
                          const Frame& parent, std::vector<Frame>& stack) {
    const auto& node = tree.internal(parent.ref);
    for (int c = 7; c >= 0; --c) {
        const NodeRef child = node.children[c];
        const auto [b, e] = tree.points_in_node(child);
        if (b == e) continue;
        const std::uint8_t g = step.child_digit(parent.state, c);
        stack.push_back({child, parent.hx << 1 | (g >> 2 & 1), parent.hy << 1 | (g >> 1 & 1),
                         parent.hz << 1 | (g & 1), static_cast<std::uint8_t>(parent.depth + 1),
                         step.child_state(parent.state, c)});
    }
}

}  // namespace

void neighbours_lin(const LinearOctree& tree, const CodedCloud& coded,
                    const SearchKernel& kernel, std::vector<std::uint32_t>& out) {
    out.clear();
    const PointCloud& cloud = coded.cloud;
    const Discretizer& disc = tree.discretizer();
    const CurveStepper& step = CurveStepper::of(tree.curve());
    std::vector<Frame>& stack = tl_stack;
    stack.clear();
    if (tree.point_count() > 0) stack.push_back({tree.root(), 0, 0, 0, 0, step.root_state()});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (kernel_octant_disjoint(kernel, disc.octant_bounds(f.hx, f.hy, f.hz, f.depth))) {
            continue;
        }
        if (LinearOctree::is_leaf(f.ref)) {
            const auto [b, e] = tree.points_in_node(f.ref);
            for (std::uint32_t i = b; i < e; ++i) {
                if (kernel_contains(kernel, cloud[i])) out.push_back(i);
            }
        } else {
            push_children(tree, step, f, stack);
        }
    }
}

namespace {

// Shared traversal of the pruned variants: Contains emits the node's whole
// range, Disjoint prunes, leaves get per-point checks.
template <class EmitRange, class EmitPoint>
void pruned_traversal(const LinearOctree& tree, const CodedCloud& coded,
                      const SearchKernel& kernel, EmitRange&& emit_range,
                      EmitPoint&& emit_point) {
    const PointCloud& cloud = coded.cloud;
    const Discretizer& disc = tree.discretizer();
    const CurveStepper& step = CurveStepper::of(tree.curve());
    std::vector<Frame>& stack = tl_stack;
    stack.clear();
    if (tree.point_count() > 0) stack.push_back({tree.root(), 0, 0, 0, 0, step.root_state()});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        const OctantRelation rel =
            kernel_octant_relation(kernel, disc.octant_bounds(f.hx, f.hy, f.hz, f.depth));
        if (rel == OctantRelation::Disjoint) continue;
        if (rel == OctantRelation::Contains) {
            const auto [b, e] = tree.points_in_node(f.ref);
            emit_range(b, e);
            continue;
        }
        if (LinearOctree::is_leaf(f.ref)) {
            const auto [b, e] = tree.points_in_node(f.ref);
            for (std::uint32_t i = b; i < e; ++i) {
                if (kernel_contains(kernel, cloud[i])) emit_point(i);
            }
        } else {
            push_children(tree, step, f, stack);
        }
    }
}

}  // namespace

void neighbours_prune(const LinearOctree& tree, const CodedCloud& coded,
                      const SearchKernel& kernel, std::vector<std::uint32_t>& out) {
    out.clear();
    pruned_traversal(
        tree, coded, kernel,
        [&](std::uint32_t b, std::uint32_t e) {
            const std::size_t at = out.size();
            out.resize(at + (e - b));
            std::iota(out.begin() + at, out.end(), b);
        },
        [&](std::uint32_t i) { out.push_back(i); });
}

void neighbours_struct(const LinearOctree& tree, const CodedCloud& coded,
                       const SearchKernel& kernel, RangedResult& out) {
    out.clear();
    pruned_traversal(
        tree, coded, kernel,
        [&](std::uint32_t b, std::uint32_t e) {
            if (!out.ranges.empty() && out.ranges.back().second == b) {
                out.ranges.back().second = e;  // adjacent contained octants coalesce
            } else {
                out.ranges.emplace_back(b, e);
            }
        },
        [&](std::uint32_t i) { out.singles.push_back(i); });
}

std::vector<std::uint32_t> neighbours_lin(const LinearOctree& tree, const CodedCloud& coded,
                                          const SearchKernel& kernel) {
    std::vector<std::uint32_t> out;
    neighbours_lin(tree, coded, kernel, out);
    return out;
}

std::vector<std::uint32_t> neighbours_prune(const LinearOctree& tree, const CodedCloud& coded,
                                            const SearchKernel& kernel) {
    std::vector<std::uint32_t> out;
    neighbours_prune(tree, coded, kernel, out);
    return out;
}

RangedResult neighbours_struct(const LinearOctree& tree, const CodedCloud& coded,
                               const SearchKernel& kernel) {
    RangedResult out;
    neighbours_struct(tree, coded, kernel, out);
    return out;
}

namespace {

// Queue entry per the best-first search: octants carry their depth and the
// clamped lower-bound distance, points carry depth 0 and their exact
// distance. `tie` is 0 for octants and 1 for points so octants pop first at
// equal distance.
struct QueueEntry {
    double dist_sq;
    std::uint32_t tie;
    std::uint32_t id;  // point index, or NodeRef bit pattern for octants
    std::uint32_t hx, hy, hz;
    std::uint8_t depth;
    std::uint8_t state;
};

inline bool heap_after(const QueueEntry& a, const QueueEntry& b) {
    if (a.dist_sq != b.dist_sq) return a.dist_sq > b.dist_sq;
    if (a.tie != b.tie) return a.tie > b.tie;
    return a.id > b.id;
}

inline double point_dist_sq(const Point& a, const Point& b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    const double dz = a.z - b.z;
    return dx * dx + dy * dy + dz * dz;
}

thread_local std::vector<QueueEntry> tl_heap;

}  // namespace

void knn_lin_oct(const LinearOctree& tree, const CodedCloud& coded, const Point& center,
                 std::uint32_t k, std::vector<KnnNeighbor>& out, KnnAudit* audit) {
    if (k < 1) throw std::invalid_argument("knn: k must be >= 1");
    out.clear();
    const PointCloud& cloud = coded.cloud;
    const Discretizer& disc = tree.discretizer();
    const CurveStepper& step = CurveStepper::of(tree.curve());
    std::vector<QueueEntry>& heap = tl_heap;
    heap.clear();

    const auto push_octant = [&](QueueEntry entry) {
        const auto [b, e] = tree.points_in_node(static_cast<NodeRef>(entry.id));
        if (b == e) return;
        entry.dist_sq = octant_point_distance_sq(
            disc.octant_bounds(entry.hx, entry.hy, entry.hz, entry.depth), center);
        entry.tie = 0;
        heap.push_back(entry);
        std::push_heap(heap.begin(), heap.end(), heap_after);
    };

    if (tree.point_count() > 0) {
        push_octant({0.0, 0, static_cast<std::uint32_t>(tree.root()), 0, 0, 0, 0,
                     step.root_state()});
    }

    while (!heap.empty() && out.size() < k) {
        std::pop_heap(heap.begin(), heap.end(), heap_after);
        const QueueEntry top = heap.back();
        heap.pop_back();

        if (top.tie == 1) {
            if (audit) {
                ++audit->emissions;
                for (const QueueEntry& q : heap) {
                    if (q.tie == 0) {
                        audit->worst_margin =
                            std::max(audit->worst_margin, top.dist_sq - q.dist_sq);
                    }
                }
            }
            out.push_back({top.id, top.dist_sq});
            continue;
        }

        const NodeRef ref = static_cast<NodeRef>(top.id);
        if (LinearOctree::is_leaf(ref)) {
            const auto [b, e] = tree.points_in_node(ref);
            for (std::uint32_t i = b; i < e; ++i) {
                heap.push_back({point_dist_sq(cloud[i], center), 1, i, 0, 0, 0, 0, 0});
                std::push_heap(heap.begin(), heap.end(), heap_after);
            }
        } else {
            const auto& node = tree.internal(ref);
            for (int c = 0; c < 8; ++c) {
                const std::uint8_t g = step.child_digit(top.state, c);
                push_octant({0.0, 0, static_cast<std::uint32_t>(node.children[c]),
                             top.hx << 1 | (g >> 2 & 1), top.hy << 1 | (g >> 1 & 1),
                             top.hz << 1 | (g & 1), static_cast<std::uint8_t>(top.depth + 1),
                             step.child_state(top.state, c)});
            }
        }
    }
}

std::vector<KnnNeighbor> knn_lin_oct(const LinearOctree& tree, const CodedCloud& coded,
                                     const Point& center, std::uint32_t k, KnnAudit* audit) {
    std::vector<KnnNeighbor> out;
    knn_lin_oct(tree, coded, center, k, out, audit);
    return out;
}

namespace {

inline std::uint64_t fnv1a64(std::uint64_t hash, std::uint64_t value) {
    for (int i = 0; i < 8; ++i) {
        hash ^= (value >> (8 * i)) & 0xff;
        hash *= 0x100000001b3;
    }
    return hash;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325;

std::vector<std::uint32_t> batch_centers(std::size_t n, const BatchOptions& options) {
    if (options.mode == BatchMode::Full) {
        std::vector<std::uint32_t> centers(n);
        for (std::uint32_t i = 0; i < n; ++i) centers[i] = i;
        return centers;
    }
    if (options.subset_size > n) {
        throw std::invalid_argument("batch: subset size exceeds cloud size");
    }
    return sample_indices(static_cast<std::uint32_t>(n), options.subset_size, options.seed);
}

// Runs `query(centre_index, fingerprint*, collected*) -> count` for every
// centre with dynamic scheduling and gathers the digests in centre order.
template <class Query>
BatchResult run_batch_loop(std::size_t cloud_size, const BatchOptions& options, Query&& query) {
    BatchResult res;
    res.centers = batch_centers(cloud_size, options);
    const std::int64_t m = static_cast<std::int64_t>(res.centers.size());
    res.counts.assign(m, 0);
    if (options.fingerprint) res.fingerprints.assign(m, 0);
    if (options.collect_results) res.results.assign(m, {});

    const auto start = std::chrono::steady_clock::now();
#pragma omp parallel for schedule(dynamic) num_threads(options.threads)
    for (std::int64_t i = 0; i < m; ++i) {
        std::uint64_t* fp = options.fingerprint ? &res.fingerprints[i] : nullptr;
        if (fp) *fp = kFnvOffset;
        std::vector<std::uint32_t>* sink =
            options.collect_results ? &res.results[i] : nullptr;
        res.counts[i] = query(res.centers[i], fp, sink);
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                           .count();

    double sum = 0.0;
    for (std::uint32_t c : res.counts) sum += c;
    res.mean_count = m == 0 ? 0.0 : sum / static_cast<double>(m);
    return res;
}

}  // namespace

BatchResult run_radius_batch(const LinearOctree& tree, const CodedCloud& coded,
                             RadiusMethod method, KernelShape shape, double radius,
                             const BatchOptions& options) {
    if (method == RadiusMethod::Ptr) {
        throw std::invalid_argument("run_radius_batch: ptr method needs a pointer octree");
    }
    const PointCloud& cloud = coded.cloud;
    return run_batch_loop(cloud.size(), options, [&](std::uint32_t centre, std::uint64_t* fp,
                                                     std::vector<std::uint32_t>* sink) {
        const SearchKernel kernel(shape, cloud[centre], radius);
        thread_local std::vector<std::uint32_t> indices;
        thread_local RangedResult ranged;
        if (method == RadiusMethod::Struct) {
            neighbours_struct(tree, coded, kernel, ranged);
            if (fp) {
                for (const auto& [b, e] : ranged.ranges) {
                    *fp = fnv1a64(*fp, (std::uint64_t{b} << 32) | e);
                }
                *fp = fnv1a64(*fp, 0xffffffffffffffff);  // separator
                for (std::uint32_t s : ranged.singles) *fp = fnv1a64(*fp, s);
            }
            if (sink) *sink = ranged.expand();
            return static_cast<std::uint32_t>(ranged.count());
        }
        if (method == RadiusMethod::Lin) {
            neighbours_lin(tree, coded, kernel, indices);
        } else {
            neighbours_prune(tree, coded, kernel, indices);
        }
        if (fp) {
            for (std::uint32_t idx : indices) *fp = fnv1a64(*fp, idx);
        }
        if (sink) *sink = indices;
        return static_cast<std::uint32_t>(indices.size());
    });
}

BatchResult run_radius_batch_ptr(const PointerOctree& tree, const PointCloud& cloud,
                                 KernelShape shape, double radius,
                                 const BatchOptions& options) {
    return run_batch_loop(cloud.size(), options, [&](std::uint32_t centre, std::uint64_t* fp,
                                                     std::vector<std::uint32_t>* sink) {
        const SearchKernel kernel(shape, cloud[centre], radius);
        thread_local std::vector<std::uint32_t> indices;
        tree.neighbours(kernel, indices);
        if (fp) {
            for (std::uint32_t idx : indices) *fp = fnv1a64(*fp, idx);
        }
        if (sink) *sink = indices;
        return static_cast<std::uint32_t>(indices.size());
    });
}

BatchResult run_knn_batch(const LinearOctree& tree, const CodedCloud& coded, std::uint32_t k,
                          const BatchOptions& options) {
    const PointCloud& cloud = coded.cloud;
    return run_batch_loop(cloud.size(), options, [&](std::uint32_t centre, std::uint64_t* fp,
                                                     std::vector<std::uint32_t>* sink) {
        thread_local std::vector<KnnNeighbor> found;
        knn_lin_oct(tree, coded, cloud[centre], k, found);
        if (fp) {
            for (const KnnNeighbor& nb : found) {
                *fp = fnv1a64(*fp, nb.index);
                *fp = fnv1a64(*fp, std::bit_cast<std::uint64_t>(nb.dist_sq));
            }
        }
        if (sink) {
            sink->clear();
            for (const KnnNeighbor& nb : found) sink->push_back(nb.index);
        }
        return static_cast<std::uint32_t>(found.size());
    });
}

}  // namespace linoct
