#include "linoct/linear_octree.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

#include "linoct/endian.hpp"

namespace linoct {

namespace {

std::uint32_t rank_of(const std::vector<std::uint64_t>& codes, std::uint64_t boundary) {
    return static_cast<std::uint32_t>(
        std::lower_bound(codes.begin(), codes.end(), boundary) - codes.begin());
}

}  // namespace

LeafArray build_leaves(const std::vector<std::uint64_t>& codes, std::uint32_t n_max, int level,
                       int threads) {
    if (n_max < 1) throw std::invalid_argument("build_leaves: n_max must be >= 1");
    if (codes.empty()) throw std::invalid_argument("build_leaves: empty code array");
    bool sorted = true;
    const std::int64_t n = static_cast<std::int64_t>(codes.size());
#pragma omp parallel for schedule(static) num_threads(threads) reduction(&& : sorted)
    for (std::int64_t i = 1; i < n; ++i) sorted = sorted && codes[i - 1] <= codes[i];
    if (!sorted) throw std::invalid_argument("build_leaves: codes are not sorted");
    const std::uint64_t full = std::uint64_t{1} << (3 * level);
    if (codes.back() >= full) throw std::invalid_argument("build_leaves: code exceeds 8^level");

    std::vector<std::uint64_t> bounds = {0, full};
    std::vector<std::uint32_t> ranks = {0, static_cast<std::uint32_t>(codes.size())};
    std::vector<std::uint8_t> split;
    std::vector<std::size_t> out_pos;

    for (;;) {
        const std::int64_t m = static_cast<std::int64_t>(bounds.size()) - 1;
        split.assign(m, 0);

#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t i = 0; i < m; ++i) {
            const std::uint64_t span = bounds[i + 1] - bounds[i];
            const std::uint32_t count = ranks[i + 1] - ranks[i];
            split[i] = (count > n_max && span > 1) ? 1 : 0;
        }

        out_pos.assign(m + 1, 0);
        for (std::int64_t i = 0; i < m; ++i) out_pos[i + 1] = out_pos[i] + (split[i] ? 8 : 1);
        if (out_pos[m] == static_cast<std::size_t>(m)) break;  // no block split this round

        std::vector<std::uint64_t> next(out_pos[m] + 1);
        next.back() = full;
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t i = 0; i < m; ++i) {
            if (!split[i]) {
                next[out_pos[i]] = bounds[i];
            } else {
                const std::uint64_t sub = (bounds[i + 1] - bounds[i]) >> 3;
                for (int c = 0; c < 8; ++c) next[out_pos[i] + c] = bounds[i] + c * sub;
            }
        }

        std::vector<std::uint32_t> next_ranks(next.size());
        const std::int64_t nb = static_cast<std::int64_t>(next.size());
#pragma omp parallel for schedule(static) num_threads(threads)
        for (std::int64_t j = 0; j < nb; ++j) next_ranks[j] = rank_of(codes, next[j]);

        bounds.swap(next);
        ranks.swap(next_ranks);
    }
    return {std::move(bounds), std::move(ranks)};
}

LinearOctree::LinearOctree(const CodedCloud& coded, std::uint32_t n_max, int threads)
    : disc_(coded.discretizer), curve_(coded.curve), level_(coded.discretizer.level()),
      n_max_(n_max) {
    leaves_ = build_leaves(coded.codes, n_max, level_, threads);
    link_internal();
}

LinearOctree::LinearOctree(LeafArray leaf_array, Discretizer disc, Curve curve,
                           std::uint32_t n_max)
    : leaves_(std::move(leaf_array)), disc_(disc), curve_(curve), level_(disc.level()),
      n_max_(n_max) {
    const auto& b = leaves_.boundaries;
    const std::uint64_t full = std::uint64_t{1} << (3 * level_);
    if (b.size() < 2 || b.front() != 0 || b.back() != full ||
        leaves_.offsets.size() != b.size() || leaves_.offsets.front() != 0) {
        throw std::invalid_argument("linear octree: malformed leaf array");
    }
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
        const std::uint64_t span = b[i + 1] - b[i];
        const bool aligned_pow8 = b[i + 1] > b[i] && std::has_single_bit(span) &&
                                  std::countr_zero(span) % 3 == 0 && b[i] % span == 0;
        if (!aligned_pow8 || leaves_.offsets[i] > leaves_.offsets[i + 1]) {
            throw std::invalid_argument("linear octree: misaligned leaf span at " +
                                        std::to_string(i));
        }
    }
    link_internal();
}

void LinearOctree::link_internal() {
    nodes_.clear();
    nodes_.reserve(leaves_.leaf_count() / 7 + 8);
    root_ = link_range(0, static_cast<std::uint32_t>(leaves_.leaf_count()), 0, 0);
}

LinearOctree::NodeRef LinearOctree::link_range(std::uint32_t leaf_lo, std::uint32_t leaf_hi,
                                               std::uint64_t prefix, int depth) {
    if (leaf_hi - leaf_lo == 1) return leaf_ref(leaf_lo);

    const std::uint32_t id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back({prefix, {}, leaves_.offsets[leaf_lo], leaves_.offsets[leaf_hi],
                      static_cast<std::uint8_t>(depth), 0});

    const std::uint64_t sub = (std::uint64_t{1} << (3 * (level_ - depth))) >> 3;
    std::uint32_t cursor = leaf_lo;
    for (int c = 0; c < 8; ++c) {
        const std::uint64_t child_end = prefix + (c + 1) * sub;
        std::uint32_t next = cursor;
        while (leaves_.boundaries[next + 1] < child_end) ++next;
        if (leaves_.boundaries[next + 1] != child_end) {
            throw std::invalid_argument("linear octree: leaf spans do not tile the blocks");
        }
        const NodeRef child = link_range(cursor, next + 1, prefix + c * sub, depth + 1);
        nodes_[id].children[c] = child;
        const auto [b, e] = points_in_node(child);
        if (b != e) nodes_[id].child_mask |= static_cast<std::uint8_t>(1u << c);
        cursor = next + 1;
    }
    return static_cast<NodeRef>(id);
}

Aabb LinearOctree::node_bounds(NodeRef ref) const {
    const int depth = node_depth(ref);
    // Recursive SFC: the top 3*depth code bits decode, at level `depth`,
    // into exactly the top depth bits of each axis (pinned by the
    // prefix-restriction test), so shallow nodes avoid a full-depth decode.
    const int shift = level_ - depth;
    const GridCell high = sfc_decode(curve_, node_prefix(ref) >> (3 * shift), depth);
    return disc_.octant_bounds(high.x, high.y, high.z, depth);
}

void LinearOctree::serialize(std::ostream& os) const {
    os.write("LOC1", 4);
    detail::put_u32(os, static_cast<std::uint32_t>(level_));
    detail::put_u32(os, curve_ == Curve::Morton ? 0 : 1);
    detail::put_u32(os, n_max_);
    const Aabb& b = disc_.bbox();
    for (double v : {b.min_corner.x, b.min_corner.y, b.min_corner.z, b.max_corner.x,
                     b.max_corner.y, b.max_corner.z}) {
        detail::put_f64(os, v);
    }
    detail::put_u64(os, leaves_.boundaries.size());
    for (std::uint64_t v : leaves_.boundaries) detail::put_u64(os, v);
    for (std::uint32_t v : leaves_.offsets) detail::put_u32(os, v);
}

LinearOctree LinearOctree::deserialize(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::string_view(magic, 4) != "LOC1") {
        throw std::runtime_error("linear octree stream: bad magic");
    }
    std::uint32_t level, curve, n_max;
    std::uint64_t count;
    Aabb box;
    if (!detail::get_u32(is, level) || !detail::get_u32(is, curve) ||
        !detail::get_u32(is, n_max) || !detail::get_f64(is, box.min_corner.x) ||
        !detail::get_f64(is, box.min_corner.y) || !detail::get_f64(is, box.min_corner.z) ||
        !detail::get_f64(is, box.max_corner.x) || !detail::get_f64(is, box.max_corner.y) ||
        !detail::get_f64(is, box.max_corner.z) || !detail::get_u64(is, count)) {
        throw std::runtime_error("linear octree stream: truncated header");
    }
    LeafArray la;
    la.boundaries.resize(count);
    la.offsets.resize(count);
    for (auto& v : la.boundaries) {
        if (!detail::get_u64(is, v)) throw std::runtime_error("linear octree stream: truncated");
    }
    for (auto& v : la.offsets) {
        if (!detail::get_u32(is, v)) throw std::runtime_error("linear octree stream: truncated");
    }
    return LinearOctree(std::move(la), Discretizer(box, static_cast<int>(level)),
                        curve == 0 ? Curve::Morton : Curve::Hilbert, n_max);
}

}  // namespace linoct
