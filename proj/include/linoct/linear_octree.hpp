#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "linoct/reorder.hpp"
#include "linoct/sfc.hpp"

namespace linoct {

/// Leaf code boundaries and per-leaf point offsets. boundaries starts at 0,
/// ends at 8^level, is strictly increasing, and every span is an aligned
/// power of 8 — each leaf is a genuine octant code block. offsets[i] is the
/// cloud index of the first point with code >= boundaries[i]; the last entry
/// equals the cloud size.
struct LeafArray {
    std::vector<std::uint64_t> boundaries;
    std::vector<std::uint32_t> offsets;

    [[nodiscard]] std::size_t leaf_count() const { return boundaries.size() - 1; }
};

/// Iterative refinement over the sorted code array: starting from the full
/// code range, any block holding more than n_max points splits into its 8
/// aligned sub-blocks, until blocks fit or shrink to a single cell. Point
/// counts come from binary searches on the codes. Empty blocks are retained
/// as zero-count leaves. The parallel path refines blocks of each round
/// concurrently and produces the same arrays as the sequential one.
LeafArray build_leaves(const std::vector<std::uint64_t>& codes, std::uint32_t n_max,
                       int level = kMaxLevel, int threads = 1);

/// Array-backed octree over an SFC-sorted cloud. Leaves live in a boundary
/// array, internal nodes in a flat table with integer handles, and every
/// node knows its contiguous cloud-index range, so whole octants can be
/// emitted without touching their points.
class LinearOctree {
  public:
    /// Node handle: >= 0 indexes the internal-node table, < 0 is a leaf
    /// reference encoding leaf id as ~ref.
    using NodeRef = std::int32_t;

    struct InternalNode {
        std::uint64_t prefix = 0;  // level-L code of the block's first cell
        std::array<NodeRef, 8> children{};
        std::uint32_t begin = 0;  // cloud index range [begin, end)
        std::uint32_t end = 0;
        std::uint8_t depth = 0;
        std::uint8_t child_mask = 0;  // bit c set iff child c holds points
    };

    LinearOctree(const CodedCloud& coded, std::uint32_t n_max = 128, int threads = 1);

    /// Links a prebuilt leaf array; throws on misaligned or unordered spans.
    LinearOctree(LeafArray leaf_array, Discretizer disc, Curve curve, std::uint32_t n_max);

    static bool is_leaf(NodeRef ref) { return ref < 0; }
    static std::uint32_t leaf_id(NodeRef ref) { return static_cast<std::uint32_t>(~ref); }
    static NodeRef leaf_ref(std::uint32_t id) { return ~static_cast<NodeRef>(id); }

    [[nodiscard]] NodeRef root() const { return root_; }
    [[nodiscard]] const InternalNode& internal(NodeRef ref) const { return nodes_[ref]; }

    /// Contiguous cloud-index range of any node, O(1).
    [[nodiscard]] std::pair<std::uint32_t, std::uint32_t> points_in_node(NodeRef ref) const {
        if (is_leaf(ref)) {
            const std::uint32_t id = leaf_id(ref);
            return {leaves_.offsets[id], leaves_.offsets[id + 1]};
        }
        return {nodes_[ref].begin, nodes_[ref].end};
    }

    [[nodiscard]] std::uint64_t node_prefix(NodeRef ref) const {
        return is_leaf(ref) ? leaves_.boundaries[leaf_id(ref)] : nodes_[ref].prefix;
    }

    [[nodiscard]] int node_depth(NodeRef ref) const {
        if (!is_leaf(ref)) return nodes_[ref].depth;
        const std::uint32_t id = leaf_id(ref);
        const std::uint64_t span = leaves_.boundaries[id + 1] - leaves_.boundaries[id];
        return level_ - std::countr_zero(span) / 3;
    }

    /// World-space box of the node's octant, derived from its code prefix.
    [[nodiscard]] Aabb node_bounds(NodeRef ref) const;

    [[nodiscard]] const LeafArray& leaves() const { return leaves_; }
    [[nodiscard]] const std::vector<InternalNode>& internal_nodes() const { return nodes_; }
    [[nodiscard]] std::size_t leaf_count() const { return leaves_.leaf_count(); }
    [[nodiscard]] std::size_t internal_count() const { return nodes_.size(); }
    [[nodiscard]] std::size_t node_count() const { return leaf_count() + internal_count(); }
    [[nodiscard]] std::size_t point_count() const { return leaves_.offsets.back(); }

    [[nodiscard]] const Discretizer& discretizer() const { return disc_; }
    [[nodiscard]] Curve curve() const { return curve_; }
    [[nodiscard]] int level() const { return level_; }
    [[nodiscard]] std::uint32_t n_max() const { return n_max_; }

    void serialize(std::ostream& os) const;
    static LinearOctree deserialize(std::istream& is);

  private:
    LinearOctree() = default;
    void link_internal();
    NodeRef link_range(std::uint32_t leaf_lo, std::uint32_t leaf_hi, std::uint64_t prefix,
                       int depth);

    LeafArray leaves_;
    std::vector<InternalNode> nodes_;
    NodeRef root_ = 0;
    Discretizer disc_;
    Curve curve_ = Curve::Morton;
    int level_ = kMaxLevel;
    std::uint32_t n_max_ = 128;
};

}  // namespace linoct
