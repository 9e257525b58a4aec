#include "linoct/linear_octree.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "linoct/pointer_octree.hpp"
#include "linoct/rng.hpp"
#include "support/oracles.hpp"

using namespace linoct;
using linoct::testing::make_cloud;

namespace {

CodedCloud coded_cloud(SyntheticSpec::Kind kind, std::uint64_t n, std::uint64_t seed,
                       Curve curve) {
    return reorder_cloud(make_cloud(kind, n, seed), curve);
}

}  // namespace

TEST(BuildLeaves, SmallCloudKeepsRootLeaf) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Uniform, 100, 1, Curve::Morton);
    const LeafArray la = build_leaves(coded.codes, 128);
    ASSERT_EQ(la.boundaries.size(), 2u);
    EXPECT_EQ(la.boundaries[0], 0u);
    EXPECT_EQ(la.boundaries[1], std::uint64_t{1} << 63);
    EXPECT_EQ(la.offsets[0], 0u);
    EXPECT_EQ(la.offsets[1], 100u);
}

TEST(BuildLeaves, TwoPointsOneSubdivisionRound) {
    // Two points in different depth-1 octants with n_max = 1: exactly one
    // round of subdivision, eight leaves, the points in distinct leaves.
    const PointCloud cloud({{0.1, 0.1, 0.1}, {7.9, 7.9, 7.9}});
    const CodedCloud coded = reorder_cloud(cloud, Curve::Morton);
    const LeafArray la = build_leaves(coded.codes, 1);
    ASSERT_EQ(la.boundaries.size(), 9u);
    std::vector<std::uint32_t> counts;
    for (std::size_t i = 0; i + 1 < la.offsets.size(); ++i) {
        counts.push_back(la.offsets[i + 1] - la.offsets[i]);
    }
    EXPECT_EQ(std::count(counts.begin(), counts.end(), 1u), 2);
    EXPECT_EQ(std::count(counts.begin(), counts.end(), 0u), 6);
}

TEST(BuildLeaves, CountsBoundedAndSumToN) {
    for (Curve curve : {Curve::Morton, Curve::Hilbert}) {
        const CodedCloud coded =
            coded_cloud(SyntheticSpec::Kind::GaussianClusters, 10000, 77, curve);
        const LeafArray la = build_leaves(coded.codes, 128);
        std::uint64_t total = 0;
        for (std::size_t i = 0; i + 1 < la.boundaries.size(); ++i) {
            const std::uint32_t count = la.offsets[i + 1] - la.offsets[i];
            const std::uint64_t span = la.boundaries[i + 1] - la.boundaries[i];
            if (span > 1) ASSERT_LE(count, 128u);
            total += count;
            // Recount oracle: binary search directly on the codes.
            const auto lo = std::lower_bound(coded.codes.begin(), coded.codes.end(),
                                             la.boundaries[i]);
            const auto hi = std::lower_bound(coded.codes.begin(), coded.codes.end(),
                                             la.boundaries[i + 1]);
            ASSERT_EQ(static_cast<std::uint32_t>(hi - lo), count);
        }
        EXPECT_EQ(total, 10000u);
    }
}

TEST(BuildLeaves, TilesTheCodeRangeWithAlignedSpans) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Surface, 8000, 3, Curve::Hilbert);
    const LeafArray la = build_leaves(coded.codes, 32);
    ASSERT_GE(la.boundaries.size(), 2u);
    EXPECT_EQ(la.boundaries.front(), 0u);
    EXPECT_EQ(la.boundaries.back(), std::uint64_t{1} << 63);
    for (std::size_t i = 0; i + 1 < la.boundaries.size(); ++i) {
        const std::uint64_t span = la.boundaries[i + 1] - la.boundaries[i];
        ASSERT_LT(la.boundaries[i], la.boundaries[i + 1]);
        ASSERT_TRUE(std::has_single_bit(span));
        ASSERT_EQ(std::countr_zero(span) % 3, 0);
        ASSERT_EQ(la.boundaries[i] % span, 0u);
    }
}

TEST(BuildLeaves, CoincidentPointsStopAtSingleCell) {
    std::vector<Point> pts(10, Point{1, 1, 1});
    pts.push_back({5, 5, 5});
    const CodedCloud coded = reorder_cloud(PointCloud(pts), Curve::Morton);
    const LeafArray la = build_leaves(coded.codes, 2);  // 10 coincident > n_max
    for (std::size_t i = 0; i + 1 < la.boundaries.size(); ++i) {
        const std::uint64_t span = la.boundaries[i + 1] - la.boundaries[i];
        const std::uint32_t count = la.offsets[i + 1] - la.offsets[i];
        if (count > 2) EXPECT_EQ(span, 1u);  // only a one-cell block may overflow
    }
}

TEST(BuildLeaves, RejectsBadInput) {
    EXPECT_THROW(build_leaves({}, 8), std::invalid_argument);
    EXPECT_THROW(build_leaves({3, 2, 1}, 8), std::invalid_argument);
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Uniform, 10, 1, Curve::Morton);
    EXPECT_THROW(build_leaves(coded.codes, 0), std::invalid_argument);
}

TEST(BuildLeaves, ThreadCountDoesNotChangeOutput) {
    const CodedCloud coded =
        coded_cloud(SyntheticSpec::Kind::GaussianClusters, 30000, 13, Curve::Hilbert);
    const LeafArray seq = build_leaves(coded.codes, 64, kMaxLevel, 1);
    const LeafArray par = build_leaves(coded.codes, 64, kMaxLevel, 4);
    EXPECT_EQ(seq.boundaries, par.boundaries);
    EXPECT_EQ(seq.offsets, par.offsets);
}

TEST(LinkInternal, SingleLeafTree) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Uniform, 60, 2, Curve::Morton);
    const LinearOctree tree(coded, 128);
    EXPECT_EQ(tree.leaf_count(), 1u);
    EXPECT_EQ(tree.internal_count(), 0u);
    EXPECT_TRUE(LinearOctree::is_leaf(tree.root()));
    const auto [b, e] = tree.points_in_node(tree.root());
    EXPECT_EQ(b, 0u);
    EXPECT_EQ(e, 60u);
}

TEST(LinkInternal, EightUniformLeavesUnderRoot) {
    std::vector<Point> pts;
    for (int d = 0; d < 8; ++d) {
        const double x = (d >> 2 & 1) ? 0.75 : 0.25;
        const double y = (d >> 1 & 1) ? 0.75 : 0.25;
        const double z = (d & 1) ? 0.75 : 0.25;
        pts.push_back({x, y, z});
        pts.push_back({x + 0.01, y, z});
    }
    pts.push_back({0, 0, 0});
    pts.push_back({1, 1, 1});
    const CodedCloud coded = reorder_cloud(PointCloud(pts), Curve::Morton);
    const LinearOctree tree(coded, 3);
    EXPECT_EQ(tree.internal_count(), 1u);
    EXPECT_EQ(tree.leaf_count(), 8u);
    EXPECT_FALSE(LinearOctree::is_leaf(tree.root()));
    for (const auto child : tree.internal(tree.root()).children) {
        EXPECT_TRUE(LinearOctree::is_leaf(child));
    }
}

TEST(LinkInternal, RangesMatchBottomUpOracle) {
    for (Curve curve : {Curve::Morton, Curve::Hilbert}) {
        const CodedCloud coded =
            coded_cloud(SyntheticSpec::Kind::GaussianClusters, 15000, 5, curve);
        const LinearOctree tree(coded, 64);

        // Recompute every internal range as the min/max over descendant
        // leaves, walking the children explicitly.
        struct Frame {
            LinearOctree::NodeRef ref;
        };
        std::vector<LinearOctree::NodeRef> stack{tree.root()};
        while (!stack.empty()) {
            const auto ref = stack.back();
            stack.pop_back();
            if (LinearOctree::is_leaf(ref)) continue;
            const auto& node = tree.internal(ref);
            std::uint32_t lo = UINT32_MAX, hi = 0;
            for (const auto child : node.children) {
                const auto [b, e] = tree.points_in_node(child);
                lo = std::min(lo, b);
                hi = std::max(hi, e);
                stack.push_back(child);
            }
            ASSERT_EQ(lo, node.begin);
            ASSERT_EQ(hi, node.end);
            // Children tile the parent range in ascending code order.
            std::uint32_t cursor = node.begin;
            for (const auto child : node.children) {
                const auto [b, e] = tree.points_in_node(child);
                ASSERT_EQ(b, cursor);
                cursor = e;
            }
            ASSERT_EQ(cursor, node.end);
        }

        const auto [rb, re] = tree.points_in_node(tree.root());
        EXPECT_EQ(rb, 0u);
        EXPECT_EQ(re, coded.cloud.size());
    }
}

TEST(LinkInternal, DepthFirstVisitsEveryLeafOnce) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Uniform, 20000, 8, Curve::Hilbert);
    const LinearOctree tree(coded, 32);
    std::vector<int> visits(tree.leaf_count(), 0);
    std::vector<LinearOctree::NodeRef> stack{tree.root()};
    std::uint64_t last_prefix = 0;
    bool first = true;
    while (!stack.empty()) {
        const auto ref = stack.back();
        stack.pop_back();
        if (LinearOctree::is_leaf(ref)) {
            ++visits[LinearOctree::leaf_id(ref)];
            ASSERT_TRUE(first || tree.node_prefix(ref) >= last_prefix);
            last_prefix = tree.node_prefix(ref);
            first = false;
            continue;
        }
        const auto& node = tree.internal(ref);
        for (int c = 7; c >= 0; --c) stack.push_back(node.children[c]);
    }
    EXPECT_TRUE(std::all_of(visits.begin(), visits.end(), [](int v) { return v == 1; }));
}

TEST(LinkInternal, MalformedLeafArrayThrows) {
    const std::uint64_t full = std::uint64_t{1} << 63;
    // Span 3 * 8^k is not a power of eight.
    LeafArray bad;
    bad.boundaries = {0, 3, full};
    bad.offsets = {0, 1, 2};
    const Discretizer disc(Aabb{{0, 0, 0}, {1, 1, 1}});
    EXPECT_THROW(LinearOctree(bad, disc, Curve::Morton, 8), std::invalid_argument);

    LeafArray valid;
    const std::uint64_t eighth = full >> 3;
    valid.boundaries = {0, eighth, 2 * eighth, 3 * eighth, 4 * eighth,
                        5 * eighth, 6 * eighth, 7 * eighth, full};
    valid.offsets = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_NO_THROW(LinearOctree(valid, disc, Curve::Morton, 8));

    LeafArray unaligned;
    unaligned.boundaries = {0, 64, 64 + 8 * 8 * 8, full};  // 512-span at offset 64
    unaligned.offsets = {0, 1, 2, 3};
    EXPECT_THROW(LinearOctree(unaligned, disc, Curve::Morton, 8), std::invalid_argument);

    LeafArray wrong_end;
    wrong_end.boundaries = {0, 64};
    wrong_end.offsets = {0, 1};
    EXPECT_THROW(LinearOctree(wrong_end, disc, Curve::Morton, 8), std::invalid_argument);
}

TEST(NodeBounds, RootIsCubifiedBbox) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Surface, 4000, 9, Curve::Morton);
    const LinearOctree tree(coded, 64);
    // Bounds of the whole tree: walk up from the root ref.
    std::vector<LinearOctree::NodeRef> stack{tree.root()};
    const Aabb root_bounds = tree.node_bounds(tree.root());
    EXPECT_EQ(root_bounds, coded.discretizer.bbox());
    EXPECT_EQ(root_bounds, cubify(coded.cloud.bbox()));
}

TEST(NodeBounds, EveryLeafContainsItsPoints) {
    for (Curve curve : {Curve::Morton, Curve::Hilbert}) {
        const CodedCloud coded =
            coded_cloud(SyntheticSpec::Kind::GaussianClusters, 20000, 21, curve);
        const LinearOctree tree(coded, 32);
        std::vector<LinearOctree::NodeRef> stack{tree.root()};
        while (!stack.empty()) {
            const auto ref = stack.back();
            stack.pop_back();
            const Aabb bounds = tree.node_bounds(ref);
            const auto [b, e] = tree.points_in_node(ref);
            for (std::uint32_t i = b; i < e; ++i) {
                ASSERT_TRUE(bounds.contains(coded.cloud[i]));
            }
            if (!LinearOctree::is_leaf(ref)) {
                for (const auto child : tree.internal(ref).children) stack.push_back(child);
            }
        }
    }
}

TEST(PointsInNode, MatchesBinarySearchOracle) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Uniform, 12000, 55, Curve::Hilbert);
    const LinearOctree tree(coded, 64);
    std::vector<LinearOctree::NodeRef> stack{tree.root()};
    while (!stack.empty()) {
        const auto ref = stack.back();
        stack.pop_back();
        const auto [b, e] = tree.points_in_node(ref);
        const std::uint64_t prefix = tree.node_prefix(ref);
        const std::uint64_t span = std::uint64_t{1}
                                   << (3 * (tree.level() - tree.node_depth(ref)));
        const auto lo = std::lower_bound(coded.codes.begin(), coded.codes.end(), prefix);
        const auto hi = std::lower_bound(coded.codes.begin(), coded.codes.end(), prefix + span);
        ASSERT_EQ(b, static_cast<std::uint32_t>(lo - coded.codes.begin()));
        ASSERT_EQ(e, static_cast<std::uint32_t>(hi - coded.codes.begin()));
        if (!LinearOctree::is_leaf(ref)) {
            for (const auto child : tree.internal(ref).children) stack.push_back(child);
        }
    }
}

TEST(CrossStructure, OccupiedLeavesMatchPointerOctree) {
    // Same cloud, same n_max, same cubified grid: the multiset of
    // (depth, octant) over occupied leaves must agree between structures.
    for (Curve curve : {Curve::Morton, Curve::Hilbert}) {
        const PointCloud cloud = make_cloud(SyntheticSpec::Kind::GaussianClusters, 9000, 71);
        const CodedCloud coded = reorder_cloud(cloud, curve);
        const LinearOctree lin(coded, 48);
        const PointerOctree ptr(cloud, 48);

        using Key = std::tuple<int, std::uint32_t, std::uint32_t, std::uint32_t>;
        std::map<Key, int> lin_leaves, ptr_leaves;

        for (std::uint32_t i = 0; i < lin.leaf_count(); ++i) {
            const auto ref = LinearOctree::leaf_ref(i);
            const auto [b, e] = lin.points_in_node(ref);
            if (b == e) continue;
            const int depth = lin.node_depth(ref);
            const GridCell cell = sfc_decode(curve, lin.node_prefix(ref), lin.level());
            const int shift = lin.level() - depth;
            ++lin_leaves[{depth, cell.x >> shift, cell.y >> shift, cell.z >> shift}];
        }
        ptr.for_each_leaf([&](int depth, std::uint32_t hx, std::uint32_t hy, std::uint32_t hz,
                              const std::vector<std::uint32_t>& idx) {
            if (!idx.empty()) ++ptr_leaves[{depth, hx, hy, hz}];
        });
        ASSERT_EQ(lin_leaves, ptr_leaves);
    }
}

TEST(CrossStructure, IntersectingLeavesCoverScanResults) {
    std::mt19937_64 gen(83);
    const PointCloud cloud = make_cloud(SyntheticSpec::Kind::Uniform, 8000, 19);
    const CodedCloud coded = reorder_cloud(cloud, Curve::Hilbert);
    const LinearOctree tree(coded, 64);
    for (int it = 0; it < 50; ++it) {
        const SearchKernel kernel(KernelShape::Sphere,
                                  coded.cloud[uniform_below(gen, coded.cloud.size())],
                                  1.0 + uniform_double(gen) * 20.0);
        // Leaves whose bounds meet the kernel must cover every scan member.
        std::vector<bool> covered(coded.cloud.size(), false);
        for (std::uint32_t i = 0; i < tree.leaf_count(); ++i) {
            const auto ref = LinearOctree::leaf_ref(i);
            if (!kernel_octant_disjoint(kernel, tree.node_bounds(ref))) {
                const auto [b, e] = tree.points_in_node(ref);
                for (std::uint32_t j = b; j < e; ++j) covered[j] = true;
            }
        }
        for (std::uint32_t j : linoct::testing::scan_radius(coded.cloud, kernel)) {
            ASSERT_TRUE(covered[j]);
        }
    }
}

TEST(Serialization, RoundTripsStructure) {
    const CodedCloud coded = coded_cloud(SyntheticSpec::Kind::Uniform, 6000, 37, Curve::Hilbert);
    const LinearOctree tree(coded, 64);
    std::stringstream buf;
    tree.serialize(buf);
    const LinearOctree back = LinearOctree::deserialize(buf);
    EXPECT_EQ(back.leaves().boundaries, tree.leaves().boundaries);
    EXPECT_EQ(back.leaves().offsets, tree.leaves().offsets);
    EXPECT_EQ(back.internal_count(), tree.internal_count());
    EXPECT_EQ(back.curve(), tree.curve());
    EXPECT_EQ(back.n_max(), tree.n_max());
    EXPECT_EQ(back.node_bounds(back.root()), tree.node_bounds(tree.root()));

    std::stringstream bad("nope");
    EXPECT_THROW(LinearOctree::deserialize(bad), std::runtime_error);
}
