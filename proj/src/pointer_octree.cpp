#include "linoct/pointer_octree.hpp"

#include <stdexcept>

namespace linoct {

struct PointerOctree::BuildCtx {
    const PointCloud& cloud;
    const std::vector<GridCell>& cells;
    const Discretizer& disc;
    std::uint32_t n_max;
    int max_depth;
};

PointerOctree::PointerOctree(const PointCloud& cloud, std::uint32_t n_max, int max_depth)
    : cloud_(&cloud), point_count_(cloud.size()), n_max_(n_max), max_depth_(max_depth) {
    if (cloud.empty()) throw std::invalid_argument("PointerOctree: empty cloud");
    if (n_max < 1) throw std::invalid_argument("PointerOctree: n_max must be >= 1");
    disc_ = Discretizer(cubify(cloud.bbox()), kMaxLevel);

    std::vector<GridCell> cells(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) cells[i] = disc_.cell(cloud[i]);

    std::vector<std::uint32_t> all(cloud.size());
    for (std::uint32_t i = 0; i < cloud.size(); ++i) all[i] = i;

    BuildCtx ctx{cloud, cells, disc_, n_max, std::min(max_depth, disc_.level())};
    root_ = build(ctx, std::move(all), 0, 0, 0, 0);
}

std::unique_ptr<PointerOctree::Node> PointerOctree::build(BuildCtx& ctx,
                                                          std::vector<std::uint32_t> indices,
                                                          int depth, std::uint32_t hx,
                                                          std::uint32_t hy, std::uint32_t hz) {
    auto node = std::make_unique<Node>();
    node->bounds = ctx.disc.octant_bounds(hx, hy, hz, depth);
    if (indices.size() <= ctx.n_max || depth >= ctx.max_depth) {
        node->indices = std::move(indices);
        return node;
    }

    node->leaf = false;
    const int bit = ctx.disc.level() - 1 - depth;
    std::array<std::vector<std::uint32_t>, 8> parts;
    std::array<std::size_t, 8> sizes{};
    for (std::uint32_t idx : indices) {
        const GridCell& c = ctx.cells[idx];
        ++sizes[((c.x >> bit & 1u) << 2) | ((c.y >> bit & 1u) << 1) | (c.z >> bit & 1u)];
    }
    for (int d = 0; d < 8; ++d) parts[d].reserve(sizes[d]);
    for (std::uint32_t idx : indices) {
        const GridCell& c = ctx.cells[idx];
        parts[((c.x >> bit & 1u) << 2) | ((c.y >> bit & 1u) << 1) | (c.z >> bit & 1u)]
            .push_back(idx);
    }
    indices.clear();
    indices.shrink_to_fit();

    for (int d = 0; d < 8; ++d) {
        node->children[d] = build(ctx, std::move(parts[d]), depth + 1, (hx << 1) | (d >> 2 & 1),
                                  (hy << 1) | (d >> 1 & 1), (hz << 1) | (d & 1));
    }
    return node;
}

namespace {

void search_node(const PointerOctree::Node& node, const PointCloud& cloud,
                 const SearchKernel& kernel, std::vector<std::uint32_t>& out) {
    if (node.leaf) {
        for (std::uint32_t idx : node.indices) {
            if (kernel_contains(kernel, cloud[idx])) out.push_back(idx);
        }
        return;
    }
    for (const auto& child : node.children) {
        if (!kernel_octant_disjoint(kernel, child->bounds)) {
            search_node(*child, cloud, kernel, out);
        }
    }
}

void visit_leaves(const PointerOctree::Node& node, int depth, std::uint32_t hx,
                  std::uint32_t hy, std::uint32_t hz,
                  const std::function<void(int, std::uint32_t, std::uint32_t, std::uint32_t,
                                           const std::vector<std::uint32_t>&)>& fn) {
    if (node.leaf) {
        fn(depth, hx, hy, hz, node.indices);
        return;
    }
    for (int d = 0; d < 8; ++d) {
        visit_leaves(*node.children[d], depth + 1, (hx << 1) | (d >> 2 & 1),
                     (hy << 1) | (d >> 1 & 1), (hz << 1) | (d & 1), fn);
    }
}

}  // namespace

std::vector<std::uint32_t> PointerOctree::neighbours(const SearchKernel& kernel) const {
    std::vector<std::uint32_t> out;
    neighbours(kernel, out);
    return out;
}

void PointerOctree::neighbours(const SearchKernel& kernel, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (!kernel_octant_disjoint(kernel, root_->bounds)) {
        search_node(*root_, *cloud_, kernel, out);
    }
}

void PointerOctree::for_each_leaf(
    const std::function<void(int, std::uint32_t, std::uint32_t, std::uint32_t,
                             const std::vector<std::uint32_t>&)>& fn) const {
    visit_leaves(*root_, 0, 0, 0, 0, fn);
}

}  // namespace linoct
