#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "linoct/geometry.hpp"
#include "linoct/sfc.hpp"

namespace linoct {

/// Classic pointer-based complete octree: every internal node owns exactly
/// eight children (empty ones included). Points are assigned to children by
/// their grid cell, so the partition matches the SFC grid of the same
/// discretizer. Serves as the baseline structure and as an oracle for the
/// linear octree.
class PointerOctree {
  public:
    struct Node {
        Aabb bounds;
        std::array<std::unique_ptr<Node>, 8> children;  // all set iff internal
        std::vector<std::uint32_t> indices;             // leaf payload
        bool leaf = true;
    };

    PointerOctree(const PointCloud& cloud, std::uint32_t n_max = 128,
                  int max_depth = kMaxLevel);

    /// Indices of all cloud points strictly inside the kernel. Descends into
    /// every child whose bounds meet the kernel and checks leaf points one
    /// by one.
    [[nodiscard]] std::vector<std::uint32_t> neighbours(const SearchKernel& kernel) const;

    /// Buffer-reusing variant for batch execution.
    void neighbours(const SearchKernel& kernel, std::vector<std::uint32_t>& out) const;

    /// Visits every leaf: depth, high grid bits of the octant, and the
    /// member indices.
    void for_each_leaf(const std::function<void(int depth, std::uint32_t hx, std::uint32_t hy,
                                                std::uint32_t hz,
                                                const std::vector<std::uint32_t>&)>& fn) const;

    [[nodiscard]] const Node& root() const { return *root_; }
    [[nodiscard]] const Discretizer& discretizer() const { return disc_; }
    [[nodiscard]] std::size_t point_count() const { return point_count_; }
    [[nodiscard]] std::uint32_t n_max() const { return n_max_; }

  private:
    struct BuildCtx;
    std::unique_ptr<Node> build(BuildCtx& ctx, std::vector<std::uint32_t> indices, int depth,
                                std::uint32_t hx, std::uint32_t hy, std::uint32_t hz);

    const PointCloud* cloud_;
    Discretizer disc_;
    std::unique_ptr<Node> root_;
    std::size_t point_count_ = 0;
    std::uint32_t n_max_;
    int max_depth_;
};

}  // namespace linoct
