#pragma once

#include <cstdint>

#include "linoct/linear_octree.hpp"
#include "linoct/pointer_octree.hpp"

namespace linoct {

/// Analytical cost model of an index structure: node_bytes per tree node,
/// point_extra_bytes per inserted point, nodes_per_point ratio, normalized
/// against point_bytes per stored point.
struct StructureCostParams {
    double node_bytes = 0.0;        // T_o
    double point_extra_bytes = 0.0; // T_p
    double nodes_per_point = 0.0;   // rho
    double point_bytes = 32.0;
};

/// Modeled memory overhead fraction: (T_p + rho * T_o) / point_bytes.
inline double expected_overhead(const StructureCostParams& p) {
    return (p.point_extra_bytes + p.nodes_per_point * p.node_bytes) / p.point_bytes;
}

/// Retained allocation sizes of a built structure.
struct MemoryReport {
    std::uint64_t bytes_total = 0;
    std::uint64_t node_count = 0;
    std::uint64_t point_count = 0;

    [[nodiscard]] double rho() const {
        return point_count == 0 ? 0.0
                                : static_cast<double>(node_count) /
                                      static_cast<double>(point_count);
    }

    /// Measured overhead against the 32-byte-per-point normalization.
    [[nodiscard]] double overhead(double point_bytes = 32.0) const {
        return static_cast<double>(bytes_total) /
               (point_bytes * static_cast<double>(point_count));
    }
};

/// Sums the retained arrays: leaf boundaries and offsets plus the
/// internal-node table.
MemoryReport measure_structure(const LinearOctree& tree);

/// Sums node records plus the per-point leaf index entries.
MemoryReport measure_structure(const PointerOctree& tree);

/// Nominal cost parameters of this implementation's structures with a
/// measured rho plugged in. A complete octree has 7 leaves per internal
/// node, which fixes the blended linear node cost.
StructureCostParams linear_octree_cost_params(double rho);
StructureCostParams pointer_octree_cost_params(double rho);

}  // namespace linoct
