#include "linoct/memory_model.hpp"

namespace linoct {

namespace {

constexpr double kLinearLeafBytes = 12.0;  // 8-byte boundary + 4-byte offset
constexpr double kPointerPointBytes = 4.0; // leaf index entry

void walk(const PointerOctree::Node& node, MemoryReport& report) {
    ++report.node_count;
    report.bytes_total += sizeof(PointerOctree::Node) +
                          node.indices.size() * sizeof(std::uint32_t);
    if (!node.leaf) {
        for (const auto& child : node.children) walk(*child, report);
    }
}

}  // namespace

MemoryReport measure_structure(const LinearOctree& tree) {
    MemoryReport report;
    report.node_count = tree.node_count();
    report.point_count = tree.point_count();
    report.bytes_total = tree.leaves().boundaries.size() * sizeof(std::uint64_t) +
                         tree.leaves().offsets.size() * sizeof(std::uint32_t) +
                         tree.internal_count() * sizeof(LinearOctree::InternalNode);
    return report;
}

MemoryReport measure_structure(const PointerOctree& tree) {
    MemoryReport report;
    report.point_count = tree.point_count();
    walk(tree.root(), report);
    return report;
}

StructureCostParams linear_octree_cost_params(double rho) {
    const double internal_bytes = sizeof(LinearOctree::InternalNode);
    const double node_bytes = (7.0 * kLinearLeafBytes + internal_bytes) / 8.0;
    return {node_bytes, 0.0, rho, 32.0};
}

StructureCostParams pointer_octree_cost_params(double rho) {
    return {static_cast<double>(sizeof(PointerOctree::Node)), kPointerPointBytes, rho, 32.0};
}

}  // namespace linoct
