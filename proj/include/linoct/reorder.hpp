#pragma once

#include <cstdint>
#include <vector>

#include "linoct/geometry.hpp"
#include "linoct/sfc.hpp"

namespace linoct {

/// A cloud sorted by its SFC codes, together with the sorted codes, the
/// permutation back to the original order, and the discretizer the codes
/// were derived from.
struct CodedCloud {
    PointCloud cloud;                       // reordered points
    std::vector<std::uint64_t> codes;       // non-decreasing, codes[i] belongs to cloud[i]
    std::vector<std::uint32_t> permutation; // new index -> original index
    Curve curve = Curve::Morton;
    Discretizer discretizer;
};

/// Per-point SFC codes in cloud order (not sorted). Parallel over points.
std::vector<std::uint64_t> compute_codes(const PointCloud& cloud, Curve curve,
                                         const Discretizer& disc);

/// Convenience overload: discretizes on the cubified cloud bounding box at
/// the default level.
std::vector<std::uint64_t> compute_codes(const PointCloud& cloud, Curve curve);

/// Sorts the cloud by SFC code (stable: equal codes keep their original
/// relative order) and returns the reordered cloud, sorted codes, and the
/// permutation.
CodedCloud reorder_cloud(const PointCloud& cloud, Curve curve, int level = kMaxLevel);

/// inverse[p[i]] = i.
std::vector<std::uint32_t> invert_permutation(const std::vector<std::uint32_t>& perm);

}  // namespace linoct
