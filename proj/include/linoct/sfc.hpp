#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "linoct/geometry.hpp"

namespace linoct {

/// Grid refinement level: 2^21 cells per axis, 63-bit codes in a 64-bit word.
inline constexpr int kMaxLevel = 21;

enum class Curve { Morton, Hilbert };

/// Integer cell on the 2^level grid, each coordinate < 2^level.
struct GridCell {
    std::uint32_t x = 0;
    std::uint32_t y = 0;
    std::uint32_t z = 0;

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

namespace detail {

// Spreads the low 21 bits of v so bit i lands at position 3i.
inline std::uint64_t spread3(std::uint64_t v) {
    v &= 0x1fffff;
    v = (v | v << 32) & 0x001f00000000ffff;
    v = (v | v << 16) & 0x001f0000ff0000ff;
    v = (v | v << 8) & 0x100f00f00f00f00f;
    v = (v | v << 4) & 0x10c30c30c30c30c3;
    v = (v | v << 2) & 0x1249249249249249;
    return v;
}

// Inverse of spread3: collects every third bit.
inline std::uint32_t compact3(std::uint64_t v) {
    v &= 0x1249249249249249;
    v = (v ^ (v >> 2)) & 0x10c30c30c30c30c3;
    v = (v ^ (v >> 4)) & 0x100f00f00f00f00f;
    v = (v ^ (v >> 8)) & 0x001f0000ff0000ff;
    v = (v ^ (v >> 16)) & 0x001f00000000ffff;
    v = (v ^ (v >> 32)) & 0x1fffff;
    return static_cast<std::uint32_t>(v);
}

}  // namespace detail

/// Bit-interleaved code: x supplies the most significant bit of every
/// 3-bit group, then y, then z.
inline std::uint64_t morton_encode(const GridCell& cell, int level) {
    assert(level >= 0 && level <= kMaxLevel);
    assert(level == kMaxLevel || ((cell.x | cell.y | cell.z) >> level) == 0);
    (void)level;
    return (detail::spread3(cell.x) << 2) | (detail::spread3(cell.y) << 1) |
           detail::spread3(cell.z);
}

inline GridCell morton_decode(std::uint64_t code, int level) {
    assert(level >= 0 && level <= kMaxLevel);
    (void)level;
    return {detail::compact3(code >> 2), detail::compact3(code >> 1), detail::compact3(code)};
}

/// Hilbert mapping of the 3D grid. Iterative construction: each bit plane is
/// rotated/reflected into the base orientation from the most significant
/// plane down, then the planes are Gray-coded and interleaved (transpose
/// form). The resulting curve is continuous and recursive; the level-1 visit
/// order starts at (0,0,0) and ends at (1,0,0). This orientation is frozen;
/// regression values are pinned in the tests.
std::uint64_t hilbert_encode(const GridCell& cell, int level);

/// Exact inverse of hilbert_encode.
GridCell hilbert_decode(std::uint64_t code, int level);

inline std::uint64_t sfc_encode(Curve curve, const GridCell& cell, int level) {
    return curve == Curve::Morton ? morton_encode(cell, level) : hilbert_encode(cell, level);
}

inline GridCell sfc_decode(Curve curve, std::uint64_t code, int level) {
    return curve == Curve::Morton ? morton_decode(code, level) : hilbert_decode(code, level);
}

/// Maps points of a bounding box onto the integer grid. Each axis is scaled
/// by 2^level / extent (0 for a degenerate axis, sending every point to
/// cell 0 there). Feed it a cubified box to get an isotropic grid that
/// octant subdivision aligns with.
class Discretizer {
  public:
    Discretizer() = default;

    explicit Discretizer(const Aabb& bbox, int level = kMaxLevel);

    [[nodiscard]] const Aabb& bbox() const { return bbox_; }
    [[nodiscard]] int level() const { return level_; }

    /// Grid cell of p. Pre: p inside bbox (closed); results are clamped to
    /// [0, 2^level - 1] so max-corner points get the top cell.
    [[nodiscard]] GridCell cell(const Point& p) const {
        if (!bbox_.contains(p)) throw std::domain_error("point outside discretizer bounds");
        return {axis_cell(p.x, bbox_.min_corner.x, scale_x_),
                axis_cell(p.y, bbox_.min_corner.y, scale_y_),
                axis_cell(p.z, bbox_.min_corner.z, scale_z_)};
    }

    /// World-space box of the depth-`depth` octant whose high grid bits are
    /// (hx, hy, hz). Depth 0 returns the bounding box itself; deeper boxes
    /// are padded outward by a couple of ulps so that every point whose cell
    /// falls in the octant is inside the returned box despite rounding in
    /// cell(). Sibling boxes may overlap by those ulps.
    [[nodiscard]] Aabb octant_bounds(std::uint32_t hx, std::uint32_t hy, std::uint32_t hz,
                                     int depth) const;

  private:
    [[nodiscard]] std::uint32_t axis_cell(double v, double lo, double scale) const {
        const double u = std::floor((v - lo) * scale);
        const double top = static_cast<double>((std::uint64_t{1} << level_) - 1);
        return static_cast<std::uint32_t>(std::clamp(u, 0.0, top));
    }

    Aabb bbox_{};
    int level_ = kMaxLevel;
    double scale_x_ = 0.0, scale_y_ = 0.0, scale_z_ = 0.0;
};

/// World-space box of the octant that owns the aligned code block
/// [code_prefix, code_prefix + 8^(level-depth)). Throws on a prefix that is
/// not aligned to the block size.
Aabb prefix_to_octant_bounds(std::uint64_t code_prefix, int depth, const Discretizer& disc,
                             Curve curve);

/// Finite-state view of a recursive SFC for tree descent: given a node's
/// orientation state, child_digit maps the c-th code block to the spatial
/// octant it occupies (x bit 2, y bit 1, z bit 0) and child_state gives the
/// orientation inside it. Derived once from the codec by closing the set of
/// observable child-digit signatures and cross-checked against the decoder;
/// descent then needs no per-node decoding.
class CurveStepper {
  public:
    static const CurveStepper& of(Curve curve);

    [[nodiscard]] std::uint8_t root_state() const { return 0; }

    [[nodiscard]] std::uint8_t child_digit(std::uint8_t state, int c) const {
        return digit_[state][c];
    }

    [[nodiscard]] std::uint8_t child_state(std::uint8_t state, int c) const {
        return next_[state][c];
    }

    [[nodiscard]] std::size_t state_count() const { return digit_.size(); }

  private:
    explicit CurveStepper(Curve curve);

    std::vector<std::array<std::uint8_t, 8>> digit_;
    std::vector<std::array<std::uint8_t, 8>> next_;
};

}  // namespace linoct
