#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace linoct {

struct Point {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point& a, const Point& b) = default;
};

inline bool is_finite(const Point& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

/// Axis-aligned box, min_corner <= max_corner componentwise.
struct Aabb {
    Point min_corner;
    Point max_corner;

    [[nodiscard]] bool contains(const Point& p) const {
        return p.x >= min_corner.x && p.x <= max_corner.x && p.y >= min_corner.y &&
               p.y <= max_corner.y && p.z >= min_corner.z && p.z <= max_corner.z;
    }

    [[nodiscard]] Point center() const {
        return {0.5 * (min_corner.x + max_corner.x), 0.5 * (min_corner.y + max_corner.y),
                0.5 * (min_corner.z + max_corner.z)};
    }

    friend bool operator==(const Aabb& a, const Aabb& b) = default;
};

/// Expands a box to a cube: every side gets the longest side's length,
/// anchored at the min corner. Octant subdivision of the result aligns
/// with the SFC grid.
inline Aabb cubify(const Aabb& box) {
    const double side = std::max({box.max_corner.x - box.min_corner.x,
                                  box.max_corner.y - box.min_corner.y,
                                  box.max_corner.z - box.min_corner.z});
    // min + side can round below the true max corner; the result must keep
    // containing the whole input box.
    return {box.min_corner,
            {std::max(box.min_corner.x + side, box.max_corner.x),
             std::max(box.min_corner.y + side, box.max_corner.y),
             std::max(box.min_corner.z + side, box.max_corner.z)}};
}

/// Contiguous, immutable point storage with a cached bounding box.
class PointCloud {
  public:
    PointCloud() = default;

    explicit PointCloud(std::vector<Point> points) : points_(std::move(points)) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            if (!is_finite(points_[i])) {
                throw std::invalid_argument("non-finite coordinate at point " +
                                            std::to_string(i));
            }
        }
        if (!points_.empty()) {
            bbox_ = {points_[0], points_[0]};
            for (const Point& p : points_) {
                bbox_.min_corner.x = std::min(bbox_.min_corner.x, p.x);
                bbox_.min_corner.y = std::min(bbox_.min_corner.y, p.y);
                bbox_.min_corner.z = std::min(bbox_.min_corner.z, p.z);
                bbox_.max_corner.x = std::max(bbox_.max_corner.x, p.x);
                bbox_.max_corner.y = std::max(bbox_.max_corner.y, p.y);
                bbox_.max_corner.z = std::max(bbox_.max_corner.z, p.z);
            }
        }
    }

    [[nodiscard]] std::size_t size() const { return points_.size(); }
    [[nodiscard]] bool empty() const { return points_.empty(); }
    [[nodiscard]] const Point& operator[](std::size_t i) const { return points_[i]; }

    [[nodiscard]] const Aabb& bbox() const {
        if (points_.empty()) throw std::logic_error("bbox of empty cloud");
        return bbox_;
    }

    [[nodiscard]] const std::vector<Point>& points() const { return points_; }

  private:
    std::vector<Point> points_;
    Aabb bbox_{};
};

enum class KernelShape { Sphere, Circle, Cube, Square };

/// Fixed-radius search region: an open ball of the shape's norm around
/// `center`. Circle and Square ignore the z axis.
class SearchKernel {
  public:
    SearchKernel(KernelShape shape, const Point& center, double radius)
        : shape_(shape), center_(center), radius_(radius), radius_sq_(radius * radius) {
        if (!(radius > 0.0) || !std::isfinite(radius)) {
            throw std::invalid_argument("kernel radius must be positive and finite");
        }
        if (!is_finite(center)) throw std::invalid_argument("kernel center must be finite");
    }

    [[nodiscard]] KernelShape shape() const { return shape_; }
    [[nodiscard]] const Point& center() const { return center_; }
    [[nodiscard]] double radius() const { return radius_; }
    [[nodiscard]] double radius_sq() const { return radius_sq_; }

  private:
    KernelShape shape_;
    Point center_;
    double radius_;
    double radius_sq_;
};

/// Membership under the kernel's norm, strict inequality (boundary excluded).
inline bool kernel_contains(const SearchKernel& kernel, const Point& p) {
    const double dx = p.x - kernel.center().x;
    const double dy = p.y - kernel.center().y;
    const double dz = p.z - kernel.center().z;
    switch (kernel.shape()) {
        case KernelShape::Sphere: return dx * dx + dy * dy + dz * dz < kernel.radius_sq();
        case KernelShape::Circle: return dx * dx + dy * dy < kernel.radius_sq();
        case KernelShape::Cube:
            return std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < kernel.radius();
        case KernelShape::Square:
            return std::max(std::abs(dx), std::abs(dy)) < kernel.radius();
    }
    return false;  // unreachable
}

/// Squared L2 distance from `p` to the closest point of `bounds`
/// (p clamped to the box). Zero iff p lies inside or on the box.
inline double octant_point_distance_sq(const Aabb& bounds, const Point& p) {
    const double gx = std::clamp(p.x, bounds.min_corner.x, bounds.max_corner.x);
    const double gy = std::clamp(p.y, bounds.min_corner.y, bounds.max_corner.y);
    const double gz = std::clamp(p.z, bounds.min_corner.z, bounds.max_corner.z);
    const double dx = p.x - gx;
    const double dy = p.y - gy;
    const double dz = p.z - gz;
    return dx * dx + dy * dy + dz * dz;
}

enum class OctantRelation { Contains, Disjoint, Intersects };

namespace detail {

// Per-axis distance from c to [lo, hi] (0 inside) and to the farther edge.
inline void axis_distances(double c, double lo, double hi, double& near, double& far) {
    near = std::max({lo - c, c - hi, 0.0});
    far = std::max(c - lo, hi - c);
}

inline double axis_gap(double c, double lo, double hi) {
    return std::max({lo - c, c - hi, 0.0});
}

}  // namespace detail

/// True when no point of the box lies inside the kernel: the nearest box
/// point under the kernel's norm is at distance >= r.
inline bool kernel_octant_disjoint(const SearchKernel& kernel, const Aabb& bounds) {
    const double nx = detail::axis_gap(kernel.center().x, bounds.min_corner.x, bounds.max_corner.x);
    const double ny = detail::axis_gap(kernel.center().y, bounds.min_corner.y, bounds.max_corner.y);
    switch (kernel.shape()) {
        case KernelShape::Sphere: {
            const double nz =
                detail::axis_gap(kernel.center().z, bounds.min_corner.z, bounds.max_corner.z);
            return nx * nx + ny * ny + nz * nz >= kernel.radius_sq();
        }
        case KernelShape::Circle: return nx * nx + ny * ny >= kernel.radius_sq();
        case KernelShape::Cube: {
            const double nz =
                detail::axis_gap(kernel.center().z, bounds.min_corner.z, bounds.max_corner.z);
            return std::max({nx, ny, nz}) >= kernel.radius();
        }
        case KernelShape::Square: return std::max(nx, ny) >= kernel.radius();
    }
    return false;  // unreachable
}

/// Exact classification of an octant against the kernel: Contains when the
/// whole box lies strictly inside the kernel, Disjoint when no box point
/// does, Intersects otherwise. Exact for all four kernels because they are
/// norm balls and the box is a product set: the nearest and farthest box
/// points are found per axis.
inline OctantRelation kernel_octant_relation(const SearchKernel& kernel, const Aabb& bounds) {
    double nx, ny, nz, fx, fy, fz;
    detail::axis_distances(kernel.center().x, bounds.min_corner.x, bounds.max_corner.x, nx, fx);
    detail::axis_distances(kernel.center().y, bounds.min_corner.y, bounds.max_corner.y, ny, fy);
    detail::axis_distances(kernel.center().z, bounds.min_corner.z, bounds.max_corner.z, nz, fz);

    double near_metric = 0.0;
    double far_metric = 0.0;
    double limit = 0.0;
    switch (kernel.shape()) {
        case KernelShape::Sphere:
            near_metric = nx * nx + ny * ny + nz * nz;
            far_metric = fx * fx + fy * fy + fz * fz;
            limit = kernel.radius_sq();
            break;
        case KernelShape::Circle:
            near_metric = nx * nx + ny * ny;
            far_metric = fx * fx + fy * fy;
            limit = kernel.radius_sq();
            break;
        case KernelShape::Cube:
            near_metric = std::max({nx, ny, nz});
            far_metric = std::max({fx, fy, fz});
            limit = kernel.radius();
            break;
        case KernelShape::Square:
            near_metric = std::max(nx, ny);
            far_metric = std::max(fx, fy);
            limit = kernel.radius();
            break;
    }
    if (far_metric < limit) return OctantRelation::Contains;
    if (near_metric >= limit) return OctantRelation::Disjoint;
    return OctantRelation::Intersects;
}

}  // namespace linoct
