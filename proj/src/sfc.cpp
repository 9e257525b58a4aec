#include "linoct/sfc.hpp"

#include <bit>
#include <string>

namespace linoct {

std::uint64_t hilbert_encode(const GridCell& cell, int level) {
    assert(level >= 0 && level <= kMaxLevel);
    assert(level == kMaxLevel || ((cell.x | cell.y | cell.z) >> level) == 0);
    if (level == 0) return 0;

    std::uint32_t X[3] = {cell.x, cell.y, cell.z};
    const std::uint32_t M = std::uint32_t{1} << (level - 1);

    // Rotate each bit plane into the base orientation, top plane first.
    for (std::uint32_t Q = M; Q > 1; Q >>= 1) {
        const std::uint32_t P = Q - 1;
        for (int i = 0; i < 3; ++i) {
            if (X[i] & Q) {
                X[0] ^= P;
            } else {
                const std::uint32_t t = (X[0] ^ X[i]) & P;
                X[0] ^= t;
                X[i] ^= t;
            }
        }
    }

    // Gray-encode across axes, then propagate the parity downward.
    X[1] ^= X[0];
    X[2] ^= X[1];
    std::uint32_t t = 0;
    for (std::uint32_t Q = M; Q > 1; Q >>= 1) {
        if (X[2] & Q) t ^= Q - 1;
    }
    X[0] ^= t;
    X[1] ^= t;
    X[2] ^= t;

    return (detail::spread3(X[0]) << 2) | (detail::spread3(X[1]) << 1) | detail::spread3(X[2]);
}

GridCell hilbert_decode(std::uint64_t code, int level) {
    assert(level >= 0 && level <= kMaxLevel);
    if (level == 0) return {0, 0, 0};

    const std::uint32_t mask = (level == 32) ? ~0u : ((std::uint32_t{1} << level) - 1);
    std::uint32_t X[3] = {detail::compact3(code >> 2) & mask, detail::compact3(code >> 1) & mask,
                          detail::compact3(code) & mask};
    const std::uint32_t N = std::uint32_t{2} << (level - 1);

    // Undo the Gray code.
    std::uint32_t t = X[2] >> 1;
    X[2] ^= X[1];
    X[1] ^= X[0];
    X[0] ^= t;

    // Undo the per-plane rotations, bottom plane first.
    for (std::uint32_t Q = 2; Q != N; Q <<= 1) {
        const std::uint32_t P = Q - 1;
        for (int i = 2; i >= 0; --i) {
            if (X[i] & Q) {
                X[0] ^= P;
            } else {
                const std::uint32_t s = (X[0] ^ X[i]) & P;
                X[0] ^= s;
                X[i] ^= s;
            }
        }
    }
    return {X[0], X[1], X[2]};
}

namespace {

double axis_scale(double lo, double hi, int level) {
    const double extent = hi - lo;
    return extent > 0.0 ? std::ldexp(1.0, level) / extent : 0.0;
}

// Two-ulp outward bumps via the order-preserving integer image of a double;
// total on finite values and cheaper than chained nextafter calls.
std::uint64_t order_key(double v) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    return (u & 0x8000000000000000) ? ~u : u | 0x8000000000000000;
}

double from_order_key(std::uint64_t k) {
    return std::bit_cast<double>((k & 0x8000000000000000) ? k & 0x7fffffffffffffff : ~k);
}

double pad_up(double v) { return from_order_key(order_key(v) + 2); }

double pad_down(double v) { return from_order_key(order_key(v) - 2); }

}  // namespace

Discretizer::Discretizer(const Aabb& bbox, int level) : bbox_(bbox), level_(level) {
    if (level < 0 || level > kMaxLevel) throw std::invalid_argument("level out of range");
    if (bbox.min_corner.x > bbox.max_corner.x || bbox.min_corner.y > bbox.max_corner.y ||
        bbox.min_corner.z > bbox.max_corner.z) {
        throw std::invalid_argument("inverted bounding box");
    }
    scale_x_ = axis_scale(bbox.min_corner.x, bbox.max_corner.x, level);
    scale_y_ = axis_scale(bbox.min_corner.y, bbox.max_corner.y, level);
    scale_z_ = axis_scale(bbox.min_corner.z, bbox.max_corner.z, level);
}

Aabb Discretizer::octant_bounds(std::uint32_t hx, std::uint32_t hy, std::uint32_t hz,
                                int depth) const {
    assert(depth >= 0 && depth <= level_);
    if (depth == 0) return bbox_;
    const double inv = std::ldexp(1.0, -depth);
    const double sx = (bbox_.max_corner.x - bbox_.min_corner.x) * inv;
    const double sy = (bbox_.max_corner.y - bbox_.min_corner.y) * inv;
    const double sz = (bbox_.max_corner.z - bbox_.min_corner.z) * inv;
    Aabb box{{bbox_.min_corner.x + hx * sx, bbox_.min_corner.y + hy * sy,
              bbox_.min_corner.z + hz * sz},
             {}};
    box.max_corner = {box.min_corner.x + sx, box.min_corner.y + sy, box.min_corner.z + sz};
    box.min_corner = {pad_down(box.min_corner.x), pad_down(box.min_corner.y),
                      pad_down(box.min_corner.z)};
    box.max_corner = {pad_up(box.max_corner.x), pad_up(box.max_corner.y),
                      pad_up(box.max_corner.z)};
    return box;
}

Aabb prefix_to_octant_bounds(std::uint64_t code_prefix, int depth, const Discretizer& disc,
                             Curve curve) {
    const int level = disc.level();
    if (depth < 0 || depth > level) throw std::invalid_argument("depth out of range");
    const std::uint64_t block = std::uint64_t{1} << (3 * (level - depth));
    if (code_prefix % block != 0) {
        throw std::invalid_argument("code prefix " + std::to_string(code_prefix) +
                                    " not aligned to depth " + std::to_string(depth));
    }
    const GridCell cell = sfc_decode(curve, code_prefix, level);
    const int shift = level - depth;
    return disc.octant_bounds(cell.x >> shift, cell.y >> shift, cell.z >> shift, depth);
}

namespace {

std::uint32_t digit_signature(Curve curve, std::uint64_t prefix, int depth) {
    std::uint32_t sig = 0;
    for (int c = 0; c < 8; ++c) {
        const GridCell cell = sfc_decode(curve, prefix * 8 + c, depth + 1);
        const std::uint32_t digit = ((cell.x & 1) << 2) | ((cell.y & 1) << 1) | (cell.z & 1);
        sig |= digit << (3 * c);
    }
    return sig;
}

}  // namespace

CurveStepper::CurveStepper(Curve curve) {
    // Close the set of child-digit signatures reachable from the root. A
    // recursive SFC reaches only finitely many orientations; the guard trips
    // if the codec were not self-similar.
    struct Exemplar {
        std::uint64_t prefix;
        int depth;
    };
    std::vector<std::uint32_t> signature_of_state;
    std::vector<Exemplar> exemplar_of_state;
    const auto state_for = [&](std::uint64_t prefix, int depth) {
        const std::uint32_t sig = digit_signature(curve, prefix, depth);
        for (std::size_t s = 0; s < signature_of_state.size(); ++s) {
            if (signature_of_state[s] == sig) return static_cast<std::uint8_t>(s);
        }
        signature_of_state.push_back(sig);
        exemplar_of_state.push_back({prefix, depth});
        if (signature_of_state.size() > 128) {
            throw std::logic_error("curve stepper: state set does not close");
        }
        return static_cast<std::uint8_t>(signature_of_state.size() - 1);
    };

    state_for(0, 0);
    for (std::size_t s = 0; s < signature_of_state.size(); ++s) {
        const Exemplar ex = exemplar_of_state[s];
        if (ex.depth + 2 > kMaxLevel) {
            throw std::logic_error("curve stepper: state set does not close in depth");
        }
        std::array<std::uint8_t, 8> digits{};
        std::array<std::uint8_t, 8> states{};
        for (int c = 0; c < 8; ++c) {
            digits[c] = (signature_of_state[s] >> (3 * c)) & 7;
            states[c] = state_for(ex.prefix * 8 + c, ex.depth + 1);
        }
        digit_.push_back(digits);
        next_.push_back(states);
    }

    // The table must reproduce the decoder bit for bit: walking the digit
    // path of a code yields the decoded cell. Exhaustive to level 5.
    for (int level = 1; level <= 5; ++level) {
        const std::uint64_t total = std::uint64_t{1} << (3 * level);
        for (std::uint64_t code = 0; code < total; ++code) {
            std::uint8_t state = 0;
            GridCell walked{0, 0, 0};
            for (int d = level - 1; d >= 0; --d) {
                const int c = static_cast<int>((code >> (3 * d)) & 7);
                const std::uint8_t g = digit_[state][c];
                walked = {walked.x << 1 | (g >> 2 & 1), walked.y << 1 | (g >> 1 & 1),
                          walked.z << 1 | (g & 1)};
                state = next_[state][c];
            }
            if (walked != sfc_decode(curve, code, level)) {
                throw std::logic_error("curve stepper: table disagrees with decoder");
            }
        }
    }

    // Deep spot check at full depth (splitmix64 stream of codes).
    std::uint64_t x = 0x9e3779b97f4a7c15;
    for (int it = 0; it < 20000; ++it) {
        x += 0x9e3779b97f4a7c15;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9;
        z = (z ^ (z >> 27)) * 0x94d049bb133111eb;
        const std::uint64_t code = (z ^ (z >> 31)) >> 1;
        std::uint8_t state = 0;
        GridCell walked{0, 0, 0};
        for (int d = kMaxLevel - 1; d >= 0; --d) {
            const int c = static_cast<int>((code >> (3 * d)) & 7);
            const std::uint8_t g = digit_[state][c];
            walked = {walked.x << 1 | (g >> 2 & 1), walked.y << 1 | (g >> 1 & 1),
                      walked.z << 1 | (g & 1)};
            state = next_[state][c];
        }
        if (walked != sfc_decode(curve, code, kMaxLevel)) {
            throw std::logic_error("curve stepper: table disagrees with decoder at full depth");
        }
    }
}

const CurveStepper& CurveStepper::of(Curve curve) {
    static const CurveStepper morton(Curve::Morton);
    static const CurveStepper hilbert(Curve::Hilbert);
    return curve == Curve::Morton ? morton : hilbert;
}

}  // namespace linoct
