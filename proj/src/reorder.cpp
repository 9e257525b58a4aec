#include "linoct/reorder.hpp"

#include <array>
#include <limits>
#include <stdexcept>

namespace linoct {

std::vector<std::uint64_t> compute_codes(const PointCloud& cloud, Curve curve,
                                         const Discretizer& disc) {
    if (cloud.empty()) throw std::invalid_argument("compute_codes: empty cloud");
    const std::int64_t n = static_cast<std::int64_t>(cloud.size());
    std::vector<std::uint64_t> codes(cloud.size());
    const int level = disc.level();
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        codes[static_cast<std::size_t>(i)] =
            sfc_encode(curve, disc.cell(cloud[static_cast<std::size_t>(i)]), level);
    }
    return codes;
}

std::vector<std::uint64_t> compute_codes(const PointCloud& cloud, Curve curve) {
    if (cloud.empty()) throw std::invalid_argument("compute_codes: empty cloud");
    return compute_codes(cloud, curve, Discretizer(cubify(cloud.bbox())));
}

namespace {

struct CodeIndex {
    std::uint64_t code;
    std::uint32_t index;
};

// LSD radix sort over the 64-bit code, one byte per pass. Each counting
// pass is stable, so equal codes keep their original order. Passes whose
// byte is constant across all records are skipped.
void radix_sort_codes(std::vector<CodeIndex>& recs) {
    std::vector<CodeIndex> buffer(recs.size());
    CodeIndex* src = recs.data();
    CodeIndex* dst = buffer.data();
    const std::size_t n = recs.size();
    bool in_recs = true;

    for (int pass = 0; pass < 8; ++pass) {
        const int shift = 8 * pass;
        std::array<std::size_t, 256> hist{};
        for (std::size_t i = 0; i < n; ++i) ++hist[(src[i].code >> shift) & 0xff];
        if (hist[(src[0].code >> shift) & 0xff] == n) continue;

        std::size_t sum = 0;
        for (auto& h : hist) {
            const std::size_t c = h;
            h = sum;
            sum += c;
        }
        for (std::size_t i = 0; i < n; ++i) dst[hist[(src[i].code >> shift) & 0xff]++] = src[i];
        std::swap(src, dst);
        in_recs = !in_recs;
    }
    if (!in_recs) recs = std::move(buffer);
}

}  // namespace

CodedCloud reorder_cloud(const PointCloud& cloud, Curve curve, int level) {
    if (cloud.empty()) throw std::invalid_argument("reorder_cloud: empty cloud");
    if (cloud.size() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("reorder_cloud: cloud exceeds 32-bit index space");
    }
    Discretizer disc(cubify(cloud.bbox()), level);
    const std::vector<std::uint64_t> codes = compute_codes(cloud, curve, disc);

    const std::uint32_t n = static_cast<std::uint32_t>(cloud.size());
    std::vector<CodeIndex> recs(n);
    for (std::uint32_t i = 0; i < n; ++i) recs[i] = {codes[i], i};
    radix_sort_codes(recs);

    std::vector<Point> points(n);
    std::vector<std::uint64_t> sorted_codes(n);
    std::vector<std::uint32_t> perm(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        points[i] = cloud[recs[i].index];
        sorted_codes[i] = recs[i].code;
        perm[i] = recs[i].index;
    }
    return {PointCloud(std::move(points)), std::move(sorted_codes), std::move(perm), curve,
            disc};
}

std::vector<std::uint32_t> invert_permutation(const std::vector<std::uint32_t>& perm) {
    std::vector<std::uint32_t> inv(perm.size());
    for (std::uint32_t i = 0; i < perm.size(); ++i) inv[perm[i]] = i;
    return inv;
}

}  // namespace linoct
