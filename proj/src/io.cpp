#include "linoct/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string_view>

#include "linoct/endian.hpp"
#include "linoct/rng.hpp"

namespace linoct {

CloudFormat format_from_path(const std::string& path) {
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    if (ext == ".pcb") return CloudFormat::BinaryPcb;
    if (ext == ".xyz" || ext == ".txt") return CloudFormat::TextXyz;
    throw std::invalid_argument("cannot infer cloud format from '" + path +
                                "' (expected .pcb, .xyz or .txt)");
}

namespace {

PointCloud read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::vector<Point> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        Point p;
        std::string extra;
        if (!(ls >> p.x >> p.y >> p.z) || (ls >> extra)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected three reals");
        }
        if (!is_finite(p)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": non-finite coordinate");
        }
        points.push_back(p);
    }
    return PointCloud(std::move(points));
}

PointCloud read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    char magic[4];
    if (!in.read(magic, 4) || std::string_view(magic, 4) != "PCB1") {
        throw std::runtime_error(path + ": bad magic at byte offset 0");
    }
    std::uint64_t count;
    if (!detail::get_u64(in, count)) {
        throw std::runtime_error(path + ": truncated count at byte offset 4");
    }
    std::vector<Point> points;
    points.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Point p;
        if (!detail::get_f64(in, p.x) || !detail::get_f64(in, p.y) ||
            !detail::get_f64(in, p.z)) {
            throw std::runtime_error(path + ": truncated record at byte offset " +
                                     std::to_string(12 + 24 * i));
        }
        if (!is_finite(p)) {
            throw std::runtime_error(path + ": non-finite coordinate in record " +
                                     std::to_string(i));
        }
        points.push_back(p);
    }
    return PointCloud(std::move(points));
}

}  // namespace

PointCloud read_cloud(const std::string& path, CloudFormat format) {
    return format == CloudFormat::TextXyz ? read_text(path) : read_binary(path);
}

PointCloud read_cloud(const std::string& path) {
    return read_cloud(path, format_from_path(path));
}

void write_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format) {
    std::ofstream out(path, format == CloudFormat::BinaryPcb
                                ? std::ios::binary | std::ios::trunc
                                : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    if (format == CloudFormat::BinaryPcb) {
        out.write("PCB1", 4);
        detail::put_u64(out, cloud.size());
        for (const Point& p : cloud.points()) {
            detail::put_f64(out, p.x);
            detail::put_f64(out, p.y);
            detail::put_f64(out, p.z);
        }
    } else {
        char buf[96];
        for (const Point& p : cloud.points()) {
            std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x, p.y, p.z);
            out << buf;
        }
    }
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_cloud(const PointCloud& cloud, const std::string& path) {
    write_cloud(cloud, path, format_from_path(path));
}

namespace {

std::vector<Point> gen_uniform(const SyntheticSpec& spec, std::mt19937_64& gen) {
    std::vector<Point> points(spec.n);
    for (auto& p : points) {
        p.x = uniform_double(gen) * spec.extent;
        p.y = uniform_double(gen) * spec.extent;
        p.z = uniform_double(gen) * spec.extent;
    }
    return points;
}

std::vector<Point> gen_clusters(const SyntheticSpec& spec, std::mt19937_64& gen) {
    if (spec.clusters < 1) throw std::invalid_argument("generate_cloud: clusters must be >= 1");
    std::vector<Point> centres(spec.clusters);
    for (auto& c : centres) {
        c.x = uniform_double(gen) * spec.extent;
        c.y = uniform_double(gen) * spec.extent;
        c.z = uniform_double(gen) * spec.extent;
    }
    std::vector<Point> points(spec.n);
    for (auto& p : points) {
        const auto c = centres[uniform_below(gen, spec.clusters)];
        p.x = c.x + spec.sigma * gaussian(gen);
        p.y = c.y + spec.sigma * gaussian(gen);
        p.z = c.z + spec.sigma * gaussian(gen);
    }
    return points;
}

std::vector<Point> gen_surface(const SyntheticSpec& spec, std::mt19937_64& gen) {
    if (spec.grid < 1) throw std::invalid_argument("generate_cloud: grid must be >= 1");
    const double cell = spec.extent / spec.grid;
    const double amp = 0.05 * spec.extent;
    const double freq = 2.0 * std::numbers::pi / spec.extent;
    std::vector<Point> points(spec.n);
    const std::uint64_t cells = std::uint64_t{spec.grid} * spec.grid;
    for (std::uint64_t i = 0; i < spec.n; ++i) {
        const std::uint64_t c = i % cells;
        const double gx = static_cast<double>(c % spec.grid);
        const double gy = static_cast<double>(c / spec.grid);
        Point& p = points[i];
        p.x = (gx + uniform_double(gen)) * cell;
        p.y = (gy + uniform_double(gen)) * cell;
        p.z = amp * (std::sin(freq * p.x) * std::cos(freq * p.y) + 1.0) +
              spec.noise * gaussian(gen);
    }
    return points;
}

}  // namespace

PointCloud generate_cloud(const SyntheticSpec& spec) {
    if (!(spec.extent > 0.0)) throw std::invalid_argument("generate_cloud: extent must be > 0");
    std::mt19937_64 gen(spec.seed);
    std::vector<Point> points;
    switch (spec.kind) {
        case SyntheticSpec::Kind::Uniform: points = gen_uniform(spec, gen); break;
        case SyntheticSpec::Kind::GaussianClusters: points = gen_clusters(spec, gen); break;
        case SyntheticSpec::Kind::Surface: points = gen_surface(spec, gen); break;
    }
    return PointCloud(std::move(points));
}

}  // namespace linoct
