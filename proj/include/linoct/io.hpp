#pragma once

#include <cstdint>
#include <string>

#include "linoct/geometry.hpp"

namespace linoct {

/// TextXyz: one point per line, three decimal reals separated by
/// whitespace, lines starting with '#' ignored. BinaryPcb: "PCB1" magic,
/// little-endian u64 point count, then count records of three little-endian
/// IEEE-754 doubles (x, y, z), no padding.
enum class CloudFormat { TextXyz, BinaryPcb };

/// Picks the format from the file extension: .pcb is binary, .xyz and .txt
/// are text.
CloudFormat format_from_path(const std::string& path);

/// Reads a cloud, preserving point order. Malformed input reports the byte
/// offset, non-finite coordinates report the record number.
PointCloud read_cloud(const std::string& path, CloudFormat format);
PointCloud read_cloud(const std::string& path);

/// Bit-exact BinaryPcb; TextXyz with round-trip decimal precision.
void write_cloud(const PointCloud& cloud, const std::string& path, CloudFormat format);
void write_cloud(const PointCloud& cloud, const std::string& path);

/// Deterministic synthetic clouds: Uniform fills a cube, GaussianClusters
/// mimics dense terrestrial scans, Surface mimics low-density aerial tiles
/// (a 2.5D sheet with noise).
struct SyntheticSpec {
    enum class Kind { Uniform, GaussianClusters, Surface };

    Kind kind = Kind::Uniform;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double extent = 100.0;

    std::uint32_t clusters = 10;  // GaussianClusters
    double sigma = 2.0;           // GaussianClusters spread

    std::uint32_t grid = 256;     // Surface cells per side
    double noise = 0.5;           // Surface vertical jitter
};

PointCloud generate_cloud(const SyntheticSpec& spec);

}  // namespace linoct
