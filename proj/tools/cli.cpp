#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "linoct/io.hpp"
#include "linoct/linear_octree.hpp"
#include "linoct/locality.hpp"
#include "linoct/memory_model.hpp"
#include "linoct/pointer_octree.hpp"
#include "linoct/reorder.hpp"
#include "linoct/search.hpp"

namespace {

using namespace linoct;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::optional<Curve> parse_sfc(const std::string& s) {
    if (s == "none") return std::nullopt;
    if (s == "morton") return Curve::Morton;
    if (s == "hilbert") return Curve::Hilbert;
    throw UsageError("unknown --sfc value '" + s + "'");
}

KernelShape parse_kernel(const std::string& s) {
    if (s == "sphere") return KernelShape::Sphere;
    if (s == "circle") return KernelShape::Circle;
    if (s == "cube") return KernelShape::Cube;
    if (s == "square") return KernelShape::Square;
    throw UsageError("unknown --kernel value '" + s + "'");
}

RadiusMethod parse_method(const std::string& s) {
    if (s == "ptr") return RadiusMethod::Ptr;
    if (s == "lin") return RadiusMethod::Lin;
    if (s == "prune") return RadiusMethod::Prune;
    if (s == "struct") return RadiusMethod::Struct;
    throw UsageError("unknown --method value '" + s + "'");
}

struct ModeSpec {
    BatchMode mode = BatchMode::Full;
    std::uint32_t subset = 5000;
};

ModeSpec parse_mode(const std::string& s) {
    if (s == "full") return {BatchMode::Full, 0};
    if (s.rfind("random:", 0) == 0) {
        const std::string count = s.substr(7);
        try {
            const unsigned long v = std::stoul(count);
            if (v == 0) throw UsageError("--mode random count must be > 0");
            return {BatchMode::RandomSubset, static_cast<std::uint32_t>(v)};
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError("bad --mode random count '" + count + "'");
        }
    }
    throw UsageError("unknown --mode value '" + s + "' (full or random:COUNT)");
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void write_lines(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    auto out = open_out(path);
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed for '" + path + "'");
}

const char* mode_name(BatchMode m) { return m == BatchMode::Full ? "full" : "random"; }

void require_seed(const ModeSpec& mode, bool seed_given) {
    if (mode.mode == BatchMode::RandomSubset && !seed_given) {
        throw UsageError("--seed is required with --mode random:COUNT");
    }
}

void write_dump(const std::string& path, const BatchResult& res) {
    auto out = open_out(path);
    out << "center,index\n";
    for (std::size_t ci = 0; ci < res.centers.size(); ++ci) {
        for (std::uint32_t idx : res.results[ci]) {
            out << res.centers[ci] << ',' << idx << '\n';
        }
    }
}

std::string memory_csv_rows(const MemoryReport& rep, const StructureCostParams& params,
                            const char* name, std::uint32_t n_max, bool header) {
    std::string text;
    if (header) text += "structure,N,n_max,nodes,rho,bytes_total,omega_expected,omega_measured\n";
    text += std::string(name) + ',' + std::to_string(rep.point_count) + ',' +
            std::to_string(n_max) + ',' + std::to_string(rep.node_count) + ',' +
            fmt(rep.rho()) + ',' + std::to_string(rep.bytes_total) + ',' +
            fmt(expected_overhead(params)) + ',' + fmt(rep.overhead()) + '\n';
    return text;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_reorder(const std::string& in, const std::string& out, const std::string& sfc) {
    const auto curve = parse_sfc(sfc);
    if (!curve) throw UsageError("reorder needs --sfc morton or hilbert");
    const PointCloud cloud = read_cloud(in);
    const CodedCloud coded = reorder_cloud(cloud, *curve);
    write_cloud(coded.cloud, out);
    std::cout << "reordered " << cloud.size() << " points (" << sfc << ") -> " << out << "\n";
    return 0;
}

int run_build(const std::string& in, std::uint32_t n_max, const std::string& sfc,
              bool report_memory, int threads) {
    const auto curve = parse_sfc(sfc);
    if (!curve) throw UsageError("build needs --sfc morton or hilbert");
    const PointCloud cloud = read_cloud(in);
    const CodedCloud coded = reorder_cloud(cloud, *curve);
    const auto t0 = std::chrono::steady_clock::now();
    const LinearOctree tree(coded, n_max, threads);
    const double secs = seconds_since(t0);
    std::cout << "linear octree: " << tree.leaf_count() << " leaves, " << tree.internal_count()
              << " internal nodes, built in " << fmt(secs) << " s\n";
    if (report_memory) {
        const MemoryReport rep = measure_structure(tree);
        std::cout << memory_csv_rows(rep, linear_octree_cost_params(rep.rho()), "linOctree",
                                     n_max, true);
    }
    return 0;
}

int run_radius(const std::string& in, const std::string& sfc, const std::string& method_s,
               const std::string& kernel_s, double radius, const std::string& mode_s,
               std::uint64_t seed, bool seed_given, int threads, std::uint32_t n_max,
               const std::string& csv, const std::string& dump) {
    const auto curve = parse_sfc(sfc);
    const RadiusMethod method = parse_method(method_s);
    const KernelShape shape = parse_kernel(kernel_s);
    const ModeSpec mode = parse_mode(mode_s);
    require_seed(mode, seed_given);
    if (!curve && method != RadiusMethod::Ptr) {
        throw UsageError("--sfc none supports only --method ptr "
                         "(the linear octree needs an SFC-ordered cloud)");
    }

    const PointCloud cloud = read_cloud(in);
    BatchOptions options{mode.mode, mode.subset, seed, threads, !dump.empty()};

    BatchResult res;
    if (!curve) {
        const PointerOctree tree(cloud, n_max);
        res = run_radius_batch_ptr(tree, cloud, shape, radius, options);
    } else {
        const CodedCloud coded = reorder_cloud(cloud, *curve);
        if (method == RadiusMethod::Ptr) {
            const PointerOctree tree(coded.cloud, n_max);
            res = run_radius_batch_ptr(tree, coded.cloud, shape, radius, options);
        } else {
            const LinearOctree tree(coded, n_max, threads);
            res = run_radius_batch(tree, coded, method, shape, radius, options);
        }
    }

    std::string text = "method,sfc,kernel,radius,mode,centers,threads,seed,wall_seconds,"
                       "mean_query_seconds,mu\n";
    text += method_s + ',' + sfc + ',' + kernel_s + ',' + fmt(radius) + ',' +
            mode_name(mode.mode) + ',' + std::to_string(res.centers.size()) + ',' +
            std::to_string(threads) + ',' + std::to_string(seed) + ',' +
            fmt(res.wall_seconds) + ',' + fmt(res.mean_query_seconds()) + ',' +
            fmt(res.mean_count) + '\n';
    write_lines(csv, text);
    if (!dump.empty()) write_dump(dump, res);
    return 0;
}

int run_knn(const std::string& in, const std::string& sfc, std::uint32_t k,
            const std::string& mode_s, std::uint64_t seed, bool seed_given, int threads,
            std::uint32_t n_max, const std::string& csv, const std::string& dump) {
    const auto curve = parse_sfc(sfc);
    if (!curve) throw UsageError("knn runs on the linear octree; --sfc morton or hilbert");
    const ModeSpec mode = parse_mode(mode_s);
    require_seed(mode, seed_given);

    const PointCloud cloud = read_cloud(in);
    const CodedCloud coded = reorder_cloud(cloud, *curve);
    const LinearOctree tree(coded, n_max, threads);
    BatchOptions options{mode.mode, mode.subset, seed, threads, !dump.empty()};
    const BatchResult res = run_knn_batch(tree, coded, k, options);

    std::string text =
        "method,sfc,k,mode,centers,threads,seed,wall_seconds,mean_query_seconds,mu\n";
    text += std::string("knn,") + sfc + ',' + std::to_string(k) + ',' + mode_name(mode.mode) +
            ',' + std::to_string(res.centers.size()) + ',' + std::to_string(threads) + ',' +
            std::to_string(seed) + ',' + fmt(res.wall_seconds) + ',' +
            fmt(res.mean_query_seconds()) + ',' + fmt(res.mean_count) + '\n';
    write_lines(csv, text);
    if (!dump.empty()) write_dump(dump, res);
    return 0;
}

int run_locality(const std::string& in, const std::string& sfc, std::uint32_t k,
                 std::uint32_t sample, std::uint64_t seed, bool seed_given, int threads,
                 std::uint32_t n_max, const std::string& csv) {
    const auto curve = parse_sfc(sfc);
    const PointCloud cloud = read_cloud(in);

    // With --sfc none the histogram measures the file's storage order; the
    // neighbourhoods still come from an internally reordered tree and are
    // mapped back through the permutation.
    const Curve query_curve = curve ? *curve : Curve::Hilbert;
    const CodedCloud coded = reorder_cloud(cloud, query_curve);
    const LinearOctree tree(coded, n_max, threads);
    const std::vector<std::uint32_t>* index_map = curve ? nullptr : &coded.permutation;

    LocalityHistogram hist;
    if (sample > 0) {
        if (!seed_given) throw UsageError("--seed is required with --sample");
        hist = locality_histogram_approx(tree, coded, k, sample, seed, threads, index_map);
    } else {
        hist = locality_histogram(tree, coded, k, threads, index_map);
    }

    const auto quart = histogram_quantiles(hist);
    std::string text = "d,count\n";
    for (const auto& [d, c] : hist.bins) {
        text += std::to_string(d) + ',' + std::to_string(c) + '\n';
    }
    text += "stat,value\n";
    text += "N," + std::to_string(hist.cloud_size) + '\n';
    text += "k," + std::to_string(hist.k) + '\n';
    text += "mean," + fmt(hist.mean()) + '\n';
    text += "stddev," + fmt(hist.stddev()) + '\n';
    text += "G1," + fmt(fisher_pearson_skewness(hist)) + '\n';
    text += "Q1," + fmt(quart[0]) + '\n';
    text += "Q2," + fmt(quart[1]) + '\n';
    text += "Q3," + fmt(quart[2]) + '\n';
    write_lines(csv, text);
    return 0;
}

int run_gen(const std::string& kind, std::uint64_t n, std::uint64_t seed,
            const std::string& out, double extent, std::uint32_t clusters, double sigma,
            std::uint32_t grid, double noise) {
    SyntheticSpec spec;
    if (kind == "uniform") {
        spec.kind = SyntheticSpec::Kind::Uniform;
    } else if (kind == "clusters") {
        spec.kind = SyntheticSpec::Kind::GaussianClusters;
    } else if (kind == "surface") {
        spec.kind = SyntheticSpec::Kind::Surface;
    } else {
        throw UsageError("unknown --kind value '" + kind + "'");
    }
    spec.n = n;
    spec.seed = seed;
    spec.extent = extent;
    spec.clusters = clusters;
    spec.sigma = sigma;
    spec.grid = grid;
    spec.noise = noise;
    write_cloud(generate_cloud(spec), out);
    std::cout << "generated " << n << " points (" << kind << ", seed " << seed << ") -> " << out
              << "\n";
    return 0;
}

int run_bench(const std::string& in, const std::string& sfc, std::uint32_t n_max, int threads,
              double radius, const std::string& kernel_s, const std::string& mode_s,
              std::uint64_t seed, bool seed_given, bool report_memory, const std::string& csv,
              const std::string& memory_csv) {
    const auto curve = parse_sfc(sfc);
    if (!curve) throw UsageError("bench needs --sfc morton or hilbert");
    const PointCloud cloud = read_cloud(in);
    const CodedCloud coded = reorder_cloud(cloud, *curve);

    std::string text = "event,method,sfc,n,n_max,threads,seconds,mu\n";
    const auto row = [&](const std::string& event, const std::string& method, int thr,
                         double secs, double mu) {
        text += event + ',' + method + ',' + sfc + ',' + std::to_string(cloud.size()) + ',' +
                std::to_string(n_max) + ',' + std::to_string(thr) + ',' + fmt(secs) + ',' +
                fmt(mu) + '\n';
    };

    auto t0 = std::chrono::steady_clock::now();
    const PointerOctree ptr_tree(cloud, n_max);
    row("build", "ptr", 1, seconds_since(t0), 0.0);

    t0 = std::chrono::steady_clock::now();
    const LinearOctree lin_seq(coded, n_max, 1);
    row("build", "lin", 1, seconds_since(t0), 0.0);

    if (threads > 1) {
        t0 = std::chrono::steady_clock::now();
        const LinearOctree lin_par(coded, n_max, threads);
        row("build", "lin", threads, seconds_since(t0), 0.0);
    }

    if (radius > 0.0) {
        const KernelShape shape = parse_kernel(kernel_s);
        const ModeSpec mode = parse_mode(mode_s);
        require_seed(mode, seed_given);
        BatchOptions options{mode.mode, mode.subset, seed, threads, false};
        const LinearOctree tree(coded, n_max, threads);
        const PointerOctree ptr_ordered(coded.cloud, n_max);

        auto res = run_radius_batch_ptr(ptr_ordered, coded.cloud, shape, radius, options);
        row("radius", "ptr", threads, res.wall_seconds, res.mean_count);
        for (const auto& [name, method] :
             {std::pair{"lin", RadiusMethod::Lin}, std::pair{"prune", RadiusMethod::Prune},
              std::pair{"struct", RadiusMethod::Struct}}) {
            res = run_radius_batch(tree, coded, method, shape, radius, options);
            row("radius", name, threads, res.wall_seconds, res.mean_count);
        }
    }
    write_lines(csv, text);

    if (report_memory) {
        const MemoryReport lin_rep = measure_structure(lin_seq);
        const MemoryReport ptr_rep = measure_structure(ptr_tree);
        std::string mem =
            memory_csv_rows(lin_rep, linear_octree_cost_params(lin_rep.rho()), "linOctree",
                            n_max, true) +
            memory_csv_rows(ptr_rep, pointer_octree_cost_params(ptr_rep.rho()), "ptrOctree",
                            n_max, false);
        write_lines(memory_csv, mem);
    }
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"SFC-reordered point clouds, linear octrees and neighbourhood-search "
                 "benchmarks"};
    app.require_subcommand(1);

    std::string in, out, sfc = "morton", method = "lin", kernel = "sphere", mode = "full";
    std::string csv, dump, memory_csv, kind = "uniform";
    std::uint32_t n_max = 128, k = 1, sample = 0, clusters = 10, grid = 256;
    std::uint64_t n = 0, seed = 0;
    double radius = 0.0, extent = 100.0, sigma = 2.0, noise = 0.5;
    int threads = 1;
    bool report_memory = false;

    auto* c_reorder = app.add_subcommand("reorder", "Sort a cloud file along an SFC");
    c_reorder->add_option("--in", in)->required();
    c_reorder->add_option("--out", out)->required();
    c_reorder->add_option("--sfc", sfc)->required();

    auto* c_build = app.add_subcommand("build", "Build the linear octree over a cloud");
    c_build->add_option("--in", in)->required();
    c_build->add_option("--nmax", n_max);
    c_build->add_option("--sfc", sfc)->required();
    c_build->add_flag("--report-memory", report_memory);
    c_build->add_option("--threads", threads);

    auto* c_radius = app.add_subcommand("radius", "Batch fixed-radius searches");
    c_radius->add_option("--in", in)->required();
    c_radius->add_option("--sfc", sfc)->required();
    c_radius->add_option("--method", method)->required();
    c_radius->add_option("--kernel", kernel)->required();
    c_radius->add_option("--radius", radius)->required();
    c_radius->add_option("--mode", mode);
    auto* radius_seed = c_radius->add_option("--seed", seed);
    c_radius->add_option("--threads", threads);
    c_radius->add_option("--nmax", n_max);
    c_radius->add_option("--csv", csv);
    c_radius->add_option("--dump", dump);

    auto* c_knn = app.add_subcommand("knn", "Batch kNN searches");
    c_knn->add_option("--in", in)->required();
    c_knn->add_option("--sfc", sfc)->required();
    c_knn->add_option("--k", k)->required();
    c_knn->add_option("--mode", mode);
    auto* knn_seed = c_knn->add_option("--seed", seed);
    c_knn->add_option("--threads", threads);
    c_knn->add_option("--nmax", n_max);
    c_knn->add_option("--csv", csv);
    c_knn->add_option("--dump", dump);

    auto* c_locality = app.add_subcommand("locality", "kNN locality histogram and skewness");
    c_locality->add_option("--in", in)->required();
    c_locality->add_option("--sfc", sfc)->required();
    c_locality->add_option("--k", k)->required();
    c_locality->add_option("--sample", sample);
    auto* locality_seed = c_locality->add_option("--seed", seed);
    c_locality->add_option("--threads", threads);
    c_locality->add_option("--nmax", n_max);
    c_locality->add_option("--csv", csv)->required();

    auto* c_gen = app.add_subcommand("gen", "Generate a synthetic cloud");
    c_gen->add_option("--kind", kind)->required();
    c_gen->add_option("--n", n)->required();
    c_gen->add_option("--seed", seed)->required();
    c_gen->add_option("--out", out)->required();
    c_gen->add_option("--extent", extent);
    c_gen->add_option("--clusters", clusters);
    c_gen->add_option("--sigma", sigma);
    c_gen->add_option("--grid", grid);
    c_gen->add_option("--noise", noise);

    auto* c_bench = app.add_subcommand("bench", "Build both octrees; optional search sweep");
    c_bench->add_option("--in", in)->required();
    c_bench->add_option("--sfc", sfc)->required();
    c_bench->add_option("--nmax", n_max);
    c_bench->add_option("--threads", threads);
    c_bench->add_option("--radius", radius);
    c_bench->add_option("--kernel", kernel);
    c_bench->add_option("--mode", mode);
    auto* bench_seed = c_bench->add_option("--seed", seed);
    c_bench->add_flag("--report-memory", report_memory);
    c_bench->add_option("--csv", csv);
    c_bench->add_option("--memory-csv", memory_csv);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*c_reorder) return run_reorder(in, out, sfc);
        if (*c_build) return run_build(in, n_max, sfc, report_memory, threads);
        if (*c_radius) {
            return run_radius(in, sfc, method, kernel, radius, mode, seed,
                              radius_seed->count() > 0, threads, n_max, csv, dump);
        }
        if (*c_knn) {
            return run_knn(in, sfc, k, mode, seed, knn_seed->count() > 0, threads, n_max, csv,
                           dump);
        }
        if (*c_locality) {
            return run_locality(in, sfc, k, sample, seed, locality_seed->count() > 0, threads,
                                n_max, csv);
        }
        if (*c_gen) return run_gen(kind, n, seed, out, extent, clusters, sigma, grid, noise);
        if (*c_bench) {
            return run_bench(in, sfc, n_max, threads, radius, kernel, mode, seed,
                             bench_seed->count() > 0, report_memory, csv, memory_csv);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
