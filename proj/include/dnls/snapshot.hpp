#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "dnls/field.hpp"
#include "dnls/problem.hpp"

namespace dnls {

static_assert(std::endian::native == std::endian::little,
              "snapshot files are little-endian; byte swapping is not implemented");

/// Binary snapshot layout, little-endian, all fields 64-bit:
///   int64 grid dim | int64 points per axis | f64 extent | f64 time |
///   int64 problem dimension | f64 alpha | int64 mu | f64 damping |
///   then size() interleaved (re, im) f64 pairs in row-major order.
inline void write_snapshot(const std::filesystem::path& path, const Field& field,
                           const ProblemSpec& spec) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open snapshot for writing: " + path.string());
    auto put_i64 = [&os](std::int64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    auto put_f64 = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    put_i64(field.grid.dim());
    put_i64(field.grid.points_per_axis());
    put_f64(field.grid.extent());
    put_f64(field.time);
    put_i64(spec.dimension);
    put_f64(spec.alpha);
    put_i64(spec.mu);
    put_f64(spec.damping);
    os.write(reinterpret_cast<const char*>(field.values.data()),
             static_cast<std::streamsize>(field.values.size() * sizeof(cplx)));
    if (!os) throw std::runtime_error("short write on snapshot: " + path.string());
}

struct Snapshot {
    Field field;
    ProblemSpec spec;
};

inline Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open snapshot: " + path.string());
    auto get_i64 = [&is]() {
        std::int64_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    auto get_f64 = [&is]() {
        double v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const auto dim = static_cast<int>(get_i64());
    const auto points = static_cast<int>(get_i64());
    const double extent = get_f64();
    const double time = get_f64();
    Snapshot snap;
    snap.spec.dimension = static_cast<int>(get_i64());
    snap.spec.alpha = get_f64();
    snap.spec.mu = static_cast<int>(get_i64());
    snap.spec.damping = get_f64();
    if (!is) throw std::runtime_error("truncated snapshot header: " + path.string());
    snap.field.grid = Grid::make(extent, points, dim);
    snap.field.time = time;
    snap.field.values.resize(snap.field.grid.size());
    is.read(reinterpret_cast<char*>(snap.field.values.data()),
            static_cast<std::streamsize>(snap.field.values.size() * sizeof(cplx)));
    if (!is) throw std::runtime_error("truncated snapshot payload: " + path.string());
    return snap;
}

}  // namespace dnls
