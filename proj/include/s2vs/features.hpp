#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"

namespace s2vs {

// T frames x R regions x D dims, row-major. Double in memory; the on-disk
// format stores float32.
struct RegionFeatureMap {
    int t = 0, r = 0, d = 0;
    std::vector<double> v;

    RegionFeatureMap() = default;
    RegionFeatureMap(int t_, int r_, int d_)
        : t(t_), r(r_), d(d_), v(static_cast<size_t>(t_) * r_ * d_, 0.0) {}

    double* region(int ti, int ri) { return v.data() + (static_cast<size_t>(ti) * r + ri) * d; }
    const double* region(int ti, int ri) const {
        return v.data() + (static_cast<size_t>(ti) * r + ri) * d;
    }

    // (T*R) x D view of all region vectors, frame-major.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> rows() const {
        return {v.data(), static_cast<Eigen::Index>(t) * r, d};
    }
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> rows() {
        return {v.data(), static_cast<Eigen::Index>(t) * r, d};
    }
};

inline void validate(const RegionFeatureMap& m) {
    if (m.t < 1 || m.r < 1 || m.d < 1) throw DimensionError("RegionFeatureMap: all dims must be >= 1");
    if (m.v.size() != static_cast<size_t>(m.t) * m.r * m.d)
        throw DimensionError("RegionFeatureMap: payload size mismatch");
}

// Binary feature file: magic "S2VF", u32 version=1, u32 T, R, D, then T*R*D
// float32 values, row-major, little-endian.
inline void write_features(const std::filesystem::path& path, const RegionFeatureMap& m) {
    validate(m);
    std::string buf;
    buf.reserve(16 + m.v.size() * 4);
    buf += "S2VF";
    put_u32le(buf, 1);
    put_u32le(buf, static_cast<uint32_t>(m.t));
    put_u32le(buf, static_cast<uint32_t>(m.r));
    put_u32le(buf, static_cast<uint32_t>(m.d));
    for (double x : m.v) put_f32le(buf, static_cast<float>(x));
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw IngestError("short write: " + path.string());
}

inline RegionFeatureMap read_features(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IngestError("cannot open: " + path.string());
    std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    ByteReader r(data.data(), data.size());
    if (r.bytes(4) != "S2VF") throw FormatError("not a feature file: " + path.string());
    uint32_t version = r.u32le();
    if (version != 1) throw FormatError("unsupported feature file version " + std::to_string(version));
    uint32_t t = r.u32le(), rr = r.u32le(), d = r.u32le();
    if (t < 1 || rr < 1 || d < 1) throw FormatError("feature file with empty dimension: " + path.string());
    size_t n = static_cast<size_t>(t) * rr * d;
    if (r.remaining() != n * 4) throw FormatError("feature file payload size mismatch: " + path.string());
    RegionFeatureMap m(static_cast<int>(t), static_cast<int>(rr), static_cast<int>(d));
    for (size_t i = 0; i < n; ++i) m.v[i] = static_cast<double>(r.f32le());
    return m;
}

}  // namespace s2vs
