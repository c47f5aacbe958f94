#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/features.hpp"
#include "s2vs/image.hpp"

namespace s2vs {

// Frozen feature extractor: frames -> raw T x R x D_raw region tensors.
// `descriptor` identifies the extractor in checkpoints ("toy:v1" is bundled;
// external extractors are adapters the embedding application re-registers).
struct Backbone {
    std::string descriptor;
    int regions = 0;
    int d_raw = 0;
    std::function<RegionFeatureMap(const std::vector<Image>&)> extract;
};

namespace detail {

constexpr int kToyGrid = 3;       // 3x3 region grid
constexpr int kToyCells = 4;      // 4x4 pooling cells per region
constexpr uint64_t kToySeed = 0x53325653u;  // frozen; changing it changes every feature

// Pooled stats for one region: per cell mean R, G, B and mean |luma gradient|.
inline void pool_region(const Image& im, int ry, int rx, double* out64) {
    int y0 = ry * im.h / kToyGrid, y1 = (ry + 1) * im.h / kToyGrid;
    int x0 = rx * im.w / kToyGrid, x1 = (rx + 1) * im.w / kToyGrid;
    for (int cy = 0; cy < kToyCells; ++cy) {
        for (int cx = 0; cx < kToyCells; ++cx) {
            int yy0 = y0 + cy * (y1 - y0) / kToyCells, yy1 = y0 + (cy + 1) * (y1 - y0) / kToyCells;
            int xx0 = x0 + cx * (x1 - x0) / kToyCells, xx1 = x0 + (cx + 1) * (x1 - x0) / kToyCells;
            double acc[4] = {0, 0, 0, 0};
            long n = 0;
            for (int y = yy0; y < yy1; ++y) {
                const float* row = im.row(y);
                const float* rown = im.row(std::min(y + 1, im.h - 1));
                for (int x = xx0; x < xx1; ++x) {
                    float r = row[x * 3], g = row[x * 3 + 1], b = row[x * 3 + 2];
                    acc[0] += r;
                    acc[1] += g;
                    acc[2] += b;
                    int xr = std::min(x + 1, im.w - 1);
                    float l = luma(r, g, b);
                    float lx = luma(row[xr * 3], row[xr * 3 + 1], row[xr * 3 + 2]);
                    float ly = luma(rown[x * 3], rown[x * 3 + 1], rown[x * 3 + 2]);
                    acc[3] += std::abs(lx - l) + std::abs(ly - l);
                    ++n;
                }
            }
            int cell = cy * kToyCells + cx;
            for (int c = 0; c < 4; ++c)
                out64[cell * 4 + c] = n > 0 ? acc[c] / static_cast<double>(n) : 0.0;
        }
    }
}

inline const Eigen::MatrixXd& toy_projection() {
    static const Eigen::MatrixXd p = [] {
        Rng rng(kToySeed);
        Eigen::MatrixXd m(64, 64);
        for (int i = 0; i < 64; ++i)
            for (int j = 0; j < 64; ++j) m(i, j) = rng.gaussian() / 8.0;
        return m;
    }();
    return p;
}

}  // namespace detail

// Bundled extractor: 3x3 grid of regions, 4x4 pooled color/gradient stats per
// region, mixed by a frozen random rotation. Deterministic and local: a pixel
// only influences its own region's vector.
inline Backbone make_toy_backbone() {
    Backbone b;
    b.descriptor = "toy:v1";
    b.regions = 9;
    b.d_raw = 64;
    b.extract = [](const std::vector<Image>& frames) {
        if (frames.empty()) throw EmptyInputError("toy backbone: no frames");
        RegionFeatureMap out(static_cast<int>(frames.size()), 9, 64);
        const Eigen::MatrixXd& p = detail::toy_projection();
        Eigen::VectorXd pooled(64);
        for (size_t t = 0; t < frames.size(); ++t) {
            for (int ry = 0; ry < detail::kToyGrid; ++ry) {
                for (int rx = 0; rx < detail::kToyGrid; ++rx) {
                    detail::pool_region(frames[t], ry, rx, pooled.data());
                    Eigen::Map<Eigen::VectorXd> dst(out.region(static_cast<int>(t), ry * detail::kToyGrid + rx), 64);
                    dst = p * pooled;
                }
            }
        }
        return out;
    };
    return b;
}

// Adapter for an application-supplied extractor.
inline Backbone make_external_backbone(const std::string& name, int regions, int d_raw,
                                       std::function<RegionFeatureMap(const std::vector<Image>&)> fn) {
    if (regions < 1 || d_raw < 1) throw ConfigError("external backbone: dims must be >= 1");
    Backbone b;
    b.descriptor = "external:" + name;
    b.regions = regions;
    b.d_raw = d_raw;
    b.extract = std::move(fn);
    return b;
}

}  // namespace s2vs
