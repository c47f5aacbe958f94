#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "s2vs/errors.hpp"

namespace s2vs {

// Interleaved RGB, row-major, values nominally in [0, 1].
struct Image {
    int h = 0;
    int w = 0;
    std::vector<float> px;

    Image() = default;
    Image(int h_, int w_, float fill = 0.f) : h(h_), w(w_), px(static_cast<size_t>(h_) * w_ * 3, fill) {}

    float& at(int y, int x, int c) { return px[(static_cast<size_t>(y) * w + x) * 3 + c]; }
    float at(int y, int x, int c) const { return px[(static_cast<size_t>(y) * w + x) * 3 + c]; }
    float* row(int y) { return px.data() + static_cast<size_t>(y) * w * 3; }
    const float* row(int y) const { return px.data() + static_cast<size_t>(y) * w * 3; }
    bool empty() const { return h == 0 || w == 0; }
};

inline float clamp01(float v) { return v < 0.f ? 0.f : (v > 1.f ? 1.f : v); }

inline void clamp_pixels(Image& im) {
    for (float& v : im.px) v = clamp01(v);
}

inline float luma(float r, float g, float b) { return 0.299f * r + 0.587f * g + 0.114f * b; }

// ---------------------------------------------------------------------------
// PNM IO. Frames are stored as binary 8-bit P6; grayscale dumps as P5.
// ---------------------------------------------------------------------------
namespace detail {

inline int pnm_int(std::istream& is) {
    // Skips whitespace and '#' comments per the PNM grammar.
    int c = is.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = is.get();
        } else if (!std::isspace(c)) {
            break;
        }
        c = is.get();
    }
    if (c == EOF || !std::isdigit(c)) throw FormatError("PNM: malformed header");
    int v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        c = is.get();
    }
    return v;
}

}  // namespace detail

inline void write_ppm(const std::filesystem::path& path, const Image& im) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    os << "P6\n" << im.w << " " << im.h << "\n255\n";
    std::string buf;
    buf.reserve(im.px.size());
    for (float v : im.px)
        buf.push_back(static_cast<char>(static_cast<int>(std::lround(clamp01(v) * 255.f))));
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw IngestError("short write: " + path.string());
}

inline Image read_ppm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IngestError("cannot open: " + path.string());
    char m0 = 0, m1 = 0;
    is.get(m0);
    is.get(m1);
    if (m0 != 'P' || m1 != '6') throw FormatError("not a binary PPM: " + path.string());
    int w = detail::pnm_int(is);
    int h = detail::pnm_int(is);
    int maxv = detail::pnm_int(is);
    if (w <= 0 || h <= 0 || maxv != 255) throw FormatError("unsupported PPM header: " + path.string());
    Image im(h, w);
    std::vector<unsigned char> buf(static_cast<size_t>(h) * w * 3);
    is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (is.gcount() != static_cast<std::streamsize>(buf.size()))
        throw FormatError("PPM payload truncated: " + path.string());
    for (size_t i = 0; i < buf.size(); ++i) im.px[i] = static_cast<float>(buf[i]) / 255.f;
    return im;
}

inline void write_pgm(const std::filesystem::path& path, int h, int w, const std::vector<float>& gray) {
    if (static_cast<size_t>(h) * w != gray.size()) throw DimensionError("write_pgm: size mismatch");
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("cannot open for writing: " + path.string());
    os << "P5\n" << w << " " << h << "\n255\n";
    std::string buf;
    buf.reserve(gray.size());
    for (float v : gray)
        buf.push_back(static_cast<char>(static_cast<int>(std::lround(clamp01(v) * 255.f))));
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!os) throw IngestError("short write: " + path.string());
}

// ---------------------------------------------------------------------------
// Geometry.
// ---------------------------------------------------------------------------
inline Image resize_bilinear(const Image& src, int oh, int ow) {
    if (src.empty() || oh <= 0 || ow <= 0) throw DimensionError("resize_bilinear: empty input or output");
    Image out(oh, ow);
    // Align corners = false convention: sample at pixel centers. Column
    // coordinates are precomputed; this runs for every augmented frame.
    const float sy = static_cast<float>(src.h) / oh;
    const float sx = static_cast<float>(src.w) / ow;
    std::vector<int> x0s(static_cast<size_t>(ow)), x1s(static_cast<size_t>(ow));
    std::vector<float> wxs(static_cast<size_t>(ow));
    for (int x = 0; x < ow; ++x) {
        float fx = (x + 0.5f) * sx - 0.5f;
        int x0 = static_cast<int>(std::floor(fx));
        wxs[static_cast<size_t>(x)] = fx - x0;
        x0s[static_cast<size_t>(x)] = std::clamp(x0, 0, src.w - 1) * 3;
        x1s[static_cast<size_t>(x)] = std::clamp(x0 + 1, 0, src.w - 1) * 3;
    }
    for (int y = 0; y < oh; ++y) {
        float fy = (y + 0.5f) * sy - 0.5f;
        int y0 = static_cast<int>(std::floor(fy));
        float wy = fy - y0;
        const float* r0 = src.row(std::clamp(y0, 0, src.h - 1));
        const float* r1 = src.row(std::clamp(y0 + 1, 0, src.h - 1));
        float* ro = out.row(y);
        for (int x = 0; x < ow; ++x) {
            const int x0 = x0s[static_cast<size_t>(x)], x1 = x1s[static_cast<size_t>(x)];
            const float wx = wxs[static_cast<size_t>(x)];
            for (int c = 0; c < 3; ++c) {
                float top = r0[x0 + c] * (1.f - wx) + r0[x1 + c] * wx;
                float bot = r1[x0 + c] * (1.f - wx) + r1[x1 + c] * wx;
                ro[x * 3 + c] = top * (1.f - wy) + bot * wy;
            }
        }
    }
    return out;
}

inline Image crop(const Image& src, int y, int x, int ch, int cw) {
    if (y < 0 || x < 0 || ch <= 0 || cw <= 0 || y + ch > src.h || x + cw > src.w)
        throw DimensionError("crop: rectangle out of bounds");
    Image out(ch, cw);
    for (int yy = 0; yy < ch; ++yy)
        std::copy_n(src.row(y + yy) + static_cast<size_t>(x) * 3, static_cast<size_t>(cw) * 3, out.row(yy));
    return out;
}

inline Image hflip(const Image& src) {
    Image out(src.h, src.w);
    for (int y = 0; y < src.h; ++y) {
        const float* ri = src.row(y);
        float* ro = out.row(y);
        for (int x = 0; x < src.w; ++x)
            for (int c = 0; c < 3; ++c) ro[x * 3 + c] = ri[(src.w - 1 - x) * 3 + c];
    }
    return out;
}

// Applies the inverse map out(x,y) <- src(a*x + b*y + c, d*x + e*y + f) with
// bilinear sampling; out-of-range samples read as `fill`.
inline Image affine_inverse(const Image& src, const std::array<double, 6>& m, float fill = 0.f) {
    Image out(src.h, src.w, fill);
    for (int y = 0; y < out.h; ++y) {
        float* ro = out.row(y);
        for (int x = 0; x < out.w; ++x) {
            double sx = m[0] * x + m[1] * y + m[2];
            double sy = m[3] * x + m[4] * y + m[5];
            int x0 = static_cast<int>(std::floor(sx));
            int y0 = static_cast<int>(std::floor(sy));
            float wx = static_cast<float>(sx - x0);
            float wy = static_cast<float>(sy - y0);
            if (x0 >= 0 && x0 + 1 < src.w && y0 >= 0 && y0 + 1 < src.h) {
                // All four taps in bounds: skip the per-sample checks.
                const float* r0 = src.row(y0) + static_cast<size_t>(x0) * 3;
                const float* r1 = src.row(y0 + 1) + static_cast<size_t>(x0) * 3;
                for (int c = 0; c < 3; ++c) {
                    float top = r0[c] * (1.f - wx) + r0[3 + c] * wx;
                    float bot = r1[c] * (1.f - wx) + r1[3 + c] * wx;
                    ro[x * 3 + c] = top * (1.f - wy) + bot * wy;
                }
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                auto sample = [&](int yy, int xx) -> float {
                    if (yy < 0 || yy >= src.h || xx < 0 || xx >= src.w) return fill;
                    return src.at(yy, xx, c);
                };
                float top = sample(y0, x0) * (1.f - wx) + sample(y0, x0 + 1) * wx;
                float bot = sample(y0 + 1, x0) * (1.f - wx) + sample(y0 + 1, x0 + 1) * wx;
                ro[x * 3 + c] = top * (1.f - wy) + bot * wy;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Photometric ops (PIL-style enhance semantics; results clamped to [0,1]).
// ---------------------------------------------------------------------------
inline void adjust_brightness(Image& im, float factor) {
    for (float& v : im.px) v = clamp01(v * factor);
}

inline void adjust_contrast(Image& im, float factor) {
    double sum = 0.0;
    for (int y = 0; y < im.h; ++y) {
        const float* r = im.row(y);
        for (int x = 0; x < im.w; ++x) sum += luma(r[x * 3], r[x * 3 + 1], r[x * 3 + 2]);
    }
    float mean = static_cast<float>(sum / (static_cast<double>(im.h) * im.w));
    for (float& v : im.px) v = clamp01(mean + (v - mean) * factor);
}

// Saturation: blend with the per-pixel gray value.
inline void adjust_color(Image& im, float factor) {
    for (int y = 0; y < im.h; ++y) {
        float* r = im.row(y);
        for (int x = 0; x < im.w; ++x) {
            float g = luma(r[x * 3], r[x * 3 + 1], r[x * 3 + 2]);
            for (int c = 0; c < 3; ++c) r[x * 3 + c] = clamp01(g + (r[x * 3 + c] - g) * factor);
        }
    }
}

inline void invert_pixels(Image& im) {
    for (float& v : im.px) v = 1.f - clamp01(v);
}

inline void posterize(Image& im, int bits) {
    if (bits < 1 || bits > 8) throw ConfigError("posterize: bits must be in [1,8]");
    // Emulates masking the low bits of an 8-bit channel.
    int mask = 256 - (256 >> bits);
    for (float& v : im.px) {
        int q = static_cast<int>(clamp01(v) * 255.f + 0.5f) & mask;
        v = static_cast<float>(q) / 255.f;
    }
}

inline void solarize(Image& im, float threshold) {
    for (float& v : im.px) {
        float c = clamp01(v);
        v = c >= threshold ? 1.f - c : c;
    }
}

// Per-channel linear stretch to the full range.
inline void autocontrast(Image& im) {
    for (int c = 0; c < 3; ++c) {
        float lo = 1.f, hi = 0.f;
        for (size_t i = c; i < im.px.size(); i += 3) {
            lo = std::min(lo, im.px[i]);
            hi = std::max(hi, im.px[i]);
        }
        if (hi <= lo) continue;
        float scale = 1.f / (hi - lo);
        for (size_t i = c; i < im.px.size(); i += 3) im.px[i] = clamp01((im.px[i] - lo) * scale);
    }
}

// Histogram equalization over 256 bins, per channel.
inline void equalize(Image& im) {
    for (int c = 0; c < 3; ++c) {
        std::array<int, 256> hist{};
        for (size_t i = c; i < im.px.size(); i += 3)
            ++hist[static_cast<int>(clamp01(im.px[i]) * 255.f + 0.5f)];
        int total = static_cast<int>(im.px.size() / 3);
        std::array<float, 256> lut{};
        int cum = 0;
        for (int b = 0; b < 256; ++b) {
            cum += hist[b];
            lut[b] = static_cast<float>(cum - 1) / std::max(1, total - 1);
        }
        for (size_t i = c; i < im.px.size(); i += 3)
            im.px[i] = clamp01(lut[static_cast<int>(clamp01(im.px[i]) * 255.f + 0.5f)]);
    }
}

// Separable Gaussian, radius = ceil(2*sigma), edge-clamped.
inline void gaussian_blur(Image& im, double sigma) {
    if (sigma <= 0.0) return;
    int radius = static_cast<int>(std::ceil(2.0 * sigma));
    std::vector<float> k(static_cast<size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<size_t>(i + radius)] = static_cast<float>(v);
        sum += v;
    }
    for (float& v : k) v = static_cast<float>(v / sum);

    const int taps = 2 * radius + 1;
    Image tmp(im.h, im.w);
    for (int y = 0; y < im.h; ++y) {
        const float* ri = im.row(y);
        float* ro = tmp.row(y);
        for (int x = 0; x < im.w; ++x) {
            float acc[3] = {0.f, 0.f, 0.f};
            if (x >= radius && x + radius < im.w) {
                // All taps in bounds: walk the row without edge clamping.
                const float* p = ri + static_cast<size_t>(x - radius) * 3;
                for (int i = 0; i < taps; ++i, p += 3) {
                    float kv = k[static_cast<size_t>(i)];
                    for (int c = 0; c < 3; ++c) acc[c] += kv * p[c];
                }
            } else {
                for (int i = -radius; i <= radius; ++i) {
                    int xx = std::clamp(x + i, 0, im.w - 1);
                    float kv = k[static_cast<size_t>(i + radius)];
                    for (int c = 0; c < 3; ++c) acc[c] += kv * ri[xx * 3 + c];
                }
            }
            for (int c = 0; c < 3; ++c) ro[x * 3 + c] = acc[c];
        }
    }
    const size_t stride = static_cast<size_t>(im.w) * 3;
    for (int y = 0; y < im.h; ++y) {
        float* ro = im.row(y);
        if (y >= radius && y + radius < im.h) {
            const float* base = tmp.row(y - radius);
            for (int x = 0; x < im.w; ++x) {
                float acc[3] = {0.f, 0.f, 0.f};
                const float* p = base + static_cast<size_t>(x) * 3;
                for (int i = 0; i < taps; ++i, p += stride) {
                    float kv = k[static_cast<size_t>(i)];
                    for (int c = 0; c < 3; ++c) acc[c] += kv * p[c];
                }
                // The rounded kernel can sum to 1 plus a few ulps; keep the
                // output inside the image value contract.
                for (int c = 0; c < 3; ++c) ro[x * 3 + c] = clamp01(acc[c]);
            }
            continue;
        }
        for (int x = 0; x < im.w; ++x) {
            float acc[3] = {0.f, 0.f, 0.f};
            for (int i = -radius; i <= radius; ++i) {
                int yy = std::clamp(y + i, 0, im.h - 1);
                const float* rt = tmp.row(yy);
                float kv = k[static_cast<size_t>(i + radius)];
                for (int c = 0; c < 3; ++c) acc[c] += kv * rt[x * 3 + c];
            }
            for (int c = 0; c < 3; ++c) ro[x * 3 + c] = clamp01(acc[c]);
        }
    }
}

// ---------------------------------------------------------------------------
// Drawing.
// ---------------------------------------------------------------------------
inline void fill_rect(Image& im, int y, int x, int rh, int rw, float r, float g, float b) {
    int y0 = std::max(0, y), y1 = std::min(im.h, y + rh);
    int x0 = std::max(0, x), x1 = std::min(im.w, x + rw);
    for (int yy = y0; yy < y1; ++yy) {
        float* row = im.row(yy);
        for (int xx = x0; xx < x1; ++xx) {
            row[xx * 3] = r;
            row[xx * 3 + 1] = g;
            row[xx * 3 + 2] = b;
        }
    }
}

inline void fill_disc(Image& im, double cy, double cx, double radius, float r, float g, float b) {
    int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
    int y1 = std::min(im.h - 1, static_cast<int>(std::ceil(cy + radius)));
    int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
    int x1 = std::min(im.w - 1, static_cast<int>(std::ceil(cx + radius)));
    double r2 = radius * radius;
    for (int yy = y0; yy <= y1; ++yy) {
        float* row = im.row(yy);
        for (int xx = x0; xx <= x1; ++xx) {
            double dy = yy + 0.5 - cy, dx = xx + 0.5 - cx;
            if (dy * dy + dx * dx <= r2) {
                row[xx * 3] = r;
                row[xx * 3 + 1] = g;
                row[xx * 3 + 2] = b;
            }
        }
    }
}

// Even-odd polygon fill. Vertices in (x, y) order, pixel-center sampling.
inline void fill_polygon(Image& im, const std::vector<std::pair<double, double>>& poly,
                         float r, float g, float b) {
    if (poly.size() < 3) return;
    double ymin = poly[0].second, ymax = poly[0].second;
    for (auto& p : poly) {
        ymin = std::min(ymin, p.second);
        ymax = std::max(ymax, p.second);
    }
    int y0 = std::max(0, static_cast<int>(std::floor(ymin)));
    int y1 = std::min(im.h - 1, static_cast<int>(std::ceil(ymax)));
    for (int yy = y0; yy <= y1; ++yy) {
        double sy = yy + 0.5;
        std::vector<double> xs;
        size_t n = poly.size();
        for (size_t i = 0; i < n; ++i) {
            auto [x1p, y1p] = poly[i];
            auto [x2p, y2p] = poly[(i + 1) % n];
            if ((y1p <= sy && y2p > sy) || (y2p <= sy && y1p > sy))
                xs.push_back(x1p + (sy - y1p) / (y2p - y1p) * (x2p - x1p));
        }
        std::sort(xs.begin(), xs.end());
        float* row = im.row(yy);
        for (size_t i = 0; i + 1 < xs.size(); i += 2) {
            int xa = std::max(0, static_cast<int>(std::ceil(xs[i] - 0.5)));
            int xb = std::min(im.w - 1, static_cast<int>(std::floor(xs[i + 1] - 0.5)));
            for (int xx = xa; xx <= xb; ++xx) {
                row[xx * 3] = r;
                row[xx * 3 + 1] = g;
                row[xx * 3 + 2] = b;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// 5x7 bitmap font (A-Z, 0-9). One byte per column, bit 0 = top row.
// ---------------------------------------------------------------------------
namespace detail {

inline const std::array<uint8_t, 5>* glyph5x7(char ch) {
    static const std::array<std::array<uint8_t, 5>, 36> table = {{
        {0x3E, 0x51, 0x49, 0x45, 0x3E},  // 0
        {0x00, 0x42, 0x7F, 0x40, 0x00},  // 1
        {0x42, 0x61, 0x51, 0x49, 0x46},  // 2
        {0x21, 0x41, 0x45, 0x4B, 0x31},  // 3
        {0x18, 0x14, 0x12, 0x7F, 0x10},  // 4
        {0x27, 0x45, 0x45, 0x45, 0x39},  // 5
        {0x3C, 0x4A, 0x49, 0x49, 0x30},  // 6
        {0x01, 0x71, 0x09, 0x05, 0x03},  // 7
        {0x36, 0x49, 0x49, 0x49, 0x36},  // 8
        {0x06, 0x49, 0x49, 0x29, 0x1E},  // 9
        {0x7E, 0x11, 0x11, 0x11, 0x7E},  // A
        {0x7F, 0x49, 0x49, 0x49, 0x36},  // B
        {0x3E, 0x41, 0x41, 0x41, 0x22},  // C
        {0x7F, 0x41, 0x41, 0x22, 0x1C},  // D
        {0x7F, 0x49, 0x49, 0x49, 0x41},  // E
        {0x7F, 0x09, 0x09, 0x09, 0x01},  // F
        {0x3E, 0x41, 0x49, 0x49, 0x7A},  // G
        {0x7F, 0x08, 0x08, 0x08, 0x7F},  // H
        {0x00, 0x41, 0x7F, 0x41, 0x00},  // I
        {0x20, 0x40, 0x41, 0x3F, 0x01},  // J
        {0x7F, 0x08, 0x14, 0x22, 0x41},  // K
        {0x7F, 0x40, 0x40, 0x40, 0x40},  // L
        {0x7F, 0x02, 0x0C, 0x02, 0x7F},  // M
        {0x7F, 0x04, 0x08, 0x10, 0x7F},  // N
        {0x3E, 0x41, 0x41, 0x41, 0x3E},  // O
        {0x7F, 0x09, 0x09, 0x09, 0x06},  // P
        {0x3E, 0x41, 0x51, 0x21, 0x5E},  // Q
        {0x7F, 0x09, 0x19, 0x29, 0x46},  // R
        {0x46, 0x49, 0x49, 0x49, 0x31},  // S
        {0x01, 0x01, 0x7F, 0x01, 0x01},  // T
        {0x3F, 0x40, 0x40, 0x40, 0x3F},  // U
        {0x1F, 0x20, 0x40, 0x20, 0x1F},  // V
        {0x3F, 0x40, 0x38, 0x40, 0x3F},  // W
        {0x63, 0x14, 0x08, 0x14, 0x63},  // X
        {0x07, 0x08, 0x70, 0x08, 0x07},  // Y
        {0x61, 0x51, 0x49, 0x45, 0x43},  // Z
    }};
    if (ch >= '0' && ch <= '9') return &table[static_cast<size_t>(ch - '0')];
    if (ch >= 'A' && ch <= 'Z') return &table[static_cast<size_t>(ch - 'A') + 10];
    return nullptr;
}

}  // namespace detail

// Width in pixels of `text` at integer `scale` (6*scale per glyph cell).
inline int text_width(const std::string& text, int scale) {
    return static_cast<int>(text.size()) * 6 * scale;
}

inline int text_height(int scale) { return 7 * scale; }

// Draws uppercase/digit text; unknown characters render as blank cells.
inline void draw_text(Image& im, const std::string& text, int y, int x, int scale,
                      float r, float g, float b) {
    int cx = x;
    for (char ch : text) {
        const auto* glyph = detail::glyph5x7(ch);
        if (glyph) {
            for (int col = 0; col < 5; ++col) {
                uint8_t bits = (*glyph)[static_cast<size_t>(col)];
                for (int rowi = 0; rowi < 7; ++rowi)
                    if (bits & (1u << rowi))
                        fill_rect(im, y + rowi * scale, cx + col * scale, scale, scale, r, g, b);
            }
        }
        cx += 6 * scale;
    }
}

// ---------------------------------------------------------------------------
// Stats used by tests and pipeline checks.
// ---------------------------------------------------------------------------
inline double mean_pixel(const Image& im) {
    double s = 0.0;
    for (float v : im.px) s += v;
    return im.px.empty() ? 0.0 : s / static_cast<double>(im.px.size());
}

// Mean squared 4-neighbour Laplacian of the luma channel; drops under blur.
inline double laplacian_energy(const Image& im) {
    if (im.h < 3 || im.w < 3) return 0.0;
    double s = 0.0;
    for (int y = 1; y + 1 < im.h; ++y) {
        for (int x = 1; x + 1 < im.w; ++x) {
            auto l = [&](int yy, int xx) { return luma(im.at(yy, xx, 0), im.at(yy, xx, 1), im.at(yy, xx, 2)); };
            double v = 4.0 * l(y, x) - l(y - 1, x) - l(y + 1, x) - l(y, x - 1) - l(y, x + 1);
            s += v * v;
        }
    }
    return s / (static_cast<double>(im.h - 2) * (im.w - 2));
}

}  // namespace s2vs
