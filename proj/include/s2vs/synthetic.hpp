#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/image.hpp"
#include "s2vs/video.hpp"

namespace s2vs {

struct CorpusSpec {
    int num_videos = 8;
    int duration_min = 8;   // seconds at 1 fps
    int duration_max = 16;
    int motif_count = 4;    // size of the shared motif pool
    uint64_t seed = 0;
};

inline void validate(const CorpusSpec& spec) {
    if (spec.num_videos < 2) throw ConfigError("CorpusSpec: num_videos must be >= 2");
    if (spec.duration_min < 4) throw ConfigError("CorpusSpec: duration_min must be >= 4 seconds");
    if (spec.duration_max < spec.duration_min)
        throw ConfigError("CorpusSpec: duration_max must be >= duration_min");
    if (spec.motif_count < 1) throw ConfigError("CorpusSpec: motif_count must be >= 1");
}

namespace detail {

constexpr int kSynthSize = 256;

struct MovingShape {
    int kind = 0;  // 0 disc, 1 square, 2 triangle
    float color[3] = {0, 0, 0};
    double radius = 0, y = 0, x = 0, vy = 0, vx = 0;
};

// Motif appearance depends only on the motif id, so videos sharing an id
// share an identical stamp (their partial-overlap confounder).
inline void stamp_motif(Image& im, int motif_id, int y, int x, int size) {
    Rng rng(0x6d6f746966ULL ^ (static_cast<uint64_t>(motif_id) * 0x9e3779b97f4a7c15ULL));
    float c1[3] = {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                   static_cast<float>(rng.uniform())};
    float c2[3] = {static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                   static_cast<float>(rng.uniform())};
    int kind = static_cast<int>(rng.uniform_int(0, 2));
    fill_rect(im, y, x, size, size, c1[0], c1[1], c1[2]);
    if (kind == 0) {
        // Grid of discs.
        int n = 3;
        double cell = static_cast<double>(size) / n;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                fill_disc(im, y + (i + 0.5) * cell, x + (j + 0.5) * cell, cell * 0.35, c2[0], c2[1], c2[2]);
    } else if (kind == 1) {
        // Horizontal bars.
        int bars = 4;
        int bh = size / (2 * bars);
        for (int i = 0; i < bars; ++i)
            fill_rect(im, y + i * 2 * bh, x, bh, size, c2[0], c2[1], c2[2]);
    } else {
        // Concentric rings (alternating discs).
        double cy = y + size / 2.0, cx = x + size / 2.0;
        for (int i = 3; i >= 1; --i) {
            const float* c = (i % 2 == 0) ? c1 : c2;
            fill_disc(im, cy, cx, size * 0.5 * i / 3.0, c[0], c[1], c[2]);
        }
    }
}

inline void draw_shape(Image& im, const MovingShape& s) {
    if (s.kind == 0) {
        fill_disc(im, s.y, s.x, s.radius, s.color[0], s.color[1], s.color[2]);
    } else if (s.kind == 1) {
        fill_rect(im, static_cast<int>(s.y - s.radius), static_cast<int>(s.x - s.radius),
                  static_cast<int>(2 * s.radius), static_cast<int>(2 * s.radius),
                  s.color[0], s.color[1], s.color[2]);
    } else {
        fill_polygon(im,
                     {{s.x, s.y - s.radius},
                      {s.x + s.radius, s.y + s.radius},
                      {s.x - s.radius, s.y + s.radius}},
                     s.color[0], s.color[1], s.color[2]);
    }
}

inline void bounce(double& p, double& v, double lo, double hi) {
    p += v;
    if (p < lo) {
        p = 2 * lo - p;
        v = -v;
    } else if (p > hi) {
        p = 2 * hi - p;
        v = -v;
    }
}

inline FrameSequence render_video(const std::string& id, int duration, int motif_id, Rng rng) {
    const int S = kSynthSize;
    FrameSequence out;
    out.source_id = id;

    // Per-video palette; each frame renders a wave with fresh colors, period,
    // orientation, and phase so adjacent frames decorrelate.
    float palette[5][3];
    for (auto& color : palette)
        for (int c = 0; c < 3; ++c) color[c] = static_cast<float>(rng.uniform());

    // The motif cycles through the corners so no grid cell is static, while
    // every frame still carries the shared stamp.
    int motif_corner0 = static_cast<int>(rng.uniform_int(0, 3));
    int motif_size = 80;
    int mpos[4][2] = {{8, 8}, {8, S - motif_size - 8}, {S - motif_size - 8, 8},
                      {S - motif_size - 8, S - motif_size - 8}};

    std::string code;
    static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    for (int i = 0; i < 3; ++i) code.push_back(alphabet[rng.uniform_int(0, 35)]);
    float code_color[3] = {static_cast<float>(rng.uniform(0.7, 1.0)),
                           static_cast<float>(rng.uniform(0.7, 1.0)),
                           static_cast<float>(rng.uniform(0.7, 1.0))};
    const int code_w = text_width(code, 4), code_h = text_height(4);

    int nshapes = static_cast<int>(rng.uniform_int(4, 6));
    std::vector<MovingShape> shapes(static_cast<size_t>(nshapes));
    for (auto& s : shapes) {
        s.kind = static_cast<int>(rng.uniform_int(0, 2));
        for (int c = 0; c < 3; ++c) s.color[c] = static_cast<float>(rng.uniform());
        s.radius = rng.uniform(18.0, 40.0);
        s.y = rng.uniform(s.radius, S - s.radius);
        s.x = rng.uniform(s.radius, S - s.radius);
        double speed = rng.uniform(70.0, 140.0);
        double angle = rng.uniform(0.0, 2.0 * M_PI);
        s.vy = speed * std::sin(angle);
        s.vx = speed * std::cos(angle);
    }

    for (int t = 0; t < duration; ++t) {
        Image frame(S, S);
        const float* ca = palette[rng.uniform_int(0, 4)];
        const float* cb = palette[rng.uniform_int(0, 4)];
        double period = rng.uniform(48.0, 160.0);
        double phase = rng.uniform();
        bool horizontal = rng.bernoulli(0.5);
        for (int y = 0; y < S; ++y) {
            float* row = frame.row(y);
            for (int x = 0; x < S; ++x) {
                double a = (horizontal ? x : y) / period + phase;
                a -= std::floor(a);
                float wv = static_cast<float>(a < 0.5 ? 2 * a : 2 * (1 - a));  // triangle wave
                for (int c = 0; c < 3; ++c) row[x * 3 + c] = ca[c] * (1 - wv) + cb[c] * wv;
            }
        }
        int corner = (motif_corner0 + t) % 4;
        stamp_motif(frame, motif_id, mpos[corner][0], mpos[corner][1], motif_size);
        for (auto& s : shapes) draw_shape(frame, s);
        // Per-frame confetti decorrelates adjacent frames.
        for (int i = 0; i < 8; ++i) {
            double cr = rng.uniform(5.0, 10.0);
            fill_disc(frame, rng.uniform(cr, S - cr), rng.uniform(cr, S - cr), cr,
                      static_cast<float>(rng.uniform()), static_cast<float>(rng.uniform()),
                      static_cast<float>(rng.uniform()));
        }
        int code_y = static_cast<int>(rng.uniform_int(0, S - code_h));
        int code_x = static_cast<int>(rng.uniform_int(0, S - code_w));
        draw_text(frame, code, code_y, code_x, 4, code_color[0], code_color[1], code_color[2]);
        out.frames.push_back(std::move(frame));
        for (auto& s : shapes) {
            bounce(s.y, s.vy, s.radius, S - s.radius);
            bounce(s.x, s.vx, s.radius, S - s.radius);
        }
    }
    return out;
}

}  // namespace detail

// Deterministic procedural corpus: per-video palette, moving shapes, and an
// identity code, plus a motif stamp shared across videos with the same motif
// id so that negatives are not trivially dissimilar.
inline std::vector<FrameSequence> generate_synthetic_corpus(const CorpusSpec& spec) {
    validate(spec);
    Rng master(spec.seed);
    std::vector<FrameSequence> out;
    out.reserve(static_cast<size_t>(spec.num_videos));
    for (int v = 0; v < spec.num_videos; ++v) {
        Rng vid_rng = master.fork();
        int duration = static_cast<int>(vid_rng.uniform_int(spec.duration_min, spec.duration_max));
        int motif_id = static_cast<int>(vid_rng.uniform_int(0, spec.motif_count - 1));
        char id[16];
        std::snprintf(id, sizeof(id), "v%04d", v);
        out.push_back(detail::render_video(id, duration, motif_id, std::move(vid_rng)));
    }
    return out;
}

}  // namespace s2vs
