#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/image.hpp"
#include "s2vs/video.hpp"

namespace s2vs {

// All knobs use the training-recipe names; serialized 1:1 in run configs.
struct AugmentConfig {
    int clip_len = 32;        // T_B
    int raug_ops = 2;         // N_RAug
    int raug_magnitude = 9;   // M_RAug, of 30
    double p_overlay = 0.3;   // text and emoji, each
    double p_blur = 0.5;
    double p_tsd = 0.5;
    double p_ff = 0.1;
    double p_sm = 0.1;
    double p_rev = 0.1;
    double p_pau = 0.1;
    double p_shuf = 0.5;
    double p_drop = 0.3;
    double p_cont = 0.5;
    double p_viv = 0.3;
    double viv_lambda_min = 0.3;
    double viv_lambda_max = 0.7;
};

inline void validate(const AugmentConfig& c) {
    auto prob = [](double p, const char* name) {
        if (p < 0.0 || p > 1.0) throw ConfigError(std::string(name) + " must be in [0,1]");
    };
    prob(c.p_overlay, "p_overlay");
    prob(c.p_blur, "p_blur");
    prob(c.p_tsd, "p_tsd");
    prob(c.p_ff, "p_ff");
    prob(c.p_sm, "p_sm");
    prob(c.p_rev, "p_rev");
    prob(c.p_pau, "p_pau");
    prob(c.p_shuf, "p_shuf");
    prob(c.p_drop, "p_drop");
    prob(c.p_cont, "p_cont");
    prob(c.p_viv, "p_viv");
    if (c.p_tsd + c.p_ff + c.p_sm + c.p_rev + c.p_pau > 1.0 + 1e-12)
        throw ConfigError("temporal transform probabilities must sum to <= 1");
    if (c.clip_len < 8 || c.clip_len % 4 != 0)
        throw ConfigError("T_B must be >= 8 and divisible by 4");
    if (c.raug_ops < 0) throw ConfigError("N_RAug must be >= 0");
    if (c.raug_magnitude < 0 || c.raug_magnitude > 30) throw ConfigError("M_RAug must be in [0,30]");
    if (!(c.viv_lambda_min > 0.0 && c.viv_lambda_min <= c.viv_lambda_max && c.viv_lambda_max < 1.0))
        throw ConfigError("lambda_viv range must satisfy 0 < min <= max < 1");
}

constexpr int kClipSize = 224;  // H_B = W_B

struct AugmentedClip {
    std::vector<Image> frames;        // clip_len frames, 224x224
    std::vector<std::string> origins; // sorted unique source ids
};

struct BatchLabeling {
    int b = 0;
    std::vector<std::vector<int>> positives;  // p(i), sorted
    std::vector<std::vector<int>> negatives;  // n(i), sorted
};

// j in p(i) iff the origin sets of rows i and j intersect (and j != i).
inline BatchLabeling make_labeling(const std::vector<std::vector<std::string>>& origins) {
    BatchLabeling l;
    l.b = static_cast<int>(origins.size());
    l.positives.resize(origins.size());
    l.negatives.resize(origins.size());
    auto intersects = [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        // Both sorted.
        size_t i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            int c = a[i].compare(b[j]);
            if (c == 0) return true;
            if (c < 0) ++i;
            else ++j;
        }
        return false;
    };
    for (int i = 0; i < l.b; ++i)
        for (int j = 0; j < l.b; ++j) {
            if (i == j) continue;
            if (intersects(origins[static_cast<size_t>(i)], origins[static_cast<size_t>(j)]))
                l.positives[static_cast<size_t>(i)].push_back(j);
            else
                l.negatives[static_cast<size_t>(i)].push_back(j);
        }
    return l;
}

inline BatchLabeling make_labeling(const std::vector<AugmentedClip>& batch) {
    std::vector<std::vector<std::string>> origins;
    origins.reserve(batch.size());
    for (const auto& clip : batch) origins.push_back(clip.origins);
    return make_labeling(origins);
}

inline void validate(const BatchLabeling& l) {
    if (static_cast<int>(l.positives.size()) != l.b || static_cast<int>(l.negatives.size()) != l.b)
        throw ConsistencyError("labeling: row count mismatch");
    for (int i = 0; i < l.b; ++i) {
        std::vector<char> seen(static_cast<size_t>(l.b), 0);
        seen[static_cast<size_t>(i)] = 1;
        for (int j : l.positives[static_cast<size_t>(i)]) {
            if (j == i) throw ConsistencyError("labeling: i in p(i)");
            if (seen[static_cast<size_t>(j)]) throw ConsistencyError("labeling: duplicate index");
            seen[static_cast<size_t>(j)] = 2;
        }
        for (int j : l.negatives[static_cast<size_t>(i)]) {
            if (seen[static_cast<size_t>(j)]) throw ConsistencyError("labeling: p(i) and n(i) overlap");
            seen[static_cast<size_t>(j)] = 3;
        }
        for (char s : seen)
            if (s == 0) throw ConsistencyError("labeling: p(i) u n(i) u {i} does not cover the batch");
    }
    for (int i = 0; i < l.b; ++i)
        for (int j : l.positives[static_cast<size_t>(i)]) {
            const auto& pj = l.positives[static_cast<size_t>(j)];
            if (!std::binary_search(pj.begin(), pj.end(), i))
                throw ConsistencyError("labeling: positive relation not symmetric");
        }
}

// ---------------------------------------------------------------------------
// Weak augmentation: temporal crop to T_B, one random resized crop and one
// flip decision shared by all frames.
//
// Draw order (fixed contract for replay): temporal-crop start; resized-crop
// rect (area, log-ratio, x, y per attempt); flip.
// ---------------------------------------------------------------------------
namespace detail {

struct CropRect {
    int y = 0, x = 0, h = 0, w = 0;
};

// torchvision-style sampling: up to 10 attempts over area scale [0.3, 1.0]
// and aspect ratio [3/4, 4/3], then a center-crop fallback.
inline CropRect sample_resized_crop(int h, int w, Rng& rng) {
    const double area = static_cast<double>(h) * w;
    for (int attempt = 0; attempt < 10; ++attempt) {
        double target = area * rng.uniform(0.3, 1.0);
        double logr = rng.uniform(std::log(3.0 / 4.0), std::log(4.0 / 3.0));
        double ratio = std::exp(logr);
        int cw = static_cast<int>(std::lround(std::sqrt(target * ratio)));
        int ch = static_cast<int>(std::lround(std::sqrt(target / ratio)));
        if (cw >= 1 && ch >= 1 && cw <= w && ch <= h) {
            CropRect r;
            r.x = static_cast<int>(rng.uniform_int(0, w - cw));
            r.y = static_cast<int>(rng.uniform_int(0, h - ch));
            r.w = cw;
            r.h = ch;
            return r;
        }
    }
    int side = std::min(h, w);
    return {(h - side) / 2, (w - side) / 2, side, side};
}

// Temporal window of exactly len frames (cyclic when the source is shorter).
inline std::vector<const Image*> temporal_window(const std::vector<Image>& frames, int len, Rng& rng) {
    int t = static_cast<int>(frames.size());
    std::vector<const Image*> out(static_cast<size_t>(len));
    if (t >= len) {
        int start = static_cast<int>(rng.uniform_int(0, t - len));
        for (int i = 0; i < len; ++i) out[static_cast<size_t>(i)] = &frames[static_cast<size_t>(start + i)];
    } else {
        int start = static_cast<int>(rng.uniform_int(0, t - 1));
        for (int i = 0; i < len; ++i)
            out[static_cast<size_t>(i)] = &frames[static_cast<size_t>((start + i) % t)];
    }
    return out;
}

}  // namespace detail

inline AugmentedClip weak_augment(const FrameSequence& clip2t, const AugmentConfig& cfg, Rng& rng) {
    validate(cfg);
    if (clip2t.frames.empty()) throw EmptyVideoError("weak_augment: empty clip");
    auto window = detail::temporal_window(clip2t.frames, cfg.clip_len, rng);
    detail::CropRect rect = detail::sample_resized_crop(clip2t.frames[0].h, clip2t.frames[0].w, rng);
    bool flip = rng.bernoulli(0.5);

    AugmentedClip out;
    out.origins = {clip2t.source_id};
    out.frames.reserve(static_cast<size_t>(cfg.clip_len));
    for (const Image* f : window) {
        Image cropped = crop(*f, rect.y, rect.x, rect.h, rect.w);
        Image resized = resize_bilinear(cropped, kClipSize, kClipSize);
        out.frames.push_back(flip ? hflip(resized) : std::move(resized));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Global transform: N_RAug ops drawn with replacement from the standard
// 14-op pool minus the blur-type op (Sharpness), applied identically to all
// frames. Magnitude fraction = M_RAug/30 of each op's conventional maximum.
// ---------------------------------------------------------------------------
namespace detail {

enum class RaugOp {
    Identity,
    AutoContrast,
    Equalize,
    Rotate,
    Solarize,
    Color,
    Posterize,
    Contrast,
    Brightness,
    ShearX,
    ShearY,
    TranslateX,
    TranslateY,
};
constexpr int kRaugOpCount = 13;

struct RaugChoice {
    RaugOp op;
    double sign = 1.0;  // only meaningful for signed ops
};

inline bool raug_signed(RaugOp op) {
    switch (op) {
        case RaugOp::Rotate:
        case RaugOp::Color:
        case RaugOp::Contrast:
        case RaugOp::Brightness:
        case RaugOp::ShearX:
        case RaugOp::ShearY:
        case RaugOp::TranslateX:
        case RaugOp::TranslateY:
            return true;
        default:
            return false;
    }
}

inline void apply_raug(Image& im, const RaugChoice& c, double frac) {
    const double cy = (im.h - 1) / 2.0, cx = (im.w - 1) / 2.0;
    switch (c.op) {
        case RaugOp::Identity:
            break;
        case RaugOp::AutoContrast:
            autocontrast(im);
            break;
        case RaugOp::Equalize:
            equalize(im);
            break;
        case RaugOp::Rotate: {
            double th = c.sign * frac * (30.0 * M_PI / 180.0);
            double ct = std::cos(th), st = std::sin(th);
            // Inverse rotation about the center.
            im = affine_inverse(im, {ct, st, cx - ct * cx - st * cy, -st, ct, cy + st * cx - ct * cy});
            break;
        }
        case RaugOp::Solarize:
            solarize(im, static_cast<float>(1.0 - frac));
            break;
        case RaugOp::Color:
            adjust_color(im, static_cast<float>(1.0 + c.sign * 0.9 * frac));
            break;
        case RaugOp::Posterize:
            posterize(im, 8 - static_cast<int>(std::lround(4.0 * frac)));
            break;
        case RaugOp::Contrast:
            adjust_contrast(im, static_cast<float>(1.0 + c.sign * 0.9 * frac));
            break;
        case RaugOp::Brightness:
            adjust_brightness(im, static_cast<float>(1.0 + c.sign * 0.9 * frac));
            break;
        case RaugOp::ShearX: {
            double s = c.sign * 0.3 * frac;
            im = affine_inverse(im, {1, -s, s * cy, 0, 1, 0});
            break;
        }
        case RaugOp::ShearY: {
            double s = c.sign * 0.3 * frac;
            im = affine_inverse(im, {1, 0, 0, -s, 1, s * cx});
            break;
        }
        case RaugOp::TranslateX: {
            double t = c.sign * 0.45 * frac * im.w;
            im = affine_inverse(im, {1, 0, -t, 0, 1, 0});
            break;
        }
        case RaugOp::TranslateY: {
            double t = c.sign * 0.45 * frac * im.h;
            im = affine_inverse(im, {1, 0, 0, 0, 1, -t});
            break;
        }
    }
    clamp_pixels(im);
}

}  // namespace detail

inline void global_transform(std::vector<Image>& frames, const AugmentConfig& cfg, Rng& rng) {
    if (cfg.raug_ops == 0) return;
    std::vector<detail::RaugChoice> choices;
    choices.reserve(static_cast<size_t>(cfg.raug_ops));
    for (int i = 0; i < cfg.raug_ops; ++i) {
        detail::RaugChoice c;
        c.op = static_cast<detail::RaugOp>(rng.uniform_int(0, detail::kRaugOpCount - 1));
        if (detail::raug_signed(c.op)) c.sign = rng.bernoulli(0.5) ? 1.0 : -1.0;
        choices.push_back(c);
    }
    const double frac = cfg.raug_magnitude / 30.0;
    for (auto& f : frames)
        for (const auto& c : choices) detail::apply_raug(f, c, frac);
}

// ---------------------------------------------------------------------------
// Frame transform: per frame, text overlay w.p. p_overlay, emoji overlay w.p.
// p_overlay, Gaussian blur w.p. p_blur (sigma ~ U[0.5, 2.0]), in that order.
// Overlays are opaque and fully inside the frame.
// ---------------------------------------------------------------------------
namespace detail {

inline void draw_emoji(Image& im, int kind, int y, int x, int size) {
    const double s = size;
    const double cy = y + s / 2.0, cx = x + s / 2.0;
    switch (kind % 4) {
        case 0: {  // smiley
            fill_disc(im, cy, cx, s / 2, 0.98f, 0.85f, 0.1f);
            fill_disc(im, y + s * 0.35, x + s * 0.32, s * 0.07, 0.05f, 0.05f, 0.05f);
            fill_disc(im, y + s * 0.35, x + s * 0.68, s * 0.07, 0.05f, 0.05f, 0.05f);
            fill_rect(im, static_cast<int>(y + s * 0.62), static_cast<int>(x + s * 0.3),
                      std::max(1, static_cast<int>(s * 0.1)), static_cast<int>(s * 0.4), 0.05f, 0.05f,
                      0.05f);
            break;
        }
        case 1: {  // heart
            fill_disc(im, y + s * 0.32, x + s * 0.3, s * 0.22, 0.9f, 0.1f, 0.15f);
            fill_disc(im, y + s * 0.32, x + s * 0.7, s * 0.22, 0.9f, 0.1f, 0.15f);
            fill_polygon(im,
                         {{x + s * 0.08, y + s * 0.4}, {x + s * 0.92, y + s * 0.4}, {cx, y + s * 0.95}},
                         0.9f, 0.1f, 0.15f);
            break;
        }
        case 2: {  // five-point star
            std::vector<std::pair<double, double>> poly;
            for (int i = 0; i < 10; ++i) {
                double r = (i % 2 == 0) ? s / 2 : s / 5;
                double a = -M_PI / 2 + i * M_PI / 5;
                poly.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
            }
            fill_polygon(im, poly, 1.0f, 0.75f, 0.05f);
            break;
        }
        default: {  // diamond
            fill_polygon(im, {{cx, static_cast<double>(y)}, {x + s, cy}, {cx, y + s}, {static_cast<double>(x), cy}},
                         0.15f, 0.5f, 0.95f);
            break;
        }
    }
}

inline void overlay_text(Image& im, Rng& rng) {
    static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";
    int len = static_cast<int>(rng.uniform_int(3, 8));
    std::string text;
    for (int i = 0; i < len; ++i) text.push_back(alphabet[rng.uniform_int(0, 35)]);
    int max_scale = std::min((im.w - 2) / (6 * len), (im.h - 2) / 7);
    max_scale = std::clamp(max_scale, 1, 5);
    int scale = static_cast<int>(rng.uniform_int(1, max_scale));
    float r = static_cast<float>(rng.uniform()), g = static_cast<float>(rng.uniform()),
          b = static_cast<float>(rng.uniform());
    int tw = text_width(text, scale), th = text_height(scale);
    int x = static_cast<int>(rng.uniform_int(0, std::max(0, im.w - tw)));
    int y = static_cast<int>(rng.uniform_int(0, std::max(0, im.h - th)));
    draw_text(im, text, y, x, scale, r, g, b);
}

inline void overlay_emoji(Image& im, Rng& rng) {
    int kind = static_cast<int>(rng.uniform_int(0, 3));
    int size = static_cast<int>(rng.uniform_int(24, std::max(24, std::min(im.h, im.w) / 3)));
    int x = static_cast<int>(rng.uniform_int(0, std::max(0, im.w - size)));
    int y = static_cast<int>(rng.uniform_int(0, std::max(0, im.h - size)));
    draw_emoji(im, kind, y, x, size);
}

}  // namespace detail

inline void frame_transform(std::vector<Image>& frames, const AugmentConfig& cfg, Rng& rng) {
    for (auto& f : frames) {
        if (rng.bernoulli(cfg.p_overlay)) detail::overlay_text(f, rng);
        if (rng.bernoulli(cfg.p_overlay)) detail::overlay_emoji(f, rng);
        if (rng.bernoulli(cfg.p_blur)) gaussian_blur(f, rng.uniform(0.5, 2.0));
    }
}

// ---------------------------------------------------------------------------
// Temporal transforms. Each is a pure index-level op; temporal_transform
// picks one by the categorical (p_tsd, p_ff, p_sm, p_rev, p_pau, remainder =
// identity) and re-crops/tiles the result to exactly T_B frames (truncation
// keeps the head; shorter results tile cyclically).
// ---------------------------------------------------------------------------
namespace detail {

inline std::vector<Image> recrop_to(std::vector<Image> frames, int len) {
    if (static_cast<int>(frames.size()) >= len) {
        frames.resize(static_cast<size_t>(len));
        return frames;
    }
    std::vector<Image> out;
    out.reserve(static_cast<size_t>(len));
    if (frames.empty()) {
        return out;  // caller handles the empty fallback
    }
    const int n = static_cast<int>(frames.size());
    for (int i = 0; i < len; ++i) {
        Image& f = frames[static_cast<size_t>(i % n)];
        if (i + n >= len)
            out.push_back(std::move(f));  // last cyclic read of this slot
        else
            out.push_back(f);
    }
    return out;
}

}  // namespace detail

inline std::vector<Image> fast_forward(std::vector<Image> frames) {
    std::vector<Image> out;
    out.reserve((frames.size() + 1) / 2);
    for (size_t i = 0; i < frames.size(); i += 2) out.push_back(std::move(frames[i]));
    return out;
}

inline std::vector<Image> slow_motion(std::vector<Image> frames) {
    std::vector<Image> out;
    out.reserve(frames.size() * 2);
    for (auto& f : frames) {
        out.push_back(f);
        out.push_back(std::move(f));
    }
    return out;
}

inline std::vector<Image> reverse_play(std::vector<Image> frames) {
    std::reverse(frames.begin(), frames.end());
    return frames;
}

// Frame `index` appears `k` times in total.
inline std::vector<Image> frame_pause(std::vector<Image> frames, int index, int k) {
    std::vector<Image> out;
    out.reserve(frames.size() + static_cast<size_t>(k) - 1);
    for (size_t i = 0; i < frames.size(); ++i) {
        if (static_cast<int>(i) == index)
            for (int j = 1; j < k; ++j) out.push_back(frames[i]);
        out.push_back(std::move(frames[i]));
    }
    return out;
}

// Temporal Shuffle-Dropout trace: enough to audit the local-order property.
struct TsdTrace {
    int seg_len = 0;
    std::vector<int> order;            // clip processing order after shuffle
    std::vector<int> status;           // per clip: 0 kept, 1 zeros, 2 noise, 3 discarded
    std::vector<int> pre_tile_source;  // source frame index per pre-tiling frame; -1 replaced
};

// Split into consecutive clips of one sampled length (last may be shorter);
// optionally permute clip order; drop clips (content-replace keeping length,
// or discard); tile/crop back to T_B. If everything is discarded the result
// is T_B empty (all-zero) frames.
inline std::vector<Image> tsd(std::vector<Image> frames, const AugmentConfig& cfg, Rng& rng,
                              TsdTrace* trace = nullptr) {
    const int t = static_cast<int>(frames.size());
    const int lmax = std::max(4, cfg.clip_len / 2);
    const int seg_len = static_cast<int>(rng.uniform_int(4, lmax));

    std::vector<std::pair<int, int>> clips;  // (start, len)
    for (int s = 0; s < t; s += seg_len) clips.emplace_back(s, std::min(seg_len, t - s));

    std::vector<int> order(clips.size());
    std::iota(order.begin(), order.end(), 0);
    if (rng.bernoulli(cfg.p_shuf)) rng.shuffle(order);

    std::vector<int> status(clips.size(), 0);
    std::vector<Image> out;
    std::vector<int> source;
    const int h = frames.empty() ? kClipSize : frames[0].h;
    const int w = frames.empty() ? kClipSize : frames[0].w;
    for (int ci : order) {
        auto [start, len] = clips[static_cast<size_t>(ci)];
        if (rng.bernoulli(cfg.p_drop)) {
            if (rng.bernoulli(cfg.p_cont)) {
                bool noise = rng.bernoulli(0.5);
                status[static_cast<size_t>(ci)] = noise ? 2 : 1;
                for (int i = 0; i < len; ++i) {
                    Image f(h, w);
                    if (noise)
                        for (float& v : f.px)
                            v = clamp01(static_cast<float>(0.5 + 0.25 * rng.gaussian()));
                    out.push_back(std::move(f));
                    source.push_back(-1);
                }
            } else {
                status[static_cast<size_t>(ci)] = 3;
            }
        } else {
            for (int i = 0; i < len; ++i) {
                // Clips partition the index range, so each source frame is
                // consumed at most once and can be moved out.
                out.push_back(std::move(frames[static_cast<size_t>(start + i)]));
                source.push_back(start + i);
            }
        }
    }

    if (trace) {
        trace->seg_len = seg_len;
        trace->order = order;
        trace->status = status;
        trace->pre_tile_source = source;
    }

    if (out.empty()) return std::vector<Image>(static_cast<size_t>(cfg.clip_len), Image(h, w));
    return detail::recrop_to(std::move(out), cfg.clip_len);
}

inline std::vector<Image> temporal_transform(std::vector<Image> frames, const AugmentConfig& cfg,
                                             Rng& rng) {
    if (static_cast<int>(frames.size()) < cfg.clip_len)
        throw DimensionError("temporal_transform: input shorter than T_B");
    const double mass = cfg.p_tsd + cfg.p_ff + cfg.p_sm + cfg.p_rev + cfg.p_pau;
    std::vector<Image> result;
    if (mass <= 0.0) {
        result = std::move(frames);
    } else {
        double u = rng.uniform();
        if (u < cfg.p_tsd) {
            result = tsd(std::move(frames), cfg, rng);
        } else if (u < cfg.p_tsd + cfg.p_ff) {
            result = fast_forward(std::move(frames));
        } else if (u < cfg.p_tsd + cfg.p_ff + cfg.p_sm) {
            result = slow_motion(std::move(frames));
        } else if (u < cfg.p_tsd + cfg.p_ff + cfg.p_sm + cfg.p_rev) {
            result = reverse_play(std::move(frames));
        } else if (u < mass) {
            int index = static_cast<int>(rng.uniform_int(0, static_cast<int>(frames.size()) - 1));
            int kmax = std::max(2, cfg.clip_len / 4);
            int k = static_cast<int>(rng.uniform_int(2, kmax));
            result = frame_pause(std::move(frames), index, k);
        } else {
            result = std::move(frames);
        }
    }
    return detail::recrop_to(std::move(result), cfg.clip_len);
}

// ---------------------------------------------------------------------------
// Strong augmentation: weak -> global -> frame -> temporal. Video-in-video is
// applied afterwards at batch level. With all probabilities 0 and N_RAug = 0
// this consumes exactly the weak draw sequence and returns the weak output.
// ---------------------------------------------------------------------------
inline AugmentedClip strong_augment(const FrameSequence& clip2t, const AugmentConfig& cfg, Rng& rng) {
    AugmentedClip clip = weak_augment(clip2t, cfg, rng);
    global_transform(clip.frames, cfg, rng);
    frame_transform(clip.frames, cfg, rng);
    clip.frames = temporal_transform(std::move(clip.frames), cfg, rng);
    return clip;
}

// ---------------------------------------------------------------------------
// Video-in-video over the strong rows of a batch: each strong clip is chosen
// as donor with prob p_viv; the donor, scaled by lambda, is pasted at one
// random location (fixed across frames) into a distinct random host's
// content, and the mixed result replaces the donor row. origin_ids become
// host u donor; the labeling is recomputed from the intersection rule.
//
// All donors and hosts read the batch content as it was BEFORE this pass
// (every mix lane sees the original rows, as in a batch-level mixup), so a
// mixed row unions exactly two pre-pass origin sets. Mixing never chains:
// with >= 3 distinct origins in the batch every row keeps at least one
// negative, which the hard-negative loss requires.
// Fewer than 2 strong rows: documented no-op.
// ---------------------------------------------------------------------------
inline void video_in_video(std::vector<AugmentedClip>& batch, BatchLabeling& labeling,
                           std::span<const int> strong_rows, const AugmentConfig& cfg, Rng& rng) {
    if (strong_rows.size() >= 2 && cfg.p_viv > 0.0) {
        // Pre-pass content of rows already overwritten as donors. Hosts are
        // never modified, and each row is a donor at most once, so only
        // replaced rows ever need saving.
        std::map<int, AugmentedClip> saved;
        auto original = [&](int row) -> const AugmentedClip& {
            auto it = saved.find(row);
            return it != saved.end() ? it->second : batch[static_cast<size_t>(row)];
        };

        for (size_t si = 0; si < strong_rows.size(); ++si) {
            if (!rng.bernoulli(cfg.p_viv)) continue;
            int donor = strong_rows[si];
            size_t hj = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(strong_rows.size()) - 2));
            if (hj >= si) ++hj;
            int host = strong_rows[hj];

            double lambda = rng.uniform(cfg.viv_lambda_min, cfg.viv_lambda_max);
            int inset = std::max(1, static_cast<int>(std::lround(kClipSize * lambda)));
            int px = static_cast<int>(rng.uniform_int(0, kClipSize - inset));
            int py = static_cast<int>(rng.uniform_int(0, kClipSize - inset));

            const AugmentedClip& d = original(donor);
            const AugmentedClip& h = original(host);
            AugmentedClip mixed;
            mixed.frames.reserve(d.frames.size());
            for (size_t t = 0; t < d.frames.size(); ++t) {
                Image frame = h.frames[t];
                Image small = resize_bilinear(d.frames[t], inset, inset);
                for (int y = 0; y < inset; ++y)
                    std::copy_n(small.row(y), static_cast<size_t>(inset) * 3,
                                frame.row(py + y) + static_cast<size_t>(px) * 3);
                mixed.frames.push_back(std::move(frame));
            }
            std::set_union(d.origins.begin(), d.origins.end(), h.origins.begin(), h.origins.end(),
                           std::back_inserter(mixed.origins));
            saved.emplace(donor, std::move(batch[static_cast<size_t>(donor)]));
            batch[static_cast<size_t>(donor)] = std::move(mixed);
        }
    }
    labeling = make_labeling(batch);
}

}  // namespace s2vs
