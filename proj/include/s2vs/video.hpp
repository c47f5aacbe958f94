#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/image.hpp"

namespace s2vs {

// Frames sampled at 1 fps, all the same size, H and W >= 32, pixels in [0,1].
struct FrameSequence {
    std::string source_id;
    std::vector<Image> frames;

    int duration_seconds() const { return static_cast<int>(frames.size()); }
};

inline void validate(const FrameSequence& fs) {
    if (fs.frames.empty()) throw EmptyVideoError("video '" + fs.source_id + "' has no frames");
    int h = fs.frames[0].h, w = fs.frames[0].w;
    if (h < 32 || w < 32)
        throw DimensionError("video '" + fs.source_id + "' frames smaller than 32 pixels");
    for (const auto& f : fs.frames)
        if (f.h != h || f.w != w)
            throw FormatError("video '" + fs.source_id + "' has frames of differing sizes");
}

namespace detail {

inline Image resize_short_side(const Image& im, int target) {
    if (std::min(im.h, im.w) == target) return im;
    double scale = static_cast<double>(target) / std::min(im.h, im.w);
    int oh = std::max(target, static_cast<int>(std::lround(im.h * scale)));
    int ow = std::max(target, static_cast<int>(std::lround(im.w * scale)));
    if (im.h <= im.w)
        oh = target;
    else
        ow = target;
    return resize_bilinear(im, oh, ow);
}

}  // namespace detail

// Loads one video stored as a directory of numbered .ppm frames. An optional
// `fps.txt` gives the stored frame rate; frames are then subsampled to 1 fps
// (every fps-th frame, starting at 0). The short side is resized to 256.
inline FrameSequence load_video(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IngestError("not a video directory: " + dir.string());

    std::vector<fs::path> frame_paths;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".ppm") frame_paths.push_back(e.path());
    if (frame_paths.empty()) throw IngestError("no .ppm frames in: " + dir.string());
    std::sort(frame_paths.begin(), frame_paths.end());

    int fps = 1;
    if (std::ifstream meta(dir / "fps.txt"); meta) {
        if (!(meta >> fps) || fps < 1) throw FormatError("malformed fps.txt in: " + dir.string());
    }

    FrameSequence out;
    out.source_id = dir.filename().string();
    for (size_t i = 0; i < frame_paths.size(); i += static_cast<size_t>(fps))
        out.frames.push_back(detail::resize_short_side(read_ppm(frame_paths[i]), 256));
    if (out.frames.empty()) throw EmptyVideoError("no frames after sampling: " + dir.string());
    validate(out);
    return out;
}

// Corpus directory layout: `manifest.tsv` with "<id>\t<frames>\t<fps>" lines
// plus one subdirectory of numbered frames per video.
inline void write_corpus(const std::filesystem::path& dir, const std::vector<FrameSequence>& videos) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.tsv");
    if (!manifest) throw IngestError("cannot write manifest in: " + dir.string());
    for (const auto& v : videos) {
        validate(v);
        fs::path vdir = dir / v.source_id;
        fs::create_directories(vdir);
        for (size_t i = 0; i < v.frames.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "%06zu.ppm", i);
            write_ppm(vdir / name, v.frames[i]);
        }
        manifest << v.source_id << '\t' << v.frames.size() << '\t' << 1 << '\n';
    }
}

inline std::vector<FrameSequence> load_corpus(const std::filesystem::path& dir) {
    std::ifstream manifest(dir / "manifest.tsv");
    if (!manifest) throw IngestError("missing manifest.tsv in: " + dir.string());
    std::vector<FrameSequence> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(manifest, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string id;
        long nframes = 0, fps = 0;
        if (!(is >> id >> nframes >> fps) || nframes < 1 || fps < 1)
            throw FormatError("malformed manifest line " + std::to_string(lineno) + " in: " + dir.string());
        FrameSequence v = load_video(dir / id);
        if (static_cast<long>(v.frames.size()) * fps < nframes)
            throw FormatError("manifest frame count mismatch for '" + id + "'");
        out.push_back(std::move(v));
    }
    if (out.empty()) throw EmptyInputError("corpus manifest lists no videos: " + dir.string());
    return out;
}

// Uniform-start contiguous window of `len` frames; shorter videos are tiled
// cyclically first, so the result always has exactly `len` frames.
inline FrameSequence sample_training_clip(const FrameSequence& fs, int len, Rng& rng) {
    if (len < 1) throw ConfigError("sample_training_clip: len must be positive");
    if (fs.frames.empty()) throw EmptyVideoError("sample_training_clip: empty video");
    int t = static_cast<int>(fs.frames.size());
    FrameSequence out;
    out.source_id = fs.source_id;
    out.frames.reserve(static_cast<size_t>(len));
    if (t >= len) {
        int start = static_cast<int>(rng.uniform_int(0, t - len));
        for (int i = 0; i < len; ++i) out.frames.push_back(fs.frames[static_cast<size_t>(start + i)]);
    } else {
        int start = static_cast<int>(rng.uniform_int(0, t - 1));
        for (int i = 0; i < len; ++i)
            out.frames.push_back(fs.frames[static_cast<size_t>((start + i) % t)]);
    }
    return out;
}

}  // namespace s2vs
