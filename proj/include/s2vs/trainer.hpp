#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "s2vs/augment.hpp"
#include "s2vs/backbone.hpp"
#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/losses.hpp"
#include "s2vs/model.hpp"
#include "s2vs/video.hpp"

namespace s2vs {

struct TrainConfig {
    int64_t iterations = 30000;
    int batch_videos = 32;  // N; batch size B = 2N
    double lr = 5e-5;
    double weight_decay = 0.01;
    int64_t warmup_iters = 1000;
    uint64_t seed = 1;
    int64_t checkpoint_interval = 0;  // 0: final checkpoint only
    int whitening_samples = 4096;     // region vectors used to fit the whitening
    double whitening_eps = 1e-6;
    LossConfig loss;
    AugmentConfig aug;
};

inline void validate(const TrainConfig& c) {
    // iterations == 0 is allowed (checkpoint equals initialization).
    if (c.iterations < 0 || c.warmup_iters < 0) throw ConfigError("iteration counts must be >= 0");
    if (c.iterations > 0 && c.iterations <= c.warmup_iters)
        throw ConfigError("iterations must exceed warmup_iters");
    if (c.batch_videos < 2) throw ConfigError("batch_videos must be >= 2");
    if (!(c.lr > 0.0)) throw ConfigError("lr must be > 0");
    if (c.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    if (c.checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
    if (c.whitening_samples < 2) throw ConfigError("whitening_samples must be >= 2");
    if (!(c.whitening_eps >= 0.0)) throw ConfigError("whitening_eps must be >= 0");
    validate(c.loss);
    validate(c.aug);
}

// Full-scale recipe: 30K iterations, B=64, T_B=32, lr 5e-5.
inline TrainConfig paper_train_config() { return {}; }

// Desk-scale recipe sized for a single core: B=8, T_B=8, 2K iterations.
inline TrainConfig desk_train_config() {
    TrainConfig c;
    c.iterations = 2000;
    c.warmup_iters = 100;
    c.batch_videos = 4;
    c.lr = 1e-3;
    c.aug.clip_len = 8;
    return c;
}

// ---------------------------------------------------------------------------
// Batch construction: N distinct videos, one weak view at row 2k and one
// strong view at row 2k+1, then the video-in-video pass over the strong rows.
// ---------------------------------------------------------------------------
struct TrainingBatch {
    std::vector<AugmentedClip> clips;  // size B = 2N
    BatchLabeling labeling;
};

inline TrainingBatch build_batch(const std::vector<FrameSequence>& corpus, const TrainConfig& cfg,
                                 Rng& rng) {
    const int n = cfg.batch_videos;
    if (static_cast<int>(corpus.size()) < n)
        throw InsufficientCorpusError("build_batch: corpus has " + std::to_string(corpus.size()) +
                                      " videos, need " + std::to_string(n));
    std::vector<int> order(corpus.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    TrainingBatch batch;
    batch.clips.reserve(static_cast<size_t>(2 * n));
    std::vector<int> strong_rows;
    strong_rows.reserve(static_cast<size_t>(n));
    for (int k = 0; k < n; ++k) {
        const FrameSequence& video = corpus[static_cast<size_t>(order[static_cast<size_t>(k)])];
        FrameSequence clip2t = sample_training_clip(video, 2 * cfg.aug.clip_len, rng);
        batch.clips.push_back(weak_augment(clip2t, cfg.aug, rng));
        batch.clips.push_back(strong_augment(clip2t, cfg.aug, rng));
        strong_rows.push_back(2 * k + 1);
    }
    video_in_video(batch.clips, batch.labeling, strong_rows, cfg.aug, rng);
    return batch;
}

// Linear warmup to the base rate, then cosine decay to zero.
inline double lr_at(int64_t step, const TrainConfig& cfg) {
    if (step < 0 || step > cfg.iterations) throw ConfigError("lr_at: step out of range");
    if (cfg.warmup_iters > 0 && step < cfg.warmup_iters)
        return cfg.lr * static_cast<double>(step) / static_cast<double>(cfg.warmup_iters);
    if (cfg.iterations == cfg.warmup_iters) return cfg.lr;
    double progress = static_cast<double>(step - cfg.warmup_iters) /
                      static_cast<double>(cfg.iterations - cfg.warmup_iters);
    return cfg.lr * 0.5 * (1.0 + std::cos(M_PI * progress));
}

// ---------------------------------------------------------------------------
// AdamW with decoupled weight decay, one moment pair per trained tensor.
// ---------------------------------------------------------------------------
struct OptimState {
    int64_t t = 0;
    Matrix mw1, vw1, mw2, vw2, mw3, vw3, mw4, vw4;
    Vector mb1, vb1, mb2, vb2, mb3, vb3, mb4, vb4;
    Vector mctx, vctx;

    void init_like(const TemporalCNN& n, const AttentionParams& a) {
        t = 0;
        auto zm = [](const Matrix& w) { return Matrix::Zero(w.rows(), w.cols()); };
        auto zv = [](const Vector& b) { return Vector::Zero(b.size()); };
        mw1 = zm(n.c1.w); vw1 = zm(n.c1.w);
        mw2 = zm(n.c2.w); vw2 = zm(n.c2.w);
        mw3 = zm(n.c3.w); vw3 = zm(n.c3.w);
        mw4 = zm(n.c4.w); vw4 = zm(n.c4.w);
        mb1 = zv(n.c1.bias); vb1 = zv(n.c1.bias);
        mb2 = zv(n.c2.bias); vb2 = zv(n.c2.bias);
        mb3 = zv(n.c3.bias); vb3 = zv(n.c3.bias);
        mb4 = zv(n.c4.bias); vb4 = zv(n.c4.bias);
        mctx = zv(a.context); vctx = zv(a.context);
    }
};

namespace detail {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

template <typename T>
inline void adamw_update(T& param, const T& grad, T& m, T& v, double lr, double wd, int64_t t) {
    m = kAdamBeta1 * m + (1.0 - kAdamBeta1) * grad;
    v = kAdamBeta2 * v + (1.0 - kAdamBeta2) * grad.cwiseProduct(grad);
    double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t));
    param.array() -= lr * ((m.array() / bc1) / ((v.array() / bc2).sqrt() + kAdamEps) +
                           wd * param.array());
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Initialization: whitening fitted on raw backbone region vectors sampled
// from the corpus, attention context on the unit sphere, fan-in uniform CNN.
// ---------------------------------------------------------------------------
inline SimilarityModel init_model(const Backbone& backbone,
                                  const std::vector<FrameSequence>& corpus, const TrainConfig& cfg,
                                  Rng& rng) {
    validate(cfg);
    if (corpus.empty()) throw EmptyInputError("init_model: empty corpus");

    std::vector<Vector> samples;
    samples.reserve(static_cast<size_t>(cfg.whitening_samples));
    for (size_t vi = 0; vi < corpus.size() && static_cast<int>(samples.size()) < cfg.whitening_samples;
         ++vi) {
        RegionFeatureMap f = backbone.extract(corpus[vi].frames);
        for (int t = 0; t < f.t && static_cast<int>(samples.size()) < cfg.whitening_samples; ++t)
            for (int r = 0; r < f.r && static_cast<int>(samples.size()) < cfg.whitening_samples; ++r)
                samples.push_back(Eigen::Map<const Vector>(f.region(t, r), f.d));
    }
    if (samples.size() < 2) throw EmptyInputError("init_model: not enough whitening samples");
    Matrix sm(static_cast<Eigen::Index>(samples.size()), samples[0].size());
    for (size_t i = 0; i < samples.size(); ++i) sm.row(static_cast<Eigen::Index>(i)) = samples[i];

    SimilarityModel model;
    model.backbone = backbone;
    model.whitening = fit_whitening(sm, cfg.whitening_eps);
    model.attention = init_attention(static_cast<int>(model.whitening.projection.cols()), rng);
    model.cnn = init_cnn(rng);
    validate(model);
    return model;
}

// ---------------------------------------------------------------------------
// One optimization step over a built batch: batched forward over all B x B
// pairs, loss on the rescaled similarity matrix, analytic backward into the
// CNN and the attention context. Returns the loss report; S and the labeling
// are exposed for diagnostics.
// ---------------------------------------------------------------------------
struct StepDiagnostics {
    LossReport report;
    Matrix s;  // B x B rescaled similarities (soft, no clamp)
};

namespace detail {

inline std::string dump_batch_state(const Matrix& s, const BatchLabeling& l) {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "S (" << s.rows() << "x" << s.cols() << "):\n";
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        for (Eigen::Index j = 0; j < s.cols(); ++j) os << (j ? "," : "") << s(i, j);
        os << "\n";
    }
    os << "positives:\n";
    for (int i = 0; i < l.b; ++i) {
        os << i << ":";
        for (int j : l.positives[static_cast<size_t>(i)]) os << " " << j;
        os << "\n";
    }
    return os.str();
}

}  // namespace detail

inline StepDiagnostics train_step(SimilarityModel& model, OptimState& opt,
                                  const TrainingBatch& batch, const TrainConfig& cfg, double lr) {
    const int b = static_cast<int>(batch.clips.size());
    if (b < 2) throw EmptyInputError("train_step: batch too small");

    // Forward: features, spatial similarities, batched temporal CNN.
    std::vector<ClipFeatures> feats(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        RegionFeatureMap raw = model.backbone.extract(batch.clips[static_cast<size_t>(i)].frames);
        feats[static_cast<size_t>(i)] = transform_features(raw, model.whitening, model.attention);
    }

    std::vector<SpatialSim> spatial(static_cast<size_t>(b) * b);
    std::vector<Matrix> frame_sims(static_cast<size_t>(b) * b);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            SpatialSim sp = spatial_similarity(feats[static_cast<size_t>(i)].out,
                                               feats[static_cast<size_t>(j)].out);
            frame_sims[static_cast<size_t>(i) * b + j] = sp.m;
            spatial[static_cast<size_t>(i) * b + j] = std::move(sp);
        }

    CnnBatchTrace trace = cnn_forward_batch(model.cnn, frame_sims);
    std::vector<Matrix> filtered(static_cast<size_t>(b) * b);
    std::vector<std::vector<int>> chamfer_arg(static_cast<size_t>(b) * b);
    Matrix s(b, b);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            size_t k = static_cast<size_t>(i) * b + j;
            filtered[k] = trace.filtered(static_cast<int>(k));
            double raw = chamfer_similarity_traced(filtered[k], chamfer_arg[k]);
            s(i, j) = (raw + 1.0) / 2.0;
        }

    LossGradients lg = total_loss_grad(s, batch.labeling, filtered, cfg.loss);
    if (!std::isfinite(lg.report.total))
        throw ConsistencyError("train_step: non-finite loss\n" +
                               detail::dump_batch_state(s, batch.labeling));

    // Backward: chamfer routing into the filtered matrices (on top of the
    // regularization hinge), then CNN, spatial, attention.
    const double rows = static_cast<double>(trace.out_h());
    std::vector<Matrix>& dfiltered = lg.dfiltered;
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            size_t k = static_cast<size_t>(i) * b + j;
            double g = lg.ds(i, j) * 0.5 / rows;  // dS/ds = 1/2, chamfer mean over rows
            if (g == 0.0) continue;
            const auto& arg = chamfer_arg[k];
            for (size_t row = 0; row < arg.size(); ++row)
                dfiltered[k](static_cast<Eigen::Index>(row), arg[row]) += g;
        }

    CnnGrads grads;
    grads.init_like(model.cnn);
    std::vector<Matrix> dinputs = cnn_backward_batch(model.cnn, trace, dfiltered, grads);

    std::vector<RegionFeatureMap> dfeats;
    dfeats.reserve(static_cast<size_t>(b));
    for (int i = 0; i < b; ++i) {
        const auto& o = feats[static_cast<size_t>(i)].out;
        dfeats.emplace_back(o.t, o.r, o.d);  // zero-initialized
    }
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j) {
            size_t k = static_cast<size_t>(i) * b + j;
            spatial_similarity_backward(spatial[k], feats[static_cast<size_t>(i)].out,
                                        feats[static_cast<size_t>(j)].out, dinputs[k],
                                        dfeats[static_cast<size_t>(i)],
                                        dfeats[static_cast<size_t>(j)]);
        }

    Vector dcontext = Vector::Zero(model.attention.context.size());
    for (int i = 0; i < b; ++i)
        attention_backward(feats[static_cast<size_t>(i)], dfeats[static_cast<size_t>(i)], dcontext);

    // AdamW update of psi (CNN) and phi (attention context) only.
    ++opt.t;
    const double wd = cfg.weight_decay;
    detail::adamw_update(model.cnn.c1.w, grads.dw1, opt.mw1, opt.vw1, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c2.w, grads.dw2, opt.mw2, opt.vw2, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c3.w, grads.dw3, opt.mw3, opt.vw3, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c4.w, grads.dw4, opt.mw4, opt.vw4, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c1.bias, grads.db1, opt.mb1, opt.vb1, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c2.bias, grads.db2, opt.mb2, opt.vb2, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c3.bias, grads.db3, opt.mb3, opt.vb3, lr, wd, opt.t);
    detail::adamw_update(model.cnn.c4.bias, grads.db4, opt.mb4, opt.vb4, lr, wd, opt.t);
    detail::adamw_update(model.attention.context, dcontext, opt.mctx, opt.vctx, lr, wd, opt.t);
    double n = model.attention.context.norm();
    if (n > 0) model.attention.context /= n;

    return {lg.report, std::move(s)};
}

// ---------------------------------------------------------------------------
// Checkpoint: whitening, attention, CNN, optimizer moments, iteration, RNG
// stream, and the training config. The backbone travels as its descriptor
// string and is re-attached at load time.
// ---------------------------------------------------------------------------
struct Checkpoint {
    SimilarityModel model;
    TrainConfig cfg;
    OptimState opt;
    int64_t iteration = 0;
    Rng rng{0};
};

namespace detail {

inline void put_matrix(std::string& out, const Matrix& m) {
    put_u32le(out, static_cast<uint32_t>(m.rows()));
    put_u32le(out, static_cast<uint32_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64le(out, m(i, j));
}

inline Matrix get_matrix(ByteReader& r) {
    uint32_t rows = r.u32le(), cols = r.u32le();
    Matrix m(rows, cols);
    for (uint32_t i = 0; i < rows; ++i)
        for (uint32_t j = 0; j < cols; ++j) m(i, j) = r.f64le();
    return m;
}

inline void put_vector(std::string& out, const Vector& v) {
    put_u32le(out, static_cast<uint32_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) put_f64le(out, v[i]);
}

inline Vector get_vector(ByteReader& r) {
    uint32_t n = r.u32le();
    Vector v(n);
    for (uint32_t i = 0; i < n; ++i) v[i] = r.f64le();
    return v;
}

inline void put_string(std::string& out, const std::string& s) {
    put_u32le(out, static_cast<uint32_t>(s.size()));
    out += s;
}

inline std::string get_string(ByteReader& r) {
    uint32_t n = r.u32le();
    return r.bytes(n);
}

inline void put_conv(std::string& out, const ConvLayer& l) {
    put_u32le(out, static_cast<uint32_t>(l.in_ch));
    put_u32le(out, static_cast<uint32_t>(l.out_ch));
    put_u32le(out, static_cast<uint32_t>(l.k));
    put_matrix(out, l.w);
    put_vector(out, l.bias);
}

inline ConvLayer get_conv(ByteReader& r) {
    ConvLayer l;
    l.in_ch = static_cast<int>(r.u32le());
    l.out_ch = static_cast<int>(r.u32le());
    l.k = static_cast<int>(r.u32le());
    l.w = get_matrix(r);
    l.bias = get_vector(r);
    if (l.w.rows() != l.out_ch || l.w.cols() != l.in_ch * l.k * l.k ||
        l.bias.size() != l.out_ch)
        throw FormatError("checkpoint: conv layer shape mismatch");
    return l;
}

inline void put_train_config(std::string& out, const TrainConfig& c) {
    put_u64le(out, static_cast<uint64_t>(c.iterations));
    put_u32le(out, static_cast<uint32_t>(c.batch_videos));
    put_f64le(out, c.lr);
    put_f64le(out, c.weight_decay);
    put_u64le(out, static_cast<uint64_t>(c.warmup_iters));
    put_u64le(out, c.seed);
    put_u64le(out, static_cast<uint64_t>(c.checkpoint_interval));
    put_u32le(out, static_cast<uint32_t>(c.whitening_samples));
    put_f64le(out, c.whitening_eps);
    put_f64le(out, c.loss.tau);
    put_f64le(out, c.loss.lambda);
    put_f64le(out, c.loss.r);
    put_f64le(out, c.loss.eps_log);
    put_u32le(out, (c.loss.sshn_self ? 1u : 0u) | (c.loss.sshn_hard ? 2u : 0u));
    put_u32le(out, static_cast<uint32_t>(c.aug.clip_len));
    put_u32le(out, static_cast<uint32_t>(c.aug.raug_ops));
    put_u32le(out, static_cast<uint32_t>(c.aug.raug_magnitude));
    for (double p : {c.aug.p_overlay, c.aug.p_blur, c.aug.p_tsd, c.aug.p_ff, c.aug.p_sm,
                     c.aug.p_rev, c.aug.p_pau, c.aug.p_shuf, c.aug.p_drop, c.aug.p_cont,
                     c.aug.p_viv, c.aug.viv_lambda_min, c.aug.viv_lambda_max})
        put_f64le(out, p);
}

inline TrainConfig get_train_config(ByteReader& r) {
    TrainConfig c;
    c.iterations = static_cast<int64_t>(r.u64le());
    c.batch_videos = static_cast<int>(r.u32le());
    c.lr = r.f64le();
    c.weight_decay = r.f64le();
    c.warmup_iters = static_cast<int64_t>(r.u64le());
    c.seed = r.u64le();
    c.checkpoint_interval = static_cast<int64_t>(r.u64le());
    c.whitening_samples = static_cast<int>(r.u32le());
    c.whitening_eps = r.f64le();
    c.loss.tau = r.f64le();
    c.loss.lambda = r.f64le();
    c.loss.r = r.f64le();
    c.loss.eps_log = r.f64le();
    uint32_t toggles = r.u32le();
    c.loss.sshn_self = (toggles & 1u) != 0;
    c.loss.sshn_hard = (toggles & 2u) != 0;
    c.aug.clip_len = static_cast<int>(r.u32le());
    c.aug.raug_ops = static_cast<int>(r.u32le());
    c.aug.raug_magnitude = static_cast<int>(r.u32le());
    for (double* p : {&c.aug.p_overlay, &c.aug.p_blur, &c.aug.p_tsd, &c.aug.p_ff, &c.aug.p_sm,
                      &c.aug.p_rev, &c.aug.p_pau, &c.aug.p_shuf, &c.aug.p_drop, &c.aug.p_cont,
                      &c.aug.p_viv, &c.aug.viv_lambda_min, &c.aug.viv_lambda_max})
        *p = r.f64le();
    return c;
}

}  // namespace detail

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    std::string out;
    out += "S2VC";
    put_u32le(out, 1);  // version
    detail::put_string(out, ck.model.backbone.descriptor);
    detail::put_train_config(out, ck.cfg);
    detail::put_vector(out, ck.model.whitening.mean);
    detail::put_matrix(out, ck.model.whitening.projection);
    detail::put_vector(out, ck.model.attention.context);
    detail::put_conv(out, ck.model.cnn.c1);
    detail::put_conv(out, ck.model.cnn.c2);
    detail::put_conv(out, ck.model.cnn.c3);
    detail::put_conv(out, ck.model.cnn.c4);
    put_u64le(out, static_cast<uint64_t>(ck.opt.t));
    for (const Matrix* m : {&ck.opt.mw1, &ck.opt.vw1, &ck.opt.mw2, &ck.opt.vw2, &ck.opt.mw3,
                            &ck.opt.vw3, &ck.opt.mw4, &ck.opt.vw4})
        detail::put_matrix(out, *m);
    for (const Vector* v : {&ck.opt.mb1, &ck.opt.vb1, &ck.opt.mb2, &ck.opt.vb2, &ck.opt.mb3,
                            &ck.opt.vb3, &ck.opt.mb4, &ck.opt.vb4, &ck.opt.mctx, &ck.opt.vctx})
        detail::put_vector(out, *v);
    put_u64le(out, static_cast<uint64_t>(ck.iteration));
    detail::put_string(out, ck.rng.serialize());

    std::ofstream os(path, std::ios::binary);
    if (!os) throw IngestError("save_checkpoint: cannot open " + path.string());
    os.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!os) throw IngestError("save_checkpoint: write failed for " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path, const Backbone& backbone) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IngestError("load_checkpoint: cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    ByteReader r(data.data(), data.size());
    if (r.bytes(4) != "S2VC") throw FormatError("checkpoint: bad magic");
    if (r.u32le() != 1) throw FormatError("checkpoint: unsupported version");

    Checkpoint ck;
    std::string descriptor = detail::get_string(r);
    if (descriptor != backbone.descriptor)
        throw ConsistencyError("checkpoint: backbone descriptor mismatch: checkpoint has '" +
                               descriptor + "', runtime has '" + backbone.descriptor + "'");
    ck.model.backbone = backbone;
    ck.cfg = detail::get_train_config(r);
    ck.model.whitening.mean = detail::get_vector(r);
    ck.model.whitening.projection = detail::get_matrix(r);
    ck.model.attention.context = detail::get_vector(r);
    ck.model.cnn.c1 = detail::get_conv(r);
    ck.model.cnn.c2 = detail::get_conv(r);
    ck.model.cnn.c3 = detail::get_conv(r);
    ck.model.cnn.c4 = detail::get_conv(r);
    ck.opt.t = static_cast<int64_t>(r.u64le());
    for (Matrix* m : {&ck.opt.mw1, &ck.opt.vw1, &ck.opt.mw2, &ck.opt.vw2, &ck.opt.mw3, &ck.opt.vw3,
                      &ck.opt.mw4, &ck.opt.vw4})
        *m = detail::get_matrix(r);
    for (Vector* v : {&ck.opt.mb1, &ck.opt.vb1, &ck.opt.mb2, &ck.opt.vb2, &ck.opt.mb3, &ck.opt.vb3,
                      &ck.opt.mb4, &ck.opt.vb4, &ck.opt.mctx, &ck.opt.vctx})
        *v = detail::get_vector(r);
    ck.iteration = static_cast<int64_t>(r.u64le());
    ck.rng = Rng::deserialize(detail::get_string(r));
    validate(ck.model);
    return ck;
}

// ---------------------------------------------------------------------------
// Training loop. Appends "step,nce,sshn,reg,total,lr" records to `log` when
// given; writes ckpt_<step>.s2vc files into checkpoint_dir when the interval
// is set. Passing `resume` continues an interrupted run bit-identically.
// ---------------------------------------------------------------------------
// On resume the checkpoint's stored config governs the run; the cfg argument
// is ignored so the continued trajectory matches the uninterrupted one.
inline Checkpoint train(const Backbone& backbone, const std::vector<FrameSequence>& corpus,
                        const TrainConfig& cfg, std::ostream* log = nullptr,
                        const Checkpoint* resume = nullptr,
                        const std::filesystem::path& checkpoint_dir = {}) {
    Checkpoint ck;
    if (resume) {
        ck = *resume;
        ck.model.backbone = backbone;
        validate(ck.cfg);
        validate(ck.model);
    } else {
        validate(cfg);
        Rng master(cfg.seed);
        Rng init_rng = master.fork();
        ck.rng = master.fork();
        ck.cfg = cfg;
        ck.model = init_model(backbone, corpus, cfg, init_rng);
        ck.opt.init_like(ck.model.cnn, ck.model.attention);
        ck.iteration = 0;
    }
    const TrainConfig& active = ck.cfg;

    for (int64_t step = ck.iteration; step < active.iterations; ++step) {
        TrainingBatch batch = build_batch(corpus, active, ck.rng);
        double lr = lr_at(step, active);
        StepDiagnostics diag = train_step(ck.model, ck.opt, batch, active, lr);
        ck.iteration = step + 1;
        if (log) {
            (*log) << step << ',' << std::setprecision(17) << diag.report.nce << ','
                   << diag.report.sshn << ',' << diag.report.reg << ',' << diag.report.total << ','
                   << lr << '\n';
        }
        if (!checkpoint_dir.empty() && active.checkpoint_interval > 0 &&
            ck.iteration % active.checkpoint_interval == 0 && ck.iteration < active.iterations) {
            save_checkpoint(checkpoint_dir / ("ckpt_" + std::to_string(ck.iteration) + ".s2vc"), ck);
        }
    }
    if (!checkpoint_dir.empty())
        save_checkpoint(checkpoint_dir / ("ckpt_" + std::to_string(ck.iteration) + ".s2vc"), ck);
    return ck;
}

}  // namespace s2vs
