#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "s2vs/backbone.hpp"
#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/features.hpp"

namespace s2vs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Whitening. y = projection^T (x - mean); fitted so the projected training
// sample has identity covariance.
// ---------------------------------------------------------------------------
struct WhiteningParams {
    Vector mean;        // d_raw
    Matrix projection;  // d_raw x d
};

inline WhiteningParams fit_whitening(const Matrix& samples, double eps = 1e-6) {
    if (samples.rows() < 2) throw EmptyInputError("fit_whitening: need at least 2 sample vectors");
    if (samples.cols() < 1) throw DimensionError("fit_whitening: zero-dimensional samples");
    if (eps < 0.0) throw ConfigError("fit_whitening: eps must be >= 0");

    WhiteningParams p;
    p.mean = samples.colwise().mean();
    Matrix centered = samples.rowwise() - p.mean.transpose();
    Matrix cov = centered.transpose() * centered / static_cast<double>(samples.rows() - 1);
    cov.diagonal().array() += eps;

    Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
    if (es.info() != Eigen::Success) throw SingularCovarianceError("fit_whitening: eigensolver failed");
    const Vector& evals = es.eigenvalues();
    double max_eval = evals.maxCoeff();
    double tol = 1e-12 * std::max(1.0, max_eval);
    if (evals.minCoeff() <= tol)
        throw SingularCovarianceError(
            "fit_whitening: sample covariance is singular (add eps or more samples)");
    p.projection = es.eigenvectors() * evals.cwiseSqrt().cwiseInverse().asDiagonal();
    return p;
}

// ---------------------------------------------------------------------------
// Attention over region vectors: weight w = (context . x + 1) / 2 with x unit
// norm, so w is in [0, 1]. `context` is kept unit norm by the optimizer.
// ---------------------------------------------------------------------------
struct AttentionParams {
    Vector context;
};

inline AttentionParams init_attention(int d, Rng& rng) {
    AttentionParams a;
    a.context = Vector(d);
    for (int i = 0; i < d; ++i) a.context[i] = rng.gaussian();
    double n = a.context.norm();
    if (n > 0) a.context /= n;
    return a;
}

// Whitened, l2-normalized region vectors plus attention weights. `unit` and
// `weights` are kept for the training backward pass.
struct ClipFeatures {
    RegionFeatureMap out;            // weights * unit
    RegionFeatureMap unit;           // pre-attention, unit norm (or zero)
    std::vector<double> weights;     // t*r
};

inline ClipFeatures transform_features(const RegionFeatureMap& raw, const WhiteningParams& wp,
                                       const AttentionParams& ap) {
    validate(raw);
    if (raw.d != wp.mean.size())
        throw DimensionError("transform_features: feature dim " + std::to_string(raw.d) +
                             " does not match whitening dim " + std::to_string(wp.mean.size()));
    int d_out = static_cast<int>(wp.projection.cols());
    if (ap.context.size() != d_out)
        throw DimensionError("transform_features: attention dim mismatch");

    ClipFeatures f;
    f.unit = RegionFeatureMap(raw.t, raw.r, d_out);
    f.out = RegionFeatureMap(raw.t, raw.r, d_out);
    f.weights.assign(static_cast<size_t>(raw.t) * raw.r, 0.0);

    for (int t = 0; t < raw.t; ++t) {
        for (int r = 0; r < raw.r; ++r) {
            Eigen::Map<const Vector> x(raw.region(t, r), raw.d);
            Eigen::Map<Vector> u(f.unit.region(t, r), d_out);
            u = wp.projection.transpose() * (x - wp.mean);
            double n = u.norm();
            if (n > 1e-12) u /= n;
            else u.setZero();
            double w = (ap.context.dot(u) + 1.0) / 2.0;
            f.weights[static_cast<size_t>(t) * raw.r + r] = w;
            Eigen::Map<Vector>(f.out.region(t, r), d_out) = w * u;
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// Chamfer similarity: mean over one axis of the max over the other.
// Asymmetric; the default direction treats rows as the query axis.
// ---------------------------------------------------------------------------
enum class ChamferDirection { Row, Column };

inline double chamfer_similarity(const Matrix& sim, ChamferDirection dir = ChamferDirection::Row) {
    if (sim.rows() == 0 || sim.cols() == 0) throw EmptyInputError("chamfer_similarity: empty matrix");
    if (dir == ChamferDirection::Column) return sim.colwise().maxCoeff().mean();
    return sim.rowwise().maxCoeff().mean();
}

// As above but records the column index of each row max (first index wins
// ties) for gradient routing.
inline double chamfer_similarity_traced(const Matrix& sim, std::vector<int>& argmax) {
    if (sim.rows() == 0 || sim.cols() == 0) throw EmptyInputError("chamfer_similarity: empty matrix");
    argmax.resize(static_cast<size_t>(sim.rows()));
    double total = 0.0;
    for (Eigen::Index i = 0; i < sim.rows(); ++i) {
        int best = 0;
        double bv = sim(i, 0);
        for (Eigen::Index j = 1; j < sim.cols(); ++j)
            if (sim(i, j) > bv) {
                bv = sim(i, j);
                best = static_cast<int>(j);
            }
        argmax[static_cast<size_t>(i)] = best;
        total += bv;
    }
    return total / static_cast<double>(sim.rows());
}

// ---------------------------------------------------------------------------
// Spatial (region-level) similarity: for each frame pair, Chamfer over the
// R x R matrix of region dot products, producing a Tv x Tu frame similarity
// matrix. argmax[(tv*Tu + tu)*R + vr] is the matched u-region, kept for the
// backward pass.
// ---------------------------------------------------------------------------
struct SpatialSim {
    Matrix m;                     // Tv x Tu
    std::vector<uint16_t> argmax; // Tv*Tu*R
};

inline SpatialSim spatial_similarity(const RegionFeatureMap& fv, const RegionFeatureMap& fu) {
    if (fv.d != fu.d) throw DimensionError("spatial_similarity: feature dim mismatch");
    const int rv = fv.r, ru = fu.r;
    SpatialSim s;
    s.m.resize(fv.t, fu.t);
    s.argmax.resize(static_cast<size_t>(fv.t) * fu.t * rv);

    // One GEMM for all region dot products, then per-frame-pair Chamfer.
    Matrix g = fv.rows() * fu.rows().transpose();  // (Tv*Rv) x (Tu*Ru)
    for (int tv = 0; tv < fv.t; ++tv) {
        for (int tu = 0; tu < fu.t; ++tu) {
            double acc = 0.0;
            for (int vr = 0; vr < rv; ++vr) {
                int best = 0;
                double bv = g(tv * rv + vr, tu * ru);
                for (int ur = 1; ur < ru; ++ur) {
                    double val = g(tv * rv + vr, tu * ru + ur);
                    if (val > bv) {
                        bv = val;
                        best = ur;
                    }
                }
                s.argmax[(static_cast<size_t>(tv) * fu.t + tu) * rv + vr] = static_cast<uint16_t>(best);
                acc += bv;
            }
            s.m(tv, tu) = acc / rv;
        }
    }
    return s;
}

// Routes dL/dM back to the two region feature maps (the `out` maps of
// transform_features). Accumulates into dfv/dfu.
inline void spatial_similarity_backward(const SpatialSim& s, const RegionFeatureMap& fv,
                                        const RegionFeatureMap& fu, const Matrix& dm,
                                        RegionFeatureMap& dfv, RegionFeatureMap& dfu) {
    const int rv = fv.r, d = fv.d;
    for (int tv = 0; tv < fv.t; ++tv) {
        for (int tu = 0; tu < fu.t; ++tu) {
            double gcoef = dm(tv, tu) / rv;
            if (gcoef == 0.0) continue;
            for (int vr = 0; vr < rv; ++vr) {
                int ur = s.argmax[(static_cast<size_t>(tv) * fu.t + tu) * rv + vr];
                Eigen::Map<const Vector> xv(fv.region(tv, vr), d);
                Eigen::Map<const Vector> xu(fu.region(tu, ur), d);
                Eigen::Map<Vector>(dfv.region(tv, vr), d) += gcoef * xu;
                Eigen::Map<Vector>(dfu.region(tu, ur), d) += gcoef * xv;
            }
        }
    }
}

// Backward through attention: given dL/d(out map), accumulate dL/d(context).
// out(t,r) = w * unit, w = (context . unit + 1) / 2; unit is constant.
inline void attention_backward(const ClipFeatures& f, const RegionFeatureMap& dout, Vector& dcontext) {
    int d = f.out.d;
    for (int t = 0; t < f.out.t; ++t) {
        for (int r = 0; r < f.out.r; ++r) {
            Eigen::Map<const Vector> g(dout.region(t, r), d);
            Eigen::Map<const Vector> u(f.unit.region(t, r), d);
            dcontext += (g.dot(u) / 2.0) * u;
        }
    }
}

// ---------------------------------------------------------------------------
// Temporal CNN on the frame-similarity matrix:
//   conv3x3(32) -> maxpool2x2/2 -> conv3x3(64) -> conv3x3(128) -> maxpool2x2/2
//   -> conv1x1(1)
// ReLU after the first three convs, none after the last. Inputs are
// zero-padded symmetrically to a multiple of 4 (at least 4) per side; the
// output keeps the full quarter-resolution grid of the padded canvas.
// ---------------------------------------------------------------------------
struct ConvLayer {
    int in_ch = 0, out_ch = 0, k = 0;
    Matrix w;     // out_ch x (in_ch*k*k)
    Vector bias;  // out_ch
};

struct TemporalCNN {
    ConvLayer c1, c2, c3, c4;

    int parameter_count() const {
        auto n = [](const ConvLayer& l) {
            return static_cast<int>(l.w.size() + l.bias.size());
        };
        return n(c1) + n(c2) + n(c3) + n(c4);
    }
};

namespace detail {

inline ConvLayer init_conv(int in_ch, int out_ch, int k, Rng& rng) {
    ConvLayer l;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    l.k = k;
    int fan_in = in_ch * k * k;
    double bound = std::sqrt(6.0 / fan_in);
    l.w.resize(out_ch, fan_in);
    for (int i = 0; i < out_ch; ++i)
        for (int j = 0; j < fan_in; ++j) l.w(i, j) = rng.uniform(-bound, bound);
    l.bias = Vector::Zero(out_ch);
    return l;
}

}  // namespace detail

inline TemporalCNN init_cnn(Rng& rng) {
    TemporalCNN n;
    n.c1 = detail::init_conv(1, 32, 3, rng);
    n.c2 = detail::init_conv(32, 64, 3, rng);
    n.c3 = detail::init_conv(64, 128, 3, rng);
    n.c4 = detail::init_conv(128, 1, 1, rng);
    return n;
}

inline int pad4(int t) { return std::max(4, (t + 3) / 4 * 4); }

namespace detail {

// Activations are (channels x positions) with positions row-major within each
// item; a batch concatenates items of identical h x w along the position axis.

inline Matrix im2col3(const Matrix& in, int h, int w, int n_items) {
    const int p = h * w;
    Matrix col(in.rows() * 9, in.cols());
    col.setZero();
    for (int item = 0; item < n_items; ++item) {
        const int base = item * p;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int pos = base + y * w + x;
                for (int ky = 0; ky < 3; ++ky) {
                    int iy = y + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        int ix = x + kx - 1;
                        if (ix < 0 || ix >= w) continue;
                        const int ipos = base + iy * w + ix;
                        for (int c = 0; c < in.rows(); ++c)
                            col(c * 9 + ky * 3 + kx, pos) = in(c, ipos);
                    }
                }
            }
        }
    }
    return col;
}

inline void col2im3_add(const Matrix& dcol, int h, int w, int n_items, Matrix& din) {
    const int p = h * w;
    for (int item = 0; item < n_items; ++item) {
        const int base = item * p;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const int pos = base + y * w + x;
                for (int ky = 0; ky < 3; ++ky) {
                    int iy = y + ky - 1;
                    if (iy < 0 || iy >= h) continue;
                    for (int kx = 0; kx < 3; ++kx) {
                        int ix = x + kx - 1;
                        if (ix < 0 || ix >= w) continue;
                        const int ipos = base + iy * w + ix;
                        for (int c = 0; c < din.rows(); ++c)
                            din(c, ipos) += dcol(c * 9 + ky * 3 + kx, pos);
                    }
                }
            }
        }
    }
}

// 2x2 stride-2 max pool; h and w must be even. argmax code = dy*2+dx, first
// index wins ties.
inline void maxpool2(const Matrix& in, int h, int w, int n_items, Matrix& out,
                     std::vector<uint8_t>& argmax) {
    const int ho = h / 2, wo = w / 2;
    out.resize(in.rows(), static_cast<Eigen::Index>(n_items) * ho * wo);
    argmax.assign(static_cast<size_t>(in.rows()) * n_items * ho * wo, 0);
    for (int item = 0; item < n_items; ++item) {
        const int ibase = item * h * w, obase = item * ho * wo;
        for (int y = 0; y < ho; ++y) {
            for (int x = 0; x < wo; ++x) {
                const int opos = obase + y * wo + x;
                for (int c = 0; c < in.rows(); ++c) {
                    double best = -std::numeric_limits<double>::infinity();
                    uint8_t code = 0;
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            double v = in(c, ibase + (2 * y + dy) * w + (2 * x + dx));
                            if (v > best) {
                                best = v;
                                code = static_cast<uint8_t>(dy * 2 + dx);
                            }
                        }
                    out(c, opos) = best;
                    argmax[static_cast<size_t>(c) * (static_cast<size_t>(n_items) * ho * wo) + opos] = code;
                }
            }
        }
    }
}

inline void maxpool2_backward(const Matrix& dout, const std::vector<uint8_t>& argmax, int h, int w,
                              int n_items, Matrix& din) {
    const int ho = h / 2, wo = w / 2;
    din.setZero();
    for (int item = 0; item < n_items; ++item) {
        const int ibase = item * h * w, obase = item * ho * wo;
        for (int y = 0; y < ho; ++y) {
            for (int x = 0; x < wo; ++x) {
                const int opos = obase + y * wo + x;
                for (int c = 0; c < dout.rows(); ++c) {
                    uint8_t code =
                        argmax[static_cast<size_t>(c) * (static_cast<size_t>(n_items) * ho * wo) + opos];
                    int dy = code / 2, dx = code % 2;
                    din(c, ibase + (2 * y + dy) * w + (2 * x + dx)) += dout(c, opos);
                }
            }
        }
    }
}

}  // namespace detail

// Forward trace for a batch of same-shaped inputs. Inputs are zero-padded
// symmetrically (extra row/col on the bottom/right when odd) to the padded
// h0 x w0 canvas; the output keeps the full (h0/4) x (w0/4) grid.
struct CnnBatchTrace {
    int n = 0;                     // items in batch
    int tv = 0, tu = 0;            // original input dims
    int h0 = 0, w0 = 0;            // padded input dims
    int oy = 0, ox = 0;            // placement offset of the input in the canvas
    Matrix a0;                     // 1 x n*h0*w0 padded inputs
    Matrix col1, z1;               // col 9 x P0, post-relu 32 x P0
    std::vector<uint8_t> am1;
    Matrix p1, col2, z2, col3, z3; // pooled/post-relu stages
    std::vector<uint8_t> am2;
    Matrix p2;                     // 128 x P2
    Matrix out;                    // 1 x P2

    int out_h() const { return h0 / 4; }
    int out_w() const { return w0 / 4; }

    // Filtered matrix of batch item i, dims (h0/4) x (w0/4).
    Matrix filtered(int i) const {
        Matrix f(out_h(), out_w());
        const int base = i * out_h() * out_w();
        for (int y = 0; y < f.rows(); ++y)
            for (int x = 0; x < f.cols(); ++x) f(y, x) = out(0, base + y * out_w() + x);
        return f;
    }
};

inline CnnBatchTrace cnn_forward_batch(const TemporalCNN& net, const std::vector<Matrix>& inputs) {
    if (inputs.empty()) throw EmptyInputError("cnn_forward_batch: empty batch");
    const int tv = static_cast<int>(inputs[0].rows());
    const int tu = static_cast<int>(inputs[0].cols());
    for (const auto& m : inputs)
        if (m.rows() != tv || m.cols() != tu)
            throw DimensionError("cnn_forward_batch: inputs must share one shape");

    CnnBatchTrace t;
    t.n = static_cast<int>(inputs.size());
    t.tv = tv;
    t.tu = tu;
    t.h0 = pad4(tv);
    t.w0 = pad4(tu);
    t.oy = (t.h0 - tv) / 2;
    t.ox = (t.w0 - tu) / 2;

    const int p0 = t.h0 * t.w0;
    t.a0 = Matrix::Zero(1, static_cast<Eigen::Index>(t.n) * p0);
    for (int i = 0; i < t.n; ++i)
        for (int y = 0; y < tv; ++y)
            for (int x = 0; x < tu; ++x)
                t.a0(0, i * p0 + (y + t.oy) * t.w0 + (x + t.ox)) = inputs[static_cast<size_t>(i)](y, x);

    t.col1 = detail::im2col3(t.a0, t.h0, t.w0, t.n);
    t.z1 = ((net.c1.w * t.col1).colwise() + net.c1.bias).cwiseMax(0.0);
    detail::maxpool2(t.z1, t.h0, t.w0, t.n, t.p1, t.am1);

    const int h1 = t.h0 / 2, w1 = t.w0 / 2;
    t.col2 = detail::im2col3(t.p1, h1, w1, t.n);
    t.z2 = ((net.c2.w * t.col2).colwise() + net.c2.bias).cwiseMax(0.0);
    t.col3 = detail::im2col3(t.z2, h1, w1, t.n);
    t.z3 = ((net.c3.w * t.col3).colwise() + net.c3.bias).cwiseMax(0.0);
    detail::maxpool2(t.z3, h1, w1, t.n, t.p2, t.am2);

    t.out = (net.c4.w * t.p2).colwise() + net.c4.bias;
    return t;
}

struct CnnGrads {
    Matrix dw1, dw2, dw3, dw4;
    Vector db1, db2, db3, db4;

    void init_like(const TemporalCNN& n) {
        dw1 = Matrix::Zero(n.c1.w.rows(), n.c1.w.cols());
        dw2 = Matrix::Zero(n.c2.w.rows(), n.c2.w.cols());
        dw3 = Matrix::Zero(n.c3.w.rows(), n.c3.w.cols());
        dw4 = Matrix::Zero(n.c4.w.rows(), n.c4.w.cols());
        db1 = Vector::Zero(n.c1.bias.size());
        db2 = Vector::Zero(n.c2.bias.size());
        db3 = Vector::Zero(n.c3.bias.size());
        db4 = Vector::Zero(n.c4.bias.size());
    }
};

// dout_filtered[i]: gradient w.r.t. the filtered matrix of item i. Returns
// per-item dL/d(input matrix) and accumulates parameter grads.
inline std::vector<Matrix> cnn_backward_batch(const TemporalCNN& net, const CnnBatchTrace& t,
                                              const std::vector<Matrix>& dout_filtered,
                                              CnnGrads& grads) {
    if (static_cast<int>(dout_filtered.size()) != t.n)
        throw DimensionError("cnn_backward_batch: batch size mismatch");

    const int h1 = t.h0 / 2, w1 = t.w0 / 2;
    const int h2 = t.h0 / 4, w2 = t.w0 / 4;
    const int p2 = h2 * w2;

    Matrix dout = Matrix::Zero(1, static_cast<Eigen::Index>(t.n) * p2);
    for (int i = 0; i < t.n; ++i)
        for (int y = 0; y < h2; ++y)
            for (int x = 0; x < w2; ++x)
                dout(0, i * p2 + y * w2 + x) = dout_filtered[static_cast<size_t>(i)](y, x);

    grads.dw4 += dout * t.p2.transpose();
    grads.db4 += dout.rowwise().sum();
    Matrix dp2 = net.c4.w.transpose() * dout;

    Matrix dz3(t.z3.rows(), t.z3.cols());
    detail::maxpool2_backward(dp2, t.am2, h1, w1, t.n, dz3);
    Matrix dpre3 = (t.z3.array() > 0.0).cast<double>() * dz3.array();
    grads.dw3 += dpre3 * t.col3.transpose();
    grads.db3 += dpre3.rowwise().sum();
    Matrix dcol3 = net.c3.w.transpose() * dpre3;
    Matrix dz2 = Matrix::Zero(t.z2.rows(), t.z2.cols());
    detail::col2im3_add(dcol3, h1, w1, t.n, dz2);

    Matrix dpre2 = (t.z2.array() > 0.0).cast<double>() * dz2.array();
    grads.dw2 += dpre2 * t.col2.transpose();
    grads.db2 += dpre2.rowwise().sum();
    Matrix dcol2 = net.c2.w.transpose() * dpre2;
    Matrix dp1 = Matrix::Zero(t.p1.rows(), t.p1.cols());
    detail::col2im3_add(dcol2, h1, w1, t.n, dp1);

    Matrix dz1(t.z1.rows(), t.z1.cols());
    detail::maxpool2_backward(dp1, t.am1, t.h0, t.w0, t.n, dz1);
    Matrix dpre1 = (t.z1.array() > 0.0).cast<double>() * dz1.array();
    grads.dw1 += dpre1 * t.col1.transpose();
    grads.db1 += dpre1.rowwise().sum();
    Matrix dcol1 = net.c1.w.transpose() * dpre1;
    Matrix da0 = Matrix::Zero(1, t.a0.cols());
    detail::col2im3_add(dcol1, t.h0, t.w0, t.n, da0);

    const int p0 = t.h0 * t.w0;
    std::vector<Matrix> dinputs(static_cast<size_t>(t.n));
    for (int i = 0; i < t.n; ++i) {
        Matrix d = Matrix::Zero(t.tv, t.tu);
        for (int y = 0; y < t.tv; ++y)
            for (int x = 0; x < t.tu; ++x)
                d(y, x) = da0(0, i * p0 + (y + t.oy) * t.w0 + (x + t.ox));
        dinputs[static_cast<size_t>(i)] = std::move(d);
    }
    return dinputs;
}

inline Matrix clamp_unit(Matrix m) {
    return m.cwiseMax(-1.0).cwiseMin(1.0);
}

// Filtered similarity matrix for a single frame-similarity matrix.
inline Matrix temporal_filter(const Matrix& m, const TemporalCNN& net) {
    return cnn_forward_batch(net, {m}).filtered(0);
}

// Final Chamfer over the hard-clamped filtered matrix.
inline double video_similarity(const Matrix& filtered) {
    return chamfer_similarity(clamp_unit(filtered));
}

// ---------------------------------------------------------------------------
// Full model and pair scoring.
// ---------------------------------------------------------------------------
struct SimilarityModel {
    Backbone backbone;
    WhiteningParams whitening;
    AttentionParams attention;
    TemporalCNN cnn;

    int feature_dim() const { return static_cast<int>(whitening.projection.cols()); }
};

inline void validate(const SimilarityModel& m) {
    if (!m.backbone.extract) throw ConfigError("model: backbone not attached");
    if (m.whitening.mean.size() != m.backbone.d_raw)
        throw DimensionError("model: whitening dim does not match backbone");
    if (m.attention.context.size() != m.whitening.projection.cols())
        throw DimensionError("model: attention dim does not match whitening output");
    if (std::abs(m.attention.context.norm() - 1.0) > 1e-6)
        throw ConsistencyError("model: attention context must be unit norm");
}

struct PairSimilarity {
    Matrix frame_sim;  // Tv x Tu
    Matrix filtered;   // ceil(Tv/4) x ceil(Tu/4); clamped iff requested
    double video_sim = 0.0;  // in [-1, 1] when clamped
};

// Scores one ordered (query, candidate) pair from raw backbone features.
// `clamp` selects inference semantics (hard clamp of the filtered matrix).
inline PairSimilarity score_pair_detail(const SimilarityModel& model, const RegionFeatureMap& fv,
                                        const RegionFeatureMap& fu, bool clamp = true) {
    ClipFeatures xv = transform_features(fv, model.whitening, model.attention);
    ClipFeatures xu = transform_features(fu, model.whitening, model.attention);
    SpatialSim sp = spatial_similarity(xv.out, xu.out);
    CnnBatchTrace t = cnn_forward_batch(model.cnn, {sp.m});
    PairSimilarity out;
    out.frame_sim = std::move(sp.m);
    out.filtered = t.filtered(0);
    if (clamp) out.filtered = clamp_unit(out.filtered);
    out.video_sim = chamfer_similarity(out.filtered);
    return out;
}

inline double score_pair(const SimilarityModel& model, const RegionFeatureMap& fv,
                         const RegionFeatureMap& fu) {
    return score_pair_detail(model, fv, fu, true).video_sim;
}

inline double score_pair(const SimilarityModel& model, const std::vector<Image>& frames_v,
                         const std::vector<Image>& frames_u) {
    return score_pair(model, model.backbone.extract(frames_v), model.backbone.extract(frames_u));
}

// B x B matrix of rescaled pair similarities S_ij = (score_pair + 1)/2 in
// [0,1]; equals elementwise score_pair calls (diagonal computed, not assumed).
inline Matrix batch_similarity_matrix(const SimilarityModel& model,
                                      const std::vector<RegionFeatureMap>& features) {
    if (features.size() < 2) throw EmptyInputError("batch_similarity_matrix: need at least 2 clips");
    const int b = static_cast<int>(features.size());
    Matrix s(b, b);
    for (int i = 0; i < b; ++i)
        for (int j = 0; j < b; ++j)
            s(i, j) =
                (score_pair(model, features[static_cast<size_t>(i)], features[static_cast<size_t>(j)]) +
                 1.0) /
                2.0;
    return s;
}

}  // namespace s2vs
