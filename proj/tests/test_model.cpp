// Similarity model internals: whitening, attention, Chamfer, spatial
// similarity, the temporal CNN, and end-to-end pair scoring.

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "s2vs/backbone.hpp"
#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/features.hpp"
#include "s2vs/model.hpp"

using namespace s2vs;

namespace {

RegionFeatureMap random_features(int t, int r, int d, Rng& rng, double scale = 1.0) {
    RegionFeatureMap m(t, r, d);
    for (double& x : m.v) x = scale * rng.gaussian();
    return m;
}

// Identity whitening: mean zero, projection I (d_raw == d_out).
WhiteningParams identity_whitening(int d) {
    WhiteningParams wp;
    wp.mean = Vector::Zero(d);
    wp.projection = Matrix::Identity(d, d);
    return wp;
}

SimilarityModel small_model(uint64_t seed, int d_raw = 64) {
    Rng rng(seed);
    SimilarityModel m;
    m.backbone = make_toy_backbone();
    Matrix samples(128, d_raw);
    for (int i = 0; i < samples.rows(); ++i)
        for (int j = 0; j < d_raw; ++j) samples(i, j) = rng.gaussian();
    m.whitening = fit_whitening(samples, 1e-6);
    m.attention = init_attention(static_cast<int>(m.whitening.projection.cols()), rng);
    m.cnn = init_cnn(rng);
    return m;
}

}  // namespace

TEST(Whitening, ProjectedSampleHasIdentityCovariance) {
    Rng rng(11);
    const int n = 500, d = 8;
    // Correlated samples: random linear mix of an isotropic gaussian.
    Matrix mix(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) mix(i, j) = rng.gaussian();
    Matrix samples(n, d);
    for (int i = 0; i < n; ++i) {
        Vector z(d);
        for (int j = 0; j < d; ++j) z[j] = rng.gaussian();
        samples.row(i) = (mix * z).transpose() + Vector::Constant(d, 3.0).transpose();
    }

    WhiteningParams wp = fit_whitening(samples, 1e-6);
    Matrix centered = samples.rowwise() - wp.mean.transpose();
    Matrix projected = centered * wp.projection;
    Matrix cov = projected.transpose() * projected / static_cast<double>(n - 1);
    // Exact up to the eps regularizer (eps / eigenvalue distortion).
    EXPECT_LT((cov - Matrix::Identity(d, d)).cwiseAbs().maxCoeff(), 1e-4);

    // Mean really is the sample mean.
    Vector mu = samples.colwise().mean();
    EXPECT_LT((mu - wp.mean).cwiseAbs().maxCoeff(), 1e-12);
    // Projected mean is zero.
    Vector pm = projected.colwise().mean();
    EXPECT_LT(pm.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Whitening, SingularCovarianceThrowsWithoutEps) {
    // 3 samples in 5 dims: rank <= 2, so the covariance is singular.
    Rng rng(7);
    Matrix samples(3, 5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 5; ++j) samples(i, j) = rng.gaussian();
    EXPECT_THROW(fit_whitening(samples, 0.0), SingularCovarianceError);
    // The eps regularizer rescues it.
    EXPECT_NO_THROW(fit_whitening(samples, 1e-6));
}

TEST(Whitening, InputValidation) {
    Matrix one_row(1, 4);
    one_row.setZero();
    EXPECT_THROW(fit_whitening(one_row), EmptyInputError);
    Matrix no_cols(3, 0);
    EXPECT_THROW(fit_whitening(no_cols), DimensionError);
    Matrix ok(4, 2);
    ok << 0, 0, 1, 0, 0, 1, 1, 1;
    EXPECT_THROW(fit_whitening(ok, -1.0), ConfigError);
}

TEST(Attention, InitIsUnitNorm) {
    Rng rng(3);
    AttentionParams a = init_attention(16, rng);
    ASSERT_EQ(a.context.size(), 16);
    EXPECT_NEAR(a.context.norm(), 1.0, 1e-12);
}

TEST(TransformFeatures, WeightFollowsContextAlignment) {
    const int d = 4;
    WhiteningParams wp = identity_whitening(d);
    AttentionParams ap;
    ap.context = Vector::Zero(d);
    ap.context[0] = 1.0;

    RegionFeatureMap raw(1, 3, d);
    // Region 0: along the context -> w = 1. Region 1: orthogonal -> w = 0.5.
    // Region 2: against the context -> w = 0.
    raw.region(0, 0)[0] = 2.0;
    raw.region(0, 1)[1] = 5.0;
    raw.region(0, 2)[0] = -0.5;

    ClipFeatures f = transform_features(raw, wp, ap);
    EXPECT_NEAR(f.weights[0], 1.0, 1e-12);
    EXPECT_NEAR(f.weights[1], 0.5, 1e-12);
    EXPECT_NEAR(f.weights[2], 0.0, 1e-12);

    // unit is the l2-normalized input, out = w * unit.
    EXPECT_NEAR(f.unit.region(0, 0)[0], 1.0, 1e-12);
    EXPECT_NEAR(f.out.region(0, 0)[0], 1.0, 1e-12);
    EXPECT_NEAR(f.unit.region(0, 1)[1], 1.0, 1e-12);
    EXPECT_NEAR(f.out.region(0, 1)[1], 0.5, 1e-12);
    EXPECT_NEAR(f.out.region(0, 2)[0], 0.0, 1e-12);
}

TEST(TransformFeatures, ZeroVectorGetsZeroOutput) {
    const int d = 4;
    WhiteningParams wp = identity_whitening(d);
    AttentionParams ap;
    ap.context = Vector::Zero(d);
    ap.context[2] = 1.0;

    RegionFeatureMap raw(1, 1, d);  // all zeros
    ClipFeatures f = transform_features(raw, wp, ap);
    EXPECT_NEAR(f.weights[0], 0.5, 1e-12);  // w = (0 + 1)/2
    for (int i = 0; i < d; ++i) {
        EXPECT_EQ(f.unit.region(0, 0)[i], 0.0);
        EXPECT_EQ(f.out.region(0, 0)[i], 0.0);
    }
}

TEST(TransformFeatures, WeightsAlwaysInUnitInterval) {
    Rng rng(21);
    Matrix samples(64, 6);
    for (int i = 0; i < 64; ++i)
        for (int j = 0; j < 6; ++j) samples(i, j) = rng.gaussian() * 3.0;
    WhiteningParams wp = fit_whitening(samples, 1e-6);
    AttentionParams ap = init_attention(6, rng);
    RegionFeatureMap raw = random_features(4, 5, 6, rng, 2.5);
    ClipFeatures f = transform_features(raw, wp, ap);
    for (double w : f.weights) {
        EXPECT_GE(w, 0.0);
        EXPECT_LE(w, 1.0);
    }
    // out rows have norm w (unit is unit norm).
    for (int t = 0; t < raw.t; ++t)
        for (int r = 0; r < raw.r; ++r) {
            Eigen::Map<const Vector> o(f.out.region(t, r), 6);
            EXPECT_NEAR(o.norm(), f.weights[static_cast<size_t>(t) * raw.r + r], 1e-10);
        }
}

TEST(TransformFeatures, DimensionMismatchesThrow) {
    WhiteningParams wp = identity_whitening(4);
    AttentionParams ap;
    ap.context = Vector::Zero(4);
    ap.context[0] = 1.0;

    RegionFeatureMap wrong_d(1, 1, 5);
    wrong_d.v.assign(wrong_d.v.size(), 1.0);
    EXPECT_THROW(transform_features(wrong_d, wp, ap), DimensionError);

    RegionFeatureMap ok(1, 1, 4);
    ok.v.assign(ok.v.size(), 1.0);
    AttentionParams bad_ctx;
    bad_ctx.context = Vector::Zero(3);
    EXPECT_THROW(transform_features(ok, wp, bad_ctx), DimensionError);
}

TEST(Chamfer, HandValues) {
    Matrix ident(2, 2);
    ident << 1, 0, 0, 1;
    EXPECT_DOUBLE_EQ(chamfer_similarity(ident), 1.0);

    // Row maxes 0.9 and 0.4 -> mean 0.65.
    Matrix m(2, 2);
    m << 0.9, 0.2, 0.3, 0.4;
    EXPECT_DOUBLE_EQ(chamfer_similarity(m), 0.65);

    Matrix single(1, 1);
    single << 0.42;
    EXPECT_DOUBLE_EQ(chamfer_similarity(single), 0.42);

    // Direction matters on asymmetric matrices.
    Matrix a(2, 2);
    a << 0.9, 0.2, 0.8, 0.4;
    EXPECT_DOUBLE_EQ(chamfer_similarity(a, ChamferDirection::Row), 0.85);
    EXPECT_DOUBLE_EQ(chamfer_similarity(a, ChamferDirection::Column), 0.65);

    EXPECT_THROW(chamfer_similarity(Matrix(0, 3)), EmptyInputError);
}

TEST(Chamfer, MonotoneAndRangeBounded) {
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        int rows = 1 + static_cast<int>(rng.uniform_int(0, 4));
        int cols = 1 + static_cast<int>(rng.uniform_int(0, 4));
        Matrix m(rows, cols), bigger(rows, cols);
        double lo = 1e300, hi = -1e300;
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) {
                m(i, j) = rng.uniform(-2.0, 2.0);
                bigger(i, j) = m(i, j) + rng.uniform(0.0, 0.5);
                lo = std::min(lo, m(i, j));
                hi = std::max(hi, m(i, j));
            }
        double c = chamfer_similarity(m);
        EXPECT_LE(chamfer_similarity(m), chamfer_similarity(bigger));
        EXPECT_GE(c, lo);
        EXPECT_LE(c, hi);
    }
}

TEST(Chamfer, TracedMatchesAndRecordsFirstArgmax) {
    Matrix m(2, 3);
    m << 0.5, 0.9, 0.9,   // tie: first max at column 1
         0.7, 0.1, 0.7;   // tie: first max at column 0
    std::vector<int> argmax;
    double traced = chamfer_similarity_traced(m, argmax);
    EXPECT_DOUBLE_EQ(traced, chamfer_similarity(m));
    ASSERT_EQ(argmax.size(), 2u);
    EXPECT_EQ(argmax[0], 1);
    EXPECT_EQ(argmax[1], 0);
}

TEST(SpatialSimilarity, MatchesBruteForceOracle) {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        int tv_n = 1 + static_cast<int>(rng.uniform_int(0, 3));
        int tu_n = 1 + static_cast<int>(rng.uniform_int(0, 3));
        int r = 1 + static_cast<int>(rng.uniform_int(0, 2));
        int d = 1 + static_cast<int>(rng.uniform_int(0, 7));
        RegionFeatureMap fv = random_features(tv_n, r, d, rng);
        RegionFeatureMap fu = random_features(tu_n, r, d, rng);
        SpatialSim s = spatial_similarity(fv, fu);
        ASSERT_EQ(s.m.rows(), tv_n);
        ASSERT_EQ(s.m.cols(), tu_n);

        for (int tv = 0; tv < tv_n; ++tv) {
            for (int tu = 0; tu < tu_n; ++tu) {
                double acc = 0.0;
                for (int vr = 0; vr < r; ++vr) {
                    double best = -1e300;
                    for (int ur = 0; ur < r; ++ur) {
                        double dot = 0.0;
                        for (int k = 0; k < d; ++k)
                            dot += fv.region(tv, vr)[k] * fu.region(tu, ur)[k];
                        best = std::max(best, dot);
                    }
                    acc += best;
                }
                EXPECT_NEAR(s.m(tv, tu), acc / r, 1e-12) << tv << "," << tu;
            }
        }
    }
}

TEST(SpatialSimilarity, OrthonormalSelfMatchHasUnitDiagonal) {
    // Each frame holds two orthonormal region vectors; matching a clip
    // against itself puts 1.0 on the frame-similarity diagonal.
    RegionFeatureMap f(3, 2, 4);
    for (int t = 0; t < 3; ++t) {
        f.region(t, 0)[(t * 2) % 4] = 1.0;
        f.region(t, 1)[(t * 2 + 1) % 4] = 1.0;
    }
    SpatialSim s = spatial_similarity(f, f);
    for (int t = 0; t < 3; ++t) EXPECT_NEAR(s.m(t, t), 1.0, 1e-12);
}

TEST(SpatialSimilarity, BackwardMatchesFiniteDifference) {
    Rng rng(1234);
    for (int trial = 0; trial < 5; ++trial) {
        RegionFeatureMap fv = random_features(2, 2, 3, rng);
        RegionFeatureMap fu = random_features(3, 2, 3, rng);
        Matrix dm(2, 3);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 3; ++j) dm(i, j) = rng.gaussian();

        SpatialSim s = spatial_similarity(fv, fu);
        RegionFeatureMap dfv(2, 2, 3), dfu(3, 2, 3);
        spatial_similarity_backward(s, fv, fu, dm, dfv, dfu);

        auto loss = [&](const RegionFeatureMap& a, const RegionFeatureMap& b) {
            return (dm.array() * spatial_similarity(a, b).m.array()).sum();
        };

        // Directional finite differences; h small enough that the Chamfer
        // argmax pattern at this random draw does not flip.
        const double h = 1e-6;
        RegionFeatureMap dir_v = random_features(2, 2, 3, rng, 0.7);
        RegionFeatureMap dir_u = random_features(3, 2, 3, rng, 0.7);

        RegionFeatureMap vp = fv, vm = fv;
        for (size_t i = 0; i < fv.v.size(); ++i) {
            vp.v[i] += h * dir_v.v[i];
            vm.v[i] -= h * dir_v.v[i];
        }
        double fd_v = (loss(vp, fu) - loss(vm, fu)) / (2 * h);
        double an_v = 0.0;
        for (size_t i = 0; i < fv.v.size(); ++i) an_v += dfv.v[i] * dir_v.v[i];
        EXPECT_NEAR(fd_v, an_v, 1e-5 * std::max(1.0, std::abs(fd_v)));

        RegionFeatureMap up = fu, um = fu;
        for (size_t i = 0; i < fu.v.size(); ++i) {
            up.v[i] += h * dir_u.v[i];
            um.v[i] -= h * dir_u.v[i];
        }
        double fd_u = (loss(fv, up) - loss(fv, um)) / (2 * h);
        double an_u = 0.0;
        for (size_t i = 0; i < fu.v.size(); ++i) an_u += dfu.v[i] * dir_u.v[i];
        EXPECT_NEAR(fd_u, an_u, 1e-5 * std::max(1.0, std::abs(fd_u)));
    }
}

TEST(Attention, BackwardMatchesFiniteDifference) {
    Rng rng(555);
    const int d = 5;
    WhiteningParams wp = identity_whitening(d);
    RegionFeatureMap raw = random_features(2, 3, d, rng);
    RegionFeatureMap g = random_features(2, 3, d, rng);

    AttentionParams ap;
    ap.context = Vector(d);
    for (int i = 0; i < d; ++i) ap.context[i] = rng.gaussian();
    ap.context /= ap.context.norm();

    ClipFeatures f = transform_features(raw, wp, ap);
    Vector dctx = Vector::Zero(d);
    attention_backward(f, g, dctx);

    auto loss = [&](const Vector& c) {
        AttentionParams a2;
        a2.context = c;
        ClipFeatures f2 = transform_features(raw, wp, a2);
        double l = 0.0;
        for (size_t i = 0; i < f2.out.v.size(); ++i) l += g.v[i] * f2.out.v[i];
        return l;
    };

    const double h = 1e-6;
    for (int i = 0; i < d; ++i) {
        Vector cp = ap.context, cm = ap.context;
        cp[i] += h;
        cm[i] -= h;
        double fd = (loss(cp) - loss(cm)) / (2 * h);
        // Loss is linear in the context, so FD is essentially exact.
        EXPECT_NEAR(fd, dctx[i], 1e-7 * std::max(1.0, std::abs(fd)));
    }
}

TEST(TemporalCnn, Pad4HandValues) {
    EXPECT_EQ(pad4(1), 4);
    EXPECT_EQ(pad4(3), 4);
    EXPECT_EQ(pad4(4), 4);
    EXPECT_EQ(pad4(5), 8);
    EXPECT_EQ(pad4(8), 8);
    EXPECT_EQ(pad4(9), 12);
    EXPECT_EQ(pad4(32), 32);
}

TEST(TemporalCnn, ParameterCount) {
    Rng rng(1);
    TemporalCNN net = init_cnn(rng);
    // conv3x3 1->32: 32*9+32; conv3x3 32->64: 64*288+64;
    // conv3x3 64->128: 128*576+128; conv1x1 128->1: 128+1.
    EXPECT_EQ(net.parameter_count(), 320 + 18496 + 73856 + 129);
}

TEST(TemporalCnn, OutputIsQuarterResolutionOfPaddedInput) {
    Rng rng(2);
    TemporalCNN net = init_cnn(rng);
    EXPECT_EQ(temporal_filter(Matrix::Random(32, 32), net).rows(), 8);
    EXPECT_EQ(temporal_filter(Matrix::Random(32, 32), net).cols(), 8);
    Matrix f = temporal_filter(Matrix::Random(8, 16), net);
    EXPECT_EQ(f.rows(), 2);
    EXPECT_EQ(f.cols(), 4);
    // Tiny inputs pad up to the 4x4 minimum canvas.
    Matrix tiny = temporal_filter(Matrix::Random(1, 1), net);
    EXPECT_EQ(tiny.rows(), 1);
    EXPECT_EQ(tiny.cols(), 1);
    Matrix odd = temporal_filter(Matrix::Random(3, 5), net);
    EXPECT_EQ(odd.rows(), 1);
    EXPECT_EQ(odd.cols(), 2);
}

TEST(TemporalCnn, ZeroInputZeroBiasGivesZeroOutput) {
    Rng rng(3);
    TemporalCNN net = init_cnn(rng);  // biases start at zero
    Matrix f = temporal_filter(Matrix::Zero(8, 8), net);
    EXPECT_LT(f.cwiseAbs().maxCoeff(), 1e-300);
}

TEST(TemporalCnn, BatchedForwardMatchesSingle) {
    Rng rng(4);
    TemporalCNN net = init_cnn(rng);
    Matrix m1 = Matrix::Random(6, 9), m2 = Matrix::Random(6, 9);
    auto batch = cnn_forward_batch(net, {m1, m2});
    auto solo1 = cnn_forward_batch(net, {m1});
    auto solo2 = cnn_forward_batch(net, {m2});
    EXPECT_LT((batch.filtered(0) - solo1.filtered(0)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((batch.filtered(1) - solo2.filtered(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TemporalCnn, MismatchedBatchShapesThrow) {
    Rng rng(5);
    TemporalCNN net = init_cnn(rng);
    EXPECT_THROW(cnn_forward_batch(net, {}), EmptyInputError);
    EXPECT_THROW(cnn_forward_batch(net, {Matrix::Zero(4, 4), Matrix::Zero(4, 5)}),
                 DimensionError);
}

TEST(VideoSimilarity, ClampsThenChamfers) {
    Matrix filtered(2, 2);
    filtered << 0.9, 0.5, 0.2, 0.5;
    EXPECT_DOUBLE_EQ(video_similarity(filtered), 0.7);

    Matrix hot(2, 2);
    hot << 2.0, 0.4, -3.0, 0.6;
    // Clamped to [[1, .4], [-1, .6]]; row maxes 1.0 and 0.6.
    EXPECT_DOUBLE_EQ(video_similarity(hot), 0.8);

    Matrix c = clamp_unit(hot);
    EXPECT_DOUBLE_EQ(c(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(c(1, 0), -1.0);
    EXPECT_DOUBLE_EQ(c(0, 1), 0.4);
}

TEST(PairScoring, ShapesAndRange) {
    SimilarityModel model = small_model(1001);
    Rng rng(77);
    RegionFeatureMap fv = random_features(5, 9, 64, rng);
    RegionFeatureMap fu = random_features(7, 9, 64, rng);

    PairSimilarity ps = score_pair_detail(model, fv, fu, true);
    EXPECT_EQ(ps.frame_sim.rows(), 5);
    EXPECT_EQ(ps.frame_sim.cols(), 7);
    EXPECT_EQ(ps.filtered.rows(), 2);  // pad4(5)/4
    EXPECT_EQ(ps.filtered.cols(), 2);  // pad4(7)/4
    EXPECT_GE(ps.video_sim, -1.0);
    EXPECT_LE(ps.video_sim, 1.0);
    EXPECT_LE(ps.filtered.maxCoeff(), 1.0);
    EXPECT_GE(ps.filtered.minCoeff(), -1.0);

    EXPECT_DOUBLE_EQ(score_pair(model, fv, fu), ps.video_sim);

    // Unclamped detail skips the hard clamp but scores the same matrix.
    PairSimilarity raw = score_pair_detail(model, fv, fu, false);
    EXPECT_LT((clamp_unit(raw.filtered) - ps.filtered).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PairScoring, BatchMatrixMatchesScalarCalls) {
    SimilarityModel model = small_model(1002);
    Rng rng(78);
    std::vector<RegionFeatureMap> feats;
    for (int i = 0; i < 3; ++i) feats.push_back(random_features(4, 9, 64, rng));

    Matrix s = batch_similarity_matrix(model, feats);
    ASSERT_EQ(s.rows(), 3);
    ASSERT_EQ(s.cols(), 3);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            EXPECT_GE(s(i, j), 0.0);
            EXPECT_LE(s(i, j), 1.0);
            EXPECT_DOUBLE_EQ(s(i, j), (score_pair(model, feats[i], feats[j]) + 1.0) / 2.0);
        }
    }
    EXPECT_THROW(batch_similarity_matrix(model, {feats[0]}), EmptyInputError);
}

TEST(ModelValidate, CatchesBrokenWiring) {
    SimilarityModel m = small_model(1003);
    EXPECT_NO_THROW(validate(m));

    SimilarityModel no_backbone = m;
    no_backbone.backbone.extract = nullptr;
    EXPECT_THROW(validate(no_backbone), ConfigError);

    SimilarityModel bad_whiten = m;
    bad_whiten.whitening.mean = Vector::Zero(16);
    EXPECT_THROW(validate(bad_whiten), DimensionError);

    SimilarityModel bad_attn = m;
    bad_attn.attention.context = Vector::Zero(7);
    EXPECT_THROW(validate(bad_attn), DimensionError);

    SimilarityModel off_norm = m;
    off_norm.attention.context *= 2.0;
    EXPECT_THROW(validate(off_norm), ConsistencyError);
}

TEST(ToyBackbone, DeterministicAndShaped) {
    Backbone b = make_toy_backbone();
    EXPECT_EQ(b.descriptor, "toy:v1");
    EXPECT_EQ(b.regions, 9);
    EXPECT_EQ(b.d_raw, 64);

    Rng rng(42);
    std::vector<Image> frames;
    for (int t = 0; t < 3; ++t) {
        Image im(48, 48);
        for (float& p : im.px) p = static_cast<float>(rng.uniform());
        frames.push_back(std::move(im));
    }

    RegionFeatureMap f1 = b.extract(frames);
    RegionFeatureMap f2 = b.extract(frames);
    EXPECT_EQ(f1.t, 3);
    EXPECT_EQ(f1.r, 9);
    EXPECT_EQ(f1.d, 64);
    EXPECT_EQ(f1.v, f2.v);  // bit-identical across calls

    // Identical frames produce identical per-frame features.
    std::vector<Image> twice = {frames[0], frames[0]};
    RegionFeatureMap ft = b.extract(twice);
    for (int r = 0; r < 9; ++r)
        for (int k = 0; k < 64; ++k)
            EXPECT_EQ(ft.region(0, r)[k], ft.region(1, r)[k]);

    EXPECT_THROW(b.extract({}), EmptyInputError);
}

TEST(ToyBackbone, PixelInfluenceIsLocalToItsRegion) {
    Rng rng(43);
    Image im(48, 48);
    for (float& p : im.px) p = static_cast<float>(rng.uniform());
    Backbone b = make_toy_backbone();

    RegionFeatureMap before = b.extract({im});
    // Poke the center of the middle region (region index 4 of the 3x3 grid);
    // interior enough that the gradient taps stay inside the region.
    im.at(24, 24, 0) = im.at(24, 24, 0) > 0.5f ? 0.f : 1.f;
    RegionFeatureMap after = b.extract({im});

    for (int r = 0; r < 9; ++r) {
        double diff = 0.0;
        for (int k = 0; k < 64; ++k) diff += std::abs(before.region(0, r)[k] - after.region(0, r)[k]);
        if (r == 4) EXPECT_GT(diff, 0.0);
        else EXPECT_EQ(diff, 0.0) << "region " << r << " moved";
    }
}
