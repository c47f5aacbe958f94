#pragma once

#include <cmath>
#include <vector>

#include "s2vs/augment.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/model.hpp"

namespace s2vs {

struct LossConfig {
    double tau = 0.03;
    double lambda = 3.0;
    double r = 1.0;
    double eps_log = 1e-8;
    bool sshn_self = true;  // ablation axes for the two SSHN terms
    bool sshn_hard = true;
};

inline void validate(const LossConfig& c) {
    if (!(c.tau > 0.0)) throw ConfigError("tau must be > 0");
    if (c.lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (c.r < 0.0) throw ConfigError("r must be >= 0");
    if (!(c.eps_log > 0.0)) throw ConfigError("eps_log must be > 0");
}

struct LossReport {
    double nce = 0.0;
    double sshn = 0.0;
    double reg = 0.0;  // unscaled hinge sum; total applies the factor r
    double total = 0.0;
    int positive_pairs = 0;
};

namespace detail {

inline void check_labeling_dim(const Matrix& s, const BatchLabeling& l) {
    if (s.rows() != s.cols() || s.rows() != l.b)
        throw DimensionError("loss: S dimension does not match labeling");
}

}  // namespace detail

// Contrastive term over all positive pairs (i,j), j in p(i); the denominator
// holds the pair's own logit plus the negatives of row i. Self-similarity and
// other positives are excluded.
inline double infonce_loss(const Matrix& s, const BatchLabeling& l, double tau) {
    detail::check_labeling_dim(s, l);
    double sum = 0.0;
    int pairs = 0;
    for (int i = 0; i < l.b; ++i) {
        const auto& neg = l.negatives[static_cast<size_t>(i)];
        double denom_neg = 0.0;
        for (int k : neg) denom_neg += std::exp(s(i, k) / tau);
        for (int j : l.positives[static_cast<size_t>(i)]) {
            double e = std::exp(s(i, j) / tau);
            sum += -std::log(e / (e + denom_neg));
            ++pairs;
        }
    }
    if (pairs == 0) throw NoPositivesError("infonce_loss: batch has no positive pairs");
    return sum / pairs;
}

// d infonce / d S, averaged over positive pairs like the loss.
inline Matrix infonce_grad(const Matrix& s, const BatchLabeling& l, double tau) {
    detail::check_labeling_dim(s, l);
    Matrix g = Matrix::Zero(s.rows(), s.cols());
    int pairs = 0;
    for (int i = 0; i < l.b; ++i) pairs += static_cast<int>(l.positives[static_cast<size_t>(i)].size());
    if (pairs == 0) throw NoPositivesError("infonce_grad: batch has no positive pairs");
    for (int i = 0; i < l.b; ++i) {
        const auto& neg = l.negatives[static_cast<size_t>(i)];
        double denom_neg = 0.0;
        for (int k : neg) denom_neg += std::exp(s(i, k) / tau);
        for (int j : l.positives[static_cast<size_t>(i)]) {
            double e = std::exp(s(i, j) / tau);
            double z = e + denom_neg;
            g(i, j) += -(denom_neg / z) / tau;
            for (int k : neg) g(i, k) += (std::exp(s(i, k) / tau) / z) / tau;
        }
    }
    return g / pairs;
}

// Per row: pull the self-similarity up, push the hardest negative down.
// Ties in the hardest negative resolve to the first index.
inline double sshn_loss(const Matrix& s, const BatchLabeling& l, const LossConfig& cfg) {
    detail::check_labeling_dim(s, l);
    if (l.b == 0) throw EmptyInputError("sshn_loss: empty batch");
    double sum = 0.0;
    for (int i = 0; i < l.b; ++i) {
        double row = 0.0;
        if (cfg.sshn_self) row += -std::log(std::max(cfg.eps_log, s(i, i)));
        if (cfg.sshn_hard) {
            const auto& neg = l.negatives[static_cast<size_t>(i)];
            if (neg.empty()) throw RowWithoutNegativesError("sshn_loss: row has no negatives");
            double m = s(i, neg[0]);
            for (int k : neg) m = std::max(m, s(i, k));
            row += -std::log(std::max(cfg.eps_log, 1.0 - m));
        }
        sum += row;
    }
    return sum / l.b;
}

inline Matrix sshn_grad(const Matrix& s, const BatchLabeling& l, const LossConfig& cfg) {
    detail::check_labeling_dim(s, l);
    if (l.b == 0) throw EmptyInputError("sshn_grad: empty batch");
    Matrix g = Matrix::Zero(s.rows(), s.cols());
    for (int i = 0; i < l.b; ++i) {
        if (cfg.sshn_self && s(i, i) > cfg.eps_log) g(i, i) += -1.0 / s(i, i);
        if (cfg.sshn_hard) {
            const auto& neg = l.negatives[static_cast<size_t>(i)];
            if (neg.empty()) throw RowWithoutNegativesError("sshn_grad: row has no negatives");
            int arg = neg[0];
            for (int k : neg)
                if (s(i, k) > s(i, arg)) arg = k;
            if (1.0 - s(i, arg) > cfg.eps_log) g(i, arg) += 1.0 / (1.0 - s(i, arg));
        }
    }
    return g / l.b;
}

// Hinge on pre-clamp filtered similarities; returns the r-scaled penalty.
inline double similarity_regularization(const std::vector<Matrix>& filtered, double r) {
    double sum = 0.0;
    for (const auto& m : filtered)
        for (Eigen::Index j = 0; j < m.size(); ++j) {
            double x = m.data()[j];
            sum += std::max(0.0, x - 1.0) + std::max(0.0, -1.0 - x);
        }
    return r * sum;
}

inline std::vector<Matrix> regularization_grad(const std::vector<Matrix>& filtered, double r) {
    std::vector<Matrix> g;
    g.reserve(filtered.size());
    for (const auto& m : filtered) {
        Matrix dm = Matrix::Zero(m.rows(), m.cols());
        for (Eigen::Index j = 0; j < m.size(); ++j) {
            double x = m.data()[j];
            if (x > 1.0) dm.data()[j] = r;
            else if (x < -1.0) dm.data()[j] = -r;
        }
        g.push_back(std::move(dm));
    }
    return g;
}

inline LossReport total_loss(const Matrix& s, const BatchLabeling& l,
                             const std::vector<Matrix>& filtered, const LossConfig& cfg) {
    validate(cfg);
    LossReport rep;
    rep.nce = infonce_loss(s, l, cfg.tau);
    for (const auto& pos : l.positives) rep.positive_pairs += static_cast<int>(pos.size());
    rep.sshn = sshn_loss(s, l, cfg);
    rep.reg = similarity_regularization(filtered, 1.0);
    rep.total = rep.nce + cfg.lambda * rep.sshn + cfg.r * rep.reg;
    return rep;
}

struct LossGradients {
    LossReport report;
    Matrix ds;                      // d total / d S
    std::vector<Matrix> dfiltered;  // regularization part only
};

inline LossGradients total_loss_grad(const Matrix& s, const BatchLabeling& l,
                                     const std::vector<Matrix>& filtered, const LossConfig& cfg) {
    LossGradients out;
    out.report = total_loss(s, l, filtered, cfg);
    out.ds = infonce_grad(s, l, cfg.tau) + cfg.lambda * sshn_grad(s, l, cfg);
    out.dfiltered = regularization_grad(filtered, cfg.r);
    return out;
}

}  // namespace s2vs
