// Independent brute-force recomputations used to cross-check the library.
// Everything here is written as plain nested loops against the definitions,
// deliberately avoiding the vectorized code paths under test.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <s2vs/augment.hpp>
#include <s2vs/eval.hpp>
#include <s2vs/features.hpp>
#include <s2vs/losses.hpp>
#include <s2vs/model.hpp>

namespace oracle {

using s2vs::Matrix;

// Chamfer: mean over rows of the row max (or the transpose direction).
inline double chamfer(const Matrix& m, bool row_direction = true) {
    double total = 0.0;
    if (row_direction) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            double best = m(i, 0);
            for (Eigen::Index j = 1; j < m.cols(); ++j) best = std::max(best, m(i, j));
            total += best;
        }
        return total / static_cast<double>(m.rows());
    }
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        double best = m(0, j);
        for (Eigen::Index i = 1; i < m.rows(); ++i) best = std::max(best, m(i, j));
        total += best;
    }
    return total / static_cast<double>(m.cols());
}

// Frame-to-frame similarity from post-attention region vectors: for each
// frame pair, mean over v-regions of the max over u-regions of the dot
// product.
inline Matrix frame_similarity(const s2vs::RegionFeatureMap& fv, const s2vs::RegionFeatureMap& fu) {
    Matrix out(fv.t, fu.t);
    for (int tv = 0; tv < fv.t; ++tv) {
        for (int tu = 0; tu < fu.t; ++tu) {
            double acc = 0.0;
            for (int rv = 0; rv < fv.r; ++rv) {
                double best = -std::numeric_limits<double>::infinity();
                for (int ru = 0; ru < fu.r; ++ru) {
                    double dot = 0.0;
                    for (int k = 0; k < fv.d; ++k)
                        dot += fv.region(tv, rv)[k] * fu.region(tu, ru)[k];
                    best = std::max(best, dot);
                }
                acc += best;
            }
            out(tv, tu) = acc / fv.r;
        }
    }
    return out;
}

// InfoNCE over a batch similarity matrix: one term per (row, positive) pair,
// with the denominator restricted to that pair plus the row's negatives.
inline double infonce(const Matrix& s, const s2vs::BatchLabeling& l, double tau) {
    double total = 0.0;
    int pairs = 0;
    for (int i = 0; i < l.b; ++i) {
        for (int j : l.positives[static_cast<size_t>(i)]) {
            double denom = std::exp(s(i, j) / tau);
            for (int k : l.negatives[static_cast<size_t>(i)]) denom += std::exp(s(i, k) / tau);
            total += -std::log(std::exp(s(i, j) / tau) / denom);
            ++pairs;
        }
    }
    if (pairs == 0) throw std::runtime_error("oracle::infonce: no positive pairs");
    return total / pairs;
}

// SSHN: per row, -log(self similarity) and -log(1 - hardest negative),
// averaged over rows, with the same epsilon floor as the implementation.
inline double sshn(const Matrix& s, const s2vs::BatchLabeling& l, const s2vs::LossConfig& cfg) {
    double total = 0.0;
    for (int i = 0; i < l.b; ++i) {
        if (cfg.sshn_self) total += -std::log(std::max(cfg.eps_log, s(i, i)));
        if (cfg.sshn_hard) {
            const auto& neg = l.negatives[static_cast<size_t>(i)];
            if (neg.empty()) throw std::runtime_error("oracle::sshn: row without negatives");
            double hardest = -std::numeric_limits<double>::infinity();
            for (int k : neg) hardest = std::max(hardest, s(i, k));
            total += -std::log(std::max(cfg.eps_log, 1.0 - hardest));
        }
    }
    return total / l.b;
}

// Hinge penalty on filtered values outside [-1, 1], scaled by r.
inline double regularization(const std::vector<Matrix>& filtered, double r) {
    double total = 0.0;
    for (const Matrix& m : filtered)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                double v = m(i, j);
                if (v > 1.0) total += v - 1.0;
                if (v < -1.0) total += -1.0 - v;
            }
    return r * total;
}

// Average precision of a ranked binary relevance list:
// sum over relevant ranks k of (relevant seen up to k) / k, divided by the
// number of relevant items.
inline double average_precision(const std::vector<char>& ranked) {
    int seen = 0, relevant = 0;
    double total = 0.0;
    for (size_t k = 0; k < ranked.size(); ++k) {
        if (ranked[k]) {
            ++seen;
            total += static_cast<double>(seen) / static_cast<double>(k + 1);
        }
    }
    for (char c : ranked) relevant += c ? 1 : 0;
    if (relevant == 0) throw std::runtime_error("oracle::average_precision: no relevant items");
    return total / relevant;
}

// Shared ranking rule: higher similarity first, then candidate id, then
// query id.
inline bool entry_before(const s2vs::EvalEntry& a, const s2vs::EvalEntry& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.candidate != b.candidate) return a.candidate < b.candidate;
    return a.query < b.query;
}

// Mean AP over queries on the [0, 100] scale; queries without positives are
// skipped.
inline double mean_ap(const s2vs::EvalRun& run) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<s2vs::EvalEntry>> groups;
    for (const auto& e : run.entries) {
        if (!groups.count(e.query)) order.push_back(e.query);
        groups[e.query].push_back(e);
    }
    double total = 0.0;
    int used = 0;
    for (const auto& q : order) {
        auto& entries = groups[q];
        std::sort(entries.begin(), entries.end(), entry_before);
        std::vector<char> ranked;
        bool any = false;
        for (const auto& e : entries) {
            ranked.push_back(e.relevant ? 1 : 0);
            any = any || e.relevant;
        }
        if (!any) continue;
        total += average_precision(ranked);
        ++used;
    }
    if (used == 0) throw std::runtime_error("oracle::mean_ap: no query has positives");
    return 100.0 * total / used;
}

// AP over the merged list of all queries, on the [0, 100] scale.
inline double micro_ap(const s2vs::EvalRun& run) {
    std::vector<s2vs::EvalEntry> entries = run.entries;
    std::sort(entries.begin(), entries.end(), entry_before);
    std::vector<char> ranked;
    for (const auto& e : entries) ranked.push_back(e.relevant ? 1 : 0);
    return 100.0 * average_precision(ranked);
}

// Central finite difference of a scalar function of one coordinate.
template <typename F>
double central_diff(F&& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Relative gradient error with a floor so near-zero gradients are compared
// absolutely at the same tolerance scale.
inline double rel_err(double analytic, double numeric, double floor_scale = 1e-3) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor_scale});
}

// Content fingerprint of an image sequence (exact byte equality surrogate).
inline uint64_t clip_hash(const std::vector<s2vs::Image>& frames) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& im : frames) {
        int dims[2] = {im.h, im.w};
        h = s2vs::fnv1a64(dims, sizeof(dims), h);
        h = s2vs::fnv1a64(im.px.data(), im.px.size() * sizeof(float), h);
    }
    return h;
}

inline bool same_image(const s2vs::Image& a, const s2vs::Image& b) {
    return a.h == b.h && a.w == b.w && a.px == b.px;
}

}  // namespace oracle
