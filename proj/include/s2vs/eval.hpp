#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "s2vs/common.hpp"
#include "s2vs/errors.hpp"
#include "s2vs/image.hpp"
#include "s2vs/model.hpp"

namespace s2vs {

// ---------------------------------------------------------------------------
// EvalRun: scored (query, candidate) pairs with binary relevance. CSV format:
// "query_id,candidate_id,similarity,relevant" with a header line.
// ---------------------------------------------------------------------------
struct EvalEntry {
    std::string query;
    std::string candidate;
    double similarity = 0.0;
    bool relevant = false;
};

struct EvalRun {
    std::vector<EvalEntry> entries;
};

inline void validate(const EvalRun& run) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& e : run.entries) {
        if (!std::isfinite(e.similarity))
            throw ConsistencyError("eval run: non-finite similarity for query " + e.query);
        if (!seen.emplace(e.query, e.candidate).second)
            throw ConsistencyError("eval run: duplicate candidate " + e.candidate + " for query " +
                                   e.query);
    }
}

inline void write_run(const std::filesystem::path& path, const EvalRun& run) {
    std::ofstream os(path);
    if (!os) throw IngestError("write_run: cannot open " + path.string());
    os << "query_id,candidate_id,similarity,relevant\n";
    os.precision(17);
    for (const auto& e : run.entries)
        os << e.query << ',' << e.candidate << ',' << e.similarity << ',' << (e.relevant ? 1 : 0)
           << '\n';
    if (!os) throw IngestError("write_run: write failed for " + path.string());
}

inline EvalRun read_run(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IngestError("read_run: cannot open " + path.string());
    EvalRun run;
    std::string line;
    size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line == "query_id,candidate_id,similarity,relevant") continue;
        std::istringstream ls(line);
        EvalEntry e;
        std::string sim, rel;
        if (!std::getline(ls, e.query, ',') || !std::getline(ls, e.candidate, ',') ||
            !std::getline(ls, sim, ',') || !std::getline(ls, rel))
            throw FormatError("read_run: malformed line " + std::to_string(lineno) + " in " +
                              path.string());
        try {
            size_t pos = 0;
            e.similarity = std::stod(sim, &pos);
            if (pos != sim.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw FormatError("read_run: bad similarity on line " + std::to_string(lineno));
        }
        if (rel == "1") e.relevant = true;
        else if (rel == "0") e.relevant = false;
        else throw FormatError("read_run: bad relevance flag on line " + std::to_string(lineno));
        run.entries.push_back(std::move(e));
    }
    validate(run);
    return run;
}

// ---------------------------------------------------------------------------
// Ranking order: similarity descending, then candidate id ascending (the
// documented tie-break); the merged detection list additionally breaks
// remaining ties by query id ascending.
// ---------------------------------------------------------------------------
namespace detail {

inline bool rank_before(const EvalEntry& a, const EvalEntry& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.candidate != b.candidate) return a.candidate < b.candidate;
    return a.query < b.query;
}

// Query ids in first-appearance order with their entries.
inline std::vector<std::pair<std::string, std::vector<const EvalEntry*>>> group_by_query(
    const EvalRun& run) {
    std::vector<std::pair<std::string, std::vector<const EvalEntry*>>> groups;
    std::map<std::string, size_t> index;
    for (const auto& e : run.entries) {
        auto [it, inserted] = index.emplace(e.query, groups.size());
        if (inserted) groups.push_back({e.query, {}});
        groups[it->second].second.push_back(&e);
    }
    for (auto& g : groups)
        std::sort(g.second.begin(), g.second.end(),
                  [](const EvalEntry* a, const EvalEntry* b) { return rank_before(*a, *b); });
    return groups;
}

}  // namespace detail

// Step-function AP over an ordered relevance list: sum of precision at each
// relevant rank, divided by the number of relevant items.
inline double average_precision(const std::vector<char>& ranked_relevance) {
    int relevant = 0;
    double sum = 0.0;
    for (size_t i = 0; i < ranked_relevance.size(); ++i) {
        if (ranked_relevance[i]) {
            ++relevant;
            sum += static_cast<double>(relevant) / static_cast<double>(i + 1);
        }
    }
    if (relevant == 0) throw QueryWithoutPositivesError("average_precision: no relevant items");
    return sum / relevant;
}

struct QueryAp {
    std::string query;
    double ap = 0.0;    // [0,1]; meaningless when skipped
    bool skipped = false;
};

// One row per query in first-appearance order; zero-positive queries flagged.
inline std::vector<QueryAp> per_query_report(const EvalRun& run) {
    validate(run);
    std::vector<QueryAp> rows;
    for (const auto& [query, entries] : detail::group_by_query(run)) {
        QueryAp row;
        row.query = query;
        std::vector<char> rel;
        rel.reserve(entries.size());
        for (const EvalEntry* e : entries) rel.push_back(e->relevant ? 1 : 0);
        try {
            row.ap = average_precision(rel);
        } catch (const QueryWithoutPositivesError&) {
            row.skipped = true;
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Mean per-query AP on the [0,100] scale. Queries with no relevant candidate
// are skipped with a warning.
inline double mean_ap(const EvalRun& run, std::ostream* warnings = &std::cerr) {
    double sum = 0.0;
    int scorable = 0;
    for (const auto& row : per_query_report(run)) {
        if (row.skipped) {
            if (warnings)
                (*warnings) << "warning: query " << row.query
                            << " has no relevant candidates; skipped in mAP\n";
            continue;
        }
        sum += row.ap;
        ++scorable;
    }
    if (scorable == 0) throw QueryWithoutPositivesError("mean_ap: no scorable query");
    return 100.0 * sum / scorable;
}

// AP over the merged list of all queries, [0,100] scale.
inline double micro_ap(const EvalRun& run) {
    validate(run);
    std::vector<const EvalEntry*> merged;
    merged.reserve(run.entries.size());
    for (const auto& e : run.entries) merged.push_back(&e);
    std::sort(merged.begin(), merged.end(),
              [](const EvalEntry* a, const EvalEntry* b) { return detail::rank_before(*a, *b); });
    std::vector<char> rel;
    rel.reserve(merged.size());
    for (const EvalEntry* e : merged) rel.push_back(e->relevant ? 1 : 0);
    try {
        return 100.0 * average_precision(rel);
    } catch (const QueryWithoutPositivesError&) {
        throw QueryWithoutPositivesError("micro_ap: no relevant pair in the whole run");
    }
}

// ---------------------------------------------------------------------------
// Similarity normalization: per query, subtract the mean of its top-k
// similarities to a background set. Rankings within a query are unchanged.
// ---------------------------------------------------------------------------
struct NormalizationConfig {
    int k = 10;
};

// Mean of the k largest values. Exact for dyadic inputs when k is a power of
// two, which the bit-identity acceptance check exploits.
inline double background_bias(std::vector<double> sims, int k) {
    if (k < 1) throw ConfigError("background_bias: k must be >= 1");
    if (k > static_cast<int>(sims.size()))
        throw ConfigError("background_bias: k exceeds background size");
    std::partial_sort(sims.begin(), sims.begin() + k, sims.end(), std::greater<double>());
    double sum = 0.0;
    for (int i = 0; i < k; ++i) sum += sims[static_cast<size_t>(i)];
    return sum / k;
}

// Pure core: subtract a per-query bias from every candidate similarity.
inline EvalRun normalize_with_bias(const EvalRun& run, const std::map<std::string, double>& bias) {
    EvalRun out = run;
    for (auto& e : out.entries) {
        auto it = bias.find(e.query);
        if (it == bias.end())
            throw ConsistencyError("normalize_with_bias: no bias for query " + e.query);
        e.similarity -= it->second;
    }
    return out;
}

// Model-backed normalization: scores every query against the background set
// on the same [0,1] scale as the run and applies the top-k mean as bias.
inline EvalRun similarity_normalize(const EvalRun& run,
                                    const std::vector<std::pair<std::string, RegionFeatureMap>>& query_features,
                                    const std::vector<RegionFeatureMap>& background,
                                    const NormalizationConfig& cfg, const SimilarityModel& model) {
    if (cfg.k < 1) throw ConfigError("similarity_normalize: k must be >= 1");
    if (cfg.k > static_cast<int>(background.size()))
        throw ConfigError("similarity_normalize: k exceeds background size");
    std::set<std::string> run_queries;
    for (const auto& e : run.entries) run_queries.insert(e.query);

    std::map<std::string, double> bias;
    for (const auto& [qid, qf] : query_features) {
        if (!run_queries.count(qid)) continue;
        std::vector<double> sims(background.size());
        parallel_for(background.size(), [&](size_t i) {
            sims[i] = (score_pair(model, qf, background[i]) + 1.0) / 2.0;
        });
        bias[qid] = background_bias(std::move(sims), cfg.k);
    }
    for (const auto& q : run_queries)
        if (!bias.count(q))
            throw ConsistencyError("similarity_normalize: no query features for " + q);
    return normalize_with_bias(run, bias);
}

// ---------------------------------------------------------------------------
// Hard subset: remove each relevant candidate that EVERY model ranks above
// all of its query's negatives (perfect-precision positions only).
// ---------------------------------------------------------------------------
struct HardSubset {
    std::set<std::pair<std::string, std::string>> removed;  // (query, candidate)
    int removal_count() const { return static_cast<int>(removed.size()); }
};

inline HardSubset build_hard_subset(const std::vector<EvalRun>& runs) {
    if (runs.empty()) throw EmptyInputError("build_hard_subset: no runs");
    // All runs must agree on the (query, candidate, relevant) universe.
    std::map<std::pair<std::string, std::string>, bool> universe;
    for (const auto& e : runs[0].entries) universe[{e.query, e.candidate}] = e.relevant;
    for (const auto& run : runs) {
        validate(run);
        if (run.entries.size() != universe.size())
            throw ConsistencyError("build_hard_subset: candidate sets differ between runs");
        for (const auto& e : run.entries) {
            auto it = universe.find({e.query, e.candidate});
            if (it == universe.end())
                throw ConsistencyError("build_hard_subset: candidate sets differ between runs");
            if (it->second != e.relevant)
                throw ConsistencyError("build_hard_subset: relevance labels differ between runs");
        }
    }

    HardSubset hs;
    bool first = true;
    for (const auto& run : runs) {
        std::set<std::pair<std::string, std::string>> easy;
        for (const auto& [query, entries] : detail::group_by_query(run)) {
            // Entries are ranked; positives before the first-ranked negative
            // sit at perfect precision.
            for (const EvalEntry* e : entries) {
                if (!e->relevant) break;
                easy.insert({e->query, e->candidate});
            }
        }
        if (first) {
            hs.removed = std::move(easy);
            first = false;
        } else {
            std::set<std::pair<std::string, std::string>> inter;
            std::set_intersection(hs.removed.begin(), hs.removed.end(), easy.begin(), easy.end(),
                                  std::inserter(inter, inter.begin()));
            hs.removed = std::move(inter);
        }
    }
    return hs;
}

inline EvalRun filter_run(const EvalRun& run, const HardSubset& hs) {
    EvalRun out;
    for (const auto& e : run.entries)
        if (!hs.removed.count({e.query, e.candidate})) out.entries.push_back(e);
    return out;
}

// ---------------------------------------------------------------------------
// Similarity-matrix dumps: raw frame-to-frame and filtered matrices as CSV
// plus 8-bit PGM with values mapped from [-1,1] to [0,1].
// ---------------------------------------------------------------------------
inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream os(path);
    if (!os) throw IngestError("write_matrix_csv: cannot open " + path.string());
    os.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << '\n';
    }
    if (!os) throw IngestError("write_matrix_csv: write failed for " + path.string());
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IngestError("read_matrix_csv: cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            try {
                size_t pos = 0;
                row.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw FormatError("read_matrix_csv: bad cell in " + path.string());
            }
        }
        if (!rows.empty() && row.size() != rows[0].size())
            throw FormatError("read_matrix_csv: ragged rows in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw EmptyInputError("read_matrix_csv: empty file " + path.string());
    Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

namespace detail {

inline void write_matrix_pgm(const std::filesystem::path& path, const Matrix& m) {
    std::vector<float> gray(static_cast<size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            gray[static_cast<size_t>(i) * m.cols() + j] =
                clamp01(static_cast<float>((m(i, j) + 1.0) / 2.0));
    write_pgm(path, static_cast<int>(m.rows()), static_cast<int>(m.cols()), gray);
}

}  // namespace detail

// Writes <prefix>_raw.{csv,pgm} and <prefix>_filtered.{csv,pgm} for one
// ordered pair. Returns the computed pair similarity detail.
inline PairSimilarity dump_similarity_matrix(const SimilarityModel& model,
                                             const RegionFeatureMap& fv, const RegionFeatureMap& fu,
                                             const std::filesystem::path& prefix) {
    PairSimilarity ps = score_pair_detail(model, fv, fu, true);
    std::filesystem::path base = prefix;
    write_matrix_csv(base.string() + "_raw.csv", ps.frame_sim);
    detail::write_matrix_pgm(base.string() + "_raw.pgm", ps.frame_sim);
    write_matrix_csv(base.string() + "_filtered.csv", ps.filtered);
    detail::write_matrix_pgm(base.string() + "_filtered.pgm", ps.filtered);
    return ps;
}

// ---------------------------------------------------------------------------
// Retrieval scoring helper: S[i][j] = rescaled similarity of query i against
// candidate j, computed independently per pair.
// ---------------------------------------------------------------------------
inline Matrix score_matrix(const SimilarityModel& model,
                           const std::vector<RegionFeatureMap>& queries,
                           const std::vector<RegionFeatureMap>& candidates) {
    if (queries.empty() || candidates.empty())
        throw EmptyInputError("score_matrix: empty query or candidate set");
    Matrix s(queries.size(), candidates.size());
    parallel_for(queries.size() * candidates.size(), [&](size_t idx) {
        size_t i = idx / candidates.size(), j = idx % candidates.size();
        s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (score_pair(model, queries[i], candidates[j]) + 1.0) / 2.0;
    });
    return s;
}

}  // namespace s2vs
