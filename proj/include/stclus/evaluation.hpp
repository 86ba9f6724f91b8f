#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stclus/geometry.hpp"
#include "stclus/parallel.hpp"
#include "stclus/trajectory.hpp"

namespace stclus {

/// Integer label per trajectory, indexed by TrajId; outliers are -1.
struct LabelVector {
    std::vector<int> labels;
};

/// Symmetric trajectory-level distances with a zero diagonal.
class TrajDistanceMatrix {
public:
    explicit TrajDistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    void set(std::size_t i, std::size_t j, double v) {
        d_[i * n_ + j] = v;
        d_[j * n_ + i] = v;
    }
    std::size_t size() const { return n_; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

/// Trajectory-level distance: mean of the per-interval segment distances.
/// Pure (no cache) so it can run from any thread.
inline double trajectory_distance(TrajId a, TrajId b, const std::vector<SegmentSet>& sets) {
    if (a == b) return 0.0;
    double sum = 0.0;
    for (const SegmentSet& set : sets) {
        sum += segment_distance(set.segments[static_cast<std::size_t>(a)],
                                set.segments[static_cast<std::size_t>(b)]);
    }
    return sum / static_cast<double>(sets.size());
}

inline TrajDistanceMatrix trajectory_distance_matrix(const std::vector<SegmentSet>& sets,
                                                     std::size_t n, int threads = 1) {
    TrajDistanceMatrix mat(n);
    std::vector<std::pair<TrajId, TrajId>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            pairs.emplace_back(static_cast<TrajId>(i), static_cast<TrajId>(j));
        }
    }
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t p) {
        values[p] = trajectory_distance(pairs[p].first, pairs[p].second, sets);
    });
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        mat.set(static_cast<std::size_t>(pairs[p].first),
                static_cast<std::size_t>(pairs[p].second), values[p]);
    }
    return mat;
}

struct SilhouetteResult {
    double mean = 0.0;
    double stdev = 0.0;
    std::vector<double> scores;  // indexed by TrajId; NaN for outliers
};

/// Standard silhouette over non-outlier trajectories: s = (b-a)/max(a,b)
/// with a the mean intra-cluster distance and b the smallest mean distance
/// to another cluster. Empty result when fewer than two clusters exist.
inline std::optional<SilhouetteResult> silhouette(const LabelVector& labels,
                                                  const TrajDistanceMatrix& dmat) {
    const std::size_t n = labels.labels.size();
    if (n != dmat.size()) throw std::invalid_argument("silhouette: size mismatch");

    std::map<int, std::vector<std::size_t>> clusters;
    for (std::size_t i = 0; i < n; ++i) {
        if (labels.labels[i] >= 0) clusters[labels.labels[i]].push_back(i);
    }
    if (clusters.size() < 2) return std::nullopt;

    SilhouetteResult res;
    res.scores.assign(n, std::numeric_limits<double>::quiet_NaN());
    double sum = 0.0, sum_sq = 0.0;
    std::size_t scored = 0;
    for (const auto& [label, members] : clusters) {
        for (std::size_t i : members) {
            double s = 0.0;
            if (members.size() > 1) {
                double intra = 0.0;
                for (std::size_t j : members) {
                    if (j != i) intra += dmat(i, j);
                }
                const double a = intra / static_cast<double>(members.size() - 1);
                double b = std::numeric_limits<double>::infinity();
                for (const auto& [other_label, other_members] : clusters) {
                    if (other_label == label) continue;
                    double inter = 0.0;
                    for (std::size_t j : other_members) inter += dmat(i, j);
                    b = std::min(b, inter / static_cast<double>(other_members.size()));
                }
                const double denom = std::max(a, b);
                s = denom > 0.0 ? (b - a) / denom : 0.0;
            }
            res.scores[i] = s;
            sum += s;
            sum_sq += s * s;
            ++scored;
        }
    }
    res.mean = sum / static_cast<double>(scored);
    const double var = std::max(0.0, sum_sq / static_cast<double>(scored) - res.mean * res.mean);
    res.stdev = std::sqrt(var);
    return res;
}

namespace detail {

struct Contingency {
    std::vector<std::int64_t> cells;  // row-major, rows = pred classes
    std::vector<std::int64_t> row_sums;
    std::vector<std::int64_t> col_sums;
    std::int64_t total = 0;
};

inline Contingency contingency_table(const LabelVector& pred, const LabelVector& truth) {
    if (pred.labels.size() != truth.labels.size()) {
        throw std::invalid_argument("contingency_table: differing universes");
    }
    std::map<int, std::size_t> pred_ix, truth_ix;
    for (int l : pred.labels) pred_ix.emplace(l, 0);
    for (int l : truth.labels) truth_ix.emplace(l, 0);
    std::size_t r = 0;
    for (auto& [l, ix] : pred_ix) ix = r++;
    std::size_t c = 0;
    for (auto& [l, ix] : truth_ix) ix = c++;

    Contingency ct;
    ct.cells.assign(r * c, 0);
    ct.row_sums.assign(r, 0);
    ct.col_sums.assign(c, 0);
    ct.total = static_cast<std::int64_t>(pred.labels.size());
    for (std::size_t i = 0; i < pred.labels.size(); ++i) {
        const std::size_t pi = pred_ix[pred.labels[i]];
        const std::size_t ti = truth_ix[truth.labels[i]];
        ++ct.cells[pi * c + ti];
        ++ct.row_sums[pi];
        ++ct.col_sums[ti];
    }
    return ct;
}

inline double entropy(const std::vector<std::int64_t>& sums, std::int64_t total) {
    double h = 0.0;
    for (std::int64_t s : sums) {
        if (s > 0) {
            const double p = static_cast<double>(s) / static_cast<double>(total);
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace detail

enum class NmiNormalization { ArithmeticMean, MaxEntropy };

/// Normalized mutual information; outlier label -1 counts as its own class.
/// Two single-class partitions score 1 by convention.
inline double nmi(const LabelVector& pred, const LabelVector& truth,
                  NmiNormalization norm = NmiNormalization::ArithmeticMean) {
    const auto ct = detail::contingency_table(pred, truth);
    const double hp = detail::entropy(ct.row_sums, ct.total);
    const double ht = detail::entropy(ct.col_sums, ct.total);
    if (hp == 0.0 && ht == 0.0) return 1.0;

    const double n = static_cast<double>(ct.total);
    double mi = 0.0;
    const std::size_t cols = ct.col_sums.size();
    for (std::size_t i = 0; i < ct.row_sums.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const std::int64_t nij = ct.cells[i * cols + j];
            if (nij > 0) {
                const double pij = static_cast<double>(nij) / n;
                mi += pij * std::log(n * static_cast<double>(nij) /
                                     (static_cast<double>(ct.row_sums[i]) *
                                      static_cast<double>(ct.col_sums[j])));
            }
        }
    }
    const double denom =
        norm == NmiNormalization::ArithmeticMean ? 0.5 * (hp + ht) : std::max(hp, ht);
    return denom > 0.0 ? mi / denom : 0.0;
}

/// Adjusted Rand index (pair-counting, chance-corrected); returns 1 for
/// identical trivial partitions, per the usual convention.
inline double ari(const LabelVector& pred, const LabelVector& truth) {
    const auto ct = detail::contingency_table(pred, truth);
    auto choose2 = [](std::int64_t k) { return static_cast<double>(k) * (k - 1) / 2.0; };
    double sum_cells = 0.0;
    for (std::int64_t v : ct.cells) sum_cells += choose2(v);
    double sum_rows = 0.0;
    for (std::int64_t v : ct.row_sums) sum_rows += choose2(v);
    double sum_cols = 0.0;
    for (std::int64_t v : ct.col_sums) sum_cols += choose2(v);
    const double pairs = choose2(ct.total);
    const double expected = pairs > 0.0 ? sum_rows * sum_cols / pairs : 0.0;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    const double denom = maximum - expected;
    if (denom == 0.0) return 1.0;
    return (sum_cells - expected) / denom;
}

}  // namespace stclus
