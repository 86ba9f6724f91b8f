#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stclus/parallel.hpp"
#include "stclus/segment_clustering.hpp"

namespace stclus {

/// A clustering of whole trajectories over some interval range: components
/// of size >= 2 (ordered by smallest member) plus isolated outliers.
struct WholeClustering {
    std::size_t universe = 0;  // number of trajectories
    std::vector<std::vector<TrajId>> clusters;
    std::vector<TrajId> outliers;
};

struct WindowParams {
    int window = 1;  // W, in intervals
    int step = 1;    // S, in intervals
};

struct RangedClustering {
    int start = 1;  // inclusive interval range
    int end = 1;
    WholeClustering clustering;
};

/// Prefix counts of per-interval co-membership for every trajectory pair,
/// shared by all window queries over one history.
class CoMembership {
public:
    explicit CoMembership(const ClusterHistory& history)
        : n_(history.num_trajectories), m_(history.m()) {
        const std::size_t pairs = n_ * (n_ - 1) / 2;
        prefix_.assign(pairs * static_cast<std::size_t>(m_ + 1), 0);
        for (int t = 1; t <= m_; ++t) {
            const auto& assign = history.at(t).cluster_of;
            for (std::size_t i = 0; i + 1 < n_; ++i) {
                const int ci = assign[i];
                for (std::size_t j = i + 1; j < n_; ++j) {
                    const std::size_t p = pair_index(i, j);
                    const std::uint32_t prev = prefix_[cell(p, t - 1)];
                    const bool together = ci >= 0 && ci == assign[j];
                    prefix_[cell(p, t)] = prev + (together ? 1u : 0u);
                }
            }
        }
    }

    /// Number of intervals in [start, end] where i and j share a cluster.
    int count(TrajId i, TrajId j, int start, int end) const {
        if (i == j) return end - start + 1;
        std::size_t ui = static_cast<std::size_t>(i);
        std::size_t uj = static_cast<std::size_t>(j);
        if (ui > uj) std::swap(ui, uj);
        const std::size_t p = pair_index(ui, uj);
        return static_cast<int>(prefix_[cell(p, end)] - prefix_[cell(p, start - 1)]);
    }

    std::size_t universe() const { return n_; }
    int m() const { return m_; }

private:
    std::size_t pair_index(std::size_t i, std::size_t j) const {
        return i * n_ - i * (i + 1) / 2 + (j - i - 1);
    }
    std::size_t cell(std::size_t pair, int t) const {
        return pair * static_cast<std::size_t>(m_ + 1) + static_cast<std::size_t>(t);
    }

    std::size_t n_;
    int m_;
    std::vector<std::uint32_t> prefix_;
};

/// Whole-trajectory clustering over [start, end]: trajectories are linked
/// when their segments share a cluster in every interval of the range;
/// clusters are the connected components of that graph.
inline WholeClustering whole_trajectory_clusters(const CoMembership& co, int start, int end) {
    if (start < 1 || end > co.m() || start > end) {
        throw std::invalid_argument("whole_trajectory_clusters: invalid interval range");
    }
    const std::size_t n = co.universe();
    const int len = end - start + 1;

    std::vector<TrajId> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<TrajId>(i);
    auto find = [&](TrajId x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (co.count(static_cast<TrajId>(i), static_cast<TrajId>(j), start, end) == len) {
                const TrajId ri = find(static_cast<TrajId>(i));
                const TrajId rj = find(static_cast<TrajId>(j));
                if (ri != rj) parent[static_cast<std::size_t>(std::max(ri, rj))] = std::min(ri, rj);
            }
        }
    }

    std::vector<std::vector<TrajId>> groups(n);
    for (std::size_t i = 0; i < n; ++i) {
        groups[static_cast<std::size_t>(find(static_cast<TrajId>(i)))].push_back(
            static_cast<TrajId>(i));
    }
    WholeClustering out;
    out.universe = n;
    for (auto& g : groups) {
        if (g.size() >= 2) {
            out.clusters.push_back(std::move(g));
        } else if (g.size() == 1) {
            out.outliers.push_back(g.front());
        }
    }
    return out;
}

inline WholeClustering whole_trajectory_clusters(const ClusterHistory& history, int start,
                                                 int end) {
    return whole_trajectory_clusters(CoMembership(history), start, end);
}

/// True iff the two clusterings are identical as unordered partitions.
inline bool partitions_equal(const WholeClustering& a, const WholeClustering& b) {
    if (a.universe != b.universe) {
        throw std::invalid_argument("partitions_equal: differing trajectory universes");
    }
    if (a.outliers != b.outliers) return false;  // both sorted ascending
    if (a.clusters.size() != b.clusters.size()) return false;
    auto canon = [](const WholeClustering& w) {
        std::vector<std::vector<TrajId>> cs = w.clusters;
        std::sort(cs.begin(), cs.end());
        return cs;
    };
    return canon(a) == canon(b);
}

/// Window schedule: starts 1, 1+S, ... while start <= m-W+1, each window
/// [i, i+W-1]; if the last full window stops short of m, one clamped window
/// [i, m] is appended so the schedule still reaches the end.
inline std::vector<std::pair<int, int>> window_schedule(int m, const WindowParams& params) {
    if (params.window < 1 || params.window > m) {
        throw std::invalid_argument("window_schedule: need 1 <= W <= m");
    }
    if (params.step < 1) throw std::invalid_argument("window_schedule: need S >= 1");
    std::vector<std::pair<int, int>> windows;
    int i = 1;
    for (; i <= m - params.window + 1; i += params.step) {
        windows.emplace_back(i, i + params.window - 1);
    }
    if (!windows.empty() && windows.back().second < m && i <= m) {
        windows.emplace_back(i, m);
    }
    return windows;
}

/// Sliding-window sub-trajectory clustering. Each window is clustered as a
/// whole-trajectory problem over its range; maximal runs of consecutive
/// windows with identical partitions fuse into one ranged clustering
/// spanning from the first window's start to the last window's end.
inline std::vector<RangedClustering> sub_trajectory_clusters(const ClusterHistory& history,
                                                             const WindowParams& params,
                                                             int threads = 1) {
    const auto windows = window_schedule(history.m(), params);
    const CoMembership co(history);

    std::vector<WholeClustering> per_window(windows.size());
    parallel_for(windows.size(), threads, [&](std::size_t w) {
        per_window[w] = whole_trajectory_clusters(co, windows[w].first, windows[w].second);
    });

    std::vector<RangedClustering> out;
    std::size_t block_start = 0;
    for (std::size_t w = 1; w <= windows.size(); ++w) {
        const bool run_ends =
            w == windows.size() || !partitions_equal(per_window[w - 1], per_window[w]);
        if (run_ends) {
            RangedClustering rc;
            rc.start = windows[block_start].first;
            rc.end = windows[w - 1].second;
            rc.clustering = std::move(per_window[block_start]);
            out.push_back(std::move(rc));
            block_start = w;
        }
    }
    return out;
}

}  // namespace stclus
