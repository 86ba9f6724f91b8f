#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "stclus/distance_cache.hpp"
#include "stclus/geometry.hpp"
#include "stclus/trajectory.hpp"

namespace stclus {

struct DbscanParams {
    double eps = 1.0;
    int min_lns = 2;
};

enum class DensityClass { Dense, LowDensity };

/// One per-interval cluster: member trajectory ids (sorted ascending) plus a
/// density label. Dense iff the cluster contains at least one core segment.
struct SegmentCluster {
    std::vector<TrajId> members;
    DensityClass density = DensityClass::LowDensity;
};

/// Clustering of one interval's segments. Clusters have >= 2 members;
/// singleton components are outliers. Cluster order: ascending smallest
/// member id. cluster_of maps every traj to its cluster index or -1.
struct IntervalClustering {
    int interval = 1;
    std::vector<SegmentCluster> clusters;
    std::vector<TrajId> outliers;
    std::vector<int> cluster_of;
};

struct ClusterHistory {
    std::vector<IntervalClustering> intervals;
    std::size_t num_trajectories = 0;

    int m() const { return static_cast<int>(intervals.size()); }
    const IntervalClustering& at(int t) const {
        return intervals[static_cast<std::size_t>(t - 1)];
    }
};

/// Ids of all segments in the pool within the cache's eps of `id`, itself
/// included.
inline std::vector<TrajId> neighborhood(const SegmentSet& pool, TrajId id, DistanceCache& cache) {
    std::vector<TrajId> out;
    for (std::size_t j = 0; j < pool.segments.size(); ++j) {
        const TrajId other = static_cast<TrajId>(j);
        if (other == id || cache.within_eps(pool.interval, id, other)) {
            out.push_back(other);
        }
    }
    return out;
}

/// Core segment: at least min_lns segments (itself included) within eps.
inline bool is_core(const SegmentSet& pool, TrajId id, DistanceCache& cache,
                    const DbscanParams& params) {
    int count = 0;
    for (std::size_t j = 0; j < pool.segments.size(); ++j) {
        const TrajId other = static_cast<TrajId>(j);
        if (other == id || cache.within_eps(pool.interval, id, other)) {
            if (++count >= params.min_lns) return true;
        }
    }
    return count >= params.min_lns;
}

namespace detail {

// Density label of a member set. Since eps-graph components are closed
// under neighborhoods, counting neighbors inside the component is identical
// to counting them in the whole pool.
inline DensityClass density_of(const std::vector<TrajId>& members, int interval,
                               DistanceCache& cache, const DbscanParams& params) {
    for (TrajId i : members) {
        int count = 0;
        for (TrajId j : members) {
            if (i == j || cache.within_eps(interval, i, j)) {
                if (++count >= params.min_lns) return DensityClass::Dense;
            }
        }
    }
    return DensityClass::LowDensity;
}

// Connected components of the eps-graph restricted to `ids`, each sorted,
// ordered by smallest member. BFS seeded in ascending id order.
inline std::vector<std::vector<TrajId>> eps_components(const std::vector<TrajId>& ids,
                                                       int interval, DistanceCache& cache) {
    std::vector<TrajId> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::vector<TrajId>> components;
    std::vector<bool> visited(sorted.size(), false);
    for (std::size_t s = 0; s < sorted.size(); ++s) {
        if (visited[s]) continue;
        std::vector<std::size_t> queue{s};
        visited[s] = true;
        std::vector<TrajId> comp;
        while (!queue.empty()) {
            const std::size_t u = queue.back();
            queue.pop_back();
            comp.push_back(sorted[u]);
            for (std::size_t v = 0; v < sorted.size(); ++v) {
                if (!visited[v] && cache.within_eps(interval, sorted[u], sorted[v])) {
                    visited[v] = true;
                    queue.push_back(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        components.push_back(std::move(comp));
    }
    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return components;
}

inline IntervalClustering finalize_interval(int interval, std::vector<SegmentCluster> candidates,
                                            std::size_t n) {
    IntervalClustering out;
    out.interval = interval;
    std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
        return a.members.front() < b.members.front();
    });
    for (auto& c : candidates) {
        if (c.members.size() >= 2) {
            out.clusters.push_back(std::move(c));
        } else {
            out.outliers.push_back(c.members.front());
        }
    }
    std::sort(out.outliers.begin(), out.outliers.end());
    out.cluster_of.assign(n, -1);
    for (std::size_t k = 0; k < out.clusters.size(); ++k) {
        for (TrajId id : out.clusters[k].members) {
            out.cluster_of[static_cast<std::size_t>(id)] = static_cast<int>(k);
        }
    }
    return out;
}

}  // namespace detail

/// Fresh DBSCAN of one interval: clusters are the eps-graph connected
/// components with >= 2 members, labeled Dense when they contain a core
/// segment; singleton components become outliers.
inline IntervalClustering dbscan_initial(const SegmentSet& pool, DistanceCache& cache,
                                         const DbscanParams& params) {
    if (pool.segments.empty()) {
        throw std::invalid_argument("dbscan_initial: empty segment set");
    }
    std::vector<TrajId> ids(pool.segments.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TrajId>(i);
    std::vector<SegmentCluster> candidates;
    for (auto& comp : detail::eps_components(ids, pool.interval, cache)) {
        SegmentCluster c;
        c.density = detail::density_of(comp, pool.interval, cache, params);
        c.members = std::move(comp);
        candidates.push_back(std::move(c));
    }
    return detail::finalize_interval(pool.interval, std::move(candidates), pool.segments.size());
}

/// Re-clusters the members of one previous-interval cluster against the
/// current interval: connected components of the eps-graph restricted to
/// those members. Singletons come back as LowDensity singletons so the
/// merge phase can pick them up.
inline std::vector<SegmentCluster> split(const std::vector<TrajId>& prev_members,
                                         const SegmentSet& pool, DistanceCache& cache,
                                         const DbscanParams& params) {
    if (prev_members.empty()) {
        throw std::invalid_argument("split: empty member set");
    }
    std::vector<SegmentCluster> out;
    for (auto& comp : detail::eps_components(prev_members, pool.interval, cache)) {
        SegmentCluster c;
        c.density = comp.size() >= 2 ? detail::density_of(comp, pool.interval, cache, params)
                                     : DensityClass::LowDensity;
        c.members = std::move(comp);
        out.push_back(std::move(c));
    }
    return out;
}

/// Bounding-box prefilter for merge: true iff the clusters' endpoint boxes,
/// each inflated by eps, intersect. Never false when a merging pair exists.
inline bool is_mergeable(const SegmentCluster& c1, const SegmentCluster& c2,
                         const SegmentSet& pool, const DbscanParams& params) {
    struct Box {
        double min_x, min_y, max_x, max_y;
    };
    auto box_of = [&](const SegmentCluster& c) {
        Box b{1e300, 1e300, -1e300, -1e300};
        for (TrajId id : c.members) {
            const Segment& s = pool.segments[static_cast<std::size_t>(id)];
            for (const Point2& p : {s.start, s.end}) {
                b.min_x = std::min(b.min_x, p.x);
                b.min_y = std::min(b.min_y, p.y);
                b.max_x = std::max(b.max_x, p.x);
                b.max_y = std::max(b.max_y, p.y);
            }
        }
        return b;
    };
    const Box a = box_of(c1);
    const Box b = box_of(c2);
    const double eps = params.eps;
    return a.min_x - eps <= b.max_x + eps && b.min_x - eps <= a.max_x + eps &&
           a.min_y - eps <= b.max_y + eps && b.min_y - eps <= a.max_y + eps;
}

/// Merges two disjoint clusters if any cross pair is within eps; pairs are
/// scanned in ascending id order and the scan stops at the first hit.
/// Density of the union is recomputed. Empty result means no pair qualified.
inline std::optional<SegmentCluster> merge(const SegmentCluster& c1, const SegmentCluster& c2,
                                           const SegmentSet& pool, DistanceCache& cache,
                                           const DbscanParams& params) {
    bool linked = false;
    for (TrajId i : c1.members) {
        for (TrajId j : c2.members) {
            if (cache.within_eps(pool.interval, i, j)) {
                linked = true;
                break;
            }
        }
        if (linked) break;
    }
    if (!linked) return std::nullopt;
    SegmentCluster out;
    out.members.reserve(c1.members.size() + c2.members.size());
    std::merge(c1.members.begin(), c1.members.end(), c2.members.begin(), c2.members.end(),
               std::back_inserter(out.members));
    out.density = detail::density_of(out.members, pool.interval, cache, params);
    return out;
}

/// Evolves the clustering across all intervals: fresh DBSCAN on the first,
/// then split of every prior cluster followed by merging to a fixed point.
/// Prior outliers enter the merge phase as singleton candidates only.
inline ClusterHistory evolve(const std::vector<SegmentSet>& sets, DistanceCache& cache,
                             const DbscanParams& params) {
    if (sets.empty()) {
        throw std::invalid_argument("evolve: empty segment set sequence");
    }
    ClusterHistory history;
    history.num_trajectories = sets.front().segments.size();
    history.intervals.reserve(sets.size());
    history.intervals.push_back(dbscan_initial(sets.front(), cache, params));

    for (std::size_t t = 1; t < sets.size(); ++t) {
        const SegmentSet& pool = sets[t];
        const IntervalClustering& prev = history.intervals.back();

        std::vector<SegmentCluster> candidates;
        for (const SegmentCluster& c : prev.clusters) {
            for (auto& piece : split(c.members, pool, cache, params)) {
                candidates.push_back(std::move(piece));
            }
        }
        for (TrajId id : prev.outliers) {
            candidates.push_back(SegmentCluster{{id}, DensityClass::LowDensity});
        }
        std::sort(candidates.begin(), candidates.end(), [](const auto& a, const auto& b) {
            return a.members.front() < b.members.front();
        });

        // Merge rounds until no pair joins. One merge can enable another,
        // so iterate to the fixed point.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::size_t i = 0; i + 1 < candidates.size(); ++i) {
                for (std::size_t j = i + 1; j < candidates.size();) {
                    if (is_mergeable(candidates[i], candidates[j], pool, params)) {
                        if (auto merged = merge(candidates[i], candidates[j], pool, cache, params)) {
                            candidates[i] = std::move(*merged);
                            candidates.erase(candidates.begin() +
                                             static_cast<std::ptrdiff_t>(j));
                            changed = true;
                            continue;
                        }
                    }
                    ++j;
                }
            }
        }

        history.intervals.push_back(detail::finalize_interval(
            pool.interval, std::move(candidates), pool.segments.size()));
    }
    return history;
}

}  // namespace stclus
