#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stclus/distance_cache.hpp"
#include "stclus/evaluation.hpp"
#include "stclus/segment_clustering.hpp"
#include "stclus/trajectory_clustering.hpp"

namespace stclus {

/// Per-interval record of an (outlier, member) comparison: the adjusted
/// distance after discounting the outlier's deviation from the cluster.
struct DeviationRecord {
    int interval = 1;
    bool in_cluster = false;  // outlier and member share a segment cluster
    double distance = 0.0;    // adjusted; equals the raw distance in-cluster
    double delta = 0.0;       // deviation discount, 0 when in-cluster
};

using DeviationProfile = std::vector<DeviationRecord>;

struct OutlierDecision {
    TrajId outlier = -1;
    TrajId best_member = -1;
    double lmd = 0.0;  // summed shortfall of raw distances below the threshold
    double rmd = 0.0;  // summed excess of raw distances above the threshold
    bool absorbed = false;
};

struct StabilityReport {
    int cluster_id = -1;
    double mu_min = 0.0;
    std::vector<OutlierDecision> outliers;
};

enum class MuMinScope { PerCluster, Global };

struct StabilizeOptions {
    MuMinScope scope = MuMinScope::PerCluster;
};

/// Deviation discount for one outlier in one interval: how far its segment
/// sits beyond eps from the nearest member segment of the cluster (0 when
/// it reaches the cluster).
inline double deviation_delta(TrajId outlier, const std::vector<TrajId>& cluster_members, int t,
                              DistanceCache& cache) {
    double nearest = std::numeric_limits<double>::infinity();
    for (TrajId g : cluster_members) {
        nearest = std::min(nearest, cache.distance(t, outlier, g));
    }
    return std::max(0.0, nearest - cache.eps());
}

/// Per-interval adjusted distances between an outlier and one cluster
/// member. Where the two share a segment cluster the raw distance stands;
/// elsewhere the outlier's deviation is discounted first.
inline DeviationProfile adjusted_distance_series(TrajId outlier, TrajId member,
                                                 const std::vector<TrajId>& cluster_members,
                                                 const ClusterHistory& history,
                                                 DistanceCache& cache) {
    if (std::find(cluster_members.begin(), cluster_members.end(), member) ==
        cluster_members.end()) {
        throw std::invalid_argument("adjusted_distance_series: member not in cluster");
    }
    DeviationProfile profile;
    profile.reserve(static_cast<std::size_t>(history.m()));
    for (int t = 1; t <= history.m(); ++t) {
        const auto& assign = history.at(t).cluster_of;
        DeviationRecord rec;
        rec.interval = t;
        const int co = assign[static_cast<std::size_t>(outlier)];
        rec.in_cluster = co >= 0 && co == assign[static_cast<std::size_t>(member)];
        const double raw = cache.distance(t, outlier, member);
        if (rec.in_cluster) {
            rec.delta = 0.0;
            rec.distance = raw;
        } else {
            rec.delta = deviation_delta(outlier, cluster_members, t, cache);
            rec.distance = std::max(0.0, raw - rec.delta);
        }
        profile.push_back(rec);
    }
    return profile;
}

/// Maximum adjusted distance of a profile: the smallest threshold at which
/// the outlier would pass as a member of this pair's cluster.
inline double pair_max(const DeviationProfile& profile) {
    if (profile.empty()) throw std::invalid_argument("pair_max: empty profile");
    double max_d = 0.0;
    for (const DeviationRecord& rec : profile) max_d = std::max(max_d, rec.distance);
    return max_d;
}

/// Minimum over (outlier, member) pairs of the per-pair maximum adjusted
/// distance. Empty when the cluster has no assigned outliers.
inline std::optional<double> mu_min(const std::vector<TrajId>& cluster_members,
                                    const std::vector<TrajId>& outliers,
                                    const ClusterHistory& history, DistanceCache& cache) {
    if (cluster_members.empty()) throw std::invalid_argument("mu_min: empty cluster");
    if (outliers.empty()) return std::nullopt;
    double mu = std::numeric_limits<double>::infinity();
    for (TrajId o : outliers) {
        for (TrajId g : cluster_members) {
            mu = std::min(mu, pair_max(adjusted_distance_series(o, g, cluster_members, history,
                                                                cache)));
        }
    }
    return mu;
}

/// Sums of raw-distance deviations below (LMD) and above (RMD) the
/// threshold, over all intervals; distances equal to mu count for neither.
inline std::pair<double, double> lmd_rmd(TrajId outlier, TrajId member, double mu,
                                         const ClusterHistory& history, DistanceCache& cache) {
    if (!std::isfinite(mu)) throw std::invalid_argument("lmd_rmd: non-finite threshold");
    double lmd = 0.0, rmd = 0.0;
    for (int t = 1; t <= history.m(); ++t) {
        const double d = cache.distance(t, outlier, member);
        if (d < mu) {
            lmd += mu - d;
        } else if (d > mu) {
            rmd += d - mu;
        }
    }
    return {lmd, rmd};
}

/// Mean absolute deviation of the pair's raw distances from their mean;
/// report enrichment only, no decision rides on it.
inline double mean_absolute_deviation(TrajId outlier, TrajId member, const ClusterHistory& history,
                                      DistanceCache& cache) {
    const int m = history.m();
    double mean = 0.0;
    for (int t = 1; t <= m; ++t) mean += cache.distance(t, outlier, member);
    mean /= static_cast<double>(m);
    double mad = 0.0;
    for (int t = 1; t <= m; ++t) mad += std::abs(mean - cache.distance(t, outlier, member));
    return mad / static_cast<double>(m);
}

/// Mean over intervals of the outlier's minimum distance to any cluster
/// member; the assignment score used to pick each outlier's candidate
/// cluster.
inline double mean_min_distance(TrajId outlier, const std::vector<TrajId>& cluster_members,
                                const ClusterHistory& history, DistanceCache& cache) {
    double sum = 0.0;
    for (int t = 1; t <= history.m(); ++t) {
        double nearest = std::numeric_limits<double>::infinity();
        for (TrajId g : cluster_members) {
            nearest = std::min(nearest, cache.distance(t, outlier, g));
        }
        sum += nearest;
    }
    return sum / static_cast<double>(history.m());
}

/// Candidate clusters per outlier: the argmin set of mean_min_distance.
/// Ties are kept so the caller can arbitrate.
inline std::vector<std::vector<int>> assign_outliers(const WholeClustering& whole,
                                                     const ClusterHistory& history,
                                                     DistanceCache& cache) {
    std::vector<std::vector<int>> candidates(whole.outliers.size());
    for (std::size_t oi = 0; oi < whole.outliers.size(); ++oi) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < whole.clusters.size(); ++k) {
            const double score =
                mean_min_distance(whole.outliers[oi], whole.clusters[k], history, cache);
            if (score < best) {
                best = score;
                candidates[oi].clear();
            }
            if (score == best) candidates[oi].push_back(static_cast<int>(k));
        }
    }
    return candidates;
}

namespace detail {

inline LabelVector labels_of(const WholeClustering& whole) {
    LabelVector lv;
    lv.labels.assign(whole.universe, -1);
    for (std::size_t k = 0; k < whole.clusters.size(); ++k) {
        for (TrajId id : whole.clusters[k]) {
            lv.labels[static_cast<std::size_t>(id)] = static_cast<int>(k);
        }
    }
    return lv;
}

}  // namespace detail

/// The stability pass: reabsorbs outlier trajectories whose deviations are
/// transient and small. Each outlier is assigned to its nearest cluster,
/// the cluster's threshold mu_min is taken over its assigned pairs, and the
/// outlier joins at the first member whose below-threshold deviation sum
/// exceeds the above-threshold one. Clusters are never created or removed.
inline std::pair<WholeClustering, std::vector<StabilityReport>> stabilize(
    const WholeClustering& whole, const ClusterHistory& history, DistanceCache& cache,
    const StabilizeOptions& options = {}, const std::vector<SegmentSet>* sets_for_arbitration =
                                              nullptr) {
    if (whole.outliers.empty() || whole.clusters.empty()) {
        return {whole, {}};
    }

    const auto candidates = assign_outliers(whole, history, cache);

    // Pools of assigned outliers per cluster; tied outliers sit in every
    // candidate pool until arbitration.
    std::vector<std::vector<TrajId>> pool(whole.clusters.size());
    for (std::size_t oi = 0; oi < whole.outliers.size(); ++oi) {
        for (int k : candidates[oi]) {
            pool[static_cast<std::size_t>(k)].push_back(whole.outliers[oi]);
        }
    }

    std::vector<std::optional<double>> mu(whole.clusters.size());
    for (std::size_t k = 0; k < whole.clusters.size(); ++k) {
        mu[k] = mu_min(whole.clusters[k], pool[k], history, cache);
    }
    if (options.scope == MuMinScope::Global) {
        double global = std::numeric_limits<double>::infinity();
        for (const auto& v : mu) {
            if (v) global = std::min(global, *v);
        }
        for (auto& v : mu) {
            if (v) v = global;
        }
    }

    // Absorption decisions against the pre-pass state: scan members in
    // ascending id order and stop at the first absorbing one.
    auto decide = [&](TrajId outlier, std::size_t k) {
        OutlierDecision d;
        d.outlier = outlier;
        double best_pair_max = std::numeric_limits<double>::infinity();
        for (TrajId member : whole.clusters[k]) {
            const auto [lmd, rmd] = lmd_rmd(outlier, member, *mu[k], history, cache);
            if (lmd > rmd) {
                d.best_member = member;
                d.lmd = lmd;
                d.rmd = rmd;
                d.absorbed = true;
                return d;
            }
        }
        // Not absorbable: report against the closest member by pair maximum.
        for (TrajId member : whole.clusters[k]) {
            const double pm = pair_max(
                adjusted_distance_series(outlier, member, whole.clusters[k], history, cache));
            if (pm < best_pair_max) {
                best_pair_max = pm;
                d.best_member = member;
            }
        }
        const auto [lmd, rmd] = lmd_rmd(outlier, d.best_member, *mu[k], history, cache);
        d.lmd = lmd;
        d.rmd = rmd;
        d.absorbed = false;
        return d;
    };

    std::vector<std::optional<std::size_t>> placement(whole.outliers.size());
    std::vector<std::vector<OutlierDecision>> decisions(whole.clusters.size());
    for (std::size_t oi = 0; oi < whole.outliers.size(); ++oi) {
        std::vector<std::pair<std::size_t, OutlierDecision>> absorbable;
        std::vector<std::pair<std::size_t, OutlierDecision>> all;
        for (int k : candidates[oi]) {
            auto d = decide(whole.outliers[oi], static_cast<std::size_t>(k));
            all.emplace_back(static_cast<std::size_t>(k), d);
            if (d.absorbed) absorbable.emplace_back(static_cast<std::size_t>(k), d);
        }
        std::optional<std::size_t> chosen;
        if (absorbable.size() == 1) {
            chosen = absorbable.front().first;
        } else if (absorbable.size() > 1) {
            // Assignment tie absorbable in several clusters: place where the
            // silhouette of the resulting clustering suffers least.
            chosen = absorbable.front().first;
            if (sets_for_arbitration != nullptr) {
                double best_score = -std::numeric_limits<double>::infinity();
                const auto dmat =
                    trajectory_distance_matrix(*sets_for_arbitration, whole.universe);
                for (const auto& [k, d] : absorbable) {
                    LabelVector lv = detail::labels_of(whole);
                    lv.labels[static_cast<std::size_t>(whole.outliers[oi])] =
                        static_cast<int>(k);
                    const auto sil = silhouette(lv, dmat);
                    const double score = sil ? sil->mean : 0.0;
                    if (score > best_score) {
                        best_score = score;
                        chosen = k;
                    }
                }
            }
        }
        placement[oi] = chosen;
        for (auto& [k, d] : all) {
            d.absorbed = chosen.has_value() && *chosen == k;
            decisions[k].push_back(d);
        }
    }

    WholeClustering result;
    result.universe = whole.universe;
    result.clusters = whole.clusters;
    for (std::size_t oi = 0; oi < whole.outliers.size(); ++oi) {
        if (placement[oi]) {
            auto& members = result.clusters[*placement[oi]];
            members.insert(std::upper_bound(members.begin(), members.end(), whole.outliers[oi]),
                           whole.outliers[oi]);
        } else {
            result.outliers.push_back(whole.outliers[oi]);
        }
    }

    std::vector<StabilityReport> reports;
    for (std::size_t k = 0; k < whole.clusters.size(); ++k) {
        if (!mu[k]) continue;
        StabilityReport rep;
        rep.cluster_id = static_cast<int>(k);
        rep.mu_min = *mu[k];
        rep.outliers = std::move(decisions[k]);
        reports.push_back(std::move(rep));
    }
    return {std::move(result), std::move(reports)};
}

}  // namespace stclus
