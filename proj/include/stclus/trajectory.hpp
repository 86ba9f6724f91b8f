#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "stclus/errors.hpp"
#include "stclus/geometry.hpp"

namespace stclus {

struct TrackSample {
    double t = 0.0;
    Point2 pos;
};

/// A raw GPS track: samples with strictly increasing timestamps.
struct RawTrack {
    std::string name;
    std::vector<TrackSample> samples;
};

/// A preprocessed trajectory: T positions at uniform virtual timestamps
/// 1..T. Every trajectory of a dataset shares the same T.
struct Trajectory {
    TrajId id = -1;
    std::string name;
    std::vector<Point2> positions;
};

/// All segments of one time interval, indexed by TrajId.
struct SegmentSet {
    int interval = 1;  // 1-based
    std::vector<Segment> segments;
};

/// Collapses runs of consecutive samples with identical coordinates to the
/// first occurrence. Order and retained coordinates are untouched.
inline RawTrack deduplicate(const RawTrack& track) {
    RawTrack out;
    out.name = track.name;
    out.samples.reserve(track.samples.size());
    for (const TrackSample& s : track.samples) {
        if (out.samples.empty() || out.samples.back().pos != s.pos) {
            out.samples.push_back(s);
        }
    }
    if (out.samples.size() < 2) {
        throw DegenerateTrack("track '" + track.name + "' has fewer than 2 distinct positions");
    }
    return out;
}

/// Resamples a track to T positions at equally spaced timestamps spanning
/// [t_first, t_last], linearly interpolating between bracketing samples.
/// Endpoints are preserved exactly.
inline Trajectory resample_uniform(const RawTrack& track, int T) {
    if (T < 2) throw std::invalid_argument("resample_uniform: T must be >= 2");
    if (track.samples.size() < 2) {
        throw std::invalid_argument("resample_uniform: track needs at least 2 samples");
    }
    const auto& s = track.samples;
    Trajectory out;
    out.name = track.name;
    out.positions.resize(static_cast<std::size_t>(T));
    out.positions.front() = s.front().pos;
    out.positions.back() = s.back().pos;
    const double t0 = s.front().t;
    const double t1 = s.back().t;
    std::size_t seg = 0;
    for (int k = 1; k < T - 1; ++k) {
        // product-first keeps targets exact on integer-spaced grids
        const double t =
            t0 + ((t1 - t0) * static_cast<double>(k)) / static_cast<double>(T - 1);
        while (seg + 2 < s.size() && s[seg + 1].t <= t) ++seg;
        const double lo = s[seg].t;
        const double hi = s[seg + 1].t;
        const double w = (t - lo) / (hi - lo);
        out.positions[static_cast<std::size_t>(k)] = {
            s[seg].pos.x + w * (s[seg + 1].pos.x - s[seg].pos.x),
            s[seg].pos.y + w * (s[seg + 1].pos.y - s[seg].pos.y)};
    }
    return out;
}

/// Default resample length: median raw sample count, clamped to [2, 512].
inline int default_resample_length(const std::vector<RawTrack>& tracks) {
    if (tracks.empty()) return 2;
    std::vector<std::size_t> counts;
    counts.reserve(tracks.size());
    for (const auto& t : tracks) counts.push_back(t.samples.size());
    std::sort(counts.begin(), counts.end());
    const std::size_t median = counts[counts.size() / 2];
    return static_cast<int>(std::clamp<std::size_t>(median, 2, 512));
}

/// Splits trajectories of uniform length T into m = T-1 per-interval
/// segment sets. Segment k of interval i runs positions[i-1] -> positions[i].
inline std::vector<SegmentSet> segmentize(const std::vector<Trajectory>& trajectories) {
    if (trajectories.empty()) {
        throw std::invalid_argument("segmentize: empty trajectory set");
    }
    const std::size_t T = trajectories.front().positions.size();
    for (const auto& traj : trajectories) {
        if (traj.positions.size() != T) {
            throw std::invalid_argument("segmentize: trajectories have mixed lengths");
        }
    }
    if (T < 2) throw std::invalid_argument("segmentize: trajectories must have length >= 2");

    // Segment sets are indexed by TrajId, so ids must be dense 0..n-1.
    const std::size_t n = trajectories.size();
    std::vector<bool> seen(n, false);
    for (const auto& traj : trajectories) {
        if (traj.id < 0 || static_cast<std::size_t>(traj.id) >= n ||
            seen[static_cast<std::size_t>(traj.id)]) {
            throw std::invalid_argument("segmentize: trajectory ids must be unique and dense");
        }
        seen[static_cast<std::size_t>(traj.id)] = true;
    }

    const int m = static_cast<int>(T) - 1;
    std::vector<SegmentSet> sets(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        SegmentSet& set = sets[static_cast<std::size_t>(i)];
        set.interval = i + 1;
        set.segments.resize(n);
        for (const auto& traj : trajectories) {
            Segment seg;
            seg.traj = traj.id;
            seg.interval = i + 1;
            seg.start = traj.positions[static_cast<std::size_t>(i)];
            seg.end = traj.positions[static_cast<std::size_t>(i) + 1];
            set.segments[static_cast<std::size_t>(traj.id)] = seg;
        }
    }
    return sets;
}

}  // namespace stclus
