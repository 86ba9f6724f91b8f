#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "stclus/prng.hpp"
#include "stclus/trajectory.hpp"

namespace stclus {

/// Crossed-corridor scenario: parallel lanes moving top to bottom, with a
/// contiguous middle group that detours sideways during a window of
/// intervals and then returns.
struct CorridorSpec {
    int n_straight_top = 2;
    int n_deviators = 2;
    int n_straight_bottom = 2;
    int T = 50;
    int deviation_start = 20;  // interval indices; the detour spans
    int deviation_end = 30;    // [start, end] including the two ramps
    double deviation_offset = 6.0;
    double lane_gap = 1.0;
    double jitter = 0.0;  // uniform +-jitter on every coordinate
    std::uint64_t seed = 0;
};

namespace detail {

inline std::string padded_name(const char* prefix, int index, int total) {
    int width = 1;
    for (int v = total - 1; v >= 10; v /= 10) ++width;
    const std::string digits = std::to_string(index);
    std::string out = prefix;
    if (static_cast<int>(digits.size()) < width) {
        out.append(static_cast<std::size_t>(width) - digits.size(), '0');
    }
    out += digits;
    return out;
}

}  // namespace detail

/// Deterministic in the spec: identical output for identical seeds on any
/// platform (SplitMix64 jitter only).
inline std::vector<Trajectory> generate_corridor(const CorridorSpec& spec) {
    if (spec.T < 2) throw std::invalid_argument("generate_corridor: T must be >= 2");
    if (spec.deviation_start >= spec.deviation_end) {
        throw std::invalid_argument("generate_corridor: deviation window is empty");
    }
    if (spec.deviation_start < 1 || spec.deviation_end > spec.T - 1) {
        throw std::invalid_argument("generate_corridor: deviation window out of range");
    }
    if (spec.deviation_offset < 0.0 || spec.lane_gap < 0.0) {
        throw std::invalid_argument("generate_corridor: offsets must be non-negative");
    }
    const int n = spec.n_straight_top + spec.n_deviators + spec.n_straight_bottom;
    if (n < 1) throw std::invalid_argument("generate_corridor: no trajectories requested");

    SplitMix64 rng(spec.seed);
    std::vector<Trajectory> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int lane = 0; lane < n; ++lane) {
        const bool deviates =
            lane >= spec.n_straight_top && lane < spec.n_straight_top + spec.n_deviators;
        Trajectory traj;
        traj.id = lane;
        traj.name = detail::padded_name("t", lane, n);
        traj.positions.reserve(static_cast<std::size_t>(spec.T));
        for (int t = 1; t <= spec.T; ++t) {
            // Positions offset for timestamps (start, end]: the detour ramps
            // over intervals `start` and `end` and is fully offset between.
            const bool offset_now =
                deviates && t > spec.deviation_start && t <= spec.deviation_end;
            double x = static_cast<double>(lane) * spec.lane_gap +
                       (offset_now ? spec.deviation_offset : 0.0);
            double y = -static_cast<double>(t - 1);
            if (spec.jitter > 0.0) {
                x += rng.uniform(-spec.jitter, spec.jitter);
                y += rng.uniform(-spec.jitter, spec.jitter);
            }
            traj.positions.push_back({x, y});
        }
        out.push_back(std::move(traj));
    }
    return out;
}

/// One of the four canonical outlier constructions: a parallel cluster plus
/// a probe trajectory that deviates for a contiguous block of intervals.
/// Case 1: few intervals, large deviation.  Case 2: many, large.
/// Case 3: many, small.                     Case 4: few, small.
struct CaseSpec {
    int case_id = 4;
    int n_cluster_members = 20;
    double deviation_fraction = 0.1;   // of the m = T-1 intervals
    double deviation_magnitude = 1.2;  // in multiples of eps
    int T = 21;
    double jitter_scale = 0.005;  // of eps
    std::uint64_t seed = 0;
};

inline CaseSpec case_spec(int case_id) {
    CaseSpec spec;
    spec.case_id = case_id;
    switch (case_id) {
        case 1:
            spec.deviation_fraction = 0.1;
            spec.deviation_magnitude = 5.0;
            break;
        case 2:
            spec.deviation_fraction = 0.6;
            spec.deviation_magnitude = 5.0;
            break;
        case 3:
            spec.deviation_fraction = 0.6;
            spec.deviation_magnitude = 1.2;
            break;
        case 4:
            spec.deviation_fraction = 0.1;
            spec.deviation_magnitude = 1.2;
            break;
        default:
            throw std::invalid_argument("case_spec: case_id must be in 1..4");
    }
    return spec;
}

struct CaseFixture {
    std::vector<Trajectory> trajectories;  // members first, probe last
    TrajId probe = -1;
    int deviation_first_interval = 0;  // fully offset intervals, inclusive
    int deviation_last_interval = 0;
};

/// Members run as parallel lanes 0.3*eps apart; the probe runs one lane
/// below and shifts away by magnitude*eps for the deviation block. Lane
/// spacing keeps the probe in-cluster outside the block (small-magnitude
/// ramp intervals included) and out of it inside.
inline CaseFixture generate_case(const CaseSpec& spec, double eps) {
    if (spec.case_id < 1 || spec.case_id > 4) {
        throw std::invalid_argument("generate_case: case_id must be in 1..4");
    }
    if (spec.n_cluster_members < 2) {
        throw std::invalid_argument("generate_case: need at least 2 cluster members");
    }
    if (spec.T < 4) throw std::invalid_argument("generate_case: T too small");
    if (spec.deviation_fraction < 0.0 || spec.deviation_fraction > 1.0) {
        throw std::invalid_argument("generate_case: deviation_fraction must be in [0,1]");
    }
    if (eps <= 0.0) throw std::invalid_argument("generate_case: eps must be positive");

    const int m = spec.T - 1;
    const int k_dev = static_cast<int>(std::lround(spec.deviation_fraction * m));
    const double gap = 0.3 * eps;
    const double amp = spec.jitter_scale * eps;
    SplitMix64 rng(spec.seed);

    // Offset positions p..p+k so that exactly k intervals are fully offset,
    // with one ramp interval on each side.
    int p = std::max(2, (m - k_dev) / 2 + 1);
    if (k_dev > 0 && p + k_dev > m) p = m - k_dev;

    CaseFixture fix;
    const int n = spec.n_cluster_members;
    fix.trajectories.reserve(static_cast<std::size_t>(n) + 1);
    for (int lane = 0; lane < n; ++lane) {
        Trajectory traj;
        traj.id = lane;
        traj.name = detail::padded_name("m", lane, n);
        for (int t = 1; t <= spec.T; ++t) {
            double x = static_cast<double>(t - 1);
            double y = static_cast<double>(lane) * gap;
            if (amp > 0.0) {
                x += rng.uniform(-amp, amp);
                y += rng.uniform(-amp, amp);
            }
            traj.positions.push_back({x, y});
        }
        fix.trajectories.push_back(std::move(traj));
    }

    Trajectory probe;
    probe.id = n;
    probe.name = "probe";
    for (int t = 1; t <= spec.T; ++t) {
        const bool offset_now = k_dev > 0 && t >= p && t <= p + k_dev;
        double x = static_cast<double>(t - 1);
        double y = -gap - (offset_now ? spec.deviation_magnitude * eps : 0.0);
        if (amp > 0.0) {
            x += rng.uniform(-amp, amp);
            y += rng.uniform(-amp, amp);
        }
        probe.positions.push_back({x, y});
    }
    fix.probe = probe.id;
    fix.trajectories.push_back(std::move(probe));
    fix.deviation_first_interval = k_dev > 0 ? p : 0;
    fix.deviation_last_interval = k_dev > 0 ? p + k_dev - 1 : 0;
    return fix;
}

}  // namespace stclus
