#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "stclus/geometry.hpp"
#include "stclus/trajectory.hpp"

namespace stclus {

/// Memoized pairwise segment distances per interval. Split, merge and the
/// stability pass all draw from the same store, and threshold queries can
/// settle via the endpoint pre-check without evaluating the integral.
///
/// Lazy and single-threaded by design: every numeric value is produced by
/// the same code path regardless of query order, which keeps pipeline
/// output byte-identical across thread counts.
class DistanceCache {
public:
    DistanceCache(const std::vector<SegmentSet>& sets, double eps, bool use_fast_path = true)
        : sets_(&sets),
          eps_(eps),
          fast_path_(use_fast_path),
          n_(sets.empty() ? 0 : sets.front().segments.size()),
          values_(sets.size()),
          states_(sets.size()) {}

    // The cache refers to the segment sets; a temporary would dangle.
    DistanceCache(std::vector<SegmentSet>&&, double, bool = true) = delete;

    double eps() const { return eps_; }
    std::size_t num_trajectories() const { return n_; }
    int num_intervals() const { return static_cast<int>(sets_->size()); }
    void set_fast_path(bool on) { fast_path_ = on; }

    /// Exact average Euclidean distance between the segments of trajectories
    /// i and j at 1-based interval t.
    double distance(int t, TrajId i, TrajId j) {
        if (i == j) return 0.0;
        const std::size_t idx = pair_index(t, i, j);
        auto& states = states_[static_cast<std::size_t>(t - 1)];
        auto& values = values_[static_cast<std::size_t>(t - 1)];
        if (states[idx] != State::Value) {
            values[idx] = segment_distance(seg(t, i), seg(t, j));
            states[idx] = State::Value;
            ++integrals_;
        }
        return values[idx];
    }

    /// Threshold query: is the pair within eps? May answer via the endpoint
    /// fast path without producing the numeric distance.
    bool within_eps(int t, TrajId i, TrajId j) {
        if (i == j) return true;
        const std::size_t idx = pair_index(t, i, j);
        auto& states = states_[static_cast<std::size_t>(t - 1)];
        auto& values = values_[static_cast<std::size_t>(t - 1)];
        if (states[idx] == State::Value) return values[idx] <= eps_;
        if (states[idx] == State::WithinEps) return true;
        if (fast_path_ &&
            endpoint_fast_path(seg(t, i), seg(t, j), eps_) == FastPath::Neighbor) {
            states[idx] = State::WithinEps;
            ++fast_path_hits_;
            return true;
        }
        values[idx] = segment_distance(seg(t, i), seg(t, j));
        states[idx] = State::Value;
        ++integrals_;
        return values[idx] <= eps_;
    }

    const Segment& seg(int t, TrajId i) const {
        return (*sets_)[static_cast<std::size_t>(t - 1)].segments[static_cast<std::size_t>(i)];
    }

    std::uint64_t integrals_computed() const { return integrals_; }
    std::uint64_t fast_path_hits() const { return fast_path_hits_; }

private:
    enum class State : std::uint8_t { Unknown = 0, WithinEps = 1, Value = 2 };

    std::size_t pair_index(int t, TrajId i, TrajId j) {
        if (i > j) std::swap(i, j);
        auto& values = values_[static_cast<std::size_t>(t - 1)];
        auto& states = states_[static_cast<std::size_t>(t - 1)];
        if (values.empty()) {
            values.resize(n_ * (n_ - 1) / 2, 0.0);
            states.resize(values.size(), State::Unknown);
        }
        const std::size_t ui = static_cast<std::size_t>(i);
        const std::size_t uj = static_cast<std::size_t>(j);
        return ui * n_ - ui * (ui + 1) / 2 + (uj - ui - 1);
    }

    const std::vector<SegmentSet>* sets_;
    double eps_;
    bool fast_path_;
    std::size_t n_;
    std::vector<std::vector<double>> values_;
    std::vector<std::vector<State>> states_;
    std::uint64_t integrals_ = 0;
    std::uint64_t fast_path_hits_ = 0;
};

}  // namespace stclus
