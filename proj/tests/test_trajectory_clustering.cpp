#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "stclus/distance_cache.hpp"
#include "stclus/prng.hpp"
#include "stclus/segment_clustering.hpp"
#include "stclus/synthetic.hpp"
#include "stclus/trajectory_clustering.hpp"
#include "support/test_helpers.hpp"

using stclus::ClusterHistory;
using stclus::DbscanParams;
using stclus::DensityClass;
using stclus::DistanceCache;
using stclus::IntervalClustering;
using stclus::SplitMix64;
using stclus::TrajId;
using stclus::WholeClustering;
using stclus::WindowParams;

namespace {

ClusterHistory evolve_trajs(const std::vector<stclus::Trajectory>& trajs,
                            const DbscanParams& params) {
    const auto sets = stclus::segmentize(trajs);
    DistanceCache cache(sets, params.eps);
    return stclus::evolve(sets, cache, params);
}

// History built directly from per-interval member lists; everything not
// listed becomes an outlier.
ClusterHistory history_from_lists(
    std::size_t n, const std::vector<std::vector<std::vector<TrajId>>>& interval_clusters) {
    ClusterHistory history;
    history.num_trajectories = n;
    for (std::size_t t = 0; t < interval_clusters.size(); ++t) {
        IntervalClustering ic;
        ic.interval = static_cast<int>(t) + 1;
        ic.cluster_of.assign(n, -1);
        for (const auto& members : interval_clusters[t]) {
            for (TrajId id : members) {
                ic.cluster_of[static_cast<std::size_t>(id)] =
                    static_cast<int>(ic.clusters.size());
            }
            ic.clusters.push_back({members, DensityClass::Dense});
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (ic.cluster_of[i] < 0) ic.outliers.push_back(static_cast<TrajId>(i));
        }
        history.intervals.push_back(std::move(ic));
    }
    return history;
}

}  // namespace

TEST_CASE("whole clustering over a single interval mirrors that interval") {
    const auto history = history_from_lists(5, {{{0, 1}, {2, 3}}});
    const auto whole = stclus::whole_trajectory_clusters(history, 1, 1);
    REQUIRE(whole.clusters == std::vector<std::vector<TrajId>>{{0, 1}, {2, 3}});
    CHECK(whole.outliers == std::vector<TrajId>{4});
}

TEST_CASE("trajectories co-clustered in every interval share a whole cluster") {
    const auto history = history_from_lists(3, {{{0, 1}}, {{0, 1, 2}}, {{0, 1}}});
    const auto whole = stclus::whole_trajectory_clusters(history, 1, 3);
    REQUIRE(whole.clusters == std::vector<std::vector<TrajId>>{{0, 1}});
    CHECK(whole.outliers == std::vector<TrajId>{2});
}

TEST_CASE("whole clustering rejects empty ranges") {
    const auto history = history_from_lists(2, {{{0, 1}}});
    CHECK_THROWS_AS(stclus::whole_trajectory_clusters(history, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(stclus::whole_trajectory_clusters(history, 2, 2), std::invalid_argument);
}

TEST_CASE("corridor whole clustering finds the three lane groups") {
    const auto history = evolve_trajs(stclus::generate_corridor(stclus::CorridorSpec{}),
                                      DbscanParams{1.5, 2});
    const auto whole = stclus::whole_trajectory_clusters(history, 1, history.m());
    REQUIRE(whole.clusters ==
            std::vector<std::vector<TrajId>>{{0, 1}, {2, 3}, {4, 5}});
    CHECK(whole.outliers.empty());
}

TEST_CASE("whole clustering equals the transitive-closure oracle") {
    SplitMix64 rng(2025);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.uniform_int(2, 15);
        const int T = rng.uniform_int(3, 11);
        const auto history = evolve_trajs(testsupport::random_instance(rng, n, T),
                                          DbscanParams{rng.uniform(0.5, 3.0), 2});
        const int start = rng.uniform_int(1, history.m());
        const int end = rng.uniform_int(start, history.m());
        const auto whole = stclus::whole_trajectory_clusters(history, start, end);
        CHECK(whole.clusters == testsupport::oracle_whole_clusters(history, start, end));
    }
}

TEST_CASE("partition equality is order-free and universe-checked") {
    WholeClustering a{4, {{0, 1}, {2, 3}}, {}};
    WholeClustering b{4, {{2, 3}, {0, 1}}, {}};
    WholeClustering c{4, {{0, 2}, {1, 3}}, {}};
    WholeClustering d{5, {{0, 1}, {2, 3}}, {4}};
    CHECK(stclus::partitions_equal(a, a));
    CHECK(stclus::partitions_equal(a, b));
    CHECK_FALSE(stclus::partitions_equal(a, c));
    CHECK_THROWS_AS(stclus::partitions_equal(a, d), std::invalid_argument);
}

TEST_CASE("window schedule clamps the final window") {
    SECTION("step overshoots: one clamped window finishes the coverage") {
        const auto w = stclus::window_schedule(50, WindowParams{15, 3});
        REQUIRE(w.size() == 13);
        CHECK(w.front() == std::pair<int, int>{1, 15});
        CHECK(w[11] == std::pair<int, int>{34, 48});
        CHECK(w.back() == std::pair<int, int>{37, 50});
    }
    SECTION("exact fit needs no clamped window") {
        const auto w = stclus::window_schedule(15, WindowParams{5, 2});
        REQUIRE(w.size() == 6);
        CHECK(w.front() == std::pair<int, int>{1, 5});
        CHECK(w.back() == std::pair<int, int>{11, 15});
    }
    SECTION("window equal to the horizon is a single window") {
        const auto w = stclus::window_schedule(10, WindowParams{10, 10});
        REQUIRE(w.size() == 1);
        CHECK(w.front() == std::pair<int, int>{1, 10});
    }
    SECTION("invalid parameters are rejected") {
        CHECK_THROWS_AS(stclus::window_schedule(10, WindowParams{11, 1}), std::invalid_argument);
        CHECK_THROWS_AS(stclus::window_schedule(10, WindowParams{0, 1}), std::invalid_argument);
        CHECK_THROWS_AS(stclus::window_schedule(10, WindowParams{5, 0}), std::invalid_argument);
    }
}

TEST_CASE("sub-trajectory fusion") {
    SECTION("constant co-movement fuses into one full-range clustering") {
        std::vector<std::vector<TrajId>> style{{0, 1}, {2, 3}};
        const auto history = history_from_lists(4, std::vector(15, style));
        const auto ranges = stclus::sub_trajectory_clusters(history, WindowParams{5, 2});
        REQUIRE(ranges.size() == 1);
        CHECK(ranges[0].start == 1);
        CHECK(ranges[0].end == 15);
        CHECK(ranges[0].clustering.clusters == style);
    }
    SECTION("two regimes fuse into two ranges") {
        // intervals 1..6 split in pairs, 7..15 one joint cluster: windows
        // 1-3 see the pair partition, windows 4-6 the joint one.
        std::vector<std::vector<std::vector<TrajId>>> lists;
        for (int t = 1; t <= 6; ++t) lists.push_back({{0, 1}, {2, 3}});
        for (int t = 7; t <= 15; ++t) lists.push_back({{0, 1, 2, 3}});
        const auto history = history_from_lists(4, lists);
        const auto ranges = stclus::sub_trajectory_clusters(history, WindowParams{5, 2});
        REQUIRE(ranges.size() == 2);
        CHECK(ranges[0].start == 1);
        CHECK(ranges[0].end == 9);
        CHECK(ranges[0].clustering.clusters ==
              std::vector<std::vector<TrajId>>{{0, 1}, {2, 3}});
        CHECK(ranges[1].start == 7);
        CHECK(ranges[1].end == 15);
        CHECK(ranges[1].clustering.clusters ==
              std::vector<std::vector<TrajId>>{{0, 1, 2, 3}});
    }
    SECTION("single window equals whole clustering of the full range") {
        SplitMix64 rng(88);
        const auto history = evolve_trajs(testsupport::random_instance(rng, 8, 9),
                                          DbscanParams{1.5, 2});
        const auto ranges = stclus::sub_trajectory_clusters(
            history, WindowParams{history.m(), history.m()});
        REQUIRE(ranges.size() == 1);
        CHECK(ranges[0].start == 1);
        CHECK(ranges[0].end == history.m());
        CHECK(stclus::partitions_equal(
            ranges[0].clustering, stclus::whole_trajectory_clusters(history, 1, history.m())));
    }
    SECTION("ranges cover the horizon whenever S <= W") {
        SplitMix64 rng(4711);
        for (int trial = 0; trial < 20; ++trial) {
            const auto history = evolve_trajs(
                testsupport::random_instance(rng, rng.uniform_int(2, 8), rng.uniform_int(4, 16)),
                DbscanParams{rng.uniform(0.5, 2.5), 2});
            const int W = rng.uniform_int(1, history.m());
            const int S = rng.uniform_int(1, W);
            const auto ranges = stclus::sub_trajectory_clusters(history, WindowParams{W, S});
            REQUIRE_FALSE(ranges.empty());
            CHECK(ranges.front().start == 1);
            int covered_to = 0;
            for (const auto& r : ranges) {
                CHECK(r.start <= covered_to + 1);
                covered_to = std::max(covered_to, r.end);
            }
            CHECK(covered_to == history.m());
        }
    }
    SECTION("threaded window evaluation matches serial") {
        SplitMix64 rng(9);
        const auto history = evolve_trajs(testsupport::random_instance(rng, 10, 14),
                                          DbscanParams{1.2, 2});
        const auto serial = stclus::sub_trajectory_clusters(history, WindowParams{4, 2}, 1);
        const auto threaded = stclus::sub_trajectory_clusters(history, WindowParams{4, 2}, 4);
        REQUIRE(serial.size() == threaded.size());
        for (std::size_t i = 0; i < serial.size(); ++i) {
            CHECK(serial[i].start == threaded[i].start);
            CHECK(serial[i].end == threaded[i].end);
            CHECK(stclus::partitions_equal(serial[i].clustering, threaded[i].clustering));
        }
    }
}
