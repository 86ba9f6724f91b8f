#include <catch2/catch_amalgamated.hpp>

#include <memory>
#include <vector>

#include "stclus/distance_cache.hpp"
#include "stclus/segment_clustering.hpp"
#include "stclus/stability.hpp"
#include "stclus/synthetic.hpp"
#include "stclus/trajectory_clustering.hpp"
#include "support/test_helpers.hpp"

using stclus::ClusterHistory;
using stclus::DbscanParams;
using stclus::DistanceCache;
using stclus::SegmentSet;
using stclus::TrajId;
using stclus::WholeClustering;
using testsupport::line_trajectory;

namespace {

// The cache points at the segment-set vector, so the vector lives behind a
// unique_ptr to keep its address stable when a Scene moves.
struct Scene {
    std::unique_ptr<std::vector<SegmentSet>> sets;
    ClusterHistory history;
    WholeClustering whole;
    std::unique_ptr<DistanceCache> cache;
};

Scene build_scene(const std::vector<stclus::Trajectory>& trajs, const DbscanParams& params) {
    Scene scene;
    scene.sets = std::make_unique<std::vector<SegmentSet>>(stclus::segmentize(trajs));
    scene.cache = std::make_unique<DistanceCache>(*scene.sets, params.eps);
    scene.history = stclus::evolve(*scene.sets, *scene.cache, params);
    scene.whole = stclus::whole_trajectory_clusters(scene.history, 1, scene.history.m());
    return scene;
}

// A trajectory running along +x at y = base, displaced to base - offset for
// timestamps in [from, to] (1-based, inclusive).
stclus::Trajectory lane_with_dip(TrajId id, double base, double offset, int from, int to, int T) {
    stclus::Trajectory traj;
    traj.id = id;
    traj.name = "t" + std::to_string(id);
    for (int t = 1; t <= T; ++t) {
        const bool dipped = t >= from && t <= to;
        traj.positions.push_back({static_cast<double>(t - 1), base - (dipped ? offset : 0.0)});
    }
    return traj;
}

}  // namespace

TEST_CASE("adjusted distances reduce to raw distances while co-clustered") {
    const DbscanParams params{1.0, 2};
    auto scene = build_scene({line_trajectory(0, 0, 0, 1, 0, 8), line_trajectory(1, 0, 0.5, 1, 0, 8)},
                             params);
    const auto profile =
        stclus::adjusted_distance_series(1, 0, {0}, scene.history, *scene.cache);
    REQUIRE(profile.size() == 7);
    for (const auto& rec : profile) {
        CHECK(rec.in_cluster);
        CHECK(rec.delta == 0.0);
        CHECK(rec.distance == 0.5);
    }
}

TEST_CASE("a dip of exactly eps keeps the pair co-clustered: no deviation") {
    // Offset lane sits exactly eps away during the dip; boundary-inclusive
    // neighborhoods keep it in the cluster, so every delta stays zero.
    const DbscanParams params{2.0, 2};
    auto scene = build_scene({line_trajectory(0, 0, 0, 1, 0, 10),
                              lane_with_dip(1, 0, 2.0, 4, 6, 10)},
                             params);
    CHECK(scene.whole.outliers.empty());
    const auto profile =
        stclus::adjusted_distance_series(1, 0, {0}, scene.history, *scene.cache);
    for (const auto& rec : profile) {
        CHECK(rec.in_cluster);
        CHECK(rec.delta == 0.0);
    }
}

TEST_CASE("transient deviation yields exact hand-computed deltas") {
    // Probe rides on top of member 0 and dips by 1.5*eps for two full
    // intervals; the ramps average 0.75*eps and stay in-cluster.
    const double eps = 2.0;
    const DbscanParams params{eps, 2};
    const int T = 21;
    auto scene = build_scene({line_trajectory(0, 0, 0, 1, 0, T),
                              line_trajectory(1, 0, 0.6, 1, 0, T),
                              lane_with_dip(2, 0, 1.5 * eps, 10, 12, T)},
                             params);
    REQUIRE(scene.whole.clusters == std::vector<std::vector<TrajId>>{{0, 1}});
    REQUIRE(scene.whole.outliers == std::vector<TrajId>{2});

    const auto profile =
        stclus::adjusted_distance_series(2, 0, {0, 1}, scene.history, *scene.cache);
    REQUIRE(profile.size() == 20);
    for (const auto& rec : profile) {
        const bool deviating = rec.interval == 10 || rec.interval == 11;
        CHECK(rec.in_cluster == !deviating);
        if (deviating) {
            CHECK(rec.delta == 0.5 * eps);       // 1.5*eps beyond the nearest member
            CHECK(rec.distance == eps);          // raw 3.0 minus delta 1.0
        } else {
            CHECK(rec.delta == 0.0);
            const bool ramp = rec.interval == 9 || rec.interval == 12;
            CHECK(rec.distance == (ramp ? 0.75 * eps : 0.0));
        }
    }
    CHECK(stclus::pair_max(profile) == eps);
}

TEST_CASE("pair max over explicit profiles") {
    stclus::DeviationProfile zeros{{1, true, 0.0, 0.0}, {2, true, 0.0, 0.0}};
    CHECK(stclus::pair_max(zeros) == 0.0);
    stclus::DeviationProfile mixed{{1, true, 1.0, 0.0}, {2, true, 3.0, 0.0}, {3, true, 2.0, 0.0}};
    CHECK(stclus::pair_max(mixed) == 3.0);
    CHECK_THROWS_AS(stclus::pair_max(stclus::DeviationProfile{}), std::invalid_argument);
}

TEST_CASE("mu_min minimizes the pair maxima over members") {
    // Cluster chain: member 1 at y=0, member 0 at y=2 (eps 2.5 keeps them
    // joined); outlier at y=-1.5 dips once by 2.0. Pair maxima come out as
    // 2.5 (vs nearest member) and 4.5 (vs the far one).
    const double eps = 2.5;
    const DbscanParams params{eps, 2};
    const int T = 10;
    auto scene = build_scene({line_trajectory(0, 0, 2.0, 1, 0, T),
                              line_trajectory(1, 0, 0.0, 1, 0, T),
                              lane_with_dip(2, -1.5, 2.0, 5, 6, T)},
                             params);
    REQUIRE(scene.whole.clusters == std::vector<std::vector<TrajId>>{{0, 1}});
    REQUIRE(scene.whole.outliers == std::vector<TrajId>{2});

    const auto vs_near =
        stclus::adjusted_distance_series(2, 1, {0, 1}, scene.history, *scene.cache);
    const auto vs_far =
        stclus::adjusted_distance_series(2, 0, {0, 1}, scene.history, *scene.cache);
    CHECK(stclus::pair_max(vs_near) == 2.5);
    CHECK(stclus::pair_max(vs_far) == 4.5);

    const auto mu = stclus::mu_min({0, 1}, {2}, scene.history, *scene.cache);
    REQUIRE(mu.has_value());
    CHECK(*mu == 2.5);

    CHECK_FALSE(stclus::mu_min({0, 1}, {}, scene.history, *scene.cache).has_value());
}

TEST_CASE("deviation sums split raw distances around the threshold") {
    const DbscanParams params{2.0, 2};
    SECTION("constant distance equal to mu contributes to neither side") {
        auto scene = build_scene(
            {line_trajectory(0, 0, 0, 1, 0, 4), line_trajectory(1, 0, 1.0, 1, 0, 4)}, params);
        const auto [lmd, rmd] = stclus::lmd_rmd(1, 0, 1.0, scene.history, *scene.cache);
        CHECK(lmd == 0.0);
        CHECK(rmd == 0.0);
    }
    SECTION("hand-summed asymmetric profile") {
        // raw distances per interval: 0, 1.5 (ramp), 3 with mu = 1
        auto scene = build_scene({line_trajectory(0, 0, 0, 1, 0, 4),
                                  lane_with_dip(1, 0, 3.0, 3, 4, 4)},
                                 params);
        const auto [lmd, rmd] = stclus::lmd_rmd(1, 0, 1.0, scene.history, *scene.cache);
        CHECK(lmd == 1.0);
        CHECK(rmd == 2.5);
    }
}

TEST_CASE("mean absolute deviation of a pair's raw distances") {
    const DbscanParams params{2.0, 2};
    SECTION("constant distance has zero deviation") {
        auto scene = build_scene(
            {line_trajectory(0, 0, 0, 1, 0, 5), line_trajectory(1, 0, 1.5, 1, 0, 5)}, params);
        CHECK(stclus::mean_absolute_deviation(1, 0, scene.history, *scene.cache) == 0.0);
    }
    SECTION("hand value on an asymmetric profile") {
        // raw distances 0, 1.5, 3 -> mean 1.5, mad = (1.5 + 0 + 1.5) / 3
        auto scene = build_scene({line_trajectory(0, 0, 0, 1, 0, 4),
                                  lane_with_dip(1, 0, 3.0, 3, 4, 4)},
                                 params);
        CHECK(stclus::mean_absolute_deviation(1, 0, scene.history, *scene.cache) == 1.0);
    }
}

TEST_CASE("stabilize without outliers is the identity") {
    const DbscanParams params{1.0, 2};
    auto scene = build_scene({line_trajectory(0, 0, 0, 1, 0, 6), line_trajectory(1, 0, 0.5, 1, 0, 6)},
                             params);
    REQUIRE(scene.whole.outliers.empty());
    const auto [post, reports] =
        stclus::stabilize(scene.whole, scene.history, *scene.cache);
    CHECK(post.clusters == scene.whole.clusters);
    CHECK(post.outliers.empty());
    CHECK(reports.empty());
}

namespace {

struct CaseOutcome {
    bool absorbed = false;
    std::size_t clusters_pre = 0, clusters_post = 0;
    std::size_t outliers_pre = 0, outliers_post = 0;
    double mu = 0.0;
    WholeClustering post;
    Scene scene;
};

CaseOutcome run_case(int case_id, std::uint64_t seed, stclus::MuMinScope scope) {
    const double eps = 2.0;
    const DbscanParams params{eps, 3};
    auto spec = stclus::case_spec(case_id);
    spec.seed = seed;
    auto fixture = stclus::generate_case(spec, eps);

    CaseOutcome out;
    out.scene = build_scene(fixture.trajectories, params);
    out.clusters_pre = out.scene.whole.clusters.size();
    out.outliers_pre = out.scene.whole.outliers.size();
    auto [post, reports] = stclus::stabilize(out.scene.whole, out.scene.history,
                                             *out.scene.cache, stclus::StabilizeOptions{scope});
    out.clusters_post = post.clusters.size();
    out.outliers_post = post.outliers.size();
    for (const auto& rep : reports) {
        out.mu = rep.mu_min;
        for (const auto& d : rep.outliers) {
            if (d.outlier == fixture.probe && d.absorbed) out.absorbed = true;
        }
    }
    out.post = std::move(post);
    return out;
}

}  // namespace

TEST_CASE("only the few-and-small deviation case is absorbed") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        for (int case_id = 1; case_id <= 4; ++case_id) {
            const auto out = run_case(case_id, seed, stclus::MuMinScope::PerCluster);
            INFO("case " << case_id << " seed " << seed);
            REQUIRE(out.clusters_pre == 1);
            REQUIRE(out.outliers_pre == 1);
            CHECK(out.clusters_post == out.clusters_pre);
            CHECK(out.outliers_post <= out.outliers_pre);
            CHECK(out.absorbed == (case_id == 4));
            // the adjustment pins the threshold at eps for the nearest member
            CHECK_THAT(out.mu, Catch::Matchers::WithinAbs(2.0, 1e-12));
        }
    }
}

TEST_CASE("stabilize is idempotent once the output is stable") {
    for (int case_id : {2, 4}) {
        const auto first = run_case(case_id, 1, stclus::MuMinScope::PerCluster);
        auto [second, reports2] =
            stclus::stabilize(first.post, first.scene.history, *first.scene.cache);
        CHECK(second.clusters == first.post.clusters);
        CHECK(second.outliers == first.post.outliers);
        for (const auto& rep : reports2) {
            for (const auto& d : rep.outliers) CHECK_FALSE(d.absorbed);
        }
    }
}

TEST_CASE("global threshold scope matches per-cluster on single-cluster scenes") {
    const auto per = run_case(4, 2, stclus::MuMinScope::PerCluster);
    const auto global = run_case(4, 2, stclus::MuMinScope::Global);
    CHECK(per.absorbed == global.absorbed);
    CHECK(per.mu == global.mu);
    CHECK(per.post.clusters == global.post.clusters);
}

TEST_CASE("assignment ties are arbitrated and stay deterministic") {
    // Two mirrored clusters with an outlier that spends half its time near
    // each; scores tie exactly and the outlier is absorbable into both.
    const double eps = 2.0;
    const DbscanParams params{eps, 2};
    const int T = 8;  // m = 7: three intervals near each pair plus one ramp
    auto make_trajs = [&] {
        std::vector<stclus::Trajectory> trajs;
        trajs.push_back(line_trajectory(0, -0.5, 0, 0, 1, T));  // left pair
        trajs.push_back(line_trajectory(1, 0.0, 0, 0, 1, T));
        stclus::Trajectory o;  // starts at x=0.5, jumps to x=2.5 mid-way
        o.id = 2;
        o.name = "t2";
        for (int t = 1; t <= T; ++t) {
            o.positions.push_back({t <= 4 ? 0.5 : 2.5, static_cast<double>(t - 1)});
        }
        trajs.push_back(std::move(o));
        trajs.push_back(line_trajectory(3, 3.0, 0, 0, 1, T));  // right pair
        trajs.push_back(line_trajectory(4, 3.5, 0, 0, 1, T));
        return trajs;
    };
    auto scene = build_scene(make_trajs(), params);
    REQUIRE(scene.whole.clusters == std::vector<std::vector<TrajId>>{{0, 1}, {3, 4}});
    REQUIRE(scene.whole.outliers == std::vector<TrajId>{2});

    const auto candidates = stclus::assign_outliers(scene.whole, scene.history, *scene.cache);
    REQUIRE(candidates.size() == 1);
    CHECK(candidates[0] == std::vector<int>{0, 1});  // exact score tie

    auto [post, reports] = stclus::stabilize(scene.whole, scene.history, *scene.cache,
                                             stclus::StabilizeOptions{}, scene.sets.get());
    CHECK(post.clusters.size() == 2);
    CHECK(post.outliers.empty());
    // absorbed into exactly one cluster, evaluated and reported in both
    REQUIRE(reports.size() == 2);
    int absorbed_count = 0;
    for (const auto& rep : reports) {
        REQUIRE(rep.outliers.size() == 1);
        CHECK(rep.outliers[0].outlier == 2);
        CHECK(rep.mu_min == 2.0);
        if (rep.outliers[0].absorbed) ++absorbed_count;
    }
    CHECK(absorbed_count == 1);

    // byte-for-byte repeatable
    auto scene2 = build_scene(make_trajs(), params);
    auto [post2, reports2] = stclus::stabilize(scene2.whole, scene2.history, *scene2.cache,
                                               stclus::StabilizeOptions{}, scene2.sets.get());
    CHECK(post2.clusters == post.clusters);
    CHECK(post2.outliers == post.outliers);
}

TEST_CASE("adjusted distances never exceed raw distances") {
    stclus::SplitMix64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto trajs = testsupport::random_instance(rng, 8, 10);
        auto scene = build_scene(trajs, DbscanParams{1.5, 2});
        if (scene.whole.clusters.empty() || scene.whole.outliers.empty()) continue;
        const auto& members = scene.whole.clusters[0];
        for (TrajId o : scene.whole.outliers) {
            for (TrajId g : members) {
                const auto profile =
                    stclus::adjusted_distance_series(o, g, members, scene.history, *scene.cache);
                for (const auto& rec : profile) {
                    const double raw = scene.cache->distance(rec.interval, o, g);
                    CHECK(rec.distance <= raw + 1e-15);
                    if (rec.in_cluster) CHECK(rec.distance == raw);
                }
            }
        }
    }
}
