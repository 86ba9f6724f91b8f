#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stclus/csv.hpp"
#include "stclus/distance_cache.hpp"
#include "stclus/errors.hpp"
#include "stclus/evaluation.hpp"
#include "stclus/json_writer.hpp"
#include "stclus/log.hpp"
#include "stclus/segment_clustering.hpp"
#include "stclus/stability.hpp"
#include "stclus/synthetic.hpp"
#include "stclus/trajectory.hpp"
#include "stclus/trajectory_clustering.hpp"

namespace stclus {

enum class PipelineMode { Whole, Sub, Both };

struct PipelineConfig {
    std::string input_path;
    std::string output_dir = "out";
    double eps = 1.5;
    int min_lns = 2;
    int resample_T = 0;  // 0: median sample count, clamped to [2, 512]
    int window = 0;
    int step = 0;
    PipelineMode mode = PipelineMode::Whole;
    bool stc_enabled = true;
    MuMinScope mu_min_scope = MuMinScope::PerCluster;
    std::string truth_path;
    std::uint64_t seed = 0;
    int threads = 1;
};

struct StageTime {
    std::string name;
    double ms = 0.0;
};

struct MetricSummary {
    std::optional<double> silhouette_pre_mean, silhouette_pre_stdev;
    std::optional<double> silhouette_post_mean, silhouette_post_stdev;
    std::optional<double> nmi_pre, ari_pre;
    std::optional<double> nmi_post, ari_post;
};

struct RunReport {
    std::vector<StageTime> stages;
    std::size_t n_trajectories = 0;
    int T = 0;
    int m = 0;
    std::vector<std::string> dropped_tracks;
    std::size_t clusters_pre_stc = 0;
    std::size_t outliers_pre_stc = 0;
    std::size_t clusters_post_stc = 0;
    std::size_t outliers_post_stc = 0;
    std::optional<std::size_t> sub_ranges;
    MetricSummary metrics;
};

struct PipelineResult {
    std::vector<Trajectory> trajectories;
    std::vector<SegmentSet> sets;
    ClusterHistory history;
    WholeClustering whole_pre;
    WholeClustering whole_post;
    std::vector<StabilityReport> stability;
    std::vector<RangedClustering> sub;
    RunReport report;
};

inline void validate_config(const PipelineConfig& config) {
    if (config.eps <= 0.0) throw ConfigError("eps must be positive");
    if (config.min_lns < 1) throw ConfigError("min-lns must be >= 1");
    if (config.resample_T != 0 && config.resample_T < 2) {
        throw ConfigError("resample-T must be >= 2");
    }
    if (config.mode != PipelineMode::Whole) {
        if (config.window < 1) throw ConfigError("window must be >= 1 for sub-trajectory runs");
        if (config.step < 1) throw ConfigError("step must be >= 1 for sub-trajectory runs");
    }
    if (config.threads < 1) throw ConfigError("threads must be >= 1");
}

/// Dedup + resample. Tracks that collapse below two samples are dropped
/// with a warning rather than aborting the batch.
inline std::vector<Trajectory> preprocess_tracks(const std::vector<RawTrack>& tracks, int T,
                                                 std::vector<std::string>* dropped,
                                                 int threads = 1) {
    std::vector<RawTrack> clean;
    clean.reserve(tracks.size());
    for (const RawTrack& track : tracks) {
        try {
            clean.push_back(deduplicate(track));
        } catch (const DegenerateTrack& e) {
            log_info(std::string("dropping track: ") + e.what());
            if (dropped != nullptr) dropped->push_back(track.name);
        }
    }
    if (clean.empty()) throw DataError("no usable tracks after preprocessing");

    std::vector<Trajectory> out(clean.size());
    parallel_for(clean.size(), threads,
                 [&](std::size_t i) { out[i] = resample_uniform(clean[i], T); });
    for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<TrajId>(i);
    return out;
}

namespace detail {

class StageClock {
public:
    explicit StageClock(std::vector<StageTime>& stages) : stages_(stages) {}

    template <typename Fn>
    auto run(const std::string& name, Fn&& fn) {
        const auto begin = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            record(name, begin);
        } else {
            auto result = fn();
            record(name, begin);
            return result;
        }
    }

    double total_ms() const {
        double total = 0.0;
        for (const auto& s : stages_) total += s.ms;
        return total;
    }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point begin) {
        const auto end = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(end - begin).count();
        stages_.push_back({name, ms});
        log_info(name + " finished in " + format_double(ms) + " ms");
    }

    std::vector<StageTime>& stages_;
};

inline LabelVector labels_from_truth(const std::vector<Trajectory>& trajs,
                                     const std::map<std::string, int>& truth) {
    LabelVector lv;
    lv.labels.resize(trajs.size());
    for (const Trajectory& t : trajs) {
        const auto it = truth.find(t.name);
        if (it == truth.end()) {
            throw DataError("truth labels missing trajectory '" + t.name + "'");
        }
        lv.labels[static_cast<std::size_t>(t.id)] = it->second;
    }
    return lv;
}

}  // namespace detail

inline LabelVector whole_labels(const WholeClustering& whole) {
    LabelVector lv;
    lv.labels.assign(whole.universe, -1);
    for (std::size_t k = 0; k < whole.clusters.size(); ++k) {
        for (TrajId id : whole.clusters[k]) {
            lv.labels[static_cast<std::size_t>(id)] = static_cast<int>(k);
        }
    }
    return lv;
}

/// Full pipeline over already-ingested tracks:
/// preprocess -> segmentize -> evolve -> whole/sub clustering -> stability
/// pass -> metrics. File outputs are written separately by write_outputs.
inline PipelineResult run_pipeline_on_tracks(const std::vector<RawTrack>& tracks,
                                             const PipelineConfig& config) {
    validate_config(config);
    PipelineResult result;
    detail::StageClock clock(result.report.stages);

    const int T = config.resample_T > 0 ? config.resample_T : default_resample_length(tracks);
    result.trajectories = clock.run("preprocess", [&] {
        return preprocess_tracks(tracks, T, &result.report.dropped_tracks, config.threads);
    });
    result.report.n_trajectories = result.trajectories.size();
    result.report.T = T;
    result.report.m = T - 1;

    result.sets = clock.run("segmentize", [&] { return segmentize(result.trajectories); });

    const DbscanParams params{config.eps, config.min_lns};
    DistanceCache cache(result.sets, config.eps);
    result.history =
        clock.run("evolve", [&] { return evolve(result.sets, cache, params); });

    result.whole_pre = clock.run("whole_clustering", [&] {
        return whole_trajectory_clusters(result.history, 1, result.history.m());
    });
    result.report.clusters_pre_stc = result.whole_pre.clusters.size();
    result.report.outliers_pre_stc = result.whole_pre.outliers.size();

    if (config.mode != PipelineMode::Whole) {
        if (config.window > result.history.m()) {
            throw ConfigError("window exceeds the number of intervals");
        }
        result.sub = clock.run("sub_clustering", [&] {
            return sub_trajectory_clusters(result.history,
                                           WindowParams{config.window, config.step},
                                           config.threads);
        });
        result.report.sub_ranges = result.sub.size();
    }

    if (config.stc_enabled) {
        auto [post, reports] = clock.run("stability", [&] {
            return stabilize(result.whole_pre, result.history, cache,
                             StabilizeOptions{config.mu_min_scope}, &result.sets);
        });
        result.whole_post = std::move(post);
        result.stability = std::move(reports);
    } else {
        result.whole_post = result.whole_pre;
    }
    result.report.clusters_post_stc = result.whole_post.clusters.size();
    result.report.outliers_post_stc = result.whole_post.outliers.size();

    clock.run("metrics", [&] {
        const auto dmat = trajectory_distance_matrix(result.sets, result.trajectories.size(),
                                                     config.threads);
        if (const auto sil = silhouette(whole_labels(result.whole_pre), dmat)) {
            result.report.metrics.silhouette_pre_mean = sil->mean;
            result.report.metrics.silhouette_pre_stdev = sil->stdev;
        }
        if (config.stc_enabled) {
            if (const auto sil = silhouette(whole_labels(result.whole_post), dmat)) {
                result.report.metrics.silhouette_post_mean = sil->mean;
                result.report.metrics.silhouette_post_stdev = sil->stdev;
            }
        }
        if (!config.truth_path.empty()) {
            const auto truth =
                detail::labels_from_truth(result.trajectories, read_labels_csv(config.truth_path));
            const auto pre = whole_labels(result.whole_pre);
            result.report.metrics.nmi_pre = nmi(pre, truth);
            result.report.metrics.ari_pre = ari(pre, truth);
            if (config.stc_enabled) {
                const auto post = whole_labels(result.whole_post);
                result.report.metrics.nmi_post = nmi(post, truth);
                result.report.metrics.ari_post = ari(post, truth);
            }
        }
    });

    return result;
}

namespace detail {

inline JsonValue optional_json(const std::optional<double>& v) {
    return v ? JsonValue(*v) : JsonValue(nullptr);
}

inline std::string format_mean_stdev(double mean, double stdev) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f \xc2\xb1 %.3f", mean, stdev);
    return buf;
}

}  // namespace detail

inline JsonValue report_to_json(const RunReport& report, const PipelineConfig& config) {
    JsonValue stages = JsonValue::object();
    for (const StageTime& s : report.stages) stages.set(s.name, s.ms);

    JsonValue params = JsonValue::object();
    params.set("eps", config.eps);
    params.set("min_lns", config.min_lns);
    params.set("resample_T", report.T);
    if (config.mode != PipelineMode::Whole) {
        params.set("window", config.window);
        params.set("step", config.step);
    }
    params.set("stc_enabled", config.stc_enabled);
    params.set("mu_min_scope",
               config.mu_min_scope == MuMinScope::PerCluster ? "per-cluster" : "global");

    JsonValue dropped = JsonValue::array();
    for (const auto& name : report.dropped_tracks) dropped.push_back(name);

    JsonValue whole = JsonValue::object();
    whole.set("clusters_pre_stc", report.clusters_pre_stc);
    whole.set("outliers_pre_stc", report.outliers_pre_stc);
    whole.set("clusters_post_stc", report.clusters_post_stc);
    whole.set("outliers_post_stc", report.outliers_post_stc);

    JsonValue metrics = JsonValue::object();
    metrics.set("silhouette_pre_mean", detail::optional_json(report.metrics.silhouette_pre_mean));
    metrics.set("silhouette_pre_stdev",
                detail::optional_json(report.metrics.silhouette_pre_stdev));
    metrics.set("silhouette_post_mean",
                detail::optional_json(report.metrics.silhouette_post_mean));
    metrics.set("silhouette_post_stdev",
                detail::optional_json(report.metrics.silhouette_post_stdev));
    if (report.metrics.silhouette_pre_mean) {
        metrics.set("silhouette_pre_formatted",
                    detail::format_mean_stdev(*report.metrics.silhouette_pre_mean,
                                              *report.metrics.silhouette_pre_stdev));
    }
    if (report.metrics.silhouette_post_mean) {
        metrics.set("silhouette_post_formatted",
                    detail::format_mean_stdev(*report.metrics.silhouette_post_mean,
                                              *report.metrics.silhouette_post_stdev));
    }
    metrics.set("nmi_pre", detail::optional_json(report.metrics.nmi_pre));
    metrics.set("ari_pre", detail::optional_json(report.metrics.ari_pre));
    metrics.set("nmi_post", detail::optional_json(report.metrics.nmi_post));
    metrics.set("ari_post", detail::optional_json(report.metrics.ari_post));

    JsonValue root = JsonValue::object();
    root.set("n_trajectories", report.n_trajectories);
    root.set("T", report.T);
    root.set("m", report.m);
    root.set("params", std::move(params));
    root.set("dropped_tracks", std::move(dropped));
    root.set("whole", std::move(whole));
    root.set("metrics", std::move(metrics));
    if (report.sub_ranges) root.set("sub_ranges", *report.sub_ranges);
    root.set("stages_ms", std::move(stages));
    return root;
}

namespace detail {

inline JsonValue names_array(const std::vector<TrajId>& ids,
                             const std::vector<Trajectory>& trajs) {
    JsonValue arr = JsonValue::array();
    for (TrajId id : ids) arr.push_back(trajs[static_cast<std::size_t>(id)].name);
    return arr;
}

// Candidate whole-cluster per trajectory for the membership grid: members
// use their own cluster; remaining outliers the nearest one by mean minimum
// segment distance.
inline std::vector<int> grid_cluster_of(const PipelineResult& result, DistanceCache& cache) {
    const auto& whole = result.whole_post;
    std::vector<int> cluster_of(whole.universe, -1);
    for (std::size_t k = 0; k < whole.clusters.size(); ++k) {
        for (TrajId id : whole.clusters[k]) {
            cluster_of[static_cast<std::size_t>(id)] = static_cast<int>(k);
        }
    }
    if (!whole.clusters.empty()) {
        const auto candidates = assign_outliers(whole, result.history, cache);
        for (std::size_t oi = 0; oi < whole.outliers.size(); ++oi) {
            cluster_of[static_cast<std::size_t>(whole.outliers[oi])] = candidates[oi].front();
        }
    }
    return cluster_of;
}

}  // namespace detail

/// Writes all pipeline artifacts into config.output_dir:
///   assignments.csv, history.jsonl, subclusters.json (sub modes),
///   stability.json (stability runs), report.json, plotdata/.
inline void write_outputs(const PipelineResult& result, const PipelineConfig& config) {
    namespace fs = std::filesystem;
    const fs::path dir(config.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::create_directories(dir / "plotdata", ec);
    if (ec) throw DataError("cannot create output directory '" + config.output_dir + "'");

    const auto& trajs = result.trajectories;
    auto open = [&](const fs::path& p) {
        std::ofstream out(p);
        if (!out) throw DataError("cannot write '" + p.string() + "'");
        return out;
    };

    {
        const LabelVector labels = whole_labels(result.whole_post);
        std::vector<std::pair<std::string, int>> rows;
        rows.reserve(trajs.size());
        for (const Trajectory& t : trajs) {
            rows.emplace_back(t.name, labels.labels[static_cast<std::size_t>(t.id)]);
        }
        write_labels_csv((dir / "assignments.csv").string(), rows);
    }

    {
        auto out = open(dir / "history.jsonl");
        for (const IntervalClustering& ic : result.history.intervals) {
            JsonValue clusters = JsonValue::array();
            for (std::size_t k = 0; k < ic.clusters.size(); ++k) {
                JsonValue c = JsonValue::object();
                c.set("id", k);
                c.set("density",
                      ic.clusters[k].density == DensityClass::Dense ? "dense" : "low_density");
                c.set("members", detail::names_array(ic.clusters[k].members, trajs));
                clusters.push_back(std::move(c));
            }
            JsonValue line = JsonValue::object();
            line.set("interval", ic.interval);
            line.set("clusters", std::move(clusters));
            line.set("outliers", detail::names_array(ic.outliers, trajs));
            out << line.dump() << '\n';
        }
    }

    if (config.mode != PipelineMode::Whole) {
        JsonValue arr = JsonValue::array();
        for (const RangedClustering& rc : result.sub) {
            JsonValue clusters = JsonValue::array();
            for (const auto& members : rc.clustering.clusters) {
                clusters.push_back(detail::names_array(members, trajs));
            }
            JsonValue obj = JsonValue::object();
            obj.set("range", JsonValue(JsonValue::Array{JsonValue(rc.start), JsonValue(rc.end)}));
            obj.set("clusters", std::move(clusters));
            obj.set("outliers", detail::names_array(rc.clustering.outliers, trajs));
            arr.push_back(std::move(obj));
        }
        open(dir / "subclusters.json") << arr.dump() << '\n';
    }

    if (config.stc_enabled) {
        JsonValue arr = JsonValue::array();
        for (const StabilityReport& rep : result.stability) {
            JsonValue outliers = JsonValue::array();
            for (const OutlierDecision& d : rep.outliers) {
                JsonValue o = JsonValue::object();
                o.set("traj_id", trajs[static_cast<std::size_t>(d.outlier)].name);
                o.set("best_member_id",
                      d.best_member >= 0 ? JsonValue(trajs[static_cast<std::size_t>(d.best_member)].name)
                                         : JsonValue(nullptr));
                o.set("lmd", d.lmd);
                o.set("rmd", d.rmd);
                o.set("absorbed", d.absorbed);
                outliers.push_back(std::move(o));
            }
            JsonValue r = JsonValue::object();
            r.set("cluster_id", rep.cluster_id);
            r.set("mu_min", rep.mu_min);
            r.set("outliers", std::move(outliers));
            arr.push_back(std::move(r));
        }
        open(dir / "stability.json") << arr.dump() << '\n';
    }

    open(dir / "report.json") << report_to_json(result.report, config).dump() << '\n';

    DistanceCache cache(result.sets, config.eps);
    {
        // Box-plot input: raw per-interval distances from each pre-pass
        // outlier to its reported closest member.
        auto out = open(dir / "plotdata" / "outlier_distances.csv");
        out << "cluster_id,outlier_id,member_id,interval,distance\n";
        for (const StabilityReport& rep : result.stability) {
            for (const OutlierDecision& d : rep.outliers) {
                if (d.best_member < 0) continue;
                for (int t = 1; t <= result.history.m(); ++t) {
                    out << rep.cluster_id << ',' << trajs[static_cast<std::size_t>(d.outlier)].name
                        << ',' << trajs[static_cast<std::size_t>(d.best_member)].name << ',' << t
                        << ',' << format_double(cache.distance(t, d.outlier, d.best_member))
                        << '\n';
                }
            }
        }
    }

    {
        // Membership grid: per trajectory and interval, whether its segment
        // shares a segment cluster with any member of its whole cluster
        // (outliers: their nearest cluster).
        auto out = open(dir / "plotdata" / "membership_grid.csv");
        out << "traj_id";
        for (int t = 1; t <= result.history.m(); ++t) out << ",i" << t;
        out << '\n';
        const auto grid_cluster = detail::grid_cluster_of(result, cache);
        for (const Trajectory& traj : trajs) {
            out << traj.name;
            const int k = grid_cluster[static_cast<std::size_t>(traj.id)];
            for (int t = 1; t <= result.history.m(); ++t) {
                bool in = false;
                if (k >= 0) {
                    const auto& assign = result.history.at(t).cluster_of;
                    const int own = assign[static_cast<std::size_t>(traj.id)];
                    if (own >= 0) {
                        for (TrajId member : result.whole_post.clusters[static_cast<std::size_t>(k)]) {
                            if (member != traj.id &&
                                assign[static_cast<std::size_t>(member)] == own) {
                                in = true;
                                break;
                            }
                        }
                    }
                }
                out << ',' << (in ? 1 : 0);
            }
            out << '\n';
        }
    }
}

/// End-user entry point: ingest, run, write artifacts.
inline PipelineResult run_pipeline(const PipelineConfig& config) {
    validate_config(config);
    if (config.input_path.empty()) throw ConfigError("no input file given");
    const auto tracks = ingest_csv(config.input_path);
    PipelineResult result = run_pipeline_on_tracks(tracks, config);
    detail::StageClock clock(result.report.stages);
    clock.run("write_outputs", [&] { write_outputs(result, config); });
    return result;
}

}  // namespace stclus
