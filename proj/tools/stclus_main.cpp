// Command-line surface for the trajectory clustering toolkit. Every stage
// of the pipeline is independently invocable; `run` chains them all.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stclus/csv.hpp"
#include "stclus/errors.hpp"
#include "stclus/evaluation.hpp"
#include "stclus/log.hpp"
#include "stclus/pipeline.hpp"
#include "stclus/synthetic.hpp"

namespace {

struct CommonOptions {
    stclus::PipelineConfig config;
    bool no_stc = false;
    std::string mu_scope = "per-cluster";
};

void add_common_options(CLI::App* app, CommonOptions& opts, bool with_window) {
    app->add_option("input", opts.config.input_path, "input CSV (traj_id,t,x,y)")->required();
    app->add_option("--eps", opts.config.eps, "DBSCAN distance threshold");
    app->add_option("--min-lns", opts.config.min_lns, "DBSCAN minimum neighborhood size");
    app->add_option("--resample-T", opts.config.resample_T,
                    "uniform trajectory length (0 = median of input)");
    if (with_window) {
        app->add_option("--window", opts.config.window, "sliding window size W (intervals)");
        app->add_option("--step", opts.config.step, "sliding window step S (intervals)");
    }
    app->add_flag("--no-stc", opts.no_stc, "skip the stability pass");
    app->add_option("--mu-min-scope", opts.mu_scope, "stability threshold scope")
        ->check(CLI::IsMember({"per-cluster", "global"}));
    app->add_option("--truth", opts.config.truth_path, "ground-truth labels CSV");
    app->add_option("--seed", opts.config.seed, "generator seed");
    app->add_option("--out", opts.config.output_dir, "output directory");
    app->add_option("--threads", opts.config.threads, "worker thread cap");
}

stclus::PipelineConfig finalize(CommonOptions& opts, stclus::PipelineMode mode) {
    opts.config.mode = mode;
    opts.config.stc_enabled = !opts.no_stc;
    opts.config.mu_min_scope = opts.mu_scope == "global" ? stclus::MuMinScope::Global
                                                         : stclus::MuMinScope::PerCluster;
    return opts.config;
}

void print_summary(const stclus::PipelineResult& result) {
    const auto& r = result.report;
    std::printf("trajectories: %zu  T: %d  intervals: %d\n", r.n_trajectories, r.T, r.m);
    std::printf("whole clusters: %zu (outliers %zu)", r.clusters_pre_stc, r.outliers_pre_stc);
    if (r.clusters_post_stc != r.clusters_pre_stc || r.outliers_post_stc != r.outliers_pre_stc) {
        std::printf(" -> after stability: %zu (outliers %zu)", r.clusters_post_stc,
                    r.outliers_post_stc);
    }
    std::printf("\n");
    if (r.sub_ranges) std::printf("sub-trajectory ranges: %zu\n", *r.sub_ranges);
}

int run_generate(const std::string& scenario, int case_id, stclus::CorridorSpec corridor,
                 double eps, std::uint64_t seed, const std::string& out_file,
                 const std::string& truth_out) {
    std::vector<stclus::Trajectory> trajs;
    std::vector<std::pair<std::string, int>> truth;
    if (scenario == "corridor") {
        corridor.seed = seed;
        trajs = stclus::generate_corridor(corridor);
        // Construction groups as ground truth: top lanes, deviators, bottom lanes.
        for (const auto& t : trajs) {
            const int lane = t.id;
            int group = 0;
            if (lane >= corridor.n_straight_top) group = 1;
            if (lane >= corridor.n_straight_top + corridor.n_deviators) group = 2;
            truth.emplace_back(t.name, group);
        }
    } else {
        auto spec = stclus::case_spec(case_id);
        spec.seed = seed;
        auto fixture = stclus::generate_case(spec, eps);
        trajs = std::move(fixture.trajectories);
        for (const auto& t : trajs) {
            truth.emplace_back(t.name, t.id == fixture.probe ? -1 : 0);
        }
    }
    stclus::write_trajectories_csv(out_file, trajs);
    stclus::log_info("wrote " + out_file);
    if (!truth_out.empty()) {
        stclus::write_labels_csv(truth_out, truth);
        stclus::log_info("wrote " + truth_out);
    }
    return 0;
}

int run_metrics(const std::string& input, const std::string& pred_path,
                const std::string& truth_path, int resample_T, int threads,
                const std::string& out_dir) {
    const auto tracks = stclus::ingest_csv(input);
    const int T = resample_T > 0 ? resample_T : stclus::default_resample_length(tracks);
    const auto trajs = stclus::preprocess_tracks(tracks, T, nullptr, threads);
    const auto sets = stclus::segmentize(trajs);

    const auto pred_map = stclus::read_labels_csv(pred_path);
    stclus::LabelVector pred;
    pred.labels.resize(trajs.size());
    for (const auto& t : trajs) {
        const auto it = pred_map.find(t.name);
        if (it == pred_map.end()) {
            throw stclus::DataError("prediction labels missing trajectory '" + t.name + "'");
        }
        pred.labels[static_cast<std::size_t>(t.id)] = it->second;
    }

    stclus::JsonValue out = stclus::JsonValue::object();
    const auto dmat = stclus::trajectory_distance_matrix(sets, trajs.size(), threads);
    if (const auto sil = stclus::silhouette(pred, dmat)) {
        out.set("silhouette_mean", sil->mean);
        out.set("silhouette_stdev", sil->stdev);
    } else {
        out.set("silhouette_mean", nullptr);
        out.set("silhouette_stdev", nullptr);
    }
    if (!truth_path.empty()) {
        const auto truth_map = stclus::read_labels_csv(truth_path);
        stclus::LabelVector truth;
        truth.labels.resize(trajs.size());
        for (const auto& t : trajs) {
            const auto it = truth_map.find(t.name);
            if (it == truth_map.end()) {
                throw stclus::DataError("truth labels missing trajectory '" + t.name + "'");
            }
            truth.labels[static_cast<std::size_t>(t.id)] = it->second;
        }
        out.set("nmi", stclus::nmi(pred, truth));
        out.set("ari", stclus::ari(pred, truth));
    }
    std::filesystem::create_directories(out_dir);
    const std::string path = (std::filesystem::path(out_dir) / "metrics.json").string();
    std::ofstream file(path);
    if (!file) throw stclus::DataError("cannot write '" + path + "'");
    file << out.dump() << '\n';
    std::printf("%s\n", out.dump().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trajectory clustering via split/merge segment evolution"};
    app.require_subcommand(1);

    CommonOptions run_opts, cluster_opts, sub_opts, stab_opts;

    CLI::App* cmd_run = app.add_subcommand("run", "full pipeline (whole + windowed clustering)");
    add_common_options(cmd_run, run_opts, true);

    CLI::App* cmd_cluster = app.add_subcommand("cluster", "whole-trajectory clustering");
    add_common_options(cmd_cluster, cluster_opts, false);

    CLI::App* cmd_sub = app.add_subcommand("subcluster", "sliding-window sub-trajectory clustering");
    add_common_options(cmd_sub, sub_opts, true);

    CLI::App* cmd_stab = app.add_subcommand("stabilize", "whole clustering with the stability pass");
    add_common_options(cmd_stab, stab_opts, false);

    // preprocess
    std::string pre_input, pre_out = "out";
    int pre_T = 0;
    int pre_threads = 1;
    CLI::App* cmd_pre = app.add_subcommand("preprocess", "dedup + uniform resampling only");
    cmd_pre->add_option("input", pre_input, "input CSV")->required();
    cmd_pre->add_option("--resample-T", pre_T, "uniform trajectory length (0 = median)");
    cmd_pre->add_option("--threads", pre_threads, "worker thread cap");
    cmd_pre->add_option("--out", pre_out, "output directory");

    // metrics
    std::string met_input, met_pred, met_truth, met_out = "out";
    int met_T = 0, met_threads = 1;
    CLI::App* cmd_met = app.add_subcommand("metrics", "clustering quality metrics");
    cmd_met->add_option("input", met_input, "input CSV")->required();
    cmd_met->add_option("--pred", met_pred, "predicted labels CSV")->required();
    cmd_met->add_option("--truth", met_truth, "ground-truth labels CSV");
    cmd_met->add_option("--resample-T", met_T, "uniform trajectory length (0 = median)");
    cmd_met->add_option("--threads", met_threads, "worker thread cap");
    cmd_met->add_option("--out", met_out, "output directory");

    // generate
    std::string gen_scenario = "corridor", gen_out = "data.csv", gen_truth;
    int gen_case = 4;
    double gen_eps = 1.5;
    std::uint64_t gen_seed = 0;
    stclus::CorridorSpec corridor;
    CLI::App* cmd_gen = app.add_subcommand("generate", "synthetic scenario generator");
    cmd_gen->add_option("--scenario", gen_scenario, "corridor | case")
        ->check(CLI::IsMember({"corridor", "case"}));
    cmd_gen->add_option("--case-id", gen_case, "outlier case 1..4")->check(CLI::Range(1, 4));
    cmd_gen->add_option("--eps", gen_eps, "eps the case geometry is scaled to");
    cmd_gen->add_option("--top", corridor.n_straight_top, "straight lanes before the deviators");
    cmd_gen->add_option("--deviators", corridor.n_deviators, "deviating lanes");
    cmd_gen->add_option("--bottom", corridor.n_straight_bottom, "straight lanes after");
    cmd_gen->add_option("--length", corridor.T, "trajectory length T");
    cmd_gen->add_option("--deviation-start", corridor.deviation_start, "first detour interval");
    cmd_gen->add_option("--deviation-end", corridor.deviation_end, "last detour interval");
    cmd_gen->add_option("--deviation-offset", corridor.deviation_offset, "detour distance");
    cmd_gen->add_option("--lane-gap", corridor.lane_gap, "distance between lanes");
    cmd_gen->add_option("--jitter", corridor.jitter, "coordinate jitter amplitude");
    cmd_gen->add_option("--seed", gen_seed, "generator seed");
    cmd_gen->add_option("--out-file", gen_out, "output CSV path");
    cmd_gen->add_option("--truth-out", gen_truth, "also write construction labels here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_run->parsed()) {
            const bool with_windows = run_opts.config.window > 0 || run_opts.config.step > 0;
            auto config = finalize(
                run_opts, with_windows ? stclus::PipelineMode::Both : stclus::PipelineMode::Whole);
            print_summary(stclus::run_pipeline(config));
        } else if (cmd_cluster->parsed()) {
            print_summary(stclus::run_pipeline(finalize(cluster_opts, stclus::PipelineMode::Whole)));
        } else if (cmd_sub->parsed()) {
            print_summary(stclus::run_pipeline(finalize(sub_opts, stclus::PipelineMode::Sub)));
        } else if (cmd_stab->parsed()) {
            if (stab_opts.no_stc) {
                throw stclus::ConfigError("stabilize implies the stability pass; drop --no-stc");
            }
            print_summary(stclus::run_pipeline(finalize(stab_opts, stclus::PipelineMode::Whole)));
        } else if (cmd_pre->parsed()) {
            const auto tracks = stclus::ingest_csv(pre_input);
            const int T = pre_T > 0 ? pre_T : stclus::default_resample_length(tracks);
            const auto trajs = stclus::preprocess_tracks(tracks, T, nullptr, pre_threads);
            std::filesystem::create_directories(pre_out);
            const std::string path =
                (std::filesystem::path(pre_out) / "preprocessed.csv").string();
            stclus::write_trajectories_csv(path, trajs);
            std::printf("wrote %s (%zu trajectories, T=%d)\n", path.c_str(), trajs.size(), T);
        } else if (cmd_met->parsed()) {
            return run_metrics(met_input, met_pred, met_truth, met_T, met_threads, met_out);
        } else if (cmd_gen->parsed()) {
            return run_generate(gen_scenario, gen_case, corridor, gen_eps, gen_seed, gen_out,
                                gen_truth);
        }
    } catch (const stclus::ConfigError& e) {
        stclus::log_error(std::string("config: ") + e.what());
        return 2;
    } catch (const stclus::DataError& e) {
        stclus::log_error(std::string("data: ") + e.what());
        return 3;
    } catch (const std::exception& e) {
        stclus::log_error(std::string("internal: ") + e.what());
        return 4;
    }
    return 0;
}
