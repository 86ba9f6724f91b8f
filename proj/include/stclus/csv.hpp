#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "stclus/errors.hpp"
#include "stclus/trajectory.hpp"

namespace stclus {

/// Shortest exact decimal form with up to 17 significant digits; identical
/// across platforms, round-trips back to the same double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            fields.push_back(trim(line.substr(begin, i - begin)));
            begin = i + 1;
        }
    }
    return fields;
}

inline double parse_double_field(std::string_view field, const char* what, std::size_t line_no) {
    double value = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || field.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": cannot parse " + what + " '" +
                        std::string(field) + "'");
    }
    if (!std::isfinite(value)) {
        throw DataError("line " + std::to_string(line_no) + ": non-finite " + what);
    }
    return value;
}

}  // namespace detail

/// Parses `traj_id,t,x,y` rows (header required), groups by traj_id, sorts
/// each track by timestamp, and rejects duplicate (traj_id, t) pairs.
/// Tracks come back sorted by name; ids are not assigned here.
inline std::vector<RawTrack> ingest_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty input: missing header");
    ++line_no;
    {
        const auto fields = detail::split_fields(line);
        if (fields.size() != 4 || fields[0] != "traj_id" || fields[1] != "t" ||
            fields[2] != "x" || fields[3] != "y") {
            throw DataError("line 1: expected header 'traj_id,t,x,y'");
        }
    }

    std::map<std::string, RawTrack> tracks;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != 4) {
            throw DataError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                            std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw DataError("line " + std::to_string(line_no) + ": empty traj_id");
        }
        TrackSample sample;
        sample.t = detail::parse_double_field(fields[1], "t", line_no);
        sample.pos.x = detail::parse_double_field(fields[2], "x", line_no);
        sample.pos.y = detail::parse_double_field(fields[3], "y", line_no);
        auto& track = tracks[std::string(fields[0])];
        track.name = std::string(fields[0]);
        track.samples.push_back(sample);
    }
    if (tracks.empty()) throw DataError("no data rows in input");

    std::vector<RawTrack> out;
    out.reserve(tracks.size());
    for (auto& [name, track] : tracks) {
        std::stable_sort(track.samples.begin(), track.samples.end(),
                         [](const TrackSample& a, const TrackSample& b) { return a.t < b.t; });
        for (std::size_t i = 1; i < track.samples.size(); ++i) {
            if (track.samples[i].t == track.samples[i - 1].t) {
                throw DataError("duplicate timestamp " + format_double(track.samples[i].t) +
                                " in track '" + name + "'");
            }
        }
        out.push_back(std::move(track));
    }
    return out;
}

inline std::vector<RawTrack> ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return ingest_csv(in);
}

/// Writes trajectories in the same format ingest_csv reads, with virtual
/// timestamps 1..T.
inline void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& trajs) {
    out << "traj_id,t,x,y\n";
    for (const Trajectory& traj : trajs) {
        for (std::size_t i = 0; i < traj.positions.size(); ++i) {
            out << traj.name << ',' << (i + 1) << ',' << format_double(traj.positions[i].x) << ','
                << format_double(traj.positions[i].y) << '\n';
        }
    }
}

inline void write_trajectories_csv(const std::string& path, const std::vector<Trajectory>& trajs) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_trajectories_csv(out, trajs);
}

/// `traj_id,cluster_id` files, used both for emitted assignments and for
/// ground-truth labels.
inline void write_labels_csv(const std::string& path,
                             const std::vector<std::pair<std::string, int>>& labels) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "traj_id,cluster_id\n";
    for (const auto& [name, label] : labels) {
        out << name << ',' << label << '\n';
    }
}

inline std::map<std::string, int> read_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty label file: " + path);
    ++line_no;
    {
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2 || fields[0] != "traj_id" || fields[1] != "cluster_id") {
            throw DataError(path + ": expected header 'traj_id,cluster_id'");
        }
    }
    std::map<std::string, int> out;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2 || fields[0].empty()) {
            throw DataError(path + " line " + std::to_string(line_no) + ": malformed row");
        }
        int label = 0;
        const auto [ptr, ec] =
            std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), label);
        if (ec != std::errc() || ptr != fields[1].data() + fields[1].size()) {
            throw DataError(path + " line " + std::to_string(line_no) + ": bad cluster_id");
        }
        if (!out.emplace(std::string(fields[0]), label).second) {
            throw DataError(path + " line " + std::to_string(line_no) + ": duplicate traj_id");
        }
    }
    return out;
}

}  // namespace stclus
