#include "hybridsim/csv.hpp"

#include "hybridsim/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace hybridsim {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw IoError("format_double: conversion failure");
    return std::string(buf, ptr);
}

namespace {

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("csv: cannot parse number '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError("csv: cannot parse integer '" + std::string(s) + "'");
    return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

CsvWriter::CsvWriter(const std::string& file, const std::string& kind,
                     const std::vector<std::string>& columns)
    : os_(file, std::ios::trunc), file_(file) {
    if (!os_) throw IoError("csv: cannot open " + file + " for writing");
    os_ << kCsvSchemaPrefix << kind << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (i > 0) os_ << ',';
        os_ << columns[i];
    }
    os_ << "\n";
}

void CsvWriter::cell(const std::string& s) {
    if (row_open_) os_ << ',';
    os_ << s;
    row_open_ = true;
}

void CsvWriter::end_row() {
    os_ << "\n";
    row_open_ = false;
}

void CsvWriter::close() {
    os_.flush();
    if (!os_) throw IoError("csv: write failure on " + file_);
    os_.close();
}

void write_path_csv(const HybridPath& path, const std::string& file) {
    const int p = path.dimension();
    std::vector<std::string> columns = {"time", "side", "mode"};
    for (int d = 1; d <= p; ++d) columns.push_back("x_" + std::to_string(d));
    CsvWriter w(file, "path", columns);

    std::set<double> times;
    std::set<double> event_times;
    times.insert(0.0);
    times.insert(path.horizon);
    for (const Segment& seg : path.segments)
        for (double t : seg.grid_times) times.insert(t);
    for (const auto& ev : path.discrete_events) {
        times.insert(ev.time);
        event_times.insert(ev.time);
    }
    for (const auto& j : path.euclid_jumps) {
        times.insert(j.time);
        event_times.insert(j.time);
    }

    auto emit = [&](double t, const char* side, const HybridState& s) {
        w.cell(t);
        w.cell(std::string(side));
        w.cell(s.mode);
        for (double x : s.position) w.cell(x);
        w.end_row();
    };
    for (double t : times) {
        if (t > 0.0 && event_times.count(t) > 0) emit(t, "pre", state_left_at(path, t));
        emit(t, "post", state_at(path, t));
    }
    w.close();
}

HybridPath load_path_csv(const std::string& file) {
    std::ifstream is(file);
    if (!is) throw IoError("csv: cannot open " + file);
    std::string line;
    if (!std::getline(is, line) || line.rfind(kCsvSchemaPrefix, 0) != 0)
        throw IoError("csv: missing schema header in " + file);
    if (!std::getline(is, line)) throw IoError("csv: missing column header in " + file);
    const auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "time" || header[1] != "side" || header[2] != "mode")
        throw IoError("csv: unexpected path columns in " + file);
    const auto p = header.size() - 3;

    struct Row {
        double time;
        bool pre;
        int mode;
        std::vector<double> x;
    };
    std::vector<Row> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) throw IoError("csv: ragged row in " + file);
        Row r;
        r.time = parse_double(cells[0]);
        r.pre = cells[1] == "pre";
        r.mode = parse_int(cells[2]);
        for (std::size_t d = 0; d < p; ++d) r.x.push_back(parse_double(cells[3 + d]));
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw IoError("csv: empty path file " + file);

    HybridPath path;
    path.origin.mode = rows.front().mode;
    path.origin.position = rows.front().x;
    path.horizon = rows.back().time;

    // Recover the event logs from pre/post row pairs.
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!rows[i].pre) continue;
        const Row& pre = rows[i];
        const Row& post = rows[i + 1];
        if (post.time != pre.time || post.pre)
            throw IoError("csv: dangling pre row in " + file);
        if (pre.mode != post.mode)
            path.discrete_events.push_back({pre.time, pre.mode, post.mode});
        if (pre.x != post.x) path.euclid_jumps.push_back({pre.time, pre.x, post.x});
    }

    // Segment boundaries are the discrete event times; grids take the
    // side=post values.
    std::vector<double> boundaries = {0.0};
    for (const auto& ev : path.discrete_events) boundaries.push_back(ev.time);
    boundaries.push_back(path.horizon);

    int mode = path.origin.mode;
    std::size_t ev = 0;
    std::size_t row_idx = 0;
    for (std::size_t b = 0; b + 1 < boundaries.size(); ++b) {
        const double lo = boundaries[b];
        const double hi = boundaries[b + 1];
        if (!(hi > lo) && !(b + 2 == boundaries.size() && hi == lo)) continue;
        Segment seg;
        seg.t_start = lo;
        seg.t_end = hi;
        seg.p = static_cast<int>(p);
        if (ev < path.discrete_events.size() && path.discrete_events[ev].time == lo) {
            mode = path.discrete_events[ev].post_mode;
            ++ev;
        }
        seg.mode = mode;
        while (row_idx < rows.size() && rows[row_idx].time <= hi) {
            const Row& r = rows[row_idx];
            if (r.pre || r.time < lo) {
                ++row_idx;
                continue;
            }
            seg.grid_times.push_back(r.time);
            seg.grid_values.insert(seg.grid_values.end(), r.x.begin(), r.x.end());
            if (r.time == hi) break; // boundary row also opens the next segment
            ++row_idx;
        }
        if (seg.grid_times.empty() || seg.grid_times.front() != lo || seg.grid_times.back() != hi)
            throw IoError("csv: path rows do not tile the horizon in " + file);
        path.segments.push_back(std::move(seg));
    }
    path.validate();
    return path;
}

void write_audit_csv(const std::vector<AuditRecord>& audit, const std::string& file) {
    CsvWriter w(file, "audit",
                {"atom_index", "time", "mode_before", "q_total", "u", "mode_after"});
    for (const AuditRecord& rec : audit) {
        w.cell(rec.atom_index);
        w.cell(rec.time);
        w.cell(rec.mode_before);
        w.cell(rec.q_total());
        w.cell(rec.u);
        w.cell(rec.mode_after);
        w.end_row();
    }
    w.close();
}

void write_convergence_csv(const ConvergenceReport& report, const std::string& file) {
    CsvWriter w(file, "convergence",
                {"level", "paths", "decoupled", "decouple_frequency", "median_error",
                 "q90_error"});
    for (const LevelStats& st : report.stats) {
        w.cell(static_cast<std::uint64_t>(st.level));
        w.cell(static_cast<std::uint64_t>(st.paths));
        w.cell(static_cast<std::uint64_t>(st.decoupled));
        w.cell(st.decouple_frequency);
        w.cell(st.median_error);
        w.cell(st.q90_error);
        w.end_row();
    }
    w.close();
}

void write_convergence_summary(const ConvergenceReport& report, const std::string& file) {
    std::ofstream os(file, std::ios::trunc);
    if (!os) throw IoError("csv: cannot open " + file + " for writing");
    os << "convergence study summary\n";
    os << "  horizon: " << format_double(report.horizon) << "\n";
    os << "  reference level: " << report.n_fine << "\n";
    os << "  paths per level: " << report.paths_per_level << "\n";
    os << "  seed: " << report.seed << "\n";
    for (const LevelStats& st : report.stats) {
        os << "  level " << st.level << ": decouple_freq=" << format_double(st.decouple_frequency)
           << " median_err=" << format_double(st.median_error)
           << " q90_err=" << format_double(st.q90_error) << "\n";
    }
    if (report.has_fit) {
        os << "  fitted log2 slope: " << format_double(report.slope)
           << " (intercept " << format_double(report.intercept) << ", r^2 "
           << format_double(report.r_squared) << ", residual "
           << format_double(report.fit_residual) << ")\n";
    } else {
        os << "  fitted log2 slope: unavailable\n";
    }
    os << "  verdict median errors strictly decreasing: "
       << (report.median_strictly_decreasing ? "yes" : "no") << "\n";
    os << "  verdict decoupling frequency non-increasing (95% bootstrap): "
       << (report.decoupling_non_increasing_95 ? "yes" : "no") << "\n";
    for (const auto& wmsg : report.warnings) os << "  warning: " << wmsg << "\n";
    if (!os) throw IoError("csv: write failure on " + file);
}

} // namespace hybridsim
