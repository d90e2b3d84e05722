#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "plab/config.hpp"
#include "plab/error.hpp"

namespace plab {

// One learning-trace entry: the unit of results.csv and of the per-cell
// trace files (which add the raw task metric as a last column).
struct TraceRow {
    std::string task;
    std::string setup;
    std::string encoder;
    std::string learner;
    std::uint64_t seed = 0;
    long iteration = 0; // iteration_or_episode
    double reward = 0.0;
    double cost = 0.0;
    double completion = 0.0;
    double raw_metric = 0.0;
};

inline const char* kResultsHeader =
    "task,setup,encoder,learner,seed,iteration_or_episode,reward,cost,completion";
inline const char* kTraceHeader =
    "task,setup,encoder,learner,seed,iteration_or_episode,reward,cost,completion,raw_metric";

inline std::string trace_row_to_csv(const TraceRow& r, bool with_raw) {
    std::ostringstream out;
    out << r.task << ',' << r.setup << ',' << r.encoder << ',' << r.learner << ',' << r.seed << ','
        << r.iteration << ',' << detail::fmt_double(r.reward) << ',' << detail::fmt_double(r.cost)
        << ',' << detail::fmt_double(r.completion);
    if (with_raw) out << ',' << detail::fmt_double(r.raw_metric);
    return out.str();
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
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

} // namespace detail

inline std::vector<TraceRow> load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open trace file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty trace file: " + path);
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 9) throw FormatError("malformed trace row in " + path + ": " + line);
        TraceRow r;
        r.task = f[0];
        r.setup = f[1];
        r.encoder = f[2];
        r.learner = f[3];
        try {
            r.seed = std::stoull(f[4]);
            r.iteration = std::stol(f[5]);
            r.reward = std::stod(f[6]);
            r.cost = std::stod(f[7]);
            r.completion = std::stod(f[8]);
            if (f.size() > 9) r.raw_metric = std::stod(f[9]);
        } catch (const std::exception&) {
            throw FormatError("malformed trace row in " + path + ": " + line);
        }
        rows.push_back(r);
    }
    return rows;
}

// Scans a directory for trace_*.csv files (sorted by name) and concatenates
// their rows.
inline std::vector<TraceRow> load_trace_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name.rfind("trace_", 0) == 0 && name.size() > 4 &&
            name.substr(name.size() - 4) == ".csv")
            files.push_back(entry.path().string());
    }
    std::sort(files.begin(), files.end());
    std::vector<TraceRow> rows;
    for (const auto& f : files) {
        const auto part = load_trace_csv(f);
        rows.insert(rows.end(), part.begin(), part.end());
    }
    return rows;
}

// Minimal SVG line plot: one polyline per series over a shared index axis.
inline void svg_line_plot(const std::vector<std::pair<std::string, std::vector<double>>>& series,
                          const std::string& title, const std::string& path) {
    if (series.empty()) throw UsageError("svg_line_plot: no series");
    const int W = 640, H = 400, ML = 60, MR = 20, MT = 40, MB = 40;
    double lo = 1e300, hi = -1e300;
    std::size_t n = 0;
    for (const auto& [name, vals] : series) {
        n = std::max(n, vals.size());
        for (double v : vals) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (n < 1) throw UsageError("svg_line_plot: empty series");
    if (hi <= lo) hi = lo + 1.0;
    const char* palette[] = {"#3567a8", "#c0392b", "#27ae60", "#8e44ad", "#d68910"};

    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write plot: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
        << "</text>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << H - MB << "\" x2=\"" << W - MR << "\" y2=\""
        << H - MB << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ML << "\" y1=\"" << MT << "\" x2=\"" << ML << "\" y2=\"" << H - MB
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << ML - 6 << "\" y=\"" << H - MB << "\" text-anchor=\"end\" font-size=\"11\">"
        << detail::fmt_double(lo) << "</text>\n";
    out << "<text x=\"" << ML - 6 << "\" y=\"" << MT + 10
        << "\" text-anchor=\"end\" font-size=\"11\">" << detail::fmt_double(hi) << "</text>\n";
    int si = 0;
    for (const auto& [name, vals] : series) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[si % 5] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double x = ML + (W - ML - MR) * (n > 1 ? static_cast<double>(i) / (n - 1) : 0.5);
            const double y = H - MB - (H - MT - MB) * (vals[i] - lo) / (hi - lo);
            out << detail::fmt_double(x) << ',' << detail::fmt_double(y) << ' ';
        }
        out << "\"/>\n";
        out << "<text x=\"" << W - MR - 4 << "\" y=\"" << MT + 14 + 14 * si
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << palette[si % 5] << "\">" << name
            << "</text>\n";
        ++si;
    }
    out << "</svg>\n";
}

} // namespace plab
