#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "kicksim/metrics.hpp"
#include "kicksim/simharness.hpp"

namespace kicksim {

/// One cell of the evaluation tables: a metric value for one segment,
/// axis and experimental condition.
struct EvaluationRow {
    std::string subject_segment; // e.g. "S1-T1"
    std::string metric;          // "mse" or "dtw"
    std::string axis;            // "x" or "z"
    std::string condition;       // "sim", "pid" or "nonlinear"
    double value = 0.0;
};

inline std::string log_label(const FlightLog& log) {
    auto subject = log.metadata.count("subject_id") ? log.metadata.at("subject_id") : "";
    auto segment = log.metadata.count("segment_id") ? log.metadata.at("segment_id") : "";
    if (subject.empty() && segment.empty())
        return "unknown";
    if (segment.empty())
        return subject;
    return subject.empty() ? segment : subject + "-" + segment;
}

/// MSE and DTW per axis for one log, optionally normalizing the DTW
/// distance by warping-path length.
inline std::vector<EvaluationRow> evaluate_log(const FlightLog& log,
                                               bool normalize_dtw = false) {
    ComparisonSeries series = extract_comparison_series(log);
    std::string label = log_label(log);
    std::string condition =
        log.metadata.count("condition") ? log.metadata.at("condition") : "sim";

    auto dtw_value = [&](const Series& a, const Series& b) {
        DtwResult r = dtw(a, b);
        return normalize_dtw ? r.distance / static_cast<double>(r.path.size())
                             : r.distance;
    };
    return {
        {label, "mse", "x", condition, mse(series.commanded_x, series.actual_x)},
        {label, "mse", "z", condition, mse(series.commanded_z, series.actual_z)},
        {label, "dtw", "x", condition, dtw_value(series.commanded_x, series.actual_x)},
        {label, "dtw", "z", condition, dtw_value(series.commanded_z, series.actual_z)},
    };
}

inline std::string rows_to_csv(const std::vector<EvaluationRow>& rows) {
    std::string out = "subject_segment,metric,axis,condition,value\n";
    for (const auto& r : rows)
        out += r.subject_segment + "," + r.metric + "," + r.axis + "," +
               r.condition + "," + format_double(r.value) + "\n";
    return out;
}

inline std::vector<EvaluationRow> rows_from_csv(const std::string& path) {
    std::string content = read_file(path);
    std::istringstream in(content);
    std::string line;
    if (!std::getline(in, line))
        throw ParseError(path + ": empty rows file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "subject_segment,metric,axis,condition,value")
        throw ParseError(path + ":1: unexpected header '" + line + "'");
    std::vector<EvaluationRow> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto fields = split_csv_line(line);
        std::string ctx = path + ":" + std::to_string(lineno);
        if (fields.size() != 5)
            throw ParseError(ctx + ": expected 5 fields, got " +
                             std::to_string(fields.size()));
        EvaluationRow r{fields[0], fields[1], fields[2], fields[3],
                        parse_double(fields[4], ctx)};
        if (r.metric != "mse" && r.metric != "dtw")
            throw ParseError(ctx + ": unknown metric '" + r.metric + "'");
        if (r.axis != "x" && r.axis != "z")
            throw ParseError(ctx + ": unknown axis '" + r.axis + "'");
        if (!(r.value >= 0.0))
            throw ParseError(ctx + ": value must be non-negative and finite");
        rows.push_back(r);
    }
    if (rows.empty())
        throw ParseError(path + ": no rows");
    return rows;
}

namespace detail {

inline std::string condition_label(const std::string& condition) {
    if (condition == "sim")
        return "Sim";
    if (condition == "pid")
        return "PID";
    if (condition == "nonlinear")
        return "Non Lin";
    return condition;
}

inline std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

} // namespace detail

/// Pivots evaluation rows into per-metric text tables: one column per
/// segment, one row per axis x condition. MSE is displayed x10^-3.
inline std::string render_table(const std::vector<EvaluationRow>& rows) {
    std::vector<std::string> segments;
    for (const auto& r : rows)
        if (std::find(segments.begin(), segments.end(), r.subject_segment) ==
            segments.end())
            segments.push_back(r.subject_segment);
    std::sort(segments.begin(), segments.end());

    std::string out;
    for (const std::string& metric : {"mse", "dtw"}) {
        // preserve first-seen condition order within the metric
        std::vector<std::string> conditions;
        for (const auto& r : rows)
            if (r.metric == metric &&
                std::find(conditions.begin(), conditions.end(), r.condition) ==
                    conditions.end())
                conditions.push_back(r.condition);
        if (conditions.empty())
            continue;

        std::string title = metric == std::string("mse")
                                ? "Mean Squared Error (All Values in x10^-3)"
                                : "Dynamic Time Warping Minimum Path Distance";
        double scale = metric == std::string("mse") ? 1e3 : 1.0;

        std::vector<std::vector<std::string>> cells;
        std::vector<std::string> header{""};
        header.insert(header.end(), segments.begin(), segments.end());
        cells.push_back(header);
        for (const std::string& axis : {"x", "z"}) {
            for (const auto& condition : conditions) {
                std::vector<std::string> row{axis + " " +
                                             detail::condition_label(condition)};
                for (const auto& segment : segments) {
                    std::string cell = "-";
                    for (const auto& r : rows)
                        if (r.metric == metric && r.axis == axis &&
                            r.condition == condition &&
                            r.subject_segment == segment)
                            cell = detail::fixed3(r.value * scale);
                    row.push_back(cell);
                }
                cells.push_back(row);
            }
        }

        std::vector<size_t> widths(cells[0].size(), 0);
        for (const auto& row : cells)
            for (size_t c = 0; c < row.size(); ++c)
                widths[c] = std::max(widths[c], row[c].size());

        out += title + "\n";
        for (const auto& row : cells) {
            for (size_t c = 0; c < row.size(); ++c) {
                if (c + 1 < row.size()) {
                    std::string cell = row[c];
                    cell.resize(widths[c], ' ');
                    out += cell + "  ";
                } else {
                    out += row[c];
                }
            }
            out += "\n";
        }
        out += "\n";
    }
    return out;
}

} // namespace kicksim
