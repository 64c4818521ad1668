#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "kicksim/errors.hpp"
#include "kicksim/io_util.hpp"

namespace kicksim {

/// One axis of a trajectory. The sample rate is metadata used only for
/// timestamping alignment segments.
struct Series {
    std::vector<double> values;
    double sample_rate = 1.0;
};

/// Accumulated-cost matrix, minimum-path distance and the backtracked
/// warping path from (0,0) to (n-1,m-1).
struct DtwResult {
    Eigen::MatrixXd cost_matrix;
    double distance = 0.0;
    std::vector<std::pair<int, int>> path;
};

/// Mean squared error over element-aligned series.
inline double mse(const Series& a, const Series& b) {
    if (a.values.size() != b.values.size())
        throw LengthMismatch("mse: series lengths differ (" +
                             std::to_string(a.values.size()) + " vs " +
                             std::to_string(b.values.size()) + ")");
    if (a.values.empty())
        throw EmptySeries("mse: empty series");
    double sum = 0.0;
    for (size_t k = 0; k < a.values.size(); ++k) {
        double d = a.values[k] - b.values[k];
        sum += d * d;
    }
    return sum / static_cast<double>(a.values.size());
}

/// Dynamic time warping with absolute-difference cost.
/// Recurrence: D[i,j] = |A_i - B_j| + min(D[i-1,j-1], D[i-1,j], D[i,j-1]),
/// cumulative first row/column, D[0,0] = |A_0 - B_0|.
/// Backtracking tie-break: diagonal, then vertical, then horizontal.
inline DtwResult dtw(const Series& a, const Series& b) {
    if (a.values.empty() || b.values.empty())
        throw EmptySeries("dtw: empty series");
    const auto n = static_cast<int>(a.values.size());
    const auto m = static_cast<int>(b.values.size());

    DtwResult r;
    r.cost_matrix.resize(n, m);
    Eigen::MatrixXd& d = r.cost_matrix;
    d(0, 0) = std::abs(a.values[0] - b.values[0]);
    for (int i = 1; i < n; ++i)
        d(i, 0) = std::abs(a.values[i] - b.values[0]) + d(i - 1, 0);
    for (int j = 1; j < m; ++j)
        d(0, j) = std::abs(a.values[0] - b.values[j]) + d(0, j - 1);
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < m; ++j)
            d(i, j) = std::abs(a.values[i] - b.values[j]) +
                      std::min({d(i - 1, j - 1), d(i - 1, j), d(i, j - 1)});
    r.distance = d(n - 1, m - 1);

    int i = n - 1, j = m - 1;
    r.path.emplace_back(i, j);
    while (i > 0 || j > 0) {
        if (i == 0) {
            --j;
        } else if (j == 0) {
            --i;
        } else {
            double diag = d(i - 1, j - 1);
            double vert = d(i - 1, j);
            double horz = d(i, j - 1);
            if (diag <= vert && diag <= horz) {
                --i;
                --j;
            } else if (vert <= horz) {
                --i;
            } else {
                --j;
            }
        }
        r.path.emplace_back(i, j);
    }
    std::reverse(r.path.begin(), r.path.end());
    return r;
}

struct AlignmentSegment {
    double t_a = 0.0, value_a = 0.0;
    double t_b = 0.0, value_b = 0.0;
};

/// One segment per warping-path element, connecting a_i at its timestamp
/// to b_j at its timestamp.
inline std::vector<AlignmentSegment> dtw_alignment_segments(const DtwResult& result,
                                                            const Series& a,
                                                            const Series& b) {
    std::vector<AlignmentSegment> segments;
    segments.reserve(result.path.size());
    for (auto [i, j] : result.path) {
        AlignmentSegment s;
        s.t_a = static_cast<double>(i) / a.sample_rate;
        s.value_a = a.values[static_cast<size_t>(i)];
        s.t_b = static_cast<double>(j) / b.sample_rate;
        s.value_b = b.values[static_cast<size_t>(j)];
        segments.push_back(s);
    }
    return segments;
}

/// Max deviation of the warping path from the (rescaled) matrix diagonal.
/// Large values indicate phase lag between the series.
inline double diagonal_deviation(const DtwResult& result) {
    const auto n = result.cost_matrix.rows();
    const auto m = result.cost_matrix.cols();
    double slope = n > 1 ? static_cast<double>(m - 1) / static_cast<double>(n - 1) : 0.0;
    double dev = 0.0;
    for (auto [i, j] : result.path)
        dev = std::max(dev, std::abs(i * slope - j));
    return dev;
}

/// Writes the cost matrix (row-major CSV) and the path (`i,j` CSV) so a
/// plotting tool can redraw the heatmap with the overlaid minimum path.
inline void dtw_path_heatmap_export(const DtwResult& result,
                                    const std::string& matrix_path,
                                    const std::string& path_path) {
    std::string matrix;
    for (Eigen::Index i = 0; i < result.cost_matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < result.cost_matrix.cols(); ++j) {
            if (j > 0)
                matrix += ',';
            matrix += format_double(result.cost_matrix(i, j));
        }
        matrix += '\n';
    }
    write_file(matrix_path, matrix);

    std::string path_csv = "i,j\n";
    for (auto [i, j] : result.path)
        path_csv += std::to_string(i) + "," + std::to_string(j) + "\n";
    write_file(path_path, path_csv);
}

inline std::string segments_to_csv(const std::vector<AlignmentSegment>& segments) {
    std::string out = "t_a,va,t_b,vb\n";
    for (const auto& s : segments) {
        out += format_double(s.t_a);
        out += ',';
        out += format_double(s.value_a);
        out += ',';
        out += format_double(s.t_b);
        out += ',';
        out += format_double(s.value_b);
        out += '\n';
    }
    return out;
}

} // namespace kicksim
