// kicksim command-line front end: simulate tracking runs, evaluate
// flight logs, render result tables.
//
// Exit codes: 0 success, 2 parse/config error, 3 diverged simulation,
// 4 I/O error.

#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "kicksim/config.hpp"
#include "kicksim/report.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;

int run_simulate(const std::string& config_path, const std::string& out_path) {
    kicksim::ExperimentConfig config = kicksim::load_experiment_config(config_path);
    kicksim::FlightLog log = kicksim::run_tracking_sim(config);
    kicksim::write_file(out_path, kicksim::flightlog_to_csv(log));
    if (log.diverged) {
        std::cerr << "simulation diverged: " << log.failure_reason
                  << " (partial log written to " << out_path << ")\n";
        return kExitDiverged;
    }
    std::cout << "wrote " << log.records.size() << " records to " << out_path << "\n";
    return 0;
}

int run_evaluate(const std::vector<std::string>& log_paths,
                 const std::string& out_path, const std::string& artifacts_dir,
                 bool normalize) {
    std::vector<kicksim::EvaluationRow> rows;
    for (const auto& path : log_paths) {
        kicksim::FlightLog log = kicksim::flightlog_from_csv(path);
        auto log_rows = kicksim::evaluate_log(log, normalize);
        rows.insert(rows.end(), log_rows.begin(), log_rows.end());

        if (!artifacts_dir.empty()) {
            auto series = kicksim::extract_comparison_series(log);
            std::string base = artifacts_dir + "/" + kicksim::log_label(log);
            struct Axis {
                const char* name;
                const kicksim::Series* cmd;
                const kicksim::Series* act;
            } axes[] = {{"x", &series.commanded_x, &series.actual_x},
                        {"z", &series.commanded_z, &series.actual_z}};
            for (const auto& axis : axes) {
                kicksim::DtwResult r = kicksim::dtw(*axis.cmd, *axis.act);
                kicksim::dtw_path_heatmap_export(r, base + "_" + axis.name + "_matrix.csv",
                                                 base + "_" + axis.name + "_path.csv");
                kicksim::write_file(base + "_" + axis.name + "_segments.csv",
                                    kicksim::segments_to_csv(kicksim::dtw_alignment_segments(
                                        r, *axis.cmd, *axis.act)));
                kicksim::write_file(base + "_" + axis.name + "_stats.csv",
                                    "diagonal_deviation," +
                                        kicksim::format_double(
                                            kicksim::diagonal_deviation(r)) +
                                        "\n");
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const kicksim::EvaluationRow& a, const kicksim::EvaluationRow& b) {
                         return a.subject_segment < b.subject_segment;
                     });
    kicksim::write_file(out_path, kicksim::rows_to_csv(rows));
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    return 0;
}

int run_table(const std::string& rows_path) {
    auto rows = kicksim::rows_from_csv(rows_path);
    std::cout << kicksim::render_table(rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadrotor trajectory-tracking simulator and evaluator"};
    app.require_subcommand(1);

    std::string config_path, out_path, artifacts_dir, rows_path;
    std::vector<std::string> log_paths;
    bool normalize = false;

    auto* simulate = app.add_subcommand("simulate", "run one tracking simulation");
    simulate->add_option("--config", config_path, "experiment config JSON")->required();
    simulate->add_option("--out", out_path, "output flight log CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "compute MSE/DTW rows from flight logs");
    evaluate->add_option("logs", log_paths, "flight log CSV files")->required();
    evaluate->add_option("--out", out_path, "output rows CSV")->required();
    evaluate->add_option("--dtw-artifacts", artifacts_dir,
                         "directory for DTW matrix/path/segment exports");
    evaluate->add_flag("--normalize", normalize, "divide DTW distance by path length");

    auto* table = app.add_subcommand("table", "render evaluation rows as text tables");
    table->add_option("rows", rows_path, "evaluation rows CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed())
            return run_simulate(config_path, out_path);
        if (evaluate->parsed())
            return run_evaluate(log_paths, out_path, artifacts_dir, normalize);
        return run_table(rows_path);
    } catch (const kicksim::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const kicksim::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
}
