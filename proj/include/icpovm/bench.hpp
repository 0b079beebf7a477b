#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "icpovm/optimizer.hpp"
#include "icpovm/serialization.hpp"

namespace icpovm::bench {

/// Configuration error (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string experiment;
    int n_qubits = 1;
    int n_repetitions = 50;
    int n_observables = 1;
    std::vector<std::int64_t> shot_grid;
    std::vector<std::string> s_bias = {"auto"};
    std::vector<std::string> povm_classes;
    std::vector<std::string> dual_schemes;
    std::uint64_t seed = 0;
    std::string output_path;
    int restarts = 5;
    int workers = 1;

    static ExperimentConfig from_json(const nlohmann::json& j);
};

struct ResultRow {
    std::string experiment;
    int repetition = 0;
    std::string povm_class;
    std::string dual_scheme;
    int observable = 0;  // -1 for set-level metrics
    std::string metric;  // F | F_C | ssv | ratio
    double value = 0.0;
    double wall_time_ms = 0.0;  // emitted as 0 so output is byte-stable
    std::uint64_t seed = 0;
};

std::string csv_header();
std::string to_csv_line(const ResultRow& row);
void write_rows_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// 5/25/50/75/95% quantiles per (experiment, class, scheme, metric), written
/// to <output_path>.summary.json.
void write_summary(const std::string& path, const std::vector<ResultRow>& rows);

/// Fig.-1-style benchmark: per repetition, a Haar state and random
/// observable(s); F (or F_C) for each configured class x dual scheme.
std::vector<ResultRow> run_class_performance(const ExperimentConfig& config);

/// Fig.-2-style benchmark: exact-probability SSV ratios of m-local and
/// global-optimal duals over canonical duals for N = 1..n_qubits.
std::vector<ResultRow> run_marginal_scaling(const ExperimentConfig& config);

/// Fig.-3-style benchmark: true SSV of biased empirical-frequency duals as
/// the shot budget grows.
std::vector<ResultRow> run_shot_convergence(const ExperimentConfig& config);

/// Post-processing of external shot files; returns the result JSON.
nlohmann::json estimate_from_files(const std::string& shot_path, const std::string& povm_path,
                                   const std::string& observable_path,
                                   const std::string& duals_spec);

/// Runs the experiment named by config.experiment, writes the CSV and the
/// summary sidecar.
void run_and_write(const ExperimentConfig& config);

}  // namespace icpovm::bench
