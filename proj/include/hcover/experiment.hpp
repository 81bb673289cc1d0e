#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hcover/hypercube.hpp"

namespace hcover {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind { cover_trend, survivor, lemma1, returns, conductance, degrees, last_degree, joint_unvisited };

std::string to_string(ExperimentKind kind);
ExperimentKind parse_kind(const std::string& name);

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::cover_trend;
    std::vector<int> dimensions;
    std::vector<std::string> p_values; // exact decimal text
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 0;
    double laziness = 0.0;
    std::uint64_t max_resamples = 1000; // per instance draw, disconnected samples
    std::string csv_path;
    std::string json_path;
    std::map<std::string, double> tolerances; // overrides of the per-kind defaults

    /// Default for `name`, replaced by an override when present.
    double tolerance(const std::string& name) const;
};

/// Per-kind tolerance defaults (e.g. cover_trend: ratio_lo 0.7, ratio_hi 1.4, trend_slack 0.05).
std::map<std::string, double> default_tolerances(ExperimentKind kind);

/// Throws ParameterError on schema violations (empty grids, trials < 1, unknown kind or tolerance).
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::string& path);

/// Seed of the (d, p) cell: mixes master seed, d, the p text and the replicate index.
std::uint64_t cell_seed(std::uint64_t master_seed, int d, const std::string& p_text, std::uint64_t replicate = 0);

struct ReportRow {
    std::uint64_t cell = 0;
    int d = 0;
    std::string p;
    std::uint64_t seed = 0;
    std::string statistic;
    double measured = 0.0;
    double predicted = 0.0;
    double ratio = 0.0;  // measured / predicted (NaN when predicted is 0)
    double sigma = 0.0;  // standard error of `measured`, 0 if not applicable
    std::string check;   // "measured", "ratio" or "none"
    std::optional<double> lower;
    std::optional<double> upper;
    bool pass = true;
    std::uint64_t accepted = 0; // instances used
    std::uint64_t rejected = 0; // disconnected instances discarded
    std::string note;

    /// Re-derives pass from check / lower / upper.
    bool evaluate() const;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReportRow> rows;
    double wall_time_seconds = 0.0;

    bool passed() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

/// Columns: cell,kind,d,p,seed,statistic,measured,predicted,ratio,sigma,check,lower,upper,pass,accepted,rejected,note
void write_report_csv(std::ostream& out, const ExperimentReport& report);
/// Summary with config, environment block (version, rng, wall time) and rows.
nlohmann::json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& doc);

struct VerifyResult {
    bool consistent = true;                // stored pass flags match re-evaluation
    std::vector<std::uint64_t> failing;    // indices of rows that fail their band
    std::vector<std::uint64_t> mismatched; // indices whose stored flag disagrees
};

VerifyResult verify_report(const ExperimentReport& report);

/// A connected instance drawn by resampling with seeds derive_seed(seed, k), k = 0, 1, ...
struct InstanceDraw {
    std::optional<HypercubeSubgraph> graph;
    std::uint64_t rejected = 0;
};

InstanceDraw sample_connected(int d, const Probability& p, std::uint64_t seed, std::uint64_t max_attempts);

// Individual runners; run_experiment dispatches on config.kind.
std::vector<ReportRow> run_cover_trend(const ExperimentConfig& config);
std::vector<ReportRow> run_survivor(const ExperimentConfig& config);
std::vector<ReportRow> run_lemma1_verification(const ExperimentConfig& config);
std::vector<ReportRow> run_returns(const ExperimentConfig& config);
std::vector<ReportRow> run_conductance(const ExperimentConfig& config);
std::vector<ReportRow> run_degrees(const ExperimentConfig& config);
std::vector<ReportRow> run_last_degree(const ExperimentConfig& config);
std::vector<ReportRow> run_joint(const ExperimentConfig& config);

} // namespace hcover
