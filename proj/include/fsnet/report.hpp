#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fsnet/network.hpp"
#include "fsnet/optimize.hpp"
#include "fsnet/oracle.hpp"
#include "fsnet/problem.hpp"

namespace fsnet {

struct OutputPaths {
    std::string report = "report.json";
    std::string profile_csv = "profile.csv";
    std::string trace_csv = "trace.csv";
};

/// Everything a solve run needs. Serializes to/from the JSON config file;
/// keys mirror the field names.
struct RunConfig {
    FlowConfig flow;
    ModelSpec model = lcdnn_preset();
    std::string model_name = "lcdnn";  // "lcdnn", "ldnn" or "custom"
    AdamConfig adam;
    LbfgsConfig lbfgs;
    std::uint64_t seed = 0;
    bool no_oracle = false;
    OutputPaths paths;
};

struct TrainingReport {
    std::string artifact_version;
    double g_dd_0 = 0.0;  // forward_jet(theta*, 0).d2 of the final model
    double final_loss = 0.0;
    StopReason converged = StopReason::MaxIterations;
    std::optional<ErrorMetrics> metrics;       // vs. the shooting oracle
    std::optional<double> oracle_g_dd_0;
    std::int64_t adam_ms = 0;
    std::int64_t lbfgs_ms = 0;
    std::int64_t total_ms = 0;
    int adam_iterations = 0;
    int lbfgs_iterations = 0;
    RunConfig config;            // echoed, so the run can be reproduced
    std::vector<double> theta;   // final parameters
};

/// Trains per the config, evaluates g''(0), and (unless no_oracle) shoots
/// the reference solution on the training grid for error metrics.
TrainingReport run_solve(const RunConfig& cfg, std::vector<TraceEntry>* trace_out = nullptr);

/// Recomputes g''(0), loss and oracle metrics from a saved report's config
/// and theta (no training).
TrainingReport evaluate_report(const TrainingReport& saved);

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

/// Existing values in `cfg` act as defaults; only keys present in the JSON
/// are overwritten.
void merge_run_config_json(RunConfig& cfg, const std::string& text);

std::string report_to_json(const TrainingReport& report);
TrainingReport report_from_json(const std::string& text);

/// x,g,gp,gpp,residual rows for the model over the given points, 17
/// significant digits.
void write_profile_csv(const std::string& path, const ModelSpec& spec,
                       std::span<const double> theta, std::span<const double> points,
                       double alpha, double beta);

/// x,g,gp,gpp rows of an oracle profile.
void write_oracle_csv(const std::string& path, std::span<const ProfileRow> profile);

void write_trace_csv(const std::string& path, std::span<const TraceEntry> trace);

}  // namespace fsnet
