#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fsnet/network.hpp"
#include "fsnet/problem.hpp"

namespace fsnet {

struct AdamConfig {
    int epochs = 100;
    double lr = 0.015;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
    std::int64_t step = 0;

    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update in place.
void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               const AdamConfig& cfg);

enum class LineSearchKind { FixedStep, StrongWolfe };

struct LbfgsConfig {
    int max_iters = 10000;
    double lr = 0.015035;
    double eps = 1e-10;  // |loss_prev - loss| convergence threshold
    int history = 10;
    LineSearchKind line_search = LineSearchKind::StrongWolfe;
};

enum class StopReason { Converged, MaxIterations, Diverged };

const char* stop_reason_name(StopReason r);

enum class Stage { Adam, Lbfgs };

struct TraceEntry {
    Stage stage;
    int iteration;
    double loss;
    std::int64_t wall_time_ms;
};

/// Per-iteration observer payload, mainly for tests.
struct IterationStats {
    int iteration = 0;
    double loss = 0.0;
    double step = 0.0;
    double dir_dot_grad = 0.0;  // at the accepted direction, before stepping
    bool wolfe_ok = false;      // accepted step satisfied both Wolfe conditions
    bool fallback = false;      // line search failed; plain descent step taken
};

/// Evaluates loss and fills grad (resized by the callee).
using LossGradFn = std::function<double(std::span<const double>, std::vector<double>&)>;

struct LbfgsResult {
    std::vector<double> theta;
    double final_loss = 0.0;
    StopReason reason = StopReason::MaxIterations;
    int iterations = 0;
    int line_search_failures = 0;
    std::vector<TraceEntry> trace;
};

/// Two-loop recursion with curvature-pair history; pairs with s.y <= 1e-12
/// are skipped. Strong-Wolfe line search (c1 = 1e-4, c2 = 0.9) starts from
/// cfg.lr on the first iteration and the unit step afterwards; fixed-step
/// mode always steps cfg.lr. Terminates when |loss_prev - loss| < eps or at
/// max_iters. Line-search failure falls back to a steepest-descent step of
/// length lr for that iteration; a non-finite loss aborts with Diverged
/// carrying the last finite theta.
LbfgsResult lbfgs_run(std::vector<double> theta0, const LbfgsConfig& cfg, const LossGradFn& fn,
                      const std::function<void(const IterationStats&)>& observer = {});

struct TrainResult {
    std::vector<double> theta;
    double final_loss = 0.0;
    StopReason reason = StopReason::MaxIterations;
    std::vector<TraceEntry> trace;
    int adam_iterations = 0;
    int lbfgs_iterations = 0;
    std::int64_t adam_ms = 0;
    std::int64_t lbfgs_ms = 0;
};

/// Glorot init -> Adam warm-up (full-batch, `epochs` steps) -> LBFGS
/// refinement seeded with Adam's parameters. Deterministic for fixed inputs.
TrainResult train(const ModelSpec& spec, const FlowConfig& cfg, const AdamConfig& adam,
                  const LbfgsConfig& lbfgs, std::uint64_t seed);

}  // namespace fsnet
