#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace fsnet {

/// First-order state of the flow equation: (g, g', g'').
struct OdeState {
    double g = 0.0;
    double gp = 0.0;
    double gpp = 0.0;
};

struct ProfileRow {
    double x = 0.0;
    double g = 0.0;
    double gp = 0.0;
    double gpp = 0.0;
};

struct IntegrationResult {
    std::vector<ProfileRow> rows;  // at every accepted step, or at the requested nodes
    OdeState last;                 // last finite state reached
    double x_reached = 0.0;
    bool diverged = false;
};

/// Classical fixed-step RK4 from (g, g', g'') = (0, 0, gpp0); the last
/// partial step is shortened to land on x_max exactly. Overflow sets the
/// diverged flag and stops.
IntegrationResult integrate(double alpha, double beta, double gpp0, double x_max, double h,
                            bool record_rows = true);

/// Same integrator, sampling the state at the given sorted nodes (steps are
/// shortened to land on each node). Once the far field has settled the
/// asymptote g' = 1, g'' = 0 is continued analytically, which keeps long
/// profiles meaningful for strongly amplifying flows.
IntegrationResult integrate_at(double alpha, double beta, double gpp0,
                               std::span<const double> nodes, double h);

struct BracketFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShootOptions {
    double x_max = 0.0;  // <= 0 selects shoot_x_max(beta)
    double h = 1e-3;
    double tol = 1e-8;   // on |g'(x_max; s) - 1|
    std::optional<double> s_hint;
    std::vector<double> profile_nodes;  // empty: no profile in the result
};

/// Default shooting horizon: far enough that truncating infinity is
/// negligible, short enough that the forward sensitivity of g'(x_max) to
/// g''(0) stays resolvable in double precision (it grows exponentially with
/// sqrt(beta) x).
double shoot_x_max(double beta);

struct ShootingResult {
    double s_star = 0.0;  // g''(0)
    std::vector<ProfileRow> profile;
    int iterations = 0;   // integrations performed
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    double residual_at_x_max = 0.0;  // g'(x_max; s_star) - 1
};

/// Root-finding on s = g''(0) so that g'(x_max; s) = 1. Brackets are located
/// by scanning [0, 10] (expanded to [0, 100]) for sign changes of the
/// event-classified endpoint function, refined by bisection and polished by
/// secant steps; among converged candidates the one with the settled far
/// field (smallest |g''(x_max)|) wins. Throws BracketFailure when no sign
/// change exists in the maximal bracket.
ShootingResult shoot(double alpha, double beta, const ShootOptions& opts = {});

struct ErrorMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double l1 = 0.0;
    double l2 = 0.0;
    double linf = 0.0;
};

/// Error norms of the g column between two profiles sampled at identical
/// nodes. Node mismatch throws std::invalid_argument.
ErrorMetrics error_metrics(std::span<const ProfileRow> model_profile,
                           std::span<const ProfileRow> oracle_profile);

}  // namespace fsnet
