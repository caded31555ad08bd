#include "fsnet/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

namespace fsnet {

namespace {

constexpr double kOverflowLimit = 1e8;

struct Deriv {
    double dg, dgp, dgpp;
};

inline Deriv rhs(double alpha, double beta, const OdeState& s) {
    return {s.gp, s.gpp, -alpha * s.g * s.gpp - beta * (1.0 - s.gp * s.gp)};
}

inline OdeState advance(const OdeState& s, const Deriv& d, double h) {
    return {s.g + h * d.dg, s.gp + h * d.dgp, s.gpp + h * d.dgpp};
}

inline OdeState rk4_step(double alpha, double beta, const OdeState& s, double h) {
    const Deriv k1 = rhs(alpha, beta, s);
    const Deriv k2 = rhs(alpha, beta, advance(s, k1, 0.5 * h));
    const Deriv k3 = rhs(alpha, beta, advance(s, k2, 0.5 * h));
    const Deriv k4 = rhs(alpha, beta, advance(s, k3, h));
    const double sixth = h / 6.0;
    return {s.g + sixth * (k1.dg + 2.0 * k2.dg + 2.0 * k3.dg + k4.dg),
            s.gp + sixth * (k1.dgp + 2.0 * k2.dgp + 2.0 * k3.dgp + k4.dgp),
            s.gpp + sixth * (k1.dgpp + 2.0 * k2.dgpp + 2.0 * k3.dgpp + k4.dgpp)};
}

inline bool out_of_range(const OdeState& s) {
    return !std::isfinite(s.g) || !std::isfinite(s.gp) || !std::isfinite(s.gpp) ||
           std::abs(s.g) > kOverflowLimit || std::abs(s.gp) > kOverflowLimit ||
           std::abs(s.gpp) > kOverflowLimit;
}

}  // namespace

IntegrationResult integrate(double alpha, double beta, double gpp0, double x_max, double h,
                            bool record_rows) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate: step must be positive");
    IntegrationResult res;
    OdeState s{0.0, 0.0, gpp0};
    double x = 0.0;
    if (record_rows) res.rows.push_back({x, s.g, s.gp, s.gpp});
    while (x < x_max - 1e-15) {
        const double hh = std::min(h, x_max - x);
        const OdeState next = rk4_step(alpha, beta, s, hh);
        if (out_of_range(next)) {
            res.diverged = true;
            break;
        }
        s = next;
        x += hh;
        if (record_rows) res.rows.push_back({x, s.g, s.gp, s.gpp});
    }
    res.last = s;
    res.x_reached = x;
    return res;
}

IntegrationResult integrate_at(double alpha, double beta, double gpp0,
                               std::span<const double> nodes, double h) {
    if (!(h > 0.0)) throw std::invalid_argument("integrate_at: step must be positive");
    IntegrationResult res;
    res.rows.reserve(nodes.size());
    OdeState s{0.0, 0.0, gpp0};
    double x = 0.0;
    bool settled = false;
    double g_at_settle = 0.0, x_at_settle = 0.0;
    std::size_t next_node = 0;
    while (next_node < nodes.size() && nodes[next_node] <= 1e-15) {
        res.rows.push_back({nodes[next_node], s.g, s.gp, s.gpp});
        ++next_node;
    }
    while (next_node < nodes.size()) {
        if (settled) {
            // far field reached: continue the asymptote g' = 1 analytically
            const double xn = nodes[next_node];
            res.rows.push_back({xn, g_at_settle + (xn - x_at_settle), 1.0, 0.0});
            ++next_node;
            continue;
        }
        const double target = nodes[next_node];
        const double hh = std::min(h, target - x);
        const OdeState next = rk4_step(alpha, beta, s, hh);
        if (out_of_range(next)) {
            res.diverged = true;
            break;
        }
        s = next;
        x += hh;
        if (x >= target - 1e-15) {
            res.rows.push_back({target, s.g, s.gp, s.gpp});
            ++next_node;
        }
        if (std::abs(s.gp - 1.0) < 1e-7 && std::abs(s.gpp) < 1e-7) {
            settled = true;
            g_at_settle = s.g;
            x_at_settle = x;
        }
    }
    res.last = s;
    res.x_reached = x;
    return res;
}

double shoot_x_max(double beta) {
    // The forward sensitivity of g'(x) to g''(0) grows like
    // exp(sqrt(2 beta) x) once the layer is crossed, so large-beta flows
    // must be matched on short domains to stay resolvable in double
    // precision. Truncation error decays at the same rate and is negligible
    // at these horizons.
    return std::clamp(10.0 / std::sqrt(std::max(1.0, beta)), 2.0, 10.0);
}

namespace {

struct Flight {
    double f = 0.0;        // classified g'(x_max) - 1
    bool reached_end = false;
    double gp_max = 0.0;
    double gp_min = 0.0;
    double gpp_end = 0.0;
};

// Endpoint function with early classification: trajectories that leave the
// physical band of the monotone branch terminate immediately with a large
// signed value, which removes transient spurious roots and caps the cost of
// wild shots.
Flight fly(double alpha, double beta, double s0, double x_max, double h) {
    Flight fl;
    OdeState s{0.0, 0.0, s0};
    double x = 0.0;
    while (x < x_max - 1e-15) {
        const double hh = std::min(h, x_max - x);
        const OdeState next = rk4_step(alpha, beta, s, hh);
        if (out_of_range(next)) {
            fl.f = s.gp >= 1.0 ? 1e6 : -1e6;
            return fl;
        }
        s = next;
        x += hh;
        fl.gp_max = std::max(fl.gp_max, s.gp);
        fl.gp_min = std::min(fl.gp_min, s.gp);
        if (s.gp > 2.0) {
            fl.f = 1e6;
            return fl;
        }
        if (s.gp < -1.0) {
            fl.f = -1e6;
            return fl;
        }
    }
    fl.f = s.gp - 1.0;
    fl.reached_end = true;
    fl.gpp_end = s.gpp;
    return fl;
}

struct Candidate {
    double s = 0.0;
    Flight flight;
    double lo = 0.0, hi = 0.0;
};

}  // namespace

ShootingResult shoot(double alpha, double beta, const ShootOptions& opts) {
    const double x_max = opts.x_max > 0.0 ? opts.x_max : shoot_x_max(beta);
    const double h = opts.h;
    const double tol = opts.tol;
    if (!(h > 0.0)) throw std::invalid_argument("shoot: step must be positive");
    if (!(tol > 0.0)) throw std::invalid_argument("shoot: tolerance must be positive");

    ShootingResult res;
    int n_flights = 0;
    auto F = [&](double s) {
        ++n_flights;
        return fly(alpha, beta, s, x_max, h);
    };

    auto polish = [&](double s0, Flight f0, double s1, Flight f1, double lo,
                      double hi) -> Candidate {
        Candidate best{std::abs(f0.f) <= std::abs(f1.f) ? s0 : s1,
                       std::abs(f0.f) <= std::abs(f1.f) ? f0 : f1, lo, hi};
        for (int i = 0; i < 8 && std::abs(best.flight.f) > tol; ++i) {
            const double den = f1.f - f0.f;
            if (den == 0.0) break;
            const double s2 = s1 - f1.f * (s1 - s0) / den;
            if (!(s2 > lo && s2 < hi)) break;
            const Flight f2 = F(s2);
            s0 = s1;
            f0 = f1;
            s1 = s2;
            f1 = f2;
            if (std::abs(f1.f) < std::abs(best.flight.f)) {
                best.s = s1;
                best.flight = f1;
            }
        }
        return best;
    };

    auto refine_bracket = [&](double a, Flight fa, double b, Flight fb) -> Candidate {
        const double lo0 = a, hi0 = b;
        Candidate best{std::abs(fa.f) <= std::abs(fb.f) ? a : b,
                       std::abs(fa.f) <= std::abs(fb.f) ? fa : fb, lo0, hi0};
        for (int i = 0; i < 200; ++i) {
            if (b - a < 1e-15 * std::max(1.0, std::abs(b))) break;
            const double mid = 0.5 * (a + b);
            const Flight fm = F(mid);
            if (std::abs(fm.f) < std::abs(best.flight.f)) {
                best.s = mid;
                best.flight = fm;
            }
            if (std::abs(fm.f) <= tol) break;
            if ((fa.f < 0.0) != (fm.f < 0.0)) {
                b = mid;
                fb = fm;
            } else {
                a = mid;
                fa = fm;
            }
        }
        if (std::abs(best.flight.f) > tol) {
            Candidate pol = polish(a, fa, b, fb, lo0, hi0);
            if (std::abs(pol.flight.f) < std::abs(best.flight.f)) {
                pol.lo = lo0;
                pol.hi = hi0;
                best = pol;
            }
        }
        return best;
    };

    std::vector<Candidate> candidates;

    if (opts.s_hint) {
        const double s = *opts.s_hint;
        const Flight f0 = F(s);
        if (std::abs(f0.f) <= tol) {
            candidates.push_back({s, f0, s, s});
        } else {
            const double s1 = s + std::max(1e-8, 1e-8 * std::abs(s));
            const Candidate c = polish(s, f0, s1, F(s1), s - 1.0, s + 1.0);
            if (std::abs(c.flight.f) <= tol) candidates.push_back(c);
        }
    }

    if (candidates.empty()) {
        struct Grid {
            double lo, hi;
            int cells;
        };
        const Grid grids[] = {{0.0, 10.0, 40}, {0.0, 10.0, 160}, {0.0, 100.0, 400},
                              {0.0, 100.0, 1600}};
        for (const Grid& grid : grids) {
            std::vector<Flight> vals(static_cast<std::size_t>(grid.cells) + 1);
            for (int i = 0; i <= grid.cells; ++i) {
                const double s = grid.lo + (grid.hi - grid.lo) * i / grid.cells;
                vals[static_cast<std::size_t>(i)] = F(s);
            }
            for (int i = 0; i < grid.cells; ++i) {
                const Flight& fa = vals[static_cast<std::size_t>(i)];
                const Flight& fb = vals[static_cast<std::size_t>(i) + 1];
                const double a = grid.lo + (grid.hi - grid.lo) * i / grid.cells;
                const double b = grid.lo + (grid.hi - grid.lo) * (i + 1) / grid.cells;
                if (fa.f == 0.0) {
                    candidates.push_back({a, fa, a, b});
                } else if ((fa.f < 0.0) != (fb.f < 0.0)) {
                    candidates.push_back(refine_bracket(a, fa, b, fb));
                }
            }
            if (!candidates.empty()) break;
        }
    }

    if (candidates.empty()) {
        throw BracketFailure("shoot: no sign change of g'(x_max; s) - 1 for s in [0, 100]");
    }

    // Prefer candidates that reached x_max on the physical branch with a
    // settled far field; spurious transient crossings carry a large g''.
    auto rank = [](const Candidate& c) {
        const bool physical =
            c.flight.reached_end && c.flight.gp_max <= 1.05 && c.flight.gp_min >= -0.05;
        return std::tuple<int, int, double>(c.flight.reached_end ? 0 : 1, physical ? 0 : 1,
                                            std::abs(c.flight.gpp_end));
    };
    const Candidate* best = &candidates.front();
    for (const Candidate& c : candidates) {
        if (rank(c) < rank(*best)) best = &c;
    }

    res.s_star = best->s;
    res.bracket_lo = best->lo;
    res.bracket_hi = best->hi;
    res.residual_at_x_max = best->flight.f;
    res.iterations = n_flights;
    if (!opts.profile_nodes.empty()) {
        res.profile = integrate_at(alpha, beta, res.s_star, opts.profile_nodes, h).rows;
    }
    return res;
}

ErrorMetrics error_metrics(std::span<const ProfileRow> model_profile,
                           std::span<const ProfileRow> oracle_profile) {
    if (model_profile.size() != oracle_profile.size() || model_profile.empty()) {
        throw std::invalid_argument("error_metrics: profiles must share a non-empty node set");
    }
    ErrorMetrics m;
    double sq = 0.0, ab = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < model_profile.size(); ++i) {
        if (std::abs(model_profile[i].x - oracle_profile[i].x) > 1e-9) {
            throw std::invalid_argument("error_metrics: node mismatch");
        }
        const double d = model_profile[i].g - oracle_profile[i].g;
        sq += d * d;
        ab += std::abs(d);
        mx = std::max(mx, std::abs(d));
    }
    const double n = static_cast<double>(model_profile.size());
    m.mse = sq / n;
    m.mae = ab / n;
    m.l1 = ab;
    m.l2 = std::sqrt(sq);
    m.linf = mx;
    return m;
}

}  // namespace fsnet
