#include "fsnet/optimize.hpp"

#include <cassert>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>

namespace fsnet {

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "eps";
        case StopReason::MaxIterations: return "max_iters";
        case StopReason::Diverged: return "diverged";
    }
    return "unknown";
}

void adam_step(std::vector<double>& theta, std::span<const double> grad, AdamState& state,
               const AdamConfig& cfg) {
    if (grad.size() != theta.size() || state.m.size() != theta.size()) {
        throw std::invalid_argument("adam_step: size mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        theta[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t ms_since(Clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

struct CurvaturePair {
    std::vector<double> s;
    std::vector<double> y;
    double rho;
};

// d = -H g via the two-loop recursion over the stored pairs.
void two_loop_direction(const std::deque<CurvaturePair>& pairs, const std::vector<double>& g,
                        std::vector<double>& d, std::vector<double>& alpha_buf) {
    d = g;
    alpha_buf.resize(pairs.size());
    for (std::size_t i = pairs.size(); i-- > 0;) {
        const CurvaturePair& p = pairs[i];
        const double a = p.rho * dot(p.s, d);
        alpha_buf[i] = a;
        for (std::size_t k = 0; k < d.size(); ++k) d[k] -= a * p.y[k];
    }
    if (!pairs.empty()) {
        const CurvaturePair& last = pairs.back();
        const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
        for (double& v : d) v *= gamma;
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const CurvaturePair& p = pairs[i];
        const double b = p.rho * dot(p.y, d);
        for (std::size_t k = 0; k < d.size(); ++k) d[k] += (alpha_buf[i] - b) * p.s[k];
    }
    for (double& v : d) v = -v;
}

struct LinePoint {
    double t = 0.0;
    double phi = 0.0;
    double dphi = 0.0;
};

struct WolfeResult {
    bool ok = false;
    double t = 0.0;
    double f = 0.0;
    int evals = 0;
};

constexpr double kWolfeC1 = 1e-4;
constexpr double kWolfeC2 = 0.9;
constexpr int kMaxLineEvals = 30;

// Strong Wolfe line search (bracket then zoom). phi(t) = f(x + t d).
// Non-finite trial values are treated as +inf so the bracket shrinks.
WolfeResult strong_wolfe(const LossGradFn& fn, const std::vector<double>& x, double f0,
                         const std::vector<double>& g0, const std::vector<double>& d,
                         double t_init, std::vector<double>& x_trial, std::vector<double>& g_trial) {
    WolfeResult res;
    const double dphi0 = dot(g0, d);
    if (!(dphi0 < 0.0)) return res;

    auto eval = [&](double t) -> LinePoint {
        x_trial.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x_trial[i] = x[i] + t * d[i];
        double phi = fn(x_trial, g_trial);
        res.evals += 1;
        if (!std::isfinite(phi)) phi = std::numeric_limits<double>::infinity();
        return {t, phi, dot(g_trial, d)};
    };

    auto acceptable = [&](const LinePoint& p) {
        return p.phi <= f0 + kWolfeC1 * p.t * dphi0 && std::abs(p.dphi) <= -kWolfeC2 * dphi0;
    };

    auto zoom = [&](LinePoint lo, LinePoint hi) -> WolfeResult {
        for (int i = 0; i < kMaxLineEvals && res.evals < kMaxLineEvals; ++i) {
            // quadratic interpolation from the low end, safeguarded by bisection
            double t = 0.5 * (lo.t + hi.t);
            if (std::isfinite(lo.dphi) && std::isfinite(hi.phi) && hi.phi > lo.phi) {
                const double dt = hi.t - lo.t;
                const double q = lo.phi + lo.dphi * dt;
                if (hi.phi > q) {
                    const double tq = lo.t - 0.5 * lo.dphi * dt * dt / (hi.phi - lo.phi - lo.dphi * dt);
                    const double margin = 0.1 * std::abs(dt);
                    if (std::isfinite(tq) && tq > std::min(lo.t, hi.t) + margin &&
                        tq < std::max(lo.t, hi.t) - margin) {
                        t = tq;
                    }
                }
            }
            if (std::abs(hi.t - lo.t) < 1e-18 * std::max(1.0, std::abs(lo.t))) break;
            LinePoint p = eval(t);
            if (p.phi > f0 + kWolfeC1 * p.t * dphi0 || p.phi >= lo.phi) {
                hi = p;
            } else {
                if (std::abs(p.dphi) <= -kWolfeC2 * dphi0) {
                    return {true, p.t, p.phi, res.evals};
                }
                if (p.dphi * (hi.t - lo.t) >= 0.0) hi = lo;
                lo = p;
            }
        }
        return {false, 0.0, 0.0, res.evals};
    };

    LinePoint prev{0.0, f0, dphi0};
    double t = t_init;
    const double t_max = 1e6;
    for (int i = 0; i < kMaxLineEvals && res.evals < kMaxLineEvals; ++i) {
        LinePoint p = eval(t);
        if (p.phi > f0 + kWolfeC1 * p.t * dphi0 || (i > 0 && p.phi >= prev.phi)) {
            WolfeResult z = zoom(prev, p);
            z.evals = res.evals;
            return z;
        }
        if (acceptable(p)) return {true, p.t, p.phi, res.evals};
        if (p.dphi >= 0.0) {
            WolfeResult z = zoom(p, prev);
            z.evals = res.evals;
            return z;
        }
        prev = p;
        t = std::min(2.0 * t, t_max);
        if (t >= t_max) break;
    }
    return res;
}

}  // namespace

LbfgsResult lbfgs_run(std::vector<double> theta0, const LbfgsConfig& cfg, const LossGradFn& fn,
                      const std::function<void(const IterationStats&)>& observer) {
    if (cfg.max_iters < 1) throw std::invalid_argument("lbfgs_run: max_iters must be >= 1");
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("lbfgs_run: eps must be positive");
    if (cfg.history < 1) throw std::invalid_argument("lbfgs_run: history must be >= 1");

    const auto t0 = Clock::now();
    LbfgsResult res;
    std::vector<double> x = std::move(theta0);
    std::vector<double> g, d, alpha_buf, x_trial, g_trial;
    double f = fn(x, g);
    if (!std::isfinite(f)) {
        res.theta = std::move(x);
        res.final_loss = f;
        res.reason = StopReason::Diverged;
        return res;
    }

    std::deque<CurvaturePair> pairs;
    double prev_f = f;
    res.reason = StopReason::MaxIterations;

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        two_loop_direction(pairs, g, d, alpha_buf);
        double dg = dot(d, g);
        if (!(dg < 0.0)) {
            // curvature information is unusable; restart from steepest descent
            for (std::size_t i = 0; i < d.size(); ++i) d[i] = -g[i];
            dg = -dot(g, g);
            pairs.clear();
        }
        assert(dg < 0.0 || norm2(g) == 0.0);
        if (dg == 0.0) {
            res.reason = StopReason::Converged;
            res.iterations = iter - 1;
            break;
        }

        IterationStats stats;
        stats.iteration = iter;
        stats.dir_dot_grad = dg;

        double f_new = f;
        bool stepped = false;
        if (cfg.line_search == LineSearchKind::FixedStep) {
            x_trial.resize(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) x_trial[i] = x[i] + cfg.lr * d[i];
            f_new = fn(x_trial, g_trial);
            stats.step = cfg.lr;
            stepped = true;
        } else {
            const double t_init = iter == 1 ? cfg.lr : 1.0;
            WolfeResult w = strong_wolfe(fn, x, f, g, d, t_init, x_trial, g_trial);
            if (w.ok) {
                f_new = w.f;
                stats.step = w.t;
                stats.wolfe_ok = true;
                stepped = true;
            } else {
                // steepest-descent step of length lr
                res.line_search_failures += 1;
                stats.fallback = true;
                const double gn = norm2(g);
                if (gn == 0.0) {
                    res.reason = StopReason::Converged;
                    res.iterations = iter - 1;
                    break;
                }
                const double t = cfg.lr / gn;
                x_trial.resize(x.size());
                for (std::size_t i = 0; i < x.size(); ++i) x_trial[i] = x[i] - t * g[i];
                f_new = fn(x_trial, g_trial);
                stats.step = t;
                stats.dir_dot_grad = -gn * gn;
                stepped = true;
            }
        }

        if (!stepped || !std::isfinite(f_new)) {
            res.theta = std::move(x);
            res.final_loss = f;
            res.reason = StopReason::Diverged;
            res.iterations = iter;
            return res;
        }

        // curvature pair
        CurvaturePair p;
        p.s.resize(x.size());
        p.y.resize(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            p.s[i] = x_trial[i] - x[i];
            p.y[i] = g_trial[i] - g[i];
        }
        const double sy = dot(p.s, p.y);
        if (sy > 1e-12) {
            p.rho = 1.0 / sy;
            pairs.push_back(std::move(p));
            if (static_cast<int>(pairs.size()) > cfg.history) pairs.pop_front();
        }

        x.swap(x_trial);
        g.swap(g_trial);
        f = f_new;
        res.iterations = iter;
        res.trace.push_back({Stage::Lbfgs, iter, f, ms_since(t0)});
        stats.loss = f;
        if (observer) observer(stats);

        if (std::abs(prev_f - f) < cfg.eps) {
            res.reason = StopReason::Converged;
            break;
        }
        prev_f = f;
    }

    res.theta = std::move(x);
    res.final_loss = f;
    return res;
}

TrainResult train(const ModelSpec& spec, const FlowConfig& cfg, const AdamConfig& adam,
                  const LbfgsConfig& lbfgs, std::uint64_t seed) {
    spec.validate();
    cfg.validate();
    TrainResult result;
    result.theta = init_parameters(spec, seed);
    const std::vector<double> points = collocation_points(cfg);

    const LossGradFn fn = [&](std::span<const double> theta, std::vector<double>& grad) {
        LossGrad lg = loss_gradient(spec, theta, cfg, points);
        grad = std::move(lg.grad);
        return lg.loss;
    };

    const auto t_adam = Clock::now();
    AdamState state(result.theta.size());
    std::vector<double> grad;
    for (int epoch = 1; epoch <= adam.epochs; ++epoch) {
        const double f = fn(result.theta, grad);
        if (!std::isfinite(f)) {
            result.final_loss = f;
            result.reason = StopReason::Diverged;
            result.adam_iterations = epoch - 1;
            result.adam_ms = ms_since(t_adam);
            return result;
        }
        result.trace.push_back({Stage::Adam, epoch, f, ms_since(t_adam)});
        adam_step(result.theta, grad, state, adam);
        result.adam_iterations = epoch;
    }
    result.adam_ms = ms_since(t_adam);

    const auto t_lbfgs = Clock::now();
    LbfgsResult lr = lbfgs_run(std::move(result.theta), lbfgs, fn);
    result.lbfgs_ms = ms_since(t_lbfgs);
    result.theta = std::move(lr.theta);
    result.final_loss = lr.final_loss;
    result.reason = lr.reason;
    result.lbfgs_iterations = lr.iterations;
    for (const TraceEntry& te : lr.trace) result.trace.push_back(te);
    return result;
}

}  // namespace fsnet
