#include "fsnet/problem.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <stdexcept>

#include "fsnet/network.hpp"

namespace fsnet {

void FlowConfig::validate() const {
    if (!(x_max > 0.0)) throw std::invalid_argument("FlowConfig: x_max must be positive");
    if (n_points < 2) throw std::invalid_argument("FlowConfig: n_points must be at least 2");
    if (!std::isfinite(alpha) || !std::isfinite(beta)) {
        throw std::invalid_argument("FlowConfig: alpha and beta must be finite");
    }
}

const std::vector<FlowPreset>& flow_presets() {
    static const std::vector<FlowPreset> presets = {
        {"blasius", 0.5, 0.0, 0.0},
        {"pohlhausen", 0.0, 1.0, 1.0},
        {"homann", 2.0, 1.0, 1.0},
        {"hiemenz", 1.0, 1.0, 1.0},
        {"hastings", 1.0, -0.18, 2.0},
        {"craven", 1.0, 10.0, 40.0},
    };
    return presets;
}

std::optional<FlowPreset> find_preset(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (const auto& p : flow_presets()) {
        if (p.name == lower) return p;
    }
    return std::nullopt;
}

std::vector<double> collocation_points(const FlowConfig& cfg) {
    cfg.validate();
    const std::size_t n = static_cast<std::size_t>(cfg.n_points);
    std::vector<double> pts(n);
    if (cfg.sampling == Sampling::Equidistant) {
        for (std::size_t i = 0; i < n; ++i) {
            pts[i] = cfg.x_max * static_cast<double>(i) / static_cast<double>(n - 1);
        }
        pts.back() = cfg.x_max;
    } else {
        std::mt19937_64 rng(cfg.sampling_seed);
        pts[0] = 0.0;
        pts[n - 1] = cfg.x_max;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            // top 53 bits -> uniform in [0, 1); avoids distribution
            // implementation differences
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            pts[i] = u * cfg.x_max;
        }
        std::sort(pts.begin() + 1, pts.end() - 1);
    }
    return pts;
}

double residual(const Jet3& g, double alpha, double beta) {
    return g.d3 + alpha * g.d0 * g.d2 + beta * (1.0 - g.d1 * g.d1);
}

double loss_from_jets(std::span<const Jet3> interior, const Jet3& at_zero,
                      const Jet3& at_x_max, double alpha, double beta) {
    if (interior.empty()) throw std::invalid_argument("loss_from_jets: no interior points");
    double acc = 0.0;
    for (const Jet3& g : interior) {
        const double r = residual(g, alpha, beta);
        acc += r * r;
    }
    const double mean = acc / static_cast<double>(interior.size());
    const double far = at_x_max.d1 - 1.0;
    return mean + at_zero.d0 * at_zero.d0 + at_zero.d1 * at_zero.d1 + far * far;
}

double loss(const ModelSpec& spec, std::span<const double> theta, const FlowConfig& cfg,
            std::span<const double> points) {
    // Same summation order as loss_gradient; the value is the by-product of
    // the gradient engine so the two never disagree.
    return loss_gradient(spec, theta, cfg, points).loss;
}

}  // namespace fsnet
