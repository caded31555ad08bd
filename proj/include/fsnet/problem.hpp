#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fsnet/jet.hpp"

namespace fsnet {

struct ModelSpec;  // network.hpp

enum class Sampling { Equidistant, UniformRandom };

/// One Falkner-Skan flow instance together with its collocation grid
/// settings. The far-field condition g'(inf) = 1 is imposed at x_max.
struct FlowConfig {
    double alpha = 0.5;
    double beta = 0.0;
    double x_max = 6.0;
    int n_points = 18000;
    Sampling sampling = Sampling::Equidistant;
    std::uint64_t sampling_seed = 0;

    void validate() const;  // throws std::invalid_argument
};

struct FlowPreset {
    std::string name;
    double alpha;
    double beta_lo;
    double beta_hi;  // equals beta_lo for point presets

    bool is_range() const { return beta_lo != beta_hi; }
};

const std::vector<FlowPreset>& flow_presets();

/// Case-insensitive preset lookup.
std::optional<FlowPreset> find_preset(std::string_view name);

/// Equidistant: n_points values from 0 to x_max inclusive. Random: sorted
/// uniform draws with both endpoints force-included.
std::vector<double> collocation_points(const FlowConfig& cfg);

/// g''' + alpha g g'' + beta (1 - g'^2) evaluated from the jet of g.
double residual(const Jet3& g, double alpha, double beta);

/// Mean squared residual over the interior jets plus the boundary penalty
/// g(0)^2 + g'(0)^2 + (g'(x_max) - 1)^2.
double loss_from_jets(std::span<const Jet3> interior, const Jet3& at_zero,
                      const Jet3& at_x_max, double alpha, double beta);

double loss(const ModelSpec& spec, std::span<const double> theta, const FlowConfig& cfg,
            std::span<const double> points);

}  // namespace fsnet
