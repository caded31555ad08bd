#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fsnet/jet.hpp"
#include "fsnet/orthopoly.hpp"
#include "fsnet/problem.hpp"

namespace fsnet {

enum class Activation { Tanh, Linear };

struct LayerSpec {
    enum class Kind { Dense, LegendreBlock, ChebyshevBlock };

    Kind kind = Kind::Dense;
    int in_dim = 0;
    int out_dim = 0;                              // Dense only
    Activation activation = Activation::Linear;   // Dense only
    int order = 0;                                // blocks only

    static LayerSpec dense(int in, int out, Activation act);
    static LayerSpec legendre_block(int in, int order);
    static LayerSpec chebyshev_block(int in, int order);

    int output_width() const;
    int param_count() const;
    bool is_block() const { return kind != Kind::Dense; }
    BasisKind basis() const;
};

/// Layer stack mapping the scalar x to the scalar g(x).
///
/// Parameter layout (the contract optimizer state relies on): layers in
/// order; a Dense layer stores its out x in weight matrix row-major followed
/// by out biases; a block layer stores its encoder weight row (in values)
/// followed by the encoder bias.
struct ModelSpec {
    std::vector<LayerSpec> layers;

    void validate() const;  // throws std::invalid_argument
    int param_count() const;
    int param_offset(std::size_t layer_index) const;
};

ModelSpec ldnn_preset();
ModelSpec lcdnn_preset();

/// Glorot-uniform weights, zero biases, from a seeded deterministic PRNG.
/// Identical (spec, seed) yields bit-identical vectors.
std::vector<double> init_parameters(const ModelSpec& spec, std::uint64_t seed);

/// Plain scalar forward pass; equals forward_jet(...).d0 exactly.
double forward_value(const ModelSpec& spec, std::span<const double> theta, double x);

/// Forward pass in Jet3 arithmetic seeded with (x, 1, 0, 0); returns the jet
/// (g, g', g'', g''') at x.
Jet3 forward_jet(const ModelSpec& spec, std::span<const double> theta, double x);

/// Encode-then-expand: t = tanh(w . input + b), then the jet of every
/// P_k(t(x)) built from the operational derivative matrices.
JetVector block_forward(BasisKind kind, int order, std::span<const double> w, double b,
                        const JetVector& input);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;
};

/// Loss of problem::loss together with its exact gradient with respect to
/// every parameter (adjoint propagation over jet-valued nodes; block layers
/// are pulled back through the operational matrices). A non-finite loss
/// signals diverged parameters and is returned, not thrown.
///
/// Summation runs over fixed-size point chunks combined in index order, so
/// results are bit-reproducible for any worker count.
LossGrad loss_gradient(const ModelSpec& spec, std::span<const double> theta,
                       const FlowConfig& cfg, std::span<const double> points);

}  // namespace fsnet
