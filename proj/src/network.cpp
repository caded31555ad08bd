#include "fsnet/network.hpp"

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "fsnet/parallel.hpp"

namespace fsnet {

// ---------------------------------------------------------------------------
// Layer and model specs
// ---------------------------------------------------------------------------

LayerSpec LayerSpec::dense(int in, int out, Activation act) {
    LayerSpec s;
    s.kind = Kind::Dense;
    s.in_dim = in;
    s.out_dim = out;
    s.activation = act;
    return s;
}

LayerSpec LayerSpec::legendre_block(int in, int order) {
    LayerSpec s;
    s.kind = Kind::LegendreBlock;
    s.in_dim = in;
    s.order = order;
    return s;
}

LayerSpec LayerSpec::chebyshev_block(int in, int order) {
    LayerSpec s;
    s.kind = Kind::ChebyshevBlock;
    s.in_dim = in;
    s.order = order;
    return s;
}

int LayerSpec::output_width() const {
    return kind == Kind::Dense ? out_dim : order + 1;
}

int LayerSpec::param_count() const {
    return kind == Kind::Dense ? in_dim * out_dim + out_dim : in_dim + 1;
}

BasisKind LayerSpec::basis() const {
    return kind == Kind::ChebyshevBlock ? BasisKind::Chebyshev : BasisKind::Legendre;
}

void ModelSpec::validate() const {
    if (layers.empty()) throw std::invalid_argument("ModelSpec: no layers");
    if (layers.front().in_dim != 1) throw std::invalid_argument("ModelSpec: input width must be 1");
    if (layers.back().output_width() != 1) {
        throw std::invalid_argument("ModelSpec: output width must be 1");
    }
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& l = layers[i];
        if (l.in_dim < 1) throw std::invalid_argument("ModelSpec: layer input width must be >= 1");
        if (l.kind == LayerSpec::Kind::Dense && l.out_dim < 1) {
            throw std::invalid_argument("ModelSpec: dense output width must be >= 1");
        }
        if (l.is_block() && l.order < 0) {
            throw std::invalid_argument("ModelSpec: block order must be non-negative");
        }
        if (i + 1 < layers.size() && l.output_width() != layers[i + 1].in_dim) {
            throw std::invalid_argument("ModelSpec: widths of layers " + std::to_string(i) +
                                        " and " + std::to_string(i + 1) + " do not chain");
        }
    }
}

int ModelSpec::param_count() const {
    int total = 0;
    for (const auto& l : layers) total += l.param_count();
    return total;
}

int ModelSpec::param_offset(std::size_t layer_index) const {
    int off = 0;
    for (std::size_t i = 0; i < layer_index; ++i) off += layers[i].param_count();
    return off;
}

ModelSpec ldnn_preset() {
    ModelSpec spec;
    spec.layers = {
        LayerSpec::dense(1, 10, Activation::Tanh),
        LayerSpec::legendre_block(10, 8),
        LayerSpec::dense(9, 1, Activation::Linear),
    };
    return spec;
}

ModelSpec lcdnn_preset() {
    ModelSpec spec;
    spec.layers = {
        LayerSpec::dense(1, 10, Activation::Tanh),
        LayerSpec::legendre_block(10, 8),
        LayerSpec::chebyshev_block(9, 8),
        LayerSpec::dense(9, 1, Activation::Linear),
    };
    return spec;
}

// ---------------------------------------------------------------------------
// Parameter initialization
// ---------------------------------------------------------------------------

namespace {

struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace

std::vector<double> init_parameters(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<double> theta(static_cast<std::size_t>(spec.param_count()), 0.0);
    SplitMix64 rng(seed);
    std::size_t pos = 0;
    for (const auto& l : spec.layers) {
        const int fan_in = l.in_dim;
        // a block's encoder is a single neuron
        const int fan_out = l.kind == LayerSpec::Kind::Dense ? l.out_dim : 1;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        const int n_weights = l.kind == LayerSpec::Kind::Dense ? l.in_dim * l.out_dim : l.in_dim;
        for (int i = 0; i < n_weights; ++i) {
            theta[pos++] = (2.0 * rng.uniform01() - 1.0) * bound;
        }
        const int n_biases = l.kind == LayerSpec::Kind::Dense ? l.out_dim : 1;
        pos += static_cast<std::size_t>(n_biases);  // biases stay zero
    }
    return theta;
}

// ---------------------------------------------------------------------------
// Forward / backward engine
// ---------------------------------------------------------------------------

namespace {

struct TanhDerivs {
    double f0, f1, f2, f3, f4;
};

inline TanhDerivs tanh_derivs(double x) {
    const double t = std::tanh(x);
    const double s = 1.0 - t * t;
    return {t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t), 8.0 * t * s * (2.0 - 3.0 * t * t)};
}

inline double dot4(const Jet3& a, const Jet3& b) {
    return a.d0 * b.d0 + a.d1 * b.d1 + a.d2 * b.d2 + a.d3 * b.d3;
}

// Pullback of y = tanh_jet(u): given the adjoint of y, returns the adjoint
// of u. Needs tanh derivatives up to order four at u.d0.
inline Jet3 tanh_pullback(const Jet3& u, const Jet3& yb) {
    const TanhDerivs d = tanh_derivs(u.d0);
    const double u1 = u.d1, u2 = u.d2, u3 = u.d3;
    Jet3 ub;
    ub.d0 = d.f1 * yb.d0 + d.f2 * u1 * yb.d1 + (d.f3 * u1 * u1 + d.f2 * u2) * yb.d2 +
            (d.f4 * u1 * u1 * u1 + 3.0 * d.f3 * u1 * u2 + d.f2 * u3) * yb.d3;
    ub.d1 = d.f1 * yb.d1 + 2.0 * d.f2 * u1 * yb.d2 +
            (3.0 * d.f3 * u1 * u1 + 3.0 * d.f2 * u2) * yb.d3;
    ub.d2 = d.f1 * yb.d2 + 3.0 * d.f2 * u1 * yb.d3;
    ub.d3 = d.f1 * yb.d3;
    return ub;
}

struct BlockScratch {
    Jet3 z;  // encoder pre-activation
    Jet3 t;  // encoder output
    // basis vector at t.d0 and its images under M^(1)..M^(4); p[4] feeds the
    // pullback of p[3]
    std::vector<double> p[5];
};

struct CompiledLayer {
    LayerSpec spec;
    int offset = 0;
    OperationalMatrix m1{BasisKind::Legendre, 0, 1, {}};
};

struct CompiledModel {
    std::vector<CompiledLayer> layers;
    int n_params = 0;
};

CompiledModel compile(const ModelSpec& spec) {
    spec.validate();
    CompiledModel cm;
    cm.n_params = spec.param_count();
    int off = 0;
    for (const auto& l : spec.layers) {
        CompiledLayer cl;
        cl.spec = l;
        cl.offset = off;
        if (l.is_block()) cl.m1 = operational_matrix(l.basis(), l.order, 1);
        off += l.param_count();
        cm.layers.push_back(std::move(cl));
    }
    return cm;
}

struct Tape {
    std::vector<JetVector> act;   // act[l] = input of layer l; act.back() = output
    std::vector<JetVector> pre;   // dense pre-activations
    std::vector<BlockScratch> block;
    std::vector<JetVector> adj;   // adjoints of act

    explicit Tape(const CompiledModel& cm) {
        const std::size_t n = cm.layers.size();
        act.resize(n + 1);
        adj.resize(n + 1);
        pre.resize(n);
        block.resize(n);
        act[0].resize(1);
        adj[0].resize(1);
        for (std::size_t l = 0; l < n; ++l) {
            const int width = cm.layers[l].spec.output_width();
            act[l + 1].resize(static_cast<std::size_t>(width));
            adj[l + 1].resize(static_cast<std::size_t>(width));
            if (cm.layers[l].spec.kind == LayerSpec::Kind::Dense) {
                pre[l].resize(static_cast<std::size_t>(width));
            }
        }
    }
};

void expand_block(const CompiledLayer& cl, BlockScratch& bs, JetVector& out, bool for_grad) {
    const Jet3& t = bs.t;
    const int width = cl.spec.order + 1;
    detail::eval_basis_into(cl.spec.basis(), cl.spec.order, t.d0, bs.p[0]);
    const int top = for_grad ? 4 : 3;
    for (int m = 1; m <= top; ++m) apply_operational_matrix(cl.m1, bs.p[m - 1], bs.p[m]);
    const double t1 = t.d1, t2 = t.d2, t3 = t.d3;
    const double t1sq = t1 * t1;
    const double t1cu = t1sq * t1;
    for (int k = 0; k < width; ++k) {
        out[static_cast<std::size_t>(k)] = {
            bs.p[0][static_cast<std::size_t>(k)],
            bs.p[1][static_cast<std::size_t>(k)] * t1,
            bs.p[2][static_cast<std::size_t>(k)] * t1sq + bs.p[1][static_cast<std::size_t>(k)] * t2,
            bs.p[3][static_cast<std::size_t>(k)] * t1cu +
                3.0 * bs.p[2][static_cast<std::size_t>(k)] * t1 * t2 +
                bs.p[1][static_cast<std::size_t>(k)] * t3};
    }
}

void forward_tape(const CompiledModel& cm, std::span<const double> theta, double x, Tape& tape,
                  bool for_grad) {
    tape.act[0][0] = jet_seed(x);
    for (std::size_t l = 0; l < cm.layers.size(); ++l) {
        const CompiledLayer& cl = cm.layers[l];
        const JetVector& in = tape.act[l];
        JetVector& out = tape.act[l + 1];
        if (cl.spec.kind == LayerSpec::Kind::Dense) {
            const int rows = cl.spec.out_dim, cols = cl.spec.in_dim;
            const double* w = theta.data() + cl.offset;
            const double* b = w + static_cast<std::ptrdiff_t>(rows) * cols;
            for (int j = 0; j < rows; ++j) {
                Jet3 z = jet_constant(b[j]);
                const double* wj = w + static_cast<std::ptrdiff_t>(j) * cols;
                for (int i = 0; i < cols; ++i) z = add(z, scale(in[static_cast<std::size_t>(i)], wj[i]));
                tape.pre[l][static_cast<std::size_t>(j)] = z;
                out[static_cast<std::size_t>(j)] =
                    cl.spec.activation == Activation::Tanh ? tanh_jet(z) : z;
            }
        } else {
            const double* w = theta.data() + cl.offset;
            const double b = w[cl.spec.in_dim];
            BlockScratch& bs = tape.block[l];
            Jet3 z = jet_constant(b);
            for (int i = 0; i < cl.spec.in_dim; ++i) z = add(z, scale(in[static_cast<std::size_t>(i)], w[i]));
            bs.z = z;
            bs.t = tanh_jet(z);
            // tanh keeps the encoder inside the orthogonality domain
            assert(!(std::abs(bs.t.d0) >= 1.0));
            expand_block(cl, bs, out, for_grad);
        }
    }
}

// Pure scalar mirror of the d0 lane of forward_tape, same operation order.
double forward_value_impl(const CompiledModel& cm, std::span<const double> theta, double x,
                          std::vector<double>& cur, std::vector<double>& next) {
    cur.assign(1, x);
    for (const CompiledLayer& cl : cm.layers) {
        if (cl.spec.kind == LayerSpec::Kind::Dense) {
            const int rows = cl.spec.out_dim, cols = cl.spec.in_dim;
            const double* w = theta.data() + cl.offset;
            const double* b = w + static_cast<std::ptrdiff_t>(rows) * cols;
            next.resize(static_cast<std::size_t>(rows));
            for (int j = 0; j < rows; ++j) {
                double z = b[j];
                const double* wj = w + static_cast<std::ptrdiff_t>(j) * cols;
                for (int i = 0; i < cols; ++i) z += wj[i] * cur[static_cast<std::size_t>(i)];
                next[static_cast<std::size_t>(j)] =
                    cl.spec.activation == Activation::Tanh ? std::tanh(z) : z;
            }
        } else {
            const double* w = theta.data() + cl.offset;
            double z = w[cl.spec.in_dim];
            for (int i = 0; i < cl.spec.in_dim; ++i) z += w[i] * cur[static_cast<std::size_t>(i)];
            detail::eval_basis_into(cl.spec.basis(), cl.spec.order, std::tanh(z), next);
        }
        cur.swap(next);
    }
    return cur[0];
}

// Accumulates d loss / d theta into grad given the adjoint of the output jet.
void backward_tape(const CompiledModel& cm, std::span<const double> theta, Tape& tape,
                   const Jet3& out_adj, double* grad) {
    const std::size_t n_layers = cm.layers.size();
    tape.adj[n_layers][0] = out_adj;
    for (std::size_t l = n_layers; l-- > 0;) {
        const CompiledLayer& cl = cm.layers[l];
        const JetVector& in = tape.act[l];
        JetVector& in_adj = tape.adj[l];
        const JetVector& out_adj_vec = tape.adj[l + 1];
        for (auto& a : in_adj) a = Jet3{};
        if (cl.spec.kind == LayerSpec::Kind::Dense) {
            const int rows = cl.spec.out_dim, cols = cl.spec.in_dim;
            const double* w = theta.data() + cl.offset;
            double* gw = grad + cl.offset;
            double* gb = gw + static_cast<std::ptrdiff_t>(rows) * cols;
            for (int j = 0; j < rows; ++j) {
                const Jet3& yb = out_adj_vec[static_cast<std::size_t>(j)];
                const Jet3 zb = cl.spec.activation == Activation::Tanh
                                    ? tanh_pullback(tape.pre[l][static_cast<std::size_t>(j)], yb)
                                    : yb;
                gb[j] += zb.d0;
                const double* wj = w + static_cast<std::ptrdiff_t>(j) * cols;
                double* gwj = gw + static_cast<std::ptrdiff_t>(j) * cols;
                for (int i = 0; i < cols; ++i) {
                    gwj[i] += dot4(zb, in[static_cast<std::size_t>(i)]);
                    in_adj[static_cast<std::size_t>(i)] =
                        add(in_adj[static_cast<std::size_t>(i)], scale(zb, wj[i]));
                }
            }
        } else {
            const BlockScratch& bs = tape.block[l];
            const int width = cl.spec.order + 1;
            // A[m][c] = sum_k out_adj[k].dc * p_m[k]
            double A[5][4] = {};
            for (int k = 0; k < width; ++k) {
                const Jet3& yb = out_adj_vec[static_cast<std::size_t>(k)];
                for (int m = 1; m <= 4; ++m) {
                    const double pm = bs.p[m][static_cast<std::size_t>(k)];
                    A[m][0] += yb.d0 * pm;
                    A[m][1] += yb.d1 * pm;
                    A[m][2] += yb.d2 * pm;
                    A[m][3] += yb.d3 * pm;
                }
            }
            const double t1 = bs.t.d1, t2 = bs.t.d2, t3 = bs.t.d3;
            Jet3 tb;
            tb.d0 = A[1][0] + t1 * A[2][1] + (t1 * t1 * A[3][2] + t2 * A[2][2]) +
                    (t1 * t1 * t1 * A[4][3] + 3.0 * t1 * t2 * A[3][3] + t3 * A[2][3]);
            tb.d1 = A[1][1] + 2.0 * t1 * A[2][2] +
                    (3.0 * t1 * t1 * A[3][3] + 3.0 * t2 * A[2][3]);
            tb.d2 = A[1][2] + 3.0 * t1 * A[2][3];
            tb.d3 = A[1][3];
            const Jet3 zb = tanh_pullback(bs.z, tb);
            const double* w = theta.data() + cl.offset;
            double* gw = grad + cl.offset;
            gw[cl.spec.in_dim] += zb.d0;  // encoder bias
            for (int i = 0; i < cl.spec.in_dim; ++i) {
                gw[i] += dot4(zb, in[static_cast<std::size_t>(i)]);
                in_adj[static_cast<std::size_t>(i)] =
                    add(in_adj[static_cast<std::size_t>(i)], scale(zb, w[i]));
            }
        }
    }
}

constexpr int kChunkSize = 512;

}  // namespace

double forward_value(const ModelSpec& spec, std::span<const double> theta, double x) {
    const CompiledModel cm = compile(spec);
    std::vector<double> cur, next;
    return forward_value_impl(cm, theta, x, cur, next);
}

Jet3 forward_jet(const ModelSpec& spec, std::span<const double> theta, double x) {
    const CompiledModel cm = compile(spec);
    Tape tape(cm);
    forward_tape(cm, theta, x, tape, false);
    return tape.act.back()[0];
}

JetVector block_forward(BasisKind kind, int order, std::span<const double> w, double b,
                        const JetVector& input) {
    if (w.size() != input.size()) {
        throw std::invalid_argument("block_forward: weight row and input length differ");
    }
    CompiledLayer cl;
    cl.spec = kind == BasisKind::Legendre
                  ? LayerSpec::legendre_block(static_cast<int>(input.size()), order)
                  : LayerSpec::chebyshev_block(static_cast<int>(input.size()), order);
    cl.m1 = operational_matrix(kind, order, 1);
    BlockScratch bs;
    Jet3 z = jet_constant(b);
    for (std::size_t i = 0; i < input.size(); ++i) z = add(z, scale(input[i], w[i]));
    bs.z = z;
    bs.t = tanh_jet(z);
    assert(!(std::abs(bs.t.d0) >= 1.0));
    JetVector out(static_cast<std::size_t>(order) + 1);
    expand_block(cl, bs, out, false);
    return out;
}

LossGrad loss_gradient(const ModelSpec& spec, std::span<const double> theta,
                       const FlowConfig& cfg, std::span<const double> points) {
    cfg.validate();
    if (points.empty()) throw std::invalid_argument("loss_gradient: no collocation points");
    const CompiledModel cm = compile(spec);
    const std::size_t n_params = static_cast<std::size_t>(cm.n_params);
    const std::size_t n = points.size();
    const int n_chunks = static_cast<int>((n + kChunkSize - 1) / kChunkSize);

    std::vector<double> chunk_loss(static_cast<std::size_t>(n_chunks), 0.0);
    std::vector<double> chunk_grad(static_cast<std::size_t>(n_chunks) * n_params, 0.0);

    const double alpha = cfg.alpha, beta = cfg.beta;
    parallel_chunks(n_chunks, [&](int c) {
        Tape tape(cm);
        double* grad_c = chunk_grad.data() + static_cast<std::size_t>(c) * n_params;
        double loss_c = 0.0;
        const std::size_t lo = static_cast<std::size_t>(c) * kChunkSize;
        const std::size_t hi = std::min(n, lo + kChunkSize);
        for (std::size_t idx = lo; idx < hi; ++idx) {
            forward_tape(cm, theta, points[idx], tape, true);
            const Jet3 out = tape.act.back()[0];
            const double r = residual(out, alpha, beta);
            loss_c += r * r;
            const Jet3 seed_adj{2.0 * r * alpha * out.d2, -4.0 * r * beta * out.d1,
                                2.0 * r * alpha * out.d0, 2.0 * r};
            backward_tape(cm, theta, tape, seed_adj, grad_c);
        }
        chunk_loss[static_cast<std::size_t>(c)] = loss_c;
    });

    LossGrad result;
    result.grad.assign(n_params, 0.0);
    double loss_sum = 0.0;
    for (int c = 0; c < n_chunks; ++c) {
        loss_sum += chunk_loss[static_cast<std::size_t>(c)];
        const double* grad_c = chunk_grad.data() + static_cast<std::size_t>(c) * n_params;
        for (std::size_t p = 0; p < n_params; ++p) result.grad[p] += grad_c[p];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    result.loss = loss_sum * inv_n;
    for (double& g : result.grad) g *= inv_n;

    // boundary penalty (not part of the mean)
    Tape tape(cm);
    forward_tape(cm, theta, 0.0, tape, true);
    const Jet3 at0 = tape.act.back()[0];
    result.loss += at0.d0 * at0.d0 + at0.d1 * at0.d1;
    backward_tape(cm, theta, tape, Jet3{2.0 * at0.d0, 2.0 * at0.d1, 0.0, 0.0},
                  result.grad.data());

    forward_tape(cm, theta, cfg.x_max, tape, true);
    const Jet3 at_max = tape.act.back()[0];
    const double far = at_max.d1 - 1.0;
    result.loss += far * far;
    backward_tape(cm, theta, tape, Jet3{0.0, 2.0 * far, 0.0, 0.0}, result.grad.data());

    return result;
}

}  // namespace fsnet
