#include "fsnet/orthopoly.hpp"

#include <cmath>
#include <stdexcept>

namespace fsnet {

const char* basis_name(BasisKind basis) {
    return basis == BasisKind::Legendre ? "legendre" : "chebyshev";
}

namespace detail {

// No-throw recurrence used by the hot paths; NaN inputs propagate to NaN
// outputs instead of raising.
void eval_basis_into(BasisKind basis, int order, double t, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(order) + 1);
    out[0] = 1.0;
    if (order == 0) return;
    out[1] = t;
    if (basis == BasisKind::Legendre) {
        // Bonnet form: (n+1) L_{n+1} = (2n+1) t L_n - n L_{n-1}
        for (int n = 1; n < order; ++n) {
            out[n + 1] = ((2.0 * n + 1.0) * t * out[n] - n * out[n - 1]) / (n + 1.0);
        }
    } else {
        for (int n = 1; n < order; ++n) {
            out[n + 1] = 2.0 * t * out[n] - out[n - 1];
        }
    }
}

}  // namespace detail

PolyVector eval_basis(BasisKind basis, int order, double t) {
    if (order < 0) throw std::invalid_argument("eval_basis: order must be non-negative");
    if (!std::isfinite(t)) throw std::invalid_argument("eval_basis: evaluation point must be finite");
    PolyVector out{basis, order, {}};
    detail::eval_basis_into(basis, order, t, out.values);
    return out;
}

namespace {

OperationalMatrix first_derivative_matrix(BasisKind basis, int order) {
    const int n = order + 1;
    OperationalMatrix m{basis, order, 1,
                        std::vector<double>(static_cast<std::size_t>(n) * n, 0.0)};
    for (int i = 1; i < n; ++i) {
        // nonzero only below the diagonal where i + j is odd
        for (int j = (i + 1) % 2; j < i; j += 2) {
            const std::size_t idx = static_cast<std::size_t>(i) * n + j;
            if (basis == BasisKind::Legendre) {
                m.entries[idx] = 2.0 * j + 1.0;
            } else {
                m.entries[idx] = 2.0 * i / (j == 0 ? 2.0 : 1.0);
            }
        }
    }
    return m;
}

void multiply_into(const OperationalMatrix& a, const OperationalMatrix& b,
                   OperationalMatrix& out) {
    const int n = a.dim();
    out.entries.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < i; ++k) {  // strictly lower triangular operands
            const double aik = a.entries[static_cast<std::size_t>(i) * n + k];
            if (aik == 0.0) continue;
            for (int j = 0; j < k; ++j) {
                out.entries[static_cast<std::size_t>(i) * n + j] +=
                    aik * b.entries[static_cast<std::size_t>(k) * n + j];
            }
        }
    }
}

}  // namespace

OperationalMatrix operational_matrix(BasisKind basis, int order, int power) {
    if (order < 0) throw std::invalid_argument("operational_matrix: order must be non-negative");
    if (power < 1) throw std::invalid_argument("operational_matrix: power must be >= 1");
    OperationalMatrix m1 = first_derivative_matrix(basis, order);
    if (power == 1) return m1;
    OperationalMatrix acc = m1;
    OperationalMatrix next{basis, order, 1, {}};
    for (int k = 2; k <= power; ++k) {
        multiply_into(acc, m1, next);
        acc.entries.swap(next.entries);
        acc.power = k;
    }
    return acc;
}

void apply_operational_matrix(const OperationalMatrix& m, const std::vector<double>& x,
                              std::vector<double>& y) {
    const int n = m.dim();
    y.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 1; i < n; ++i) {
        double acc = 0.0;
        const std::size_t row = static_cast<std::size_t>(i) * n;
        for (int j = 0; j < i; ++j) acc += m.entries[row + j] * x[j];
        y[i] = acc;
    }
}

std::vector<std::vector<double>> basis_derivatives(BasisKind basis, int order, double t,
                                                   int max_k) {
    if (max_k < 0) throw std::invalid_argument("basis_derivatives: max_k must be non-negative");
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(max_k) + 1);
    out.push_back(eval_basis(basis, order, t).values);
    if (max_k == 0) return out;
    const OperationalMatrix m1 = first_derivative_matrix(basis, order);
    for (int k = 1; k <= max_k; ++k) {
        std::vector<double> next;
        apply_operational_matrix(m1, out.back(), next);
        out.push_back(std::move(next));
    }
    return out;
}

}  // namespace fsnet
