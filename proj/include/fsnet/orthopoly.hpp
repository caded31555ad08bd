#pragma once

#include <vector>

namespace fsnet {

enum class BasisKind { Legendre, Chebyshev };

const char* basis_name(BasisKind basis);

/// [P_0(t), ..., P_N(t)] at one evaluation point. P_0 == 1 and P_1 == t in
/// both bases.
struct PolyVector {
    BasisKind basis;
    int order;
    std::vector<double> values;
};

/// Dense (N+1)x(N+1) matrix M^(k): applied to the basis vector it yields the
/// k-th derivative of every basis polynomial expanded in the same basis.
/// Strictly lower triangular for both bases; entries are integers.
struct OperationalMatrix {
    BasisKind basis;
    int order;
    int power;
    std::vector<double> entries;  // row-major, (order+1)^2

    int dim() const { return order + 1; }
    double operator()(int i, int j) const {
        return entries[static_cast<std::size_t>(i) * static_cast<std::size_t>(dim()) + j];
    }
};

/// Three-term recurrence evaluation, O(N). t may lie outside [-1,1]; the
/// recurrences are plain polynomials and range enforcement is the caller's
/// concern. Throws std::invalid_argument on non-finite t or negative order.
PolyVector eval_basis(BasisKind basis, int order, double t);

/// M^(k) = (M^(1))^k by repeated dense multiplication. power >= 1.
OperationalMatrix operational_matrix(BasisKind basis, int order, int power);

/// Basis vector at t followed by its first max_k derivatives, each obtained
/// by one more application of M^(1). Returns max_k + 1 vectors of length
/// order + 1.
std::vector<std::vector<double>> basis_derivatives(BasisKind basis, int order, double t,
                                                   int max_k);

/// y = M x. Exploits the strictly lower triangular structure.
void apply_operational_matrix(const OperationalMatrix& m, const std::vector<double>& x,
                              std::vector<double>& y);

namespace detail {

/// Recurrence without the finiteness check, writing into a caller buffer.
/// NaN propagates instead of throwing, which lets diverged training runs
/// surface as a non-finite loss.
void eval_basis_into(BasisKind basis, int order, double t, std::vector<double>& out);

}  // namespace detail

}  // namespace fsnet
