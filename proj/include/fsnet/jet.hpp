#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace fsnet {

/// Value and first three derivatives of a scalar quantity with respect to
/// the spatial input x. Components hold raw derivatives, not Taylor
/// coefficients.
struct Jet3 {
    double d0 = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

using JetVector = std::vector<Jet3>;

/// Jet of the spatial variable itself: (x, 1, 0, 0).
inline Jet3 jet_seed(double x) { return {x, 1.0, 0.0, 0.0}; }

/// Jet of a value that does not depend on x.
inline Jet3 jet_constant(double c) { return {c, 0.0, 0.0, 0.0}; }

inline Jet3 add(const Jet3& u, const Jet3& v) {
    return {u.d0 + v.d0, u.d1 + v.d1, u.d2 + v.d2, u.d3 + v.d3};
}

inline Jet3 sub(const Jet3& u, const Jet3& v) {
    return {u.d0 - v.d0, u.d1 - v.d1, u.d2 - v.d2, u.d3 - v.d3};
}

inline Jet3 scale(const Jet3& u, double c) {
    return {c * u.d0, c * u.d1, c * u.d2, c * u.d3};
}

/// Leibniz product rule truncated at order 3.
inline Jet3 mul(const Jet3& u, const Jet3& v) {
    return {u.d0 * v.d0,
            u.d1 * v.d0 + u.d0 * v.d1,
            u.d2 * v.d0 + 2.0 * u.d1 * v.d1 + u.d0 * v.d2,
            u.d3 * v.d0 + 3.0 * u.d2 * v.d1 + 3.0 * u.d1 * v.d2 + u.d0 * v.d3};
}

/// Chain rule to order 3. f holds the values f(u.d0), f'(u.d0), f''(u.d0),
/// f'''(u.d0) of the outer elementary function.
inline Jet3 compose_scalar(const std::array<double, 4>& f, const Jet3& u) {
    return {f[0],
            f[1] * u.d1,
            f[2] * u.d1 * u.d1 + f[1] * u.d2,
            f[3] * u.d1 * u.d1 * u.d1 + 3.0 * f[2] * u.d1 * u.d2 + f[1] * u.d3};
}

inline Jet3 tanh_jet(const Jet3& u) {
    const double t = std::tanh(u.d0);
    const double s = 1.0 - t * t;  // tanh' in terms of tanh
    return compose_scalar({t, s, -2.0 * t * s, -2.0 * s * (1.0 - 3.0 * t * t)}, u);
}

inline Jet3 operator+(const Jet3& u, const Jet3& v) { return add(u, v); }
inline Jet3 operator-(const Jet3& u, const Jet3& v) { return sub(u, v); }
inline Jet3 operator*(const Jet3& u, const Jet3& v) { return mul(u, v); }
inline Jet3 operator*(double c, const Jet3& u) { return scale(u, c); }
inline Jet3 operator*(const Jet3& u, double c) { return scale(u, c); }

}  // namespace fsnet
