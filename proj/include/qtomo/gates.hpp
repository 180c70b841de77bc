#pragma once

#include <array>
#include <cmath>
#include <complex>

#include "qtomo/state.hpp"

namespace qtomo {

// 2x2 single-qubit gate, row major: m[0] m[1] / m[2] m[3].
struct Gate1Q {
    std::array<cplx, 4> m{};

    cplx operator()(int r, int c) const { return m[2 * r + c]; }

    Gate1Q adjoint() const {
        return Gate1Q{{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
    }

    friend Gate1Q operator*(const Gate1Q& a, const Gate1Q& b) {
        return Gate1Q{{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
                       a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
    }
};

inline bool is_unitary(const Gate1Q& g, double tol = 1e-9) {
    const Gate1Q p = g.adjoint() * g;
    return std::abs(p.m[0] - 1.0) <= tol && std::abs(p.m[3] - 1.0) <= tol &&
           std::abs(p.m[1]) <= tol && std::abs(p.m[2]) <= tol;
}

namespace gates {

inline const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
inline const cplx kI{0.0, 1.0};

inline Gate1Q h() { return {{kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2}}; }
inline Gate1Q d() { return {{1.0, 0.0, 0.0, kI}}; }
// v = h * d: the measurement basis extracting imaginary parts.
inline Gate1Q v() { return {{kInvSqrt2, kI * kInvSqrt2, kInvSqrt2, -kI * kInvSqrt2}}; }
inline Gate1Q x() { return {{0.0, 1.0, 1.0, 0.0}}; }
inline Gate1Q y() { return {{0.0, -kI, kI, 0.0}}; }
inline Gate1Q z() { return {{1.0, 0.0, 0.0, -1.0}}; }

// U(theta, phi, lambda) =
//   [ cos(theta/2)              -e^{i lambda} sin(theta/2)      ]
//   [ e^{i phi} sin(theta/2)     e^{i (phi+lambda)} cos(theta/2) ]
inline Gate1Q u3(double theta, double phi, double lambda) {
    const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
    return {{cplx{c, 0.0}, -std::exp(kI * lambda) * s, std::exp(kI * phi) * s,
             std::exp(kI * (phi + lambda)) * c}};
}

}  // namespace gates

// Applies a 1-qubit gate in place by iterating amplitude pairs that differ
// only in bit `qubit`; never materializes a 2^n x 2^n matrix.
inline void apply_1q_inplace(StateVector& state, const Gate1Q& g, int qubit) {
    if (qubit < 0 || qubit >= state.n) throw std::out_of_range("apply_1q: qubit out of range");
    const std::uint64_t mask = std::uint64_t{1} << qubit;
    const std::uint64_t dim = state.dim();
    for (std::uint64_t base = 0; base < dim; base += mask << 1) {
        for (std::uint64_t off = 0; off < mask; ++off) {
            const std::uint64_t i0 = base + off;
            const std::uint64_t i1 = i0 | mask;
            const cplx a0 = state.amps[i0], a1 = state.amps[i1];
            state.amps[i0] = g.m[0] * a0 + g.m[1] * a1;
            state.amps[i1] = g.m[2] * a0 + g.m[3] * a1;
        }
    }
}

inline StateVector apply_1q(const StateVector& state, const Gate1Q& g, int qubit) {
    StateVector out = state;
    apply_1q_inplace(out, g, qubit);
    return out;
}

// CNOT as a basis permutation: index i maps to i XOR (1 << target) whenever
// bit `control` of i is set.
inline void apply_cnot_inplace(StateVector& state, int control, int target) {
    if (control < 0 || control >= state.n || target < 0 || target >= state.n)
        throw std::out_of_range("apply_cnot: qubit out of range");
    if (control == target) throw std::invalid_argument("apply_cnot: control equals target");
    const std::uint64_t cmask = std::uint64_t{1} << control;
    const std::uint64_t tmask = std::uint64_t{1} << target;
    const std::uint64_t dim = state.dim();
    for (std::uint64_t i = 0; i < dim; ++i)
        if ((i & cmask) && !(i & tmask)) std::swap(state.amps[i], state.amps[i | tmask]);
}

inline StateVector apply_cnot(const StateVector& state, int control, int target) {
    StateVector out = state;
    apply_cnot_inplace(out, control, target);
    return out;
}

}  // namespace qtomo
