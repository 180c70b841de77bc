#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qtomo/errors.hpp"

namespace qtomo {

using cplx = std::complex<double>;

inline constexpr int kMaxQubits = 26;

// Amplitudes of an n-qubit pure state over the computational basis.
// Basis index i encodes the bitstring i_{n-1}...i_1 i_0 with qubit 0 as the
// least-significant bit, so "qubit q of index i" means (i >> q) & 1.
struct StateVector {
    int n = 0;
    std::vector<cplx> amps;

    StateVector() = default;

    // |0...0> on the given number of qubits.
    explicit StateVector(int qubits) : n(check_qubits(qubits)), amps(std::size_t{1} << qubits) {
        amps[0] = 1.0;
    }

    StateVector(int qubits, std::vector<cplx> a) : n(check_qubits(qubits)), amps(std::move(a)) {
        if (amps.size() != (std::size_t{1} << n))
            throw std::invalid_argument("StateVector: amplitude count does not match qubit count");
    }

    static StateVector basis(int qubits, std::uint64_t index) {
        StateVector s(qubits);
        if (index >= s.dim()) throw std::out_of_range("StateVector::basis: index out of range");
        s.amps[0] = 0.0;
        s.amps[index] = 1.0;
        return s;
    }

    std::uint64_t dim() const { return std::uint64_t{1} << n; }

    double norm() const {
        double s = 0.0;
        for (const cplx& a : amps) s += std::norm(a);
        return std::sqrt(s);
    }

    StateVector normalized() const {
        const double nrm = norm();
        if (nrm < 1e-300) throw std::invalid_argument("StateVector::normalized: zero vector");
        StateVector out = *this;
        for (cplx& a : out.amps) a /= nrm;
        return out;
    }

  private:
    static int check_qubits(int qubits) {
        if (qubits < 1 || qubits > kMaxQubits)
            throw std::invalid_argument("StateVector: qubit count must be in [1, " +
                                        std::to_string(kMaxQubits) + "]");
        return qubits;
    }
};

inline cplx inner(const StateVector& a, const StateVector& b) {
    if (a.n != b.n) throw std::invalid_argument("inner: qubit counts differ");
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.amps.size(); ++i) s += std::conj(a.amps[i]) * b.amps[i];
    return s;
}

// |<a|b>|^2 for normalized pure states. Symmetric in its arguments.
inline double fidelity(const StateVector& a, const StateVector& b) {
    if (a.n != b.n) throw std::invalid_argument("fidelity: qubit counts differ");
    if (std::abs(a.norm() - 1.0) > 1e-6 || std::abs(b.norm() - 1.0) > 1e-6)
        throw std::invalid_argument("fidelity: inputs must be normalized");
    return std::norm(inner(a, b));
}

// Multiplies by a global phase so the first entry with modulus > eps becomes
// real and nonnegative. Throws if every entry is at or below eps.
inline StateVector phase_normalize(const StateVector& state, double eps) {
    for (const cplx& a : state.amps) {
        if (std::abs(a) > eps) {
            const cplx phase = std::conj(a) / std::abs(a);
            StateVector out = state;
            for (cplx& x : out.amps) x *= phase;
            return out;
        }
    }
    throw empty_support_error("phase_normalize: no entry above threshold");
}

}  // namespace qtomo
