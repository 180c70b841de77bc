#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qtomo/circuit.hpp"
#include "qtomo/errors.hpp"

namespace qtomo {

// Named preparation circuits for the reference experiments. The contract is
// the support: a preset produces a state whose nonzero entries are exactly
// the basis indices named in the id (pair-000-011 has support {0, 3}, with
// qubit 0 as the least-significant index bit).
inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {
        "pair-000-001",       "pair-000-011",       "pair-000-111",       "pair-011-100",
        "pair-110-001",       "triple-000-010-100", "triple-000-010-101", "triple-000-011-110",
        "ghz-4",              "ghz-5",              "ghz-6",              "proc-w1",
    };
    return names;
}

// The 2-qubit process measured in the process-tomography experiment:
// CNOT * (R_x(pi/4) on q1, R_y(pi/3) on q0).
inline Circuit w1_process() {
    Circuit c(2);
    c.ry(0, M_PI / 3.0).rx(1, M_PI / 4.0).cx(1, 0);
    return c;
}

inline Circuit ghz_chain(int n) {
    Circuit c(n);
    c.h(0);
    for (int q = 0; q + 1 < n; ++q) c.cx(q, q + 1);
    return c;
}

inline Circuit load_preset(const std::string& id) {
    if (id == "pair-000-001") return Circuit(3).h(0);
    if (id == "pair-000-011") return Circuit(3).h(0).x(0).cx(0, 1);
    if (id == "pair-000-111") return Circuit(3).h(0).x(0).cx(0, 1).cx(0, 2);
    if (id == "pair-011-100") return Circuit(3).h(0).x(2).cx(0, 1).cx(1, 2);
    if (id == "pair-110-001") return Circuit(3).x(0).h(1).cx(1, 0).cx(1, 2);
    if (id == "triple-000-010-100")
        return Circuit(3).ry(1, M_PI / 4.0).ry(2, M_PI / 4.0).cx(2, 1).h(2);
    if (id == "triple-000-010-101")
        return Circuit(3).ry(1, M_PI / 4.0).ry(2, M_PI / 4.0).cx(2, 1).h(2).cx(2, 0);
    if (id == "triple-000-011-110")
        return Circuit(3).ry(1, M_PI / 4.0).ry(2, M_PI / 4.0).cx(2, 1).cx(1, 0).h(2).cx(2, 1);
    if (id == "ghz-4") return ghz_chain(4);
    if (id == "ghz-5") return ghz_chain(5);
    if (id == "ghz-6") return ghz_chain(6);
    if (id == "proc-w1") {
        // Probe for a 2-qubit process followed by the process itself; state
        // tomography of this 4-qubit circuit recovers the process matrix.
        Circuit c(4);
        c.h(2).h(3).cx(2, 0).cx(3, 1);
        c.ry(0, M_PI / 3.0).rx(1, M_PI / 4.0).cx(1, 0);
        return c;
    }
    std::string known;
    for (const std::string& name : preset_names()) known += " " + name;
    throw config_error("unknown preset '" + id + "'; known presets:" + known);
}

// Support-detection thresholds used by the reference experiments. The
// randomized process-tomography threshold was never calibrated, so it has
// no default and must be passed explicitly.
inline std::optional<double> default_eps(const std::string& preset, const std::string& scheme) {
    const bool randomized = scheme == "randomized" || scheme == "randomized-masked";
    if (preset == "proc-w1") {
        if (randomized) return std::nullopt;
        return 5e-3;
    }
    if (!randomized) return 5e-2;
    if (preset == "pair-000-001" || preset == "pair-000-011" || preset == "pair-000-111")
        return 5e-2;
    if (preset == "triple-000-011-110" || preset == "ghz-4") return 5e-3;
    // Remaining pairs, triples, and larger chains all ran at 5e-5.
    return 5e-5;
}

}  // namespace qtomo
