#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qtomo/gates.hpp"
#include "qtomo/state.hpp"

namespace qtomo {

enum class OpKind { H, V, D, X, Y, Z, U3, Cx };

struct CircuitOp {
    OpKind kind;
    int q0 = 0;  // the qubit of a 1q gate, or the CNOT control
    int q1 = 0;  // the CNOT target
    double theta = 0.0, phi = 0.0, lambda = 0.0;

    bool is_cnot() const { return kind == OpKind::Cx; }
};

inline Gate1Q op_matrix(const CircuitOp& op) {
    switch (op.kind) {
        case OpKind::H: return gates::h();
        case OpKind::V: return gates::v();
        case OpKind::D: return gates::d();
        case OpKind::X: return gates::x();
        case OpKind::Y: return gates::y();
        case OpKind::Z: return gates::z();
        case OpKind::U3: return gates::u3(op.theta, op.phi, op.lambda);
        case OpKind::Cx: break;
    }
    throw std::invalid_argument("op_matrix: op has no 1-qubit matrix");
}

// A gate list over a fixed qubit count. Builder methods return *this so
// circuits read as chains: Circuit(3).h(0).cx(0, 1).cx(1, 2).
struct Circuit {
    int n = 0;
    std::vector<CircuitOp> ops;

    Circuit() = default;
    explicit Circuit(int qubits) : n(qubits) {
        if (qubits < 1 || qubits > kMaxQubits)
            throw std::invalid_argument("Circuit: qubit count must be in [1, 26]");
    }

    Circuit& h(int q) { return push({OpKind::H, check(q)}); }
    Circuit& v(int q) { return push({OpKind::V, check(q)}); }
    Circuit& d(int q) { return push({OpKind::D, check(q)}); }
    Circuit& x(int q) { return push({OpKind::X, check(q)}); }
    Circuit& y(int q) { return push({OpKind::Y, check(q)}); }
    Circuit& z(int q) { return push({OpKind::Z, check(q)}); }
    Circuit& u3(int q, double theta, double phi, double lambda) {
        return push({OpKind::U3, check(q), 0, theta, phi, lambda});
    }
    Circuit& rx(int q, double theta) { return u3(q, theta, -M_PI / 2.0, M_PI / 2.0); }
    Circuit& ry(int q, double theta) { return u3(q, theta, 0.0, 0.0); }
    Circuit& cx(int control, int target) {
        if (control == target) throw std::invalid_argument("Circuit::cx: control equals target");
        return push({OpKind::Cx, check(control), check(target)});
    }

    Circuit& append(const Circuit& other) {
        if (other.n != n) throw std::invalid_argument("Circuit::append: qubit counts differ");
        ops.insert(ops.end(), other.ops.begin(), other.ops.end());
        return *this;
    }

    std::size_t cnot_count() const {
        std::size_t c = 0;
        for (const CircuitOp& op : ops) c += op.is_cnot();
        return c;
    }

  private:
    int check(int q) const {
        if (q < 0 || q >= n) throw std::out_of_range("Circuit: qubit index out of range");
        return q;
    }
    Circuit& push(CircuitOp op) {
        ops.push_back(op);
        return *this;
    }
};

inline void run_circuit_inplace(const Circuit& circuit, StateVector& state) {
    if (circuit.n != state.n) throw std::invalid_argument("run_circuit: qubit counts differ");
    for (const CircuitOp& op : circuit.ops) {
        if (op.is_cnot())
            apply_cnot_inplace(state, op.q0, op.q1);
        else
            apply_1q_inplace(state, op_matrix(op), op.q0);
    }
}

inline StateVector run_circuit(const Circuit& circuit, const StateVector& in) {
    StateVector out = in;
    run_circuit_inplace(circuit, out);
    return out;
}

inline StateVector run_circuit(const Circuit& circuit) {
    StateVector state(circuit.n);
    run_circuit_inplace(circuit, state);
    return state;
}

// Shortest exactly-round-tripping decimal form, identical on every run;
// circuit text doubles as measurement-cache key material.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// One op per line, fields separated by single spaces:
//   h <q> | v <q> | d <q> | x <q> | y <q> | z <q>
//   u3 <q> <theta> <phi> <lambda>
//   cx <control> <target>
inline std::string circuit_text(const Circuit& circuit) {
    std::string out;
    for (const CircuitOp& op : circuit.ops) {
        switch (op.kind) {
            case OpKind::H: out += "h "; break;
            case OpKind::V: out += "v "; break;
            case OpKind::D: out += "d "; break;
            case OpKind::X: out += "x "; break;
            case OpKind::Y: out += "y "; break;
            case OpKind::Z: out += "z "; break;
            case OpKind::U3: out += "u3 "; break;
            case OpKind::Cx: out += "cx "; break;
        }
        out += std::to_string(op.q0);
        if (op.kind == OpKind::Cx) {
            out += ' ';
            out += std::to_string(op.q1);
        } else if (op.kind == OpKind::U3) {
            out += ' ';
            out += format_double(op.theta);
            out += ' ';
            out += format_double(op.phi);
            out += ' ';
            out += format_double(op.lambda);
        }
        out += '\n';
    }
    return out;
}

// Parses the circuit_text format. Blank lines and lines starting with '#'
// are skipped. An optional leading "qubits <n>" line pins the qubit count;
// otherwise it is inferred as max referenced index + 1 (or n_hint if larger).
inline Circuit parse_circuit(const std::string& text, int n_hint = 0) {
    struct RawOp {
        std::string name;
        int q0 = 0, q1 = 0;
        double a = 0, b = 0, c = 0;
    };
    std::vector<RawOp> raw;
    int n = n_hint;
    std::istringstream lines(text);
    std::string line;
    bool first_content = true;
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string name;
        if (!(fields >> name) || name[0] == '#') continue;
        if (first_content && name == "qubits") {
            if (!(fields >> n) || n < 1)
                throw std::invalid_argument("parse_circuit: bad qubits header");
            first_content = false;
            continue;
        }
        first_content = false;
        RawOp op;
        op.name = name;
        bool ok;
        if (name == "cx") {
            ok = static_cast<bool>(fields >> op.q0 >> op.q1);
        } else if (name == "u3") {
            ok = static_cast<bool>(fields >> op.q0 >> op.a >> op.b >> op.c);
        } else if (name == "h" || name == "v" || name == "d" || name == "x" || name == "y" ||
                   name == "z") {
            ok = static_cast<bool>(fields >> op.q0);
        } else {
            throw std::invalid_argument("parse_circuit: unknown op '" + name + "'");
        }
        std::string extra;
        if (!ok || (fields >> extra))
            throw std::invalid_argument("parse_circuit: malformed line '" + line + "'");
        if (op.q0 < 0 || op.q1 < 0)
            throw std::invalid_argument("parse_circuit: negative qubit index");
        n = std::max({n, op.q0 + 1, op.q1 + 1});
        raw.push_back(op);
    }
    if (n < 1) throw std::invalid_argument("parse_circuit: empty circuit with no qubit count");
    Circuit circuit(n);
    for (const RawOp& op : raw) {
        if (op.name == "cx")
            circuit.cx(op.q0, op.q1);
        else if (op.name == "u3")
            circuit.u3(op.q0, op.a, op.b, op.c);
        else if (op.name == "h")
            circuit.h(op.q0);
        else if (op.name == "v")
            circuit.v(op.q0);
        else if (op.name == "d")
            circuit.d(op.q0);
        else if (op.name == "x")
            circuit.x(op.q0);
        else if (op.name == "y")
            circuit.y(op.q0);
        else
            circuit.z(op.q0);
    }
    return circuit;
}

inline Circuit read_circuit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open circuit file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_circuit(buf.str());
}

}  // namespace qtomo
