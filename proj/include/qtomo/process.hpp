#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qtomo/tomo.hpp"

namespace qtomo {

// Probe on 2n qubits whose low register gets fed to the process under test:
// H on each of qubits n..2n-1, then CNOT(n+j -> j), yielding
// (1/sqrt(N)) sum_j |j>|j> with amplitudes at indices j*(N+1).
inline Circuit prepare_probe(int n) {
    if (n < 1 || 2 * n > kMaxQubits)
        throw std::invalid_argument("prepare_probe: bad register size");
    Circuit probe(2 * n);
    for (int q = n; q < 2 * n; ++q) probe.h(q);
    for (int j = 0; j < n; ++j) probe.cx(n + j, j);
    return probe;
}

// Probe followed by the process applied to the low register. Measuring the
// result amounts to state tomography of the stacked unitary: block j of the
// output state holds column j of the process matrix over sqrt(N).
inline Circuit process_to_state_circuit(const Circuit& probe, const Circuit& process) {
    if (probe.n != 2 * process.n)
        throw std::invalid_argument("process_to_state_circuit: probe must have 2n qubits");
    Circuit full = probe;
    full.ops.insert(full.ops.end(), process.ops.begin(), process.ops.end());
    return full;
}

// Unstacks an estimated 2n-qubit state into the N x N matrix it encodes:
// column j = sqrt(N) * entries [j*N, (j+1)*N).
inline Eigen::MatrixXcd extract_columns(const StateVector& estimate, int n) {
    if (estimate.n != 2 * n)
        throw std::invalid_argument("extract_columns: estimate must have 2n qubits");
    const std::uint64_t dim = std::uint64_t{1} << n;
    const double scale = std::sqrt(static_cast<double>(dim));
    Eigen::MatrixXcd m(dim, dim);
    for (std::uint64_t j = 0; j < dim; ++j)
        for (std::uint64_t i = 0; i < dim; ++i) m(i, j) = scale * estimate.amps[j * dim + i];
    return m;
}

// Unitary factor of the polar decomposition, raw = U_L * S * U_R^dag maps
// to U_L * U_R^dag: the unitary closest to raw in Frobenius norm. Refuses
// near-singular input, where the projection is not trustworthy.
inline Eigen::MatrixXcd polar_project(const Eigen::MatrixXcd& raw) {
    if (raw.rows() != raw.cols() || raw.rows() == 0)
        throw std::invalid_argument("polar_project: matrix must be square");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(raw, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.singularValues().minCoeff() <= 1e-9)
        throw singular_matrix_error("polar_project: matrix is numerically rank-deficient");
    return svd.matrixU() * svd.matrixV().adjoint();
}

// |tr(Uref^dag U)|^2 / N^2: phase-insensitive agreement of two unitaries.
inline double process_fidelity(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& reference) {
    if (u.rows() != reference.rows() || u.cols() != reference.cols() || u.rows() != u.cols())
        throw std::invalid_argument("process_fidelity: dimension mismatch");
    const double dim = static_cast<double>(u.rows());
    return std::norm((reference.adjoint() * u).trace()) / (dim * dim);
}

// Materializes the full matrix of a circuit by running basis states through
// it; fine at process-tomography sizes.
inline Eigen::MatrixXcd circuit_unitary(const Circuit& circuit) {
    const std::uint64_t dim = std::uint64_t{1} << circuit.n;
    Eigen::MatrixXcd m(dim, dim);
    for (std::uint64_t j = 0; j < dim; ++j) {
        const StateVector out = run_circuit(circuit, StateVector::basis(circuit.n, j));
        for (std::uint64_t i = 0; i < dim; ++i) m(i, j) = out.amps[i];
    }
    return m;
}

struct UnitaryEstimate {
    int n = 0;
    Eigen::MatrixXcd matrix;      // polar-projected, unitary
    Eigen::MatrixXcd raw_matrix;  // straight from column extraction
    double state_fidelity = 0.0;  // stacked-state estimate vs exact stacked state
    double process_fidelity = -1.0;  // vs reference; negative if none given
    ReconstructionReport state_report;
};

// Closed-system process tomography: prepares the probe, reconstructs the
// stacked state with the requested scheme, unstacks the columns, and
// projects onto the unitaries.
inline UnitaryEstimate run_process_tomography(MeasurementManager& mgr, const Circuit& process,
                                              double eps, const std::string& scheme = "mst",
                                              const Circuit* reference = nullptr) {
    const int n = process.n;
    const Circuit stacked = process_to_state_circuit(prepare_probe(n), process);

    UnitaryEstimate result;
    result.n = n;
    if (scheme == "mst")
        result.state_report = reconstruct_mst(mgr, stacked, eps);
    else if (scheme == "randomized")
        result.state_report = reconstruct_randomized(mgr, stacked, eps, false);
    else if (scheme == "randomized-masked")
        result.state_report = reconstruct_randomized(mgr, stacked, eps, true);
    else
        throw config_error("run_process_tomography: unknown scheme '" + scheme + "'");

    result.raw_matrix = extract_columns(result.state_report.estimate, n);
    result.matrix = polar_project(result.raw_matrix);
    result.state_fidelity = fidelity(result.state_report.estimate, run_circuit(stacked));
    if (reference) {
        if (reference->n != n)
            throw std::invalid_argument("run_process_tomography: reference size mismatch");
        result.process_fidelity = qtomo::process_fidelity(result.matrix, circuit_unitary(*reference));
    }
    return result;
}

}  // namespace qtomo
