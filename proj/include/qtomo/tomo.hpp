#pragma once

#include <bit>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "qtomo/hamming.hpp"
#include "qtomo/sim.hpp"

namespace qtomo {

// Entries of an identity measurement that cleared the threshold.
struct SupportSet {
    struct Entry {
        std::uint64_t index;
        double prob;
    };
    std::vector<Entry> entries;  // sorted by index
    double eps = 0.0;

    std::vector<std::uint64_t> indices() const {
        std::vector<std::uint64_t> out;
        out.reserve(entries.size());
        for (const Entry& e : entries) out.push_back(e.index);
        return out;
    }
};

// Measurement plan for one tree edge between a determined entry (index_d)
// and an unknown one (index_k). The CNOT chain maps the pair to images that
// differ in exactly one bit (the pivot); the H or V measurement then mixes
// only that pair.
struct PairPlan {
    std::uint64_t index_d = 0, index_k = 0;
    int n = 0;
    int pivot = 0;
    std::vector<std::pair<int, int>> cnot_chain;  // (control=pivot, target)
    std::uint64_t mapped_d = 0, mapped_k = 0;
};

struct EdgeTrace {
    std::uint64_t index_d = 0, index_k = 0;
    int weight = 0;
    cplx value;  // inferred amplitude at index_k
};

struct ReconstructionReport {
    std::string scheme;  // "mst" | "randomized" | "randomized-masked"
    StateVector estimate;
    int settings_used = 0;   // distinct measurement settings, mask included
    int mask_settings = 0;   // 1 when the masked variant measured a mask
    long long cnots_used = 0;  // CNOTs across the planned pair settings
    std::vector<EdgeTrace> edge_trace;
    std::string randomizer;       // "", "h", "v", or "haar"
    bool fell_back_to_mst = false;  // randomizer ladder found no usable support
};

enum class RandomizerKind { Auto, HadamardAll, VAll, Haar };

// Settings needed for a state with full support: one identity measurement
// plus an H and a V setting per qubit.
inline int dense_settings_count(int n) { return 2 * n + 1; }

inline SupportSet threshold_support(const std::vector<double>& probs, double eps) {
    SupportSet support;
    support.eps = eps;
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (probs[i] > eps) support.entries.push_back({i, probs[i]});
    if (support.entries.empty())
        throw empty_support_error("detect_support: no entry above eps");
    return support;
}

inline SupportSet detect_support(MeasurementManager& mgr, const StatePrep& prep, double eps) {
    if (!(eps >= 0.0 && eps < 1.0))
        throw std::invalid_argument("detect_support: eps must lie in [0, 1)");
    const MeasurementOutcome out = mgr.measure(prep, Circuit(prep.qubit_count()));
    return threshold_support(out.probs, eps);
}

inline PairPlan plan_pair(std::uint64_t index_d, std::uint64_t index_k, int n) {
    if (n < 1 || n > kMaxQubits) throw std::invalid_argument("plan_pair: bad qubit count");
    const std::uint64_t dim = std::uint64_t{1} << n;
    if (index_d >= dim || index_k >= dim) throw std::out_of_range("plan_pair: index out of range");
    if (index_d == index_k) throw std::invalid_argument("plan_pair: indices must differ");

    PairPlan plan;
    plan.index_d = index_d;
    plan.index_k = index_k;
    plan.n = n;
    const std::uint64_t diff = index_d ^ index_k;
    // Prefer a pivot where the unknown entry has the 1 bit; if its support
    // is contained in the determined entry's, any differing bit works.
    const std::uint64_t preferred = index_k & ~index_d;
    plan.pivot = std::countr_zero(preferred ? preferred : diff);
    for (int t = 0; t < n; ++t)
        if (t != plan.pivot && (diff >> t) & 1) plan.cnot_chain.emplace_back(plan.pivot, t);

    auto chain_image = [&plan](std::uint64_t idx) {
        for (const auto& [control, target] : plan.cnot_chain)
            if ((idx >> control) & 1) idx ^= std::uint64_t{1} << target;
        return idx;
    };
    plan.mapped_d = chain_image(index_d);
    plan.mapped_k = chain_image(index_k);
    return plan;
}

inline Circuit pair_measurement_circuit(const PairPlan& plan, bool imaginary_basis) {
    Circuit meas(plan.n);
    for (const auto& [control, target] : plan.cnot_chain) meas.cx(control, target);
    if (imaginary_basis)
        meas.v(plan.pivot);
    else
        meas.h(plan.pivot);
    return meas;
}

inline std::pair<MeasurementOutcome, MeasurementOutcome> measure_pair(MeasurementManager& mgr,
                                                                      const StatePrep& prep,
                                                                      const PairPlan& plan) {
    return {mgr.measure(prep, pair_measurement_circuit(plan, false)),
            mgr.measure(prep, pair_measurement_circuit(plan, true))};
}

// Solves for the unknown amplitude from the H and V outcomes of a pair
// setting. With top = min(mapped_d, mapped_k) and bot the other image,
//   (m_H[top] - m_H[bot]) / 2 = Re(a_top * conj(a_bot))
//   (m_V[top] - m_V[bot]) / 2 = Im(a_top * conj(a_bot))
// which inverts directly once one of the two amplitudes is known. Raw
// probabilities go in unrenormalized; leaked noise mass cancels in the
// differences to first order.
inline cplx infer_entry(cplx d_value, const MeasurementOutcome& m_h, const MeasurementOutcome& m_v,
                        std::uint64_t mapped_d, std::uint64_t mapped_k) {
    if (std::norm(d_value) < 1e-12)
        throw ill_conditioned_error("infer_entry: determined entry is numerically zero");
    const std::uint64_t top = std::min(mapped_d, mapped_k);
    const std::uint64_t bot = std::max(mapped_d, mapped_k);
    if (bot >= m_h.probs.size() || bot >= m_v.probs.size())
        throw std::out_of_range("infer_entry: mapped index outside outcome");
    const double re = (m_h.probs[top] - m_h.probs[bot]) / 2.0;
    const double im = (m_v.probs[top] - m_v.probs[bot]) / 2.0;
    const cplx z{re, im};  // estimate of a_top * conj(a_bot)
    if (mapped_d == top) return std::conj(z / d_value);
    return z / std::conj(d_value);
}

namespace detail {

// Records which settings a reconstruction touched; settings_used counts
// distinct keys rather than measure() calls, since repeated settings are
// served from the manager's cache.
struct MeasureSession {
    MeasurementManager& mgr;
    std::set<std::string> keys;

    MeasurementOutcome measure(const StatePrep& prep, const Circuit& meas) {
        keys.insert(measurement_key(prep, meas));
        return mgr.measure(prep, meas);
    }

    SupportSet detect(const StatePrep& prep, double eps) {
        if (!(eps >= 0.0 && eps < 1.0))
            throw std::invalid_argument("detect_support: eps must lie in [0, 1)");
        const MeasurementOutcome out = measure(prep, Circuit(prep.qubit_count()));
        return threshold_support(out.probs, eps);
    }
};

inline bool edge_before(const TreeEdge& a, const TreeEdge& b) {
    if (a.weight != b.weight) return a.weight < b.weight;
    if (a.u != b.u) return a.u < b.u;
    return a.v < b.v;
}

// Phase convention for returned estimates: first entry with modulus above
// sqrt(eps) made real and nonnegative. If nothing clears that bar (heavy
// noise on a flat state), fall back to the largest entry.
inline void fix_phase(StateVector& estimate, double eps) {
    const double bar = std::sqrt(eps);
    double max_mod = 0.0;
    for (const cplx& a : estimate.amps) max_mod = std::max(max_mod, std::abs(a));
    estimate = phase_normalize(estimate, max_mod > bar ? bar : max_mod / 2.0);
}

inline ReconstructionReport reconstruct_mst_session(MeasureSession& session,
                                                    const StatePrep& prep, double eps) {
    const int n = prep.qubit_count();
    ReconstructionReport report;
    report.scheme = "mst";
    report.estimate = StateVector(n);
    report.estimate.amps[0] = 0.0;

    const SupportSet support = session.detect(prep, eps);
    std::unordered_map<std::uint64_t, cplx> value;
    const std::uint64_t anchor = support.entries.front().index;
    value[anchor] = std::sqrt(support.entries.front().prob);

    if (support.entries.size() > 1) {
        const SpanningTree tree = build_mst(HammingGraph(n, support.indices()));
        std::vector<TreeEdge> pending = tree.edges;
        while (!pending.empty()) {
            // Cheapest edge with exactly one determined endpoint; ties were
            // already ordered by (weight, u, v) inside build_mst.
            std::size_t pick = pending.size();
            for (std::size_t i = 0; i < pending.size(); ++i) {
                const bool has_u = value.count(pending[i].u) > 0;
                const bool has_v = value.count(pending[i].v) > 0;
                if (has_u == has_v) continue;
                if (pick == pending.size() || edge_before(pending[i], pending[pick])) pick = i;
            }
            if (pick == pending.size())
                throw std::logic_error("reconstruct_mst: spanning tree not connected");
            const TreeEdge edge = pending[pick];
            pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(pick));
            const bool u_known = value.count(edge.u) > 0;
            const std::uint64_t index_d = u_known ? edge.u : edge.v;
            const std::uint64_t index_k = u_known ? edge.v : edge.u;
            const PairPlan plan = plan_pair(index_d, index_k, n);
            const MeasurementOutcome m_h = session.measure(prep, pair_measurement_circuit(plan, false));
            const MeasurementOutcome m_v = session.measure(prep, pair_measurement_circuit(plan, true));
            const cplx inferred = infer_entry(value.at(index_d), m_h, m_v, plan.mapped_d, plan.mapped_k);
            value[index_k] = inferred;
            report.cnots_used += 2ll * static_cast<long long>(plan.cnot_chain.size());
            report.edge_trace.push_back({index_d, index_k, edge.weight, inferred});
        }
    }

    for (const auto& [index, amp] : value) report.estimate.amps[index] = amp;
    report.estimate = report.estimate.normalized();
    fix_phase(report.estimate, eps);
    report.settings_used = static_cast<int>(session.keys.size());
    return report;
}

// A support needs no CNOTs when its weight-1 edges alone connect it.
inline bool weight1_spanning(const std::vector<std::uint64_t>& indices, int n) {
    if (indices.size() <= 1) return true;
    std::unordered_map<std::uint64_t, int> position;
    for (std::size_t i = 0; i < indices.size(); ++i)
        position.emplace(indices[i], static_cast<int>(i));
    UnionFind uf(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i)
        for (int q = 0; q < n; ++q) {
            const auto it = position.find(indices[i] ^ (std::uint64_t{1} << q));
            if (it != position.end()) uf.unite(static_cast<int>(i), it->second);
        }
    const int root = uf.find(0);
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (uf.find(static_cast<int>(i)) != root) return false;
    return true;
}

inline Circuit randomizer_circuit(int n, RandomizerKind kind, std::uint64_t master_seed) {
    Circuit circuit(n);
    switch (kind) {
        case RandomizerKind::HadamardAll:
            for (int q = 0; q < n; ++q) circuit.h(q);
            break;
        case RandomizerKind::VAll:
            for (int q = 0; q < n; ++q) circuit.v(q);
            break;
        case RandomizerKind::Haar: {
            std::mt19937_64 rng = seeded_engine(master_seed, "randomizer-haar");
            for (int q = 0; q < n; ++q) {
                const double theta = 2.0 * std::asin(std::sqrt(uniform01(rng)));
                const double phi = 2.0 * M_PI * uniform01(rng);
                const double lambda = 2.0 * M_PI * uniform01(rng);
                circuit.u3(q, theta, phi, lambda);
            }
            break;
        }
        case RandomizerKind::Auto:
            throw std::logic_error("randomizer_circuit: Auto is not a concrete randomizer");
    }
    return circuit;
}

inline void apply_inverse_randomizer(StateVector& estimate, const Circuit& randomizer) {
    // Post-processing on the estimate, applied in software; gates commute
    // across qubits so reversal order is immaterial, adjoints are not.
    for (auto it = randomizer.ops.rbegin(); it != randomizer.ops.rend(); ++it)
        apply_1q_inplace(estimate, op_matrix(*it).adjoint(), it->q0);
}

}  // namespace detail

// Support detection, MST over the support, then one H/V pair setting per
// tree edge, walking outward from the anchor entry.
inline ReconstructionReport reconstruct_mst(MeasurementManager& mgr, const StatePrep& prep,
                                            double eps) {
    detail::MeasureSession session{mgr, {}};
    return detail::reconstruct_mst_session(session, prep, eps);
}

inline ReconstructionReport reconstruct_mst(MeasurementManager& mgr, const Circuit& prep,
                                            double eps) {
    return reconstruct_mst(mgr, StatePrep::from_circuit(prep), eps);
}

// Appends a randomizing layer of 1-qubit gates before reconstructing, so a
// sparse state turns into one whose support needs no CNOTs to measure, then
// undoes the layer on the estimate. Tries H on every qubit, then V, then
// seeded Haar-random gates, accepting the first layer whose detected
// support is spanned by weight-1 edges; if none is, reconstructs the
// original state directly and flags the fallback. The masked variant also
// measures the unrandomized state once and zeroes every estimate entry
// outside that mask.
inline ReconstructionReport reconstruct_randomized(MeasurementManager& mgr, const StatePrep& prep,
                                                   double eps, bool masked,
                                                   RandomizerKind randomizer = RandomizerKind::Auto) {
    const int n = prep.qubit_count();
    detail::MeasureSession session{mgr, {}};

    std::vector<std::uint64_t> mask;
    if (masked) mask = session.detect(prep, eps).indices();

    std::vector<RandomizerKind> ladder;
    if (randomizer == RandomizerKind::Auto)
        ladder = {RandomizerKind::HadamardAll, RandomizerKind::VAll, RandomizerKind::Haar};
    else
        ladder = {randomizer};

    ReconstructionReport report;
    bool accepted = false;
    for (RandomizerKind kind : ladder) {
        const Circuit layer = detail::randomizer_circuit(n, kind, mgr.seed());
        const StatePrep randomized = prep.with_appended(layer);
        const SupportSet support = session.detect(randomized, eps);
        if (!detail::weight1_spanning(support.indices(), n)) continue;
        report = detail::reconstruct_mst_session(session, randomized, eps);
        detail::apply_inverse_randomizer(report.estimate, layer);
        report.randomizer = kind == RandomizerKind::HadamardAll ? "h"
                            : kind == RandomizerKind::VAll      ? "v"
                                                                : "haar";
        accepted = true;
        break;
    }
    if (!accepted) {
        report = detail::reconstruct_mst_session(session, prep, eps);
        report.fell_back_to_mst = true;
    }

    report.scheme = masked ? "randomized-masked" : "randomized";
    if (masked) {
        report.mask_settings = 1;
        if (!report.fell_back_to_mst) {
            StateVector& est = report.estimate;
            std::vector<bool> keep(est.amps.size(), false);
            for (std::uint64_t index : mask) keep[index] = true;
            for (std::size_t i = 0; i < est.amps.size(); ++i)
                if (!keep[i]) est.amps[i] = 0.0;
            if (est.norm() < 1e-12)
                throw empty_support_error("reconstruct_randomized: mask removed all weight");
            est = est.normalized();
        }
    }
    detail::fix_phase(report.estimate, eps);
    report.settings_used = static_cast<int>(session.keys.size());
    return report;
}

inline ReconstructionReport reconstruct_randomized(MeasurementManager& mgr, const Circuit& prep,
                                                   double eps, bool masked,
                                                   RandomizerKind randomizer = RandomizerKind::Auto) {
    return reconstruct_randomized(mgr, StatePrep::from_circuit(prep), eps, masked, randomizer);
}

}  // namespace qtomo
