#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "qtomo/hamming.hpp"
#include "qtomo/tomo.hpp"

namespace {

using qtomo::BackendMode;
using qtomo::Circuit;
using qtomo::cplx;
using qtomo::MeasurementManager;
using qtomo::MeasurementOutcome;
using qtomo::PairPlan;
using qtomo::RandomizerKind;
using qtomo::ReconstructionReport;
using qtomo::StatePrep;
using qtomo::StateVector;

constexpr double kExactEps = 1e-12;

MeasurementManager exact_manager(std::uint64_t seed = 1) {
    return MeasurementManager({.mode = BackendMode::Exact, .seed = seed});
}

Circuit bell() { return Circuit(2).h(0).cx(0, 1); }

Circuit ghz(int n) {
    Circuit c(n);
    c.h(0);
    for (int q = 1; q < n; ++q) c.cx(0, q);
    return c;
}

TEST(DetectSupport, FindsEntriesAboveThreshold) {
    MeasurementManager mgr = exact_manager();
    const qtomo::SupportSet s =
        qtomo::detect_support(mgr, StatePrep::from_circuit(ghz(3)), 0.05);
    ASSERT_EQ(s.indices(), (std::vector<std::uint64_t>{0, 7}));
    EXPECT_NEAR(s.entries[0].prob, 0.5, 1e-12);
    EXPECT_NEAR(s.entries[1].prob, 0.5, 1e-12);

    const qtomo::SupportSet zero =
        qtomo::detect_support(mgr, StatePrep::from_circuit(Circuit(3)), 0.05);
    EXPECT_EQ(zero.indices(), (std::vector<std::uint64_t>{0}));
}

TEST(DetectSupport, RejectsBadThresholds) {
    MeasurementManager mgr = exact_manager();
    const StatePrep prep = StatePrep::from_circuit(ghz(2));
    EXPECT_THROW(qtomo::detect_support(mgr, prep, -0.1), std::invalid_argument);
    EXPECT_THROW(qtomo::detect_support(mgr, prep, 1.0), std::invalid_argument);
    EXPECT_THROW(qtomo::detect_support(mgr, prep, 0.9), qtomo::empty_support_error);
}

TEST(PlanPair, PinnedPlans) {
    const PairPlan p03 = qtomo::plan_pair(0, 3, 2);
    EXPECT_EQ(p03.pivot, 0);
    EXPECT_EQ(p03.cnot_chain, (std::vector<std::pair<int, int>>{{0, 1}}));
    EXPECT_EQ(p03.mapped_d, 0u);
    EXPECT_EQ(p03.mapped_k, 1u);

    const PairPlan p04 = qtomo::plan_pair(0, 4, 3);
    EXPECT_EQ(p04.pivot, 2);
    EXPECT_TRUE(p04.cnot_chain.empty());

    const PairPlan p07 = qtomo::plan_pair(0, 7, 3);
    EXPECT_EQ(p07.pivot, 0);
    EXPECT_EQ(p07.cnot_chain.size(), 2u);
    EXPECT_EQ(p07.mapped_k, 1u);

    // Unknown index has no private bit: pivot comes from the other side.
    const PairPlan sub = qtomo::plan_pair(7, 1, 3);
    EXPECT_EQ(sub.pivot, 1);
    EXPECT_EQ(sub.cnot_chain.size(), 1u);
}

TEST(PlanPair, MappedIndicesDifferInExactlyThePivot) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 6);
        const std::uint64_t dim = 1ull << n;
        const std::uint64_t d = rng() % dim;
        std::uint64_t k = rng() % dim;
        if (d == k) continue;
        const PairPlan plan = qtomo::plan_pair(d, k, n);
        EXPECT_EQ(plan.mapped_d ^ plan.mapped_k, 1ull << plan.pivot);
        EXPECT_EQ(static_cast<int>(plan.cnot_chain.size()),
                  qtomo::hamming_distance(d, k) - 1);
        for (const auto& [c, t] : plan.cnot_chain) EXPECT_EQ(c, plan.pivot);
        // The chain shifts one endpoint onto the other except at the pivot.
        EXPECT_EQ(plan.mapped_d & ~(1ull << plan.pivot),
                  plan.mapped_k & ~(1ull << plan.pivot));
    }
}

TEST(PlanPair, InputValidation) {
    EXPECT_THROW(qtomo::plan_pair(0, 0, 2), std::invalid_argument);
    EXPECT_THROW(qtomo::plan_pair(0, 4, 2), std::out_of_range);
    EXPECT_THROW(qtomo::plan_pair(0, 1, 0), std::invalid_argument);
}

TEST(PairMeasurement, CircuitLayout) {
    const PairPlan plan = qtomo::plan_pair(0, 7, 3);
    const Circuit h_basis = qtomo::pair_measurement_circuit(plan, false);
    ASSERT_EQ(h_basis.ops.size(), 3u);
    EXPECT_TRUE(h_basis.ops[0].is_cnot());
    EXPECT_TRUE(h_basis.ops[1].is_cnot());
    EXPECT_EQ(h_basis.ops[2].kind, qtomo::OpKind::H);
    EXPECT_EQ(h_basis.ops[2].q0, plan.pivot);

    const Circuit v_basis = qtomo::pair_measurement_circuit(plan, true);
    EXPECT_EQ(v_basis.ops[2].kind, qtomo::OpKind::V);
}

TEST(PairMeasurement, BellOutcomes) {
    MeasurementManager mgr = exact_manager();
    const StatePrep prep = StatePrep::from_circuit(bell());
    const auto [m_h, m_v] = qtomo::measure_pair(mgr, prep, qtomo::plan_pair(0, 3, 2));
    EXPECT_NEAR(m_h.probs[0], 1.0, 1e-12);
    EXPECT_NEAR(m_h.probs[1], 0.0, 1e-12);
    EXPECT_NEAR(m_v.probs[0], 0.5, 1e-12);
    EXPECT_NEAR(m_v.probs[1], 0.5, 1e-12);
}

TEST(PairMeasurement, EqualAmplitudesWithoutChain) {
    MeasurementManager mgr = exact_manager();
    const StatePrep prep = StatePrep::from_circuit(Circuit(2).h(0));
    const auto [m_h, m_v] = qtomo::measure_pair(mgr, prep, qtomo::plan_pair(0, 1, 2));
    EXPECT_NEAR(m_h.probs[0], 1.0, 1e-12);
    EXPECT_NEAR(m_v.probs[0], 0.5, 1e-12);
    EXPECT_NEAR(m_v.probs[1], 0.5, 1e-12);
}

MeasurementOutcome outcome_at(double top_p, double bot_p, std::uint64_t top, std::uint64_t bot) {
    std::vector<double> probs(std::max(top, bot) + 1, 0.0);
    probs[top] = top_p;
    probs[bot] = bot_p;
    return {probs, 0};
}

TEST(InferEntry, PinnedCases) {
    const double s = 1.0 / std::sqrt(2.0);
    // Equal real amplitudes.
    cplx k = qtomo::infer_entry(s, outcome_at(1.0, 0.0, 0, 1), outcome_at(0.5, 0.5, 0, 1), 0, 1);
    EXPECT_LT(std::abs(k - cplx(s)), 1e-12);
    // Unknown amplitude purely imaginary.
    k = qtomo::infer_entry(s, outcome_at(0.5, 0.5, 0, 1), outcome_at(0.0, 1.0, 0, 1), 0, 1);
    EXPECT_LT(std::abs(k - cplx(0, s)), 1e-12);
    // Unknown amplitude zero.
    k = qtomo::infer_entry(1.0, outcome_at(0.5, 0.5, 0, 1), outcome_at(0.5, 0.5, 0, 1), 0, 1);
    EXPECT_LT(std::abs(k), 1e-12);
}

TEST(InferEntry, InvertsForwardModelInBothOrderings) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 1000; ++trial) {
        const cplx d = oracle::random_amplitude(rng, 0.3);
        const cplx k = oracle::random_amplitude(rng, 0.0);
        const bool d_on_top = trial % 2 == 0;
        const std::uint64_t mapped_d = d_on_top ? 2 : 6;
        const std::uint64_t mapped_k = d_on_top ? 6 : 2;
        const cplx a_top = d_on_top ? d : k;
        const cplx a_bot = d_on_top ? k : d;
        const oracle::PairProbs probs = oracle::pair_forward_model(a_top, a_bot);
        const cplx got = qtomo::infer_entry(d, outcome_at(probs.h_top, probs.h_bot, 2, 6),
                                            outcome_at(probs.v_top, probs.v_bot, 2, 6),
                                            mapped_d, mapped_k);
        ASSERT_LT(std::abs(got - k), 1e-10) << "trial " << trial;
    }
}

TEST(InferEntry, RejectsVanishingDeterminedEntry) {
    EXPECT_THROW(qtomo::infer_entry(1e-7, outcome_at(0.5, 0.5, 0, 1),
                                    outcome_at(0.5, 0.5, 0, 1), 0, 1),
                 qtomo::ill_conditioned_error);
}

TEST(ReconstructMst, BellState) {
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r = qtomo::reconstruct_mst(mgr, bell(), kExactEps);
    EXPECT_EQ(r.scheme, "mst");
    EXPECT_GT(qtomo::fidelity(r.estimate, qtomo::run_circuit(bell(), StateVector(2))),
              1.0 - 1e-9);
    EXPECT_EQ(r.settings_used, 3);  // identity + one H + one V setting
    EXPECT_EQ(r.cnots_used, 2);
    EXPECT_EQ(r.mask_settings, 0);
    ASSERT_EQ(r.edge_trace.size(), 1u);
    EXPECT_EQ(r.edge_trace[0].weight, 2);
}

TEST(ReconstructMst, BasisStateNeedsOnlyDetection) {
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r = qtomo::reconstruct_mst(mgr, Circuit(3), kExactEps);
    EXPECT_EQ(r.settings_used, 1);
    EXPECT_EQ(r.cnots_used, 0);
    EXPECT_TRUE(r.edge_trace.empty());
    EXPECT_NEAR(std::abs(r.estimate.amps[0]), 1.0, 1e-12);
}

TEST(ReconstructMst, ThreeEntrySuperposition) {
    StateVector state(3);
    state.amps.assign(8, 0.0);
    state.amps[0] = state.amps[3] = state.amps[6] = 1.0 / std::sqrt(3.0);
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r =
        qtomo::reconstruct_mst(mgr, StatePrep::from_state(state), kExactEps);
    EXPECT_GT(qtomo::fidelity(r.estimate, state), 1.0 - 1e-9);
    EXPECT_EQ(r.cnots_used, 4);  // two weight-2 edges
}

TEST(ReconstructMst, CircuitAndStateOverloadsAgree) {
    MeasurementManager m1 = exact_manager();
    MeasurementManager m2 = exact_manager();
    const Circuit prep = ghz(3);
    const ReconstructionReport a = qtomo::reconstruct_mst(m1, prep, kExactEps);
    const ReconstructionReport b = qtomo::reconstruct_mst(
        m2, StatePrep::from_state(qtomo::run_circuit(prep, StateVector(3))), kExactEps);
    EXPECT_EQ(a.settings_used, b.settings_used);
    EXPECT_EQ(a.cnots_used, b.cnots_used);
    EXPECT_GT(qtomo::fidelity(a.estimate, b.estimate), 1.0 - 1e-9);
}

TEST(ReconstructMst, CostsTrackTheSpanningTree) {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const int k = 2 + static_cast<int>(rng() % std::min(5, (1 << n) - 1));
        const StateVector state = oracle::random_sparse_state(n, k, rng);

        MeasurementManager mgr = exact_manager(trial);
        const ReconstructionReport r =
            qtomo::reconstruct_mst(mgr, StatePrep::from_state(state), kExactEps);
        ASSERT_GT(qtomo::fidelity(r.estimate, state), 1.0 - 1e-9) << "trial " << trial;

        std::vector<std::uint64_t> support;
        for (std::uint64_t i = 0; i < state.amps.size(); ++i)
            if (std::norm(state.amps[i]) > kExactEps) support.push_back(i);
        const qtomo::SpanningTree tree = qtomo::build_mst(qtomo::HammingGraph(n, support));
        long long expected_cnots = 0;
        for (const qtomo::TreeEdge& e : tree.edges) expected_cnots += 2LL * (e.weight - 1);
        EXPECT_EQ(r.cnots_used, expected_cnots);
        EXPECT_EQ(r.cnots_used, qtomo::cnot_upper_bound(tree));
        EXPECT_LE(r.settings_used, 1 + 2 * (k - 1));
        EXPECT_EQ(r.edge_trace.size(), tree.edges.size());
    }
}

TEST(ReconstructMst, PhaseConventionPinsFirstLargeEntry) {
    std::mt19937_64 rng(17);
    const StateVector state = oracle::random_sparse_state(4, 5, rng);
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r =
        qtomo::reconstruct_mst(mgr, StatePrep::from_state(state), kExactEps);
    const double bar = std::sqrt(kExactEps);
    for (const cplx& a : r.estimate.amps) {
        if (std::abs(a) <= bar) continue;
        EXPECT_GT(a.real(), 0.0);
        EXPECT_LT(std::abs(a.imag()), 1e-9);
        break;
    }
}

TEST(ReconstructMst, IllConditionedChainThrows) {
    // The tree walks 0 -> 1 -> 3, but the amplitude at 1 is ~1e-9, far too
    // small to divide by when inferring the entry at 3.
    StateVector state(2);
    state.amps = {1.0, 1e-9, 0.0, 0.1};
    state = state.normalized();
    MeasurementManager mgr = exact_manager();
    EXPECT_THROW(qtomo::reconstruct_mst(mgr, StatePrep::from_state(state), 1e-20),
                 qtomo::ill_conditioned_error);
}

TEST(Randomized, GhzThreePicksVLayer) {
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r =
        qtomo::reconstruct_randomized(mgr, ghz(3), kExactEps, /*masked=*/true);
    EXPECT_EQ(r.scheme, "randomized-masked");
    EXPECT_EQ(r.randomizer, "v");
    EXPECT_FALSE(r.fell_back_to_mst);
    EXPECT_EQ(r.mask_settings, 1);
    EXPECT_EQ(r.cnots_used, 0);
    EXPECT_GT(qtomo::fidelity(r.estimate, qtomo::run_circuit(ghz(3), StateVector(3))),
              1.0 - 1e-9);
}

TEST(Randomized, PlusStateCollapsesToOneSetting) {
    Circuit prep(4);
    for (int q = 0; q < 4; ++q) prep.h(q);
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r =
        qtomo::reconstruct_randomized(mgr, prep, kExactEps, /*masked=*/false);
    EXPECT_EQ(r.randomizer, "h");
    EXPECT_EQ(r.settings_used, 1);
    EXPECT_EQ(r.cnots_used, 0);
    EXPECT_GT(qtomo::fidelity(r.estimate, qtomo::run_circuit(prep, StateVector(4))),
              1.0 - 1e-9);
}

TEST(Randomized, ForcedHadamardFallsBackOnGhz) {
    // H on every qubit leaves the GHZ support pairwise distance two, so the
    // forced layer is rejected and the plain tree reconstruction runs.
    MeasurementManager mgr = exact_manager();
    const ReconstructionReport r = qtomo::reconstruct_randomized(
        mgr, ghz(3), kExactEps, /*masked=*/false, RandomizerKind::HadamardAll);
    EXPECT_TRUE(r.fell_back_to_mst);
    EXPECT_EQ(r.randomizer, "");
    EXPECT_EQ(r.cnots_used, 4);
    EXPECT_GT(qtomo::fidelity(r.estimate, qtomo::run_circuit(ghz(3), StateVector(3))),
              1.0 - 1e-9);
}

TEST(Randomized, BellEscalatesToHaar) {
    // Both H x H and V x V leave the Bell support two apart, so the ladder
    // lands on the seeded Haar layer.
    MeasurementManager mgr = exact_manager(5);
    const ReconstructionReport r =
        qtomo::reconstruct_randomized(mgr, bell(), kExactEps, /*masked=*/false);
    EXPECT_EQ(r.randomizer, "haar");
    EXPECT_FALSE(r.fell_back_to_mst);
    EXPECT_GT(qtomo::fidelity(r.estimate, qtomo::run_circuit(bell(), StateVector(2))),
              1.0 - 1e-9);
}

TEST(Randomized, GhzFourEscalatesToHaar) {
    MeasurementManager mgr = exact_manager(2);
    const ReconstructionReport r =
        qtomo::reconstruct_randomized(mgr, ghz(4), kExactEps, /*masked=*/false);
    EXPECT_EQ(r.randomizer, "haar");
    EXPECT_GT(qtomo::fidelity(r.estimate, qtomo::run_circuit(ghz(4), StateVector(4))),
              1.0 - 1e-9);
}

TEST(Randomized, DenseStateStaysWithinSettingBudget) {
    std::mt19937_64 rng(23);
    const int n = 4;
    const StateVector state = oracle::random_sparse_state(n, 1 << n, rng);
    MeasurementManager mgr = exact_manager(3);
    const ReconstructionReport r = qtomo::reconstruct_randomized(
        mgr, StatePrep::from_state(state), kExactEps, /*masked=*/false);
    EXPECT_EQ(r.randomizer, "h");
    EXPECT_LE(r.settings_used, qtomo::dense_settings_count(n));
    EXPECT_GT(qtomo::fidelity(r.estimate, state), 1.0 - 1e-9);
}

TEST(Randomized, MaskIsIdempotentOnDenseStates) {
    std::mt19937_64 rng(29);
    const StateVector state = oracle::random_sparse_state(3, 8, rng);
    MeasurementManager plain_mgr = exact_manager(4);
    MeasurementManager masked_mgr = exact_manager(4);
    const ReconstructionReport plain = qtomo::reconstruct_randomized(
        plain_mgr, StatePrep::from_state(state), kExactEps, false);
    const ReconstructionReport masked = qtomo::reconstruct_randomized(
        masked_mgr, StatePrep::from_state(state), kExactEps, true);
    // Full support: the mask keeps every entry and only adds its own setting.
    EXPECT_EQ(masked.settings_used, plain.settings_used + 1);
    EXPECT_EQ(masked.mask_settings, 1);
    for (std::size_t i = 0; i < state.amps.size(); ++i)
        EXPECT_LT(std::abs(masked.estimate.amps[i] - plain.estimate.amps[i]), 1e-9);
}

TEST(Randomized, MaskZeroesLeakageOutsideSupport) {
    MeasurementManager mgr = exact_manager(6);
    const ReconstructionReport r =
        qtomo::reconstruct_randomized(mgr, ghz(4), kExactEps, /*masked=*/true);
    for (std::uint64_t i = 0; i < r.estimate.amps.size(); ++i) {
        if (i == 0 || i == 15) continue;
        EXPECT_EQ(r.estimate.amps[i], cplx(0.0)) << "entry " << i;
    }
    EXPECT_NEAR(r.estimate.norm(), 1.0, 1e-12);
}

}  // namespace
