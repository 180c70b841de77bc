#pragma once

#include <atomic>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/circuit.hpp"
#include "qtomo/rng.hpp"

namespace qtomo {

// Depolarizing-style stochastic Pauli noise plus readout bit flips.
// p_depol_1q: chance of a uniformly random X/Y/Z after each 1-qubit gate.
// p_depol_2q: chance of a uniformly random non-identity Pauli pair after
//             each CNOT. p_readout: independent flip chance per output bit.
struct NoiseModel {
    double p_depol_1q = 0.0;
    double p_depol_2q = 0.0;
    double p_readout = 0.0;

    bool all_zero() const { return p_depol_1q == 0.0 && p_depol_2q == 0.0 && p_readout == 0.0; }

    void validate() const {
        for (double p : {p_depol_1q, p_depol_2q, p_readout})
            if (!(p >= 0.0 && p <= 1.0))
                throw config_error("NoiseModel: probabilities must lie in [0, 1]");
    }

    // The noise level used by the reference experiments.
    static NoiseModel default_noisy() { return {0.0005, 0.01, 0.02}; }
};

// Result of one measurement setting. shots == 0 marks an exact (analytic)
// outcome; otherwise probs[i] is counts[i] / shots.
struct MeasurementOutcome {
    std::vector<double> probs;
    long shots = 0;
};

// What gets handed to the backend as "the state to measure": an optional
// explicit initial vector (defaults to |0...0>) followed by a gate list.
// Tests use the explicit form, so arbitrary sparse states can be measured
// without synthesizing preparation circuits for them.
struct StatePrep {
    std::optional<StateVector> initial;
    Circuit circuit;

    static StatePrep from_circuit(Circuit c) { return {std::nullopt, std::move(c)}; }

    static StatePrep from_state(StateVector s) {
        Circuit empty(s.n);
        return {std::move(s), std::move(empty)};
    }

    int qubit_count() const { return circuit.n; }

    StatePrep with_appended(const Circuit& more) const {
        StatePrep out = *this;
        out.circuit.append(more);
        return out;
    }

    StateVector prepare() const {
        StateVector state = initial ? *initial : StateVector(circuit.n);
        run_circuit_inplace(circuit, state);
        return state;
    }

    std::string key_material() const {
        std::string out;
        if (initial) {
            out += "state";
            for (const cplx& a : initial->amps) {
                out += ' ';
                out += format_double(a.real());
                out += ' ';
                out += format_double(a.imag());
            }
            out += '\n';
        }
        out += circuit_text(circuit);
        return out;
    }
};

// The cache key for a setting is the serialized preparation and measurement
// circuits, nothing else; in particular the seed stays out of the key.
inline std::string measurement_key(const StatePrep& prep, const Circuit& meas) {
    return prep.key_material() + "|\n" + circuit_text(meas);
}

// Multinomial draw: `shots` samples from `probs`, returned as counts.
// Entries below -1e-12 are rejected; smaller negative dust is clamped.
inline std::vector<long> sample_counts(const std::vector<double>& probs, long shots,
                                       std::mt19937_64& rng) {
    if (shots < 0) throw std::invalid_argument("sample_counts: negative shot count");
    double total = 0.0;
    std::vector<double> cumulative(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        double p = probs[i];
        if (p < -1e-12) throw std::invalid_argument("sample_counts: negative probability");
        if (p < 0.0) p = 0.0;
        total += p;
        cumulative[i] = total;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("sample_counts: probabilities do not sum to 1");
    std::vector<long> counts(probs.size(), 0);
    for (long s = 0; s < shots; ++s) {
        const double u = uniform01(rng) * total;
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cumulative.begin());
        if (idx >= counts.size()) idx = counts.size() - 1;
        ++counts[idx];
    }
    return counts;
}

// One Monte Carlo Pauli trajectory of `circuit`: after each 1-qubit gate a
// random X/Y/Z with probability p_depol_1q, after each CNOT a random
// non-identity Pauli pair on (control, target) with probability p_depol_2q.
// Zero probabilities consume no randomness, so a noiseless trajectory draws
// nothing. `inserted_any`, when given, reports whether the trajectory
// differs from the input circuit.
inline Circuit apply_noise_trajectory(const Circuit& circuit, const NoiseModel& noise,
                                      std::mt19937_64& rng, bool* inserted_any = nullptr) {
    Circuit out(circuit.n);
    bool inserted = false;
    auto push_pauli = [&out](int which, int q) {
        switch (which) {
            case 1: out.x(q); break;
            case 2: out.y(q); break;
            case 3: out.z(q); break;
            default: break;
        }
    };
    for (const CircuitOp& op : circuit.ops) {
        out.ops.push_back(op);
        if (op.is_cnot()) {
            if (bernoulli(rng, noise.p_depol_2q)) {
                const int pair = 1 + static_cast<int>(uniform_below(rng, 15));
                push_pauli(pair >> 2, op.q0);
                push_pauli(pair & 3, op.q1);
                inserted = true;
            }
        } else if (bernoulli(rng, noise.p_depol_1q)) {
            push_pauli(1 + static_cast<int>(uniform_below(rng, 3)), op.q0);
            inserted = true;
        }
    }
    if (inserted_any) *inserted_any = inserted;
    return out;
}

// Flips each of the n bits of `bits` independently with probability p.
inline std::uint64_t apply_readout_flips(std::uint64_t bits, double p, int n,
                                         std::mt19937_64& rng) {
    if (p <= 0.0) return bits;
    for (int q = 0; q < n; ++q)
        if (bernoulli(rng, p)) bits ^= std::uint64_t{1} << q;
    return bits;
}

enum class BackendMode { Exact, Sampled };

// Executes measurement settings and caches outcomes by circuit text.
// Each distinct setting runs at most once, even under concurrent requests;
// its random stream is derived from (master seed, key), so outcomes do not
// depend on the order in which settings are first requested.
class MeasurementManager {
  public:
    struct Config {
        BackendMode mode = BackendMode::Exact;
        long shots = 0;  // per setting; required >= 1 in sampled mode
        NoiseModel noise{};
        std::uint64_t seed = 0;
        long trajectory_block = 64;  // shots drawn per sampled Pauli trajectory
    };

    explicit MeasurementManager(Config cfg) : cfg_(cfg) {
        cfg_.noise.validate();
        if (cfg_.mode == BackendMode::Sampled && cfg_.shots < 1)
            throw config_error("MeasurementManager: sampled mode needs shots >= 1");
        if (cfg_.trajectory_block < 1)
            throw config_error("MeasurementManager: trajectory block must be >= 1");
        if (cfg_.mode == BackendMode::Exact && !cfg_.noise.all_zero())
            throw config_error("MeasurementManager: exact mode cannot model noise");
    }

    const Config& config() const { return cfg_; }
    std::uint64_t seed() const { return cfg_.seed; }

    MeasurementOutcome measure(const StatePrep& prep, const Circuit& meas) {
        if (meas.n != prep.qubit_count())
            throw std::invalid_argument("measure: prep and meas qubit counts differ");
        const std::string key = measurement_key(prep, meas);
        std::shared_future<MeasurementOutcome> fut;
        std::promise<MeasurementOutcome> prom;
        bool owner = false;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto [it, fresh] = cache_.try_emplace(key);
            if (fresh) {
                it->second = prom.get_future().share();
                owner = true;
            }
            fut = it->second;
        }
        if (owner) {
            try {
                prom.set_value(execute(prep, meas, key));
                executions_.fetch_add(1, std::memory_order_relaxed);
            } catch (...) {
                prom.set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

    MeasurementOutcome measure(const Circuit& prep, const Circuit& meas) {
        return measure(StatePrep::from_circuit(prep), meas);
    }

    // Number of settings actually executed (cache misses).
    std::size_t executions() const { return executions_.load(std::memory_order_relaxed); }

    // Newline-delimited JSON records {"key":..., "probs":[...], "shots":n},
    // sorted by key. Intended for dumping after runs complete.
    void dump_cache(std::ostream& os) const {
        std::lock_guard<std::mutex> lock(mu_);
        for (const auto& [key, fut] : cache_) {
            if (!fut.valid()) continue;
            const MeasurementOutcome& out = fut.get();
            os << "{\"key\":\"" << escape_json(key) << "\",\"probs\":[";
            for (std::size_t i = 0; i < out.probs.size(); ++i) {
                if (i) os << ',';
                os << format_double(out.probs[i]);
            }
            os << "],\"shots\":" << out.shots << "}\n";
        }
    }

  private:
    static std::string escape_json(const std::string& s) {
        std::string out;
        out.reserve(s.size() + 8);
        for (char c : s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default:
                    if (static_cast<unsigned char>(c) < 0x20) {
                        char buf[8];
                        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                        out += buf;
                    } else {
                        out += c;
                    }
            }
        }
        return out;
    }

    static std::vector<double> probabilities(const StateVector& state) {
        std::vector<double> probs(state.amps.size());
        for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = std::norm(state.amps[i]);
        return probs;
    }

    MeasurementOutcome execute(const StatePrep& prep, const Circuit& meas,
                               const std::string& key) const {
        if (cfg_.mode == BackendMode::Exact) {
            StateVector state = prep.prepare();
            run_circuit_inplace(meas, state);
            return {probabilities(state), 0};
        }

        const int n = prep.qubit_count();
        Circuit full = prep.circuit;
        full.append(meas);
        std::mt19937_64 rng = seeded_engine(cfg_.seed, key);

        const StateVector init = prep.initial ? *prep.initial : StateVector(n);
        std::optional<std::vector<double>> clean_probs;  // insertion-free trajectory, lazily
        auto clean = [&]() -> const std::vector<double>& {
            if (!clean_probs) clean_probs = probabilities(run_circuit(full, init));
            return *clean_probs;
        };

        std::vector<long> counts(std::size_t{1} << n, 0);
        for (long remaining = cfg_.shots; remaining > 0;) {
            const long block = std::min(cfg_.trajectory_block, remaining);
            remaining -= block;
            bool inserted = false;
            const Circuit traj = apply_noise_trajectory(full, cfg_.noise, rng, &inserted);
            const std::vector<double>& probs =
                inserted ? probabilities(run_circuit(traj, init)) : clean();
            const std::vector<long> drawn = sample_counts(probs, block, rng);
            if (cfg_.noise.p_readout > 0.0) {
                for (std::size_t i = 0; i < drawn.size(); ++i)
                    for (long s = 0; s < drawn[i]; ++s)
                        ++counts[apply_readout_flips(i, cfg_.noise.p_readout, n, rng)];
            } else {
                for (std::size_t i = 0; i < drawn.size(); ++i) counts[i] += drawn[i];
            }
        }
        std::vector<double> probs(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            probs[i] = static_cast<double>(counts[i]) / static_cast<double>(cfg_.shots);
        return {probs, cfg_.shots};
    }

    Config cfg_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_future<MeasurementOutcome>> cache_;
    std::atomic<std::size_t> executions_{0};
};

}  // namespace qtomo
