#pragma once

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <thread>

#include "qtomo/presets.hpp"
#include "qtomo/process.hpp"
#include "qtomo/tomo.hpp"

namespace qtomo {

// One resolved batch: a preparation (or process), a scheme, and the backend
// settings shared by every trial. Loaded from snake_case JSON.
struct ExperimentConfig {
    std::string name;
    std::string prep_spec;      // preset id or circuit file path, as given
    std::string scheme = "mst"; // mst | randomized | randomized-masked | process
    std::string process_scheme = "mst";  // state scheme used inside "process"
    int trials = 512;
    long shots = 16384;
    bool exact = false;
    double eps = 0.0;
    NoiseModel noise{};
    std::uint64_t seed = 1;
    int workers = 1;
    long trajectory_block = 64;
    std::string out_csv, out_json;  // optional output paths

    Circuit prep_circuit;                 // state schemes
    Circuit process_circuit;              // "process" scheme
    std::optional<Circuit> reference_circuit;  // fidelity target for "process"
};

inline NoiseModel noise_from_json(const nlohmann::json& j) {
    NoiseModel noise;
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "none") return noise;
        if (s == "default") return NoiseModel::default_noisy();
        throw config_error("noise: expected \"none\", \"default\", or an object");
    }
    if (!j.is_object()) throw config_error("noise: expected \"none\", \"default\", or an object");
    for (const auto& [key, value] : j.items()) {
        if (key == "p_depol_1q")
            noise.p_depol_1q = value.get<double>();
        else if (key == "p_depol_2q")
            noise.p_depol_2q = value.get<double>();
        else if (key == "p_readout")
            noise.p_readout = value.get<double>();
        else
            throw config_error("noise: unknown field '" + key + "'");
    }
    noise.validate();
    return noise;
}

// Accepts a preset id or a path to a circuit file.
inline Circuit resolve_prep(const std::string& spec) {
    for (const std::string& name : preset_names())
        if (spec == name) return load_preset(spec);
    if (std::filesystem::exists(spec)) return read_circuit_file(spec);
    throw config_error("prep '" + spec + "' is neither a preset nor an existing file");
}

inline ExperimentConfig load_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    if (!j.is_object()) throw config_error("config: expected a JSON object");
    if (!j.contains("prep") || !j.at("prep").is_string())
        throw config_error("config: required string field 'prep' missing");
    cfg.prep_spec = j.at("prep").get<std::string>();
    cfg.name = j.value("name", cfg.prep_spec);
    cfg.scheme = j.value("scheme", std::string("mst"));
    cfg.process_scheme = j.value("process_scheme", std::string("mst"));
    cfg.trials = j.value("trials", 512);
    cfg.shots = j.value("shots", long{16384});
    const std::string mode = j.value("mode", std::string("sampled"));
    if (mode != "exact" && mode != "sampled")
        throw config_error("config: mode must be \"exact\" or \"sampled\"");
    cfg.exact = mode == "exact";
    if (j.contains("noise")) cfg.noise = noise_from_json(j.at("noise"));
    cfg.seed = j.value("seed", std::uint64_t{1});
    cfg.workers = j.value("workers", 1);
    cfg.trajectory_block = j.value("trajectory_block", long{64});
    cfg.out_csv = j.value("out_csv", std::string());
    cfg.out_json = j.value("out_json", std::string());

    if (const char* env_seed = std::getenv("TOMO_SEED")) {
        try {
            cfg.seed = std::stoull(env_seed);
        } catch (const std::exception&) {
            throw config_error("TOMO_SEED must be an unsigned integer");
        }
    }

    static const std::vector<std::string> schemes = {"mst", "randomized", "randomized-masked",
                                                     "process"};
    auto known = [&](const std::string& s) {
        return std::find(schemes.begin(), schemes.end(), s) != schemes.end();
    };
    if (!known(cfg.scheme)) throw config_error("config: unknown scheme '" + cfg.scheme + "'");
    if (cfg.scheme == "process" &&
        (!known(cfg.process_scheme) || cfg.process_scheme == "process"))
        throw config_error("config: unknown process_scheme '" + cfg.process_scheme + "'");
    if (cfg.trials < 1) throw config_error("config: trials must be >= 1");
    if (!cfg.exact && cfg.shots < 1) throw config_error("config: sampled mode needs shots >= 1");
    if (cfg.workers < 1) throw config_error("config: workers must be >= 1");

    if (cfg.scheme == "process") {
        cfg.process_circuit = cfg.prep_spec == "proc-w1" ? w1_process() : resolve_prep(cfg.prep_spec);
        if (j.contains("reference")) {
            const std::string ref = j.at("reference").get<std::string>();
            if (ref != "none")
                cfg.reference_circuit = ref == "proc-w1" ? w1_process() : resolve_prep(ref);
        } else {
            // The simulator knows the true process, so default to comparing
            // against it, mirroring the state schemes' fidelity column.
            cfg.reference_circuit = cfg.process_circuit;
        }
    } else {
        cfg.prep_circuit = resolve_prep(cfg.prep_spec);
    }

    if (j.contains("eps")) {
        cfg.eps = j.at("eps").get<double>();
    } else {
        const std::string eps_scheme = cfg.scheme == "process" ? cfg.process_scheme : cfg.scheme;
        const std::optional<double> dflt = default_eps(cfg.prep_spec, eps_scheme);
        if (!dflt)
            throw config_error("config: no default eps for '" + cfg.prep_spec + "' with scheme '" +
                               eps_scheme + "'; pass eps explicitly");
        cfg.eps = *dflt;
    }
    if (!(cfg.eps >= 0.0 && cfg.eps < 1.0)) throw config_error("config: eps must lie in [0, 1)");
    return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: invalid JSON: ") + e.what());
    }
    return load_config(j);
}

struct TrialRecord {
    int trial = 0;
    std::string scheme;
    double fidelity = 0.0;
    int settings_used = 0;
    long long cnots_used = 0;
    std::uint64_t seed = 0;
    std::string error;  // empty on success
};

struct Quartiles {
    double q1 = 0.0, median = 0.0, q3 = 0.0;
    double iqr() const { return q3 - q1; }
};

// Median-of-halves quartiles, excluding the middle element from both halves
// when the count is odd; (0.1 0.2 0.3 0.4) gives 0.15 / 0.25 / 0.35.
inline Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("quartiles: empty sample");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    auto median_of = [&](std::size_t begin, std::size_t end) {
        const std::size_t len = end - begin;
        const std::size_t mid = begin + len / 2;
        return len % 2 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    };
    Quartiles q;
    q.median = median_of(0, n);
    if (n == 1) {
        q.q1 = q.q3 = q.median;
    } else {
        q.q1 = median_of(0, n / 2);
        q.q3 = median_of(n - n / 2, n);
    }
    return q;
}

struct TrialStats {
    ExperimentConfig config;
    std::vector<TrialRecord> records;  // ordered by trial index
    Quartiles fidelity_quartiles;
    int failed = 0;
    bool batch_failed = false;  // more than 10% of trials errored

    std::vector<double> fidelities() const {
        std::vector<double> out;
        for (const TrialRecord& r : records)
            if (r.error.empty()) out.push_back(r.fidelity);
        return out;
    }
};

namespace detail {

inline TrialRecord run_single_trial(const ExperimentConfig& cfg, int trial,
                                    const StateVector* truth) {
    TrialRecord rec;
    rec.trial = trial;
    rec.scheme = cfg.scheme;
    rec.seed = cfg.seed + static_cast<std::uint64_t>(trial);
    try {
        MeasurementManager mgr({cfg.exact ? BackendMode::Exact : BackendMode::Sampled,
                                cfg.exact ? 0 : cfg.shots, cfg.noise, rec.seed,
                                cfg.trajectory_block});
        if (cfg.scheme == "process") {
            const Circuit* ref = cfg.reference_circuit ? &*cfg.reference_circuit : nullptr;
            const UnitaryEstimate est =
                run_process_tomography(mgr, cfg.process_circuit, cfg.eps, cfg.process_scheme, ref);
            rec.fidelity = ref ? est.process_fidelity : est.state_fidelity;
            rec.settings_used = est.state_report.settings_used;
            rec.cnots_used = est.state_report.cnots_used;
        } else {
            ReconstructionReport report;
            if (cfg.scheme == "mst")
                report = reconstruct_mst(mgr, cfg.prep_circuit, cfg.eps);
            else
                report = reconstruct_randomized(mgr, cfg.prep_circuit, cfg.eps,
                                                cfg.scheme == "randomized-masked");
            rec.fidelity = fidelity(report.estimate, *truth);
            rec.settings_used = report.settings_used;
            rec.cnots_used = report.cnots_used;
        }
    } catch (const std::exception& e) {
        rec.error = e.what();
        rec.fidelity = std::nan("");
    }
    return rec;
}

}  // namespace detail

// Runs cfg.trials independent reconstructions. Trial t uses seed
// cfg.seed + t and its own measurement cache, so results do not depend on
// the worker count; records come back ordered by trial index.
inline TrialStats run_experiment(const ExperimentConfig& cfg) {
    TrialStats stats;
    stats.config = cfg;
    stats.records.resize(static_cast<std::size_t>(cfg.trials));

    std::optional<StateVector> truth;
    if (cfg.scheme != "process") truth = run_circuit(cfg.prep_circuit);
    const StateVector* truth_ptr = truth ? &*truth : nullptr;

    std::atomic<int> next{0};
    auto drain = [&]() {
        for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
            stats.records[static_cast<std::size_t>(t)] = detail::run_single_trial(cfg, t, truth_ptr);
    };
    if (cfg.workers == 1) {
        drain();
    } else {
        std::vector<std::thread> pool;
        for (int w = 1; w < cfg.workers; ++w) pool.emplace_back(drain);
        drain();
        for (std::thread& th : pool) th.join();
    }

    for (const TrialRecord& r : stats.records) stats.failed += !r.error.empty();
    stats.batch_failed = stats.failed * 10 > cfg.trials;
    const std::vector<double> fids = stats.fidelities();
    if (!fids.empty()) stats.fidelity_quartiles = quartiles(fids);
    return stats;
}

inline void emit_csv(const TrialStats& stats, std::ostream& os) {
    os << "trial,scheme,fidelity,settings_used,cnots_used,seed\n";
    for (const TrialRecord& r : stats.records)
        os << r.trial << ',' << r.scheme << ',' << format_double(r.fidelity) << ','
           << r.settings_used << ',' << r.cnots_used << ',' << r.seed << '\n';
}

inline nlohmann::json stats_json(const TrialStats& stats) {
    nlohmann::json j;
    j["name"] = stats.config.name;
    j["prep"] = stats.config.prep_spec;
    j["scheme"] = stats.config.scheme;
    j["trials"] = stats.config.trials;
    j["shots"] = stats.config.exact ? 0 : stats.config.shots;
    j["mode"] = stats.config.exact ? "exact" : "sampled";
    j["eps"] = stats.config.eps;
    j["seed"] = stats.config.seed;
    j["median_fidelity"] = stats.fidelity_quartiles.median;
    j["q1_fidelity"] = stats.fidelity_quartiles.q1;
    j["q3_fidelity"] = stats.fidelity_quartiles.q3;
    j["iqr_fidelity"] = stats.fidelity_quartiles.iqr();
    j["failed_trials"] = stats.failed;
    j["batch_failed"] = stats.batch_failed;
    nlohmann::json records = nlohmann::json::array();
    for (const TrialRecord& r : stats.records) {
        nlohmann::json rj;
        rj["trial"] = r.trial;
        rj["scheme"] = r.scheme;
        if (std::isnan(r.fidelity))
            rj["fidelity"] = nullptr;
        else
            rj["fidelity"] = r.fidelity;
        rj["settings_used"] = r.settings_used;
        rj["cnots_used"] = r.cnots_used;
        rj["seed"] = r.seed;
        if (!r.error.empty()) rj["error"] = r.error;
        records.push_back(std::move(rj));
    }
    j["records"] = std::move(records);
    return j;
}

inline void emit_json(const TrialStats& stats, std::ostream& os) {
    os << stats_json(stats).dump(2) << '\n';
}

inline void emit_results(const TrialStats& stats, const std::string& format, std::ostream& os) {
    if (format == "csv")
        emit_csv(stats, os);
    else if (format == "json")
        emit_json(stats, os);
    else
        throw config_error("emit_results: format must be \"csv\" or \"json\"");
}

struct SchemeComparison {
    TrialStats a, b;
    double median_diff = 0.0;  // median(a) - median(b)
    double iqr_diff = 0.0;     // iqr(a) - iqr(b)
    double median_diff_ci[2] = {0.0, 0.0};  // bootstrap 95%
    double iqr_diff_ci[2] = {0.0, 0.0};
};

// Percentile-bootstrap confidence interval for a difference of sample
// statistics between two independent fidelity samples.
inline SchemeComparison compare_schemes(const ExperimentConfig& cfg_a,
                                        const ExperimentConfig& cfg_b, int resamples = 2000) {
    SchemeComparison cmp;
    cmp.a = run_experiment(cfg_a);
    cmp.b = run_experiment(cfg_b);
    const std::vector<double> fa = cmp.a.fidelities();
    const std::vector<double> fb = cmp.b.fidelities();
    if (fa.empty() || fb.empty())
        throw std::runtime_error("compare_schemes: a batch produced no successful trials");
    cmp.median_diff = quartiles(fa).median - quartiles(fb).median;
    cmp.iqr_diff = quartiles(fa).iqr() - quartiles(fb).iqr();

    std::mt19937_64 rng = seeded_engine(cfg_a.seed * 1000003ull + cfg_b.seed, "compare-bootstrap");
    auto resample = [&rng](const std::vector<double>& src) {
        std::vector<double> out(src.size());
        for (double& x : out) x = src[uniform_below(rng, src.size())];
        return out;
    };
    std::vector<double> med_diffs(static_cast<std::size_t>(resamples));
    std::vector<double> iqr_diffs(static_cast<std::size_t>(resamples));
    for (int i = 0; i < resamples; ++i) {
        const Quartiles qa = quartiles(resample(fa));
        const Quartiles qb = quartiles(resample(fb));
        med_diffs[static_cast<std::size_t>(i)] = qa.median - qb.median;
        iqr_diffs[static_cast<std::size_t>(i)] = qa.iqr() - qb.iqr();
    }
    auto percentile_ci = [resamples](std::vector<double>& xs, double out[2]) {
        std::sort(xs.begin(), xs.end());
        const auto lo = static_cast<std::size_t>(std::floor(0.025 * (resamples - 1)));
        const auto hi = static_cast<std::size_t>(std::ceil(0.975 * (resamples - 1)));
        out[0] = xs[lo];
        out[1] = xs[hi];
    };
    percentile_ci(med_diffs, cmp.median_diff_ci);
    percentile_ci(iqr_diffs, cmp.iqr_diff_ci);
    return cmp;
}

}  // namespace qtomo
