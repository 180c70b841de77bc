// tomo: command-line front end for the tomography toolkit.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 experiment batch failure (too many trials errored).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "qtomo/qtomo.hpp"

namespace {

using nlohmann::json;

qtomo::Circuit resolve_circuit_arg(const std::string& spec, bool as_process) {
    if (as_process && spec == "proc-w1") return qtomo::w1_process();
    return qtomo::resolve_prep(spec);
}

qtomo::NoiseModel parse_noise_arg(const std::string& spec) {
    if (spec.empty() || spec == "none") return {};
    if (spec == "default") return qtomo::NoiseModel::default_noisy();
    json j;
    try {
        if (!spec.empty() && spec.front() == '{') {
            j = json::parse(spec);
        } else {
            std::ifstream in(spec);
            if (!in) throw qtomo::config_error("cannot open noise file: " + spec);
            in >> j;
        }
    } catch (const json::exception& e) {
        throw qtomo::config_error(std::string("noise: invalid JSON: ") + e.what());
    }
    return qtomo::noise_from_json(j);
}

json complex_json(const qtomo::cplx& z) { return json::array({z.real(), z.imag()}); }

json state_json(const qtomo::StateVector& s) {
    json out = json::array();
    for (const qtomo::cplx& a : s.amps) out.push_back(complex_json(a));
    return out;
}

json matrix_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json report_json(const qtomo::ReconstructionReport& report) {
    json j;
    j["scheme"] = report.scheme;
    j["estimate"] = state_json(report.estimate);
    j["settings_used"] = report.settings_used;
    j["mask_settings"] = report.mask_settings;
    j["cnots_used"] = report.cnots_used;
    if (!report.randomizer.empty()) j["randomizer"] = report.randomizer;
    j["fell_back_to_mst"] = report.fell_back_to_mst;
    json trace = json::array();
    for (const qtomo::EdgeTrace& e : report.edge_trace)
        trace.push_back({{"determined", e.index_d},
                         {"inferred", e.index_k},
                         {"weight", e.weight},
                         {"value", complex_json(e.value)}});
    j["edge_trace"] = std::move(trace);
    return j;
}

void write_output(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw qtomo::config_error("cannot open output file: " + path);
    out << j.dump(2) << '\n';
}

void dump_cache_if_asked(const qtomo::MeasurementManager& mgr, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw qtomo::config_error("cannot open cache file: " + path);
    mgr.dump_cache(out);
}

qtomo::MeasurementManager::Config backend_config(long shots, const qtomo::NoiseModel& noise,
                                                 std::uint64_t seed, long block) {
    qtomo::MeasurementManager::Config cfg;
    cfg.mode = shots == 0 ? qtomo::BackendMode::Exact : qtomo::BackendMode::Sampled;
    cfg.shots = shots;
    cfg.noise = noise;
    cfg.seed = seed;
    cfg.trajectory_block = block;
    return cfg;
}

double resolve_eps(double eps, const std::string& spec, const std::string& scheme) {
    if (!std::isnan(eps)) return eps;
    const std::optional<double> dflt = qtomo::default_eps(spec, scheme);
    if (!dflt)
        throw qtomo::config_error("no default eps for '" + spec + "' with scheme '" + scheme +
                                  "'; pass --eps");
    return *dflt;
}

int cmd_run(const std::string& config_path) {
    const qtomo::ExperimentConfig cfg = qtomo::load_config_file(config_path);
    const qtomo::TrialStats stats = qtomo::run_experiment(cfg);
    if (!cfg.out_csv.empty()) {
        std::ofstream out(cfg.out_csv);
        if (!out) throw qtomo::config_error("cannot open output file: " + cfg.out_csv);
        qtomo::emit_csv(stats, out);
    }
    if (!cfg.out_json.empty()) {
        std::ofstream out(cfg.out_json);
        if (!out) throw qtomo::config_error("cannot open output file: " + cfg.out_json);
        qtomo::emit_json(stats, out);
    }
    const qtomo::Quartiles& q = stats.fidelity_quartiles;
    std::cout << cfg.name << " scheme=" << cfg.scheme << " trials=" << cfg.trials
              << " median=" << qtomo::format_double(q.median) << " q1="
              << qtomo::format_double(q.q1) << " q3=" << qtomo::format_double(q.q3)
              << " failed=" << stats.failed << '\n';
    return stats.batch_failed ? 3 : 0;
}

int cmd_reconstruct(const std::string& prep_spec, const std::string& scheme, double eps,
                    long shots, const std::string& noise_spec, std::uint64_t seed,
                    const std::string& out_path, const std::string& cache_path) {
    const qtomo::Circuit prep = resolve_circuit_arg(prep_spec, false);
    eps = resolve_eps(eps, prep_spec, scheme);
    qtomo::MeasurementManager mgr(backend_config(shots, parse_noise_arg(noise_spec), seed, 64));

    qtomo::ReconstructionReport report;
    if (scheme == "mst")
        report = qtomo::reconstruct_mst(mgr, prep, eps);
    else if (scheme == "randomized")
        report = qtomo::reconstruct_randomized(mgr, prep, eps, false);
    else if (scheme == "randomized-masked")
        report = qtomo::reconstruct_randomized(mgr, prep, eps, true);
    else
        throw qtomo::config_error("unknown scheme '" + scheme + "'");

    json j = report_json(report);
    j["prep"] = prep_spec;
    j["eps"] = eps;
    j["shots"] = shots;
    j["seed"] = seed;
    j["fidelity"] = qtomo::fidelity(report.estimate, qtomo::run_circuit(prep).normalized());
    write_output(j, out_path);
    dump_cache_if_asked(mgr, cache_path);
    return 0;
}

int cmd_process(const std::string& process_spec, const std::string& reference_spec,
                const std::string& scheme, double eps, long shots, const std::string& noise_spec,
                std::uint64_t seed, const std::string& out_path, const std::string& cache_path) {
    const qtomo::Circuit process = resolve_circuit_arg(process_spec, true);
    std::optional<qtomo::Circuit> reference;
    if (reference_spec != "none") reference = resolve_circuit_arg(reference_spec, true);
    eps = resolve_eps(eps, process_spec == "proc-w1" ? "proc-w1" : process_spec, scheme);
    qtomo::MeasurementManager mgr(backend_config(shots, parse_noise_arg(noise_spec), seed, 64));

    const qtomo::UnitaryEstimate est = qtomo::run_process_tomography(
        mgr, process, eps, scheme, reference ? &*reference : nullptr);

    json j;
    j["process"] = process_spec;
    j["scheme"] = scheme;
    j["eps"] = eps;
    j["shots"] = shots;
    j["seed"] = seed;
    j["matrix"] = matrix_json(est.matrix);
    j["raw_matrix"] = matrix_json(est.raw_matrix);
    j["state_fidelity"] = est.state_fidelity;
    if (reference)
        j["process_fidelity"] = est.process_fidelity;
    else
        j["process_fidelity"] = nullptr;
    j["state_report"] = report_json(est.state_report);
    write_output(j, out_path);
    dump_cache_if_asked(mgr, cache_path);
    return 0;
}

int cmd_mst_report(const std::vector<std::uint64_t>& support, int n, const std::string& out_path) {
    const qtomo::HammingGraph graph(n, support);
    const qtomo::SpanningTree tree = qtomo::build_mst(graph);
    json j;
    json edges = json::array();
    for (const qtomo::TreeEdge& e : tree.edges) edges.push_back({e.u, e.v, e.weight});
    j["edges"] = std::move(edges);
    json hist = json::object();
    for (const auto& [w, count] : tree.weight_hist) hist[std::to_string(w)] = count;
    j["weight_hist"] = std::move(hist);
    j["cnot_bound"] = qtomo::cnot_upper_bound(tree);
    j["total_weight"] = tree.total_weight();
    write_output(j, out_path);
    return 0;
}

int cmd_verify_theorems(int n) {
    bool ok = true;
    const bool a_holds = qtomo::theorem_a_check(n);
    std::cout << "dense-support MST weight check (n=" << n << "): "
              << (a_holds ? "PASS" : "FAIL") << '\n';
    ok = ok && a_holds;
    for (int k = 3; k <= n; ++k) {
        qtomo::AdversarialSet set;
        try {
            set = qtomo::adversarial_vertex_set(n, k);
        } catch (const std::invalid_argument&) {
            continue;  // no q with n = kq + r, r < q
        }
        const auto tree = qtomo::build_mst(qtomo::HammingGraph(n, set.vertices));
        const bool b_holds = tree.total_weight() == set.expected_mst_weight;
        std::cout << "adversarial set weight check (n=" << n << ", k=" << k
                  << "): expected " << set.expected_mst_weight << ", got " << tree.total_weight()
                  << " -> " << (b_holds ? "PASS" : "FAIL") << '\n';
        ok = ok && b_holds;
    }
    return ok ? 0 : 1;
}

int cmd_compare(const std::string& config_a, const std::string& config_b,
                const std::string& out_path) {
    const qtomo::ExperimentConfig cfg_a = qtomo::load_config_file(config_a);
    const qtomo::ExperimentConfig cfg_b = qtomo::load_config_file(config_b);
    const qtomo::SchemeComparison cmp = qtomo::compare_schemes(cfg_a, cfg_b);
    auto summary = [](const qtomo::TrialStats& stats) {
        json j;
        j["name"] = stats.config.name;
        j["scheme"] = stats.config.scheme;
        j["median_fidelity"] = stats.fidelity_quartiles.median;
        j["q1_fidelity"] = stats.fidelity_quartiles.q1;
        j["q3_fidelity"] = stats.fidelity_quartiles.q3;
        j["iqr_fidelity"] = stats.fidelity_quartiles.iqr();
        j["failed_trials"] = stats.failed;
        return j;
    };
    json j;
    j["a"] = summary(cmp.a);
    j["b"] = summary(cmp.b);
    j["median_diff"] = cmp.median_diff;
    j["median_diff_ci95"] = {cmp.median_diff_ci[0], cmp.median_diff_ci[1]};
    j["iqr_diff"] = cmp.iqr_diff;
    j["iqr_diff_ci95"] = {cmp.iqr_diff_ci[0], cmp.iqr_diff_ci[1]};
    write_output(j, out_path);
    return (cmp.a.batch_failed || cmp.b.batch_failed) ? 3 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pure-state tomography toolkit with an embedded shot-based simulator"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "Run a batch experiment from a JSON config");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();

    std::string prep_spec, scheme = "mst", noise_spec = "none", out_path, cache_path;
    double eps = std::nan("");
    long shots = 0;
    std::uint64_t seed = 1;
    CLI::App* rec = app.add_subcommand("reconstruct", "Reconstruct a state from a prep circuit");
    rec->add_option("--prep", prep_spec, "circuit file or preset id")->required();
    rec->add_option("--scheme", scheme, "mst | randomized | randomized-masked");
    rec->add_option("--eps", eps, "support threshold (defaults per preset)");
    rec->add_option("--shots", shots, "shots per setting; 0 = exact mode");
    rec->add_option("--noise", noise_spec, "none | default | JSON | file");
    rec->add_option("--seed", seed, "master seed");
    rec->add_option("--out", out_path, "output JSON path ('-' = stdout)");
    rec->add_option("--cache-out", cache_path, "dump measurement cache (NDJSON)");

    std::string process_spec, reference_spec = "none";
    CLI::App* proc = app.add_subcommand("process", "Tomography of a unitary process circuit");
    proc->add_option("--process", process_spec, "circuit file or 'proc-w1'")->required();
    proc->add_option("--reference", reference_spec, "reference circuit or 'none'");
    proc->add_option("--scheme", scheme, "state scheme for the stacked state");
    proc->add_option("--eps", eps, "support threshold");
    proc->add_option("--shots", shots, "shots per setting; 0 = exact mode");
    proc->add_option("--noise", noise_spec, "none | default | JSON | file");
    proc->add_option("--seed", seed, "master seed");
    proc->add_option("--out", out_path, "output JSON path ('-' = stdout)");
    proc->add_option("--cache-out", cache_path, "dump measurement cache (NDJSON)");

    std::vector<std::uint64_t> support;
    int n_bits = 0;
    CLI::App* mst = app.add_subcommand("mst-report", "MST, weight histogram, and CNOT bound");
    mst->add_option("--support", support, "basis indices")->required()->delimiter(',');
    mst->add_option("--n", n_bits, "qubit count")->required();

    int theorem_n = 0;
    CLI::App* verify = app.add_subcommand("verify-theorems", "Exhaustive MST weight checks");
    verify->add_option("--n", theorem_n, "qubit count (2, 3, or 4)")->required();

    std::string config_a, config_b;
    CLI::App* compare = app.add_subcommand("compare", "Run two configs and bootstrap-compare");
    compare->add_option("--config-a", config_a, "first experiment config")->required();
    compare->add_option("--config-b", config_b, "second experiment config")->required();
    compare->add_option("--out", out_path, "output JSON path ('-' = stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (rec->parsed())
            return cmd_reconstruct(prep_spec, scheme, eps, shots, noise_spec, seed, out_path,
                                   cache_path);
        if (proc->parsed())
            return cmd_process(process_spec, reference_spec, scheme, eps, shots, noise_spec, seed,
                               out_path, cache_path);
        if (mst->parsed()) return cmd_mst_report(support, n_bits, out_path);
        if (verify->parsed()) return cmd_verify_theorems(theorem_n);
        if (compare->parsed()) return cmd_compare(config_a, config_b, out_path);
    } catch (const qtomo::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
