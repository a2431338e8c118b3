// pse: command-line front end for the state-estimation engine.
//
//   pse check <network.json>
//   pse synthesize <scenario.json> --out <dir> [--network <file>] [--seed N] [--zero-noise]
//   pse estimate --network <file> --measurements <file>... --formulation <tag> --out <dir>
//   pse estimate --manifest <manifest.json> [--out <dir>]
//
// Exit codes: 0 success/converged, 1 input error, 2 not converged, 3 singular gain.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pse/estimator.hpp"
#include "pse/io.hpp"
#include "pse/synthesis.hpp"

namespace fs = std::filesystem;
using namespace pse;

namespace {

enum Exit { kOk = 0, kInputError = 1, kNotConverged = 2, kSingularGain = 3 };

std::string absolute_string(const fs::path& p) { return fs::absolute(p).lexically_normal().string(); }

void emit(bool as_json, const Json& summary, const std::string& line) {
    if (as_json) {
        std::cout << summary.dump() << "\n";
    } else {
        std::cout << line << "\n";
    }
}

int fail(bool as_json, const std::string& command, const Error& e) {
    const int code = e.code() == ErrorCode::SingularGain ? kSingularGain : kInputError;
    if (as_json) {
        Json doc = {{"command", command}, {"status", "error"}, {"error", std::string(to_string(e.code()))},
                    {"message", e.what()}, {"exit_code", code}};
        std::cout << doc.dump() << "\n";
    }
    std::cerr << "pse " << command << ": " << e.what() << "\n";
    return code;
}

// ---------------------------------------------------------------------------

int run_check(const std::string& network_path, bool as_json) {
    try {
        const auto net = load_network(network_path);
        const auto y = assemble_admittance(net);
        Json summary = {{"command", "check"},
                        {"status", "ok"},
                        {"buses", net.bus_count()},
                        {"branches", net.branch_count()},
                        {"nonzeros", y.nonzeros()},
                        {"slack", net.bus(net.slack_index()).id}};
        emit(as_json, summary,
             "pse check: ok N=" + std::to_string(net.bus_count()) + " branches=" +
                 std::to_string(net.branch_count()) + " nonzeros=" + std::to_string(y.nonzeros()));
        return kOk;
    } catch (const Error& e) {
        return fail(as_json, "check", e);
    }
}

// ---------------------------------------------------------------------------

struct SynthesizeArgs {
    std::string scenario;
    std::string network;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    bool zero_noise = false;
    bool json = false;
};

int run_synthesize(const SynthesizeArgs& args) {
    try {
        auto file = load_scenario(args.scenario);
        if (args.seed) file.spec.seed = *args.seed;
        if (args.zero_noise) file.spec.zero_noise = true;
        fs::path network_path;
        if (!args.network.empty()) {
            network_path = args.network;
        } else if (file.network) {
            network_path = *file.network;
        } else {
            throw Error(ErrorCode::InvalidInput, "no network given (use --network or the scenario 'network' key)");
        }
        const auto net = load_network(network_path);
        const auto truth = sample_true_state(net, file.spec);
        const auto set = synthesize(net, file.spec, truth);

        const fs::path out = args.out;
        const MeasurementHeader header{"pse synthesize " + std::string(kToolVersion), std::string(kRngName),
                                       file.spec.seed};
        write_text(out / "measurements.json", measurements_to_json(set, header).dump(2) + "\n");
        write_text(out / "truth.json", truth_to_json(truth, file.spec.seed).dump(2) + "\n");
        Json manifest = {{"tool", "pse"},
                         {"version", std::string(kToolVersion)},
                         {"command", "synthesize"},
                         {"scenario", absolute_string(args.scenario)},
                         {"network", absolute_string(network_path)},
                         {"seed", file.spec.seed},
                         {"rng", std::string(kRngName)},
                         {"zero_noise", file.spec.zero_noise},
                         {"out", absolute_string(out)}};
        write_text(out / "manifest.json", manifest.dump(2) + "\n");

        Json summary = {{"command", "synthesize"},
                        {"status", "ok"},
                        {"measurements", set.size()},
                        {"buses", net.bus_count()},
                        {"seed", file.spec.seed},
                        {"out", absolute_string(out)}};
        emit(args.json, summary,
             "pse synthesize: wrote " + std::to_string(set.size()) + " measurements for N=" +
                 std::to_string(net.bus_count()) + " (seed " + std::to_string(file.spec.seed) + ") to " +
                 out.string());
        return kOk;
    } catch (const Error& e) {
        return fail(args.json, "synthesize", e);
    }
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string manifest;
    std::string network;
    std::vector<std::string> measurements;
    std::string formulation;
    std::optional<int> max_iter;
    std::optional<double> tol;
    bool neglect_cov = false;
    std::string method;
    std::string init;
    std::string out;
    bool json = false;
};

/// Inputs and settings of one estimation run, as echoed into manifest.json.
struct RunManifest {
    fs::path network;
    std::vector<fs::path> measurements;
    Formulation formulation = Formulation::Conventional;
    SolverConfig config;
    std::optional<fs::path> init;
    fs::path out = ".";

    Json to_json() const {
        Json meas = Json::array();
        for (const auto& m : measurements) meas.push_back(absolute_string(m));
        return {{"tool", "pse"},
                {"version", std::string(kToolVersion)},
                {"command", "estimate"},
                {"network", absolute_string(network)},
                {"measurements", meas},
                {"formulation", std::string(tag(formulation))},
                {"config",
                 {{"max_iterations", config.max_iterations},
                  {"step_tolerance", config.step_tolerance},
                  {"method", std::string(tag(config.method))},
                  {"neglect_phasor_covariance", config.neglect_phasor_covariance}}},
                {"init", init ? Json(absolute_string(*init)) : Json(nullptr)},
                {"out", absolute_string(out)}};
    }
};

RunManifest manifest_from_file(const fs::path& path) {
    const Json doc = read_json(path);
    auto need = [&](const char* key) -> const Json& {
        if (!doc.contains(key)) throw Error(ErrorCode::InvalidInput, "manifest: missing '" + std::string(key) + "'");
        return doc[key];
    };
    if (need("command") != "estimate") throw Error(ErrorCode::InvalidInput, "manifest is not an estimate run");
    RunManifest run;
    run.network = need("network").get<std::string>();
    for (const auto& m : need("measurements")) run.measurements.emplace_back(m.get<std::string>());
    run.formulation = formulation_from_tag(need("formulation").get<std::string>());
    const auto& cfg = need("config");
    run.config.max_iterations = cfg.at("max_iterations").get<int>();
    run.config.step_tolerance = cfg.at("step_tolerance").get<double>();
    run.config.method = linear_system_method_from_tag(cfg.at("method").get<std::string>());
    run.config.neglect_phasor_covariance = cfg.at("neglect_phasor_covariance").get<bool>();
    if (doc.contains("init") && !doc["init"].is_null()) run.init = fs::path(doc["init"].get<std::string>());
    run.out = need("out").get<std::string>();
    return run;
}

RunManifest manifest_from_args(const EstimateArgs& args) {
    if (args.network.empty()) throw Error(ErrorCode::InvalidInput, "--network is required");
    if (args.measurements.empty()) throw Error(ErrorCode::InvalidInput, "at least one --measurements file is required");
    if (args.formulation.empty()) throw Error(ErrorCode::InvalidInput, "--formulation is required");
    RunManifest run;
    run.network = args.network;
    for (const auto& m : args.measurements) run.measurements.emplace_back(m);
    run.formulation = formulation_from_tag(args.formulation);
    if (args.max_iter) run.config.max_iterations = *args.max_iter;
    if (args.tol) run.config.step_tolerance = *args.tol;
    if (!args.method.empty()) run.config.method = linear_system_method_from_tag(args.method);
    run.config.neglect_phasor_covariance = args.neglect_cov;
    if (!args.init.empty()) run.init = fs::path(args.init);
    run.out = args.out.empty() ? fs::path(".") : fs::path(args.out);
    return run;
}

int run_estimate(const EstimateArgs& args) {
    try {
        RunManifest run;
        if (!args.manifest.empty()) {
            if (!args.network.empty() || !args.measurements.empty() || !args.formulation.empty()) {
                throw Error(ErrorCode::InvalidInput, "--manifest cannot be combined with input flags");
            }
            run = manifest_from_file(args.manifest);
            if (!args.out.empty()) run.out = args.out;
        } else {
            run = manifest_from_args(args);
        }
        run.config.validate();

        const auto net = load_network(run.network);
        MeasurementSet set;
        for (const auto& m : run.measurements) set.append(load_measurements(m));
        const auto problem = assemble_problem(net, set, run.formulation);
        const StateVector x0 = run.init ? parse_state(read_json(*run.init), net, problem.coordinates())
                                        : problem.flat_start();

        write_text(run.out / "manifest.json", run.to_json().dump(2) + "\n");
        const auto result = estimate(problem, x0, run.config);
        write_text(run.out / "result.json", result_to_json(problem, result).dump(2) + "\n");

        double max_abs_residual = 0.0;
        for (Eigen::Index k = 0; k < result.residuals.size(); ++k) {
            max_abs_residual = std::max(max_abs_residual, std::abs(result.residuals[k]));
        }
        const double obj = result.objective_trace.empty() ? 0.0 : result.objective_trace.back();
        for (const auto& w : result.warnings) std::cerr << "pse estimate: warning: " << w << "\n";

        const int code = result.converged ? kOk : kNotConverged;
        Json summary = {{"command", "estimate"},
                        {"status", result.converged ? "converged" : "not_converged"},
                        {"formulation", std::string(tag(run.formulation))},
                        {"iterations", result.iterations},
                        {"objective", obj},
                        {"max_abs_residual", max_abs_residual},
                        {"rows", problem.row_count()},
                        {"unknowns", problem.unknown_count()},
                        {"out", absolute_string(run.out)},
                        {"exit_code", code}};
        char line[256];
        std::snprintf(line, sizeof line, "pse estimate: %s %s iterations=%d objective=%.6g max_residual=%.6g",
                      std::string(tag(run.formulation)).c_str(), result.converged ? "converged" : "NOT CONVERGED",
                      result.iterations, obj, max_abs_residual);
        emit(args.json, rounded(summary), line);
        return code;
    } catch (const Error& e) {
        return fail(args.json, "estimate", e);
    } catch (const nlohmann::json::exception& e) {
        return fail(args.json, "estimate", Error(ErrorCode::InvalidInput, std::string("manifest: ") + e.what()));
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pse: power-system state estimation"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string check_path;
    bool check_json = false;
    auto* check = app.add_subcommand("check", "Validate a network file and assemble its admittance matrix");
    check->add_option("network", check_path, "Network JSON file")->required();
    check->add_flag("--json", check_json, "Machine-readable summary on stdout");

    SynthesizeArgs syn;
    auto* synth = app.add_subcommand("synthesize", "Sample a true state and synthetic measurements");
    synth->add_option("scenario", syn.scenario, "Scenario JSON file")->required();
    synth->add_option("--network", syn.network, "Network JSON file (overrides the scenario's)");
    synth->add_option("--seed", syn.seed, "RNG seed (overrides the scenario's)");
    synth->add_option("--out", syn.out, "Output directory");
    synth->add_flag("--zero-noise", syn.zero_noise, "Write exact values h(x_true); variances still recorded");
    synth->add_flag("--json", syn.json, "Machine-readable summary on stdout");

    EstimateArgs est;
    auto* estimate_cmd = app.add_subcommand("estimate", "Run weighted least-squares state estimation");
    estimate_cmd->add_option("--manifest", est.manifest, "Rerun from a manifest echo");
    estimate_cmd->add_option("--network", est.network, "Network JSON file");
    estimate_cmd->add_option("--measurements", est.measurements, "Measurement JSON file (repeatable)")
        ->take_all()
        ->allow_extra_args(false);
    estimate_cmd->add_option("--formulation", est.formulation,
                             "conventional | simultaneous-polar | simultaneous-rect | linear-rect | dc");
    estimate_cmd->add_option("--max-iter", est.max_iter, "Gauss-Newton iteration budget (default 50)");
    estimate_cmd->add_option("--tol", est.tol, "Step tolerance on max |dx| (default 1e-8)");
    estimate_cmd->add_flag("--neglect-phasor-cov", est.neglect_cov, "Treat rectangular phasor parts as uncorrelated");
    estimate_cmd->add_option("--method", est.method, "Linear solver: ldlt (default) or qr");
    estimate_cmd->add_option("--init", est.init, "Warm-start state file");
    estimate_cmd->add_option("--out", est.out, "Output directory");
    estimate_cmd->add_flag("--json", est.json, "Machine-readable summary on stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    if (*check) return run_check(check_path, check_json);
    if (*synth) return run_synthesize(syn);
    return run_estimate(est);
}
