#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "pse/estimator.hpp"
#include "pse/measurement.hpp"
#include "pse/network.hpp"
#include "pse/problem.hpp"
#include "pse/state.hpp"
#include "pse/synthesis.hpp"

namespace pse {

inline constexpr std::string_view kToolVersion = "1.0.0";

using Json = nlohmann::ordered_json;

/// Read and parse a JSON file. Throws InvalidInput on I/O or syntax errors.
Json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Round every floating-point number to 12 significant digits.
Json rounded(const Json& doc);

// Network: {base_mva, slack_angle?, slack_imag?, buses: [...], branches: [...]}
NetworkModel parse_network(const Json& doc);
NetworkModel load_network(const std::filesystem::path& path);
Json network_to_json(const NetworkModel& net);

// Measurements: {header?, measurements: [{kind, at, value, variance, covariance?}]}
struct MeasurementHeader {
    std::string generator;
    std::string rng;
    std::uint64_t seed = 0;
};
MeasurementSet parse_measurements(const Json& doc);
MeasurementSet load_measurements(const std::filesystem::path& path);
Json measurements_to_json(const MeasurementSet& set, const std::optional<MeasurementHeader>& header = {});

// Scenario file: {network?, v_range, theta_range, seed, zero_noise?, noise, placements}
struct ScenarioFile {
    ScenarioSpec spec;
    std::optional<std::filesystem::path> network;  // resolved against the scenario file's directory
};
ScenarioFile parse_scenario(const Json& doc, const std::filesystem::path& base_dir = {});
ScenarioFile load_scenario(const std::filesystem::path& path);

/// Per-bus {id, V, theta, re, im} list.
Json state_to_json(const StateVector& x);
Json truth_to_json(const StateVector& x_true, std::uint64_t seed);

/// Warm start from a {state: [...]} document (truth and result files both
/// qualify), converted to the requested coordinates. Slack entry is reset to
/// the network value.
StateVector parse_state(const Json& doc, const NetworkModel& net, Coordinates coords);

Json result_to_json(const EstimationProblem& problem, const EstimationResult& result);

}  // namespace pse
