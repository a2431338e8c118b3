#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "pse/measurement.hpp"
#include "pse/network.hpp"
#include "pse/state.hpp"

namespace pse {

/// Name of the pseudo-random generator written into every synthesized file.
inline constexpr std::string_view kRngName = "mt19937_64";

struct Placement {
    MeasurementKind kind = MeasurementKind::VMag;
    Location at;
};

/// Sampling ranges, placement plan and per-kind noise for one scenario.
/// Rectangular phasor kinds are perturbed in polar form and take their
/// noise from the matching polar kinds (V_mag_pmu/V_ang_pmu for V_re/V_im,
/// I_mag_pmu/I_ang_pmu for I_re/I_im).
struct ScenarioSpec {
    double v_min = 1.0;
    double v_max = 1.0;
    double theta_min = 0.0;
    double theta_max = 0.0;
    std::vector<Placement> placements;
    std::map<MeasurementKind, double> noise_stddev;
    std::uint64_t seed = 0;
    /// Record variances from the stddevs but draw no noise.
    bool zero_noise = false;

    /// Throws InvalidInput naming the first bad range, placement or noise entry.
    void validate(const NetworkModel& net) const;
};

/// Polar truth with V and theta drawn uniformly; the slack angle stays at the
/// network value. Deterministic in the seed.
StateVector sample_true_state(const NetworkModel& net, const ScenarioSpec& spec);

/// z = h(x_true) + e for every placement, in placement order, with
/// variance stddev^2. Rectangular pairs at one location share a single polar
/// draw and carry their cross covariance when both parts are placed.
MeasurementSet synthesize(const NetworkModel& net, const ScenarioSpec& spec, const StateVector& x_true);

/// Noise draws use a stream separate from state sampling so changing the
/// placement plan leaves the sampled truth unchanged.
MeasurementSet synthesize(const NetworkModel& net, const ScenarioSpec& spec, const StateVector& x_true,
                          std::uint64_t stream);

}  // namespace pse
