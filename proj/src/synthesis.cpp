#include "pse/synthesis.hpp"

#include <cmath>
#include <random>
#include <tuple>

#include "pse/functions.hpp"

namespace pse {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

double draw_uniform(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool is_voltage_phasor(MeasurementKind kind) {
    return kind == MeasurementKind::VRe || kind == MeasurementKind::VIm;
}

/// Polar kinds whose stddevs drive a rectangular kind's noise.
std::pair<MeasurementKind, MeasurementKind> polar_sources(MeasurementKind kind) {
    if (is_voltage_phasor(kind)) return {MeasurementKind::VMagPmu, MeasurementKind::VAngPmu};
    return {MeasurementKind::IMagPmu, MeasurementKind::IAngPmu};
}

std::string placement_label(const Placement& p, std::size_t k) {
    return "placement #" + std::to_string(k + 1) + " (" + std::string(tag(p.kind)) + " at " + describe(p.at) + ")";
}

double stddev_of(const ScenarioSpec& spec, MeasurementKind kind, const std::string& where) {
    auto it = spec.noise_stddev.find(kind);
    if (it == spec.noise_stddev.end()) {
        throw Error(ErrorCode::InvalidInput, where + ": no noise stddev given for " + std::string(tag(kind)));
    }
    return it->second;
}

}  // namespace

void ScenarioSpec::validate(const NetworkModel& net) const {
    if (!(v_min > 0.0) || !(v_max >= v_min) || !std::isfinite(v_max)) {
        throw Error(ErrorCode::InvalidInput, "voltage range must satisfy 0 < v_min <= v_max");
    }
    if (!(theta_max >= theta_min) || !std::isfinite(theta_min) || !std::isfinite(theta_max)) {
        throw Error(ErrorCode::InvalidInput, "angle range must satisfy theta_min <= theta_max");
    }
    for (const auto& [kind, sd] : noise_stddev) {
        if (!(sd > 0.0) || !std::isfinite(sd)) {
            throw Error(ErrorCode::InvalidInput, "noise stddev for " + std::string(tag(kind)) +
                                                     " must be positive (use zero_noise for exact data)");
        }
    }
    if (placements.empty()) throw Error(ErrorCode::InvalidInput, "placement plan is empty");
    for (std::size_t k = 0; k < placements.size(); ++k) {
        const auto& p = placements[k];
        const std::string where = placement_label(p, k);
        if (!net.has_bus(p.at.bus)) {
            throw Error(ErrorCode::InvalidInput, where + ": bus " + std::to_string(p.at.bus) + " does not exist");
        }
        if (is_branch_kind(p.kind)) {
            try {
                net.find_end(p.at.bus, p.at.to, p.at.circuit);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidInput, where + ": " + e.what());
            }
        } else if (p.at.to != 0) {
            throw Error(ErrorCode::InvalidInput, where + ": bus measurement takes a single bus id");
        }
        if (family(p.kind) == KindFamily::PhasorRectangular) {
            const auto [mag, ang] = polar_sources(p.kind);
            stddev_of(*this, mag, where);
            stddev_of(*this, ang, where);
        } else {
            stddev_of(*this, p.kind, where);
        }
    }
}

StateVector sample_true_state(const NetworkModel& net, const ScenarioSpec& spec) {
    spec.validate(net);
    auto rng = make_engine(spec.seed, 0);
    const std::size_t n = net.bus_count();
    std::vector<double> values(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        values[i] = draw_uniform(rng, spec.theta_min, spec.theta_max);
        values[n + i] = draw_uniform(rng, spec.v_min, spec.v_max);
    }
    return StateVector(Coordinates::Polar, std::move(values), net.slack_index(), net.slack_angle());
}

MeasurementSet synthesize(const NetworkModel& net, const ScenarioSpec& spec, const StateVector& x_true) {
    return synthesize(net, spec, x_true, 1);
}

MeasurementSet synthesize(const NetworkModel& net, const ScenarioSpec& spec, const StateVector& x_true,
                          std::uint64_t stream) {
    spec.validate(net);
    if (x_true.coordinates() != Coordinates::Polar || x_true.bus_count() != net.bus_count()) {
        throw Error(ErrorCode::DimensionMismatch, "true state must be polar over the network buses");
    }
    auto rng = make_engine(spec.seed, stream);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto y = assemble_admittance(net);
    const auto voltages = x_true.voltages();

    // Which rectangular parts are placed at each phasor location.
    using Key = std::tuple<bool, int, int, int>;  // voltage?, bus, to, circuit
    auto key_of = [](const Placement& p) { return Key{is_voltage_phasor(p.kind), p.at.bus, p.at.to, p.at.circuit}; };
    struct Phasor {
        bool has_re = false;
        bool has_im = false;
        bool drawn = false;
        double re = 0.0, im = 0.0;
        RectangularVariance var;
    };
    std::map<Key, Phasor> phasors;
    for (const auto& p : spec.placements) {
        if (family(p.kind) != KindFamily::PhasorRectangular) continue;
        auto& ph = phasors[key_of(p)];
        const bool real = p.kind == MeasurementKind::VRe || p.kind == MeasurementKind::IRe;
        (real ? ph.has_re : ph.has_im) = true;
    }

    MeasurementSet set;
    for (std::size_t k = 0; k < spec.placements.size(); ++k) {
        const auto& p = spec.placements[k];
        Measurement m;
        m.kind = p.kind;
        m.at = p.at;

        if (family(p.kind) != KindFamily::PhasorRectangular) {
            const double sd = spec.noise_stddev.at(p.kind);
            const double exact = evaluate_measurement(net, y, m, x_true).value();
            m.value = spec.zero_noise ? exact : exact + sd * gauss(rng);
            m.variance = sd * sd;
            set.add(m);
            continue;
        }

        auto& ph = phasors[key_of(p)];
        const bool real = p.kind == MeasurementKind::VRe || p.kind == MeasurementKind::IRe;
        if (!ph.drawn) {
            const auto [mag_kind, ang_kind] = polar_sources(p.kind);
            const double sd_mag = spec.noise_stddev.at(mag_kind);
            const double sd_ang = spec.noise_stddev.at(ang_kind);
            const Complex exact = is_voltage_phasor(p.kind)
                                      ? voltages[net.index_of(p.at.bus)]
                                      : terminal_current(net, net.find_end(p.at.bus, p.at.to, p.at.circuit),
                                                         voltages);
            double mag = std::abs(exact);
            double ang = std::arg(exact);
            if (spec.zero_noise) {
                Measurement re = m, im = m;
                re.kind = is_voltage_phasor(p.kind) ? MeasurementKind::VRe : MeasurementKind::IRe;
                im.kind = is_voltage_phasor(p.kind) ? MeasurementKind::VIm : MeasurementKind::IIm;
                ph.re = evaluate_measurement(net, y, re, x_true).value();
                ph.im = evaluate_measurement(net, y, im, x_true).value();
            } else {
                mag += sd_mag * gauss(rng);
                ang += sd_ang * gauss(rng);
                ph.re = mag * std::cos(ang);
                ph.im = mag * std::sin(ang);
            }
            ph.var = polar_to_rect_variance(mag, sd_mag * sd_mag, ang, sd_ang * sd_ang);
            ph.drawn = true;
        }
        m.value = real ? ph.re : ph.im;
        m.variance = real ? ph.var.var_re : ph.var.var_im;
        if (ph.has_re && ph.has_im) m.covariance = ph.var.cov_re_im;
        set.add(m);
    }
    return set;
}

}  // namespace pse
