#include "pse/measurement.hpp"

#include <array>
#include <cmath>
#include <utility>

#include "pse/state.hpp"

namespace pse {

namespace {

constexpr std::array<std::pair<MeasurementKind, std::string_view>, 17> kTags{{
    {MeasurementKind::PFlow, "P_flow"},
    {MeasurementKind::QFlow, "Q_flow"},
    {MeasurementKind::IMag, "I_mag"},
    {MeasurementKind::PInj, "P_inj"},
    {MeasurementKind::QInj, "Q_inj"},
    {MeasurementKind::VMag, "V_mag"},
    {MeasurementKind::VMagPmu, "V_mag_pmu"},
    {MeasurementKind::VAngPmu, "V_ang_pmu"},
    {MeasurementKind::IMagPmu, "I_mag_pmu"},
    {MeasurementKind::IAngPmu, "I_ang_pmu"},
    {MeasurementKind::VRe, "V_re"},
    {MeasurementKind::VIm, "V_im"},
    {MeasurementKind::IRe, "I_re"},
    {MeasurementKind::IIm, "I_im"},
    {MeasurementKind::PFlowDc, "P_flow_dc"},
    {MeasurementKind::PInjDc, "P_inj_dc"},
    {MeasurementKind::Theta, "Theta"},
}};

}  // namespace

std::string_view tag(MeasurementKind kind) {
    for (const auto& [k, name] : kTags) {
        if (k == kind) return name;
    }
    return "?";
}

MeasurementKind kind_from_tag(std::string_view name) {
    for (const auto& [k, t] : kTags) {
        if (t == name) return k;
    }
    throw Error(ErrorCode::UnsupportedKind, "unknown measurement kind '" + std::string(name) + "'");
}

KindFamily family(MeasurementKind kind) {
    switch (kind) {
        case MeasurementKind::PFlow:
        case MeasurementKind::QFlow:
        case MeasurementKind::IMag:
        case MeasurementKind::PInj:
        case MeasurementKind::QInj:
        case MeasurementKind::VMag: return KindFamily::Legacy;
        case MeasurementKind::VMagPmu:
        case MeasurementKind::VAngPmu:
        case MeasurementKind::IMagPmu:
        case MeasurementKind::IAngPmu: return KindFamily::PhasorPolar;
        case MeasurementKind::VRe:
        case MeasurementKind::VIm:
        case MeasurementKind::IRe:
        case MeasurementKind::IIm: return KindFamily::PhasorRectangular;
        case MeasurementKind::PFlowDc:
        case MeasurementKind::PInjDc:
        case MeasurementKind::Theta: return KindFamily::Dc;
    }
    return KindFamily::Legacy;
}

bool is_branch_kind(MeasurementKind kind) {
    switch (kind) {
        case MeasurementKind::PFlow:
        case MeasurementKind::QFlow:
        case MeasurementKind::IMag:
        case MeasurementKind::IMagPmu:
        case MeasurementKind::IAngPmu:
        case MeasurementKind::IRe:
        case MeasurementKind::IIm:
        case MeasurementKind::PFlowDc: return true;
        default: return false;
    }
}

bool is_angle_kind(MeasurementKind kind) {
    return kind == MeasurementKind::VAngPmu || kind == MeasurementKind::IAngPmu || kind == MeasurementKind::Theta;
}

std::optional<MeasurementKind> rectangular_partner(MeasurementKind kind) {
    switch (kind) {
        case MeasurementKind::VRe: return MeasurementKind::VIm;
        case MeasurementKind::VIm: return MeasurementKind::VRe;
        case MeasurementKind::IRe: return MeasurementKind::IIm;
        case MeasurementKind::IIm: return MeasurementKind::IRe;
        default: return std::nullopt;
    }
}

std::string describe(const Location& at) {
    std::string s = "[" + std::to_string(at.bus);
    if (at.to != 0) s += "," + std::to_string(at.to);
    if (at.circuit != 0) s += "," + std::to_string(at.circuit);
    return s + "]";
}

Measurement checked_measurement(Measurement m) {
    if (!(m.variance > 0.0) || !std::isfinite(m.variance)) {
        throw Error(ErrorCode::NonPositiveVariance, std::string(tag(m.kind)) + " at " + describe(m.at) +
                                                        " has non-positive variance");
    }
    if (!std::isfinite(m.value)) {
        throw Error(ErrorCode::InvalidMeasurement,
                    std::string(tag(m.kind)) + " at " + describe(m.at) + " has a non-finite value");
    }
    if (is_angle_kind(m.kind)) m.value = wrap_angle(m.value);
    if (m.covariance && !rectangular_partner(m.kind)) {
        throw Error(ErrorCode::InvalidMeasurement, std::string(tag(m.kind)) + " at " + describe(m.at) +
                                                       " cannot carry a covariance (not a rectangular phasor part)");
    }
    return m;
}

MeasurementSet::MeasurementSet(std::vector<Measurement> rows) {
    rows_.reserve(rows.size());
    for (auto& m : rows) add(std::move(m));
}

void MeasurementSet::add(Measurement m) { rows_.push_back(checked_measurement(std::move(m))); }

void MeasurementSet::append(const MeasurementSet& other) {
    rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
}

void MeasurementSet::validate(const NetworkModel& net) const {
    for (std::size_t k = 0; k < rows_.size(); ++k) {
        const auto& m = rows_[k];
        const std::string where =
            "measurement #" + std::to_string(k + 1) + " (" + std::string(tag(m.kind)) + " at " + describe(m.at) + ")";
        if (!net.has_bus(m.at.bus)) {
            throw Error(ErrorCode::InvalidMeasurement, where + ": bus " + std::to_string(m.at.bus) + " does not exist");
        }
        if (is_branch_kind(m.kind)) {
            try {
                net.find_end(m.at.bus, m.at.to, m.at.circuit);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidMeasurement, where + ": " + e.what());
            }
        } else if (m.at.to != 0) {
            throw Error(ErrorCode::InvalidMeasurement, where + ": bus measurement takes a single bus id");
        }
    }
}

}  // namespace pse
