#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pse/network.hpp"

namespace pse {

enum class MeasurementKind {
    // legacy (SCADA)
    PFlow,
    QFlow,
    IMag,
    PInj,
    QInj,
    VMag,
    // phasor, polar
    VMagPmu,
    VAngPmu,
    IMagPmu,
    IAngPmu,
    // phasor, rectangular
    VRe,
    VIm,
    IRe,
    IIm,
    // DC model
    PFlowDc,
    PInjDc,
    Theta,
};

enum class KindFamily { Legacy, PhasorPolar, PhasorRectangular, Dc };

std::string_view tag(MeasurementKind kind);
MeasurementKind kind_from_tag(std::string_view tag);  // throws UnsupportedKind
KindFamily family(MeasurementKind kind);
bool is_branch_kind(MeasurementKind kind);
bool is_angle_kind(MeasurementKind kind);

/// The other half of a rectangular phasor pair (VRe <-> VIm, IRe <-> IIm).
std::optional<MeasurementKind> rectangular_partner(MeasurementKind kind);

/// Device location in 1-based bus ids. Branch kinds use (bus, to); `circuit`
/// picks one of several parallel branches (1-based, 0 when unambiguous).
struct Location {
    int bus = 0;
    int to = 0;
    int circuit = 0;

    friend bool operator==(const Location&, const Location&) = default;
};

std::string describe(const Location& at);

struct Measurement {
    MeasurementKind kind = MeasurementKind::VMag;
    Location at;
    double value = 0.0;
    double variance = 1.0;
    /// Covariance with the rectangular partner at the same location, when the
    /// pair comes from one polar phasor.
    std::optional<double> covariance;
};

/// Ordered measurement list; the order is the row order of z, h, J and R.
class MeasurementSet {
  public:
    MeasurementSet() = default;
    explicit MeasurementSet(std::vector<Measurement> rows);

    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const Measurement& operator[](std::size_t k) const { return rows_[k]; }
    const std::vector<Measurement>& rows() const noexcept { return rows_; }
    auto begin() const noexcept { return rows_.begin(); }
    auto end() const noexcept { return rows_.end(); }

    void add(Measurement m);
    void append(const MeasurementSet& other);

    /// Check every location against the network. Throws InvalidMeasurement.
    void validate(const NetworkModel& net) const;

  private:
    std::vector<Measurement> rows_;
};

/// Normalises angle values and rejects non-positive variances.
Measurement checked_measurement(Measurement m);

}  // namespace pse
