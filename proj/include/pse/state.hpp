#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "pse/errors.hpp"

namespace pse {

enum class Coordinates { Polar, Rectangular };

/// Bus voltages as 2N reals.
///   Polar:       (theta_1..theta_N, V_1..V_N)
///   Rectangular: (Re V_1..Re V_N, Im V_1..Im V_N)
/// One entry belongs to the slack bus and is held at `slack_value`: its angle
/// in polar form, its imaginary part in rectangular form.
class StateVector {
  public:
    StateVector() = default;
    StateVector(Coordinates coords, std::vector<double> values, std::size_t slack_bus, double slack_value);

    static StateVector flat(Coordinates coords, std::size_t bus_count, std::size_t slack_bus,
                            double slack_value = 0.0);

    Coordinates coordinates() const noexcept { return coords_; }
    std::size_t bus_count() const noexcept { return values_.size() / 2; }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t slack_bus() const noexcept { return slack_bus_; }
    double slack_value() const noexcept { return slack_value_; }

    /// State index of the slack entry (theta_slack or Im V_slack).
    std::size_t slack_entry() const noexcept {
        return coords_ == Coordinates::Polar ? slack_bus_ : bus_count() + slack_bus_;
    }

    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t k) const { return values_[k]; }

    /// Set entry k; writes to the slack entry are ignored.
    void set(std::size_t k, double value);

    // Index helpers for each layout.
    std::size_t angle_index(std::size_t bus) const noexcept { return bus; }
    std::size_t magnitude_index(std::size_t bus) const noexcept { return bus_count() + bus; }
    std::size_t real_index(std::size_t bus) const noexcept { return bus; }
    std::size_t imag_index(std::size_t bus) const noexcept { return bus_count() + bus; }

    /// Polar-only accessors.
    double angle(std::size_t bus) const;
    double magnitude(std::size_t bus) const;

    /// Complex bus voltage, valid in either layout.
    std::complex<double> voltage(std::size_t bus) const;
    std::vector<std::complex<double>> voltages() const;

  private:
    Coordinates coords_ = Coordinates::Polar;
    std::vector<double> values_;
    std::size_t slack_bus_ = 0;
    double slack_value_ = 0.0;
};

/// Re = V cos(theta), Im = V sin(theta). The rectangular slack value becomes
/// the imaginary part of the slack voltage.
StateVector to_rectangular(const StateVector& polar);

/// V = |Re + j Im|, theta = atan2(Im, Re). Throws ZeroMagnitude on a zero voltage.
StateVector to_polar(const StateVector& rectangular);

/// Wrap an angle into (-pi, pi].
double wrap_angle(double angle);

struct RectangularVariance {
    double var_re = 0.0;
    double var_im = 0.0;
    double cov_re_im = 0.0;
};

/// First-order propagation of independent magnitude/angle variances through
/// (m, a) -> (m cos a, m sin a).
RectangularVariance polar_to_rect_variance(double magnitude, double var_magnitude, double angle,
                                           double var_angle);

}  // namespace pse
