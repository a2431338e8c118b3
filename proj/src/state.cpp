#include "pse/state.hpp"

#include <cmath>
#include <numbers>

namespace pse {

StateVector::StateVector(Coordinates coords, std::vector<double> values, std::size_t slack_bus,
                         double slack_value)
    : coords_(coords), values_(std::move(values)), slack_bus_(slack_bus), slack_value_(slack_value) {
    if (values_.empty() || values_.size() % 2 != 0) {
        throw Error(ErrorCode::DimensionMismatch, "state vector must hold 2N values");
    }
    if (slack_bus_ >= bus_count()) {
        throw Error(ErrorCode::DimensionMismatch, "slack bus index out of range");
    }
    values_[slack_entry()] = slack_value_;
    if (coords_ == Coordinates::Polar) {
        for (std::size_t i = 0; i < bus_count(); ++i) {
            if (!(values_[magnitude_index(i)] > 0.0)) {
                throw Error(ErrorCode::InvalidInput,
                            "polar state requires V > 0 at every bus (bus " + std::to_string(i + 1) + ")");
            }
        }
    }
}

StateVector StateVector::flat(Coordinates coords, std::size_t bus_count, std::size_t slack_bus,
                              double slack_value) {
    std::vector<double> values(2 * bus_count, 0.0);
    if (coords == Coordinates::Polar) {
        for (std::size_t i = 0; i < bus_count; ++i) values[bus_count + i] = 1.0;
    } else {
        for (std::size_t i = 0; i < bus_count; ++i) values[i] = 1.0;
    }
    return StateVector(coords, std::move(values), slack_bus, slack_value);
}

void StateVector::set(std::size_t k, double value) {
    if (k == slack_entry()) return;
    values_.at(k) = value;
}

double StateVector::angle(std::size_t bus) const {
    if (coords_ != Coordinates::Polar) throw Error(ErrorCode::InvalidInput, "angle() needs a polar state");
    return values_.at(angle_index(bus));
}

double StateVector::magnitude(std::size_t bus) const {
    if (coords_ != Coordinates::Polar) throw Error(ErrorCode::InvalidInput, "magnitude() needs a polar state");
    return values_.at(magnitude_index(bus));
}

std::complex<double> StateVector::voltage(std::size_t bus) const {
    if (coords_ == Coordinates::Polar) {
        return std::polar(values_.at(magnitude_index(bus)), values_.at(angle_index(bus)));
    }
    return {values_.at(real_index(bus)), values_.at(imag_index(bus))};
}

std::vector<std::complex<double>> StateVector::voltages() const {
    std::vector<std::complex<double>> v(bus_count());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = voltage(i);
    return v;
}

StateVector to_rectangular(const StateVector& polar) {
    if (polar.coordinates() != Coordinates::Polar) {
        throw Error(ErrorCode::InvalidInput, "to_rectangular expects a polar state");
    }
    const std::size_t n = polar.bus_count();
    std::vector<double> values(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double v = polar[n + i];
        const double theta = polar[i];
        values[i] = v * std::cos(theta);
        values[n + i] = v * std::sin(theta);
    }
    const double slack_imag = values[n + polar.slack_bus()];
    return StateVector(Coordinates::Rectangular, std::move(values), polar.slack_bus(), slack_imag);
}

StateVector to_polar(const StateVector& rectangular) {
    if (rectangular.coordinates() != Coordinates::Rectangular) {
        throw Error(ErrorCode::InvalidInput, "to_polar expects a rectangular state");
    }
    const std::size_t n = rectangular.bus_count();
    std::vector<double> values(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double re = rectangular[i];
        const double im = rectangular[n + i];
        if (re == 0.0 && im == 0.0) {
            throw Error(ErrorCode::ZeroMagnitude, "bus " + std::to_string(i + 1) + " voltage is zero");
        }
        values[i] = wrap_angle(std::atan2(im, re));
        values[n + i] = std::hypot(re, im);
    }
    const double slack_angle = values[rectangular.slack_bus()];
    return StateVector(Coordinates::Polar, std::move(values), rectangular.slack_bus(), slack_angle);
}

double wrap_angle(double angle) {
    constexpr double pi = std::numbers::pi;
    if (angle > -pi && angle <= pi) return angle;
    double wrapped = std::remainder(angle, 2.0 * pi);  // [-pi, pi]
    if (wrapped <= -pi) wrapped += 2.0 * pi;
    return wrapped;
}

RectangularVariance polar_to_rect_variance(double magnitude, double var_magnitude, double angle,
                                           double var_angle) {
    if (!(var_magnitude > 0.0) || !(var_angle > 0.0)) {
        throw Error(ErrorCode::NonPositiveVariance, "phasor magnitude and angle variances must be positive");
    }
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double m2 = magnitude * magnitude;
    RectangularVariance out;
    out.var_re = var_magnitude * c * c + var_angle * m2 * s * s;
    out.var_im = var_magnitude * s * s + var_angle * m2 * c * c;
    out.cov_re_im = (var_magnitude - var_angle * m2) * s * c;
    return out;
}

}  // namespace pse
