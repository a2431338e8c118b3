#include "pse/functions.hpp"

#include <cmath>

namespace pse {

namespace {

void require_polar(const StateVector& x) {
    if (x.coordinates() != Coordinates::Polar) {
        throw Error(ErrorCode::InvalidInput, "measurement function expects a polar state");
    }
}

void require_rectangular(const StateVector& x) {
    if (x.coordinates() != Coordinates::Rectangular) {
        throw Error(ErrorCode::InvalidInput, "measurement function expects a rectangular state");
    }
}

// Values shared by every branch-end function of a polar state.
struct EndState {
    EndParameters p;
    double vi, vj;
    double ti, tj;
    double cos_ij, sin_ij;
};

EndState end_state(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    require_polar(x);
    EndState s;
    s.p = net.end_parameters(end);
    s.vi = x.magnitude(s.p.i);
    s.vj = x.magnitude(s.p.j);
    s.ti = x.angle(s.p.i);
    s.tj = x.angle(s.p.j);
    s.cos_ij = std::cos(s.ti - s.tj);
    s.sin_ij = std::sin(s.ti - s.tj);
    return s;
}

std::vector<Partial> four_partials(const StateVector& x, const EndParameters& p, double d_ti, double d_tj,
                                   double d_vi, double d_vj) {
    return {{x.angle_index(p.i), d_ti},
            {x.angle_index(p.j), d_tj},
            {x.magnitude_index(p.i), d_vi},
            {x.magnitude_index(p.j), d_vj}};
}

}  // namespace

double FunctionRow::partial(std::size_t index) const {
    double sum = 0.0;
    for (const auto& d : gradient()) {
        if (d.index == index) sum += d.value;
    }
    return sum;
}

BranchCoefficients BranchCoefficients::from(const EndParameters& p) {
    BranchCoefficients c;
    c.aa = p.g + p.gs;
    c.ba = p.b + p.bs;
    c.ca = p.g;
    c.da = p.b;
    c.ac = (p.g + p.gs) * (p.g + p.gs) + (p.b + p.bs) * (p.b + p.bs);
    c.bc = p.g * p.g + p.b * p.b;
    c.cc = p.g * (p.g + p.gs) + p.b * (p.b + p.bs);
    c.dc = p.g * p.bs - p.b * p.gs;
    return c;
}

FunctionRow h_p_flow(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    const auto s = end_state(net, end, x);
    const auto& p = s.p;
    const double gc_bs = p.g * s.cos_ij + p.b * s.sin_ij;
    const double gs_bc = p.g * s.sin_ij - p.b * s.cos_ij;
    const double value = s.vi * s.vi * (p.g + p.gs) - s.vi * s.vj * gc_bs;
    return {value, four_partials(x, p, s.vi * s.vj * gs_bc, -s.vi * s.vj * gs_bc,
                                 -s.vj * gc_bs + 2.0 * s.vi * (p.g + p.gs), -s.vi * gc_bs)};
}

FunctionRow h_q_flow(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    const auto s = end_state(net, end, x);
    const auto& p = s.p;
    const double gc_bs = p.g * s.cos_ij + p.b * s.sin_ij;
    const double gs_bc = p.g * s.sin_ij - p.b * s.cos_ij;
    const double value = -s.vi * s.vi * (p.b + p.bs) - s.vi * s.vj * gs_bc;
    return {value, four_partials(x, p, -s.vi * s.vj * gc_bs, s.vi * s.vj * gc_bs,
                                 -s.vj * gs_bc - 2.0 * s.vi * (p.b + p.bs), -s.vi * gs_bc)};
}

FunctionRow h_i_mag(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    const auto s = end_state(net, end, x);
    const auto c = BranchCoefficients::from(s.p);
    const double squared = c.ac * s.vi * s.vi + c.bc * s.vj * s.vj -
                           2.0 * s.vi * s.vj * (c.cc * s.cos_ij - c.dc * s.sin_ij);
    const double value = std::sqrt(std::max(squared, 0.0));
    if (value < kFlatStartGuard) {
        return FunctionRow::singular(value, "current magnitude below the flat-start guard; Jacobian undefined");
    }
    const double dc_cos_cc_sin = c.dc * s.cos_ij + c.cc * s.sin_ij;
    const double dc_sin_cc_cos = c.dc * s.sin_ij - c.cc * s.cos_ij;
    return {value, four_partials(x, s.p, s.vi * s.vj * dc_cos_cc_sin / value,
                                 -s.vi * s.vj * dc_cos_cc_sin / value,
                                 (s.vj * dc_sin_cc_cos + c.ac * s.vi) / value,
                                 (s.vi * dc_sin_cc_cos + c.bc * s.vj) / value)};
}

FunctionRow h_i_ang(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    const auto s = end_state(net, end, x);
    const auto c = BranchCoefficients::from(s.p);
    const double ci = std::cos(s.ti), si = std::sin(s.ti);
    const double cj = std::cos(s.tj), sj = std::sin(s.tj);
    const double re = (c.aa * ci - c.ba * si) * s.vi - (c.ca * cj - c.da * sj) * s.vj;
    const double im = (c.aa * si + c.ba * ci) * s.vi - (c.ca * sj + c.da * cj) * s.vj;
    const double value = std::atan2(im, re);
    const double mag2 = re * re + im * im;
    if (std::sqrt(mag2) < kFlatStartGuard) {
        return FunctionRow::singular(value, "current magnitude below the flat-start guard; angle Jacobian undefined");
    }
    // Partials divide by |I|^2 (not |I|): d atan2(im, re) = (re dIm - im dRe) / |I|^2.
    const double mixed = (c.dc * s.sin_ij - c.cc * s.cos_ij) * s.vi * s.vj;
    const double cs_dc = c.cc * s.sin_ij + c.dc * s.cos_ij;
    return {value, four_partials(x, s.p, (c.ac * s.vi * s.vi + mixed) / mag2, (c.bc * s.vj * s.vj + mixed) / mag2,
                                 -s.vj * cs_dc / mag2, s.vi * cs_dc / mag2)};
}

namespace {

template <bool Active>
FunctionRow injection(const AdmittanceMatrix& y, std::size_t i, const StateVector& x) {
    require_polar(x);
    const double vi = x.magnitude(i);
    const double ti = x.angle(i);
    double value = 0.0;
    double d_ti = 0.0;
    double d_vi = 0.0;
    double g_ii = 0.0;
    double b_ii = 0.0;
    std::vector<Partial> grad;
    grad.reserve(8);
    y.for_each_in_row(i, [&](std::size_t j, Complex yij) {
        const double g = yij.real();
        const double b = yij.imag();
        if (j == i) {
            g_ii = g;
            b_ii = b;
            return;
        }
        const double vj = x.magnitude(j);
        const double t = ti - x.angle(j);
        const double c = std::cos(t);
        const double s = std::sin(t);
        const double gc_bs = g * c + b * s;
        const double gs_bc = g * s - b * c;
        if constexpr (Active) {
            value += vi * vj * gc_bs;
            d_ti += vi * vj * (-g * s + b * c);
            d_vi += vj * gc_bs;
            grad.push_back({x.angle_index(j), vi * vj * gs_bc});
            grad.push_back({x.magnitude_index(j), vi * gc_bs});
        } else {
            value += vi * vj * gs_bc;
            d_ti += vi * vj * gc_bs;
            d_vi += vj * gs_bc;
            grad.push_back({x.angle_index(j), -vi * vj * gc_bs});
            grad.push_back({x.magnitude_index(j), vi * gs_bc});
        }
    });
    if constexpr (Active) {
        value += vi * vi * g_ii;
        d_vi += 2.0 * vi * g_ii;
    } else {
        value -= vi * vi * b_ii;
        d_vi -= 2.0 * vi * b_ii;
    }
    grad.push_back({x.angle_index(i), d_ti});
    grad.push_back({x.magnitude_index(i), d_vi});
    return {value, std::move(grad)};
}

}  // namespace

FunctionRow h_p_inj(const AdmittanceMatrix& y, std::size_t bus, const StateVector& x) {
    return injection<true>(y, bus, x);
}

FunctionRow h_q_inj(const AdmittanceMatrix& y, std::size_t bus, const StateVector& x) {
    return injection<false>(y, bus, x);
}

FunctionRow h_v_mag(std::size_t bus, const StateVector& x) {
    require_polar(x);
    return {x.magnitude(bus), {{x.magnitude_index(bus), 1.0}}};
}

FunctionRow h_v_ang(std::size_t bus, const StateVector& x) {
    require_polar(x);
    return {x.angle(bus), {{x.angle_index(bus), 1.0}}};
}

FunctionRow h_v_re_polarstate(std::size_t bus, const StateVector& x) {
    require_polar(x);
    const double v = x.magnitude(bus);
    const double t = x.angle(bus);
    return {v * std::cos(t), {{x.angle_index(bus), -v * std::sin(t)}, {x.magnitude_index(bus), std::cos(t)}}};
}

FunctionRow h_v_im_polarstate(std::size_t bus, const StateVector& x) {
    require_polar(x);
    const double v = x.magnitude(bus);
    const double t = x.angle(bus);
    return {v * std::sin(t), {{x.angle_index(bus), v * std::cos(t)}, {x.magnitude_index(bus), std::sin(t)}}};
}

FunctionRow h_i_re_polarstate(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    const auto s = end_state(net, end, x);
    const auto c = BranchCoefficients::from(s.p);
    const double ci = std::cos(s.ti), si = std::sin(s.ti);
    const double cj = std::cos(s.tj), sj = std::sin(s.tj);
    const double value = s.vi * (c.aa * ci - c.ba * si) - s.vj * (c.ca * cj - c.da * sj);
    return {value, four_partials(x, s.p, -s.vi * (c.aa * si + c.ba * ci), s.vj * (c.ca * sj + c.da * cj),
                                 c.aa * ci - c.ba * si, -c.ca * cj + c.da * sj)};
}

FunctionRow h_i_im_polarstate(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    const auto s = end_state(net, end, x);
    const auto c = BranchCoefficients::from(s.p);
    const double ci = std::cos(s.ti), si = std::sin(s.ti);
    const double cj = std::cos(s.tj), sj = std::sin(s.tj);
    const double value = s.vi * (c.aa * si + c.ba * ci) - s.vj * (c.ca * sj + c.da * cj);
    return {value, four_partials(x, s.p, s.vi * (c.aa * ci - c.ba * si), -s.vj * (c.ca * cj - c.da * sj),
                                 c.aa * si + c.ba * ci, -c.ca * sj - c.da * cj)};
}

FunctionRow h_v_re_rectstate(std::size_t bus, const StateVector& x) {
    require_rectangular(x);
    return {x[x.real_index(bus)], {{x.real_index(bus), 1.0}}};
}

FunctionRow h_v_im_rectstate(std::size_t bus, const StateVector& x) {
    require_rectangular(x);
    return {x[x.imag_index(bus)], {{x.imag_index(bus), 1.0}}};
}

namespace {

FunctionRow rect_current(const NetworkModel& net, BranchEnd end, const StateVector& x, bool real_part) {
    require_rectangular(x);
    const auto p = net.end_parameters(end);
    std::vector<Partial> grad;
    if (real_part) {
        grad = {{x.real_index(p.i), p.g + p.gs},
                {x.imag_index(p.i), -(p.b + p.bs)},
                {x.real_index(p.j), -p.g},
                {x.imag_index(p.j), p.b}};
    } else {
        grad = {{x.real_index(p.i), p.b + p.bs},
                {x.imag_index(p.i), p.g + p.gs},
                {x.real_index(p.j), -p.b},
                {x.imag_index(p.j), -p.g}};
    }
    double value = 0.0;
    for (const auto& d : grad) value += d.value * x[d.index];
    return {value, std::move(grad)};
}

}  // namespace

FunctionRow h_i_re_rectstate(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    return rect_current(net, end, x, true);
}

FunctionRow h_i_im_rectstate(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    return rect_current(net, end, x, false);
}

FunctionRow h_p_flow_dc(const NetworkModel& net, BranchEnd end, const StateVector& x) {
    require_polar(x);
    const auto p = net.end_parameters(end);
    const double value = -p.b * (x.angle(p.i) - x.angle(p.j));
    return {value, {{x.angle_index(p.i), -p.b}, {x.angle_index(p.j), p.b}}};
}

FunctionRow h_p_inj_dc(const NetworkModel& net, std::size_t bus, const StateVector& x) {
    require_polar(x);
    double value = 0.0;
    double d_ti = 0.0;
    std::vector<Partial> grad;
    for (std::size_t k : net.incident(bus)) {
        const auto& br = net.branch(k);
        const auto p = net.end_parameters({k, static_cast<std::size_t>(br.from_bus - 1) == bus});
        value += -p.b * (x.angle(p.i) - x.angle(p.j));
        d_ti += -p.b;
        grad.push_back({x.angle_index(p.j), p.b});
    }
    grad.push_back({x.angle_index(bus), d_ti});
    return {value, std::move(grad)};
}

FunctionRow evaluate_measurement(const NetworkModel& net, const AdmittanceMatrix& y, const Measurement& m,
                                 const StateVector& x) {
    const auto end = [&] { return net.find_end(m.at.bus, m.at.to, m.at.circuit); };
    const std::size_t bus = net.index_of(m.at.bus);
    if (x.coordinates() == Coordinates::Rectangular) {
        switch (m.kind) {
            case MeasurementKind::VRe: return h_v_re_rectstate(bus, x);
            case MeasurementKind::VIm: return h_v_im_rectstate(bus, x);
            case MeasurementKind::IRe: return h_i_re_rectstate(net, end(), x);
            case MeasurementKind::IIm: return h_i_im_rectstate(net, end(), x);
            default:
                throw Error(ErrorCode::UnsupportedKind,
                            std::string(tag(m.kind)) + " has no rectangular-state measurement function");
        }
    }
    switch (m.kind) {
        case MeasurementKind::PFlow: return h_p_flow(net, end(), x);
        case MeasurementKind::QFlow: return h_q_flow(net, end(), x);
        case MeasurementKind::IMag:
        case MeasurementKind::IMagPmu: return h_i_mag(net, end(), x);
        case MeasurementKind::IAngPmu: return h_i_ang(net, end(), x);
        case MeasurementKind::PInj: return h_p_inj(y, bus, x);
        case MeasurementKind::QInj: return h_q_inj(y, bus, x);
        case MeasurementKind::VMag:
        case MeasurementKind::VMagPmu: return h_v_mag(bus, x);
        case MeasurementKind::VAngPmu:
        case MeasurementKind::Theta: return h_v_ang(bus, x);
        case MeasurementKind::VRe: return h_v_re_polarstate(bus, x);
        case MeasurementKind::VIm: return h_v_im_polarstate(bus, x);
        case MeasurementKind::IRe: return h_i_re_polarstate(net, end(), x);
        case MeasurementKind::IIm: return h_i_im_polarstate(net, end(), x);
        case MeasurementKind::PFlowDc: return h_p_flow_dc(net, end(), x);
        case MeasurementKind::PInjDc: return h_p_inj_dc(net, bus, x);
    }
    throw Error(ErrorCode::UnsupportedKind, "unhandled measurement kind");
}

namespace {

LinearModel stack_rows(const MeasurementSet& set, std::size_t columns, const auto& row_of) {
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t k = 0; k < set.size(); ++k) {
        const FunctionRow row = row_of(set[k]);
        for (const auto& d : row.gradient()) {
            entries.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d.index), d.value);
        }
    }
    LinearModel model;
    model.jacobian.resize(static_cast<Eigen::Index>(set.size()), static_cast<Eigen::Index>(columns));
    model.jacobian.setFromTriplets(entries.begin(), entries.end());
    model.jacobian.makeCompressed();
    return model;
}

}  // namespace

LinearModel linear_rows_rectstate(const NetworkModel& net, const MeasurementSet& set) {
    const std::size_t n = net.bus_count();
    // Partials are constant, so any rectangular state serves as the evaluation point.
    const auto x = StateVector::flat(Coordinates::Rectangular, n, net.slack_index(), 0.0);
    const AdmittanceMatrix unused;
    return stack_rows(set, 2 * n, [&](const Measurement& m) {
        if (family(m.kind) != KindFamily::PhasorRectangular) {
            throw Error(ErrorCode::UnsupportedKind,
                        std::string(tag(m.kind)) + " is not a rectangular phasor measurement");
        }
        return evaluate_measurement(net, unused, m, x);
    });
}

LinearModel dc_rows(const NetworkModel& net, const MeasurementSet& set) {
    const std::size_t n = net.bus_count();
    const auto x = StateVector::flat(Coordinates::Polar, n, net.slack_index(), 0.0);
    const AdmittanceMatrix unused;
    return stack_rows(set, n, [&](const Measurement& m) {
        if (family(m.kind) != KindFamily::Dc) {
            throw Error(ErrorCode::UnsupportedKind, std::string(tag(m.kind)) + " is not a DC-model measurement");
        }
        return evaluate_measurement(net, unused, m, x);
    });
}

}  // namespace pse
