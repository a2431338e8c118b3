#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "pse/measurement.hpp"
#include "pse/network.hpp"
#include "pse/state.hpp"

namespace pse {

/// Current magnitudes below this make the current-magnitude and current-angle
/// Jacobians undefined (flat start with shunt-free branches).
inline constexpr double kFlatStartGuard = 1e-9;

struct Partial {
    std::size_t index = 0;  // state-vector index
    double value = 0.0;
};

/// One measurement function evaluated at a state: the value h_i(x) and its
/// sparse gradient. Rows whose gradient is undefined keep their value but
/// throw FlatStartSingularity from gradient().
class FunctionRow {
  public:
    FunctionRow() = default;
    FunctionRow(double value, std::vector<Partial> gradient) : value_(value), gradient_(std::move(gradient)) {}

    static FunctionRow singular(double value, std::string reason) {
        FunctionRow row(value, {});
        row.singular_ = true;
        row.reason_ = std::move(reason);
        return row;
    }

    double value() const noexcept { return value_; }
    bool is_singular() const noexcept { return singular_; }
    const std::string& singular_reason() const noexcept { return reason_; }

    const std::vector<Partial>& gradient() const {
        if (singular_) throw Error(ErrorCode::FlatStartSingularity, reason_);
        return gradient_;
    }

    /// Partial with respect to one state index (0 when outside the support).
    double partial(std::size_t index) const;

  private:
    double value_ = 0.0;
    std::vector<Partial> gradient_;
    bool singular_ = false;
    std::string reason_;
};

/// Per-end coefficients of the current-magnitude (c) and current-phasor (a)
/// measurement functions.
struct BranchCoefficients {
    double ac = 0.0, bc = 0.0, cc = 0.0, dc = 0.0;
    double aa = 0.0, ba = 0.0, ca = 0.0, da = 0.0;

    static BranchCoefficients from(const EndParameters& p);
};

// Polar state x = (theta, V).
FunctionRow h_p_flow(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_q_flow(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_i_mag(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_i_ang(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_p_inj(const AdmittanceMatrix& y, std::size_t bus, const StateVector& x);
FunctionRow h_q_inj(const AdmittanceMatrix& y, std::size_t bus, const StateVector& x);
FunctionRow h_v_mag(std::size_t bus, const StateVector& x);
FunctionRow h_v_ang(std::size_t bus, const StateVector& x);
FunctionRow h_v_re_polarstate(std::size_t bus, const StateVector& x);
FunctionRow h_v_im_polarstate(std::size_t bus, const StateVector& x);
FunctionRow h_i_re_polarstate(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_i_im_polarstate(const NetworkModel& net, BranchEnd end, const StateVector& x);

// Rectangular state x = (Re V, Im V); every row is linear with constant partials.
FunctionRow h_v_re_rectstate(std::size_t bus, const StateVector& x);
FunctionRow h_v_im_rectstate(std::size_t bus, const StateVector& x);
FunctionRow h_i_re_rectstate(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_i_im_rectstate(const NetworkModel& net, BranchEnd end, const StateVector& x);

// DC model over the angles of a polar state; magnitudes are ignored.
FunctionRow h_p_flow_dc(const NetworkModel& net, BranchEnd end, const StateVector& x);
FunctionRow h_p_inj_dc(const NetworkModel& net, std::size_t bus, const StateVector& x);

/// Constant measurement Jacobian of a linear model, h(x) = H x.
struct LinearModel {
    Eigen::SparseMatrix<double> jacobian;  // rows follow the measurement set
};

/// H over the rectangular layout (2N columns). Only V_re, V_im, I_re, I_im
/// rows are accepted; anything else raises UnsupportedKind.
LinearModel linear_rows_rectstate(const NetworkModel& net, const MeasurementSet& set);

/// H over the bus angles (N columns). Only P_flow_dc, P_inj_dc and Theta rows
/// are accepted.
LinearModel dc_rows(const NetworkModel& net, const MeasurementSet& set);

/// Evaluate any measurement at a state in the coordinates its family uses:
/// legacy, polar and rectangular phasors and DC rows on a polar state, and
/// rectangular phasors on a rectangular state.
FunctionRow evaluate_measurement(const NetworkModel& net, const AdmittanceMatrix& y, const Measurement& m,
                                 const StateVector& x);

}  // namespace pse
