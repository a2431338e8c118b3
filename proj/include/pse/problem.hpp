#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/SparseCore>

#include "pse/functions.hpp"
#include "pse/measurement.hpp"
#include "pse/network.hpp"
#include "pse/state.hpp"

namespace pse {

/// Measurement model families.
///   Conventional       legacy rows, polar state, Gauss-Newton
///   SimultaneousPolar  legacy + polar phasors, polar state, Gauss-Newton
///   SimultaneousRect   legacy + rectangular phasors, polar state, Gauss-Newton
///   LinearRect         rectangular phasors only, rectangular state, linear WLS
///   Dc                 DC rows, bus angles only, linear WLS
enum class Formulation { Conventional, SimultaneousPolar, SimultaneousRect, LinearRect, Dc };

std::string_view tag(Formulation f);
Formulation formulation_from_tag(std::string_view tag);  // throws InvalidInput
bool admits(Formulation f, MeasurementKind kind);
bool is_linear_formulation(Formulation f);

/// Measurement error covariance: a diagonal of variances plus optional 2x2
/// correlated blocks pairing the real and imaginary rows of one phasor.
class CovarianceModel {
  public:
    struct Block {
        std::size_t first = 0;  // row of the real part
        std::size_t second = 0;  // row of the imaginary part
        double covariance = 0.0;
    };

    CovarianceModel() = default;
    explicit CovarianceModel(std::vector<double> variances, std::vector<Block> blocks = {});

    std::size_t size() const noexcept { return variances_.size(); }
    const std::vector<double>& variances() const noexcept { return variances_; }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    bool is_diagonal() const noexcept { return blocks_.empty(); }

    /// R^{-1} with rows in `active` (all when empty) and zeros elsewhere.
    /// Blocks use closed-form 2x2 inverses; a block with one inactive row
    /// falls back to the active row's own variance.
    Eigen::SparseMatrix<double> inverse(bool neglect_blocks, const std::vector<bool>& active = {}) const;

    /// W with W^T W = R^{-1}, for whitening rows before an orthogonal solve.
    Eigen::SparseMatrix<double> whitening(bool neglect_blocks, const std::vector<bool>& active = {}) const;

    /// r^T R^{-1} r.
    double weighted_norm(const Eigen::VectorXd& residual, bool neglect_blocks = false) const;

    /// Dense R, for inspection and tests.
    Eigen::MatrixXd dense(bool neglect_blocks = false) const;

  private:
    std::vector<double> variances_;
    std::vector<Block> blocks_;
    std::vector<std::optional<std::size_t>> block_of_row_;
};

/// A network, a measurement set and a formulation bound together.
class EstimationProblem {
  public:
    EstimationProblem(NetworkModel net, MeasurementSet set, Formulation formulation);

    Formulation formulation() const noexcept { return formulation_; }
    const NetworkModel& network() const noexcept { return net_; }
    const AdmittanceMatrix& admittance() const noexcept { return y_; }
    const MeasurementSet& measurements() const noexcept { return set_; }
    const CovarianceModel& covariance() const noexcept { return covariance_; }
    std::size_t row_count() const noexcept { return set_.size(); }

    Coordinates coordinates() const noexcept {
        return formulation_ == Formulation::LinearRect ? Coordinates::Rectangular : Coordinates::Polar;
    }

    /// State indices being estimated, in column order. Everything else (the
    /// slack entry; magnitudes in the DC model) stays at its initial value.
    const std::vector<std::size_t>& free_variables() const noexcept { return free_; }
    std::size_t unknown_count() const noexcept { return free_.size(); }

    /// Flat start in the formulation's coordinates with the network slack value.
    StateVector flat_start() const;

    Eigen::VectorXd measured_values() const;

    /// True when every row has constant partials in the problem coordinates.
    bool is_linear() const noexcept { return linear_; }

    FunctionRow evaluate(std::size_t row, const StateVector& x) const;

    /// z - h(x), angle rows wrapped into (-pi, pi].
    Eigen::VectorXd residuals(const StateVector& x) const;

  private:
    NetworkModel net_;
    MeasurementSet set_;
    Formulation formulation_;
    AdmittanceMatrix y_;
    CovarianceModel covariance_;
    std::vector<std::size_t> free_;
    std::vector<BranchEnd> ends_;  // resolved per row (unused for bus rows)
    bool linear_ = false;
};

/// Validate admissibility of every row and build the problem.
/// Throws EmptyMeasurementSet, UnsupportedKind or InvalidMeasurement.
EstimationProblem assemble_problem(const NetworkModel& net, const MeasurementSet& set, Formulation formulation);

/// Weighted least-squares objective r^T R^{-1} r at x.
double objective(const EstimationProblem& problem, const StateVector& x, bool neglect_phasor_covariance = false);

}  // namespace pse
