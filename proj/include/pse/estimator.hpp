#pragma once

#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "pse/problem.hpp"

namespace pse {

enum class LinearSystemMethod {
    NormalEquations,  // sparse LDL^T of the gain matrix
    Orthogonal,  // sparse QR of the whitened Jacobian
};

std::string_view tag(LinearSystemMethod method);
LinearSystemMethod linear_system_method_from_tag(std::string_view tag);  // "ldlt" | "qr"

struct SolverConfig {
    int max_iterations = 50;
    double step_tolerance = 1e-8;
    LinearSystemMethod method = LinearSystemMethod::NormalEquations;
    bool neglect_phasor_covariance = false;

    /// Throws InvalidInput on a non-positive tolerance or iteration budget.
    void validate() const;
};

struct EstimationResult {
    StateVector x_hat;
    bool converged = false;
    /// Accepted updates with max |dx| above the tolerance. The solve that
    /// confirms convergence is not counted, so a linear model reports 1.
    int iterations = 0;
    std::vector<double> objective_trace;  // at x0 and after every applied step
    std::vector<double> max_step_trace;  // max |dx| of every applied step
    Eigen::VectorXd residuals;  // z - h(x_hat), angles wrapped
    std::vector<std::string> warnings;
};

/// Plain Gauss-Newton on the slack-eliminated state. Returns converged=false
/// when the budget runs out or a singular row was still dropped at the final
/// iterate. Throws SingularGain when the gain system cannot be solved.
EstimationResult gauss_newton(const EstimationProblem& problem, const StateVector& x0, const SolverConfig& cfg = {});

/// One-shot linear WLS. LinearRect and DC problems use their constant-row
/// builders; other all-linear problems are linearized once at the flat start.
/// Throws UnsupportedKind for nonlinear problems and SingularGain on rank loss.
EstimationResult linear_wls(const EstimationProblem& problem, const SolverConfig& cfg = {});

/// linear_wls for linear problems, gauss_newton (from x0) otherwise.
EstimationResult estimate(const EstimationProblem& problem, const StateVector& x0, const SolverConfig& cfg = {});

/// Minimizer of (rhs - H x)^T R^{-1} (rhs - H x). Rows outside `active` (all
/// when empty) are ignored. Throws SingularGain.
Eigen::VectorXd solve_weighted_least_squares(const Eigen::SparseMatrix<double>& h, const CovarianceModel& r,
                                             const Eigen::VectorXd& rhs, LinearSystemMethod method,
                                             bool neglect_blocks = false, const std::vector<bool>& active = {});

}  // namespace pse
