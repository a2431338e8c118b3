#include "pse/estimator.hpp"

#include <cmath>
#include <limits>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseQR>

namespace pse {

std::string_view tag(LinearSystemMethod method) {
    return method == LinearSystemMethod::Orthogonal ? "qr" : "ldlt";
}

LinearSystemMethod linear_system_method_from_tag(std::string_view name) {
    if (name == "ldlt") return LinearSystemMethod::NormalEquations;
    if (name == "qr") return LinearSystemMethod::Orthogonal;
    throw Error(ErrorCode::InvalidInput, "unknown linear-system method '" + std::string(name) + "' (ldlt or qr)");
}

void SolverConfig::validate() const {
    if (max_iterations < 1) throw Error(ErrorCode::InvalidInput, "max_iterations must be at least 1");
    if (!(step_tolerance > 0.0) || !std::isfinite(step_tolerance)) {
        throw Error(ErrorCode::InvalidInput, "step_tolerance must be positive");
    }
}

Eigen::VectorXd solve_weighted_least_squares(const Eigen::SparseMatrix<double>& h, const CovarianceModel& r,
                                             const Eigen::VectorXd& rhs, LinearSystemMethod method,
                                             bool neglect_blocks, const std::vector<bool>& active) {
    using SpMat = Eigen::SparseMatrix<double>;
    const Eigen::Index n = h.cols();
    if (h.rows() != rhs.size() || static_cast<std::size_t>(h.rows()) != r.size()) {
        throw Error(ErrorCode::DimensionMismatch, "Jacobian, residual and covariance sizes disagree");
    }
    if (n == 0) return Eigen::VectorXd();

    Eigen::VectorXd dx;
    if (method == LinearSystemMethod::NormalEquations) {
        const SpMat w = r.inverse(neglect_blocks, active);
        const SpMat ht = h.transpose();
        const SpMat gain = ht * w * h;
        const Eigen::VectorXd b = ht * (w * rhs);
        Eigen::SimplicialLDLT<SpMat> ldlt(gain);
        if (ldlt.info() != Eigen::Success) {
            throw Error(ErrorCode::SingularGain, "gain matrix factorization failed");
        }
        const Eigen::VectorXd d = ldlt.vectorD();
        const double largest = d.cwiseAbs().maxCoeff();
        const double floor = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * largest;
        for (Eigen::Index k = 0; k < d.size(); ++k) {
            if (!(d[k] > floor)) {
                throw Error(ErrorCode::SingularGain,
                            "gain matrix is singular or indefinite (pivot " + std::to_string(d[k]) +
                                "); the measurement set does not determine the state");
            }
        }
        dx = ldlt.solve(b);
    } else {
        if (h.rows() < n) {
            throw Error(ErrorCode::SingularGain, "fewer measurement rows than unknowns");
        }
        SpMat a = r.whitening(neglect_blocks, active) * h;
        a.makeCompressed();
        const Eigen::VectorXd b = r.whitening(neglect_blocks, active) * rhs;
        Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
        qr.compute(a);
        if (qr.info() != Eigen::Success || qr.rank() < n) {
            throw Error(ErrorCode::SingularGain, "whitened Jacobian is rank deficient; the measurement set "
                                                 "does not determine the state");
        }
        dx = qr.solve(b);
    }
    if (!dx.allFinite()) throw Error(ErrorCode::SingularGain, "linear solve produced a non-finite step");
    return dx;
}

namespace {

std::vector<long> column_map(const EstimationProblem& problem, std::size_t state_size) {
    std::vector<long> col(state_size, -1);
    const auto& free = problem.free_variables();
    for (std::size_t c = 0; c < free.size(); ++c) col[free[c]] = static_cast<long>(c);
    return col;
}

void check_initial_state(const EstimationProblem& problem, const StateVector& x0) {
    const auto& net = problem.network();
    if (x0.coordinates() != problem.coordinates() || x0.bus_count() != net.bus_count()) {
        throw Error(ErrorCode::DimensionMismatch, "initial state does not match the " +
                                                      std::string(tag(problem.formulation())) + " state layout");
    }
    if (x0.slack_bus() != net.slack_index()) {
        throw Error(ErrorCode::InvalidInput, "initial state uses a different slack bus than the network");
    }
}

std::string row_label(const Measurement& m, std::size_t k) {
    return "row " + std::to_string(k + 1) + " (" + std::string(tag(m.kind)) + " at " + describe(m.at) + ")";
}

}  // namespace

EstimationResult gauss_newton(const EstimationProblem& problem, const StateVector& x0, const SolverConfig& cfg) {
    cfg.validate();
    check_initial_state(problem, x0);

    const auto& set = problem.measurements();
    const auto& free = problem.free_variables();
    const std::size_t m = problem.row_count();
    const auto n = static_cast<Eigen::Index>(free.size());
    const auto col = column_map(problem, x0.size());
    const bool neglect = cfg.neglect_phasor_covariance;

    EstimationResult result;
    StateVector x = x0;
    result.objective_trace.push_back(objective(problem, x, neglect));

    int updates = 0;
    for (;;) {
        std::vector<Eigen::Triplet<double>> entries;
        std::vector<bool> active(m, true);
        bool dropped = false;
        Eigen::VectorXd r(static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < m; ++k) {
            const auto row = problem.evaluate(k, x);
            double diff = set[k].value - row.value();
            if (is_angle_kind(set[k].kind)) diff = wrap_angle(diff);
            r[static_cast<Eigen::Index>(k)] = diff;
            if (row.is_singular()) {
                active[k] = false;
                dropped = true;
                r[static_cast<Eigen::Index>(k)] = 0.0;
                result.warnings.push_back(row_label(set[k], k) + " dropped at iteration " +
                                          std::to_string(updates + 1) + ": " + row.singular_reason());
                continue;
            }
            for (const auto& p : row.gradient()) {
                if (col[p.index] >= 0 && p.value != 0.0) {
                    entries.emplace_back(static_cast<Eigen::Index>(k), col[p.index], p.value);
                }
            }
        }
        Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(m), n);
        jac.setFromTriplets(entries.begin(), entries.end());

        const Eigen::VectorXd dx =
            solve_weighted_least_squares(jac, problem.covariance(), r, cfg.method, neglect, active);
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto k = free[static_cast<std::size_t>(c)];
            x.set(k, x[k] + dx[c]);
        }
        const double step = n > 0 ? dx.lpNorm<Eigen::Infinity>() : 0.0;
        const double obj = objective(problem, x, neglect);
        result.max_step_trace.push_back(step);
        if (!std::isfinite(obj)) {
            result.warnings.push_back("objective became non-finite; iteration diverged");
            break;
        }
        result.objective_trace.push_back(obj);

        if (step <= cfg.step_tolerance) {
            result.converged = !dropped;
            if (dropped) result.warnings.push_back("singular rows were still dropped at the final iterate");
            break;
        }
        if (updates == cfg.max_iterations) break;
        ++updates;
    }

    result.iterations = updates;
    result.residuals = problem.residuals(x);
    result.x_hat = std::move(x);
    return result;
}

EstimationResult linear_wls(const EstimationProblem& problem, const SolverConfig& cfg) {
    cfg.validate();
    const auto& net = problem.network();
    const auto& free = problem.free_variables();
    const bool neglect = cfg.neglect_phasor_covariance;
    const StateVector x0 = problem.flat_start();

    Eigen::SparseMatrix<double> full;
    Eigen::VectorXd rhs;
    bool from_flat = false;
    switch (problem.formulation()) {
        case Formulation::LinearRect:
            full = linear_rows_rectstate(net, problem.measurements()).jacobian;
            rhs = problem.measured_values();
            break;
        case Formulation::Dc:
            full = dc_rows(net, problem.measurements()).jacobian;
            rhs = problem.measured_values();
            break;
        default: {
            if (!problem.is_linear()) {
                throw Error(ErrorCode::UnsupportedKind, "linear WLS needs a measurement set that is linear in the "
                                                        "state; use Gauss-Newton");
            }
            std::vector<Eigen::Triplet<double>> entries;
            for (std::size_t k = 0; k < problem.row_count(); ++k) {
                const auto row = problem.evaluate(k, x0);
                for (const auto& p : row.gradient()) {
                    entries.emplace_back(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p.index), p.value);
                }
            }
            full.resize(static_cast<Eigen::Index>(problem.row_count()), static_cast<Eigen::Index>(x0.size()));
            full.setFromTriplets(entries.begin(), entries.end());
            rhs = problem.residuals(x0);
            from_flat = true;
            break;
        }
    }

    // Move the fixed slack column to the right-hand side and keep the free columns.
    const std::size_t slack_col = x0.slack_entry();
    if (!from_flat && x0[slack_col] != 0.0) {
        rhs -= Eigen::VectorXd(full.col(static_cast<Eigen::Index>(slack_col))) * x0[slack_col];
    }
    std::vector<Eigen::Triplet<double>> pick;
    for (std::size_t c = 0; c < free.size(); ++c) {
        pick.emplace_back(static_cast<Eigen::Index>(free[c]), static_cast<Eigen::Index>(c), 1.0);
    }
    Eigen::SparseMatrix<double> select(full.cols(), static_cast<Eigen::Index>(free.size()));
    select.setFromTriplets(pick.begin(), pick.end());
    const Eigen::SparseMatrix<double> h = full * select;

    const Eigen::VectorXd sol = solve_weighted_least_squares(h, problem.covariance(), rhs, cfg.method, neglect);

    StateVector x = x0;
    double step = 0.0;
    for (std::size_t c = 0; c < free.size(); ++c) {
        const double value = from_flat ? x0[free[c]] + sol[static_cast<Eigen::Index>(c)]
                                       : sol[static_cast<Eigen::Index>(c)];
        step = std::max(step, std::abs(value - x0[free[c]]));
        x.set(free[c], value);
    }

    EstimationResult result;
    result.converged = true;
    result.iterations = 1;
    result.objective_trace = {objective(problem, x0, neglect), objective(problem, x, neglect)};
    result.max_step_trace = {step};
    result.residuals = problem.residuals(x);
    result.x_hat = std::move(x);
    return result;
}

EstimationResult estimate(const EstimationProblem& problem, const StateVector& x0, const SolverConfig& cfg) {
    if (is_linear_formulation(problem.formulation())) return linear_wls(problem, cfg);
    return gauss_newton(problem, x0, cfg);
}

}  // namespace pse
