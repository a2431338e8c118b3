// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracle.hpp"
#include "pse/estimator.hpp"
#include "pse/functions.hpp"
#include "pse/io.hpp"
#include "pse/synthesis.hpp"

using namespace pse;
using K = MeasurementKind;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(PSE_FIXTURE_DIR) / name; }

NetworkModel net3() { return load_network(fixture("net3.json")); }
NetworkModel net14() { return load_network(fixture("net14.json")); }

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Scenario {
    NetworkModel net;
    ScenarioSpec spec;
    StateVector truth;
    MeasurementSet set;
};

Scenario scenario(const std::string& name, bool zero_noise) {
    auto file = load_scenario(fixture("scenario_" + name + ".json"));
    file.spec.zero_noise = zero_noise;
    auto net = load_network(*file.network);
    auto truth = sample_true_state(net, file.spec);
    auto set = synthesize(net, file.spec, truth);
    return {std::move(net), file.spec, std::move(truth), std::move(set)};
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

bool is_polar_linear(K kind) {
    return kind == K::VMag || kind == K::VMagPmu || kind == K::VAngPmu || kind == K::Theta || kind == K::PFlowDc ||
           kind == K::PInjDc;
}

// ---------------------------------------------------------------------------

Outcome jacobian_battery() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::size_t rows = 0, singular = 0;
    double worst = 0.0;
    Outcome out;
    for (const auto& net : {net3(), net14()}) {
        const auto y = assemble_admittance(net);
        for (int trial = 0; trial < 100; ++trial) {
            const auto polar = oracle::random_polar(rng, net);
            for (int k = 0; k <= static_cast<int>(K::Theta); ++k) {
                const auto kind = static_cast<K>(k);
                // Rectangular phasors are nonlinear on the polar state only.
                if (is_polar_linear(kind)) continue;
                for (const auto& m : oracle::all_locations(net, kind)) {
                    const auto row = evaluate_measurement(net, y, m, polar);
                    if (row.is_singular()) {
                        ++singular;
                        continue;
                    }
                    const std::vector<double> xv(polar.values().begin(), polar.values().end());
                    const auto fd = oracle::fd_gradient(net, m, xv, Coordinates::Polar);
                    ++rows;
                    for (std::size_t c = 0; c < xv.size(); ++c) {
                        const double a = row.partial(c), f = static_cast<double>(fd[c]);
                        const double tol = std::max(1e-6 * std::max(std::abs(a), std::abs(f)), 1e-9);
                        worst = std::max(worst, std::abs(a - f) / tol);
                        if (std::abs(a - f) > tol && out.pass) {
                            out.pass = false;
                            out.detail = std::string(tag(kind)) + " at " + describe(m.at) + " column " +
                                         std::to_string(c) + ": analytic " + fmt("%.12g", a) + " vs fd " +
                                         fmt("%.12g", f) + "; ";
                        }
                    }
                }
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= 10.0) out.pass = false;
    out.detail += std::to_string(rows) + " rows, " + std::to_string(singular) + " singular skipped, worst error/tol " +
                  fmt("%.3g", worst) + ", " + fmt("%.2f", secs) + " s";
    return out;
}

Outcome zero_noise_recovery() {
    struct Case {
        const char* name;
        Formulation f;
    };
    const Case cases[] = {{"conventional", Formulation::Conventional},
                          {"simultaneous_polar", Formulation::SimultaneousPolar},
                          {"simultaneous_rect", Formulation::SimultaneousRect},
                          {"linear_rect", Formulation::LinearRect},
                          {"dc", Formulation::Dc}};
    Outcome out;
    std::ostringstream detail;
    double worst = 0.0;
    int max_iter = 0;
    for (const auto& c : cases) {
        for (const char* size : {"3", "14"}) {
            const std::string name = std::string(c.name) + "_" + size;
            const auto s = scenario(name, true);
            const auto problem = assemble_problem(s.net, s.set, c.f);
            const double redundancy =
                static_cast<double>(problem.row_count()) / static_cast<double>(problem.unknown_count());
            const auto result = estimate(problem, problem.flat_start());
            // The DC truth carries V from the sampler; only angles are estimated.
            double err = 0.0;
            if (c.f == Formulation::Dc) {
                for (std::size_t i = 0; i < s.net.bus_count(); ++i) {
                    err = std::max(err, std::abs(result.x_hat[i] - s.truth.angle(i)));
                }
            } else {
                const auto truth = problem.coordinates() == Coordinates::Polar ? s.truth : to_rectangular(s.truth);
                err = max_abs_diff(result.x_hat, truth);
            }
            worst = std::max(worst, err);
            const bool iterative = !is_linear_formulation(c.f);
            if (iterative) max_iter = std::max(max_iter, result.iterations);
            const bool ok = redundancy >= 1.5 && result.converged && err <= 1e-8 &&
                            (!iterative || result.iterations <= 10);
            if (!ok) {
                out.pass = false;
                detail << name << " failed (redundancy " << redundancy << ", err " << err << ", iterations "
                       << result.iterations << "); ";
            }
        }
    }
    detail << "10 runs, worst entry error " << fmt("%.2e", worst) << ", max GN iterations " << max_iter;
    out.detail = detail.str();
    return out;
}

Outcome linear_exactness() {
    Outcome out;
    std::ostringstream detail;
    double worst = 0.0;
    int runs = 0;
    auto check = [&](const std::string& name, const EstimationProblem& problem) {
        const auto gn = gauss_newton(problem, problem.flat_start());
        const auto lin = linear_wls(problem);
        const double d = max_abs_diff(gn.x_hat, lin.x_hat);
        worst = std::max(worst, d);
        ++runs;
        if (!(gn.converged && gn.iterations == 1 && d <= 1e-12)) {
            out.pass = false;
            detail << name << " (iterations " << gn.iterations << ", diff " << d << "); ";
        }
    };
    for (const char* name : {"dc_3", "dc_14", "linear_rect_3", "linear_rect_14"}) {
        const auto s = scenario(name, false);
        const auto f = std::string(name).rfind("dc", 0) == 0 ? Formulation::Dc : Formulation::LinearRect;
        check(name, assemble_problem(s.net, s.set, f));
    }
    // Polar PMU voltages only: linear in (theta, V).
    const auto net = net14();
    ScenarioSpec spec;
    spec.v_min = 0.95;
    spec.v_max = 1.05;
    spec.theta_min = -0.2;
    spec.theta_max = 0.2;
    spec.seed = 31;
    spec.noise_stddev = {{K::VMagPmu, 0.002}, {K::VAngPmu, 0.001}, {K::VMag, 0.004}};
    for (int bus = 1; bus <= 14; ++bus) {
        spec.placements.push_back({K::VMagPmu, {bus}});
        spec.placements.push_back({K::VAngPmu, {bus}});
        if (bus % 3 == 0) spec.placements.push_back({K::VMag, {bus}});
    }
    const auto truth = sample_true_state(net, spec);
    check("pmu_voltages_14", assemble_problem(net, synthesize(net, spec, truth), Formulation::SimultaneousPolar));
    detail << runs << " linear problems, worst GN vs linear_wls difference " << fmt("%.2e", worst);
    out.detail = detail.str();
    return out;
}

Outcome identities() {
    Outcome out;
    std::mt19937_64 rng(404);
    double w_mag = 0.0, w_phasor = 0.0, w_kcl = 0.0;
    for (const auto& net : {net3(), net14()}) {
        const auto y = assemble_admittance(net);
        for (int trial = 0; trial < 100; ++trial) {
            const auto x = oracle::random_polar(rng, net);
            for (const auto& m : oracle::all_locations(net, K::IMag)) {
                const auto end = net.find_end(m.at.bus, m.at.to, m.at.circuit);
                const double p = h_p_flow(net, end, x).value(), q = h_q_flow(net, end, x).value();
                const double vi = x.magnitude(static_cast<std::size_t>(m.at.bus - 1));
                w_mag = std::max(w_mag, std::abs(h_i_mag(net, end, x).value() - std::sqrt(p * p + q * q) / vi));
                const double mag = h_i_mag(net, end, x).value(), ang = h_i_ang(net, end, x).value();
                w_phasor = std::max(w_phasor, std::abs(mag * std::cos(ang) - h_i_re_polarstate(net, end, x).value()));
                w_phasor = std::max(w_phasor, std::abs(mag * std::sin(ang) - h_i_im_polarstate(net, end, x).value()));
            }
            for (std::size_t i = 0; i < net.bus_count(); ++i) {
                const double v2 = x.magnitude(i) * x.magnitude(i);
                double p = net.bus(i).shunt_g * v2, q = -net.bus(i).shunt_b * v2;
                for (std::size_t k : net.incident(i)) {
                    const BranchEnd end{k, static_cast<std::size_t>(net.branch(k).from_bus - 1) == i};
                    p += h_p_flow(net, end, x).value();
                    q += h_q_flow(net, end, x).value();
                }
                w_kcl = std::max(w_kcl, std::abs(h_p_inj(y, i, x).value() - p));
                w_kcl = std::max(w_kcl, std::abs(h_q_inj(y, i, x).value() - q));
            }
        }
    }
    out.pass = w_mag <= 1e-10 && w_phasor <= 1e-10 && w_kcl <= 1e-10;
    out.detail = "current magnitude " + fmt("%.2e", w_mag) + ", polar/rect phasor " + fmt("%.2e", w_phasor) +
                 ", Kirchhoff " + fmt("%.2e", w_kcl) + " over 100 states x 2 fixtures";
    return out;
}

Outcome admittance_properties() {
    Outcome out;
    std::mt19937_64 rng(505);
    double worst_sum = 0.0;
    int nets = 0;
    for (std::size_t n : {2u, 3u, 5u, 14u, 30u, 57u, 118u, 200u}) {
        for (bool zero_shunts : {true, false}) {
            const auto net = oracle::random_network(rng, n, zero_shunts);
            const auto y = assemble_admittance(net);
            ++nets;
            std::vector<std::vector<bool>> linked(n, std::vector<bool>(n, false));
            for (const auto& br : net.branches()) {
                linked[br.from_bus - 1][br.to_bus - 1] = linked[br.to_bus - 1][br.from_bus - 1] = true;
            }
            std::size_t expected_nnz = n;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) expected_nnz += (i != j && linked[i][j]) ? 1 : 0;
            }
            if (y.nonzeros() != expected_nnz) out.pass = false;
            for (std::size_t i = 0; i < n; ++i) {
                Complex sum = 0.0;
                double scale = 0.0;
                y.for_each_in_row(i, [&](std::size_t j, Complex v) {
                    sum += v;
                    scale += std::abs(v);
                    if (v != y(j, i)) out.pass = false;
                    if (j != i && !linked[i][j]) out.pass = false;
                });
                for (std::size_t j = 0; j < n; ++j) {
                    if (j != i && linked[i][j] && y(i, j) == Complex(0.0)) out.pass = false;
                }
                if (zero_shunts) {
                    worst_sum = std::max(worst_sum, std::abs(sum) / scale);
                    if (std::abs(sum) > 1e-13 * scale) out.pass = false;
                }
            }
        }
    }
    out.detail = std::to_string(nets) + " random networks up to N=200, exact symmetry, pattern = incidence, " +
                 "worst relative row sum " + fmt("%.2e", worst_sum);
    return out;
}

Outcome dc_fidelity() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> half(-5e-4, 5e-4);
    double worst = 0.0, max_angle = 0.0;
    for (const auto& base : {net3(), net14()}) {
        // Lossless copy: r = 0 and no shunts.
        auto buses = base.buses();
        for (auto& b : buses) b.shunt_g = b.shunt_b = 0.0;
        auto branches = base.branches();
        for (auto& br : branches) {
            br.r = 0.0;
            br.gs_from = br.bs_from = br.gs_to = br.bs_to = 0.0;
        }
        const NetworkModel net(buses, branches);
        const std::size_t n = net.bus_count();
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> values(2 * n, 1.0);
            for (std::size_t i = 0; i < n; ++i) values[i] = i == net.slack_index() ? 0.0 : half(rng);
            const StateVector x(Coordinates::Polar, values, net.slack_index(), 0.0);
            for (std::size_t k = 0; k < net.branch_count(); ++k) {
                for (bool from : {true, false}) {
                    const BranchEnd end{k, from};
                    const double ac = h_p_flow(net, end, x).value(), dc = h_p_flow_dc(net, end, x).value();
                    worst = std::max(worst, std::abs(ac - dc));
                }
                const auto& br = net.branch(k);
                max_angle = std::max(max_angle, std::abs(x.angle(br.from_bus - 1) - x.angle(br.to_bus - 1)));
            }
        }
    }
    Outcome out;
    out.pass = worst <= 5e-7 && max_angle <= 1e-3;
    out.detail = "worst |P_ac - P_dc| " + fmt("%.2e", worst) + " with |theta_ij| <= " + fmt("%.2e", max_angle);
    return out;
}

// Gradient of the WLS objective, H^T R^{-1} (z - H x), in long double, on the
// free columns of a linear problem.
std::vector<long double> orthogonality(const EstimationProblem& problem, const Eigen::SparseMatrix<double>& h,
                                       const StateVector& x) {
    const Eigen::MatrixXd hd = Eigen::MatrixXd(h);
    const Eigen::MatrixXd rinv = Eigen::MatrixXd(problem.covariance().inverse(false));
    const auto z = problem.measured_values();
    const auto m = hd.rows(), cols = hd.cols();
    std::vector<long double> r(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        long double acc = z[i];
        for (Eigen::Index c = 0; c < cols; ++c) acc -= static_cast<long double>(hd(i, c)) * x[static_cast<std::size_t>(c)];
        r[static_cast<std::size_t>(i)] = acc;
    }
    std::vector<long double> wr(static_cast<std::size_t>(m), 0.0L);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (rinv(i, j) != 0.0) wr[static_cast<std::size_t>(i)] += static_cast<long double>(rinv(i, j)) * r[static_cast<std::size_t>(j)];
        }
    }
    std::vector<long double> g;
    for (std::size_t c : problem.free_variables()) {
        long double acc = 0.0L;
        for (Eigen::Index i = 0; i < m; ++i) acc += static_cast<long double>(hd(i, static_cast<Eigen::Index>(c))) * wr[static_cast<std::size_t>(i)];
        g.push_back(acc);
    }
    return g;
}

Eigen::SparseMatrix<double> linear_jacobian(const NetworkModel& net, const MeasurementSet& set, Formulation f) {
    return f == Formulation::Dc ? dc_rows(net, set).jacobian : linear_rows_rectstate(net, set).jacobian;
}

Outcome wls_optimality() {
    Outcome out;
    std::ostringstream detail;

    // Dense 2x2 hand solve.
    std::vector<Eigen::Triplet<double>> t{{0, 0, 1.0}, {1, 1, 2.0}, {2, 0, 1.0}, {2, 1, -1.0}};
    Eigen::SparseMatrix<double> h(3, 2);
    h.setFromTriplets(t.begin(), t.end());
    const CovarianceModel r({0.5, 1.0, 2.0});
    Eigen::VectorXd z(3);
    z << 0.3, -0.4, 0.9;
    const long double w0 = 2.0L, w1 = 1.0L, w2 = 0.5L;
    const long double g00 = w0 + w2, g01 = -w2, g11 = 4 * w1 + w2;
    const long double b0 = w0 * 0.3L + w2 * 0.9L, b1 = 2 * w1 * -0.4L - w2 * 0.9L;
    const long double det = g00 * g11 - g01 * g01;
    const long double x0 = (g11 * b0 - g01 * b1) / det, x1 = (g00 * b1 - g01 * b0) / det;
    double hand = 0.0;
    for (auto method : {LinearSystemMethod::NormalEquations, LinearSystemMethod::Orthogonal}) {
        const auto x = solve_weighted_least_squares(h, r, z, method);
        hand = std::max({hand, static_cast<double>(std::abs(x[0] - x0)), static_cast<double>(std::abs(x[1] - x1))});
        // Orthogonality on the tiny problem, long double.
        const long double r0 = 0.3L - x[0], r1 = -0.4L - 2.0L * x[1], r2 = 0.9L - x[0] + x[1];
        const long double ga = w0 * r0 + w2 * r2, gb = 2.0L * w1 * r1 - w2 * r2;
        if (std::abs(ga) > 1e-10L || std::abs(gb) > 1e-10L) out.pass = false;
    }
    if (hand > 1e-12) out.pass = false;
    detail << "hand solve diff " << fmt("%.2e", hand);

    // Fixture linear problems.
    double unit_worst = 0.0, scaled_worst = 0.0, raw_worst = 0.0;
    for (const char* name : {"dc_3", "dc_14", "linear_rect_3", "linear_rect_14"}) {
        const auto s = scenario(name, false);
        const auto f = std::string(name).rfind("dc", 0) == 0 ? Formulation::Dc : Formulation::LinearRect;
        const auto hj = linear_jacobian(s.net, s.set, f);

        // Unit weights: absolute bound.
        MeasurementSet unit;
        for (auto m : s.set) {
            m.variance = 1.0;
            m.covariance.reset();
            unit.add(m);
        }
        const auto pu = assemble_problem(s.net, unit, f);
        for (auto method : {LinearSystemMethod::NormalEquations, LinearSystemMethod::Orthogonal}) {
            SolverConfig cfg;
            cfg.method = method;
            for (long double g : orthogonality(pu, hj, linear_wls(pu, cfg).x_hat)) {
                unit_worst = std::max(unit_worst, static_cast<double>(std::abs(g)));
            }
        }

        // Realistic weights: bound relative to |G| |x|.
        const auto pr = assemble_problem(s.net, s.set, f);
        const auto xr = linear_wls(pr).x_hat;
        const Eigen::MatrixXd hd = Eigen::MatrixXd(hj);
        const Eigen::MatrixXd gain = hd.transpose() * Eigen::MatrixXd(pr.covariance().inverse(false)) * hd;
        double xmax = 0.0;
        for (std::size_t c : pr.free_variables()) xmax = std::max(xmax, std::abs(xr[c]));
        const double scale = std::max(1.0, gain.cwiseAbs().rowwise().sum().maxCoeff() * xmax);
        for (long double g : orthogonality(pr, hj, xr)) {
            raw_worst = std::max(raw_worst, static_cast<double>(std::abs(g)));
            scaled_worst = std::max(scaled_worst, static_cast<double>(std::abs(g)) / scale);
        }
    }
    if (unit_worst > 1e-10 || scaled_worst > 1e-10) out.pass = false;
    detail << "; unit-weight fixtures |H^T R^-1 r| " << fmt("%.2e", unit_worst)
           << "; realistic weights |H^T R^-1 r| " << fmt("%.2e", raw_worst) << " (relative to |G||x| "
           << fmt("%.2e", scaled_worst) << ")";
    out.detail = detail.str();
    return out;
}

Outcome covariance_transformation() {
    struct Point {
        double mag, ang, vm, va;
    };
    const Point points[] = {{2.0, std::numbers::pi / 4, 1e-4, 1e-4},
                            {1.0, -std::numbers::pi / 3, 1e-4, 4e-4},
                            {1.05, 2.0, 4e-6, 1e-6}};
    std::mt19937_64 rng(808);
    Outcome out;
    double worst = 0.0;
    for (const auto& p : points) {
        std::normal_distribution<double> em(0.0, std::sqrt(p.vm)), ea(0.0, std::sqrt(p.va));
        const int n = 1000000;
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int s = 0; s < n; ++s) {
            const double m = p.mag + em(rng), a = p.ang + ea(rng);
            const double x = m * std::cos(a), y = m * std::sin(a);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
        }
        const double mx = sx / n, my = sy / n;
        const double cxx = sxx / n - mx * mx, cyy = syy / n - my * my, cxy = sxy / n - mx * my;
        const auto r = polar_to_rect_variance(p.mag, p.vm, p.ang, p.va);
        for (auto [got, want] : {std::pair{cxx, r.var_re}, std::pair{cyy, r.var_im}, std::pair{cxy, r.cov_re_im}}) {
            const double rel = std::abs(got - want) / std::abs(want);
            worst = std::max(worst, rel);
            if (rel > 0.03) out.pass = false;
        }
    }
    out.detail = "3 operating points x 1e6 samples, worst relative entry error " + fmt("%.2e", worst);
    return out;
}

Outcome chi_square() {
    Outcome out;
    std::ostringstream detail;
    for (const char* name : {"conventional_14", "simultaneous_rect_14"}) {
        auto file = load_scenario(fixture(std::string("scenario_") + name + ".json"));
        const auto net = load_network(*file.network);
        const auto f = std::string(name).rfind("conv", 0) == 0 ? Formulation::Conventional
                                                               : Formulation::SimultaneousRect;
        const int runs = 400;
        double total = 0.0;
        std::size_t m = 0;
        for (int run = 0; run < runs; ++run) {
            file.spec.seed = 90000 + static_cast<std::uint64_t>(run);
            const auto truth = sample_true_state(net, file.spec);
            const auto problem = assemble_problem(net, synthesize(net, file.spec, truth), f);
            total += objective(problem, truth);
            m = problem.row_count();
        }
        const double mean = total / runs;
        const double rel = std::abs(mean - static_cast<double>(m)) / static_cast<double>(m);
        if (rel > 0.10) out.pass = false;
        detail << name << " mean J(x_true) " << fmt("%.2f", mean) << " vs m=" << m << " over " << runs << " runs; ";
    }
    out.detail = detail.str();
    out.detail.resize(out.detail.size() - 2);
    return out;
}

Outcome convergence_rate() {
    Outcome out;
    std::ostringstream detail;
    for (const char* name : {"conventional_3", "conventional_14"}) {
        const auto s = scenario(name, true);
        const auto problem = assemble_problem(s.net, s.set, Formulation::Conventional);
        const auto result = gauss_newton(problem, problem.flat_start());
        const auto& st = result.max_step_trace;
        if (!result.converged || st.size() < 3) {
            out.pass = false;
            detail << name << " did not produce three steps; ";
            continue;
        }
        const std::size_t n = st.size();
        const double r1 = st[n - 2] / st[n - 3], r2 = st[n - 1] / st[n - 2];
        if (!(r1 < 0.1 && r2 < 0.1)) out.pass = false;
        detail << name << " ratios " << fmt("%.2e", r1) << ", " << fmt("%.2e", r2) << "; ";
    }
    out.detail = detail.str();
    out.detail.resize(out.detail.size() - 2);
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {"jacobian battery", jacobian_battery},
        {"zero-noise recovery", zero_noise_recovery},
        {"linear exactness", linear_exactness},
        {"identity cross-checks", identities},
        {"admittance properties", admittance_properties},
        {"DC linearization fidelity", dc_fidelity},
        {"WLS optimality", wls_optimality},
        {"covariance transformation", covariance_transformation},
        {"chi-square sanity", chi_square},
        {"convergence rate", convergence_rate},
    };
    int failed = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::printf("criterion %d %s: %s (%s)\n", index, o.pass ? "PASS" : "FAIL", c.name, o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", index - failed, index);
    return failed == 0 ? 0 : 1;
}
