#include "pse/problem.hpp"

#include <cmath>
#include <map>
#include <tuple>

namespace pse {

std::string_view tag(Formulation f) {
    switch (f) {
        case Formulation::Conventional: return "conventional";
        case Formulation::SimultaneousPolar: return "simultaneous-polar";
        case Formulation::SimultaneousRect: return "simultaneous-rect";
        case Formulation::LinearRect: return "linear-rect";
        case Formulation::Dc: return "dc";
    }
    return "?";
}

Formulation formulation_from_tag(std::string_view name) {
    for (auto f : {Formulation::Conventional, Formulation::SimultaneousPolar, Formulation::SimultaneousRect,
                   Formulation::LinearRect, Formulation::Dc}) {
        if (tag(f) == name) return f;
    }
    throw Error(ErrorCode::InvalidInput,
                "unknown formulation '" + std::string(name) +
                    "' (expected conventional, simultaneous-polar, simultaneous-rect, linear-rect or dc)");
}

bool admits(Formulation f, MeasurementKind kind) {
    const auto fam = family(kind);
    switch (f) {
        case Formulation::Conventional: return fam == KindFamily::Legacy;
        case Formulation::SimultaneousPolar: return fam == KindFamily::Legacy || fam == KindFamily::PhasorPolar;
        case Formulation::SimultaneousRect:
            return fam == KindFamily::Legacy || fam == KindFamily::PhasorRectangular;
        case Formulation::LinearRect: return fam == KindFamily::PhasorRectangular;
        case Formulation::Dc: return fam == KindFamily::Dc;
    }
    return false;
}

bool is_linear_formulation(Formulation f) { return f == Formulation::LinearRect || f == Formulation::Dc; }

// ---------------------------------------------------------------------------

CovarianceModel::CovarianceModel(std::vector<double> variances, std::vector<Block> blocks)
    : variances_(std::move(variances)), blocks_(std::move(blocks)), block_of_row_(variances_.size()) {
    for (std::size_t k = 0; k < variances_.size(); ++k) {
        if (!(variances_[k] > 0.0)) {
            throw Error(ErrorCode::NonPositiveVariance, "row " + std::to_string(k + 1) + " has non-positive variance");
        }
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const auto& blk = blocks_[b];
        if (blk.first >= variances_.size() || blk.second >= variances_.size() || blk.first == blk.second ||
            block_of_row_[blk.first] || block_of_row_[blk.second]) {
            throw Error(ErrorCode::InvalidMeasurement, "malformed covariance block");
        }
        const double det = variances_[blk.first] * variances_[blk.second] - blk.covariance * blk.covariance;
        if (!(det > 0.0)) {
            throw Error(ErrorCode::InvalidMeasurement, "covariance block on rows " + std::to_string(blk.first + 1) +
                                                           "/" + std::to_string(blk.second + 1) +
                                                           " is not positive definite");
        }
        block_of_row_[blk.first] = b;
        block_of_row_[blk.second] = b;
    }
}

namespace {

bool row_active(const std::vector<bool>& active, std::size_t k) { return active.empty() || active[k]; }

}  // namespace

Eigen::SparseMatrix<double> CovarianceModel::inverse(bool neglect_blocks, const std::vector<bool>& active) const {
    const auto m = static_cast<Eigen::Index>(variances_.size());
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(variances_.size() + 2 * blocks_.size());
    for (std::size_t k = 0; k < variances_.size(); ++k) {
        if (!row_active(active, k)) continue;
        const auto kk = static_cast<Eigen::Index>(k);
        if (neglect_blocks || !block_of_row_[k]) {
            entries.emplace_back(kk, kk, 1.0 / variances_[k]);
            continue;
        }
        const auto& blk = blocks_[*block_of_row_[k]];
        const std::size_t other = blk.first == k ? blk.second : blk.first;
        if (!row_active(active, other)) {
            entries.emplace_back(kk, kk, 1.0 / variances_[k]);
            continue;
        }
        const double det = variances_[blk.first] * variances_[blk.second] - blk.covariance * blk.covariance;
        entries.emplace_back(kk, kk, variances_[other] / det);
        entries.emplace_back(kk, static_cast<Eigen::Index>(other), -blk.covariance / det);
    }
    Eigen::SparseMatrix<double> w(m, m);
    w.setFromTriplets(entries.begin(), entries.end());
    return w;
}

Eigen::SparseMatrix<double> CovarianceModel::whitening(bool neglect_blocks, const std::vector<bool>& active) const {
    const auto m = static_cast<Eigen::Index>(variances_.size());
    std::vector<Eigen::Triplet<double>> entries;
    for (std::size_t k = 0; k < variances_.size(); ++k) {
        if (!row_active(active, k)) continue;
        const auto kk = static_cast<Eigen::Index>(k);
        const bool blocked = !neglect_blocks && block_of_row_[k];
        const CovarianceModel::Block* blk = blocked ? &blocks_[*block_of_row_[k]] : nullptr;
        if (!blk || !row_active(active, blk->first) || !row_active(active, blk->second)) {
            entries.emplace_back(kk, kk, 1.0 / std::sqrt(variances_[k]));
            continue;
        }
        if (k != blk->first) continue;  // handled with the first row of the block
        // R = L L^T, W = L^{-1}.
        const double l11 = std::sqrt(variances_[blk->first]);
        const double l21 = blk->covariance / l11;
        const double l22 = std::sqrt(variances_[blk->second] - l21 * l21);
        const auto a = static_cast<Eigen::Index>(blk->first);
        const auto b = static_cast<Eigen::Index>(blk->second);
        entries.emplace_back(a, a, 1.0 / l11);
        entries.emplace_back(b, a, -l21 / (l11 * l22));
        entries.emplace_back(b, b, 1.0 / l22);
    }
    Eigen::SparseMatrix<double> w(m, m);
    w.setFromTriplets(entries.begin(), entries.end());
    return w;
}

double CovarianceModel::weighted_norm(const Eigen::VectorXd& residual, bool neglect_blocks) const {
    if (static_cast<std::size_t>(residual.size()) != variances_.size()) {
        throw Error(ErrorCode::DimensionMismatch, "residual length does not match covariance size");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < variances_.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (neglect_blocks || !block_of_row_[k]) {
            total += residual[kk] * residual[kk] / variances_[k];
            continue;
        }
        const auto& blk = blocks_[*block_of_row_[k]];
        if (k != blk.first) continue;
        const double ra = residual[static_cast<Eigen::Index>(blk.first)];
        const double rb = residual[static_cast<Eigen::Index>(blk.second)];
        const double va = variances_[blk.first];
        const double vb = variances_[blk.second];
        const double c = blk.covariance;
        total += (vb * ra * ra - 2.0 * c * ra * rb + va * rb * rb) / (va * vb - c * c);
    }
    return total;
}

Eigen::MatrixXd CovarianceModel::dense(bool neglect_blocks) const {
    const auto m = static_cast<Eigen::Index>(variances_.size());
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < variances_.size(); ++k) {
        r(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) = variances_[k];
    }
    if (!neglect_blocks) {
        for (const auto& blk : blocks_) {
            const auto a = static_cast<Eigen::Index>(blk.first);
            const auto b = static_cast<Eigen::Index>(blk.second);
            r(a, b) = blk.covariance;
            r(b, a) = blk.covariance;
        }
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

bool linear_in_polar(MeasurementKind kind) {
    switch (kind) {
        case MeasurementKind::VMag:
        case MeasurementKind::VMagPmu:
        case MeasurementKind::VAngPmu:
        case MeasurementKind::Theta:
        case MeasurementKind::PFlowDc:
        case MeasurementKind::PInjDc: return true;
        default: return false;
    }
}

CovarianceModel build_covariance(const MeasurementSet& set) {
    std::vector<double> variances;
    variances.reserve(set.size());
    for (const auto& m : set) variances.push_back(m.variance);

    // Pair each real-part row that carries a covariance with the imaginary-part
    // row at the same location.
    using Key = std::tuple<int, int, int, int>;  // kind, bus, to, circuit
    auto key_of = [](MeasurementKind kind, const Location& at) {
        return Key{static_cast<int>(kind), at.bus, at.to, at.circuit};
    };
    std::map<Key, std::vector<std::size_t>> by_key;
    for (std::size_t k = 0; k < set.size(); ++k) by_key[key_of(set[k].kind, set[k].at)].push_back(k);

    std::vector<CovarianceModel::Block> blocks;
    std::vector<bool> used(set.size(), false);
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& m = set[k];
        if (!m.covariance || used[k]) continue;
        const auto partner_kind = *rectangular_partner(m.kind);
        const std::string where = std::string(tag(m.kind)) + " at " + describe(m.at);
        auto it = by_key.find(key_of(partner_kind, m.at));
        std::size_t partner = set.size();
        if (it != by_key.end()) {
            for (std::size_t candidate : it->second) {
                if (!used[candidate]) {
                    partner = candidate;
                    break;
                }
            }
        }
        if (partner == set.size()) {
            throw Error(ErrorCode::InvalidMeasurement,
                        where + " carries a covariance but has no " + std::string(tag(partner_kind)) + " partner");
        }
        const auto& other = set[partner];
        if (!other.covariance || *other.covariance != *m.covariance) {
            throw Error(ErrorCode::InvalidMeasurement,
                        where + " and its partner disagree on the shared covariance");
        }
        used[k] = used[partner] = true;
        const bool real_first = m.kind == MeasurementKind::VRe || m.kind == MeasurementKind::IRe;
        blocks.push_back({real_first ? k : partner, real_first ? partner : k, *m.covariance});
    }
    return CovarianceModel(std::move(variances), std::move(blocks));
}

}  // namespace

EstimationProblem::EstimationProblem(NetworkModel net, MeasurementSet set, Formulation formulation)
    : net_(std::move(net)), set_(std::move(set)), formulation_(formulation) {
    if (set_.empty()) throw Error(ErrorCode::EmptyMeasurementSet, "measurement set is empty");
    for (std::size_t k = 0; k < set_.size(); ++k) {
        if (!admits(formulation_, set_[k].kind)) {
            throw Error(ErrorCode::UnsupportedKind, "measurement #" + std::to_string(k + 1) + " (" +
                                                        std::string(tag(set_[k].kind)) +
                                                        ") is not admissible in the " +
                                                        std::string(tag(formulation_)) + " formulation");
        }
    }
    set_.validate(net_);
    y_ = assemble_admittance(net_);
    covariance_ = build_covariance(set_);

    ends_.resize(set_.size());
    for (std::size_t k = 0; k < set_.size(); ++k) {
        const auto& m = set_[k];
        if (is_branch_kind(m.kind)) ends_[k] = net_.find_end(m.at.bus, m.at.to, m.at.circuit);
    }

    const std::size_t n = net_.bus_count();
    const auto x0 = flat_start();
    const std::size_t fixed = x0.slack_entry();
    const std::size_t last = formulation_ == Formulation::Dc ? n : 2 * n;
    for (std::size_t k = 0; k < last; ++k) {
        if (k != fixed) free_.push_back(k);
    }

    linear_ = true;
    if (coordinates() == Coordinates::Polar) {
        for (const auto& m : set_) linear_ = linear_ && linear_in_polar(m.kind);
    }
}

StateVector EstimationProblem::flat_start() const {
    const auto coords = coordinates();
    const double slack_value = coords == Coordinates::Polar ? net_.slack_angle() : net_.slack_imag();
    return StateVector::flat(coords, net_.bus_count(), net_.slack_index(), slack_value);
}

Eigen::VectorXd EstimationProblem::measured_values() const {
    Eigen::VectorXd z(static_cast<Eigen::Index>(set_.size()));
    for (std::size_t k = 0; k < set_.size(); ++k) z[static_cast<Eigen::Index>(k)] = set_[k].value;
    return z;
}

FunctionRow EstimationProblem::evaluate(std::size_t row, const StateVector& x) const {
    if (x.coordinates() != coordinates() || x.bus_count() != net_.bus_count()) {
        throw Error(ErrorCode::DimensionMismatch, "state does not match the problem layout");
    }
    const auto& m = set_[row];
    const std::size_t bus = static_cast<std::size_t>(m.at.bus - 1);
    const auto end = ends_[row];
    if (coordinates() == Coordinates::Rectangular) {
        switch (m.kind) {
            case MeasurementKind::VRe: return h_v_re_rectstate(bus, x);
            case MeasurementKind::VIm: return h_v_im_rectstate(bus, x);
            case MeasurementKind::IRe: return h_i_re_rectstate(net_, end, x);
            case MeasurementKind::IIm: return h_i_im_rectstate(net_, end, x);
            default: break;
        }
        throw Error(ErrorCode::UnsupportedKind, "non-rectangular row in a rectangular-state problem");
    }
    switch (m.kind) {
        case MeasurementKind::PFlow: return h_p_flow(net_, end, x);
        case MeasurementKind::QFlow: return h_q_flow(net_, end, x);
        case MeasurementKind::IMag:
        case MeasurementKind::IMagPmu: return h_i_mag(net_, end, x);
        case MeasurementKind::IAngPmu: return h_i_ang(net_, end, x);
        case MeasurementKind::PInj: return h_p_inj(y_, bus, x);
        case MeasurementKind::QInj: return h_q_inj(y_, bus, x);
        case MeasurementKind::VMag:
        case MeasurementKind::VMagPmu: return h_v_mag(bus, x);
        case MeasurementKind::VAngPmu:
        case MeasurementKind::Theta: return h_v_ang(bus, x);
        case MeasurementKind::VRe: return h_v_re_polarstate(bus, x);
        case MeasurementKind::VIm: return h_v_im_polarstate(bus, x);
        case MeasurementKind::IRe: return h_i_re_polarstate(net_, end, x);
        case MeasurementKind::IIm: return h_i_im_polarstate(net_, end, x);
        case MeasurementKind::PFlowDc: return h_p_flow_dc(net_, end, x);
        case MeasurementKind::PInjDc: return h_p_inj_dc(net_, bus, x);
    }
    throw Error(ErrorCode::UnsupportedKind, "unhandled measurement kind");
}

Eigen::VectorXd EstimationProblem::residuals(const StateVector& x) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(set_.size()));
    for (std::size_t k = 0; k < set_.size(); ++k) {
        double diff = set_[k].value - evaluate(k, x).value();
        if (is_angle_kind(set_[k].kind)) diff = wrap_angle(diff);
        r[static_cast<Eigen::Index>(k)] = diff;
    }
    return r;
}

EstimationProblem assemble_problem(const NetworkModel& net, const MeasurementSet& set, Formulation formulation) {
    return EstimationProblem(net, set, formulation);
}

double objective(const EstimationProblem& problem, const StateVector& x, bool neglect_phasor_covariance) {
    return problem.covariance().weighted_norm(problem.residuals(x), neglect_phasor_covariance);
}

}  // namespace pse
