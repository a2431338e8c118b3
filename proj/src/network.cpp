#include "pse/network.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace pse {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::ZeroImpedance: return "ZeroImpedance";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ZeroMagnitude: return "ZeroMagnitude";
        case ErrorCode::NonPositiveVariance: return "NonPositiveVariance";
        case ErrorCode::FlatStartSingularity: return "FlatStartSingularity";
        case ErrorCode::UnsupportedKind: return "UnsupportedKind";
        case ErrorCode::EmptyMeasurementSet: return "EmptyMeasurementSet";
        case ErrorCode::SingularGain: return "SingularGain";
        case ErrorCode::InvalidNetwork: return "InvalidNetwork";
        case ErrorCode::InvalidMeasurement: return "InvalidMeasurement";
        case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

SeriesAdmittance branch_admittance(double r, double x) {
    const double denom = r * r + x * x;
    if (denom == 0.0) {
        throw Error(ErrorCode::ZeroImpedance, "branch series impedance is zero");
    }
    return {r / denom, -x / denom};
}

namespace {

class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

  private:
    std::vector<std::size_t> parent_;
};

}  // namespace

bool is_connected(std::size_t bus_count, std::span<const Branch> branches) {
    if (bus_count == 0) return false;
    DisjointSets sets(bus_count);
    std::size_t components = bus_count;
    for (const auto& br : branches) {
        if (sets.unite(static_cast<std::size_t>(br.from_bus - 1), static_cast<std::size_t>(br.to_bus - 1))) {
            --components;
        }
    }
    return components == 1;
}

NetworkModel::NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, double base_mva,
                           double slack_angle, double slack_imag)
    : buses_(std::move(buses)),
      branches_(std::move(branches)),
      base_mva_(base_mva),
      slack_angle_(slack_angle),
      slack_imag_(slack_imag) {
    const std::size_t n = buses_.size();
    if (n == 0) throw Error(ErrorCode::InvalidNetwork, "network has no buses");

    std::sort(buses_.begin(), buses_.end(), [](const Bus& a, const Bus& b) { return a.id < b.id; });
    std::size_t slack_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (buses_[k].id != static_cast<int>(k + 1)) {
            std::ostringstream msg;
            msg << "bus ids must be exactly 1.." << n << " without duplicates (found id " << buses_[k].id << ")";
            throw Error(ErrorCode::InvalidNetwork, msg.str());
        }
        if (buses_[k].is_slack) {
            slack_ = k;
            ++slack_count;
        }
    }
    if (slack_count != 1) {
        throw Error(ErrorCode::InvalidNetwork,
                    "exactly one slack bus required (found " + std::to_string(slack_count) + ")");
    }

    incident_.assign(n, {});
    series_.reserve(branches_.size());
    for (std::size_t k = 0; k < branches_.size(); ++k) {
        const auto& br = branches_[k];
        if (!has_bus(br.from_bus) || !has_bus(br.to_bus)) {
            throw Error(ErrorCode::InvalidNetwork,
                        "branch " + std::to_string(k + 1) + " references a missing bus");
        }
        if (br.from_bus == br.to_bus) {
            throw Error(ErrorCode::InvalidNetwork,
                        "branch " + std::to_string(k + 1) + " connects bus " + std::to_string(br.from_bus) +
                            " to itself");
        }
        try {
            series_.push_back(branch_admittance(br.r, br.x));
        } catch (const Error&) {
            throw Error(ErrorCode::ZeroImpedance, "branch " + std::to_string(k + 1) + " (" +
                                                      std::to_string(br.from_bus) + "-" +
                                                      std::to_string(br.to_bus) + ") has r = x = 0");
        }
        incident_[static_cast<std::size_t>(br.from_bus - 1)].push_back(k);
        incident_[static_cast<std::size_t>(br.to_bus - 1)].push_back(k);
    }

    if (!is_connected(n, branches_)) {
        throw Error(ErrorCode::InvalidNetwork, "network not connected");
    }
}

bool NetworkModel::has_bus(int bus_id) const noexcept {
    return bus_id >= 1 && static_cast<std::size_t>(bus_id) <= buses_.size();
}

std::size_t NetworkModel::index_of(int bus_id) const {
    if (!has_bus(bus_id)) throw Error(ErrorCode::InvalidInput, "unknown bus id " + std::to_string(bus_id));
    return static_cast<std::size_t>(bus_id - 1);
}

std::vector<std::size_t> NetworkModel::branches_between(int from_id, int to_id) const {
    std::vector<std::size_t> out;
    if (!has_bus(from_id) || !has_bus(to_id)) return out;
    for (std::size_t k : incident_[static_cast<std::size_t>(from_id - 1)]) {
        const auto& br = branches_[k];
        if ((br.from_bus == from_id && br.to_bus == to_id) || (br.from_bus == to_id && br.to_bus == from_id)) {
            out.push_back(k);
        }
    }
    return out;
}

BranchEnd NetworkModel::find_end(int from_id, int to_id, int circuit) const {
    const auto candidates = branches_between(from_id, to_id);
    const std::string pair = std::to_string(from_id) + "-" + std::to_string(to_id);
    if (candidates.empty()) {
        throw Error(ErrorCode::InvalidMeasurement, "no branch between buses " + pair);
    }
    std::size_t pick = 0;
    if (circuit == 0) {
        if (candidates.size() > 1) {
            throw Error(ErrorCode::InvalidMeasurement,
                        "buses " + pair + " are joined by parallel branches; a circuit number is required");
        }
    } else {
        if (circuit < 0 || static_cast<std::size_t>(circuit) > candidates.size()) {
            throw Error(ErrorCode::InvalidMeasurement,
                        "circuit " + std::to_string(circuit) + " does not exist between buses " + pair);
        }
        pick = static_cast<std::size_t>(circuit - 1);
    }
    const std::size_t k = candidates[pick];
    return {k, branches_[k].from_bus == from_id};
}

EndParameters NetworkModel::end_parameters(BranchEnd end) const {
    const auto& br = branches_.at(end.branch);
    const auto y = series_[end.branch];
    EndParameters p;
    p.g = y.g;
    p.b = y.b;
    if (end.from_side) {
        p.i = static_cast<std::size_t>(br.from_bus - 1);
        p.j = static_cast<std::size_t>(br.to_bus - 1);
        p.gs = br.gs_from;
        p.bs = br.bs_from;
    } else {
        p.i = static_cast<std::size_t>(br.to_bus - 1);
        p.j = static_cast<std::size_t>(br.from_bus - 1);
        p.gs = br.gs_to;
        p.bs = br.bs_to;
    }
    return p;
}

AdmittanceMatrix assemble_admittance(const NetworkModel& net) {
    using Triplet = Eigen::Triplet<Complex>;
    std::vector<Triplet> entries;
    entries.reserve(4 * net.branch_count() + net.bus_count());
    for (std::size_t k = 0; k < net.branch_count(); ++k) {
        const auto& br = net.branch(k);
        const auto s = branch_admittance(br.r, br.x);
        const Complex y(s.g, s.b);
        const auto i = static_cast<Eigen::Index>(br.from_bus - 1);
        const auto j = static_cast<Eigen::Index>(br.to_bus - 1);
        entries.emplace_back(i, i, y + Complex(br.gs_from, br.bs_from));
        entries.emplace_back(j, j, y + Complex(br.gs_to, br.bs_to));
        entries.emplace_back(i, j, -y);
        entries.emplace_back(j, i, -y);
    }
    // Bus shunts go on the diagonal after the branch terms.
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const auto& bus = net.bus(i);
        const auto ii = static_cast<Eigen::Index>(i);
        entries.emplace_back(ii, ii, Complex(bus.shunt_g, bus.shunt_b));
    }
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    AdmittanceMatrix::Storage y(n, n);
    y.setFromTriplets(entries.begin(), entries.end());
    y.makeCompressed();
    return AdmittanceMatrix(std::move(y));
}

std::vector<Complex> injected_current(const NetworkModel& net, std::span<const Complex> v) {
    if (v.size() != net.bus_count()) {
        throw Error(ErrorCode::DimensionMismatch, "voltage vector has " + std::to_string(v.size()) +
                                                      " entries, network has " +
                                                      std::to_string(net.bus_count()) + " buses");
    }
    const auto y = assemble_admittance(net);
    std::vector<Complex> current(v.size(), Complex{});
    for (std::size_t i = 0; i < v.size(); ++i) {
        y.for_each_in_row(i, [&](std::size_t j, Complex yij) { current[i] += yij * v[j]; });
    }
    return current;
}

Complex terminal_current(const NetworkModel& net, BranchEnd end, std::span<const Complex> v) {
    if (v.size() != net.bus_count()) {
        throw Error(ErrorCode::DimensionMismatch, "voltage vector size does not match bus count");
    }
    const auto p = net.end_parameters(end);
    const Complex y(p.g, p.b);
    const Complex ys(p.gs, p.bs);
    return (y + ys) * v[p.i] - y * v[p.j];
}

}  // namespace pse
