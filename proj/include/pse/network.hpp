#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "pse/errors.hpp"

namespace pse {

using Complex = std::complex<double>;

struct Bus {
    int id = 0;  // 1-based, contiguous
    double shunt_g = 0.0;
    double shunt_b = 0.0;
    bool is_slack = false;
};

/// Two-port pi branch. Series impedance r + jx, end shunts gs + jbs.
struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double gs_from = 0.0;
    double bs_from = 0.0;
    double gs_to = 0.0;
    double bs_to = 0.0;
};

struct SeriesAdmittance {
    double g = 0.0;
    double b = 0.0;
};

/// y = 1 / (r + jx). Throws ZeroImpedance when r = x = 0.
SeriesAdmittance branch_admittance(double r, double x);

/// One directed end of a branch. `from_side` selects which terminal plays the
/// role of bus i in the flow/current equations.
struct BranchEnd {
    std::size_t branch = 0;
    bool from_side = true;
};

/// Branch parameters seen from one terminal: i is the measured end, j the far end.
struct EndParameters {
    std::size_t i = 0;  // 0-based bus index
    std::size_t j = 0;
    double g = 0.0;  // series conductance
    double b = 0.0;  // series susceptance
    double gs = 0.0;  // shunt at end i
    double bs = 0.0;
};

class NetworkModel {
  public:
    NetworkModel() = default;

    /// Validates ids, slack uniqueness, branch endpoints, impedances and
    /// connectivity. Throws InvalidNetwork / ZeroImpedance.
    NetworkModel(std::vector<Bus> buses, std::vector<Branch> branches, double base_mva = 100.0,
                 double slack_angle = 0.0, double slack_imag = 0.0);

    std::size_t bus_count() const noexcept { return buses_.size(); }
    std::size_t branch_count() const noexcept { return branches_.size(); }
    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Branch>& branches() const noexcept { return branches_; }
    const Bus& bus(std::size_t index) const { return buses_.at(index); }
    const Branch& branch(std::size_t index) const { return branches_.at(index); }

    std::size_t slack_index() const noexcept { return slack_; }
    double slack_angle() const noexcept { return slack_angle_; }
    double slack_imag() const noexcept { return slack_imag_; }
    double base_mva() const noexcept { return base_mva_; }

    /// 0-based index of a 1-based bus id; throws InvalidInput when absent.
    std::size_t index_of(int bus_id) const;
    bool has_bus(int bus_id) const noexcept;

    /// Branch indices incident to a bus (0-based index).
    std::span<const std::size_t> incident(std::size_t bus_index) const {
        return incident_.at(bus_index);
    }

    /// Branches connecting bus ids (i, j) in either orientation, in file order.
    std::vector<std::size_t> branches_between(int from_id, int to_id) const;

    /// Resolve a measured branch end (i, j). `circuit` is the 1-based rank
    /// among parallel branches; 0 demands the pair be unique.
    BranchEnd find_end(int from_id, int to_id, int circuit = 0) const;

    EndParameters end_parameters(BranchEnd end) const;
    SeriesAdmittance series_admittance(std::size_t branch) const { return series_.at(branch); }

  private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<SeriesAdmittance> series_;
    std::vector<std::vector<std::size_t>> incident_;
    std::size_t slack_ = 0;
    double base_mva_ = 100.0;
    double slack_angle_ = 0.0;
    double slack_imag_ = 0.0;
};

/// True when the undirected bus/branch graph is a single component.
bool is_connected(std::size_t bus_count, std::span<const Branch> branches);

/// Complex nodal admittance matrix in compressed sparse rows.
class AdmittanceMatrix {
  public:
    using Storage = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

    AdmittanceMatrix() = default;
    explicit AdmittanceMatrix(Storage y) : y_(std::move(y)) {}

    std::size_t size() const noexcept { return static_cast<std::size_t>(y_.rows()); }
    Complex operator()(std::size_t i, std::size_t j) const {
        return y_.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    std::size_t nonzeros() const noexcept { return static_cast<std::size_t>(y_.nonZeros()); }
    const Storage& storage() const noexcept { return y_; }

    /// Visit the stored entries of row i as f(column, value).
    template <typename F>
    void for_each_in_row(std::size_t i, F&& f) const {
        for (Storage::InnerIterator it(y_, static_cast<Eigen::Index>(i)); it; ++it) {
            f(static_cast<std::size_t>(it.col()), it.value());
        }
    }

  private:
    Storage y_;
};

AdmittanceMatrix assemble_admittance(const NetworkModel& net);

/// I = Y v. Throws DimensionMismatch when |v| != N.
std::vector<Complex> injected_current(const NetworkModel& net, std::span<const Complex> v);

/// Terminal current I_ij = (y_ij + y_si) V_i - y_ij V_j for one branch end.
Complex terminal_current(const NetworkModel& net, BranchEnd end, std::span<const Complex> v);

}  // namespace pse
