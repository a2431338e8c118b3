#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "pse/io.hpp"
#include "pse/measurement.hpp"
#include "pse/network.hpp"

namespace support {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(PSE_FIXTURE_DIR) / name; }

inline pse::NetworkModel net3() { return pse::load_network(fixture("net3.json")); }
inline pse::NetworkModel net14() { return pse::load_network(fixture("net14.json")); }

inline pse::Measurement meas(pse::MeasurementKind kind, pse::Location at, double value = 0.0,
                             double variance = 1e-4) {
    pse::Measurement m;
    m.kind = kind;
    m.at = at;
    m.value = value;
    m.variance = variance;
    return m;
}

/// Two buses joined by one branch with series admittance g + jb and no shunts.
inline pse::NetworkModel two_bus(double g, double b, double bs_from = 0.0) {
    const std::complex<double> z = 1.0 / std::complex<double>(g, b);
    std::vector<pse::Bus> buses{{1, 0.0, 0.0, true}, {2, 0.0, 0.0, false}};
    pse::Branch br;
    br.from_bus = 1;
    br.to_bus = 2;
    br.r = z.real();
    br.x = z.imag();
    br.bs_from = bs_from;
    return pse::NetworkModel(buses, {br});
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    auto dir = std::filesystem::temp_directory_path() / ("pse_test_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace support
