#include "pse/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace pse {

namespace {

void check_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::InvalidInput, where + " must be a JSON object");
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw Error(ErrorCode::InvalidInput, where + ": unknown key '" + item.key() + "'");
        }
    }
}

double number(const Json& obj, const char* key, const std::string& where, std::optional<double> fallback = {}) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        if (fallback) return *fallback;
        throw Error(ErrorCode::InvalidInput, where + ": missing '" + key + "'");
    }
    if (!it->is_number()) throw Error(ErrorCode::InvalidInput, where + ": '" + key + "' must be a number");
    return it->get<double>();
}

int integer(const Json& value, const std::string& where) {
    if (!value.is_number_integer()) throw Error(ErrorCode::InvalidInput, where + " must be an integer");
    return value.get<int>();
}

const Json& array_field(const Json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw Error(ErrorCode::InvalidInput, where + ": missing '" + key + "'");
    if (!it->is_array()) throw Error(ErrorCode::InvalidInput, where + ": '" + key + "' must be an array");
    return *it;
}

Location parse_location(const Json& at, const std::string& where) {
    if (!at.is_array() || at.empty() || at.size() > 3) {
        throw Error(ErrorCode::InvalidInput, where + ": 'at' must be [i], [i,j] or [i,j,circuit]");
    }
    Location loc;
    loc.bus = integer(at[0], where + ": 'at' entries");
    if (at.size() > 1) loc.to = integer(at[1], where + ": 'at' entries");
    if (at.size() > 2) loc.circuit = integer(at[2], where + ": 'at' entries");
    return loc;
}

Json location_to_json(const Location& at) {
    Json a = Json::array({at.bus});
    if (at.to != 0) a.push_back(at.to);
    if (at.circuit != 0) a.push_back(at.circuit);
    return a;
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

std::pair<double, double> range(const Json& doc, const char* key, const std::string& where) {
    auto it = doc.find(key);
    if (it == doc.end()) throw Error(ErrorCode::InvalidInput, where + ": missing '" + key + "'");
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        throw Error(ErrorCode::InvalidInput, where + ": '" + key + "' must be [lo, hi]");
    }
    return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

}  // namespace

Json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::InvalidInput, "cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidInput, "'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::InvalidInput, "cannot write '" + path.string() + "'");
    out << text;
}

Json rounded(const Json& doc) {
    if (doc.is_number_float()) return round12(doc.get<double>());
    if (doc.is_array()) {
        Json out = Json::array();
        for (const auto& v : doc) out.push_back(rounded(v));
        return out;
    }
    if (doc.is_object()) {
        Json out = Json::object();
        for (const auto& item : doc.items()) out[item.key()] = rounded(item.value());
        return out;
    }
    return doc;
}

// ---------------------------------------------------------------------------

NetworkModel parse_network(const Json& doc) {
    check_keys(doc, {"base_mva", "slack_angle", "slack_imag", "buses", "branches"}, "network");
    const double base = number(doc, "base_mva", "network", 100.0);
    const double slack_angle = number(doc, "slack_angle", "network", 0.0);
    const double slack_imag = number(doc, "slack_imag", "network", 0.0);

    std::vector<Bus> buses;
    const auto& bus_list = array_field(doc, "buses", "network");
    for (std::size_t k = 0; k < bus_list.size(); ++k) {
        const std::string where = "bus entry #" + std::to_string(k + 1);
        const auto& b = bus_list[k];
        check_keys(b, {"id", "shunt_g", "shunt_b", "slack"}, where);
        Bus bus;
        if (!b.contains("id")) throw Error(ErrorCode::InvalidInput, where + ": missing 'id'");
        bus.id = integer(b["id"], where + ": 'id'");
        bus.shunt_g = number(b, "shunt_g", where, 0.0);
        bus.shunt_b = number(b, "shunt_b", where, 0.0);
        if (b.contains("slack")) {
            if (!b["slack"].is_boolean()) throw Error(ErrorCode::InvalidInput, where + ": 'slack' must be boolean");
            bus.is_slack = b["slack"].get<bool>();
        }
        buses.push_back(bus);
    }

    std::vector<Branch> branches;
    const auto& branch_list = array_field(doc, "branches", "network");
    for (std::size_t k = 0; k < branch_list.size(); ++k) {
        const std::string where = "branch entry #" + std::to_string(k + 1);
        const auto& b = branch_list[k];
        check_keys(b, {"from", "to", "r", "x", "gs_from", "bs_from", "gs_to", "bs_to"}, where);
        Branch br;
        if (!b.contains("from") || !b.contains("to")) {
            throw Error(ErrorCode::InvalidInput, where + ": missing 'from' or 'to'");
        }
        br.from_bus = integer(b["from"], where + ": 'from'");
        br.to_bus = integer(b["to"], where + ": 'to'");
        br.r = number(b, "r", where);
        br.x = number(b, "x", where);
        br.gs_from = number(b, "gs_from", where, 0.0);
        br.bs_from = number(b, "bs_from", where, 0.0);
        br.gs_to = number(b, "gs_to", where, 0.0);
        br.bs_to = number(b, "bs_to", where, 0.0);
        branches.push_back(br);
    }
    return NetworkModel(std::move(buses), std::move(branches), base, slack_angle, slack_imag);
}

NetworkModel load_network(const std::filesystem::path& path) { return parse_network(read_json(path)); }

Json network_to_json(const NetworkModel& net) {
    Json doc = Json::object();
    doc["base_mva"] = net.base_mva();
    if (net.slack_angle() != 0.0) doc["slack_angle"] = net.slack_angle();
    if (net.slack_imag() != 0.0) doc["slack_imag"] = net.slack_imag();
    Json buses = Json::array();
    for (const auto& b : net.buses()) {
        buses.push_back({{"id", b.id}, {"shunt_g", b.shunt_g}, {"shunt_b", b.shunt_b}, {"slack", b.is_slack}});
    }
    Json branches = Json::array();
    for (const auto& br : net.branches()) {
        branches.push_back({{"from", br.from_bus},
                            {"to", br.to_bus},
                            {"r", br.r},
                            {"x", br.x},
                            {"gs_from", br.gs_from},
                            {"bs_from", br.bs_from},
                            {"gs_to", br.gs_to},
                            {"bs_to", br.bs_to}});
    }
    doc["buses"] = std::move(buses);
    doc["branches"] = std::move(branches);
    return doc;
}

// ---------------------------------------------------------------------------

MeasurementSet parse_measurements(const Json& doc) {
    check_keys(doc, {"header", "measurements"}, "measurement file");
    MeasurementSet set;
    const auto& list = array_field(doc, "measurements", "measurement file");
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "measurement #" + std::to_string(k + 1);
        const auto& e = list[k];
        check_keys(e, {"kind", "at", "value", "variance", "covariance"}, where);
        if (!e.contains("kind") || !e["kind"].is_string()) {
            throw Error(ErrorCode::InvalidInput, where + ": 'kind' must be a string tag");
        }
        if (!e.contains("at")) throw Error(ErrorCode::InvalidInput, where + ": missing 'at'");
        Measurement m;
        try {
            m.kind = kind_from_tag(e["kind"].get<std::string>());
        } catch (const Error& err) {
            throw Error(ErrorCode::UnsupportedKind, where + ": unknown kind '" + e["kind"].get<std::string>() + "'");
        }
        m.at = parse_location(e["at"], where);
        m.value = number(e, "value", where);
        m.variance = number(e, "variance", where);
        if (e.contains("covariance")) m.covariance = number(e, "covariance", where);
        try {
            set.add(m);
        } catch (const Error& err) {
            throw Error(err.code(), where + ": " + err.what());
        }
    }
    return set;
}

MeasurementSet load_measurements(const std::filesystem::path& path) {
    return parse_measurements(read_json(path));
}

Json measurements_to_json(const MeasurementSet& set, const std::optional<MeasurementHeader>& header) {
    Json doc = Json::object();
    if (header) {
        doc["header"] = {{"generator", header->generator}, {"rng", header->rng}, {"seed", header->seed}};
    }
    Json list = Json::array();
    for (const auto& m : set) {
        Json e = {{"kind", std::string(tag(m.kind))},
                  {"at", location_to_json(m.at)},
                  {"value", m.value},
                  {"variance", m.variance}};
        if (m.covariance) e["covariance"] = *m.covariance;
        list.push_back(std::move(e));
    }
    doc["measurements"] = std::move(list);
    return doc;
}

// ---------------------------------------------------------------------------

ScenarioFile parse_scenario(const Json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, {"network", "v_range", "theta_range", "seed", "zero_noise", "noise", "placements"}, "scenario");
    ScenarioFile file;
    auto& spec = file.spec;
    if (doc.contains("network")) {
        if (!doc["network"].is_string()) throw Error(ErrorCode::InvalidInput, "scenario: 'network' must be a path");
        std::filesystem::path p = doc["network"].get<std::string>();
        file.network = p.is_absolute() ? p : base_dir / p;
    }
    std::tie(spec.v_min, spec.v_max) = range(doc, "v_range", "scenario");
    std::tie(spec.theta_min, spec.theta_max) = range(doc, "theta_range", "scenario");
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) {
            throw Error(ErrorCode::InvalidInput, "scenario: 'seed' must be a non-negative integer");
        }
        spec.seed = doc["seed"].get<std::uint64_t>();
    }
    if (doc.contains("zero_noise")) {
        if (!doc["zero_noise"].is_boolean()) {
            throw Error(ErrorCode::InvalidInput, "scenario: 'zero_noise' must be boolean");
        }
        spec.zero_noise = doc["zero_noise"].get<bool>();
    }
    if (doc.contains("noise")) {
        const auto& noise = doc["noise"];
        if (!noise.is_object()) throw Error(ErrorCode::InvalidInput, "scenario: 'noise' must map kind tags to stddevs");
        for (const auto& item : noise.items()) {
            const auto kind = kind_from_tag(item.key());
            if (!item.value().is_number()) {
                throw Error(ErrorCode::InvalidInput, "scenario: noise for " + item.key() + " must be a number");
            }
            spec.noise_stddev[kind] = item.value().get<double>();
        }
    }
    const auto& list = array_field(doc, "placements", "scenario");
    for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "placement #" + std::to_string(k + 1);
        const auto& e = list[k];
        check_keys(e, {"kind", "at"}, where);
        if (!e.contains("kind") || !e["kind"].is_string() || !e.contains("at")) {
            throw Error(ErrorCode::InvalidInput, where + ": needs 'kind' and 'at'");
        }
        Placement p;
        try {
            p.kind = kind_from_tag(e["kind"].get<std::string>());
        } catch (const Error&) {
            throw Error(ErrorCode::InvalidInput, where + ": unknown kind '" + e["kind"].get<std::string>() + "'");
        }
        p.at = parse_location(e["at"], where);
        spec.placements.push_back(p);
    }
    return file;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
    return parse_scenario(read_json(path), path.parent_path());
}

// ---------------------------------------------------------------------------

Json state_to_json(const StateVector& x) {
    const StateVector polar = x.coordinates() == Coordinates::Polar ? x : to_polar(x);
    Json list = Json::array();
    for (std::size_t i = 0; i < x.bus_count(); ++i) {
        const auto v = x.voltage(i);
        list.push_back({{"id", static_cast<int>(i + 1)},
                        {"V", polar.magnitude(i)},
                        {"theta", polar.angle(i)},
                        {"re", v.real()},
                        {"im", v.imag()}});
    }
    return list;
}

Json truth_to_json(const StateVector& x_true, std::uint64_t seed) {
    Json doc = Json::object();
    doc["seed"] = seed;
    doc["rng"] = std::string(kRngName);
    doc["state"] = state_to_json(x_true);
    return doc;
}

StateVector parse_state(const Json& doc, const NetworkModel& net, Coordinates coords) {
    if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "state file must be a JSON object");
    const auto& list = array_field(doc, "state", "state file");
    const std::size_t n = net.bus_count();
    if (list.size() != n) {
        throw Error(ErrorCode::DimensionMismatch, "state file lists " + std::to_string(list.size()) +
                                                      " buses, network has " + std::to_string(n));
    }
    std::vector<std::complex<double>> v(n);
    std::vector<bool> seen(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        const std::string where = "state entry #" + std::to_string(k + 1);
        const auto& e = list[k];
        check_keys(e, {"id", "V", "theta", "re", "im"}, where);
        if (!e.contains("id")) throw Error(ErrorCode::InvalidInput, where + ": missing 'id'");
        const std::size_t i = net.index_of(integer(e["id"], where + ": 'id'"));
        if (seen[i]) throw Error(ErrorCode::InvalidInput, where + ": duplicate bus id");
        seen[i] = true;
        if (e.contains("V") && e.contains("theta")) {
            v[i] = std::polar(number(e, "V", where), number(e, "theta", where));
        } else if (e.contains("re") && e.contains("im")) {
            v[i] = {number(e, "re", where), number(e, "im", where)};
        } else {
            throw Error(ErrorCode::InvalidInput, where + ": needs V/theta or re/im");
        }
    }
    std::vector<double> values(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        if (coords == Coordinates::Polar) {
            values[i] = std::arg(v[i]);
            values[n + i] = std::abs(v[i]);
        } else {
            values[i] = v[i].real();
            values[n + i] = v[i].imag();
        }
    }
    const double slack_value = coords == Coordinates::Polar ? net.slack_angle() : net.slack_imag();
    return StateVector(coords, std::move(values), net.slack_index(), slack_value);
}

Json result_to_json(const EstimationProblem& problem, const EstimationResult& result) {
    Json doc = Json::object();
    doc["formulation"] = std::string(tag(problem.formulation()));
    doc["converged"] = result.converged;
    doc["iterations"] = result.iterations;
    doc["objective_trace"] = result.objective_trace;
    doc["max_step_trace"] = result.max_step_trace;
    doc["state"] = state_to_json(result.x_hat);

    Json rows = Json::array();
    const auto& set = problem.measurements();
    for (std::size_t k = 0; k < set.size(); ++k) {
        const auto& m = set[k];
        const double r = result.residuals[static_cast<Eigen::Index>(k)];
        const double h = problem.evaluate(k, result.x_hat).value();
        rows.push_back({{"kind", std::string(tag(m.kind))},
                        {"at", location_to_json(m.at)},
                        {"z", m.value},
                        {"h", h},
                        {"residual", r},
                        {"normalized_residual", r / std::sqrt(m.variance)}});
    }
    doc["residuals"] = std::move(rows);
    doc["warnings"] = result.warnings;
    return rounded(doc);
}

}  // namespace pse
