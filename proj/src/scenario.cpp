#include "thermoflex/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace thermoflex {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (allowed.find(it.key()) == allowed.end()) {
            throw ParseError("unknown key '" + it.key() + "' in " + where);
        }
    }
}

double get_num(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw ParseError("missing key '" + key + "' in " + where);
    if (!obj[key].is_number()) throw ParseError("key '" + key + "' in " + where + " must be a number");
    return obj[key].get<double>();
}

double get_num_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    return obj[key].get<double>();
}

BuildingSpec parse_building(const json& j, std::size_t index) {
    std::ostringstream wh;
    wh << "buildings[" << index << "]";
    const std::string where = wh.str();
    check_keys(j, {"name", "n_bins", "bin_width_c", "band_width_c", "t_on_min", "t_off_min",
                   "set_band_width_c", "set_point_c", "population", "tau_min", "t_gain_c",
                   "rated_power_kw", "r_r", "r_b", "controller", "observer"},
               where);
    BuildingSpec b;
    b.name = j.value("name", "b" + std::to_string(index));
    if (b.name == "ISO") throw ParseError("building name 'ISO' is reserved");
    BuildingParams p;
    if (!j.contains("n_bins") || !j["n_bins"].is_number_integer()) {
        throw ParseError("key 'n_bins' in " + where + " must be an integer");
    }
    p.n_bins = j["n_bins"].get<int>();
    p.bin_width = get_num_or(j, "bin_width_c", 0.0);
    p.band_width = get_num_or(j, "band_width_c", 0.0);
    p.t_on = get_num(j, "t_on_min", where);
    p.t_off = get_num(j, "t_off_min", where);
    p.set_band_width = get_num(j, "set_band_width_c", where);
    p.set_point = get_num(j, "set_point_c", where);
    p.population = get_num(j, "population", where);
    p.tau = get_num(j, "tau_min", where);
    p.t_gain = get_num_or(j, "t_gain_c", 0.0);
    p.rated_power = get_num_or(j, "rated_power_kw", 1.0);
    b.params = finalize_params(p);
    b.r_r = get_num(j, "r_r", where);
    if (b.r_r < 0.0) throw ParseError("'r_r' in " + where + " must be non-negative");
    b.r_b = get_num_or(j, "r_b", -1.0);
    if (j.contains("controller")) {
        const json& c = j["controller"];
        check_keys(c, {"gain_per_min", "x_floor"}, where + ".controller");
        b.controller.gain = get_num_or(c, "gain_per_min", 1.0);
        b.controller.x_floor = get_num_or(c, "x_floor", 1e-9);
        if (b.controller.gain <= 0.0) throw ParseError("controller gain must be positive");
        if (b.controller.x_floor <= 0.0) throw ParseError("controller x_floor must be positive");
    }
    if (j.contains("observer")) {
        const json& o = j["observer"];
        check_keys(o, {"enabled", "gamma", "margin"}, where + ".observer");
        b.observer.enabled = o.value("enabled", true);
        b.observer.gamma = get_num_or(o, "gamma", 0.5);
        b.observer.margin = get_num_or(o, "margin", 0.0);
    }
    return b;
}

SignalSpec parse_signal(const json& j) {
    check_keys(j, {"type", "path", "volatility", "r_r", "r_b", "profile"}, "signal");
    if (!j.contains("type")) throw ParseError("missing key 'type' in signal");
    SignalSpec s;
    const std::string type = j["type"].get<std::string>();
    if (type == "csv") {
        s.kind = SignalKind::csv;
        if (!j.contains("path")) throw ParseError("csv signal needs 'path'");
        s.path = j["path"].get<std::string>();
    } else if (type == "synthetic") {
        s.kind = SignalKind::synthetic;
        s.volatility = get_num(j, "volatility", "signal");
    } else if (type == "t50") {
        s.kind = SignalKind::t50;
        if (j.contains("profile")) {
            for (const auto& knot : j["profile"]) {
                if (!knot.is_array() || knot.size() != 2) {
                    throw ParseError("signal profile knots must be [minute, fraction] pairs");
                }
                s.profile.knots.emplace_back(knot[0].get<double>(), knot[1].get<double>());
            }
        }
    } else {
        throw ParseError("signal type must be csv, synthetic, or t50");
    }
    s.r_r = get_num_or(j, "r_r", -1.0);
    s.r_b = get_num_or(j, "r_b", -1.0);
    return s;
}

}  // namespace

namespace {

Scenario parse_scenario_object(const json& j, const std::string& base_dir);

}  // namespace

Scenario parse_scenario_json(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
    try {
        return parse_scenario_object(j, base_dir);
    } catch (const json::exception& e) {
        throw ParseError(std::string("scenario JSON: ") + e.what());
    }
}

namespace {

Scenario parse_scenario_object(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ParseError("scenario JSON must be an object");
    check_keys(j, {"dt_s", "duration_min", "dispatch_mode", "penalty_m", "seed",
                   "controller_uses_estimate", "signal", "buildings"},
               "scenario");

    Scenario sc;
    sc.base_dir = base_dir;
    sc.dt = get_num_or(j, "dt_s", 4.0) / 60.0;
    if (sc.dt <= 0.0) throw ParseError("'dt_s' must be positive");
    if (!j.contains("duration_min")) throw ParseError("missing key 'duration_min' in scenario");
    sc.duration = j["duration_min"].get<double>();
    if (sc.duration <= 0.0) throw ParseError("'duration_min' must be positive");
    const std::string mode = j.value("dispatch_mode", "optimized");
    if (mode == "optimized") {
        sc.dispatch_mode = DispatchMode::optimized;
    } else if (mode == "proportional") {
        sc.dispatch_mode = DispatchMode::proportional;
    } else {
        throw ParseError("'dispatch_mode' must be optimized or proportional");
    }
    sc.penalty = get_num_or(j, "penalty_m", 0.0);
    if (j.contains("penalty_m") && sc.penalty <= 0.0) {
        throw ParseError("'penalty_m' must be positive (omit it for the default)");
    }
    if (j.contains("seed")) sc.seed = j["seed"].get<std::uint64_t>();
    sc.controller_uses_estimate = j.value("controller_uses_estimate", true);

    if (!j.contains("buildings") || !j["buildings"].is_array() || j["buildings"].empty()) {
        throw ParseError("scenario needs a non-empty 'buildings' array");
    }
    for (std::size_t i = 0; i < j["buildings"].size(); ++i) {
        sc.buildings.push_back(parse_building(j["buildings"][i], i));
    }
    if (!j.contains("signal")) throw ParseError("missing key 'signal' in scenario");
    sc.signal = parse_signal(j["signal"]);

    // Integrator guard and dispatch-structure requirements per building.
    std::set<std::string> names;
    for (const BuildingSpec& b : sc.buildings) {
        if (!names.insert(b.name).second) {
            throw ParseError("duplicate building name '" + b.name + "'");
        }
        const RateSet r = derive_rates(b.params);
        if (sc.dt * (r.alpha + r.beta) >= 0.5) {
            throw ParseError("tick dt violates dt*(alpha+beta) < 0.5 for building " + b.name);
        }
        if (b.params.n_bins < 2) {
            throw ParseError("building " + b.name + " needs n_bins >= 2 for dispatch");
        }
    }
    return sc;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    std::string dir = ".";
    const std::size_t slash = path.find_last_of('/');
    if (slash != std::string::npos) dir = path.substr(0, slash);
    return parse_scenario_json(buf.str(), dir);
}

}  // namespace thermoflex
