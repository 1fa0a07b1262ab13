#pragma once

// Physical inputs of the optomechanical cavity, their JSON config format and
// the single-valued quantities derived from them.
//
// Every angular frequency is stored in rad/s. A config may be written in
// "rad_s" or "hz_2pi" units (the latter is multiplied by 2*pi on load); the
// `units` key is mandatory, nothing is inferred.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "optomech/constants.hpp"
#include "optomech/error.hpp"

namespace optomech {

struct PhysicalParams {
    double omega_m = 0.0;        // mechanical resonance, rad/s
    double gamma_m = 0.0;        // mechanical damping, rad/s
    double kappa = 0.0;          // cavity decay, rad/s
    double omega_c = 0.0;        // cavity mode, rad/s
    double omega_l = 0.0;        // drive laser, rad/s
    double mass = 0.0;           // kg
    double cavity_length = 0.0;  // m
    double beta_prime = 0.0;     // 1/(m^2 s^2)
    double p_in = 0.0;           // W
    double temperature = 0.0;    // K
    // Scale of the c-number input amplitude used by the output field:
    // alpha_in = alpha_in_scale * epsilon_in / sqrt(kappa).
    double alpha_in_scale = 0.0;

    [[nodiscard]] double detuning() const noexcept { return omega_l - omega_c; }

    [[nodiscard]] double quality_factor() const noexcept {
        return gamma_m > 0.0 ? omega_m / gamma_m : std::numeric_limits<double>::infinity();
    }

    bool operator==(const PhysicalParams&) const = default;
};

struct DerivedScalars {
    double x_zpf = 0.0;       // m
    double g_m = 0.0;         // rad/s, single-photon coupling
    double epsilon_in = 0.0;  // sqrt(photons)/s
    double n_thermal = 0.0;   // 2 k_B T / (hbar Omega_m)
    double tau_th = 0.0;      // s, hbar Q_m / (k_B T)
};

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& what) {
    if (!ok) throw ValidationError(field, field + ": " + what);
}

inline bool is_frequency_key(std::string_view key) {
    return key == "omega_m" || key == "gamma_m" || key == "kappa" || key == "omega_c" ||
           key == "omega_l" || key == "detuning";
}

inline const std::set<std::string, std::less<>>& known_keys() {
    static const std::set<std::string, std::less<>> keys = {
        "units", "omega_m", "gamma_m", "q_factor", "kappa", "omega_c", "omega_l",
        "detuning", "mass", "cavity_length", "beta_prime", "p_in", "temperature",
        "alpha_in_scale"};
    return keys;
}

}  // namespace detail

/// Checks the PhysicalParams invariants, throwing ValidationError naming the
/// first offending field.
inline void validate(const PhysicalParams& p) {
    using detail::require;
    auto finite = [](double v) { return std::isfinite(v); };
    require(finite(p.omega_m) && p.omega_m > 0.0, "omega_m", "must be > 0");
    require(finite(p.gamma_m) && p.gamma_m >= 0.0, "gamma_m", "must be >= 0");
    require(finite(p.kappa) && p.kappa > 0.0, "kappa", "must be > 0");
    require(finite(p.omega_c) && p.omega_c > 0.0, "omega_c", "must be > 0");
    require(finite(p.omega_l) && p.omega_l > 0.0, "omega_l", "must be > 0");
    require(finite(p.mass) && p.mass > 0.0, "mass", "must be > 0");
    require(finite(p.cavity_length) && p.cavity_length > 0.0, "cavity_length", "must be > 0");
    require(finite(p.beta_prime) && p.beta_prime >= 0.0, "beta_prime", "must be >= 0");
    require(finite(p.p_in) && p.p_in >= 0.0, "p_in", "must be >= 0");
    require(finite(p.temperature) && p.temperature >= 0.0, "temperature", "must be >= 0");
    require(finite(p.alpha_in_scale), "alpha_in_scale", "must be finite");
}

/// Parses a flat JSON config document.
inline PhysicalParams load_params(std::string_view config_text) {
    using detail::require;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(config_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("config", std::string("config: not valid JSON: ") + e.what());
    }
    require(doc.is_object(), "config", "top level must be an object");

    for (const auto& [key, value] : doc.items()) {
        require(detail::known_keys().count(key) == 1, key, "unknown key");
        if (key != "units") require(value.is_number(), key, "value must be numeric");
    }

    require(doc.contains("units") && doc["units"].is_string(), "units",
            "missing (expected \"rad_s\" or \"hz_2pi\")");
    const auto units = doc["units"].get<std::string>();
    require(units == "rad_s" || units == "hz_2pi", "units",
            "must be \"rad_s\" or \"hz_2pi\", got \"" + units + "\"");
    const double freq_scale = units == "hz_2pi" ? 2.0 * std::numbers::pi : 1.0;

    auto get = [&](const std::string& key) -> double {
        require(doc.contains(key), key, "missing required field");
        const double v = doc[key].get<double>();
        return detail::is_frequency_key(key) ? v * freq_scale : v;
    };

    PhysicalParams p;
    p.omega_m = get("omega_m");
    p.kappa = get("kappa");
    p.omega_c = get("omega_c");
    p.mass = get("mass");
    p.cavity_length = get("cavity_length");
    p.beta_prime = get("beta_prime");
    p.p_in = get("p_in");
    p.temperature = get("temperature");
    if (doc.contains("alpha_in_scale")) p.alpha_in_scale = get("alpha_in_scale");

    const bool has_gamma = doc.contains("gamma_m");
    const bool has_q = doc.contains("q_factor");
    require(has_gamma != has_q, has_gamma ? "q_factor" : "gamma_m",
            "exactly one of gamma_m or q_factor is required");
    if (has_gamma) {
        p.gamma_m = get("gamma_m");
    } else {
        const double q = get("q_factor");
        require(std::isfinite(q) && q > 0.0, "q_factor", "must be > 0");
        p.gamma_m = p.omega_m / q;
    }

    const bool has_omega_l = doc.contains("omega_l");
    const bool has_detuning = doc.contains("detuning");
    require(has_omega_l != has_detuning, has_omega_l ? "detuning" : "omega_l",
            "exactly one of omega_l or detuning is required");
    p.omega_l = has_omega_l ? get("omega_l") : p.omega_c + get("detuning");

    validate(p);
    return p;
}

inline PhysicalParams load_params_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("config", "config: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return load_params(buf.str());
}

/// Serializes in rad_s units with gamma_m and omega_l, so that
/// load_params(serialize_params(p)) == p exactly.
inline std::string serialize_params(const PhysicalParams& p) {
    nlohmann::ordered_json doc;
    doc["units"] = "rad_s";
    doc["omega_m"] = p.omega_m;
    doc["gamma_m"] = p.gamma_m;
    doc["kappa"] = p.kappa;
    doc["omega_c"] = p.omega_c;
    doc["omega_l"] = p.omega_l;
    doc["mass"] = p.mass;
    doc["cavity_length"] = p.cavity_length;
    doc["beta_prime"] = p.beta_prime;
    doc["p_in"] = p.p_in;
    doc["temperature"] = p.temperature;
    doc["alpha_in_scale"] = p.alpha_in_scale;
    return doc.dump(2) + "\n";
}

/// Returns a copy with one field replaced (SI / rad/s units). Accepts the
/// config keys plus q_factor and detuning, which are mapped onto gamma_m and
/// omega_l.
inline PhysicalParams with_override(PhysicalParams p, std::string_view key, double value) {
    if (key == "omega_m") p.omega_m = value;
    else if (key == "gamma_m") p.gamma_m = value;
    else if (key == "q_factor") {
        detail::require(std::isfinite(value) && value > 0.0, "q_factor", "must be > 0");
        p.gamma_m = p.omega_m / value;
    }
    else if (key == "kappa") p.kappa = value;
    else if (key == "omega_c") p.omega_c = value;
    else if (key == "omega_l") p.omega_l = value;
    else if (key == "detuning") p.omega_l = p.omega_c + value;
    else if (key == "mass") p.mass = value;
    else if (key == "cavity_length") p.cavity_length = value;
    else if (key == "beta_prime") p.beta_prime = value;
    else if (key == "p_in") p.p_in = value;
    else if (key == "temperature") p.temperature = value;
    else if (key == "alpha_in_scale") p.alpha_in_scale = value;
    else throw ValidationError(std::string(key), std::string(key) + ": unknown parameter");
    validate(p);
    return p;
}

inline DerivedScalars derive_scalars(const PhysicalParams& p) {
    using constants::hbar;
    using constants::k_boltzmann;
    DerivedScalars d;
    d.x_zpf = std::sqrt(hbar / (2.0 * p.mass * p.omega_m));
    d.g_m = std::numbers::sqrt2 * p.omega_c * d.x_zpf / p.cavity_length;
    d.epsilon_in = std::sqrt(2.0 * p.kappa * p.p_in / (hbar * p.omega_m));
    d.n_thermal = 2.0 * k_boltzmann * p.temperature / (hbar * p.omega_m);
    d.tau_th = p.temperature > 0.0
                   ? hbar * p.quality_factor() / (k_boltzmann * p.temperature)
                   : std::numeric_limits<double>::infinity();
    return d;
}

}  // namespace optomech
