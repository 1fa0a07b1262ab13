#pragma once

// Grid evaluation of scalar observables over one or two parameter axes,
// serialized as CSV. Points are independent and may run in parallel; row
// order is always row-major over the axes.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "optomech/error.hpp"
#include "optomech/lindyn.hpp"
#include "optomech/mechvar.hpp"
#include "optomech/optout.hpp"
#include "optomech/params.hpp"
#include "optomech/steadystate.hpp"

namespace optomech {

enum class Observable {
    var_x,
    var_p,
    heisenberg_product,
    n_eff,
    var_i_out,
    var_phi_out,
    delta_i_out,
    alpha_out_abs,
    alpha_out_re,
    alpha_out_im,
    omega_eff,
    gamma_eff,
    stability_margin,
    g_eff,
    beta,
    eta,
};

enum class AxisName { detuning_ratio, beta, eta, p_in, temperature };

enum class Spacing { linear, log };

/// Which way the detuning axis points. The response functions are written
/// for Delta = omega_l - omega_c; the cooling (red) sideband then sits at
/// Delta/Omega_m = -1. With cavity_minus_laser the axis value r and the eta
/// value e map to the physical Delta = -r Omega_m and Delta~ = -(r + e) Omega_m.
enum class DetuningConvention { laser_minus_cavity, cavity_minus_laser };

struct Axis {
    AxisName name = AxisName::detuning_ratio;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
    Spacing spacing = Spacing::linear;
    std::vector<double> explicit_values;  // when non-empty, used as-is

    [[nodiscard]] std::vector<double> values() const {
        if (!explicit_values.empty()) return explicit_values;
        std::vector<double> v(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double f = static_cast<double>(i) / static_cast<double>(count - 1);
            if (spacing == Spacing::linear) {
                v[i] = i + 1 == count ? max : min + f * (max - min);
            } else {
                v[i] = i == 0           ? min
                       : i + 1 == count ? max
                                        : std::exp(std::log(min) + f * (std::log(max) - std::log(min)));
            }
        }
        return v;
    }
};

struct SweepSpec {
    std::vector<Observable> observables;
    std::vector<Axis> axes;  // one or two
    // Fixed values for any axis name, plus "operating_detuning_ratio": the
    // detuning (in this SweepSpec's convention, units of Omega_m) at which the
    // steady state, and hence G, is solved when not self-consistent.
    std::map<std::string, double, std::less<>> fixed;
    ThermalMode mode = ThermalMode::high_temperature;
    bool self_consistent = false;
    DetuningConvention convention = DetuningConvention::laser_minus_cavity;
    std::size_t budget = 2'000'000;
    unsigned threads = 0;  // 0: hardware concurrency; 1: serial
};

struct SweepRow {
    std::vector<double> axis_values;
    std::vector<double> values;  // one per observable, NaN where it failed
    bool stable = false;         // drift-matrix verdict at the point
    bool multistable = false;
    std::string error;  // empty, or the code of the first failure
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

// ---------------------------------------------------------------------------

inline std::string_view to_string(Observable o) {
    switch (o) {
        case Observable::var_x: return "var_x";
        case Observable::var_p: return "var_p";
        case Observable::heisenberg_product: return "heisenberg_product";
        case Observable::n_eff: return "n_eff";
        case Observable::var_i_out: return "var_i_out";
        case Observable::var_phi_out: return "var_phi_out";
        case Observable::delta_i_out: return "delta_i_out";
        case Observable::alpha_out_abs: return "alpha_out_abs";
        case Observable::alpha_out_re: return "alpha_out_re";
        case Observable::alpha_out_im: return "alpha_out_im";
        case Observable::omega_eff: return "omega_eff";
        case Observable::gamma_eff: return "gamma_eff";
        case Observable::stability_margin: return "stability_margin";
        case Observable::g_eff: return "g_eff";
        case Observable::beta: return "beta";
        case Observable::eta: return "eta";
    }
    return "?";
}

inline std::string_view to_string(AxisName a) {
    switch (a) {
        case AxisName::detuning_ratio: return "detuning_ratio";
        case AxisName::beta: return "beta";
        case AxisName::eta: return "eta";
        case AxisName::p_in: return "p_in";
        case AxisName::temperature: return "temperature";
    }
    return "?";
}

inline std::string_view to_string(DetuningConvention c) {
    return c == DetuningConvention::laser_minus_cavity ? "laser_minus_cavity"
                                                       : "cavity_minus_laser";
}

inline Observable parse_observable(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(Observable::eta); ++i) {
        const auto o = static_cast<Observable>(i);
        if (to_string(o) == s) return o;
    }
    throw ValidationError("observable", "observable: unknown \"" + std::string(s) + "\"");
}

inline AxisName parse_axis_name(std::string_view s) {
    for (int i = 0; i <= static_cast<int>(AxisName::temperature); ++i) {
        const auto a = static_cast<AxisName>(i);
        if (to_string(a) == s) return a;
    }
    throw ValidationError("axis", "axis: unknown \"" + std::string(s) + "\"");
}

inline DetuningConvention parse_convention(std::string_view s) {
    if (s == "laser_minus_cavity") return DetuningConvention::laser_minus_cavity;
    if (s == "cavity_minus_laser") return DetuningConvention::cavity_minus_laser;
    throw ValidationError("convention", "convention: unknown \"" + std::string(s) + "\"");
}

inline double convention_sign(DetuningConvention c) {
    return c == DetuningConvention::laser_minus_cavity ? 1.0 : -1.0;
}

inline void validate(const SweepSpec& spec) {
    using detail::require;
    require(!spec.observables.empty(), "observable", "at least one observable is required");
    require(spec.axes.size() == 1 || spec.axes.size() == 2, "axes", "one or two axes required");
    if (spec.axes.size() == 2) {
        require(spec.axes[0].name != spec.axes[1].name, "axes", "axes must differ");
    }
    std::size_t total = 1;
    for (const auto& ax : spec.axes) {
        const std::string name(to_string(ax.name));
        if (ax.explicit_values.empty()) {
            require(ax.count >= 2, name, "count must be >= 2");
            require(std::isfinite(ax.min) && std::isfinite(ax.max) && ax.min < ax.max, name,
                    "min must be < max");
            if (ax.spacing == Spacing::log) require(ax.min > 0.0, name, "log spacing needs min > 0");
        } else {
            for (double v : ax.explicit_values) require(std::isfinite(v), name, "values must be finite");
        }
        require(!spec.fixed.contains(name), name, "is both an axis and a fixed value");
        total *= ax.values().size();
    }
    for (const auto& [key, value] : spec.fixed) {
        require(key == "operating_detuning_ratio" || key == "detuning_ratio" || key == "beta" ||
                    key == "eta" || key == "p_in" || key == "temperature",
                key, "not a sweepable quantity");
        require(std::isfinite(value), key, "must be finite");
    }
    if (spec.self_consistent) {
        auto uses = [&](AxisName a) {
            const std::string n(to_string(a));
            if (spec.fixed.contains(n)) return true;
            return std::any_of(spec.axes.begin(), spec.axes.end(),
                               [&](const Axis& ax) { return ax.name == a; });
        };
        require(!uses(AxisName::beta) && !uses(AxisName::eta), "self_consistent",
                "beta and eta follow from the steady state and cannot be set");
    }
    require(total <= spec.budget, "budget",
            "grid has " + std::to_string(total) + " points, budget is " +
                std::to_string(spec.budget));
}

/// One fully evaluated point; the building block shared by run_sweep and
/// the CLI point queries.
struct PointInputs {
    std::optional<double> detuning_ratio, beta, eta, p_in, temperature;
    std::optional<double> operating_detuning_ratio;
};

struct PointContext {
    PhysicalParams params;
    DerivedScalars derived;
    EffectiveParams ep;
    double detuning = 0.0;  // physical omega_l - omega_c, rad/s
    bool multistable = false;
};

/// Builds the linearization for one grid point. Non-self-consistent: the
/// steady state (and G) comes from the operating detuning, while the point's
/// detuning, beta and eta only move Delta, Delta~ and beta. Self-consistent:
/// the steady state is re-solved at the point's own detuning.
inline PointContext make_point(const PhysicalParams& base, const PointInputs& in,
                               DetuningConvention convention, bool self_consistent) {
    PointContext ctx;
    ctx.params = base;
    if (in.p_in) ctx.params = with_override(ctx.params, "p_in", *in.p_in);
    if (in.temperature) ctx.params = with_override(ctx.params, "temperature", *in.temperature);
    ctx.derived = derive_scalars(ctx.params);
    const auto& p = ctx.params;
    const double s = convention_sign(convention);
    const double om = p.omega_m;

    const double config_ratio = s * p.detuning() / om;
    const double op_ratio = in.operating_detuning_ratio.value_or(config_ratio);
    const double ratio = in.detuning_ratio.value_or(op_ratio);
    ctx.detuning = s * ratio * om;

    const double solve_at = self_consistent ? ctx.detuning : s * op_ratio * om;
    const auto roots = solve_cubic(p, ctx.derived, solve_at);
    const auto op = select_operating_point(roots);
    ctx.multistable = op.multistable;
    auto ep = effective_params(p, ctx.derived, op.state, solve_at);
    if (!self_consistent) {
        const double eta = in.eta ? s * *in.eta : ep.eta;
        ep = with_eta(ep, ctx.detuning, eta, om);
        if (in.beta) ep = with_beta(ep, *in.beta);
    }
    ctx.ep = ep;
    return ctx;
}

inline SweepRow evaluate_point(const PhysicalParams& base, const SweepSpec& spec,
                               const std::vector<double>& axis_values) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    SweepRow row;
    row.axis_values = axis_values;
    row.values.assign(spec.observables.size(), nan);

    PointInputs in;
    auto assign = [&](std::string_view key, double v) {
        if (key == "detuning_ratio") in.detuning_ratio = v;
        else if (key == "beta") in.beta = v;
        else if (key == "eta") in.eta = v;
        else if (key == "p_in") in.p_in = v;
        else if (key == "temperature") in.temperature = v;
        else if (key == "operating_detuning_ratio") in.operating_detuning_ratio = v;
    };
    for (const auto& [k, v] : spec.fixed) assign(k, v);
    for (std::size_t i = 0; i < spec.axes.size(); ++i) assign(to_string(spec.axes[i].name), axis_values[i]);

    auto note = [&](const std::string& code) {
        if (row.error.empty()) row.error = code;
    };

    PointContext ctx;
    try {
        ctx = make_point(base, in, spec.convention, spec.self_consistent);
    } catch (const PhysicsError& e) {
        note(std::string(to_string(e.code())));
        return row;
    } catch (const ValidationError& e) {
        note("validation:" + e.field());
        return row;
    }
    row.multistable = ctx.multistable;
    const auto& p = ctx.params;
    const auto& ep = ctx.ep;

    const auto report = is_dynamically_stable(drift_matrix(p, ep));
    row.stable = report.stable;
    const auto chi = detail::susceptibility_unchecked(p, ep, p.omega_m);

    std::optional<MechanicalVariances> mv;
    bool mv_failed = false;
    auto mechanics = [&]() -> const MechanicalVariances* {
        if (mv) return &*mv;
        if (mv_failed) return nullptr;
        try {
            if (spec.mode == ThermalMode::high_temperature) {
                mv = variances_closed_form(p, ep);
            } else {
                mv = variances_by_quadrature(p, ep, 20.0 * std::max(p.omega_m, p.kappa), 1e-6,
                                             ThermalMode::exact);
            }
        } catch (const PhysicsError& e) {
            mv_failed = true;
            note(std::string(to_string(e.code())));
            return nullptr;
        }
        return &*mv;
    };

    for (std::size_t i = 0; i < spec.observables.size(); ++i) {
        double& out = row.values[i];
        switch (spec.observables[i]) {
            case Observable::var_x:
                if (auto m = mechanics()) out = m->var_x;
                break;
            case Observable::var_p:
                if (auto m = mechanics()) out = m->var_p;
                break;
            case Observable::heisenberg_product:
                if (auto m = mechanics()) out = m->heisenberg_product;
                break;
            case Observable::n_eff:
                if (auto m = mechanics()) out = m->n_eff;
                break;
            case Observable::var_i_out:
                if (auto m = mechanics()) out = output_variances(p, ep, *m).var_i_out;
                break;
            case Observable::var_phi_out:
                if (auto m = mechanics()) out = output_variances(p, ep, *m).var_phi_out;
                break;
            case Observable::delta_i_out:
                if (auto m = mechanics()) out = output_variances(p, ep, *m).delta_i_out;
                break;
            case Observable::alpha_out_abs:
                out = std::abs(output_field(p, ctx.derived, ep, ctx.detuning).alpha_out);
                break;
            case Observable::alpha_out_re:
                out = output_field(p, ctx.derived, ep, ctx.detuning).alpha_out.real();
                break;
            case Observable::alpha_out_im:
                out = output_field(p, ctx.derived, ep, ctx.detuning).alpha_out.imag();
                break;
            case Observable::omega_eff:
                if (chi.omega_eff_sq > 0.0) out = std::sqrt(chi.omega_eff_sq);
                else note(std::string(to_string(PhysicsErrorCode::static_instability)));
                break;
            case Observable::gamma_eff: out = chi.gamma_eff; break;
            case Observable::stability_margin: out = report.margin; break;
            case Observable::g_eff: out = ep.g_eff; break;
            case Observable::beta: out = ep.beta; break;
            case Observable::eta: out = ep.eta; break;
        }
    }
    return row;
}

inline std::vector<std::vector<double>> grid_points(const SweepSpec& spec) {
    std::vector<std::vector<double>> pts;
    const auto v0 = spec.axes[0].values();
    if (spec.axes.size() == 1) {
        for (double a : v0) pts.push_back({a});
        return pts;
    }
    const auto v1 = spec.axes[1].values();
    pts.reserve(v0.size() * v1.size());
    for (double a : v0) {
        for (double b : v1) pts.push_back({a, b});
    }
    return pts;
}

inline SweepResult run_sweep(const PhysicalParams& p, const SweepSpec& spec) {
    validate(p);
    validate(spec);
    const auto pts = grid_points(spec);
    SweepResult result;
    result.spec = spec;
    result.rows.resize(pts.size());

    unsigned n_threads = spec.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                           : spec.threads;
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, pts.size()));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < pts.size(); ++i) result.rows[i] = evaluate_point(p, spec, pts[i]);
        return result;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < pts.size(); i = next++) {
            result.rows[i] = evaluate_point(p, spec, pts[i]);
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    pool.clear();  // joins
    return result;
}

/// Shortest round-trip representation is not used on purpose: every float
/// is printed with 17 significant digits so the bytes are reproducible.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const SweepResult& r) {
    for (const auto& ax : r.spec.axes) os << to_string(ax.name) << ',';
    for (auto o : r.spec.observables) os << to_string(o) << ',';
    os << "stable,multistable,error\n";
    for (const auto& row : r.rows) {
        for (double v : row.axis_values) os << format_double(v) << ',';
        for (double v : row.values) os << format_double(v) << ',';
        os << (row.stable ? 1 : 0) << ',' << (row.multistable ? 1 : 0) << ',' << row.error << '\n';
    }
}

inline std::string to_csv(const SweepResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

// ---------------------------------------------------------------------------
// Nonlinearity ranges from displacement endpoints.

struct Nonlinearities {
    double beta = 0.0;
    double eta = 0.0;
};

/// beta and eta of a static displacement x_bar (m).
inline Nonlinearities nonlinearities_at(const PhysicalParams& p, const DerivedScalars& d,
                                        double x_bar) {
    const double xm = x_bar / d.x_zpf;
    return {3.0 * p.beta_prime * d.x_zpf * d.x_zpf * xm * xm / (p.omega_m * p.omega_m),
            d.g_m * xm / p.omega_m};
}

struct NonlinearityRange {
    double detuning_ratio = 0.0;
    double x_min = 0.0, x_max = 0.0;  // m
    double eta_min = 0.0, eta_max = 0.0;
    double beta_min = 0.0, beta_max = 0.0;
};

/// Displacement endpoints at Delta = 0 and Delta = Omega_m.
inline constexpr std::array<std::array<double, 3>, 2> table1_endpoints = {{
    {0.0, 2.77e-11, 7.42e-10},
    {1.0, 1.27e-13, 1.09e-8},
}};

inline std::array<NonlinearityRange, 2> table1_ranges(const PhysicalParams& p) {
    const auto d = derive_scalars(p);
    std::array<NonlinearityRange, 2> out{};
    for (std::size_t i = 0; i < 2; ++i) {
        const auto [ratio, lo, hi] = table1_endpoints[i];
        const auto a = nonlinearities_at(p, d, lo);
        const auto b = nonlinearities_at(p, d, hi);
        out[i] = {ratio,
                  lo,
                  hi,
                  std::min(a.eta, b.eta),
                  std::max(a.eta, b.eta),
                  std::min(a.beta, b.beta),
                  std::max(a.beta, b.beta)};
    }
    return out;
}

}  // namespace optomech
