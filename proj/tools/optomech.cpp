// optomech: command-line front end. Point queries print JSON, sweeps and
// trajectories print CSV; every error is one JSON line on stderr.
//
// exit 0: success, 1: invalid input, 2: no physical answer (instability,
// lost stable root, non-convergence, diverging trajectory).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "optomech/figures.hpp"
#include "optomech/lindyn.hpp"
#include "optomech/mechvar.hpp"
#include "optomech/optout.hpp"
#include "optomech/params.hpp"
#include "optomech/steadystate.hpp"
#include "optomech/sweep.hpp"
#include "optomech/timedomain.hpp"

namespace {

using namespace optomech;
using json = nlohmann::ordered_json;

struct Common {
    std::string config;
    std::string out;
    std::vector<std::string> overrides;
    std::string mode = "high-t";
    std::string convention;
    bool self_consistent = false;
    unsigned threads = 0;
};

bool is_point_key(std::string_view k) {
    return k == "detuning_ratio" || k == "beta" || k == "eta" || k == "operating_detuning_ratio";
}

double parse_number(const std::string& field, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(field, field + ": not a number: \"" + text + "\"");
    }
}

/// Splits --override k=v into physical parameter changes and point inputs
/// (detuning_ratio, beta, eta, operating_detuning_ratio).
struct Overrides {
    PhysicalParams params;
    std::map<std::string, double, std::less<>> point;
};

Overrides apply_overrides(const Common& c) {
    Overrides o{load_params_file(c.config), {}};
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError("override", "override: expected key=value, got \"" + kv + "\"");
        }
        const std::string key = kv.substr(0, eq);
        const double value = parse_number(key, kv.substr(eq + 1));
        if (is_point_key(key)) {
            o.point[key] = value;
        } else {
            o.params = with_override(o.params, key, value);
        }
    }
    return o;
}

ThermalMode parse_mode(const std::string& m) {
    if (m == "high-t") return ThermalMode::high_temperature;
    if (m == "exact") return ThermalMode::exact;
    throw ValidationError("mode", "mode: expected exact or high-t, got \"" + m + "\"");
}

DetuningConvention convention_or(const Common& c, DetuningConvention fallback) {
    return c.convention.empty() ? fallback : parse_convention(c.convention);
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty() || c.out == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ValidationError("out", "out: cannot write " + c.out);
    f << text;
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

PointContext point_context(const Overrides& o, DetuningConvention conv, bool self_consistent) {
    PointInputs in;
    auto get = [&](std::string_view k) -> std::optional<double> {
        const auto it = o.point.find(k);
        return it == o.point.end() ? std::nullopt : std::optional<double>(it->second);
    };
    in.detuning_ratio = get("detuning_ratio");
    in.beta = get("beta");
    in.eta = get("eta");
    in.operating_detuning_ratio = get("operating_detuning_ratio");
    if (self_consistent && (in.beta || in.eta)) {
        throw ValidationError("self_consistent",
                              "self_consistent: beta and eta follow from the steady state");
    }
    return make_point(o.params, in, conv, self_consistent);
}

json point_json(const PointContext& ctx) {
    return json{{"detuning", ctx.detuning},
                {"g_eff", ctx.ep.g_eff},
                {"beta", ctx.ep.beta},
                {"eta", ctx.ep.eta},
                {"delta_tilde", ctx.ep.delta_tilde},
                {"multistable", ctx.multistable}};
}

MechanicalVariances mechanics(const PointContext& ctx, ThermalMode mode) {
    if (mode == ThermalMode::high_temperature) return variances_closed_form(ctx.params, ctx.ep);
    return variances_by_quadrature(ctx.params, ctx.ep,
                                   20.0 * std::max(ctx.params.omega_m, ctx.params.kappa), 1e-8,
                                   ThermalMode::exact);
}

// --- subcommands -----------------------------------------------------------

int cmd_steady(const Common& c) {
    const auto o = apply_overrides(c);
    const auto conv = convention_or(c, DetuningConvention::laser_minus_cavity);
    const auto d = derive_scalars(o.params);
    double detuning = o.params.detuning();
    if (auto it = o.point.find("detuning_ratio"); it != o.point.end()) {
        detuning = convention_sign(conv) * it->second * o.params.omega_m;
    }
    const auto roots = solve_cubic(o.params, d, detuning);
    json arr = json::array();
    for (const auto& r : roots) {
        arr.push_back(json{{"x_bar", complex_json(r.x_bar)},
                           {"x_bar_m", complex_json(r.x_bar_m)},
                           {"alpha_bar_sq", complex_json(r.alpha_bar_sq)},
                           {"alpha_bar", complex_json(r.alpha_bar)},
                           {"classification", r.is_real() ? "StableReal" : "UnstableComplexPair"},
                           {"residual", cubic_residual(o.params, d, detuning, r.x_bar)}});
    }
    json out{{"detuning", detuning},
             {"x_zpf", d.x_zpf},
             {"g_m", d.g_m},
             {"roots", arr}};
    try {
        const auto op = select_operating_point(roots);
        out["operating_point"] = op.state.x_bar.real();
        out["multistable"] = op.multistable;
    } catch (const PhysicsError&) {
        out["operating_point"] = nullptr;
    }
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_stability(const Common& c) {
    const auto o = apply_overrides(c);
    const auto ctx = point_context(o, convention_or(c, DetuningConvention::laser_minus_cavity),
                                   c.self_consistent);
    const auto m = drift_matrix(ctx.params, ctx.ep);
    const auto rep = is_dynamically_stable(m);
    json ev = json::array();
    for (const auto& z : rep.eigenvalues) ev.push_back(complex_json(z));
    json out = point_json(ctx);
    out["eigenvalues"] = ev;
    out["margin"] = rep.margin;
    out["stable"] = rep.stable;
    out["routh_hurwitz_stable"] = routh_hurwitz_stable(characteristic_polynomial(m));
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_variance(const Common& c) {
    const auto o = apply_overrides(c);
    const auto ctx = point_context(o, convention_or(c, DetuningConvention::laser_minus_cavity),
                                   c.self_consistent);
    const auto mv = mechanics(ctx, parse_mode(c.mode));
    json out = point_json(ctx);
    out["var_x"] = mv.var_x;
    out["var_p"] = mv.var_p;
    out["product"] = mv.heisenberg_product;
    out["n_eff"] = mv.n_eff;
    out["heisenberg_satisfied"] = mv.satisfies_heisenberg();
    out["gamma_eff"] = mv.gamma_eff;
    out["omega_eff_sq"] = mv.omega_eff_sq;
    emit(c, out.dump(2) + "\n");
    return 0;
}

int cmd_output(const Common& c) {
    const auto o = apply_overrides(c);
    const auto ctx = point_context(o, convention_or(c, DetuningConvention::laser_minus_cavity),
                                   c.self_consistent);
    const auto mv = mechanics(ctx, parse_mode(c.mode));
    const auto ov = output_variances(ctx.params, ctx.ep, mv);
    const auto f = output_field(ctx.params, ctx.derived, ctx.ep, ctx.detuning);
    json out = point_json(ctx);
    out["var_i_out"] = ov.var_i_out;
    out["var_phi_out"] = ov.var_phi_out;
    out["delta_i_out"] = ov.delta_i_out;
    out["alpha_out_re"] = f.alpha_out.real();
    out["alpha_out_im"] = f.alpha_out.imag();
    emit(c, out.dump(2) + "\n");
    return 0;
}

struct EvolveArgs {
    double t_end = 0.0;
    double rel_tol = 1e-8;
    std::size_t samples = 2001;
    double x0 = 0.0, p0 = 0.0, alpha_re = 0.0, alpha_im = 0.0;
};

int cmd_evolve(const Common& c, const EvolveArgs& a) {
    const auto o = apply_overrides(c);
    const auto conv = convention_or(c, DetuningConvention::laser_minus_cavity);
    double detuning = o.params.detuning();
    if (auto it = o.point.find("detuning_ratio"); it != o.point.end()) {
        detuning = convention_sign(conv) * it->second * o.params.omega_m;
    }
    const auto d = derive_scalars(o.params);
    const auto traj = integrate(o.params, d, detuning, {0.0, a.x0, a.p0, cplx(a.alpha_re, a.alpha_im)},
                                a.t_end, {a.rel_tol, a.samples});
    std::ostringstream os;
    os << "t,x_m,p_m,alpha_re,alpha_im,alpha_abs_sq\n";
    for (const auto& s : traj.samples) {
        os << format_double(s.t) << ',' << format_double(s.x_m) << ',' << format_double(s.p_m) << ','
           << format_double(s.alpha.real()) << ',' << format_double(s.alpha.imag()) << ','
           << format_double(std::norm(s.alpha)) << '\n';
    }
    emit(c, os.str());
    if (traj.diverged) {
        std::cerr << json{{"error", "physics"},
                          {"code", "trajectory_diverged"},
                          {"message", "evolve: state norm exceeded 1e12"},
                          {"t", traj.t_diverged}}
                         .dump()
                  << "\n";
        return 2;
    }
    return 0;
}

Axis parse_axis(const std::string& text) {
    if (const auto eq = text.find('='); eq != std::string::npos) {
        Axis ax;
        ax.name = parse_axis_name(text.substr(0, eq));
        std::stringstream ss(text.substr(eq + 1));
        std::string item;
        while (std::getline(ss, item, ',')) {
            ax.explicit_values.push_back(parse_number(std::string(to_string(ax.name)), item));
        }
        if (ax.explicit_values.empty()) {
            throw ValidationError("axis", "axis: no values in \"" + text + "\"");
        }
        return ax;
    }
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 4 && parts.size() != 5) {
        throw ValidationError("axis", "axis: expected name:min:max:count[:linear|log] or "
                                      "name=v1,v2,..., got \"" + text + "\"");
    }
    Axis ax;
    ax.name = parse_axis_name(parts[0]);
    const std::string field(to_string(ax.name));
    ax.min = parse_number(field, parts[1]);
    ax.max = parse_number(field, parts[2]);
    const double count = parse_number(field, parts[3]);
    if (!(count >= 0.0) || count != std::floor(count)) {
        throw ValidationError(field, field + ": count must be a non-negative integer");
    }
    ax.count = static_cast<std::size_t>(count);
    if (parts.size() == 5) {
        if (parts[4] == "log") ax.spacing = Spacing::log;
        else if (parts[4] != "linear") throw ValidationError(field, field + ": spacing must be linear or log");
    }
    return ax;
}

/// Applies the common flags to a sweep spec: point-type overrides become
/// fixed values, and mode/convention/threads are copied over.
void finish_spec(SweepSpec& spec, const Common& c, const Overrides& o) {
    for (const auto& [k, v] : o.point) spec.fixed[k] = v;
    spec.mode = parse_mode(c.mode);
    spec.convention = convention_or(c, spec.convention);
    spec.self_consistent = spec.self_consistent || c.self_consistent;
    spec.threads = c.threads;
}

int run_and_emit(const Common& c, const PhysicalParams& p, const SweepSpec& spec) {
    emit(c, to_csv(run_sweep(p, spec)));
    return 0;
}

struct SweepArgs {
    std::vector<std::string> observables;
    std::vector<std::string> axes;
    std::size_t budget = 2'000'000;
};

int cmd_sweep(const Common& c, const SweepArgs& a) {
    const auto o = apply_overrides(c);
    SweepSpec spec;
    for (const auto& s : a.observables) spec.observables.push_back(parse_observable(s));
    for (const auto& s : a.axes) spec.axes.push_back(parse_axis(s));
    spec.budget = a.budget;
    finish_spec(spec, c, o);
    return run_and_emit(c, o.params, spec);
}

int cmd_figure(const Common& c, const figures::Figure& fig) {
    const auto o = apply_overrides(c);
    SweepSpec spec = fig.spec;
    finish_spec(spec, c, o);
    return run_and_emit(c, o.params, spec);
}

int cmd_table1(const Common& c) {
    const auto o = apply_overrides(c);
    json arr = json::array();
    for (const auto& r : table1_ranges(o.params)) {
        arr.push_back(json{{"detuning_ratio", r.detuning_ratio},
                           {"x_bar_range", {r.x_min, r.x_max}},
                           {"eta_range", {r.eta_min, r.eta_max}},
                           {"beta_range", {r.beta_min, r.beta_max}}});
    }
    emit(c, arr.dump(2) + "\n");
    return 0;
}

void print_error(const std::string& kind, const std::string& key, const std::string& key_value,
                 const std::string& message) {
    std::cerr << json{{"error", kind}, {key, key_value}, {"message", message}}.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optomechanical squeezing model: steady states, stability, variances, sweeps"};
    app.require_subcommand(1, 1);

    Common common;
    EvolveArgs evolve;
    SweepArgs sweep;

    auto add_common = [&](CLI::App* sub, bool point) {
        sub->add_option("--config", common.config, "JSON parameter file")->required();
        sub->add_option("--out", common.out, "output file (default: stdout)");
        sub->add_option("--override,--overrides", common.overrides,
                        "key=value; physical keys (SI, rad/s) or detuning_ratio, beta, eta, "
                        "operating_detuning_ratio")
            ->take_all();
        sub->add_option("--convention", common.convention,
                        "detuning axis: laser_minus_cavity | cavity_minus_laser");
        if (point) {
            sub->add_option("--mode", common.mode,
                            "high-t: closed forms; exact: quadrature with exact coth")
                ->check(CLI::IsMember({"exact", "high-t"}));
            sub->add_flag("--self-consistent", common.self_consistent,
                          "re-solve the steady state at the point's detuning");
        }
    };

    std::map<std::string, std::function<int()>> handlers;

    auto* steady = app.add_subcommand("steady", "all three steady-state roots (JSON)");
    add_common(steady, false);
    handlers["steady"] = [&] { return cmd_steady(common); };

    auto* stability = app.add_subcommand("stability", "drift-matrix eigenvalues and margin (JSON)");
    add_common(stability, true);
    handlers["stability"] = [&] { return cmd_stability(common); };

    auto* variance = app.add_subcommand("variance", "mechanical quadrature variances (JSON)");
    add_common(variance, true);
    handlers["variance"] = [&] { return cmd_variance(common); };

    auto* output = app.add_subcommand("output", "output variances and field (JSON)");
    add_common(output, true);
    handlers["output"] = [&] { return cmd_output(common); };

    auto* ev = app.add_subcommand("evolve", "mean-field trajectory (CSV)");
    add_common(ev, false);
    ev->add_option("--t-end", evolve.t_end, "end time, s")->required();
    ev->add_option("--rel-tol", evolve.rel_tol, "local relative tolerance");
    ev->add_option("--samples", evolve.samples, "uniform output samples");
    ev->add_option("--x0", evolve.x0, "initial x_m");
    ev->add_option("--p0", evolve.p0, "initial p_m");
    ev->add_option("--alpha-re", evolve.alpha_re, "initial Re(alpha)");
    ev->add_option("--alpha-im", evolve.alpha_im, "initial Im(alpha)");
    handlers["evolve"] = [&] { return cmd_evolve(common, evolve); };

    auto* sw = app.add_subcommand("sweep", "grid of observables (CSV)");
    add_common(sw, true);
    sw->add_option("--observable", sweep.observables, "observable name (repeatable)")
        ->required()
        ->take_all();
    sw->add_option("--axis", sweep.axes,
                   "name:min:max:count[:linear|log] or name=v1,v2,... (one or two)")
        ->required()
        ->take_all();
    sw->add_option("--budget", sweep.budget, "maximum number of grid points");
    sw->add_option("--threads", common.threads, "worker threads (0: all cores)");
    handlers["sweep"] = [&] { return cmd_sweep(common, sweep); };

    for (const auto& fig : figures::all()) {
        const std::string name(fig.name);
        auto* sub = app.add_subcommand(name, std::string(fig.summary));
        add_common(sub, true);
        sub->add_option("--threads", common.threads, "worker threads (0: all cores)");
        handlers[name] = [&common, fig] { return cmd_figure(common, fig); };
    }

    auto* t1 = app.add_subcommand("table1", "beta and eta ranges from displacement endpoints (JSON)");
    add_common(t1, false);
    handlers["table1"] = [&] { return cmd_table1(common); };

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("validation", "field", "arguments", e.what());
        return 1;
    }

    try {
        return handlers.at(app.get_subcommands().front()->get_name())();
    } catch (const ValidationError& e) {
        print_error("validation", "field", e.field(), e.what());
        return 1;
    } catch (const PhysicsError& e) {
        print_error("physics", "code", std::string(to_string(e.code())), e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error("internal", "field", "", e.what());
        return 1;
    }
}
