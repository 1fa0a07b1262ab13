#pragma once

// Sweep specifications behind the published figures. The axis ranges are the
// ones visible in the plots; the drive power of the mechanical-variance
// figures is not given with them and is pinned here (see README).

#include <array>
#include <string_view>

#include "optomech/sweep.hpp"

namespace optomech::figures {

/// Drive power for the mechanical-squeezing figures, chosen so that
/// <dp_m^2> = 0.6362 at the cooling sideband with the reference config.
inline constexpr double mechanical_figure_power = 0.5445;  // W
/// Low-power regime of the output-intensity figure.
inline constexpr double output_figure_power = 30e-6;  // W
inline constexpr double output_figure_beta = 5.72e-4;

struct Figure {
    std::string_view name;
    std::string_view summary;
    SweepSpec spec;
};

inline Axis linear_axis(AxisName name, double lo, double hi, std::size_t n) {
    Axis a;
    a.name = name;
    a.min = lo;
    a.max = hi;
    a.count = n;
    return a;
}

inline Axis list_axis(AxisName name, std::vector<double> values) {
    Axis a;
    a.name = name;
    a.explicit_values = std::move(values);
    return a;
}

inline Figure fig1() {
    SweepSpec s;
    s.observables = {Observable::var_p};
    s.axes = {linear_axis(AxisName::detuning_ratio, 0.01, 2.0, 200)};
    s.fixed = {{"eta", 0.0}, {"p_in", mechanical_figure_power}, {"operating_detuning_ratio", 1.0}};
    s.convention = DetuningConvention::cavity_minus_laser;
    return {"fig1", "var_p vs detuning ratio in [0.01, 2] (200 pts), eta = 0, P_in = 0.5445 W", s};
}

inline Figure fig2() {
    SweepSpec s;
    s.observables = {Observable::var_x};
    s.axes = {list_axis(AxisName::beta, {0.1, 0.39, 0.88}),
              linear_axis(AxisName::detuning_ratio, 0.01, 2.0, 200)};
    s.fixed = {{"eta", 0.0}, {"p_in", mechanical_figure_power}, {"operating_detuning_ratio", 1.0}};
    s.convention = DetuningConvention::cavity_minus_laser;
    return {"fig2",
            "var_x vs detuning ratio in [0.01, 2] (200 pts) for beta in {0.1, 0.39, 0.88}, eta = 0",
            s};
}

inline Figure fig3() {
    SweepSpec s;
    s.observables = {Observable::var_x};
    s.axes = {linear_axis(AxisName::eta, 0.0, 0.08, 81),
              linear_axis(AxisName::detuning_ratio, 0.8, 1.2, 401)};
    s.fixed = {{"beta", 0.1}, {"p_in", mechanical_figure_power}, {"operating_detuning_ratio", 1.0}};
    s.convention = DetuningConvention::cavity_minus_laser;
    return {"fig3", "var_x over eta in [0, 0.08] (81) x detuning ratio in [0.8, 1.2] (401), beta = 0.1",
            s};
}

inline Figure fig4() {
    SweepSpec s;
    s.observables = {Observable::var_i_out, Observable::delta_i_out};
    s.axes = {linear_axis(AxisName::eta, -2e-4, 2e-4, 401)};
    s.fixed = {{"detuning_ratio", 0.0},
               {"operating_detuning_ratio", 0.0},
               {"beta", output_figure_beta},
               {"p_in", output_figure_power}};
    s.convention = DetuningConvention::cavity_minus_laser;
    return {"fig4",
            "var_i_out and delta_i_out vs eta in [-2e-4, 2e-4] (401), Delta = 0, P_in = 30 uW, "
            "beta = 5.72e-4",
            s};
}

inline Figure fig5() {
    SweepSpec s;
    s.observables = {Observable::alpha_out_abs};
    s.axes = {list_axis(AxisName::eta, {0.0, 0.02, 0.04, 0.06, 0.08, 0.1}),
              linear_axis(AxisName::detuning_ratio, 0.5, 1.5, 1001)};
    s.convention = DetuningConvention::laser_minus_cavity;
    return {"fig5", "|alpha_out| over eta in {0, 0.02, ..., 0.1} x detuning ratio in [0.5, 1.5] (1001)",
            s};
}

inline std::array<Figure, 5> all() { return {fig1(), fig2(), fig3(), fig4(), fig5()}; }

}  // namespace optomech::figures
