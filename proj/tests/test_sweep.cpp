#include <gtest/gtest.h>

#include "optomech/figures.hpp"
#include "support.hpp"

using namespace optomech;
using optomech::testing::reference;
using optomech::testing::rel_diff;

namespace {

SweepSpec small_spec() {
    SweepSpec s;
    s.observables = {Observable::var_x, Observable::var_p, Observable::stability_margin, Observable::alpha_out_abs};
    s.axes = {figures::linear_axis(AxisName::detuning_ratio, 0.5, 1.5, 21),
              figures::linear_axis(AxisName::beta, 0.0, 0.9, 7)};
    s.fixed = {{"p_in", 0.1}, {"operating_detuning_ratio", 1.0}};
    s.convention = DetuningConvention::cavity_minus_laser;
    return s;
}

std::string validation_field(const SweepSpec& s) {
    try {
        validate(s);
    } catch (const ValidationError& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST(Sweep, AxisValues) {
    const auto lin = figures::linear_axis(AxisName::eta, -1.0, 1.0, 5).values();
    EXPECT_EQ(lin, (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
    Axis log = figures::linear_axis(AxisName::p_in, 1e-6, 1e-2, 5);
    log.spacing = Spacing::log;
    const auto v = log.values();
    ASSERT_EQ(v.size(), 5u);
    EXPECT_EQ(v.front(), 1e-6);
    EXPECT_EQ(v.back(), 1e-2);
    for (std::size_t i = 1; i < 5; ++i) EXPECT_NEAR(v[i] / v[i - 1], 10.0, 1e-12);
}

TEST(Sweep, SinglePointMatchesDirectEvaluation) {
    const auto p = reference();
    SweepSpec s = small_spec();
    s.axes = {figures::list_axis(AxisName::detuning_ratio, {0.93}), figures::list_axis(AxisName::beta, {0.2})};
    const auto row = run_sweep(p, s).rows.at(0);

    PointInputs in;
    in.detuning_ratio = 0.93;
    in.beta = 0.2;
    in.p_in = 0.1;
    in.operating_detuning_ratio = 1.0;
    const auto ctx = make_point(p, in, s.convention, false);
    const auto mv = variances_closed_form(ctx.params, ctx.ep);
    EXPECT_EQ(row.values[0], mv.var_x);
    EXPECT_EQ(row.values[1], mv.var_p);
    EXPECT_EQ(row.values[2], is_dynamically_stable(drift_matrix(ctx.params, ctx.ep)).margin);
    EXPECT_EQ(row.values[3], std::abs(output_field(ctx.params, ctx.derived, ctx.ep, ctx.detuning).alpha_out));
    EXPECT_DOUBLE_EQ(ctx.detuning, -0.93 * p.omega_m);
    EXPECT_EQ(ctx.ep.beta, 0.2);
}

TEST(Sweep, ConventionsMirrorTheDetuning) {
    const auto p = reference();
    PointInputs in;
    in.detuning_ratio = 0.8;
    in.eta = 0.01;
    in.operating_detuning_ratio = 1.0;
    const auto a = make_point(p, in, DetuningConvention::laser_minus_cavity, false);
    const auto b = make_point(p, in, DetuningConvention::cavity_minus_laser, false);
    EXPECT_DOUBLE_EQ(a.detuning, -b.detuning);
    EXPECT_DOUBLE_EQ(a.ep.delta_tilde, 0.81 * p.omega_m);
    EXPECT_DOUBLE_EQ(b.ep.delta_tilde, -0.81 * p.omega_m);
}

TEST(Sweep, SelfConsistentModeResolvesTheSteadyState) {
    const auto p = reference();
    PointInputs in;
    in.detuning_ratio = 0.4;
    const auto ctx = make_point(p, in, DetuningConvention::laser_minus_cavity, true);
    const auto d = derive_scalars(p);
    const auto op = select_operating_point(solve_cubic(p, d, 0.4 * p.omega_m));
    const auto ep = effective_params(p, d, op.state, 0.4 * p.omega_m);
    EXPECT_EQ(ctx.ep.g_eff, ep.g_eff);
    EXPECT_EQ(ctx.ep.delta_tilde, ep.delta_tilde);
    EXPECT_EQ(ctx.ep.beta, ep.beta);
}

TEST(Sweep, RepeatedAndParallelRunsAreIdentical) {
    const auto p = reference();
    SweepSpec s = small_spec();
    s.threads = 1;
    const auto serial = to_csv(run_sweep(p, s));
    EXPECT_EQ(serial, to_csv(run_sweep(p, s)));
    for (unsigned t : {2u, 3u, 8u}) {
        s.threads = t;
        EXPECT_EQ(serial, to_csv(run_sweep(p, s))) << t << " threads";
    }
}

TEST(Sweep, RowOrderIsFirstAxisMajor) {
    const auto pts = grid_points(small_spec());
    ASSERT_EQ(pts.size(), 21u * 7u);
    EXPECT_EQ(pts[0], (std::vector<double>{0.5, 0.0}));
    EXPECT_EQ(pts[1][0], 0.5);
    EXPECT_DOUBLE_EQ(pts[7][0], 0.55);
}

TEST(Sweep, BudgetIsEnforcedBeforeEvaluation) {
    SweepSpec s = small_spec();
    s.budget = 100;
    EXPECT_EQ(validation_field(s), "budget");
    EXPECT_THROW(run_sweep(reference(), s), ValidationError);
}

TEST(Sweep, SpecValidation) {
    SweepSpec s = small_spec();
    EXPECT_EQ(validation_field(s), "");

    auto bad = s;
    bad.observables.clear();
    EXPECT_EQ(validation_field(bad), "observable");

    bad = s;
    bad.axes[0].count = 1;
    EXPECT_EQ(validation_field(bad), "detuning_ratio");

    bad = s;
    bad.axes[1].min = 1.0;
    EXPECT_EQ(validation_field(bad), "beta");

    bad = s;
    bad.axes[0].spacing = Spacing::log;
    bad.axes[0].min = 0.0;
    EXPECT_EQ(validation_field(bad), "detuning_ratio");

    bad = s;
    bad.fixed["beta"] = 0.1;
    EXPECT_EQ(validation_field(bad), "beta");

    bad = s;
    bad.fixed["kappa"] = 1.0;
    EXPECT_EQ(validation_field(bad), "kappa");

    bad = s;
    bad.self_consistent = true;
    EXPECT_EQ(validation_field(bad), "self_consistent");

    bad = s;
    bad.axes[1].name = AxisName::detuning_ratio;
    EXPECT_EQ(validation_field(bad), "axes");
}

TEST(Sweep, FailedPointsCarryNanAndCode) {
    const auto p = reference();
    SweepSpec s;
    s.observables = {Observable::var_x, Observable::g_eff};
    s.axes = {figures::list_axis(AxisName::beta, {0.5, 1.5})};
    s.fixed = {{"detuning_ratio", -1.0}};
    const auto rows = run_sweep(p, s).rows;
    EXPECT_TRUE(rows[0].error.empty());
    EXPECT_TRUE(std::isfinite(rows[0].values[0]));
    EXPECT_TRUE(std::isnan(rows[1].values[0]));
    EXPECT_EQ(rows[1].error, "static_instability");
    EXPECT_FALSE(rows[1].stable);
    // Observables that do not need the variances are still reported.
    EXPECT_TRUE(std::isfinite(rows[1].values[1]));

    SweepSpec t;
    t.observables = {Observable::var_x};
    t.axes = {figures::list_axis(AxisName::p_in, {-1.0})};
    EXPECT_EQ(run_sweep(p, t).rows[0].error, "validation:p_in");
}

TEST(Sweep, CsvLayout) {
    SweepResult r;
    r.spec.axes = {figures::list_axis(AxisName::eta, {0.1})};
    r.spec.observables = {Observable::var_x, Observable::var_p};
    SweepRow row;
    row.axis_values = {0.1};
    row.values = {1.0 / 3.0, std::numeric_limits<double>::quiet_NaN()};
    row.stable = true;
    row.error = "parametric_instability";
    r.rows = {row};
    EXPECT_EQ(to_csv(r), "eta,var_x,var_p,stable,multistable,error\n"
                         "0.10000000000000001,0.33333333333333331,nan,1,0,parametric_instability\n");
    EXPECT_EQ(format_double(-INFINITY), "-inf");
}

TEST(Sweep, EnumNamesRoundTrip) {
    for (auto o : {Observable::var_x, Observable::delta_i_out, Observable::alpha_out_im, Observable::eta}) {
        EXPECT_EQ(parse_observable(to_string(o)), o);
    }
    for (auto a : {AxisName::detuning_ratio, AxisName::beta, AxisName::eta, AxisName::p_in, AxisName::temperature}) {
        EXPECT_EQ(parse_axis_name(to_string(a)), a);
    }
    EXPECT_THROW(parse_observable("var_q"), ValidationError);
    EXPECT_EQ(convention_sign(parse_convention("cavity_minus_laser")), -1.0);
}

TEST(Sweep, NonlinearitiesAtZeroDisplacementVanish) {
    const auto p = reference();
    const auto n = nonlinearities_at(p, derive_scalars(p), 0.0);
    EXPECT_EQ(n.beta, 0.0);
    EXPECT_EQ(n.eta, 0.0);
}

TEST(Sweep, NonlinearitiesScaleWithDisplacement) {
    const auto p = reference();
    const auto d = derive_scalars(p);
    const auto a = nonlinearities_at(p, d, 1e-12), b = nonlinearities_at(p, d, 3e-12);
    EXPECT_LE(rel_diff(b.eta / a.eta, 3.0), 1e-14);
    EXPECT_LE(rel_diff(b.beta / a.beta, 9.0), 1e-14);
}

TEST(Sweep, TableRangesAtTheResonantDrive) {
    const auto r = table1_ranges(reference());
    // Delta = 0: the 1 mW operating point sits at the lower displacement endpoint.
    const auto p = with_override(reference(), "detuning", 0.0);
    const auto d = derive_scalars(p);
    const auto op = select_operating_point(solve_cubic(p, d, 0.0));
    EXPECT_LE(rel_diff(op.state.x_bar.real(), 2.77e-11), 0.01);
    const auto ep = effective_params(p, d, op.state, 0.0);
    EXPECT_NEAR(ep.eta / r[0].eta_min, 1.0, 0.01);
    EXPECT_NEAR(ep.beta / r[0].beta_min, 1.0, 0.02);
}

TEST(Sweep, FigureSpecsAreValid) {
    for (const auto& f : figures::all()) {
        EXPECT_EQ(validation_field(f.spec), "") << f.name;
        EXPECT_FALSE(f.summary.empty());
    }
}
