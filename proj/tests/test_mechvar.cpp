#include <gtest/gtest.h>

#include "optomech/mechvar.hpp"
#include "optomech/steadystate.hpp"
#include "support.hpp"

using namespace optomech;
using optomech::testing::mp;
using optomech::testing::reference;
using optomech::testing::rel_diff;
using optomech::testing::Rng;

namespace {

EffectiveParams reference_ep(const PhysicalParams& p) {
    const auto d = derive_scalars(p);
    const auto op = select_operating_point(solve_cubic(p, d, p.detuning()));
    return effective_params(p, d, op.state, p.detuning());
}

// A cooling point with substantial optical damping but Gamma_eff << kappa.
EffectiveParams cooling_ep(const PhysicalParams& p, double g_over_kappa) {
    return {g_over_kappa * p.kappa, 0.0, 0.0, -p.omega_m};
}

PhysicsErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const PhysicsError& e) {
        return e.code();
    }
    ADD_FAILURE() << "no PhysicsError";
    return PhysicsErrorCode::degenerate_coupling;
}

}  // namespace

TEST(MechVar, ThermalSpectrumWithoutCoupling) {
    const auto p = reference();
    EffectiveParams ep;
    ep.delta_tilde = p.omega_m;
    const double w = 1.3 * p.omega_m;
    const auto s = position_spectrum(p, ep, w);
    const double kt = 2.0 * constants::k_boltzmann * p.temperature / constants::hbar;
    EXPECT_DOUBLE_EQ(s.s_x.real(), 2.0 * p.gamma_m * p.omega_m * (w + kt));
    EXPECT_EQ(s.s_x.imag(), 0.0);
    EXPECT_FALSE(s.coth_divergent);
}

TEST(MechVar, ThermalWeightLimits) {
    bool divergent = false;
    EXPECT_EQ(detail::thermal_weight(3.0, 0.0, ThermalMode::exact, &divergent), 6.0);
    EXPECT_EQ(detail::thermal_weight(-3.0, 0.0, ThermalMode::exact, &divergent), 0.0);
    EXPECT_FALSE(divergent);
    const double limit = 2.0 * constants::k_boltzmann * 10.0 / constants::hbar;
    EXPECT_EQ(detail::thermal_weight(0.0, 10.0, ThermalMode::exact, &divergent), limit);
    EXPECT_TRUE(divergent);
    // Exact and high-temperature weights meet when hbar Omega << k_B T.
    const double w = 1e-4 * limit;
    EXPECT_NEAR(detail::thermal_weight(w, 10.0, ThermalMode::exact, nullptr) /
                    detail::thermal_weight(w, 10.0, ThermalMode::high_temperature, nullptr),
                1.0, 1e-8);
}

TEST(MechVar, OpticalSpectrumAgainstMultiprecision) {
    const auto p = reference();
    const EffectiveParams ep{0.03 * p.omega_m, 0.1, 0.0, -0.97 * p.omega_m};
    for (double r : {0.2, 0.95, 1.0, 1.4}) {
        const double w = r * p.omega_m;
        const auto s = position_spectrum(p, ep, w);
        const mp om = p.omega_m, k = p.kappa, dt = ep.delta_tilde, g = ep.g_eff, W = w;
        const mp kt = 2 * mp(constants::k_boltzmann) * mp(p.temperature) / mp(constants::hbar);
        const mp det = dt * dt + k * k / 4 - W * W;
        const mp a1 = 1 / (det * det + k * k * W * W);
        const mp re = a1 * g * g * om * om * (k / 2) * (dt * dt - W * W + k * k / 4) +
                      2 * mp(p.gamma_m) * om * (W + kt);
        const mp im = -a1 * g * g * om * om * (k / 2) * k * dt;
        EXPECT_LE(rel_diff(s.s_x.real(), re.convert_to<double>()), 1e-13);
        EXPECT_LE(rel_diff(s.s_x.imag(), im.convert_to<double>()), 1e-13);
    }
}

TEST(MechVar, UncoupledOscillatorIsThermal) {
    const auto p = reference();
    EffectiveParams ep;
    ep.delta_tilde = p.omega_m;
    const auto mv = variances_closed_form(p, ep);
    const double n_th = derive_scalars(p).n_thermal;
    EXPECT_NEAR(mv.var_p / (1.0 + n_th), 1.0, 1e-14);
    EXPECT_EQ(mv.var_x, mv.var_p);
    EXPECT_EQ(mv.gamma_eff, p.gamma_m);
    EXPECT_TRUE(mv.satisfies_heisenberg());
}

TEST(MechVar, GroundStateLimit) {
    auto p = with_override(reference(), "temperature", 0.0);
    EffectiveParams ep;
    ep.delta_tilde = 0.4 * p.omega_m;
    const auto mv = variances_closed_form(p, ep);
    EXPECT_EQ(mv.var_x, 1.0);
    EXPECT_EQ(mv.var_p, 1.0);
    EXPECT_EQ(mv.n_eff, 0.0);
    EXPECT_EQ(mv.heisenberg_product, 1.0);
}

TEST(MechVar, InstabilitiesAreClassified) {
    const auto p = reference();
    const EffectiveParams heating{0.05 * p.omega_m, 0.0, 0.0, p.omega_m};
    EXPECT_EQ(code_of([&] { variances_closed_form(p, heating); }), PhysicsErrorCode::parametric_instability);
    const EffectiveParams buckled{0.0, 1.3, 0.0, -p.omega_m};
    EXPECT_EQ(code_of([&] { variances_closed_form(p, buckled); }), PhysicsErrorCode::static_instability);
}

TEST(MechVar, PhononNumberIdentityAndInversion) {
    const auto p = reference();
    Rng rng(6);
    for (int i = 0; i < 200; ++i) {
        const EffectiveParams ep{rng.uniform(0.0, 0.1) * p.kappa, rng.uniform(0.0, 0.9), 0.0,
                                 rng.uniform(-1.5, -0.5) * p.omega_m};
        const auto mv = variances_closed_form(p, ep);
        EXPECT_LE(rel_diff(mv.n_eff + 0.5, (mv.var_x + mv.var_p) / 4.0), 1e-14);
        EXPECT_LE(rel_diff(position_variance_from_phonons(mv.n_eff, mv.var_p), mv.var_x), 1e-12);
        EXPECT_EQ(mv.heisenberg_product, mv.var_x * mv.var_p);
    }
}

TEST(MechVar, UncertaintyBoundOnReferenceGrid) {
    const auto p = reference();
    const auto base = reference_ep(p);
    for (int i = 0; i < 40; ++i) {
        for (int j = 0; j < 40; ++j) {
            auto ep = with_eta(base, (0.5 + i / 39.0) * -p.omega_m, 0.0, p.omega_m);
            ep = with_beta(ep, 0.95 * j / 39.0);
            const auto mv = variances_closed_form(p, ep);
            EXPECT_GE(mv.heisenberg_product, 1.0);
        }
    }
}

TEST(MechVar, BetaRaisesPositionButNotMomentumVariance) {
    const auto p = with_override(reference(), "p_in", 0.5445);
    const auto base = cooling_ep(p, 0.3);
    const double var_p = variances_closed_form(p, base).var_p;
    double prev = 0.0;
    for (int j = 0; j < 50; ++j) {
        const auto mv = variances_closed_form(p, with_beta(base, 0.98 * j / 49.0));
        EXPECT_EQ(mv.var_p, var_p);
        EXPECT_GT(mv.var_x, prev);
        prev = mv.var_x;
    }
}

TEST(MechVar, MomentumVarianceIsLinearInTemperature) {
    const auto base = reference();
    const EffectiveParams ep = cooling_ep(base, 0.2);
    const auto p1 = with_override(base, "temperature", 100.0);
    const auto p2 = with_override(base, "temperature", 100.5);
    const auto m1 = variances_closed_form(p1, ep), m2 = variances_closed_form(p2, ep);
    const double slope = (m2.var_p - m1.var_p) / 0.5;
    const double expected = (base.gamma_m / m1.gamma_eff) * 2.0 * constants::k_boltzmann /
                            (constants::hbar * base.omega_m);
    EXPECT_LE(rel_diff(slope, expected), 1e-6);
}

TEST(MechVar, QuadratureReproducesThermalOccupation) {
    // A bare damped oscillator with the full Bose weight has both variances
    // equal to coth(hbar Omega_m / 2 k_B T), up to O(Gamma_m / Omega_m).
    for (double t : {0.5, 4.0, 133.5}) {
        const auto p = with_override(reference(), "temperature", t);
        EffectiveParams ep;
        ep.delta_tilde = -p.omega_m;
        const double y = constants::hbar * p.omega_m / (2.0 * constants::k_boltzmann * t);
        const double expected = 1.0 / std::tanh(y);
        const auto q = variances_by_quadrature(p, ep, 20.0 * p.omega_m, 1e-8, ThermalMode::exact);
        EXPECT_LE(rel_diff(q.var_x, expected), 1e-4) << "T = " << t;
        EXPECT_LE(rel_diff(q.var_p, expected), 1e-4) << "T = " << t;
        EXPECT_TRUE(std::isnan(q.a2));
        EXPECT_LE(q.var_x_error, 1e-8 * q.var_x);
        // The closed forms use the high-temperature weight, 1 + n_th.
        const auto cf = variances_closed_form(p, ep);
        EXPECT_NEAR(cf.var_p - expected, 1.0 - y / 3.0, 1e-3);
    }
}

TEST(MechVar, QuadratureApproachesClosedFormAsTheLineNarrows) {
    // The closed forms treat the dressed mechanical line as Lorentzian, which
    // holds when Gamma_eff << kappa: the deviation falls with the coupling.
    const auto p = reference();
    double prev = INFINITY;
    for (double g : {0.2, 0.1, 0.05, 0.025}) {
        const auto ep = cooling_ep(p, g);
        const auto cf = variances_closed_form(p, ep);
        const auto q = variances_by_quadrature(p, ep, 20.0 * p.omega_m, 1e-8);
        const double dev = std::abs(q.var_p / cf.var_p - 1.0);
        EXPECT_LT(dev, prev) << "G/kappa = " << g;
        prev = dev;
    }
    EXPECT_LT(prev, 0.01);
}

TEST(MechVar, QuadratureValidatesItsInputs) {
    const auto p = reference();
    EffectiveParams ep;
    ep.delta_tilde = -p.omega_m;
    auto field_of = [&](double omega_max, double tol) -> std::string {
        try {
            variances_by_quadrature(p, ep, omega_max, tol);
        } catch (const ValidationError& e) {
            return e.field();
        }
        return "";
    };
    EXPECT_EQ(field_of(2.0 * p.omega_m, 1e-6), "omega_max");
    EXPECT_EQ(field_of(20.0 * p.omega_m, 1e-1), "rel_tol");
    EXPECT_EQ(field_of(20.0 * p.omega_m, 1e-12), "rel_tol");
    EXPECT_EQ(field_of(20.0 * p.omega_m, 1e-6), "");
}

TEST(MechVar, BreakpointsAreSortedInsideTheRange) {
    const auto p = reference();
    const auto ep = cooling_ep(p, 0.1);
    const double w_max = 20.0 * p.omega_m;
    const auto b = detail::quadrature_breakpoints(p, ep, w_max);
    ASSERT_GE(b.size(), 3u);
    EXPECT_EQ(b.front(), 0.0);
    EXPECT_EQ(b.back(), w_max);
    EXPECT_TRUE(std::is_sorted(b.begin(), b.end()));
    EXPECT_TRUE(std::adjacent_find(b.begin(), b.end()) == b.end());
}
