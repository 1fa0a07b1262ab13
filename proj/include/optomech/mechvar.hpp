#pragma once

// Mechanical quadrature fluctuations: the position noise spectrum, the
// quasi-resonant closed forms for <dx_m^2> and <dp_m^2>, and an adaptive
// quadrature of the defining integrals used as their oracle.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "optomech/constants.hpp"
#include "optomech/error.hpp"
#include "optomech/lindyn.hpp"
#include "optomech/params.hpp"

namespace optomech {

/// How coth(hbar Omega / 2 k_B T) enters the thermal part of S_x.
enum class ThermalMode {
    high_temperature,  // coth(y) ~ 1/y, i.e. 2 k_B T / (hbar Omega)
    exact,
};

struct PositionSpectrumPoint {
    double omega = 0.0;
    cplx s_x;
    // Exact mode at Omega = 0, T > 0: coth diverges; s_x then carries the
    // finite limit of Omega * coth, i.e. 2 k_B T / hbar.
    bool coth_divergent = false;
};

struct MechanicalVariances {
    double var_x = 0.0;
    double var_p = 0.0;
    double heisenberg_product = 0.0;
    double n_eff = 0.0;
    double a2 = 0.0;       // Re(a2), rad/s; NaN for the quadrature path
    double a2_imag = 0.0;  // Im(a2), diagnostics only
    double gamma_eff = 0.0;
    double omega_eff_sq = 0.0;
    // Quadrature path only: absolute error estimates.
    double var_x_error = 0.0;
    double var_p_error = 0.0;

    [[nodiscard]] bool satisfies_heisenberg() const noexcept { return heisenberg_product >= 1.0; }
};

namespace detail {

// Omega * (1 + coth(hbar Omega / 2 k_B T)), including the T = 0 and Omega = 0 limits.
inline double thermal_weight(double omega, double temperature, ThermalMode mode, bool* divergent) {
    using constants::hbar;
    using constants::k_boltzmann;
    if (mode == ThermalMode::high_temperature) {
        return omega + 2.0 * k_boltzmann * temperature / hbar;
    }
    if (temperature == 0.0) {
        return omega > 0.0 ? 2.0 * omega : 0.0;
    }
    if (omega == 0.0) {
        if (divergent != nullptr) *divergent = true;
        return 2.0 * k_boltzmann * temperature / hbar;
    }
    const double y = hbar * omega / (2.0 * k_boltzmann * temperature);
    return omega + omega / std::tanh(y);
}

}  // namespace detail

inline PositionSpectrumPoint position_spectrum(const PhysicalParams& p, const EffectiveParams& ep,
                                               double omega,
                                               ThermalMode mode = ThermalMode::high_temperature) {
    const double om = p.omega_m;
    const double k = p.kappa;
    const double dt = ep.delta_tilde;
    const double w2 = omega * omega;
    const double detuned = dt * dt + 0.25 * k * k - w2;
    const double a1 = 1.0 / (detuned * detuned + k * k * w2);

    PositionSpectrumPoint pt;
    pt.omega = omega;
    const cplx optical =
        a1 * ep.g_eff * ep.g_eff * om * om * (0.5 * k) * cplx(dt * dt - w2 + 0.25 * k * k, -k * dt);
    const double thermal =
        2.0 * p.gamma_m * om * detail::thermal_weight(omega, p.temperature, mode, &pt.coth_divergent);
    pt.s_x = optical + thermal;
    return pt;
}

/// <dx_m^2> recovered from the mean phonon number: E = hbar Omega_m (n + 1/2)
/// with E = hbar Omega_m (<dx_m^2> + <dp_m^2>) / 4.
inline double position_variance_from_phonons(double n_eff, double var_p) {
    return 4.0 * (n_eff + 0.5) - var_p;
}

inline MechanicalVariances variances_closed_form(const PhysicalParams& p,
                                                 const EffectiveParams& ep) {
    const double om = p.omega_m;
    const auto chi = detail::susceptibility_unchecked(p, ep, om);
    if (!(chi.gamma_eff > 0.0)) {
        throw PhysicsError(PhysicsErrorCode::parametric_instability,
                           "variances: Gamma_eff(Omega_m) <= 0 (parametric instability)");
    }
    if (!(chi.omega_eff_sq > 0.0)) {
        throw PhysicsError(PhysicsErrorCode::static_instability,
                           "variances: Omega_eff^2(Omega_m) <= 0 (static instability)");
    }

    const double d = ep.delta_tilde / om;
    const double k = p.kappa / om;
    const double x = d * d + 0.25 * k * k - 1.0;
    const cplx optical = (ep.g_eff * ep.g_eff / (om * om)) * p.kappa * cplx(x, -k * d) /
                         (x * x + k * k);
    const double n_th = 2.0 * constants::k_boltzmann * p.temperature / (constants::hbar * om);
    const cplx a2 = optical + 4.0 * p.gamma_m * (1.0 + n_th);

    MechanicalVariances mv;
    mv.a2 = a2.real();
    mv.a2_imag = a2.imag();
    mv.gamma_eff = chi.gamma_eff;
    mv.omega_eff_sq = chi.omega_eff_sq;
    mv.var_p = mv.a2 / (4.0 * chi.gamma_eff);
    // Grouped so that the bare oscillator (Omega_eff = Omega_m) gives var_x == var_p exactly.
    mv.var_x = mv.var_p * ((om * om) / chi.omega_eff_sq);
    mv.heisenberg_product = mv.var_x * mv.var_p;
    mv.n_eff = (mv.var_x + mv.var_p) / 4.0 - 0.5;
    return mv;
}

namespace detail {

// Subinterval boundaries on [0, omega_max] that bracket the mechanical peak
// and the optical features, so each Gauss-Kronrod panel sees a smooth piece.
inline std::vector<double> quadrature_breakpoints(const PhysicalParams& p, const EffectiveParams& ep,
                                                  double omega_max) {
    const auto at_resonance = susceptibility_unchecked(p, ep, p.omega_m);
    const double peak = std::sqrt(std::max(at_resonance.omega_eff_sq, 0.0));
    const double width = std::max(std::abs(at_resonance.gamma_eff), 1e-12 * p.omega_m);
    std::vector<double> pts = {0.0, omega_max, p.omega_m, std::abs(ep.delta_tilde),
                               std::abs(ep.delta_tilde) + p.kappa};
    if (std::abs(ep.delta_tilde) > p.kappa) pts.push_back(std::abs(ep.delta_tilde) - p.kappa);
    if (peak > 0.0) {
        pts.push_back(peak);
        for (double w = 0.5 * width; w < peak; w *= 4.0) {
            pts.push_back(peak - w);
            pts.push_back(peak + w);
        }
    }
    std::erase_if(pts, [&](double v) { return !(v >= 0.0 && v <= omega_max); });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

}  // namespace detail

/// Integrates |chi_eff|^2 Re S_x (and its Omega^2/Omega_m^2-weighted version)
/// over [-omega_max, omega_max]. The integrands are even in Omega, so the
/// integration runs over [0, omega_max] on the symmetrized spectrum.
///
/// At T = 0 the momentum integrand falls off only as 1/Omega, so var_p
/// carries a tail of about (2 Gamma_m / (pi Omega_m)) ln(omega_max / Omega_m)
/// beyond the bare-oscillator value; it vanishes with Gamma_m / Omega_m.
inline MechanicalVariances variances_by_quadrature(const PhysicalParams& p,
                                                   const EffectiveParams& ep, double omega_max,
                                                   double rel_tol,
                                                   ThermalMode mode = ThermalMode::exact) {
    if (!(omega_max >= 10.0 * std::max(p.omega_m, p.kappa))) {
        throw ValidationError("omega_max", "omega_max: must be >= 10 max(Omega_m, kappa)");
    }
    if (!(rel_tol >= 1e-10 && rel_tol <= 1e-2)) {
        throw ValidationError("rel_tol", "rel_tol: must lie in [1e-10, 1e-2]");
    }
    const auto at_resonance = detail::susceptibility_unchecked(p, ep, p.omega_m);
    if (!(at_resonance.gamma_eff > 0.0)) {
        throw PhysicsError(PhysicsErrorCode::parametric_instability,
                           "variances: Gamma_eff(Omega_m) <= 0 (parametric instability)");
    }
    if (!(at_resonance.omega_eff_sq > 0.0)) {
        throw PhysicsError(PhysicsErrorCode::static_instability,
                           "variances: Omega_eff^2(Omega_m) <= 0 (static instability)");
    }

    const double om = p.omega_m;
    auto weighted = [&](double omega) {
        const auto chi = detail::susceptibility_unchecked(p, ep, omega);
        const double s = position_spectrum(p, ep, omega, mode).s_x.real() +
                         position_spectrum(p, ep, -omega, mode).s_x.real();
        return std::norm(chi.chi) * s;
    };
    auto fx = [&](double omega) { return weighted(omega); };
    auto fp = [&](double omega) { return (omega / om) * (omega / om) * weighted(omega); };

    using integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
    constexpr unsigned max_depth = 30;
    const auto pts = detail::quadrature_breakpoints(p, ep, omega_max);

    auto integrate = [&](const auto& f, double& err_out) {
        double total = 0.0, err = 0.0, l1 = 0.0;
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            double e = 0.0, piece_l1 = 0.0;
            total += integrator::integrate(f, pts[i], pts[i + 1], max_depth, 0.1 * rel_tol, &e,
                                           &piece_l1);
            err += e;
            l1 += piece_l1;
        }
        err_out = err;
        if (!(err <= rel_tol * std::abs(total)) || !std::isfinite(total)) {
            throw PhysicsError(PhysicsErrorCode::quadrature_not_converged,
                               "variances: quadrature did not converge (estimated error " +
                                   std::to_string(err) + " for value " + std::to_string(total) +
                                   ", L1 " + std::to_string(l1) + ")");
        }
        return total;
    };

    constexpr double inv_two_pi = 0.5 * std::numbers::inv_pi;
    MechanicalVariances mv;
    double ex = 0.0, ep_err = 0.0;
    mv.var_x = inv_two_pi * integrate(fx, ex);
    mv.var_p = inv_two_pi * integrate(fp, ep_err);
    mv.var_x_error = inv_two_pi * ex;
    mv.var_p_error = inv_two_pi * ep_err;
    mv.a2 = std::numeric_limits<double>::quiet_NaN();
    mv.a2_imag = std::numeric_limits<double>::quiet_NaN();
    mv.gamma_eff = at_resonance.gamma_eff;
    mv.omega_eff_sq = at_resonance.omega_eff_sq;
    mv.heisenberg_product = mv.var_x * mv.var_p;
    mv.n_eff = (mv.var_x + mv.var_p) / 4.0 - 0.5;
    return mv;
}

}  // namespace optomech
