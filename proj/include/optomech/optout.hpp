#pragma once

// Optical side: output intensity/phase spectra, their quasi-resonant
// variances and the reflected coherent field.

#include <cmath>
#include <complex>

#include "optomech/lindyn.hpp"
#include "optomech/mechvar.hpp"
#include "optomech/params.hpp"

namespace optomech {

struct OutputSpectraPoint {
    double omega = 0.0;
    double s_i_out = 0.0;    // Re S_I^out
    double s_phi_out = 0.0;  // Re S_phi^out
    double s_i_out_imag = 0.0;
    double s_phi_out_imag = 0.0;
    double A = 0.0, B = 0.0, C = 0.0, D = 0.0, E = 0.0;
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
    double a1 = 0.0;
    cplx a3;
};

struct OutputVariances {
    double var_i_out = 0.0;
    double var_phi_out = 0.0;
    double delta_i_out = 0.0;  // sqrt(var_i_out)
};

struct OutputField {
    cplx alpha_out;
    double a4 = 0.0;
    double a5 = 0.0;
    double alpha_in = 0.0;  // c-number input amplitude used
};

/// Boundary condition between the intracavity and the propagating fields.
inline cplx input_output(cplx alpha_in, cplx alpha_cavity, double kappa) {
    return -alpha_in + std::sqrt(kappa) * alpha_cavity;
}

/// chi and sx must be evaluated at the same omega.
inline OutputSpectraPoint output_spectra(const PhysicalParams& p, const EffectiveParams& ep,
                                         const Susceptibility& chi,
                                         const PositionSpectrumPoint& sx, double omega) {
    const double om = p.omega_m;
    const double k = p.kappa;
    const double k2 = k * k;
    const double dt = ep.delta_tilde;
    const double g2 = ep.g_eff * ep.g_eff;
    const double w = omega;
    const double w2 = w * w;
    const double oe2 = chi.omega_eff_sq;
    const double ge = chi.gamma_eff;

    const double cav = dt * dt + 0.25 * k2 - w2;  // Delta~^2 + kappa^2/4 - Omega^2
    const double out = w2 + 0.25 * k2 - dt * dt;  // Omega^2 + kappa^2/4 - Delta~^2

    OutputSpectraPoint r;
    r.omega = omega;
    r.a1 = 1.0 / (cav * cav + k2 * w2);
    const cplx z = cplx(0.5 * k, -w);
    r.a3 = 1.0 / (z * z + dt * dt);

    const double a1 = r.a1;
    r.a = a1 * a1 * k * (dt * cav - w * out);
    r.b = a1 * a1 * (cav * out + dt * k2 * w);
    r.c = 2.0 * (w - dt) * out + k2 * dt;
    r.d = 2.0 * dt * (w - dt) - out;

    r.A = r.a * dt * g2 * om * k * (oe2 - w2) * (dt - w);
    r.B = r.b * dt * g2 * om * k * w * ge * (dt - w);
    r.C = dt * g2 * 0.25 * k2 * om * (2.0 * r.b * (oe2 - w2) - 2.0 * r.a * w * ge);
    r.D = ((oe2 - w2) * cav + k * w2 * ge) * (0.5 * r.c - w * r.d) * k * a1;
    r.E = (k * (oe2 - w2) - ge * cav) * (w * r.c + 0.5 * k2 * r.d) * w * a1;

    const cplx mech = std::norm(chi.chi) * sx.s_x;
    const double input_floor = 0.5 * a1 * out * out + a1 * dt * dt * k2;
    const cplx s_i = a1 * dt * dt * g2 * k * mech + input_floor + r.A - r.B - r.C;
    const cplx s_phi =
        a1 * g2 * k * (0.25 * k2 + w2) * mech + input_floor + g2 * k * om * (r.D + r.E);
    r.s_i_out = s_i.real();
    r.s_i_out_imag = s_i.imag();
    r.s_phi_out = s_phi.real();
    r.s_phi_out_imag = s_phi.imag();
    return r;
}

/// Quasi-resonant output variances. As written they carry no additive
/// shot-noise floor, so G = 0 gives zero.
inline OutputVariances output_variances(const PhysicalParams& p, const EffectiveParams& ep,
                                        const MechanicalVariances& mv) {
    const double om = p.omega_m;
    const double d = ep.delta_tilde / om;
    const double k = p.kappa / om;
    const double x = d * d + 0.25 * k * k - 1.0;
    const double coupling = (ep.g_eff * ep.g_eff / (om * om)) * p.kappa / (x * x + k * k);
    OutputVariances ov;
    ov.var_i_out = d * d * coupling * mv.var_x;
    ov.var_phi_out = (1.0 + 0.25 * k * k) * coupling * mv.var_x;
    ov.delta_i_out = std::sqrt(ov.var_i_out);
    return ov;
}

/// Reflected mean field at laser detuning `detuning` (omega_l - omega_c),
/// with the optical nonlinearity entering through Delta/Omega_m + eta.
inline OutputField output_field(const PhysicalParams& p, const DerivedScalars& d,
                                const EffectiveParams& ep, double detuning) {
    const double om = p.omega_m;
    const double k = p.kappa / om;
    const double sqrt_kappa = std::sqrt(p.kappa);
    const double u = detuning / om + ep.eta - 1.0;
    const double eps = d.epsilon_in;

    OutputField f;
    f.alpha_in = p.alpha_in_scale * eps / sqrt_kappa;
    f.a4 = 0.25 * k * k * f.alpha_in + u * (u * f.alpha_in + (sqrt_kappa / om) * eps);
    f.a5 = u * k * f.alpha_in - (p.kappa * sqrt_kappa / (2.0 * om * om)) * eps;
    f.alpha_out = cplx(f.a4, f.a5) / (u * u + 0.25 * k * k);
    return f;
}

}  // namespace optomech
