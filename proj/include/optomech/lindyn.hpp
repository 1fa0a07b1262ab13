#pragma once

// Linearized fluctuation dynamics around a stable operating point: effective
// parameters, the 4x4 drift matrix of (dx_m, dp_m, dI, dphi), its stability,
// and the light-modified mechanical susceptibility.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "optomech/error.hpp"
#include "optomech/params.hpp"
#include "optomech/steadystate.hpp"

namespace optomech {

struct EffectiveParams {
    double g_eff = 0.0;        // G = g_M |alpha_bar|, rad/s
    double beta = 0.0;         // geometrical nonlinearity
    double eta = 0.0;          // optical nonlinearity g_M x_bar_m / Omega_m
    double delta_tilde = 0.0;  // effective detuning, rad/s
};

struct DriftMatrix {
    Eigen::Matrix4d entries;
};

struct StabilityReport {
    bool stable = false;
    double margin = 0.0;  // -max Re(lambda)
    std::array<cplx, 4> eigenvalues{};
};

struct Susceptibility {
    double omega = 0.0;
    cplx chi;
    double omega_eff_sq = 0.0;
    double gamma_eff = 0.0;
    double a1 = 0.0;
};

inline EffectiveParams effective_params(const PhysicalParams& p, const DerivedScalars& d,
                                        const SteadyState& ss, double detuning) {
    if (!ss.is_real()) {
        throw PhysicsError(PhysicsErrorCode::linearization_refused,
                           "linearization: steady state is not a real root");
    }
    const double xm = ss.x_bar_m.real();
    const double xz = d.x_zpf;
    EffectiveParams ep;
    ep.g_eff = d.g_m * std::sqrt(std::max(0.0, ss.alpha_bar_sq.real()));
    ep.beta = 3.0 * p.beta_prime * xz * xz * xm * xm / (p.omega_m * p.omega_m);
    ep.eta = d.g_m * xm / p.omega_m;
    ep.delta_tilde = detuning + d.g_m * xm;
    return ep;
}

/// Treats eta as a free parameter: only the effective detuning moves,
/// Delta_tilde = Delta + eta * Omega_m. The steady state is not re-solved.
inline EffectiveParams with_eta(EffectiveParams ep, double detuning, double eta, double omega_m) {
    ep.eta = eta;
    ep.delta_tilde = detuning + eta * omega_m;
    return ep;
}

inline EffectiveParams with_beta(EffectiveParams ep, double beta) {
    ep.beta = beta;
    return ep;
}

inline DriftMatrix drift_matrix(const PhysicalParams& p, const EffectiveParams& ep) {
    const double om = p.omega_m;
    const double half_kappa = 0.5 * p.kappa;
    DriftMatrix m;
    // clang-format off
    m.entries <<
        0.0,                  om,         0.0,             0.0,
        om * (ep.beta - 1.0), -p.gamma_m, ep.g_eff,        0.0,
        0.0,                  0.0,        -half_kappa,     -ep.delta_tilde,
        ep.g_eff,             0.0,        ep.delta_tilde,  -half_kappa;
    // clang-format on
    return m;
}

/// Coefficients {1, c3, c2, c1, c0} of det(lambda I - A), by Faddeev-LeVerrier.
inline std::array<double, 5> characteristic_polynomial(const DriftMatrix& m) {
    const Eigen::Matrix4d& a = m.entries;
    std::array<double, 5> c{};
    c[0] = 1.0;
    Eigen::Matrix4d mk = Eigen::Matrix4d::Zero();
    for (int k = 1; k <= 4; ++k) {
        mk = a * mk + c[k - 1] * Eigen::Matrix4d::Identity();
        c[k] = -(a * mk).trace() / k;
    }
    return c;
}

/// Routh-Hurwitz test for a monic quartic lambda^4 + a1 lambda^3 + ... + a4.
inline bool routh_hurwitz_stable(const std::array<double, 5>& c) {
    const double a1 = c[1], a2 = c[2], a3 = c[3], a4 = c[4];
    if (!(a1 > 0.0 && a2 > 0.0 && a3 > 0.0 && a4 > 0.0)) return false;
    if (!(a1 * a2 - a3 > 0.0)) return false;
    return a1 * a2 * a3 - a1 * a1 * a4 - a3 * a3 > 0.0;
}

/// Roots of a monic quartic from the eigenvalues of its companion matrix,
/// after rescaling lambda = s * mu so the coefficients are O(1).
inline std::array<cplx, 4> quartic_roots(const std::array<double, 5>& c) {
    double s = 0.0;
    for (int k = 1; k <= 4; ++k) s = std::max(s, std::pow(std::abs(c[k]), 1.0 / k));
    if (s == 0.0) return {};
    Eigen::Matrix4d companion = Eigen::Matrix4d::Zero();
    double sk = 1.0;
    for (int k = 1; k <= 4; ++k) {
        sk *= s;
        companion(0, k - 1) = -c[k] / sk;
    }
    companion(1, 0) = companion(2, 1) = companion(3, 2) = 1.0;
    Eigen::EigenSolver<Eigen::Matrix4d> solver(companion, false);
    std::array<cplx, 4> roots;
    for (int i = 0; i < 4; ++i) roots[i] = solver.eigenvalues()(i) * s;
    return roots;
}

inline StabilityReport is_dynamically_stable(const DriftMatrix& m) {
    StabilityReport r;
    r.eigenvalues = quartic_roots(characteristic_polynomial(m));
    double max_re = -std::numeric_limits<double>::infinity();
    for (const auto& ev : r.eigenvalues) max_re = std::max(max_re, ev.real());
    r.margin = -max_re;
    r.stable = max_re < 0.0;
    return r;
}

namespace detail {

// Susceptibility without the static-stability check; the quadrature oracle
// evaluates it far from resonance where Omega_eff^2(Omega) may change sign.
inline Susceptibility susceptibility_unchecked(const PhysicalParams& p, const EffectiveParams& ep,
                                               double omega) {
    const double om = p.omega_m;
    const double dt = ep.delta_tilde;
    const double k = p.kappa;
    const double g2 = ep.g_eff * ep.g_eff;
    const double w2 = omega * omega;
    const double detuned = dt * dt + 0.25 * k * k - w2;
    Susceptibility s;
    s.omega = omega;
    s.a1 = 1.0 / (detuned * detuned + k * k * w2);
    s.omega_eff_sq = om * om * (1.0 + s.a1 * g2 * (dt / om) * detuned - ep.beta);
    s.gamma_eff = p.gamma_m - s.a1 * g2 * om * dt * k;
    s.chi = 1.0 / cplx(s.omega_eff_sq - w2, -omega * s.gamma_eff);
    return s;
}

}  // namespace detail

inline Susceptibility susceptibility(const PhysicalParams& p, const EffectiveParams& ep,
                                     double omega) {
    auto s = detail::susceptibility_unchecked(p, ep, omega);
    if (!(s.omega_eff_sq > 0.0)) {
        throw PhysicsError(PhysicsErrorCode::static_instability,
                           "susceptibility: Omega_eff^2 <= 0 (linearized potential buckled)");
    }
    return s;
}

}  // namespace optomech
