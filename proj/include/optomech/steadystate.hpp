#pragma once

// Stationary solutions of the driven cavity: the cubic for the mean nanobeam
// displacement, the intracavity photon number and the choice of the
// operating point.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include <Eigen/Eigenvalues>

#include "optomech/constants.hpp"
#include "optomech/error.hpp"
#include "optomech/params.hpp"

namespace optomech {

using cplx = std::complex<double>;

enum class RootClass { StableReal, UnstableComplexPair };

struct SteadyState {
    cplx x_bar;          // m
    cplx x_bar_m;        // x_bar / x_zpf
    cplx alpha_bar_sq;   // photons; real for StableReal roots
    cplx alpha_bar;      // stationary intracavity amplitude
    RootClass classification = RootClass::StableReal;

    [[nodiscard]] bool is_real() const noexcept {
        return classification == RootClass::StableReal;
    }
};

/// Coefficients {1, c2, c1, c0} of the displacement cubic in metres.
struct CubicCoefficients {
    double c3 = 1.0;
    double c2 = 0.0;
    double c1 = 0.0;
    double c0 = 0.0;
};

struct OperatingPoint {
    SteadyState state;
    bool multistable = false;  // more than one real root exists
};

/// Amplitude of the coherent drive whose stationary photon number is the one
/// of photon_number(): |alpha|^2 = eps^2 / (Delta_tilde^2 + kappa^2/4).
inline double drive_amplitude(const PhysicalParams& p, double detuning) {
    const double omega_l = p.omega_c + detuning;
    return std::sqrt(2.0 * p.kappa * p.p_in / (constants::hbar * omega_l));
}

inline double photon_number(const PhysicalParams& p, const DerivedScalars& d, double detuning,
                            double x_bar_m) {
    const double omega_l = p.omega_c + detuning;
    const double shifted = detuning + d.g_m * x_bar_m;
    return 2.0 * p.kappa * p.p_in /
           (constants::hbar * omega_l * (shifted * shifted + 0.25 * p.kappa * p.kappa));
}

inline CubicCoefficients cubic_coefficients(const PhysicalParams& p, const DerivedScalars& d,
                                            double detuning) {
    const double xz = d.x_zpf;
    const double g = d.g_m;
    const double omega_l = p.omega_c + detuning;
    CubicCoefficients c;
    c.c2 = 2.0 * detuning * xz / g;
    c.c1 = (4.0 * detuning * detuning + p.kappa * p.kappa) * xz * xz / (4.0 * g * g);
    c.c0 = -4.0 * p.kappa * xz * xz * xz * p.p_in /
           (constants::hbar * p.omega_m * omega_l * g);
    return c;
}

namespace detail {

// Monic cubic in the scaled displacement y = x_bar / L, L = x_zpf * Omega_m / g_M
// (y equals the optical nonlinearity eta of that root).
struct ScaledCubic {
    double b = 0.0, c = 0.0, d = 0.0;
    double length = 0.0;  // L in metres

    [[nodiscard]] cplx value(cplx y) const { return ((y + b) * y + c) * y + d; }
    [[nodiscard]] cplx slope(cplx y) const { return (3.0 * y + 2.0 * b) * y + c; }
    [[nodiscard]] double scale(cplx y) const {
        const double a = std::abs(y);
        return a * a * a + std::abs(b) * a * a + std::abs(c) * a + std::abs(d);
    }
};

inline ScaledCubic scaled_cubic(const PhysicalParams& p, const DerivedScalars& d,
                                double detuning) {
    const double om = p.omega_m;
    const double omega_l = p.omega_c + detuning;
    ScaledCubic s;
    s.b = 2.0 * detuning / om;
    s.c = (4.0 * detuning * detuning + p.kappa * p.kappa) / (4.0 * om * om);
    s.d = -4.0 * p.kappa * p.p_in * d.g_m * d.g_m /
          (constants::hbar * omega_l * om * om * om * om);
    s.length = d.x_zpf * om / d.g_m;
    return s;
}

inline std::array<cplx, 3> scaled_roots(const ScaledCubic& s) {
    std::array<cplx, 3> y;
    if (s.d == 0.0) {
        const cplx disc = std::sqrt(cplx(s.b * s.b - 4.0 * s.c, 0.0));
        y = {cplx(0.0, 0.0), 0.5 * (-s.b + disc), 0.5 * (-s.b - disc)};
    } else {
        Eigen::Matrix3d companion;
        companion << -s.b, -s.c, -s.d, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0;
        Eigen::EigenSolver<Eigen::Matrix3d> solver(companion, false);
        const auto ev = solver.eigenvalues();
        for (int i = 0; i < 3; ++i) y[i] = ev(i);
    }
    for (auto& root : y) {
        for (int step = 0; step < 2; ++step) {
            const cplx slope = s.slope(root);
            if (slope == cplx(0.0, 0.0)) break;
            root -= s.value(root) / slope;
        }
    }
    return y;
}

}  // namespace detail

/// |cubic(x)| relative to the sum of the magnitudes of its terms, evaluated
/// on the scaled cubic.
inline double cubic_residual(const PhysicalParams& p, const DerivedScalars& d, double detuning,
                             cplx x_bar) {
    const auto s = detail::scaled_cubic(p, d, detuning);
    const cplx y = x_bar / s.length;
    const double scale = s.scale(y);
    return scale > 0.0 ? std::abs(s.value(y)) / scale : 0.0;
}

/// All three roots of the displacement cubic. Real roots come first in order
/// of increasing |x_bar|, followed by a complex pair (positive imaginary part
/// first).
inline std::vector<SteadyState> solve_cubic(const PhysicalParams& p, const DerivedScalars& d,
                                            double detuning) {
    if (!(d.g_m > 0.0) || !std::isfinite(d.g_m)) {
        throw PhysicsError(PhysicsErrorCode::degenerate_coupling,
                           "steady state: optomechanical coupling g_M must be > 0");
    }
    const auto s = detail::scaled_cubic(p, d, detuning);
    const auto ys = detail::scaled_roots(s);

    const double zpf_scaled = d.x_zpf / s.length;
    std::vector<SteadyState> out;
    out.reserve(3);
    for (cplx y : ys) {
        SteadyState st;
        const bool real =
            std::abs(y.imag()) <= 1e-6 * std::max(std::abs(y.real()), zpf_scaled);
        if (real) y = cplx(y.real(), 0.0);
        st.classification = real ? RootClass::StableReal : RootClass::UnstableComplexPair;
        st.x_bar = y * s.length;
        st.x_bar_m = st.x_bar / d.x_zpf;
        const double eps = drive_amplitude(p, detuning);
        const cplx shifted = detuning + d.g_m * st.x_bar_m;
        if (real) {
            st.alpha_bar_sq = photon_number(p, d, detuning, st.x_bar_m.real());
        } else {
            st.alpha_bar_sq = st.x_bar_m * p.omega_m / (2.0 * d.g_m);
        }
        st.alpha_bar = cplx(0.0, eps) / (cplx(0.0, 1.0) * shifted - 0.5 * p.kappa);
        out.push_back(st);
    }
    std::sort(out.begin(), out.end(), [](const SteadyState& a, const SteadyState& b) {
        if (a.is_real() != b.is_real()) return a.is_real();
        if (a.is_real()) return std::abs(a.x_bar) < std::abs(b.x_bar);
        return a.x_bar.imag() > b.x_bar.imag();
    });
    return out;
}

/// The real root of smallest magnitude; flags multistability when more than
/// one real root exists.
inline OperatingPoint select_operating_point(std::span<const SteadyState> roots) {
    OperatingPoint op;
    int real_count = 0;
    const SteadyState* best = nullptr;
    for (const auto& r : roots) {
        if (!r.is_real()) continue;
        ++real_count;
        if (best == nullptr || std::abs(r.x_bar) < std::abs(best->x_bar)) best = &r;
    }
    if (best == nullptr) {
        throw PhysicsError(PhysicsErrorCode::no_real_root,
                           "steady state: no real root, stable operating point lost");
    }
    op.state = *best;
    op.multistable = real_count > 1;
    return op;
}

}  // namespace optomech
