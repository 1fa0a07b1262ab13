#pragma once

// Deterministic mean-field dynamics (noise terms dropped), integrated in the
// dimensionless time tau = Omega_m t with an adaptive Dormand-Prince 5(4)
// pair. Serves as a dynamical oracle for the steady-state and linear
// stability results.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <boost/numeric/odeint.hpp>

#include "optomech/constants.hpp"
#include "optomech/error.hpp"
#include "optomech/lindyn.hpp"
#include "optomech/params.hpp"
#include "optomech/steadystate.hpp"

namespace optomech {

struct TrajectoryState {
    double t = 0.0;  // s
    double x_m = 0.0;
    double p_m = 0.0;
    cplx alpha;
};

struct Trajectory {
    std::vector<TrajectoryState> samples;  // uniform in t, first at t = 0
    bool diverged = false;                 // |state| exceeded the divergence bound
    double t_diverged = std::numeric_limits<double>::quiet_NaN();
    std::size_t steps = 0;
};

struct IntegrateOptions {
    double rel_tol = 1e-8;
    std::size_t samples = 2001;
    double divergence_bound = 1e12;
};

namespace detail {

using ode_state = std::array<double, 4>;

// Right-hand side in tau. The radiation-pressure drive carries the factor 2
// of the stationary relation x_m = 2 (g_M / Omega_m) |alpha|^2, so the fixed
// point coincides with the steady-state cubic (up to the beta'' term).
struct MeanFieldRhs {
    double gamma_ratio;  // Gamma_m / Omega_m
    double g_ratio;      // g_M / Omega_m
    double cubic;        // beta' x_zpf^2 / Omega_m^2
    double detuning_ratio;
    double half_kappa_ratio;
    double drive_ratio;  // epsilon / Omega_m

    void operator()(const ode_state& y, ode_state& dy, double /*tau*/) const {
        const double x = y[0], pm = y[1], re = y[2], im = y[3];
        const double theta = detuning_ratio + g_ratio * x;
        dy[0] = pm;
        dy[1] = -x - gamma_ratio * pm + 2.0 * g_ratio * (re * re + im * im) + cubic * x * x * x;
        dy[2] = -theta * im - half_kappa_ratio * re;
        dy[3] = theta * re - half_kappa_ratio * im - drive_ratio;
    }
};

inline double inf_norm(std::span<const double> y) {
    double m = 0.0;
    for (double v : y) m = std::max(m, std::abs(v));
    return m;
}

// Shared driver: adaptive dense-output Dormand-Prince with uniform sampling,
// divergence detection and step-underflow reporting.
template <class State, class Rhs, class Sample>
std::size_t run_dopri(const Rhs& rhs, State y, double tau_end, double rel_tol,
                      std::size_t n_samples, double bound, Sample&& sample, double& tau_diverged) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_dense_output(rel_tol, rel_tol,
                                             odeint::runge_kutta_dopri5<State>());
    const double tau_min_step = 1e-12 * std::max(1.0, tau_end);
    stepper.initialize(y, 0.0, std::min(1e-3, tau_end / 10.0));
    std::size_t next = 0;
    std::size_t steps = 0;
    const auto tau_at = [&](std::size_t i) {
        return n_samples > 1 ? tau_end * static_cast<double>(i) / static_cast<double>(n_samples - 1)
                             : tau_end;
    };
    State buf = y;
    try {
        while (next < n_samples) {
            const auto [t0, t1] = stepper.do_step(rhs);
            ++steps;
            (void)t0;
            while (next < n_samples && tau_at(next) <= t1) {
                stepper.calc_state(tau_at(next), buf);
                sample(tau_at(next), buf);
                ++next;
            }
            if (!(inf_norm(stepper.current_state()) <= bound)) {
                tau_diverged = t1;
                return steps;
            }
            if (stepper.current_time_step() < tau_min_step) {
                throw PhysicsError(PhysicsErrorCode::step_underflow,
                                   "evolve: step size underflow (stiff regime); reduce the "
                                   "kappa/Omega_m or Omega_m*t_end scale");
            }
        }
    } catch (const odeint::step_adjustment_error&) {
        throw PhysicsError(PhysicsErrorCode::step_underflow,
                           "evolve: step size control failed (stiff regime); reduce the "
                           "kappa/Omega_m or Omega_m*t_end scale");
    }
    return steps;
}

}  // namespace detail

/// Integrates the mean-field equations from `initial` (its t is ignored) to
/// t_end seconds at laser detuning `detuning` = omega_l - omega_c.
inline Trajectory integrate(const PhysicalParams& p, const DerivedScalars& d, double detuning,
                            const TrajectoryState& initial, double t_end,
                            const IntegrateOptions& opt = {}) {
    if (!(opt.rel_tol >= 1e-12 && opt.rel_tol <= 1e-4)) {
        throw ValidationError("rel_tol", "rel_tol: must lie in [1e-12, 1e-4]");
    }
    if (!(t_end > 0.0) || !std::isfinite(t_end)) {
        throw ValidationError("t_end", "t_end: must be > 0");
    }
    if (opt.samples < 2) throw ValidationError("samples", "samples: must be >= 2");

    const double om = p.omega_m;
    const detail::MeanFieldRhs rhs{p.gamma_m / om,
                                   d.g_m / om,
                                   p.beta_prime * d.x_zpf * d.x_zpf / (om * om),
                                   detuning / om,
                                   0.5 * p.kappa / om,
                                   drive_amplitude(p, detuning) / om};

    Trajectory traj;
    traj.samples.reserve(opt.samples);
    const detail::ode_state y0 = {initial.x_m, initial.p_m, initial.alpha.real(),
                                  initial.alpha.imag()};
    double tau_div = std::numeric_limits<double>::quiet_NaN();
    traj.steps = detail::run_dopri(
        rhs, y0, om * t_end, opt.rel_tol, opt.samples, opt.divergence_bound,
        [&](double tau, const detail::ode_state& y) {
            traj.samples.push_back({tau / om, y[0], y[1], cplx(y[2], y[3])});
        },
        tau_div);
    if (std::isfinite(tau_div)) {
        traj.diverged = true;
        traj.t_diverged = tau_div / om;
    }
    return traj;
}

struct LinearTrajectory {
    std::vector<double> t;                  // s
    std::vector<Eigen::Vector4d> states;
    bool diverged = false;
};

/// Integrates d(delta)/dt = A delta, with time measured internally in units
/// of 1/max|A_ij|.
inline LinearTrajectory integrate_linear(const DriftMatrix& m, const Eigen::Vector4d& initial,
                                         double t_end, double rel_tol = 1e-10,
                                         std::size_t samples = 2001) {
    const double rate = m.entries.cwiseAbs().maxCoeff();
    if (!(rate > 0.0)) throw ValidationError("drift_matrix", "drift_matrix: all entries zero");
    const Eigen::Matrix4d a = m.entries / rate;
    auto rhs = [a](const detail::ode_state& y, detail::ode_state& dy, double) {
        Eigen::Map<const Eigen::Vector4d> v(y.data());
        Eigen::Map<Eigen::Vector4d>(dy.data()) = a * v;
    };
    LinearTrajectory out;
    const double bound = 1e12 * std::max(1.0, initial.cwiseAbs().maxCoeff());
    const detail::ode_state y0 = {initial(0), initial(1), initial(2), initial(3)};
    double tau_div = std::numeric_limits<double>::quiet_NaN();
    detail::run_dopri(
        rhs, y0, rate * t_end, rel_tol, samples, bound,
        [&](double tau, const detail::ode_state& y) {
            out.t.push_back(tau / rate);
            out.states.emplace_back(y[0], y[1], y[2], y[3]);
        },
        tau_div);
    out.diverged = std::isfinite(tau_div);
    return out;
}

/// Exponential rate of the oscillation envelope of x(t) - x_ref, from a
/// least-squares fit of ln|peak| against time over the local maxima of the
/// deviation. Positive for decay, negative for growth (1/s). NaN when fewer
/// than three peaks are available.
inline double fit_decay_rate(std::span<const TrajectoryState> samples, double x_ref = 0.0) {
    std::vector<double> ts, ls;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        const double prev = std::abs(samples[i - 1].x_m - x_ref);
        const double cur = std::abs(samples[i].x_m - x_ref);
        const double nxt = std::abs(samples[i + 1].x_m - x_ref);
        if (cur > prev && cur >= nxt && cur > 0.0) {
            ts.push_back(samples[i].t);
            ls.push_back(std::log(cur));
        }
    }
    if (ts.size() < 3) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    const double slope = (n * stl - st * sl) / (n * stt - st * st);
    return -slope;
}

/// True when the trajectory ran away or its envelope grows over time.
inline bool detect_growth(const Trajectory& traj, double x_ref = 0.0) {
    if (traj.diverged) return true;
    const double rate = fit_decay_rate(traj.samples, x_ref);
    return std::isfinite(rate) && rate < 0.0;
}

}  // namespace optomech
