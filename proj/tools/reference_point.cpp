// Evaluates the reference configuration at its own detuning: steady state,
// stability of the linearization and the mechanical variances.
//
//   example_reference_point config/reference.json

#include <cstdio>

#include "optomech/lindyn.hpp"
#include "optomech/mechvar.hpp"
#include "optomech/params.hpp"
#include "optomech/steadystate.hpp"

int main(int argc, char** argv) {
    using namespace optomech;
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <config.json>\n", argv[0]);
        return 1;
    }
    const auto p = load_params_file(argv[1]);
    const auto d = derive_scalars(p);
    const double detuning = p.detuning();

    const auto roots = solve_cubic(p, d, detuning);
    for (const auto& r : roots) {
        std::printf("root  % .6e %+.6e i m  (%s)\n", r.x_bar.real(), r.x_bar.imag(),
                    r.is_real() ? "real" : "complex");
    }
    const auto op = select_operating_point(roots);
    const auto ep = effective_params(p, d, op.state, detuning);
    std::printf("G = %.4e rad/s, beta = %.3e, eta = %.3e\n", ep.g_eff, ep.beta, ep.eta);

    const auto report = is_dynamically_stable(drift_matrix(p, ep));
    std::printf("stable: %s (margin %.4e 1/s)\n", report.stable ? "yes" : "no", report.margin);

    // At 1 mW on the blue sideband the optical anti-damping already beats
    // the intrinsic damping, so the variances are undefined there.
    try {
        const auto mv = variances_closed_form(p, ep);
        std::printf("<dx^2> = %.6f  <dp^2> = %.6f  n_eff = %.3f\n", mv.var_x, mv.var_p, mv.n_eff);
    } catch (const PhysicsError& e) {
        std::printf("%s\n", e.what());
    }
    return 0;
}
