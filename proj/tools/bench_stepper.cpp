// Stepper throughput probe: times a short stretch of the trapped two-disc
// configuration at a given n and dt factor, reporting inner-iteration counts
// and projected cost per unit physical time.
#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "extlab/billiard.hpp"
#include "extlab/schrodinger.hpp"

using namespace extlab;
using namespace extlab::schrodinger;

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 64;
    const double beta = argc > 2 ? std::atof(argv[2]) : 0.6;
    const int steps = argc > 3 ? std::atoi(argv[3]) : 200;
    const double margin = argc > 4 ? std::atof(argv[4]) : 1.2;

    auto scene = geometry::make_scene(
        {geometry::make_disc({-1.5, 0}, 1.0), geometry::make_disc({1.5, 0}, 1.0)}, margin);
    GridPolicy pol;
    pol.absorber_width = 0.8;
    auto grid = build_grid(scene, n, pol);
    std::printf("grid %d x %d = %.2fM nodes, dx=%.5f box %.2f x %.2f\n", grid->spec.nx,
                grid->spec.ny, grid->spec.size() / 1e6, grid->spec.dx, grid->box.width(),
                grid->box.height());

    CoherentParams cp;
    cp.n = n;
    cp.z0 = {0, 0};
    cp.zeta0 = {1, 0};
    GridField field = coherent_state(cp, grid);
    std::printf("initial mass %.12f\n", field_mass(field));

    double dt = beta / (static_cast<double>(n) * n);
    StepperOptions so;
    so.carrier_omega = static_cast<double>(n) * n;
    if (std::getenv("BENCH_GAUGE")) {
        so.gauge_shift = static_cast<double>(n) * n;
        so.carrier_omega = 0.0;
        dt = beta / std::pow(static_cast<double>(n), 1.5);
    }
    if (const char* tol = std::getenv("BENCH_TOL")) so.tolerance = std::atof(tol);
    if (argc > 5) {
        so.jacobi_weights.clear();
        for (int a = 5; a < argc; ++a)
            if (std::atof(argv[a]) > 0.0) so.jacobi_weights.push_back(std::atof(argv[a]));
    }
    CrankNicolsonStepper stepper(grid, dt, so);

    long iters = 0;
    const auto t0 = std::chrono::steady_clock::now();
    for (int k = 0; k < steps; ++k) {
        const auto st = stepper.step(field);
        iters += st.iterations;
    }
    const auto t1 = std::chrono::steady_clock::now();
    const double secs = std::chrono::duration<double>(t1 - t0).count();
    const double per_step = secs / steps;
    const double t_phys_steps = 0.1 / dt;
    std::printf("beta=%.2f dt=%.3e: %.3f s for %d steps (%.4f s/step, %.1f iters/step)\n", beta,
                dt, secs, steps, per_step, static_cast<double>(iters) / steps);
    std::printf("projected full run to t=0.1: %.0f steps = %.1f min\n", t_phys_steps,
                t_phys_steps * per_step / 60.0);
    std::printf("mass now %.12f\n", field_mass(field));
    return 0;
}
