#pragma once

#include <array>
#include <string>
#include <vector>

#include "extlab/billiard.hpp"
#include "extlab/schrodinger.hpp"

namespace extlab::schrodinger {

struct SmoothingScanConfig {
    std::vector<int> n_list{64, 128, 256};
    Vec2 z0;
    Vec2 zeta0{1.0, 0.0};
    double envelope_width = 0.70710678118654752;
    double t_phys = 0.1;            // the epsilon of the time-slab norm
    double dt_factor = 0.6;         // dt = dt_factor / n^2
    double probe_stride_s = 0.1;    // probe spacing in semiclassical time s = t n
    CutoffSpec chi;
    GridPolicy grid;
    double solver_tol = 1e-10;
    std::vector<double> jacobi_weights{0.6, 0.9};
    bool rotating_frame = true;     // gauge shift Omega = n^2 (observables are
                                    // invariant under the global phase)
    double early_stop_rel = 1e-3;   // stop when the bounded remaining
                                    // contribution is below this fraction of
                                    // the accumulated integral; 0 disables
};

struct SmoothingRow {
    int n = 0;
    double s_plain = 0.0;       // integral of F_plain over [0, t_phys]
    double s_logloss = 0.0;
    double mass_drift = 0.0;
    double absorbed = 0.0;
    double t_end = 0.0;
    bool early_stopped = false;
    bool absorber_flag = false;  // > 20% absorbed before the reference ray
                                 // could reach the absorber: run invalid
    bool resolution_ok = true;
    int steps = 0;
    long iterations = 0;
    double seconds = 0.0;
    int grid_nx = 0, grid_ny = 0;
    // probe series (t, F_plain, F_log, mass, absorbed) for CSV export
    std::vector<std::array<double, 5>> series;
};

struct SmoothingReport {
    std::vector<SmoothingRow> rows;
    std::string classification;  // "trapped" | "non-trapped" | "glancing"
    // growth diagnostics: ratios S(n_{k+1}) / S(n_k)
    std::vector<double> ratios_plain;
    std::vector<double> ratios_logloss;
    double t_phys = 0.0;
};

SmoothingReport smoothing_scan(const geometry::SceneGeometry& scene,
                               const SmoothingScanConfig& cfg);

}  // namespace extlab::schrodinger
