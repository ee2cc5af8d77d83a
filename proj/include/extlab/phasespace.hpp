#pragma once

#include <vector>

#include "extlab/billiard.hpp"
#include "extlab/grid.hpp"

namespace extlab::phasespace {

using billiard::PhasePoint;
using schrodinger::GridField;

// Phase-space window and resolution for the Husimi transform.
struct PhaseWindow {
    Rect z;                      // spatial window
    Rect zeta;                   // momentum window (semiclassical units)
    double z_stride_frames = 0.5;  // z grid stride in units of sqrt(h)
};

// Nonnegative Husimi density |<g_{z,zeta,h}, u>|^2 / (2 pi h)^2 sampled on a
// phase grid; the zeta grid is the FFT bin lattice of the windowed patch.
struct HusimiField {
    double h = 0.0;
    int nzx = 0, nzy = 0;     // spatial sample counts
    int nkx = 0, nky = 0;     // momentum bins kept inside the window
    Vec2 z0;                  // first spatial sample
    double dz = 0.0;          // spatial stride
    Vec2 zeta0;               // first momentum sample
    double dzeta = 0.0;       // momentum stride
    std::vector<double> values;  // [(jz*nzx+iz)*nky*nkx + (jk*nkx+ik)]
    double total = 0.0;          // integral over the window (dz^2 dzeta^2 sum)

    size_t index(int iz, int jz, int ik, int jk) const {
        return ((static_cast<size_t>(jz) * nzx + iz) * nky + jk) * nkx + ik;
    }
};

HusimiField husimi(const GridField& field, double h, const PhaseWindow& window);

struct MassNearResult {
    double fraction = 0.0;
    bool zero_mass = false;
};

// Fraction of the Husimi mass inside the phase-space ball of the given
// radius (euclidean in (z, zeta)) around p, relative to the window total.
MassNearResult measure_mass_near(const HusimiField& h, PhasePoint p, double radius);

struct PropagationCheckConfig {
    std::vector<double> checkpoints_s;   // semiclassical times
    double radius_frames = 5.0;          // ball radius in units of sqrt(h)
    double threshold = 0.6;
    double ehrenfest_c = 0.5;            // horizon c log n
    billiard::FlowDirection direction = billiard::FlowDirection::Forward;
};

struct PropagationCheckpoint {
    double s = 0.0;
    PhasePoint reference;
    double fraction = 0.0;
    bool within_horizon = true;
};

struct PropagationCheck {
    std::vector<PropagationCheckpoint> checkpoints;
    double min_fraction = 0.0;  // over checkpoints within the horizon
    double horizon = 0.0;
    bool pass = false;
};

// Transport diagnostic: at each snapshot time t_k = s_k h the Husimi mass
// near the billiard flow image of the start point must exceed the threshold.
// The reference flow runs forward (z' = +2 zeta), matching the solver's
// group transport; the backward-flow statement of the propagation theorem is
// this one after time reversal of the datum.
PropagationCheck check_propagation(const std::vector<std::pair<double, GridField>>& snapshots,
                                   PhasePoint start, int n,
                                   const geometry::SceneGeometry& scene,
                                   const PhaseWindow& window,
                                   const PropagationCheckConfig& cfg);

}  // namespace extlab::phasespace
