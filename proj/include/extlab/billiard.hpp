#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "extlab/bump.hpp"
#include "extlab/core.hpp"
#include "extlab/geometry.hpp"

namespace extlab::billiard {

using geometry::SceneGeometry;

// Point in phase space.  Between reflections the flow of p = |zeta|^2 is
// z' = 2 zeta, zeta' = 0; experiments use |zeta| = 1 so flow speed is 2.
struct PhasePoint {
    Vec2 z;
    Vec2 zeta;
};

enum class HitClass { Transversal, Glancing };

HitClass classify_hit(double incidence, double tol = 1e-6);

struct HitEvent {
    double s = 0.0;
    Vec2 point;
    int obstacle = -1;
    double incidence = 0.0;  // zeta.n / |zeta| at impact (negative incoming)
    HitClass cls = HitClass::Transversal;
};

enum class TerminalKind { Escaped, TimeExhausted, GlancingAbort };

struct Trajectory {
    PhasePoint start;
    std::vector<std::pair<double, PhasePoint>> samples;
    std::vector<HitEvent> hits;
    TerminalKind terminal = TerminalKind::TimeExhausted;
    double s_end = 0.0;   // exit time for Escaped, abort time for GlancingAbort
    PhasePoint state_end;
};

struct FlowOptions {
    double glancing_tol = 1e-6;
    double sample_ds = 0.0;  // > 0: record phase points at this flow-time stride
};

Trajectory flow(PhasePoint start, double s_max, const SceneGeometry& scene,
                const FlowOptions& opts = {});

struct EscapeResult {
    bool escaped = false;
    bool glancing_abort = false;
    double s_exit = 0.0;
};

// First flow time with |z(s)| > R, or not escaped by s_cap.
EscapeResult escape_time(PhasePoint start, const SceneGeometry& scene, double R, double s_cap,
                         double glancing_tol = 1e-6);

// Spatial part of the order-1/2 observable symbol a(z)|zeta|^{1/2}.
struct SymbolSpec {
    enum class Kind { RadialBump, RectPlateau, One };
    Kind kind = Kind::One;
    RadialBump bump;
    RectPlateau plateau;

    double operator()(Vec2 z) const {
        switch (kind) {
            case Kind::RadialBump: return bump(z);
            case Kind::RectPlateau: return plateau(z);
            default: return 1.0;
        }
    }
    static SymbolSpec one();
    static SymbolSpec radial(Vec2 center, double plateau_radius, double support_radius);
    static SymbolSpec rectangle(Rect rect, double ramp);
};

enum class TrapDiagnosis { Divergent, Convergent, GlancingAbort };

enum class FlowDirection { Backward, Forward };

struct TrapOptions {
    FlowDirection direction = FlowDirection::Backward;
    double glancing_tol = 1e-6;
    // Windowed divergence diagnosis: window width = window_diameters x scene
    // diameter of flow time; divergent when the last three windows agree
    // within rate_agreement and exceed rate_floor.
    double window_diameters = 4.0;
    double rate_agreement = 0.05;
    double rate_floor = 1e-8;
    double tail_tol = 1e-10;
};

struct TrapResult {
    double value = 0.0;          // integral of a(z(s))^2 |zeta| over [0, T]
    double rate = 0.0;           // last-window contribution per unit flow time
    double tail = 0.0;           // contribution after escape (or last window)
    TrapDiagnosis diagnosis = TrapDiagnosis::Convergent;
    std::vector<double> window_values;
    double window_width = 0.0;
    bool escaped = false;
    double s_escape = 0.0;
};

// Trapping functional of the theorem: integral along the backward flow of the
// squared symbol.  After the ray leaves the scene box the remaining straight
// segment is still integrated up to T (the symbol may be non-compact).
TrapResult trap_integral(PhasePoint start, const SymbolSpec& symbol, double T,
                         const SceneGeometry& scene, const TrapOptions& opts = {});

struct PeriodicOrbit {
    int i = 0, j = 0;
    Vec2 endpoint_i, endpoint_j;
    double gap = 0.0;
    double period = 0.0;  // flow time for a full round trip at |zeta| = 1
    Mat2 linearization;   // full-period boundary map differential, det = 1
    bool eigen_real = false;
    double lambda_max = 0.0;  // |larger eigenvalue| when real
    double lambda_min = 0.0;
};

// Section state on the boundary of an obstacle: arc-length offset u from a
// reference boundary point and signed angle psi of the outgoing direction
// measured from the outward normal.
struct BoundaryCoord {
    double u = 0.0;
    double psi = 0.0;
};

// One full period of the boundary-to-boundary map (i -> j -> i) started at
// arclength offset u from theta_ref on obstacle i.
BoundaryCoord boundary_return_map(const SceneGeometry& scene, int i, int j, double theta_ref,
                                  BoundaryCoord c);

PeriodicOrbit two_obstacle_periodic_orbit(const SceneGeometry& scene, int i, int j);

}  // namespace extlab::billiard
