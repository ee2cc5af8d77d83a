#pragma once

#include "extlab/core.hpp"

namespace extlab {

// Quintic smoothstep: C^2 ramp from 1 at t<=0 to 0 at t>=1.
inline double smooth_ramp_down(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    const double s = 1.0 - t;
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

// Radial plateau bump: identically 1 for |z-center| <= plateau, C^2 decay to
// exactly 0 at |z-center| >= radius.  Values in [0,1].
struct RadialBump {
    Vec2 center;
    double plateau = 0.0;
    double radius = 1.0;

    double operator()(Vec2 z) const {
        const double r = (z - center).norm();
        if (r <= plateau) return 1.0;
        if (r >= radius) return 0.0;
        return smooth_ramp_down((r - plateau) / (radius - plateau));
    }
    bool supported_at(Vec2 z) const { return (z - center).norm() < radius; }
};

// Plateau over a rectangle with a C^2 ramp of the given width outside it.
struct RectPlateau {
    Rect rect;
    double ramp = 0.5;

    double operator()(Vec2 z) const {
        const double dx = std::max({rect.lo.x - z.x, 0.0, z.x - rect.hi.x});
        const double dy = std::max({rect.lo.y - z.y, 0.0, z.y - rect.hi.y});
        return smooth_ramp_down(dx / ramp) * smooth_ramp_down(dy / ramp);
    }
};

}  // namespace extlab
