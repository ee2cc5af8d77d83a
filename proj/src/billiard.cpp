#include "extlab/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace extlab::billiard {

using geometry::Obstacle;
using geometry::ObstacleKind;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 16-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr int kGaussN = 16;
constexpr double kGaussX[kGaussN] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
constexpr double kGaussW[kGaussN] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

// Smallest root of a t^2 + b t + c = 0 exceeding t_min, computed stably.
std::optional<double> smallest_root_above(double a, double b, double c, double t_min) {
    const double disc = b * b - 4.0 * a * c;
    if (disc <= 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    double t1 = q / a;
    double t2 = (q != 0.0) ? c / q : kInf;
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_min) return t1;
    if (t2 > t_min) return t2;
    return std::nullopt;
}

// First flow time t > t_min at which z + v t meets the obstacle boundary.
std::optional<double> ray_hit_time(const Obstacle& o, Vec2 z, Vec2 v, double t_min) {
    Vec2 p, q;
    if (o.kind == ObstacleKind::Disc) {
        p = (z - o.center) / o.radius;
        q = v / o.radius;
    } else {
        const Vec2 pb = (z - o.center).rotated(-o.rotation);
        const Vec2 qb = v.rotated(-o.rotation);
        p = {pb.x / o.a, pb.y / o.b};
        q = {qb.x / o.a, qb.y / o.b};
    }
    return smallest_root_above(q.norm2(), 2.0 * p.dot(q), p.norm2() - 1.0, t_min);
}

Vec2 normal_at(const Obstacle& o, Vec2 point) {
    if (o.kind == ObstacleKind::Disc) return (point - o.center).normalized();
    const Vec2 pb = (point - o.center).rotated(-o.rotation);
    return Vec2{pb.x / (o.a * o.a), pb.y / (o.b * o.b)}.rotated(o.rotation).normalized();
}

// Exit time of the ray z + v t from the rectangle (assumes z inside).
double box_exit_time(const Rect& box, Vec2 z, Vec2 v) {
    double t = kInf;
    if (v.x > 0.0) t = std::min(t, (box.hi.x - z.x) / v.x);
    if (v.x < 0.0) t = std::min(t, (box.lo.x - z.x) / v.x);
    if (v.y > 0.0) t = std::min(t, (box.hi.y - z.y) / v.y);
    if (v.y < 0.0) t = std::min(t, (box.lo.y - z.y) / v.y);
    return std::max(t, 0.0);
}

// Index of the obstacle whose boundary carries the start point with the ray
// leaving it, or -1.  Such an obstacle cannot be re-hit by a straight ray.
int initially_leaving(const SceneGeometry& scene, Vec2 z, Vec2 v) {
    for (int k = 0; k < scene.count(); ++k) {
        const auto sd = geometry::signed_distance_and_normal(scene.obstacles[k], z);
        if (std::abs(sd.distance) <= 1e-11 && v.dot(sd.normal) >= 0.0) return k;
    }
    return -1;
}

void validate_start(const SceneGeometry& scene, Vec2 z) {
    for (int k = 0; k < scene.count(); ++k) {
        const auto sd = geometry::signed_distance_and_normal(scene.obstacles[k], z);
        if (sd.distance < -1e-11)
            throw ValidationError("flow start point lies inside obstacle " + std::to_string(k));
    }
}

struct SegmentEvent {
    enum class Kind { Hit, BoxExit, Capped } kind;
    double t = 0.0;   // segment duration (flow time)
    int obstacle = -1;
};

// Next event along the straight segment from (z, zeta), capped at t_cap.
SegmentEvent next_event(const SceneGeometry& scene, Vec2 z, Vec2 zeta, int exclude, double t_cap,
                        bool use_box) {
    const Vec2 v = zeta * 2.0;
    double t_hit = kInf;
    int hit_idx = -1;
    for (int k = 0; k < scene.count(); ++k) {
        if (k == exclude) continue;
        if (auto t = ray_hit_time(scene.obstacles[k], z, v, 0.0)) {
            if (*t < t_hit) { t_hit = *t; hit_idx = k; }
        }
    }
    const double t_box = use_box ? box_exit_time(scene.bounding_box, z, v) : kInf;
    if (t_cap <= std::min(t_hit, t_box)) return {SegmentEvent::Kind::Capped, t_cap, -1};
    if (t_box < t_hit) return {SegmentEvent::Kind::BoxExit, t_box, -1};
    return {SegmentEvent::Kind::Hit, t_hit, hit_idx};
}

}  // namespace

HitClass classify_hit(double incidence, double tol) {
    return std::abs(incidence) < tol ? HitClass::Glancing : HitClass::Transversal;
}

SymbolSpec SymbolSpec::one() {
    SymbolSpec s;
    s.kind = Kind::One;
    return s;
}

SymbolSpec SymbolSpec::radial(Vec2 center, double plateau_radius, double support_radius) {
    if (!(support_radius > 0.0) || plateau_radius < 0.0 || plateau_radius >= support_radius)
        throw ValidationError("radial symbol needs 0 <= plateau < support radius");
    SymbolSpec s;
    s.kind = Kind::RadialBump;
    s.bump = RadialBump{center, plateau_radius, support_radius};
    return s;
}

SymbolSpec SymbolSpec::rectangle(Rect rect, double ramp) {
    SymbolSpec s;
    s.kind = Kind::RectPlateau;
    s.plateau = RectPlateau{rect, ramp};
    return s;
}

Trajectory flow(PhasePoint start, double s_max, const SceneGeometry& scene,
                const FlowOptions& opts) {
    if (!(s_max > 0.0)) throw ValidationError("flow requires s_max > 0");
    if (!(start.zeta.norm2() > 0.0)) throw ValidationError("flow requires |zeta| > 0");
    validate_start(scene, start.z);

    Trajectory traj;
    traj.start = start;
    Vec2 z = start.z, zeta = start.zeta;
    double s = 0.0;
    int exclude = initially_leaving(scene, z, zeta * 2.0);
    double next_sample = 0.0;

    auto record_samples_until = [&](double s_to) {
        if (opts.sample_ds <= 0.0) return;
        while (next_sample <= s_to + 1e-15) {
            const double ds = next_sample - s;
            traj.samples.push_back({next_sample, {z + zeta * (2.0 * ds), zeta}});
            next_sample += opts.sample_ds;
        }
    };

    for (;;) {
        const SegmentEvent ev = next_event(scene, z, zeta, exclude, s_max - s, true);
        record_samples_until(s + ev.t);
        if (ev.kind == SegmentEvent::Kind::Capped) {
            z += zeta * (2.0 * ev.t);
            s = s_max;
            traj.terminal = TerminalKind::TimeExhausted;
            break;
        }
        if (ev.kind == SegmentEvent::Kind::BoxExit) {
            z += zeta * (2.0 * ev.t);
            s += ev.t;
            traj.terminal = TerminalKind::Escaped;
            break;
        }
        z += zeta * (2.0 * ev.t);
        s += ev.t;
        const Vec2 n = normal_at(scene.obstacles[ev.obstacle], z);
        const double incidence = zeta.dot(n) / zeta.norm();
        HitEvent hit{s, z, ev.obstacle, incidence, classify_hit(incidence, opts.glancing_tol)};
        traj.hits.push_back(hit);
        if (hit.cls == HitClass::Glancing) {
            traj.terminal = TerminalKind::GlancingAbort;
            break;
        }
        zeta = zeta - n * (2.0 * zeta.dot(n));
        exclude = ev.obstacle;
    }
    traj.s_end = s;
    traj.state_end = {z, zeta};
    return traj;
}

EscapeResult escape_time(PhasePoint start, const SceneGeometry& scene, double R, double s_cap,
                         double glancing_tol) {
    if (!(R > 0.0) || !(s_cap > 0.0)) throw ValidationError("escape_time needs R > 0, s_cap > 0");
    validate_start(scene, start.z);
    Vec2 z = start.z, zeta = start.zeta;
    double s = 0.0;
    int exclude = initially_leaving(scene, z, zeta * 2.0);
    if (z.norm() > R) return {true, false, 0.0};

    for (;;) {
        const SegmentEvent ev = next_event(scene, z, zeta, exclude, s_cap - s, false);
        // Crossing of |z| = R within this segment?
        const Vec2 v = zeta * 2.0;
        if (auto t = smallest_root_above(v.norm2(), 2.0 * z.dot(v), z.norm2() - R * R, 0.0)) {
            if (*t <= ev.t) return {true, false, s + *t};
        }
        z += v * ev.t;
        s += ev.t;
        if (ev.kind == SegmentEvent::Kind::Capped) return {false, false, s};
        const Vec2 n = normal_at(scene.obstacles[ev.obstacle], z);
        const double incidence = zeta.dot(n) / zeta.norm();
        if (classify_hit(incidence, glancing_tol) == HitClass::Glancing) return {false, true, s};
        zeta = zeta - n * (2.0 * zeta.dot(n));
        exclude = ev.obstacle;
    }
}

TrapResult trap_integral(PhasePoint start, const SymbolSpec& symbol, double T,
                         const SceneGeometry& scene, const TrapOptions& opts) {
    if (!(T > 0.0)) throw ValidationError("trap_integral requires T > 0");
    validate_start(scene, start.z);
    const Vec2 zeta0 =
        opts.direction == FlowDirection::Backward ? -start.zeta : start.zeta;
    const double zeta_norm = start.zeta.norm();

    TrapResult res;
    res.window_width = std::max(opts.window_diameters * scene.diameter() / (2.0 * zeta_norm),
                                1e-6);

    Vec2 z = start.z, zeta = zeta0;
    double s = 0.0;
    int exclude = initially_leaving(scene, z, zeta * 2.0);
    bool glancing = false;

    // Integrate a(z)^2 |zeta| over one straight piece, splitting at window
    // boundaries so window sums are exact.  Pieces are delimited by the
    // window boundary times inside (s_from, s_from + len); the window index
    // of each piece comes from its midpoint, which is robust to boundary
    // rounding.
    auto integrate_piece = [&](Vec2 zfrom, Vec2 dir2, double s_from, double len) {
        if (!(len > 0.0)) return;
        const double W = res.window_width;
        std::vector<double> cuts{0.0};
        for (long k = static_cast<long>(std::floor(s_from / W)) + 1;
             k * W < s_from + len; ++k) {
            const double c = k * W - s_from;
            if (c > cuts.back()) cuts.push_back(c);
        }
        cuts.push_back(len);
        for (size_t p = 0; p + 1 < cuts.size(); ++p) {
            const double mid = 0.5 * (cuts[p] + cuts[p + 1]);
            const double half = 0.5 * (cuts[p + 1] - cuts[p]);
            if (!(half > 0.0)) continue;
            double acc = 0.0;
            for (int g = 0; g < kGaussN; ++g) {
                const Vec2 pt = zfrom + dir2 * (mid + half * kGaussX[g]);
                const double a = symbol(pt);
                acc += kGaussW[g] * a * a;
            }
            acc *= half * zeta_norm;
            const size_t w = static_cast<size_t>((s_from + mid) / W);
            if (res.window_values.size() <= w) res.window_values.resize(w + 1, 0.0);
            res.window_values[w] += acc;
            res.value += acc;
        }
    };

    while (s < T && !glancing) {
        const SegmentEvent ev = next_event(scene, z, zeta, exclude, T - s, !res.escaped);
        integrate_piece(z, zeta * 2.0, s, ev.t);
        z += zeta * (2.0 * ev.t);
        s += ev.t;
        if (ev.kind == SegmentEvent::Kind::Capped) break;
        if (ev.kind == SegmentEvent::Kind::BoxExit) {
            // Outside the scene box the ray is straight; keep integrating the
            // (possibly non-compact) symbol up to T.
            res.escaped = true;
            res.s_escape = s;
            exclude = -1;
            continue;
        }
        const Vec2 n = normal_at(scene.obstacles[ev.obstacle], z);
        const double incidence = zeta.dot(n) / zeta.norm();
        if (classify_hit(incidence, opts.glancing_tol) == HitClass::Glancing) {
            glancing = true;
            break;
        }
        zeta = zeta - n * (2.0 * zeta.dot(n));
        exclude = ev.obstacle;
    }

    // Diagnosis: stable positive windows mean divergence; an escaped ray with
    // a negligible post-escape contribution means convergence.
    const size_t complete = static_cast<size_t>(s / res.window_width);
    if (!res.window_values.empty()) {
        const size_t last = std::min(complete, res.window_values.size());
        if (last >= 1) res.rate = res.window_values[last - 1] / res.window_width;
    }
    if (res.escaped) {
        double after = 0.0;
        const size_t w_esc = static_cast<size_t>(res.s_escape / res.window_width);
        for (size_t w = w_esc + 1; w < res.window_values.size(); ++w)
            after += res.window_values[w];
        res.tail = after;
    } else if (complete >= 1 && complete <= res.window_values.size()) {
        res.tail = res.window_values[complete - 1];
    }

    if (glancing) {
        res.diagnosis = TrapDiagnosis::GlancingAbort;
        return res;
    }
    bool divergent = false;
    if (complete >= 3) {
        const double w1 = res.window_values[complete - 3];
        const double w2 = res.window_values[complete - 2];
        const double w3 = res.window_values[complete - 1];
        const double mx = std::max({w1, w2, w3});
        const double mn = std::min({w1, w2, w3});
        divergent = mn > opts.rate_floor && (mx - mn) <= opts.rate_agreement * mx;
    }
    res.diagnosis = divergent ? TrapDiagnosis::Divergent : TrapDiagnosis::Convergent;
    return res;
}

namespace {

// Parameter of a boundary point (inverse of boundary_point).
double boundary_param(const Obstacle& o, Vec2 point) {
    if (o.kind == ObstacleKind::Disc) {
        const Vec2 w = point - o.center;
        return std::atan2(w.y, w.x);
    }
    const Vec2 pb = (point - o.center).rotated(-o.rotation);
    return std::atan2(pb.y / o.b, pb.x / o.a);
}

double boundary_speed(const Obstacle& o, double theta) {
    if (o.kind == ObstacleKind::Disc) return o.radius;
    const double st = std::sin(theta), ct = std::cos(theta);
    return std::hypot(o.a * st, o.b * ct);
}

// Signed arclength from theta0 to theta (16-point Gauss, exact to rounding
// for the short arcs used here).
double arclength(const Obstacle& o, double theta0, double theta) {
    const double mid = 0.5 * (theta0 + theta), half = 0.5 * (theta - theta0);
    double acc = 0.0;
    for (int g = 0; g < kGaussN; ++g)
        acc += kGaussW[g] * boundary_speed(o, mid + half * kGaussX[g]);
    return acc * half;
}

// Solve arclength(theta0 -> theta) = u by Newton.
double param_at_arclength(const Obstacle& o, double theta0, double u) {
    double theta = theta0 + u / boundary_speed(o, theta0);
    for (int it = 0; it < 60; ++it) {
        const double err = arclength(o, theta0, theta) - u;
        if (std::abs(err) < 1e-15 * std::max(1.0, std::abs(u))) break;
        theta -= err / boundary_speed(o, theta);
    }
    return theta;
}

double wrap_angle(double a) {
    while (a > kPi) a -= kTwoPi;
    while (a < -kPi) a += kTwoPi;
    return a;
}

}  // namespace

BoundaryCoord boundary_return_map(const SceneGeometry& scene, int i, int j, double theta_ref,
                                  BoundaryCoord c) {
    const Obstacle& oi = scene.obstacles[i];
    const Obstacle& oj = scene.obstacles[j];
    double theta = param_at_arclength(oi, theta_ref, c.u);
    Vec2 p = geometry::boundary_point(oi, theta);
    Vec2 n = geometry::outward_normal(oi, theta);
    Vec2 dir = n.rotated(c.psi);

    // Leg 1: i -> j.
    auto t1 = ray_hit_time(oj, p, dir, 0.0);
    if (!t1) throw NumericalError("boundary return map: ray from obstacle missed its partner");
    Vec2 q = p + dir * (*t1);
    Vec2 m = normal_at(oj, q);
    dir = dir - m * (2.0 * dir.dot(m));

    // Leg 2: j -> i.
    auto t2 = ray_hit_time(oi, q, dir, 0.0);
    if (!t2) throw NumericalError("boundary return map: reflected ray missed the start obstacle");
    Vec2 p2 = q + dir * (*t2);
    Vec2 n2 = normal_at(oi, p2);
    dir = dir - n2 * (2.0 * dir.dot(n2));

    const double theta2 = boundary_param(oi, p2);
    BoundaryCoord out;
    const double dtheta = wrap_angle(theta2 - theta_ref);
    out.u = arclength(oi, theta_ref, theta_ref + dtheta);
    out.psi = std::atan2(n2.cross(dir), n2.dot(dir));
    return out;
}

PeriodicOrbit two_obstacle_periodic_orbit(const SceneGeometry& scene, int i, int j) {
    if (i == j || i < 0 || j < 0 || i >= scene.count() || j >= scene.count())
        throw ValidationError("periodic orbit needs two distinct obstacle indices");
    const Obstacle& oi = scene.obstacles[i];
    const Obstacle& oj = scene.obstacles[j];

    // Closest boundary points (alternating projection; exact for discs).
    Vec2 x = oi.center, y = oj.center;
    for (int it = 0; it < 512; ++it) {
        const auto sj = geometry::signed_distance_and_normal(oj, x);
        const Vec2 ynew = x - sj.normal * sj.distance;
        const auto si = geometry::signed_distance_and_normal(oi, ynew);
        const Vec2 xnew = ynew - si.normal * si.distance;
        const double move = (xnew - x).norm() + (ynew - y).norm();
        x = xnew;
        y = ynew;
        if (move < 1e-15) break;
        if (it == 511 && move > 1e-10)
            throw NumericalError("two-obstacle orbit: closest-point iteration did not converge");
    }

    PeriodicOrbit orbit;
    orbit.i = i;
    orbit.j = j;
    orbit.endpoint_i = x;
    orbit.endpoint_j = y;
    orbit.gap = (x - y).norm();
    orbit.period = orbit.gap;  // |zeta| = 1 convention: flow speed 2, round trip 2*gap

    const double theta_ref = boundary_param(oi, x);
    // Stationarity check of the section map at the orbit.
    const BoundaryCoord fixed = boundary_return_map(scene, i, j, theta_ref, {0.0, 0.0});
    if (std::abs(fixed.u) > 1e-8 * std::max(1.0, orbit.gap) || std::abs(fixed.psi) > 1e-8)
        throw NumericalError("two-obstacle orbit: section map not stationary at the orbit");

    // Central finite differences with one Richardson level.
    auto jacobian = [&](double du, double dpsi) {
        Mat2 J;
        BoundaryCoord up = boundary_return_map(scene, i, j, theta_ref, {du, 0.0});
        BoundaryCoord um = boundary_return_map(scene, i, j, theta_ref, {-du, 0.0});
        J.a = (up.u - um.u) / (2.0 * du);
        J.c = (up.psi - um.psi) / (2.0 * du);
        BoundaryCoord vp = boundary_return_map(scene, i, j, theta_ref, {0.0, dpsi});
        BoundaryCoord vm = boundary_return_map(scene, i, j, theta_ref, {0.0, -dpsi});
        J.b = (vp.u - vm.u) / (2.0 * dpsi);
        J.d = (vp.psi - vm.psi) / (2.0 * dpsi);
        return J;
    };
    const double du = 1e-5 * std::max(1.0, orbit.gap), dpsi = 1e-5;
    const Mat2 Jh = jacobian(du, dpsi);
    const Mat2 Jh2 = jacobian(du / 2.0, dpsi / 2.0);
    Mat2 J;
    J.a = (4.0 * Jh2.a - Jh.a) / 3.0;
    J.b = (4.0 * Jh2.b - Jh.b) / 3.0;
    J.c = (4.0 * Jh2.c - Jh.c) / 3.0;
    J.d = (4.0 * Jh2.d - Jh.d) / 3.0;
    orbit.linearization = J;

    const double tr = J.trace(), det = J.det();
    const double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        orbit.eigen_real = true;
        const double sq = std::sqrt(disc);
        const double l1 = (tr + sq) / 2.0, l2 = (tr - sq) / 2.0;
        orbit.lambda_max = std::abs(l1) >= std::abs(l2) ? l1 : l2;
        orbit.lambda_min = std::abs(l1) >= std::abs(l2) ? l2 : l1;
    }
    return orbit;
}

}  // namespace extlab::billiard
