#include "extlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace extlab::geometry {
namespace {

constexpr double kFootTol = 1e-12;
constexpr int kFootMaxIter = 50;

// Golden-section minimizer on [lo, hi] for a unimodal-enough f; used to
// refine minima found by dense sampling.
template <typename F>
double golden_min(F&& f, double lo, double hi, int iters = 80) {
    const double phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < iters; ++it) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - phi * (b - a); f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + phi * (b - a); f2 = f(x2);
        }
    }
    return f1 < f2 ? x1 : x2;
}

// Body-frame coordinates of z relative to an ellipse.
Vec2 to_body(const Obstacle& e, Vec2 z) { return (z - e.center).rotated(-e.rotation); }

// Foot-point parameter on an ellipse for a body-frame point p: Newton on
// g(t) = (P(t) - p) . P'(t), bisection fallback.
double ellipse_foot_param(const Obstacle& e, Vec2 p) {
    const double a = e.a, b = e.b;
    auto g = [&](double t) {
        const double ct = std::cos(t), st = std::sin(t);
        // (a ct - px)(-a st) + (b st - py)(b ct)
        return (a * ct - p.x) * (-a * st) + (b * st - p.y) * (b * ct);
    };
    auto gp = [&](double t) {
        const double ct = std::cos(t), st = std::sin(t);
        return a * a * (st * st - ct * ct) + p.x * a * ct + b * b * (ct * ct - st * st) + p.y * b * st;
    };
    double t = std::atan2(a * p.y, b * p.x);
    const double scale = std::max(a, b) * std::max({a, b, p.norm(), 1.0});
    for (int it = 0; it < kFootMaxIter; ++it) {
        const double gt = g(t);
        if (std::abs(gt) <= kFootTol * scale) return t;
        const double d = gp(t);
        if (d == 0.0) break;
        const double step = gt / d;
        if (!std::isfinite(step) || std::abs(step) > 1.0) break;
        t -= step;
    }
    // Bisection fallback: locate the distance-minimizing root by scanning.
    const int ns = 720;
    double best_t = 0.0, best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < ns; ++i) {
        const double ti = kTwoPi * i / ns;
        const double d = (Vec2{a * std::cos(ti), b * std::sin(ti)} - p).norm2();
        if (d < best_d) { best_d = d; best_t = ti; }
    }
    double lo = best_t - kTwoPi / ns, hi = best_t + kTwoPi / ns;
    double glo = g(lo), ghi = g(hi);
    if (glo == 0.0) return lo;
    if (ghi == 0.0) return hi;
    if (glo * ghi > 0.0) {
        // No bracket (p extremely close to the center evolute); fall back to
        // the sampled minimum refined by golden section.
        return golden_min([&](double tt) {
            return (Vec2{a * std::cos(tt), b * std::sin(tt)} - p).norm2();
        }, lo, hi);
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g(mid);
        if (std::abs(gm) <= kFootTol * scale || hi - lo < 1e-16) return mid;
        if (glo * gm <= 0.0) { hi = mid; ghi = gm; } else { lo = mid; glo = gm; }
    }
    throw NumericalError("ellipse foot-point iteration failed to converge at point (" +
                         format_double(p.x) + ", " + format_double(p.y) + ")");
}

}  // namespace

Rect Obstacle::bbox() const {
    if (kind == ObstacleKind::Disc)
        return {{center.x - radius, center.y - radius}, {center.x + radius, center.y + radius}};
    // Extent of a rotated ellipse along each axis.
    const double c = std::cos(rotation), s = std::sin(rotation);
    const double ex = std::sqrt(a * a * c * c + b * b * s * s);
    const double ey = std::sqrt(a * a * s * s + b * b * c * c);
    return {{center.x - ex, center.y - ey}, {center.x + ex, center.y + ey}};
}

Obstacle make_disc(Vec2 center, double radius) {
    if (!(radius > 0.0)) throw ValidationError("disc radius must be positive");
    Obstacle o;
    o.kind = ObstacleKind::Disc;
    o.center = center;
    o.radius = radius;
    return o;
}

Obstacle make_ellipse(Vec2 center, double a, double b, double rotation) {
    if (!(a > 0.0) || !(b > 0.0)) throw ValidationError("ellipse semi-axes must be positive");
    Obstacle o;
    o.kind = ObstacleKind::Ellipse;
    o.center = center;
    o.a = a;
    o.b = b;
    o.rotation = rotation;
    return o;
}

Vec2 boundary_point(const Obstacle& obs, double theta) {
    if (obs.kind == ObstacleKind::Disc)
        return obs.center + Vec2{std::cos(theta), std::sin(theta)} * obs.radius;
    return obs.center + Vec2{obs.a * std::cos(theta), obs.b * std::sin(theta)}.rotated(obs.rotation);
}

Vec2 outward_normal(const Obstacle& obs, double theta) {
    if (obs.kind == ObstacleKind::Disc) return {std::cos(theta), std::sin(theta)};
    // Gradient of (x/a)^2 + (y/b)^2 at the boundary point, body frame.
    Vec2 n{std::cos(theta) / obs.a, std::sin(theta) / obs.b};
    return n.rotated(obs.rotation).normalized();
}

double boundary_curvature(const Obstacle& obs, double theta) {
    if (obs.kind == ObstacleKind::Disc) return 1.0 / obs.radius;
    const double st = std::sin(theta), ct = std::cos(theta);
    const double denom = obs.a * obs.a * st * st + obs.b * obs.b * ct * ct;
    return obs.a * obs.b / (denom * std::sqrt(denom));
}

SignedDistance signed_distance_and_normal(const Obstacle& obs, Vec2 z) {
    if (obs.kind == ObstacleKind::Disc) {
        const Vec2 w = z - obs.center;
        const double r = w.norm();
        if (r == 0.0) return {-obs.radius, {1.0, 0.0}, true};
        return {r - obs.radius, w / r, false};
    }
    const Vec2 p = to_body(obs, z);
    const double t = ellipse_foot_param(obs, p);
    const Vec2 foot{obs.a * std::cos(t), obs.b * std::sin(t)};
    const double inside_val = (p.x / obs.a) * (p.x / obs.a) + (p.y / obs.b) * (p.y / obs.b);
    const double d = (p - foot).norm();
    const Vec2 n = outward_normal(obs, t);
    if (p.norm2() == 0.0) return {-std::min(obs.a, obs.b), {1.0, 0.0}, true};
    return {inside_val < 1.0 ? -d : d, n, false};
}

double support(const Obstacle& obs, Vec2 dir) {
    if (obs.kind == ObstacleKind::Disc) return obs.center.dot(dir) + obs.radius;
    const Vec2 db = dir.rotated(-obs.rotation);
    return obs.center.dot(dir) + std::sqrt(obs.a * obs.a * db.x * db.x + obs.b * obs.b * db.y * db.y);
}

bool SceneGeometry::inside_any(Vec2 z) const {
    for (const auto& o : obstacles)
        if (signed_distance_and_normal(o, z).distance < 0.0) return true;
    return false;
}

SceneGeometry make_scene(std::vector<Obstacle> obstacles, double margin,
                         std::optional<Rect> box_override) {
    SceneGeometry scene;
    scene.obstacles = std::move(obstacles);
    scene.margin = margin;
    for (size_t i = 0; i < scene.obstacles.size(); ++i)
        for (size_t j = i + 1; j < scene.obstacles.size(); ++j)
            if (obstacle_gap(scene.obstacles[i], scene.obstacles[j]) <= 0.0)
                throw ValidationError("obstacles " + std::to_string(i) + " and " +
                                      std::to_string(j) + " overlap or touch");
    if (box_override) {
        scene.bounding_box = *box_override;
    } else {
        if (scene.obstacles.empty()) {
            scene.bounding_box = Rect{{-margin, -margin}, {margin, margin}};
        } else {
            Rect r = scene.obstacles.front().bbox();
            for (const auto& o : scene.obstacles) {
                const Rect b = o.bbox();
                r.lo.x = std::min(r.lo.x, b.lo.x);
                r.lo.y = std::min(r.lo.y, b.lo.y);
                r.hi.x = std::max(r.hi.x, b.hi.x);
                r.hi.y = std::max(r.hi.y, b.hi.y);
            }
            scene.bounding_box = r.inflated(margin);
        }
    }
    for (const auto& o : scene.obstacles) {
        const Rect b = o.bbox();
        if (!scene.bounding_box.contains(b.lo) || !scene.bounding_box.contains(b.hi))
            throw ValidationError("bounding box does not contain all obstacles");
    }
    return scene;
}

SceneGeometry load_scene(const Config& cfg) {
    std::vector<Obstacle> obstacles;
    for (const ConfigSection* sec : cfg.all("obstacle")) {
        const std::string kind = sec->get_string("kind");
        if (kind == "disc") {
            obstacles.push_back(make_disc(sec->get_vec2("center"), sec->get_double("radius")));
        } else if (kind == "ellipse") {
            const Vec2 axes = sec->get_vec2("semi_axes");
            obstacles.push_back(make_ellipse(sec->get_vec2("center"), axes.x, axes.y,
                                             sec->get_double("rotation", 0.0)));
        } else {
            throw ValidationError("unknown obstacle kind '" + kind + "' (expected disc|ellipse)");
        }
    }
    double margin = 2.0;
    std::optional<Rect> box;
    if (const ConfigSection* sec = cfg.find("scene")) margin = sec->get_double("margin", 2.0);
    if (const ConfigSection* sec = cfg.find("bounding_box"))
        box = Rect{sec->get_vec2("lo"), sec->get_vec2("hi")};
    return make_scene(std::move(obstacles), margin, box);
}

double curvature_infimum(const SceneGeometry& scene) {
    if (scene.obstacles.empty()) throw ValidationError("curvature infimum of an empty scene");
    double kmin = std::numeric_limits<double>::infinity();
    for (const auto& o : scene.obstacles) {
        if (o.kind == ObstacleKind::Disc) {
            kmin = std::min(kmin, 1.0 / o.radius);
            continue;
        }
        // Dense sampling plus golden-section refinement around the minimum.
        const int ns = 4096;
        double best = std::numeric_limits<double>::infinity();
        int best_i = 0;
        for (int i = 0; i < ns; ++i) {
            const double k = boundary_curvature(o, kTwoPi * i / ns);
            if (k < best) { best = k; best_i = i; }
        }
        const double lo = kTwoPi * (best_i - 1) / ns, hi = kTwoPi * (best_i + 1) / ns;
        const double t = golden_min([&](double tt) { return boundary_curvature(o, tt); }, lo, hi);
        kmin = std::min(kmin, boundary_curvature(o, t));
    }
    return kmin;
}

double obstacle_gap(const Obstacle& p, const Obstacle& q) {
    if (p.kind == ObstacleKind::Disc && q.kind == ObstacleKind::Disc)
        return (p.center - q.center).norm() - p.radius - q.radius;
    // Alternating closest-point projection between the two boundaries.
    Vec2 x = p.center, y = q.center;
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 256; ++it) {
        SignedDistance sq = signed_distance_and_normal(q, x);
        y = x - sq.normal * sq.distance;  // foot of x on boundary of q
        SignedDistance sp = signed_distance_and_normal(p, y);
        x = y - sp.normal * sp.distance;
        const double d = (x - y).norm();
        if (std::abs(prev - d) < 1e-14 * std::max(1.0, d)) break;
        prev = d;
    }
    // Signed result: projection collapses to overlap detection when either
    // foot point lies inside the other obstacle.
    if (signed_distance_and_normal(p, q.center).distance < 0.0 ||
        signed_distance_and_normal(q, p.center).distance < 0.0)
        return -1.0;
    const double dp = signed_distance_and_normal(p, y).distance;
    const double dq = signed_distance_and_normal(q, x).distance;
    if (dp < 0.0 || dq < 0.0) return std::min(dp, dq);
    // Dense-sampling fallback guard: alternating projection between disjoint
    // convex bodies converges, but verify against a coarse boundary sweep.
    double d = (x - y).norm();
    const int ns = 512;
    for (int i = 0; i < ns; ++i) {
        const Vec2 bp = boundary_point(p, kTwoPi * i / ns);
        d = std::min(d, signed_distance_and_normal(q, bp).distance);
    }
    return d;
}

double pairwise_gap_infimum(const SceneGeometry& scene) {
    const int n = scene.count();
    if (n < 2) throw ValidationError("pairwise gap needs at least two obstacles");
    double gmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double g = obstacle_gap(scene.obstacles[i], scene.obstacles[j]);
            if (g <= 0.0)
                throw ValidationError("obstacles " + std::to_string(i) + " and " +
                                      std::to_string(j) + " overlap");
            gmin = std::min(gmin, g);
        }
    return gmin;
}

TripleCheck convex_hull_triple_check(const SceneGeometry& scene, int i, int j, int k) {
    const Obstacle& oi = scene.obstacles[i];
    const Obstacle& oj = scene.obstacles[j];
    const Obstacle& ok = scene.obstacles[k];
    // ConvexHull(Oi u Oj) and Ok are disjoint iff some direction separates
    // them: g(phi) = max(h_i, h_j)(d) + h_k(-d) < 0 for d = (cos phi, sin phi).
    auto g = [&](double phi) {
        const Vec2 d{std::cos(phi), std::sin(phi)};
        return std::max(support(oi, d), support(oj, d)) + support(ok, -d);
    };
    const int ns = 4096;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int s = 0; s < ns; ++s) {
        const double v = g(kTwoPi * s / ns);
        if (v < best) { best = v; best_i = s; }
    }
    const double lo = kTwoPi * (best_i - 1) / ns, hi = kTwoPi * (best_i + 1) / ns;
    const double phi = golden_min(g, lo, hi);
    const double sep = std::min(best, g(phi));
    return {i, j, k, sep < 0.0, sep};
}

GeometryReport check_ikawa(const SceneGeometry& scene) {
    GeometryReport rep;
    rep.count = scene.count();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (rep.count == 0) {
        rep.kappa = nan;
        rep.gap = nan;
        rep.kappa_gap_product = nan;
        rep.ikawa_ok = true;  // vacuous: nothing to trap
        return rep;
    }
    rep.kappa = curvature_infimum(scene);
    rep.gap = rep.count >= 2 ? pairwise_gap_infimum(scene) : nan;
    rep.kappa_gap_product = rep.count >= 2 ? rep.kappa * rep.gap : nan;
    for (int i = 0; i < rep.count; ++i)
        for (int j = i + 1; j < rep.count; ++j)
            for (int k = 0; k < rep.count; ++k) {
                if (k == i || k == j) continue;
                rep.triples.push_back(convex_hull_triple_check(scene, i, j, k));
                rep.convex_hull_ok = rep.convex_hull_ok && rep.triples.back().ok;
            }
    bool kl_ok = true;
    if (rep.count > 2) {
        kl_ok = rep.kappa_gap_product > static_cast<double>(rep.count);
        rep.kl_boundary_case =
            std::abs(rep.kappa_gap_product - rep.count) <= 1e-12 * rep.count;
    }
    rep.ikawa_ok = rep.convex_hull_ok && kl_ok;
    return rep;
}

Json geometry_report_to_json(const GeometryReport& rep) {
    Json out;
    out["obstacle_count"] = rep.count;
    if (std::isnan(rep.kappa))
        out["kappa"] = nullptr;
    else
        out["kappa"] = rep.kappa;
    if (std::isnan(rep.gap)) {
        out["gap"] = nullptr;
        out["kappa_gap_product"] = nullptr;
    } else {
        out["gap"] = rep.gap;
        out["kappa_gap_product"] = rep.kappa_gap_product;
    }
    Json triples = Json::array();
    for (const auto& t : rep.triples) {
        triples.push_back(Json{{"i", t.i}, {"j", t.j}, {"k", t.k},
                               {"ok", t.ok}, {"separation", t.separation}});
    }
    out["convex_hull_triples"] = triples;
    out["convex_hull_ok"] = rep.convex_hull_ok;
    out["ikawa_ok"] = rep.ikawa_ok;
    out["kl_boundary_case"] = rep.kl_boundary_case;
    return out;
}

}  // namespace extlab::geometry
