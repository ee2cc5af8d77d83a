#pragma once

#include <optional>
#include <vector>

#include "extlab/config.hpp"
#include "extlab/core.hpp"
#include "extlab/report.hpp"

namespace extlab::geometry {

enum class ObstacleKind { Disc, Ellipse };

// Strictly convex planar obstacle: disc or ellipse.  Boundary parameterized
// by theta in [0, 2pi); for ellipses theta is the parameter of
// c + R(rot) (a cos t, b sin t), not the polar angle.
struct Obstacle {
    ObstacleKind kind = ObstacleKind::Disc;
    Vec2 center;
    double radius = 1.0;     // disc
    double a = 1.0;          // ellipse semi-axis along body x
    double b = 1.0;          // ellipse semi-axis along body y
    double rotation = 0.0;   // radians

    Rect bbox() const;
};

Obstacle make_disc(Vec2 center, double radius);
Obstacle make_ellipse(Vec2 center, double a, double b, double rotation);

Vec2 boundary_point(const Obstacle& obs, double theta);
Vec2 outward_normal(const Obstacle& obs, double theta);
double boundary_curvature(const Obstacle& obs, double theta);

struct SignedDistance {
    double distance = 0.0;  // < 0 inside, > 0 outside
    Vec2 normal;            // unit outward
    bool degenerate = false;  // normal fell back to the (1,0) convention
};

SignedDistance signed_distance_and_normal(const Obstacle& obs, Vec2 z);

// Support function h(d) = max_{x in obstacle} d.x for |d| = 1.
double support(const Obstacle& obs, Vec2 dir);

struct SceneGeometry {
    std::vector<Obstacle> obstacles;
    Rect bounding_box;
    double margin = 2.0;

    int count() const { return static_cast<int>(obstacles.size()); }
    double diameter() const { return bounding_box.diameter(); }
    bool inside_any(Vec2 z) const;
};

// Validates pairwise positive gaps.  If box_override is absent the bounding
// box is the hull of the obstacle boxes inflated by margin.
SceneGeometry make_scene(std::vector<Obstacle> obstacles, double margin,
                         std::optional<Rect> box_override = std::nullopt);
SceneGeometry load_scene(const Config& cfg);

double curvature_infimum(const SceneGeometry& scene);
double pairwise_gap_infimum(const SceneGeometry& scene);
double obstacle_gap(const Obstacle& p, const Obstacle& q);

struct TripleCheck {
    int i = 0, j = 0, k = 0;
    bool ok = false;
    double separation = 0.0;  // min over directions of the separation functional
};

struct GeometryReport {
    double kappa = 0.0;
    double gap = 0.0;          // undefined (NaN) for N < 2
    int count = 0;
    std::vector<TripleCheck> triples;
    bool convex_hull_ok = true;
    bool ikawa_ok = false;
    double kappa_gap_product = 0.0;  // kappa * L, NaN for N < 2
    bool kl_boundary_case = false;   // kappa*L within 1e-12 relative of N
};

GeometryReport check_ikawa(const SceneGeometry& scene);

// True when obstacle k stays clear of ConvexHull(obstacle i, obstacle j),
// decided by minimizing the support-function separation over directions.
TripleCheck convex_hull_triple_check(const SceneGeometry& scene, int i, int j, int k);

Json geometry_report_to_json(const GeometryReport& rep);

}  // namespace extlab::geometry
