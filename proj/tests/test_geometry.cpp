#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "extlab/geometry.hpp"
#include "extlab/rng.hpp"

using namespace extlab;
using namespace extlab::geometry;

namespace {

// Brute-force boundary sampling oracle for the curvature infimum.
double curvature_oracle(const Obstacle& o, int samples = 100000) {
    double best = 1e300;
    for (int i = 0; i < samples; ++i)
        best = std::min(best, boundary_curvature(o, kTwoPi * i / samples));
    return best;
}

// Brute-force double boundary sweep oracle for a pairwise gap.
double gap_oracle(const Obstacle& p, const Obstacle& q, int samples = 2000) {
    double best = 1e300;
    for (int i = 0; i < samples; ++i) {
        const Vec2 a = boundary_point(p, kTwoPi * i / samples);
        for (int j = 0; j < samples; ++j) {
            const Vec2 b = boundary_point(q, kTwoPi * j / samples);
            best = std::min(best, (a - b).norm());
        }
    }
    return best;
}

// Monte-Carlo hull-membership oracle: covers ConvexHull(Oi u Oj) by sampling
// the swept-disc representation and checks whether any sample lands in Ok.
bool mc_hull_intersects(const Obstacle& oi, const Obstacle& oj, const Obstacle& ok, Rng& rng,
                        int samples = 100000) {
    for (int s = 0; s < samples; ++s) {
        const double t = rng.uniform();
        // Support point mixture: sample hull points as convex combinations of
        // random boundary points of the two obstacles.
        const Vec2 a = boundary_point(oi, rng.uniform(0.0, kTwoPi));
        const Vec2 b = boundary_point(oj, rng.uniform(0.0, kTwoPi));
        // Random interior point of each obstacle via radial contraction.
        const double ra = std::sqrt(rng.uniform()), rb = std::sqrt(rng.uniform());
        const Vec2 pa = oi.center + (a - oi.center) * ra;
        const Vec2 pb = oj.center + (b - oj.center) * rb;
        const Vec2 hull_pt = pa * (1.0 - t) + pb * t;
        if (signed_distance_and_normal(ok, hull_pt).distance < 0.0) return true;
    }
    return false;
}

SceneGeometry disc_scene(std::vector<std::pair<Vec2, double>> discs, double margin = 2.0) {
    std::vector<Obstacle> obs;
    for (auto& [c, r] : discs) obs.push_back(make_disc(c, r));
    return make_scene(std::move(obs), margin);
}

}  // namespace

TEST_CASE("disc construction and curvature") {
    const Obstacle d = make_disc({0, 0}, 1.0);
    CHECK(boundary_curvature(d, 0.3) == doctest::Approx(1.0));
    const Obstacle d2 = make_disc({3, 0}, 0.5);
    CHECK(boundary_curvature(d2, 1.7) == doctest::Approx(2.0));
    CHECK_THROWS_AS(make_disc({0, 0}, -1.0), ValidationError);
    CHECK_THROWS_AS(make_disc({0, 0}, 0.0), ValidationError);
}

TEST_CASE("ellipse degenerates to circle when a = b") {
    const Obstacle e = make_ellipse({0, 0}, 1.0, 1.0, 0.0);
    for (double t : {0.0, 0.7, 2.1, 4.4})
        CHECK(boundary_curvature(e, t) == doctest::Approx(1.0));
}

TEST_CASE("ellipse curvature infimum matches the closed form and sampling oracle") {
    const Obstacle e = make_ellipse({0, 0}, 2.0, 1.0, 0.0);
    // kappa(t) = ab / (a^2 sin^2 + b^2 cos^2)^{3/2}; min = b/a^2 here.
    const double oracle = curvature_oracle(e);
    CHECK(oracle == doctest::Approx(0.25).epsilon(1e-6));
    const SceneGeometry s = make_scene({e}, 1.0);
    CHECK(curvature_infimum(s) == doctest::Approx(0.25).epsilon(1e-9));

    const Obstacle er = make_ellipse({0, 0}, 2.0, 1.0, kPi / 2.0);
    const SceneGeometry sr = make_scene({er}, 1.0);
    CHECK(curvature_infimum(sr) == doctest::Approx(curvature_infimum(s)).epsilon(1e-12));
    CHECK_THROWS_AS(make_ellipse({0, 0}, -2.0, 1.0, 0.0), ValidationError);
}

TEST_CASE("signed distance and normal") {
    const Obstacle d = make_disc({0, 0}, 1.0);
    auto sd = signed_distance_and_normal(d, {2, 0});
    CHECK(sd.distance == doctest::Approx(1.0));
    CHECK(sd.normal.x == doctest::Approx(1.0));
    CHECK(sd.normal.y == doctest::Approx(0.0));

    auto center = signed_distance_and_normal(d, {0, 0});
    CHECK(center.distance == doctest::Approx(-1.0));
    CHECK(center.normal.x == doctest::Approx(1.0));
    CHECK(center.degenerate);

    const Obstacle e = make_ellipse({0, 0}, 2.0, 1.0, 0.0);
    auto se = signed_distance_and_normal(e, {3, 0});
    CHECK(se.distance == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(se.normal.x == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("boundary samples satisfy distance and normal identities") {
    const Obstacle shapes[] = {make_disc({1.5, -0.5}, 0.8),
                               make_ellipse({-1.0, 2.0}, 1.7, 0.6, 0.456)};
    for (const auto& o : shapes) {
        for (int i = 0; i < 400; ++i) {
            const double t = kTwoPi * i / 400.0;
            const Vec2 p = boundary_point(o, t);
            const auto sd = signed_distance_and_normal(o, p);
            CHECK(std::abs(sd.distance) < 1e-10);
            const Vec2 n = outward_normal(o, t);
            CHECK((sd.normal - n).norm() < 1e-8);
        }
    }
}

TEST_CASE("pairwise gaps: exact disc formula and sampling oracle") {
    const auto s2 = disc_scene({{{0, 0}, 1.0}, {{4, 0}, 1.0}});
    CHECK(pairwise_gap_infimum(s2) == doctest::Approx(2.0).epsilon(1e-12));

    const auto s3 = disc_scene({{{0, 0}, 1.0}, {{4, 0}, 1.0}, {{0, 4}, 1.0}});
    CHECK(pairwise_gap_infimum(s3) == doctest::Approx(2.0).epsilon(1e-12));
    // Diagonal pair alone is 4*sqrt(2) - 2.
    CHECK(obstacle_gap(s3.obstacles[1], s3.obstacles[2]) ==
          doctest::Approx(4.0 * std::sqrt(2.0) - 2.0).epsilon(1e-12));

    CHECK_THROWS_AS(disc_scene({{{0, 0}, 1.0}, {{1.5, 0}, 1.0}}), ValidationError);

    // Disc-ellipse gap against the double-sweep oracle.
    const Obstacle d = make_disc({0, 0}, 1.0);
    const Obstacle e = make_ellipse({4, 1}, 1.5, 0.7, 0.3);
    CHECK(obstacle_gap(d, e) == doctest::Approx(gap_oracle(d, e, 4000)).epsilon(1e-5));
}

TEST_CASE("check_ikawa on canonical scenes") {
    // Two discs: conditions automatically fulfilled.
    const auto rep2 = check_ikawa(disc_scene({{{0, 0}, 1.0}, {{3.1, 0.7}, 1.0}}));
    CHECK(rep2.ikawa_ok);

    // Equilateral triangle, side 6: kappa=1, L=4, kappa L = 4 > 3.
    const auto repbig = check_ikawa(disc_scene(
        {{{0, 0}, 1.0}, {{6, 0}, 1.0}, {{3, 3 * std::sqrt(3.0)}, 1.0}}));
    CHECK(repbig.kappa == doctest::Approx(1.0));
    CHECK(repbig.gap == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(repbig.convex_hull_ok);
    CHECK(repbig.ikawa_ok);

    // Side 2.5: kappa L = 0.5 < 3, hull condition fine but product fails.
    const auto repsmall = check_ikawa(disc_scene(
        {{{0, 0}, 1.0}, {{2.5, 0}, 1.0}, {{1.25, 1.25 * std::sqrt(3.0)}, 1.0}}));
    CHECK(repsmall.kappa_gap_product == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(repsmall.ikawa_ok);

    // Small disc sitting between two big ones: hull condition must fail.
    const auto repblock = check_ikawa(disc_scene(
        {{{-3, 0}, 1.0}, {{3, 0}, 1.0}, {{0, 0.5}, 0.3}}));
    CHECK_FALSE(repblock.convex_hull_ok);
    CHECK_FALSE(repblock.ikawa_ok);
}

TEST_CASE("convex hull verdicts agree with the Monte-Carlo oracle on random scenes") {
    Rng rng(20240811);
    int tested = 0;
    while (tested < 12) {
        // Random 3-disc scene with a positive pairwise gap.
        std::vector<Obstacle> obs;
        bool ok = true;
        for (int k = 0; k < 3 && ok; ++k) {
            const Obstacle cand =
                make_disc({rng.uniform(-4, 4), rng.uniform(-4, 4)}, rng.uniform(0.3, 1.2));
            for (const auto& o : obs)
                if (obstacle_gap(o, cand) < 0.05) ok = false;
            obs.push_back(cand);
        }
        if (!ok) continue;
        SceneGeometry scene = make_scene(obs, 1.0);
        // Skip ties: hull separations too close to zero defeat both oracles.
        bool tie = false;
        for (int k = 0; k < 3; ++k) {
            const auto t = convex_hull_triple_check(scene, (k + 1) % 3, (k + 2) % 3, k);
            if (std::abs(t.separation) < 0.02) tie = true;
        }
        if (tie) continue;
        ++tested;
        for (int k = 0; k < 3; ++k) {
            const int i = (k + 1) % 3, j = (k + 2) % 3;
            const auto t = convex_hull_triple_check(scene, i, j, k);
            const bool mc = mc_hull_intersects(scene.obstacles[i], scene.obstacles[j],
                                               scene.obstacles[k], rng);
            CHECK(t.ok == !mc);
        }
    }
}

TEST_CASE("rigid motions leave kappa, L and the verdict unchanged") {
    Rng rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const double ang = rng.uniform(0.0, kTwoPi);
        const Vec2 shift{rng.uniform(-3, 3), rng.uniform(-3, 3)};
        std::vector<Obstacle> base = {
            make_disc({0, 0}, 0.9),
            make_ellipse({3.5, 0.5}, 1.2, 0.5, 0.4),
            make_disc({0.5, 4.0}, 0.7),
        };
        std::vector<Obstacle> moved;
        for (const auto& o : base) {
            Obstacle m = o;
            m.center = o.center.rotated(ang) + shift;
            if (o.kind == ObstacleKind::Ellipse) m.rotation = o.rotation + ang;
            moved.push_back(m);
        }
        const auto ra = check_ikawa(make_scene(base, 1.5));
        const auto rb = check_ikawa(make_scene(moved, 1.5));
        CHECK(rb.kappa == doctest::Approx(ra.kappa).epsilon(1e-9));
        CHECK(rb.gap == doctest::Approx(ra.gap).epsilon(1e-9));
        CHECK(ra.ikawa_ok == rb.ikawa_ok);
    }
}

TEST_CASE("random disc scenes: kappa and L agree with dense sampling oracles") {
    Rng rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<Obstacle> obs;
        for (int k = 0; k < 4; ++k) {
            for (;;) {
                const Obstacle cand = make_disc({rng.uniform(-5, 5), rng.uniform(-5, 5)},
                                                rng.uniform(0.3, 1.5));
                bool ok = true;
                for (const auto& o : obs)
                    if (obstacle_gap(o, cand) < 0.1) ok = false;
                if (ok) {
                    obs.push_back(cand);
                    break;
                }
            }
        }
        SceneGeometry scene = make_scene(obs, 1.0);
        double kap = 1e300, gap = 1e300;
        for (const auto& o : obs) kap = std::min(kap, 1.0 / o.radius);
        for (size_t i = 0; i < obs.size(); ++i)
            for (size_t j = i + 1; j < obs.size(); ++j)
                gap = std::min(gap, gap_oracle(obs[i], obs[j], 1200));
        CHECK(curvature_infimum(scene) == doctest::Approx(kap).epsilon(1e-9));
        CHECK(pairwise_gap_infimum(scene) == doctest::Approx(gap).epsilon(1e-5));
    }
}

TEST_CASE("scene config loading") {
    const char* text = R"(
[scene]
margin = 1.5
[obstacle]
kind = disc
center = -1.5 0
radius = 1
[obstacle]
kind = ellipse
center = 2 0
semi_axes = 1.2 0.6
rotation = 0.3
)";
    const Config cfg = Config::parse_string(text, "inline");
    const SceneGeometry scene = load_scene(cfg);
    CHECK(scene.count() == 2);
    CHECK(scene.obstacles[0].kind == ObstacleKind::Disc);
    CHECK(scene.obstacles[1].kind == ObstacleKind::Ellipse);
    CHECK(scene.margin == doctest::Approx(1.5));
    CHECK(scene.bounding_box.lo.x == doctest::Approx(-4.0));
}
