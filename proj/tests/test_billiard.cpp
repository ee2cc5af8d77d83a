#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "extlab/billiard.hpp"
#include "extlab/rng.hpp"

using namespace extlab;
using namespace extlab::billiard;
using geometry::make_disc;
using geometry::make_ellipse;
using geometry::make_scene;

namespace {

SceneGeometry two_disc_scene() {
    return make_scene({make_disc({0, 0}, 1.0), make_disc({4, 0}, 1.0)}, 2.0);
}

// Dense ray-marching oracle: step along the ray, bisect the boundary
// crossing, reflect with the local normal.  Slow but independent of the exact
// intersection solver.
PhasePoint march_oracle(PhasePoint p, const SceneGeometry& scene, double s_total,
                        double ds = 1e-5) {
    Vec2 z = p.z, zeta = p.zeta;
    double s = 0.0;
    while (s < s_total) {
        const double step = std::min(ds, s_total - s);
        Vec2 znew = z + zeta * (2.0 * step);
        bool crossed = false;
        for (const auto& o : scene.obstacles) {
            if (geometry::signed_distance_and_normal(o, znew).distance < 0.0) {
                // bisect the crossing time
                double lo = 0.0, hi = step;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    const Vec2 zm = z + zeta * (2.0 * mid);
                    if (geometry::signed_distance_and_normal(o, zm).distance < 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                z = z + zeta * (2.0 * lo);
                s += lo;
                const Vec2 n = geometry::signed_distance_and_normal(o, z).normal;
                zeta = zeta - n * (2.0 * zeta.dot(n));
                crossed = true;
                break;
            }
        }
        if (!crossed) {
            z = znew;
            s += step;
        }
    }
    return {z, zeta};
}

// Closed-form two-disc full-period linearization in (arclength, angle):
// free flight by L in these coordinates is [[1, L],[0, 1]]; reflection off a
// convex circular mirror of radius r adds a defocusing kick [[1,0],[2/r,1]].
Mat2 two_disc_closed_form(double L, double r) {
    const Mat2 flight{1.0, L, 0.0, 1.0};
    const Mat2 kick{1.0, 0.0, 2.0 / r, 1.0};
    const Mat2 half = kick * flight;
    return half * half;
}

}  // namespace

TEST_CASE("free flight obeys z' = 2 zeta") {
    const SceneGeometry empty = make_scene({}, 8.0);
    const auto traj = flow({{0, 0}, {1, 0}}, 3.0, empty);
    CHECK(traj.terminal == TerminalKind::TimeExhausted);
    CHECK(traj.state_end.z.x == doctest::Approx(6.0));
    CHECK(traj.state_end.z.y == doctest::Approx(0.0));
}

TEST_CASE("normal incidence reverses the ray") {
    const SceneGeometry scene = make_scene({make_disc({0, 0}, 1.0)}, 3.0);
    const auto traj = flow({{-3, 0}, {1, 0}}, 10.0, scene);
    REQUIRE(traj.hits.size() == 1);
    CHECK(traj.hits[0].s == doctest::Approx(1.0));
    CHECK(traj.hits[0].point.x == doctest::Approx(-1.0));
    CHECK(traj.hits[0].incidence == doctest::Approx(-1.0));
    CHECK(traj.state_end.zeta.x == doctest::Approx(-1.0));
    CHECK(traj.terminal == TerminalKind::Escaped);
}

TEST_CASE("oblique reflection matches the analytic point and the marching oracle") {
    const SceneGeometry scene = make_scene({make_disc({0, 0}, 1.0)}, 3.0);
    const PhasePoint start{{-3, 0.5}, {1, 0}};
    const auto traj = flow(start, 1.6, scene);
    REQUIRE(traj.hits.size() == 1);
    CHECK(traj.hits[0].point.x == doctest::Approx(-std::sqrt(0.75)).epsilon(1e-12));
    CHECK(traj.hits[0].point.y == doctest::Approx(0.5).epsilon(1e-12));

    const PhasePoint oracle = march_oracle(start, scene, 1.6);
    CHECK((traj.state_end.z - oracle.z).norm() < 1e-4);
    const auto analytic = traj.state_end;
    // Specular law at the analytic hit point.
    const Vec2 n = traj.hits[0].point.normalized();
    const Vec2 refl = Vec2{1, 0} - n * (2.0 * n.dot({1, 0}));
    CHECK((analytic.zeta - refl).norm() < 1e-12);
}

TEST_CASE("classify_hit thresholds") {
    CHECK(classify_hit(1.0) == HitClass::Transversal);
    CHECK(classify_hit(0.0) == HitClass::Glancing);
    CHECK(classify_hit(1e-7, 1e-6) == HitClass::Glancing);
    CHECK(classify_hit(1e-5, 1e-6) == HitClass::Transversal);
}

TEST_CASE("energy conservation and reflection law across many bounces") {
    const SceneGeometry scene = two_disc_scene();
    // The common perpendicular orbit, run for 1000 reflections.
    PhasePoint p{{2, 0}, {1, 0}};
    const auto traj = flow(p, 1000.0 * 2.0 + 0.5, scene);
    CHECK(traj.hits.size() >= 1000);
    CHECK(std::abs(traj.state_end.zeta.norm() - 1.0) < 1e-9);

    // Random rays: |zeta| preserved and angle in = angle out at every hit.
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        PhasePoint q{{rng.uniform(-1.5, 5.5), rng.uniform(-2.5, 2.5)},
                     Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized()};
        if (scene.inside_any(q.z)) continue;
        const auto t = flow(q, 12.0, scene);
        CHECK(std::abs(t.state_end.zeta.norm() - 1.0) < 1e-12);
        Vec2 zeta = q.zeta;
        for (const auto& h : t.hits) {
            const Vec2 n = geometry::signed_distance_and_normal(
                               scene.obstacles[h.obstacle], h.point)
                               .normal;
            const Vec2 tangent = n.perp();
            const Vec2 out = zeta - n * (2.0 * zeta.dot(n));
            CHECK(std::abs(std::abs(zeta.dot(tangent)) - std::abs(out.dot(tangent))) < 1e-10);
            zeta = out;
        }
    }
}

TEST_CASE("time reversibility") {
    const SceneGeometry scene = two_disc_scene();
    Rng rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        PhasePoint q{{rng.uniform(-1.5, 5.5), rng.uniform(-2.5, 2.5)},
                     Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)}.normalized()};
        if (scene.inside_any(q.z)) continue;
        const double s = 5.0;
        const auto fwd = flow(q, s, scene);
        if (fwd.terminal != TerminalKind::TimeExhausted) continue;
        const auto back = flow({fwd.state_end.z, -fwd.state_end.zeta}, s, scene);
        if (back.terminal != TerminalKind::TimeExhausted) continue;
        CHECK((back.state_end.z - q.z).norm() < 1e-7);
        CHECK((back.state_end.zeta + q.zeta).norm() < 1e-7);
    }
}

TEST_CASE("escape times") {
    const SceneGeometry empty = make_scene({}, 12.0);
    const auto e = escape_time({{0, 0}, {1, 0}}, empty, 10.0, 100.0);
    CHECK(e.escaped);
    CHECK(e.s_exit == doctest::Approx(5.0));

    const SceneGeometry scene = two_disc_scene();
    const auto trapped = escape_time({{2, 0}, {1, 0}}, scene, 10.0, 1e4);
    CHECK_FALSE(trapped.escaped);

    Rng rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        const SceneGeometry one = make_scene({make_disc({0, 0}, 1.0)}, 4.0);
        PhasePoint q{{-3.0, rng.uniform(-0.8, 0.8)}, {1, 0}};
        const auto r = escape_time(q, one, 8.0, 100.0);
        if (r.glancing_abort) continue;
        CHECK(r.escaped);
        // marching oracle for the exit time
        Vec2 z = q.z, zeta = q.zeta;
        double s = 0.0;
        const PhasePoint end = march_oracle(q, one, r.s_exit);
        CHECK(std::abs(end.z.norm() - 8.0) < 2e-4);
        (void)z;
        (void)zeta;
        (void)s;
    }
}

TEST_CASE("trap integral on the trapped two-disc orbit") {
    const SceneGeometry scene = two_disc_scene();
    const auto symbol = SymbolSpec::radial({2, 0}, 1.5, 2.4);  // plateau covers the orbit
    const double T = 120.0;
    const auto res = trap_integral({{2, 0}, {1, 0}}, symbol, T, scene);
    CHECK(res.diagnosis == TrapDiagnosis::Divergent);
    // a == 1 along the whole orbit: integrand is |zeta| = 1.
    CHECK(res.value == doctest::Approx(T).epsilon(1e-10));
    CHECK(res.rate == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("trap integral converges for escaping rays with compact symbol") {
    const SceneGeometry scene = make_scene({make_disc({0, 0}, 1.0)}, 3.0);
    const auto symbol = SymbolSpec::radial({0, 0}, 1.4, 2.0);
    const auto res = trap_integral({{-3, 0.5}, {1, 0}}, symbol, 60.0, scene,
                                   {FlowDirection::Forward});
    CHECK(res.diagnosis == TrapDiagnosis::Convergent);
    CHECK(res.escaped);
    CHECK(res.tail < 1e-10);
    // Doubling T leaves the value unchanged once escaped.
    const auto res2 = trap_integral({{-3, 0.5}, {1, 0}}, symbol, 120.0, scene,
                                    {FlowDirection::Forward});
    CHECK(res2.value == doctest::Approx(res.value).epsilon(1e-12));
}

TEST_CASE("trap integral with zero and constant symbols") {
    const SceneGeometry scene = two_disc_scene();
    const auto zero = SymbolSpec::radial({100, 100}, 0.5, 1.0);  // support away from everything
    const auto rz = trap_integral({{2, 0}, {1, 0}}, zero, 50.0, scene);
    CHECK(rz.value == doctest::Approx(0.0));
    CHECK(rz.diagnosis == TrapDiagnosis::Convergent);

    // a == 1 everywhere: even an escaping ray accumulates at rate |zeta|.
    const auto one = SymbolSpec::one();
    const auto ro = trap_integral({{-3, 0.9}, {1, 0}}, one, 200.0, scene,
                                  {FlowDirection::Forward});
    CHECK(ro.diagnosis == TrapDiagnosis::Divergent);
    CHECK(ro.value == doctest::Approx(200.0).epsilon(1e-9));
}

TEST_CASE("trap integral respects the backward default") {
    // Asymmetric bump: backward flow from z0 moving +x enters the support,
    // forward flow does not.
    const SceneGeometry empty = make_scene({}, 20.0);
    const auto symbol = SymbolSpec::radial({-6, 0}, 1.0, 2.0);
    const auto back = trap_integral({{0, 0}, {1, 0}}, symbol, 10.0, empty);
    const auto fwd = trap_integral({{0, 0}, {1, 0}}, symbol, 10.0, empty,
                                   {FlowDirection::Forward});
    CHECK(back.value > 0.5);
    CHECK(fwd.value == doctest::Approx(0.0));
}

TEST_CASE("glancing rays abort") {
    const SceneGeometry scene = make_scene({make_disc({0, 0}, 1.0)}, 3.0);
    // Exactly tangent rays miss (zero discriminant); a ray clipping the disc
    // at incidence ~ 4e-7 must trip the 1e-6 glancing tolerance.
    const double y = 1.0 - 1e-13;
    const auto traj = flow({{-3, y}, {1, 0}}, 10.0, scene, {1e-6, 0.0});
    CHECK(traj.terminal == TerminalKind::GlancingAbort);
    REQUIRE(traj.hits.size() == 1);
    CHECK(std::abs(traj.hits[0].incidence) < 1e-6);
    const auto res = trap_integral({{-3, y}, {1, 0}}, SymbolSpec::one(), 10.0, scene,
                                   {FlowDirection::Forward});
    CHECK(res.diagnosis == TrapDiagnosis::GlancingAbort);

    const auto tangent = flow({{-3, 1.0}, {1, 0}}, 10.0, scene, {1e-6, 0.0});
    CHECK(tangent.terminal == TerminalKind::Escaped);
}

TEST_CASE("two-disc periodic orbit endpoints, period, and symplectic linearization") {
    const SceneGeometry scene = two_disc_scene();
    const auto orbit = two_obstacle_periodic_orbit(scene, 0, 1);
    CHECK(orbit.endpoint_i.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(orbit.endpoint_j.x == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(orbit.gap == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(orbit.period == doctest::Approx(2.0).epsilon(1e-12));

    CHECK(orbit.linearization.det() == doctest::Approx(1.0).epsilon(1e-8));
    REQUIRE(orbit.eigen_real);
    CHECK(orbit.lambda_max > 1.0);
    CHECK(orbit.lambda_max * orbit.lambda_min == doctest::Approx(1.0).epsilon(1e-6));

    // Closed-form mirror-optics oracle (L = 2, r = 1).
    const Mat2 oracle = two_disc_closed_form(2.0, 1.0);
    const double tr = oracle.trace();
    const double lam = (tr + std::sqrt(tr * tr - 4.0)) / 2.0;
    CHECK(orbit.lambda_max == doctest::Approx(lam).epsilon(1e-5));

    // Finite-difference oracle with a step sweep and Richardson check.
    const double theta_ref = kPi * 0.0;  // endpoint (1,0) on disc 0 is theta = 0
    double prev_lam = 0.0;
    for (double h : {1e-4, 1e-5, 1e-6}) {
        const auto up = boundary_return_map(scene, 0, 1, theta_ref, {h, 0.0});
        const auto um = boundary_return_map(scene, 0, 1, theta_ref, {-h, 0.0});
        const auto vp = boundary_return_map(scene, 0, 1, theta_ref, {0.0, h});
        const auto vm = boundary_return_map(scene, 0, 1, theta_ref, {0.0, -h});
        Mat2 J{(up.u - um.u) / (2 * h), (vp.u - vm.u) / (2 * h),
               (up.psi - um.psi) / (2 * h), (vp.psi - vm.psi) / (2 * h)};
        const double trj = J.trace();
        const double lamh = (trj + std::sqrt(trj * trj - 4.0 * J.det())) / 2.0;
        if (prev_lam != 0.0) CHECK(lamh == doctest::Approx(prev_lam).epsilon(1e-4));
        prev_lam = lamh;
        CHECK(lamh == doctest::Approx(orbit.lambda_max).epsilon(1e-5));
    }
}

TEST_CASE("disc-ellipse orbit on the shared axis") {
    const SceneGeometry scene =
        make_scene({make_disc({0, 0}, 1.0), make_ellipse({5, 0}, 2.0, 1.0, 0.0)}, 2.0);
    const auto orbit = two_obstacle_periodic_orbit(scene, 0, 1);
    CHECK(orbit.endpoint_i.x == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(orbit.endpoint_j.x == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(orbit.gap == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(orbit.linearization.det() == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("flow rejects bad starts") {
    const SceneGeometry scene = two_disc_scene();
    CHECK_THROWS_AS(flow({{0, 0}, {1, 0}}, 1.0, scene), ValidationError);
    CHECK_THROWS_AS(flow({{2, 0}, {1, 0}}, -1.0, scene), ValidationError);
}
