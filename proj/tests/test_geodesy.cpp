#include <cmath>
#include <queue>
#include <random>

#include "doctest.h"
#include "fbcsf/geodesy.hpp"

using namespace fbcsf;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Independent oracle: Dijkstra on an 8-neighbour grid graph with metric edge
// weights (trapezoid rule per edge). Masked to the chart domain.
double dijkstra_distance(const DiskSurface& surf, Vec2 p, Vec2 q, int n) {
    const double a = surf.chart_a(), b = surf.chart_b();
    const double hx = 2 * a / (n - 1), hy = 2 * b / (n - 1);
    auto node_pt = [&](int i, int j) { return Vec2{-a + hx * i, -b + hy * j}; };
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * n + i; };
    auto inside = [&](int i, int j) { return surf.implicit(node_pt(i, j)) <= 1e-12; };
    auto weight = [&](Vec2 u, Vec2 v) {
        Vec2 d = v - u;
        return 0.5 * (surf.norm_at(u, d) + surf.norm_at(v, d));
    };
    int pi = static_cast<int>(std::round((p.x + a) / hx));
    int pj = static_cast<int>(std::round((p.y + b) / hy));
    int qi = static_cast<int>(std::round((q.x + a) / hx));
    int qj = static_cast<int>(std::round((q.y + b) / hy));
    REQUIRE((node_pt(pi, pj) - p).norm() < 1e-12);
    REQUIRE((node_pt(qi, qj) - q).norm() < 1e-12);

    std::vector<double> dist(static_cast<std::size_t>(n) * n, 1e300);
    using QE = std::pair<double, std::size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> heap;
    dist[idx(pi, pj)] = 0.0;
    heap.push({0.0, idx(pi, pj)});
    const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    while (!heap.empty()) {
        auto [dv, id] = heap.top();
        heap.pop();
        if (dv > dist[id]) continue;
        int i = static_cast<int>(id % n), j = static_cast<int>(id / n);
        if (i == qi && j == qj) return dv;
        for (int k = 0; k < 8; ++k) {
            int ni = i + dxs[k], nj = j + dys[k];
            if (ni < 0 || nj < 0 || ni >= n || nj >= n || !inside(ni, nj)) continue;
            double nd = dv + weight(node_pt(i, j), node_pt(ni, nj));
            if (nd < dist[idx(ni, nj)]) {
                dist[idx(ni, nj)] = nd;
                heap.push({nd, idx(ni, nj)});
            }
        }
    }
    return dist[idx(qi, qj)];
}

}  // namespace

TEST_CASE("geodesic shooting basics") {
    auto disk = DiskSurface::flat_disk();
    auto p1 = geodesic_shoot(disk, {0, 0}, {1, 0}, 0.5);
    CHECK((p1.endpoint() - Vec2{0.5, 0}).norm() < 1e-12);
    CHECK(!p1.boundary_hit);

    auto p2 = geodesic_shoot(disk, {0.9, 0}, {1, 0}, 0.5);
    CHECK(p2.boundary_hit);
    CHECK((p2.endpoint() - Vec2{1, 0}).norm() < 1e-10);
    CHECK(p2.length == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("geodesic shooting self-convergence on a conformal metric") {
    auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    ShootOptions fine;
    fine.step = 1.0 / 4096.0;
    Vec2 ref = geodesic_shoot(surf, {0, 0}, {1, 0}, 0.5, fine).endpoint();

    ShootOptions o1, o2, o3;
    o1.step = 1.0 / 256.0;
    o2.step = 1.0 / 512.0;
    o3.step = 1.0 / 1024.0;
    double e1 = (geodesic_shoot(surf, {0, 0}, {1, 0}, 0.5, o1).endpoint() - ref).norm();
    double e2 = (geodesic_shoot(surf, {0, 0}, {1, 0}, 0.5, o2).endpoint() - ref).norm();
    double e3 = (geodesic_shoot(surf, {0, 0}, {1, 0}, 0.5, o3).endpoint() - ref).norm();
    CHECK(e1 < 1e-7);
    if (e2 > 1e-15 && e3 > 1e-15) {
        CHECK(e1 / e2 >= 3.5);
        CHECK(e2 / e3 >= 3.5);
    }
}

TEST_CASE("geodesic path invariants") {
    auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    ShootOptions o;
    o.step = 1.0 / 512.0;
    auto path = geodesic_shoot(surf, {-0.3, -0.2}, {0.8, 0.6}, 0.9, o);

    // residual |nabla_{gamma'} gamma'| small along the path
    const auto& xs = path.samples;
    const auto& vs = path.velocities;
    double h = path.length / (xs.size() - 1);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        Vec2 dv = (vs[i + 1] - vs[i - 1]) / (2 * h);
        Vec2 res = dv + surf.christoffel_at(xs[i]).apply(vs[i], vs[i]);
        worst = std::max(worst, surf.norm_at(xs[i], res));
    }
    CHECK(worst < 1e-4);

    // reported length equals the metric sum of segments to 1e-8 relative
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        Vec2 d = xs[i + 1] - xs[i];
        for (const auto& n : gl4_nodes(0.0, 1.0, 1)) acc += n.w * surf.norm_at(xs[i] + d * n.x, d);
    }
    CHECK(std::abs(acc - path.length) / path.length < 1e-8);
}

TEST_CASE("distance on flat charts") {
    auto disk = DiskSurface::flat_disk();
    CHECK(distance(disk, {0.5, 0}, {-0.5, 0}) == doctest::Approx(1.0));
    CHECK(distance(disk, {0.9, 0.4}, {0.9, -0.4}) == doctest::Approx(0.8));
}

TEST_CASE("conformal distance against the graph oracle") {
    auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    double d = distance(surf, {0.5, 0}, {-0.5, 0});
    double oracle = dijkstra_distance(surf, {0.5, 0}, {-0.5, 0}, 1025);
    CHECK(std::abs(d - oracle) < 2e-3);
}

TEST_CASE("distance symmetry and triangle inequality") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-0.95, 0.95);
    auto draw = [&](const DiskSurface& s) {
        while (true) {
            Vec2 p{u(rng), u(rng)};
            if (s.implicit(p) < -1e-3) return p;
        }
    };

    SUBCASE("flat: 1000 random pairs") {
        auto disk = DiskSurface::flat_disk();
        for (int k = 0; k < 1000; ++k) {
            Vec2 p = draw(disk), q = draw(disk);
            CHECK(std::abs(distance(disk, p, q) - distance(disk, q, p)) < 1e-6);
        }
    }

    SUBCASE("conformal: symmetry and triangles") {
        auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
        for (int k = 0; k < 60; ++k) {
            Vec2 p = draw(surf), q = draw(surf), r = draw(surf);
            double dpq = distance(surf, p, q);
            CHECK(std::abs(dpq - distance(surf, q, p)) < 1e-6);
            CHECK(dpq <= distance(surf, p, r) + distance(surf, r, q) + 1e-6);
        }
    }
}

TEST_CASE("reflected distance") {
    auto disk = DiskSurface::flat_disk();

    SUBCASE("axis pair with tie broken at smallest arclength") {
        auto r = reflected_distance(disk, {0.5, 0}, {-0.5, 0});
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
        CHECK((r.z - Vec2{1, 0}).norm() < 1e-6);
    }

    SUBCASE("coincident points") {
        auto r = reflected_distance(disk, {0.5, 0}, {0.5, 0});
        CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
        CHECK((r.z - Vec2{1, 0}).norm() < 1e-6);
    }

    SUBCASE("ellipse pole pair") {
        auto ell = DiskSurface::flat_ellipse(2.0, 1.0);
        auto r = reflected_distance(ell, {0, 0.5}, {0, -0.5});
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-9));
        CHECK((r.z - Vec2{0, 1}).norm() < 1e-6);
    }

    SUBCASE("bounds against boundary legs") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> u(-0.9, 0.9);
        for (int k = 0; k < 40; ++k) {
            Vec2 p{u(rng), u(rng)}, q{u(rng), u(rng)};
            if (disk.implicit(p) > -1e-3 || disk.implicit(q) > -1e-3) continue;
            auto r = reflected_distance(disk, p, q);
            double dp = 1.0 - p.norm(), dq = 1.0 - q.norm();
            CHECK(r.value >= dp + dq - 1e-9);
            for (int m = 0; m < 128; ++m) {
                double s = disk.boundary_length() * m / 128.0;
                Vec2 z = disk.boundary_point_at(s);
                CHECK(r.value <= (p - z).norm() + (q - z).norm() + 1e-9);
            }
        }
    }

    SUBCASE("reflection law at the optimal corner") {
        auto r = reflected_distance(disk, {0.3, 0.4}, {0.1, -0.5});
        // both legs arrive at z with equal angles against the boundary tangent
        Vec2 tb = disk.boundary_tangent_at(r.z_arclength);
        double c1 = std::abs(r.leg_x.end_velocity().dot(tb));
        double c2 = std::abs(r.leg_y.end_velocity().dot(tb));
        CHECK(std::abs(c1 - c2) < 1e-6);
        CHECK(r.theta0 > 0);
        CHECK(r.theta0 < kPi / 2);
    }
}

TEST_CASE("completed distance on the diameter") {
    auto disk = DiskSurface::flat_disk();
    auto d = Chord::straight_between(disk, disk.nearest_boundary_arclength({-1, 0}),
                                     disk.nearest_boundary_arclength({1, 0}), 64);
    REQUIRE(d.length() == doctest::Approx(2.0).epsilon(1e-10));

    CHECK(completed_distance(disk, {0.5, +1}, {1.5, +1}, d) == doctest::Approx(1.0));
    CHECK(completed_distance(disk, {0.5, +1}, {0.5, -1}, d) ==
          doctest::Approx(1.0).epsilon(1e-8));
    CHECK(completed_distance(disk, {0.7, +1}, {0.7, +1}, d) == doctest::Approx(0.0));
}

TEST_CASE("completed distance bounded by completed arclength") {
    auto ell = DiskSurface::flat_ellipse(2.0, 1.0);
    std::vector<Vec2> minor;
    for (int i = 0; i <= 32; ++i) minor.push_back({0.0, -1.0 + 2.0 * i / 32.0});
    auto m = Chord::from_points(ell, minor, 64);
    for (int i = 0; i <= 8; ++i) {
        for (int j = 0; j <= 8; ++j) {
            for (int sx : {+1, -1}) {
                CompletedPoint x{m.length() * i / 8, sx}, y{m.length() * j / 8, -1};
                if (completed_arclength(m, x, y) < 1e-9) continue;
                CHECK(completed_distance(ell, x, y, m) <=
                      completed_arclength(m, x, y) + 1e-9);
            }
        }
    }
}

TEST_CASE("parallel transport") {
    SUBCASE("flat transport is constant") {
        auto disk = DiskSurface::flat_disk();
        auto path = geodesic_shoot(disk, {-0.5, -0.2}, {1, 0.3}, 0.9);
        auto field = parallel_transport(disk, path, {0, 1});
        for (const auto& v : field) CHECK((v - Vec2{0, 1}).norm() < 1e-12);
    }

    SUBCASE("norm preservation and inverse path") {
        auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
        auto path = geodesic_shoot(surf, {-0.4, 0.1}, {1, 0.2}, 0.8);
        Vec2 v0{0.3, 0.7};
        auto field = parallel_transport(surf, path, v0);
        double n0 = surf.norm_at(path.samples.front(), v0);
        double n1 = surf.norm_at(path.samples.back(), field.back());
        CHECK(std::abs(n1 - n0) / n0 < 1e-8);

        GeodesicPath rev;
        rev.samples.assign(path.samples.rbegin(), path.samples.rend());
        rev.length = path.length;
        auto back = parallel_transport(surf, rev, field.back());
        CHECK((back.back() - v0).norm() < 1e-8);
    }

    SUBCASE("holonomy around a geodesic triangle equals enclosed curvature") {
        auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
        Vec2 A{-0.25, -0.15}, B{0.3, -0.1}, C{0.05, 0.3};
        auto ab = connect_geodesic(surf, A, B);
        auto bc = connect_geodesic(surf, B, C);
        auto ca = connect_geodesic(surf, C, A);
        REQUIRE(ab.converged);
        REQUIRE(bc.converged);
        REQUIRE(ca.converged);

        Vec2 v0{1, 0};
        auto f1 = parallel_transport(surf, ab.path, v0);
        auto f2 = parallel_transport(surf, bc.path, f1.back());
        auto f3 = parallel_transport(surf, ca.path, f2.back());
        Vec2 vf = f3.back();

        double c = surf.inner_at(A, v0, vf) / (surf.norm_at(A, v0) * surf.norm_at(A, vf));
        Vec2 jv = surf.rotate_ccw(A, v0);
        double s = surf.inner_at(A, jv, vf) / (surf.norm_at(A, jv) * surf.norm_at(A, vf));
        double holonomy = std::atan2(s, c);

        std::vector<Vec2> poly;
        auto add = [&](const GeodesicPath& gp) {
            for (std::size_t i = 0; i + 1 < gp.samples.size(); ++i)
                poly.push_back(gp.samples[i]);
        };
        add(ab.path);
        add(bc.path);
        add(ca.path);
        double enclosed = integrate_over_polygon(
            surf, poly, [&](Vec2 p) { return surf.gaussian_curvature(p); }, 1);
        CHECK(std::abs(holonomy - enclosed) < 1e-4);
    }
}
