#include <cmath>
#include <random>

#include "doctest.h"
#include "fbcsf/errors.hpp"
#include "fbcsf/surface.hpp"

using namespace fbcsf;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Curvature oracle from metric values only: Brioschi with central differences.
double fd_curvature(const DiskSurface& s, Vec2 p, double h = 1e-4) {
    auto g = [&](double x, double y) { return s.metric_at({x, y}); };
    double E = g(p.x, p.y).a11, F = g(p.x, p.y).a12, G = g(p.x, p.y).a22;
    auto du = [&](auto pick) {
        return (pick(g(p.x + h, p.y)) - pick(g(p.x - h, p.y))) / (2 * h);
    };
    auto dv = [&](auto pick) {
        return (pick(g(p.x, p.y + h)) - pick(g(p.x, p.y - h))) / (2 * h);
    };
    auto E_ = [](const Mat2& m) { return m.a11; };
    auto F_ = [](const Mat2& m) { return m.a12; };
    auto G_ = [](const Mat2& m) { return m.a22; };
    double Eu = du(E_), Ev = dv(E_), Fu = du(F_), Fv = dv(F_), Gu = du(G_), Gv = dv(G_);
    double Evv = (g(p.x, p.y + h).a11 - 2 * E + g(p.x, p.y - h).a11) / (h * h);
    double Guu = (g(p.x + h, p.y).a22 - 2 * G + g(p.x - h, p.y).a22) / (h * h);
    double Fuv = (g(p.x + h, p.y + h).a12 - g(p.x + h, p.y - h).a12 -
                  g(p.x - h, p.y + h).a12 + g(p.x - h, p.y - h).a12) /
                 (4 * h * h);
    auto det3 = [](double m[3][3]) {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    double m1[3][3] = {{-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
                       {Fv - 0.5 * Gu, E, F},
                       {0.5 * Gv, F, G}};
    double m2[3][3] = {{0, 0.5 * Ev, 0.5 * Gu}, {0.5 * Ev, E, F}, {0.5 * Gu, F, G}};
    double den = E * G - F * F;
    return (det3(m1) - det3(m2)) / (den * den);
}

// Turning-angle oracle for planar boundary curvature on flat charts.
double fd_boundary_turning(const DiskSurface& s, double arc, double h = 1e-5) {
    auto tang = [&](double u) {
        Vec2 t = s.boundary_tangent_at(u);
        return std::atan2(t.y, t.x);
    };
    double a0 = tang(arc - h), a1 = tang(arc + h);
    double d = a1 - a0;
    while (d > kPi) d -= 2 * kPi;
    while (d < -kPi) d += 2 * kPi;
    return d / (2 * h);
}

TensorField tensor_from_conformal(const ScalarField& phi) {
    TensorField t;
    t.value = [phi](Vec2 p) {
        double e = std::exp(2 * phi.value(p));
        return Mat2::diag(e, e);
    };
    t.d1 = [phi](Vec2 p, int k) {
        double e = std::exp(2 * phi.value(p));
        Vec2 g = phi.gradient(p);
        double c = 2 * (k == 0 ? g.x : g.y) * e;
        return Mat2::diag(c, c);
    };
    t.d2 = [phi](Vec2 p, int k, int l) {
        double e = std::exp(2 * phi.value(p));
        Vec2 g = phi.gradient(p);
        Mat2 hs = phi.hessian(p);
        double fk = k == 0 ? g.x : g.y;
        double fl = l == 0 ? g.x : g.y;
        double fkl = (k == 0) ? (l == 0 ? hs.a11 : hs.a12) : (l == 0 ? hs.a21 : hs.a22);
        double c = (4 * fk * fl + 2 * fkl) * e;
        return Mat2::diag(c, c);
    };
    return t;
}

}  // namespace

TEST_CASE("metric_at basics") {
    auto disk = DiskSurface::flat_disk();
    Mat2 g = disk.metric_at({0.3, 0.1});
    CHECK(g.a11 == doctest::Approx(1.0));
    CHECK(g.a22 == doctest::Approx(1.0));
    CHECK(g.a12 == 0.0);

    auto zero = DiskSurface::conformal(ScalarField::quadratic(0.0));
    Mat2 gz = zero.metric_at({0.2, -0.4});
    CHECK(gz.a11 == doctest::Approx(1.0));

    auto conf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    Mat2 gc = conf.metric_at({0.5, 0.0});
    CHECK(gc.a11 == doctest::Approx(std::exp(0.05)).epsilon(1e-12));
    CHECK(gc.a22 == doctest::Approx(std::exp(0.05)).epsilon(1e-12));

    CHECK_THROWS_AS((void)disk.metric_at({1.2, 0.0}), DomainError);
}

TEST_CASE("gaussian curvature against finite-difference oracle") {
    auto disk = DiskSurface::flat_disk();
    CHECK(disk.gaussian_curvature({0.4, -0.2}) == 0.0);

    auto conf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    double k0 = conf.gaussian_curvature({0.0, 0.0});
    CHECK(k0 == doctest::Approx(-0.4).epsilon(1e-10));
    CHECK(std::abs(k0 - fd_curvature(conf, {0.0, 0.0})) < 1e-6);

    auto cap = DiskSurface::conformal(ScalarField::log_cap());
    double k1 = cap.gaussian_curvature({0.2, 0.3});
    CHECK(k1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(k1 - fd_curvature(cap, {0.2, 0.3})) < 1e-6);
}

TEST_CASE("conformal and general-metric curvature agree to 1e-8") {
    for (auto phi : {ScalarField::quadratic(0.1), ScalarField::log_cap(),
                     ScalarField::aniso_x(0.15)}) {
        auto conf = DiskSurface::conformal(phi);
        auto gen = DiskSurface::general(tensor_from_conformal(phi));
        for (int i = 0; i < 64; ++i) {
            for (int j = 0; j < 64; ++j) {
                Vec2 p{-0.9 + 1.8 * i / 63.0, -0.9 + 1.8 * j / 63.0};
                if (p.norm() >= 0.95) continue;
                CHECK(std::abs(conf.gaussian_curvature(p) - gen.gaussian_curvature(p)) <
                      1e-8);
            }
        }
    }
}

TEST_CASE("boundary geodesic curvature") {
    auto disk = DiskSurface::flat_disk();
    for (double s : {0.0, 1.0, 2.5, 6.0})
        CHECK(disk.boundary_geodesic_curvature(s) == doctest::Approx(1.0).epsilon(1e-10));

    auto ell = DiskSurface::flat_ellipse(2.0, 1.0);
    // co-vertex (0, 1) sits at parameter pi/2
    double s_cov = ell.boundary_arclength_of_param(kPi / 2);
    CHECK(ell.boundary_geodesic_curvature(s_cov) == doctest::Approx(0.25).epsilon(1e-8));
    // closed-form ab/(a^2 sin^2 t + b^2 cos^2 t)^{3/2} vs turning-angle oracle
    for (double t : {0.3, 1.1, 2.0, 4.4}) {
        double s = ell.boundary_arclength_of_param(t);
        double st = std::sin(t), ct = std::cos(t);
        double closed = 2.0 / std::pow(4 * st * st + ct * ct, 1.5);
        CHECK(ell.boundary_geodesic_curvature(s) == doctest::Approx(closed).epsilon(1e-8));
        CHECK(std::abs(ell.boundary_geodesic_curvature(s) - fd_boundary_turning(ell, s)) <
              1e-6);
    }
}

TEST_CASE("conformal deformation identities") {
    auto disk = DiskSurface::flat_disk();

    SUBCASE("identity deformation") {
        auto same = disk.conformally_deformed(ScalarField::quadratic(0.0));
        Mat2 g = same.metric_at({0.3, 0.3});
        CHECK(g.a11 == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("curvature rule K~ = e^{-2phi}(K - lap phi)") {
        auto def = disk.conformally_deformed(ScalarField::quadratic(-0.05));
        CHECK(def.gaussian_curvature({0, 0}) == doctest::Approx(0.2).epsilon(1e-10));
        // against the finite-difference oracle on the deformed surface
        CHECK(std::abs(def.gaussian_curvature({0, 0}) - fd_curvature(def, {0, 0})) < 1e-6);
    }

    SUBCASE("boundary rule kappa~ = e^{-phi}(kappa - dphi/dnu), nu inward") {
        // radial phi with inward normal derivative +0.5 on the unit circle,
        // i.e. dphi/dr = -0.5 at r = 1
        double c = -0.25;
        auto def = disk.conformally_deformed(ScalarField::quadratic(c));
        double expected = std::exp(-c) * (1.0 - 0.5);
        for (double s : {0.0, 1.3, 4.0})
            CHECK(def.boundary_geodesic_curvature(s) ==
                  doctest::Approx(expected).epsilon(1e-6));
    }

    SUBCASE("spherical cap equator is a geodesic of the deformed metric") {
        auto cap = disk.conformally_deformed(ScalarField::log_cap());
        CHECK(std::abs(cap.boundary_geodesic_curvature(1.0)) < 1e-8);
    }

    SUBCASE("neumann-zero field keeps kappa~ = e^{-phi} kappa at band endpoints") {
        auto band = ScalarField::normal_band({0, 0}, {1, 0}, 1.0, 0.5);
        auto def = disk.conformally_deformed(band);
        // the band axis crosses the boundary at (1,0), arclength 0, where phi = 0
        CHECK(def.boundary_geodesic_curvature(0.0) == doctest::Approx(1.0).epsilon(1e-8));
    }
}

TEST_CASE("positive definiteness at random chart points") {
    std::mt19937_64 rng(20240811);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto surf : {DiskSurface::flat_disk(), DiskSurface::flat_ellipse(2.0, 1.0),
                      DiskSurface::conformal(ScalarField::quadratic(0.1)),
                      DiskSurface::conformal(ScalarField::log_cap()),
                      DiskSurface::conformal(ScalarField::aniso_x(0.15))}) {
        double a = surf.chart_a(), b = surf.chart_b();
        int tested = 0;
        while (tested < 10000) {
            Vec2 p{a * u(rng), b * u(rng)};
            if (!surf.contains(p, -1e-9)) continue;
            ++tested;
            CHECK(surf.metric_at(p).min_eigenvalue_sym() > 1e-12);
        }
    }
}

TEST_CASE("convexity audit at 1024 boundary samples") {
    for (auto surf : {DiskSurface::flat_disk(), DiskSurface::flat_ellipse(2.0, 1.0),
                      DiskSurface::conformal(ScalarField::quadratic(0.1)),
                      DiskSurface::conformal(ScalarField::quadratic(0.3)),
                      DiskSurface::conformal(ScalarField::aniso_x(0.15))}) {
        double L = surf.boundary_length();
        for (int i = 0; i < 1024; ++i)
            CHECK(surf.boundary_geodesic_curvature(L * i / 1024.0) > 0.0);
    }
}

TEST_CASE("gauss-bonnet on the full disk") {
    for (auto surf : {DiskSurface::flat_disk(), DiskSurface::flat_ellipse(2.0, 1.0),
                      DiskSurface::conformal(ScalarField::quadratic(0.1)),
                      DiskSurface::conformal(ScalarField::log_cap())}) {
        double r0 = surf.gauss_bonnet_residual(0);
        CHECK(r0 < 1e-3);
        double r1 = surf.gauss_bonnet_residual(1);
        CHECK(r1 < 0.5 * r0 + 1e-10);
    }
}

TEST_CASE("sup constants and isoperimetric data") {
    auto disk = DiskSurface::flat_disk();
    CHECK(disk.curvature_sup() == 0.0);
    CHECK(disk.boundary_curvature_sup() == doctest::Approx(1.05).epsilon(1e-6));
    auto iso = disk.isoperimetric();
    CHECK(iso.Cprime == doctest::Approx(1.0 / (4 * kPi)).epsilon(1e-9));
    CHECK(iso.L0 == doctest::Approx(kPi).epsilon(1e-9));

    auto conf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    CHECK(conf.curvature_sup() == doctest::Approx(0.42).epsilon(1e-3));
}

TEST_CASE("convexity warning on destructive deformation") {
    auto disk = DiskSurface::flat_disk();
    // steep outward decay makes kappa~ = e^{-phi}(1 + dphi/dr) negative at r = 1
    auto bad = disk.conformally_deformed(ScalarField::quadratic(-0.8));
    CHECK(bad.convexity_warning().has_value());
    auto good = disk.conformally_deformed(ScalarField::quadratic(0.1));
    CHECK(!good.convexity_warning().has_value());
}
