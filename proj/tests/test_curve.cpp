#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fbcsf/curve.hpp"
#include "fbcsf/errors.hpp"

using namespace fbcsf;

namespace {
constexpr double kPi = 3.14159265358979323846;

Chord diameter_x(const DiskSurface& surf, int n = 256) {
    std::vector<Vec2> pts;
    for (int i = 0; i < 65; ++i) pts.push_back({-1.0 + 2.0 * i / 64.0, 0.0});
    return Chord::from_points(surf, pts, n);
}
}  // namespace

TEST_CASE("chord construction and resampling invariance") {
    auto disk = DiskSurface::flat_disk();
    auto d = diameter_x(disk);
    CHECK(d.length() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(d.size() == 256);

    // rebuilding from its own samples moves the length by < 1e-8 relative
    auto d2 = Chord::from_points(disk, d.samples(), 256);
    CHECK(std::abs(d2.length() - d.length()) / d.length() < 1e-8);

    // arclength strictly increasing
    const auto& a = d.arclengths();
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i] > a[i - 1]);

    CHECK_THROWS_AS((void)Chord::from_points(
                        disk, {{0.0, 0.5}, {0.1, 0.5}, {0.2, 0.5}, {0.3, 0.5}}, 64),
                    GeometryError);
}

TEST_CASE("curvature of straight chords and circular arcs") {
    auto disk = DiskSurface::flat_disk();
    auto d = diameter_x(disk);
    for (double s : {0.2, 1.0, 1.9}) CHECK(std::abs(d.curvature(s)) < 1e-10);

    // arc of radius 0.5 centered at (0.75, 0), endpoints on the unit circle
    Vec2 c{0.75, 0.0};
    double r = 0.5;
    // intersection angle from circle-circle: cos(psi) relative to center c
    // |c + r w|^2 = 1 -> 0.5625 + 0.25 + 2*0.75*r*w_x = 1 -> w_x = 0.125/0.75
    double wx = (1.0 - c.x * c.x - r * r) / (2 * c.x * r);
    double psi0 = std::acos(wx);
    std::vector<Vec2> arc;
    for (int i = 0; i <= 64; ++i) {
        double psi = psi0 + (2 * kPi - 2 * psi0) * i / 64.0;
        arc.push_back(c + Vec2{r * std::cos(psi), r * std::sin(psi)});
    }
    auto ch = Chord::from_points(disk, arc, 256, true);
    // increasing-psi parametrization: nu points away from the arc center
    for (double s : {0.3 * ch.length(), 0.5 * ch.length(), 0.8 * ch.length()})
        CHECK(ch.curvature(s) == doctest::Approx(-2.0).epsilon(1e-4));
    std::vector<Vec2> rev(arc.rbegin(), arc.rend());
    auto chr = Chord::from_points(disk, rev, 256, true);
    CHECK(chr.curvature(0.5 * chr.length()) == doctest::Approx(2.0).epsilon(1e-4));
}

TEST_CASE("curvature on a conformal surface against the transformation law") {
    // straight chart chord y = 0.3; kappa_g = e^{-phi}(kappa_e - dphi/dn), n = nu
    auto surf = DiskSurface::conformal(ScalarField::quadratic(0.1));
    double y0 = 0.3;
    double xmax = std::sqrt(1 - y0 * y0);
    std::vector<Vec2> pts;
    for (int i = 0; i <= 64; ++i) pts.push_back({-xmax + 2 * xmax * i / 64.0, y0});
    auto ch = Chord::from_points(surf, pts, 256);
    for (double f : {0.3, 0.5, 0.7}) {
        double s = f * ch.length();
        Vec2 p = ch.position(s);
        double phi = 0.1 * p.norm2();
        // nu = (0, -1) in the chart for this left-to-right horizontal chord
        double expected = std::exp(-phi) * (0.0 + 0.2 * p.y);
        CHECK(ch.curvature(s) == doctest::Approx(expected).epsilon(1e-4));
    }
}

TEST_CASE("orthogonality defect") {
    auto disk = DiskSurface::flat_disk();
    auto d = diameter_x(disk);
    auto [d0, d1] = d.orthogonality_defect();
    CHECK(std::abs(d0) < 1e-9);
    CHECK(std::abs(d1) < 1e-9);

    // vertical chord x = 0.5
    std::vector<Vec2> pts;
    double ymax = std::sqrt(0.75);
    for (int i = 0; i <= 64; ++i) pts.push_back({0.5, -ymax + 2 * ymax * i / 64.0});
    auto v = Chord::from_points(disk, pts, 128);
    auto [v0, v1] = v.orthogonality_defect();
    CHECK(v0 == doctest::Approx(kPi / 6).epsilon(1e-6));
    CHECK(v1 == doctest::Approx(kPi / 6).epsilon(1e-6));

    auto ell = DiskSurface::flat_ellipse(2.0, 1.0);
    std::vector<Vec2> minor;
    for (int i = 0; i <= 64; ++i) minor.push_back({0.0, -1.0 + 2.0 * i / 64.0});
    auto m = Chord::from_points(ell, minor, 128);
    auto [m0, m1] = m.orthogonality_defect();
    CHECK(std::abs(m0) < 1e-9);
    CHECK(std::abs(m1) < 1e-9);
}

TEST_CASE("completed arclength") {
    auto disk = DiskSurface::flat_disk();
    auto d = diameter_x(disk);  // L = 2

    CHECK(completed_arclength(d, {0.5, +1}, {1.5, +1}) == doctest::Approx(1.0));
    CHECK(completed_arclength(d, {0.5, +1}, {0.5, -1}) == doctest::Approx(1.0));
    CHECK(completed_arclength(d, {1.8, +1}, {1.8, -1}) == doctest::Approx(0.4));

    SUBCASE("symmetry and boundary identification") {
        for (double s : {0.1, 0.7, 1.3, 2.0}) {
            CHECK(completed_arclength(d, {s, +1}, {0.4, -1}) ==
                  completed_arclength(d, {0.4, -1}, {s, +1}));
            // s = 0 and s = L are identified across copies
            CHECK(completed_arclength(d, {0.0, +1}, {s, -1}) ==
                  doctest::Approx(completed_arclength(d, {0.0, -1}, {s, -1})));
            CHECK(completed_arclength(d, {2.0, +1}, {s, -1}) ==
                  doctest::Approx(completed_arclength(d, {2.0, -1}, {s, -1})));
        }
    }

    SUBCASE("range (0, L] for distinct completed points") {
        for (int i = 0; i <= 20; ++i) {
            for (int j = 0; j <= 20; ++j) {
                CompletedPoint x{2.0 * i / 20, +1}, y{2.0 * j / 20, -1};
                double l = completed_arclength(d, x, y);
                CHECK(l <= 2.0 + 1e-12);
                CHECK(l >= 0.0);
            }
        }
    }
}

TEST_CASE("nearer endpoint arclength") {
    auto d = diameter_x(DiskSurface::flat_disk());
    CHECK(nearer_endpoint_arclength(d, 0.3) == doctest::Approx(0.3));
    CHECK(nearer_endpoint_arclength(d, 1.0) == doctest::Approx(1.0));
    CHECK(nearer_endpoint_arclength(d, 1.7) == doctest::Approx(0.3));
}

TEST_CASE("embeddedness sweep") {
    auto disk = DiskSurface::flat_disk();
    CHECK(diameter_x(disk).is_embedded());

    // S-shaped self-crossing polyline
    std::vector<Vec2> bad;
    for (int i = 0; i <= 32; ++i) {
        double t = -1.0 + 2.0 * i / 32.0;
        bad.push_back({t, 0.8 * std::sin(2.5 * kPi * t) * (1 - t * t)});
    }
    // force an actual crossing by folding the tail back
    std::vector<Vec2> corners = {{-1, 0}, {0.3, 0.4}, {0.5, -0.2}, {-0.3, 0.25}, {0, -1}};
    std::vector<Vec2> fold;
    for (std::size_t k = 0; k + 1 < corners.size(); ++k)
        for (int i = 0; i < 16; ++i)
            fold.push_back(corners[k] + (corners[k + 1] - corners[k]) * (i / 16.0));
    fold.push_back(corners.back());
    auto folded = Chord::from_points(disk, fold, 128, true);
    CHECK(!folded.is_embedded());
}

TEST_CASE("csv round trip is deterministic") {
    auto disk = DiskSurface::flat_disk();
    auto d = diameter_x(disk, 64);
    std::string csv1 = curve_to_csv(d);
    std::istringstream in(csv1);
    auto d2 = curve_from_csv(disk, in);
    std::string csv2 = curve_to_csv(d2);
    CHECK(csv1 == csv2);
}
