#include "fbcsf/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fbcsf/errors.hpp"

namespace fbcsf {

namespace {

// Metric length of the chart segment [p, q] by order-4 quadrature.
double segment_length(const DiskSurface& surf, Vec2 p, Vec2 q) {
    Vec2 d = q - p;
    double acc = 0.0;
    for (const auto& n : gl4_nodes(0.0, 1.0, 1))
        acc += n.w * surf.norm_at(p + d * n.x, d);
    return acc;
}

}  // namespace

struct Chord::Impl {
    DiskSurface surface;
    std::vector<Vec2> samples;
    std::vector<double> arcl;
    double length = 0.0;
    CubicSpline sx, sy;

    Vec2 vel(double s) const { return {sx.deriv(s), sy.deriv(s)}; }
    Vec2 acc(double s) const { return {sx.deriv2(s), sy.deriv2(s)}; }
};

static void build_splines(Chord::Impl& im) {
    std::vector<double> xs(im.samples.size()), ys(im.samples.size());
    for (std::size_t i = 0; i < im.samples.size(); ++i) {
        xs[i] = im.samples[i].x;
        ys[i] = im.samples[i].y;
    }
    im.sx = CubicSpline(im.arcl, xs);
    im.sy = CubicSpline(im.arcl, ys);
}

Chord Chord::from_points(const DiskSurface& surface, const std::vector<Vec2>& points_in,
                         int n, bool project_endpoints) {
    if (points_in.size() < 4) throw ResolutionError("Chord: need at least 4 input points");
    if (n < 8) throw ResolutionError("Chord: need at least 8 samples");
    std::vector<Vec2> pts = points_in;
    if (project_endpoints) {
        pts.front() = surface.project_to_boundary(pts.front());
        pts.back() = surface.project_to_boundary(pts.back());
    }
    if (std::abs(surface.implicit(pts.front())) > 2e-8 ||
        std::abs(surface.implicit(pts.back())) > 2e-8)
        throw GeometryError("Chord: endpoints must lie on the boundary");

    // provisional arclength along the input polyline
    std::vector<double> s(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        double ds = segment_length(surface, pts[i - 1], pts[i]);
        if (!(ds > 0)) throw GeometryError("Chord: repeated or out-of-order points");
        s[i] = s[i - 1] + ds;
    }
    CubicSpline px(s, [&] {
        std::vector<double> v(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) v[i] = pts[i].x;
        return v;
    }());
    CubicSpline py(s, [&] {
        std::vector<double> v(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) v[i] = pts[i].y;
        return v;
    }());

    // two passes of uniform-arclength resampling through the spline
    auto impl = std::make_shared<Impl>();
    impl->surface = surface;
    std::vector<Vec2> cur = pts;
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> cs(cur.size(), 0.0);
        for (std::size_t i = 1; i < cur.size(); ++i)
            cs[i] = cs[i - 1] + segment_length(surface, cur[i - 1], cur[i]);
        double total = cs.back();
        std::vector<double> xs(cur.size()), ys(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            xs[i] = cur[i].x;
            ys[i] = cur[i].y;
        }
        CubicSpline fx(cs, xs), fy(cs, ys);
        std::vector<Vec2> next(n);
        for (int i = 0; i < n; ++i) {
            double si = total * i / (n - 1);
            next[i] = {fx.eval(si), fy.eval(si)};
        }
        next.front() = cur.front();
        next.back() = cur.back();
        cur = std::move(next);
    }

    impl->samples = cur;
    impl->arcl.assign(n, 0.0);
    for (int i = 1; i < n; ++i)
        impl->arcl[i] =
            impl->arcl[i - 1] + segment_length(surface, cur[i - 1], cur[i]);
    impl->length = impl->arcl.back();
    build_splines(*impl);

    for (int i = 1; i + 1 < n; ++i)
        if (surface.implicit(cur[i]) >= 0)
            throw GeometryError("Chord: interior sample not strictly inside the domain");

    Chord c;
    c.impl_ = impl;
    return c;
}

Chord Chord::straight_between(const DiskSurface& surface, double s0, double s1, int n) {
    Vec2 p = surface.boundary_point_at(s0);
    Vec2 q = surface.boundary_point_at(s1);
    std::vector<Vec2> pts(33);
    for (int i = 0; i < 33; ++i) pts[i] = p + (q - p) * (i / 32.0);
    return from_points(surface, pts, n);
}

const DiskSurface& Chord::surface() const { return impl_->surface; }
const std::vector<Vec2>& Chord::samples() const { return impl_->samples; }
const std::vector<double>& Chord::arclengths() const { return impl_->arcl; }
double Chord::length() const { return impl_->length; }
int Chord::size() const { return static_cast<int>(impl_->samples.size()); }

Vec2 Chord::position(double s) const { return {impl_->sx.eval(s), impl_->sy.eval(s)}; }
Vec2 Chord::velocity(double s) const { return impl_->vel(s); }

Vec2 Chord::tangent(double s) const {
    Vec2 v = impl_->vel(s);
    double n = impl_->surface.norm_at(position(s), v);
    if (!(n > 0)) throw GeometryError("Chord: degenerate tangent");
    return v / n;
}

Vec2 Chord::normal(double s) const {
    // gamma'/|gamma'| = J nu  =>  nu = -J(tangent)
    Vec2 t = tangent(s);
    return -impl_->surface.rotate_ccw(position(s), t);
}

double Chord::curvature(double s) const {
    const auto& surf = impl_->surface;
    Vec2 p = position(s);
    Vec2 v = impl_->vel(s);
    Vec2 a = impl_->acc(s) + surf.christoffel_at(p).apply(v, v);
    double v2 = surf.inner_at(p, v, v);
    return surf.inner_at(p, a, normal(s)) / v2;
}

double Chord::max_abs_curvature() const {
    double m = 0.0;
    const auto& arcl = impl_->arcl;
    for (std::size_t i = 0; i < arcl.size(); ++i)
        m = std::max(m, std::abs(curvature(arcl[i])));
    return m;
}

std::pair<double, double> Chord::orthogonality_defect() const {
    const auto& surf = impl_->surface;
    auto defect_at = [&](double s) {
        Vec2 p = position(s);
        double bs = surf.boundary_arclength_of_point(p);
        Vec2 bt = surf.boundary_tangent_at(bs);
        Vec2 t = tangent(s);
        double c = surf.inner_at(p, t, bt);
        return std::asin(std::clamp(c, -1.0, 1.0));
    };
    return {defect_at(0.0), defect_at(impl_->length)};
}

std::pair<double, double> Chord::endpoint_boundary_arclengths() const {
    const auto& surf = impl_->surface;
    return {surf.boundary_arclength_of_point(impl_->samples.front()),
            surf.boundary_arclength_of_point(impl_->samples.back())};
}

namespace {
bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    auto orient = [](Vec2 a, Vec2 b, Vec2 c) {
        double v = (b - a).cross(c - a);
        return (v > 0) - (v < 0);
    };
    int o1 = orient(p1, p2, q1), o2 = orient(p1, p2, q2);
    int o3 = orient(q1, q2, p1), o4 = orient(q1, q2, p2);
    return o1 != o2 && o3 != o4;
}
}  // namespace

bool Chord::is_embedded() const {
    const auto& s = impl_->samples;
    const int n = static_cast<int>(s.size());
    for (int i = 0; i + 1 < n; ++i) {
        double ilo = std::min(s[i].x, s[i + 1].x), ihi = std::max(s[i].x, s[i + 1].x);
        double jlo = std::min(s[i].y, s[i + 1].y), jhi = std::max(s[i].y, s[i + 1].y);
        for (int j = i + 2; j + 1 < n; ++j) {
            if (std::max(s[j].x, s[j + 1].x) < ilo || std::min(s[j].x, s[j + 1].x) > ihi ||
                std::max(s[j].y, s[j + 1].y) < jlo || std::min(s[j].y, s[j + 1].y) > jhi)
                continue;
            if (segments_intersect(s[i], s[i + 1], s[j], s[j + 1])) return false;
        }
    }
    return true;
}

double Chord::integrate(const std::function<double(double)>& f) const {
    const auto& arcl = impl_->arcl;
    std::vector<double> vals(arcl.size());
    for (std::size_t i = 0; i < arcl.size(); ++i) vals[i] = f(arcl[i]);
    return CubicSpline(arcl, vals).integral();
}

double completed_arclength(const Chord& c, CompletedPoint x, CompletedPoint y) {
    double L = c.length();
    if (x.sign == y.sign) return std::abs(x.s - y.s);
    return std::min(x.s + y.s, 2 * L - x.s - y.s);
}

double nearer_endpoint_arclength(const Chord& c, double s) {
    return std::min(s, c.length() - s);
}

void write_curve_csv(std::ostream& os, const Chord& c) {
    os << "s,u1,u2\n";
    const auto& arcl = c.arclengths();
    const auto& pts = c.samples();
    for (std::size_t i = 0; i < pts.size(); ++i)
        os << format_double(arcl[i]) << ',' << format_double(pts[i].x) << ','
           << format_double(pts[i].y) << '\n';
}

std::string curve_to_csv(const Chord& c) {
    std::ostringstream os;
    write_curve_csv(os, c);
    return os.str();
}

Chord curve_from_csv(const DiskSurface& surface, std::istream& is, int n) {
    std::string line;
    std::vector<Vec2> pts;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("s,", 0) == 0) continue;
        }
        std::istringstream ls(line);
        std::string tok;
        double vals[3];
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(ls, tok, ',')) throw ConfigError("curve csv: bad row");
            vals[k] = std::stod(tok);
        }
        pts.push_back({vals[1], vals[2]});
    }
    int count = n > 0 ? n : static_cast<int>(pts.size());
    return Chord::from_points(surface, pts, count);
}

}  // namespace fbcsf
