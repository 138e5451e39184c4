#include "fbcsf/surface.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>

#include "fbcsf/errors.hpp"
#include "fbcsf/numerics.hpp"

namespace fbcsf {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSupInflation = 1.05;
constexpr int kBoundaryTableN = 4096;
constexpr int kSupGridN = 256;
constexpr int kBoundarySupN = 4096;
constexpr double kMinMetricEigenvalue = 1e-12;

double det3(const double m[3][3]) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

}  // namespace

struct DiskSurface::Impl {
    MetricKind kind = MetricKind::Flat;
    double a = 1.0, b = 1.0;
    ScalarField phi;      // Conformal
    TensorField tensor;   // General
    std::optional<std::string> convexity_warning;

    // boundary arclength table over the ellipse angle
    std::vector<double> cum_s;  // size kBoundaryTableN + 1
    double total_boundary_length = 0.0;

    mutable std::once_flag sup_once;
    mutable double k0 = 0.0, c_sup = 0.0;
    mutable double sqrt_det_sup = 1.0, min_eig_inf = 1.0;

    Vec2 bpoint(double t) const { return {a * std::cos(t), b * std::sin(t)}; }
    Vec2 bvel(double t) const { return {-a * std::sin(t), b * std::cos(t)}; }
    Vec2 bacc(double t) const { return {-a * std::cos(t), -b * std::sin(t)}; }

    Mat2 metric(Vec2 p) const {
        switch (kind) {
            case MetricKind::Flat:
                return Mat2::identity();
            case MetricKind::Conformal: {
                double e = std::exp(2.0 * phi.value(p));
                return Mat2::diag(e, e);
            }
            case MetricKind::General:
                return tensor.value(p);
        }
        return Mat2::identity();
    }

    Mat2 metric_d1(Vec2 p, int k) const {
        switch (kind) {
            case MetricKind::Flat:
                return {0, 0, 0, 0};
            case MetricKind::Conformal: {
                double e = std::exp(2.0 * phi.value(p));
                Vec2 g = phi.gradient(p);
                double c = 2.0 * (k == 0 ? g.x : g.y) * e;
                return Mat2::diag(c, c);
            }
            case MetricKind::General:
                return tensor.d1(p, k);
        }
        return {0, 0, 0, 0};
    }

    double speed(double t) const {
        Vec2 p = bpoint(t);
        return norm_g(metric(p), bvel(t));
    }

    void build_boundary_table() {
        cum_s.assign(kBoundaryTableN + 1, 0.0);
        double acc = 0.0;
        for (int i = 0; i < kBoundaryTableN; ++i) {
            double t0 = 2.0 * kPi * i / kBoundaryTableN;
            double t1 = 2.0 * kPi * (i + 1) / kBoundaryTableN;
            acc += integrate_gl4([this](double t) { return speed(t); }, t0, t1, 1);
            cum_s[i + 1] = acc;
        }
        total_boundary_length = acc;
    }

    double param_of_arclength(double s) const {
        double L = total_boundary_length;
        s = std::fmod(s, L);
        if (s < 0) s += L;
        auto it = std::upper_bound(cum_s.begin(), cum_s.end(), s);
        int i = std::max(0, static_cast<int>(it - cum_s.begin()) - 1);
        i = std::min(i, kBoundaryTableN - 1);
        double t = 2.0 * kPi * i / kBoundaryTableN;
        double target = s - cum_s[i];
        // local Newton on int_{t_i}^{t} speed = target
        for (int k = 0; k < 30; ++k) {
            double ti = 2.0 * kPi * i / kBoundaryTableN;
            double f = integrate_gl4([this](double u) { return speed(u); }, ti, t, 1) - target;
            double sp = speed(t);
            double step = f / sp;
            t -= step;
            if (std::abs(step) < 1e-14) break;
        }
        return t;
    }

    void compute_sups() const {
        double kmax = 0.0;
        double sdet_max = 0.0, eig_min = 1e300;
        for (int i = 0; i < kSupGridN; ++i) {
            for (int j = 0; j < kSupGridN; ++j) {
                double x = -a + 2.0 * a * (i + 0.5) / kSupGridN;
                double y = -b + 2.0 * b * (j + 0.5) / kSupGridN;
                Vec2 p{x, y};
                if ((x / a) * (x / a) + (y / b) * (y / b) >= 1.0) continue;
                Mat2 g = metric(p);
                sdet_max = std::max(sdet_max, std::sqrt(g.det()));
                eig_min = std::min(eig_min, g.min_eigenvalue_sym());
                kmax = std::max(kmax, std::abs(curvature(p)));
            }
        }
        k0 = kmax * kSupInflation;
        sqrt_det_sup = sdet_max;
        min_eig_inf = eig_min;
        double cmax = 0.0;
        double L = total_boundary_length;
        for (int i = 0; i < kBoundarySupN; ++i)
            cmax = std::max(cmax, boundary_curv(param_of_arclength(L * i / kBoundarySupN)));
        c_sup = cmax * kSupInflation;
    }

    double curvature(Vec2 p) const {
        switch (kind) {
            case MetricKind::Flat:
                return 0.0;
            case MetricKind::Conformal:
                return -std::exp(-2.0 * phi.value(p)) * phi.laplacian(p);
            case MetricKind::General: {
                Mat2 g = tensor.value(p);
                double E = g.a11, F = g.a12, G = g.a22;
                Mat2 gu = tensor.d1(p, 0), gv = tensor.d1(p, 1);
                double Eu = gu.a11, Ev = gv.a11;
                double Fu = gu.a12, Fv = gv.a12;
                double Gu = gu.a22, Gv = gv.a22;
                double Evv = tensor.d2(p, 1, 1).a11;
                double Fuv = tensor.d2(p, 0, 1).a12;
                double Guu = tensor.d2(p, 0, 0).a22;
                double m1[3][3] = {{-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev},
                                   {Fv - 0.5 * Gu, E, F},
                                   {0.5 * Gv, F, G}};
                double m2[3][3] = {{0.0, 0.5 * Ev, 0.5 * Gu},
                                   {0.5 * Ev, E, F},
                                   {0.5 * Gu, F, G}};
                double denom = E * G - F * F;
                return (det3(m1) - det3(m2)) / (denom * denom);
            }
        }
        return 0.0;
    }

    Christoffel christoffel(Vec2 p) const {
        Christoffel ch;
        switch (kind) {
            case MetricKind::Flat:
                ch.gamma[0] = {0, 0, 0, 0};
                ch.gamma[1] = {0, 0, 0, 0};
                return ch;
            case MetricKind::Conformal: {
                Vec2 g = phi.gradient(p);
                ch.gamma[0] = {g.x, g.y, g.y, -g.x};
                ch.gamma[1] = {-g.y, g.x, g.x, g.y};
                return ch;
            }
            case MetricKind::General: {
                Mat2 g = tensor.value(p);
                Mat2 gi = g.inverse();
                Mat2 d[2] = {tensor.d1(p, 0), tensor.d1(p, 1)};
                auto entry = [&](const Mat2& m, int i, int j) {
                    return i == 0 ? (j == 0 ? m.a11 : m.a12) : (j == 0 ? m.a21 : m.a22);
                };
                for (int k = 0; k < 2; ++k) {
                    double out[2][2];
                    for (int i = 0; i < 2; ++i) {
                        for (int j = 0; j < 2; ++j) {
                            double s = 0.0;
                            for (int l = 0; l < 2; ++l) {
                                double gkl = entry(gi, k, l);
                                s += gkl * (entry(d[i], j, l) + entry(d[j], i, l) -
                                            entry(d[l], i, j));
                            }
                            out[i][j] = 0.5 * s;
                        }
                    }
                    ch.gamma[k] = {out[0][0], out[0][1], out[1][0], out[1][1]};
                }
                return ch;
            }
        }
        return ch;
    }

    double boundary_curv(double t) const {
        Vec2 p = bpoint(t);
        Mat2 g = metric(p);
        Vec2 vel = bvel(t);
        Vec2 acc = bacc(t) + christoffel(p).apply(vel, vel);
        // inward normal: metric rotation of the (counterclockwise) unit tangent
        double sp = norm_g(g, vel);
        Vec2 that = vel / sp;
        Vec2 n = rotate(p, g, that);
        return inner(g, acc, n) / (sp * sp);
    }

    Vec2 rotate(Vec2 /*p*/, const Mat2& g, Vec2 v) const {
        Vec2 j0{-v.y, v.x};
        return std::sqrt(g.det()) * (g.inverse() * j0);
    }
};

DiskSurface::DiskSurface(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

namespace {
std::shared_ptr<DiskSurface::Impl> make_impl(MetricKind kind, double a, double b) {
    if (!(a > 0) || !(b > 0)) throw DomainError("chart semi-axes must be positive");
    auto impl = std::make_shared<DiskSurface::Impl>();
    impl->kind = kind;
    impl->a = a;
    impl->b = b;
    return impl;
}
}  // namespace

DiskSurface DiskSurface::flat_disk(double radius) {
    auto impl = make_impl(MetricKind::Flat, radius, radius);
    impl->build_boundary_table();
    return DiskSurface(impl);
}

DiskSurface DiskSurface::flat_ellipse(double a, double b) {
    auto impl = make_impl(MetricKind::Flat, a, b);
    impl->build_boundary_table();
    return DiskSurface(impl);
}

DiskSurface DiskSurface::conformal(ScalarField phi, double a, double b) {
    auto impl = make_impl(MetricKind::Conformal, a, b);
    impl->phi = std::move(phi);
    impl->build_boundary_table();
    return DiskSurface(impl);
}

DiskSurface DiskSurface::general(TensorField g, double a, double b) {
    auto impl = make_impl(MetricKind::General, a, b);
    impl->tensor = std::move(g);
    impl->build_boundary_table();
    return DiskSurface(impl);
}

MetricKind DiskSurface::kind() const { return impl_->kind; }
double DiskSurface::chart_a() const { return impl_->a; }
double DiskSurface::chart_b() const { return impl_->b; }
const ScalarField& DiskSurface::conformal_factor() const { return impl_->phi; }

double DiskSurface::implicit(Vec2 p) const {
    double xa = p.x / impl_->a, yb = p.y / impl_->b;
    return xa * xa + yb * yb - 1.0;
}

bool DiskSurface::contains(Vec2 p, double tol) const { return implicit(p) <= tol; }

Mat2 DiskSurface::metric_at(Vec2 p) const {
    if (implicit(p) > 1e-9)
        throw DomainError("metric_at: point outside chart domain");
    Mat2 g = impl_->metric(p);
    if (g.a12 != g.a21 || g.min_eigenvalue_sym() <= kMinMetricEigenvalue)
        throw GeometryError("metric_at: tensor not positive definite");
    return g;
}

Mat2 DiskSurface::metric_inverse_at(Vec2 p) const { return metric_at(p).inverse(); }

double DiskSurface::sqrt_det_at(Vec2 p) const { return std::sqrt(impl_->metric(p).det()); }

Christoffel DiskSurface::christoffel_at(Vec2 p) const { return impl_->christoffel(p); }

double DiskSurface::gaussian_curvature(Vec2 p) const {
    if (implicit(p) > 1e-9)
        throw DomainError("gaussian_curvature: point outside chart domain");
    if (impl_->metric(p).min_eigenvalue_sym() <= kMinMetricEigenvalue)
        throw GeometryError("gaussian_curvature: metric not positive definite");
    return impl_->curvature(p);
}

double DiskSurface::inner_at(Vec2 p, Vec2 u, Vec2 v) const {
    return inner(impl_->metric(p), u, v);
}
double DiskSurface::norm_at(Vec2 p, Vec2 v) const { return norm_g(impl_->metric(p), v); }

Vec2 DiskSurface::rotate_ccw(Vec2 p, Vec2 v) const {
    Mat2 g = impl_->metric(p);
    return impl_->rotate(p, g, v);
}

double DiskSurface::boundary_length() const { return impl_->total_boundary_length; }

double DiskSurface::boundary_param_of_arclength(double s) const {
    return impl_->param_of_arclength(s);
}

double DiskSurface::boundary_arclength_of_param(double t) const {
    double L = impl_->total_boundary_length;
    t = std::fmod(t, 2 * kPi);
    if (t < 0) t += 2 * kPi;
    int i = std::min(static_cast<int>(t / (2 * kPi) * kBoundaryTableN), kBoundaryTableN - 1);
    double ti = 2.0 * kPi * i / kBoundaryTableN;
    double s = impl_->cum_s[i] +
               integrate_gl4([this](double u) { return impl_->speed(u); }, ti, t, 1);
    if (s >= L) s -= L;
    return s;
}

Vec2 DiskSurface::boundary_point_at(double s) const {
    return impl_->bpoint(impl_->param_of_arclength(s));
}

Vec2 DiskSurface::boundary_tangent_at(double s) const {
    double t = impl_->param_of_arclength(s);
    Vec2 v = impl_->bvel(t);
    return v / norm_g(impl_->metric(impl_->bpoint(t)), v);
}

Vec2 DiskSurface::boundary_inward_normal_at(double s) const {
    double t = impl_->param_of_arclength(s);
    Vec2 p = impl_->bpoint(t);
    Mat2 g = impl_->metric(p);
    Vec2 v = impl_->bvel(t);
    return impl_->rotate(p, g, v / norm_g(g, v));
}

double DiskSurface::boundary_geodesic_curvature(double s) const {
    if (s < 0 || s >= impl_->total_boundary_length + 1e-12)
        throw DomainError("boundary_geodesic_curvature: arclength out of range");
    return impl_->boundary_curv(impl_->param_of_arclength(s));
}

double DiskSurface::nearest_boundary_arclength(Vec2 p) const {
    const auto& im = *impl_;
    int n = 256;
    double best_t = 0.0, best = 1e300;
    for (int i = 0; i < n; ++i) {
        double t = 2 * kPi * i / n;
        double d2 = (im.bpoint(t) - p).norm2();
        if (d2 < best) {
            best = d2;
            best_t = t;
        }
    }
    double span = 2 * kPi / n;
    double t = golden_section_min(
        [&](double u) { return (im.bpoint(u) - p).norm2(); }, best_t - span, best_t + span,
        1e-14);
    return boundary_arclength_of_param(t);
}

Vec2 DiskSurface::project_to_boundary(Vec2 p) const {
    return boundary_point_at(nearest_boundary_arclength(p));
}

double DiskSurface::boundary_arclength_of_point(Vec2 p) const {
    return boundary_arclength_of_param(std::atan2(p.y / impl_->b, p.x / impl_->a));
}

double DiskSurface::curvature_sup() const {
    std::call_once(impl_->sup_once, [this] { impl_->compute_sups(); });
    return impl_->k0;
}

double DiskSurface::boundary_curvature_sup() const {
    std::call_once(impl_->sup_once, [this] { impl_->compute_sups(); });
    return impl_->c_sup;
}

double DiskSurface::boundary_curvature_sup_near(Vec2 p, double radius) const {
    double L = impl_->total_boundary_length;
    double cmax = 0.0;
    bool any = false;
    for (int i = 0; i < kBoundarySupN; ++i) {
        double s = L * i / kBoundarySupN;
        Vec2 z = boundary_point_at(s);
        if ((z - p).norm() <= radius) {
            cmax = std::max(cmax, impl_->boundary_curv(impl_->param_of_arclength(s)));
            any = true;
        }
    }
    if (!any) return 0.0;
    return cmax * kSupInflation;
}

IsoperimetricConstants DiskSurface::isoperimetric() const {
    std::call_once(impl_->sup_once, [this] { impl_->compute_sups(); });
    IsoperimetricConstants c;
    c.L0 = impl_->total_boundary_length / 2.0;
    c.Cprime = impl_->sqrt_det_sup / (4.0 * kPi * impl_->min_eig_inf);
    return c;
}

DiskSurface DiskSurface::conformally_deformed(ScalarField dphi) const {
    DiskSurface out = *this;
    switch (impl_->kind) {
        case MetricKind::Flat:
            out = conformal(dphi, impl_->a, impl_->b);
            break;
        case MetricKind::Conformal:
            out = conformal(ScalarField::sum(impl_->phi, dphi), impl_->a, impl_->b);
            break;
        case MetricKind::General: {
            TensorField base = impl_->tensor;
            ScalarField f = dphi;
            TensorField g;
            g.value = [base, f](Vec2 p) {
                return base.value(p) * std::exp(2 * f.value(p));
            };
            g.d1 = [base, f](Vec2 p, int k) {
                double e = std::exp(2 * f.value(p));
                Vec2 gr = f.gradient(p);
                double fk = k == 0 ? gr.x : gr.y;
                return base.d1(p, k) * e + base.value(p) * (2 * fk * e);
            };
            g.d2 = [base, f](Vec2 p, int k, int l) {
                double e = std::exp(2 * f.value(p));
                Vec2 gr = f.gradient(p);
                Mat2 h = f.hessian(p);
                double fk = k == 0 ? gr.x : gr.y;
                double fl = l == 0 ? gr.x : gr.y;
                double fkl = (k == 0) ? (l == 0 ? h.a11 : h.a12) : (l == 0 ? h.a21 : h.a22);
                Mat2 b0 = base.value(p), bk = base.d1(p, k), bl = base.d1(p, l),
                     bkl = base.d2(p, k, l);
                return bkl * e + bk * (2 * fl * e) + bl * (2 * fk * e) +
                       b0 * ((4 * fk * fl + 2 * fkl) * e);
            };
            out = general(g, impl_->a, impl_->b);
            break;
        }
    }
    // strict convexity re-check; record rather than fail
    double L = out.boundary_length();
    double cmin = 1e300;
    for (int i = 0; i < 1024; ++i)
        cmin = std::min(cmin, out.boundary_geodesic_curvature(L * i / 1024));
    if (cmin <= 0.0) {
        auto impl = std::const_pointer_cast<Impl>(out.impl_);
        impl->convexity_warning =
            "conformal deformation lost boundary convexity (min kappa = " +
            std::to_string(cmin) + ")";
    }
    return out;
}

std::optional<std::string> DiskSurface::convexity_warning() const {
    return impl_->convexity_warning;
}

double DiskSurface::gauss_bonnet_residual(int refine_level) const {
    // Full-disk area integral in elliptic polar coordinates, Jacobian a b r.
    double a = impl_->a, b = impl_->b;
    int nr = 24 << refine_level, nt = 48 << refine_level;
    double areaK = 0.0;
    for (const auto& rn : gl4_nodes(0.0, 1.0, nr)) {
        for (const auto& tn : gl4_nodes(0.0, 2 * kPi, nt)) {
            Vec2 p{a * rn.x * std::cos(tn.x), b * rn.x * std::sin(tn.x)};
            areaK += rn.w * tn.w * impl_->curvature(p) *
                     std::sqrt(impl_->metric(p).det()) * a * b * rn.x;
        }
    }
    double L = impl_->total_boundary_length;
    int panels = 256 << refine_level;
    double turn = integrate_gl4(
        [this](double s) { return impl_->boundary_curv(impl_->param_of_arclength(s)); }, 0.0,
        L, panels);
    return std::abs(areaK + turn - 2 * kPi);
}

std::string DiskSurface::describe() const {
    switch (impl_->kind) {
        case MetricKind::Flat:
            return impl_->a == impl_->b ? "flat-disk(r=" + std::to_string(impl_->a) + ")"
                                        : "flat-ellipse(" + std::to_string(impl_->a) + "," +
                                              std::to_string(impl_->b) + ")";
        case MetricKind::Conformal:
            return "conformal[" + impl_->phi.describe() + "]";
        case MetricKind::General:
            return "general";
    }
    return "?";
}

namespace {

bool point_in_triangle(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
    double d1 = (p - a).cross(b - a);
    double d2 = (p - b).cross(c - b);
    double d3 = (p - c).cross(a - c);
    bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

// Ear clipping for simple polygons.
std::vector<std::array<Vec2, 3>> triangulate(std::vector<Vec2> poly) {
    double area2 = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % poly.size()];
        area2 += p.cross(q);
    }
    if (area2 < 0) std::reverse(poly.begin(), poly.end());

    std::vector<std::array<Vec2, 3>> tris;
    std::vector<int> idx(poly.size());
    for (std::size_t i = 0; i < poly.size(); ++i) idx[i] = static_cast<int>(i);
    int guard = 0;
    while (idx.size() > 3 && guard++ < 100000) {
        bool clipped = false;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            int ia = idx[(i + idx.size() - 1) % idx.size()];
            int ib = idx[i];
            int ic = idx[(i + 1) % idx.size()];
            Vec2 a = poly[ia], b = poly[ib], c = poly[ic];
            if ((b - a).cross(c - b) <= 0) continue;  // reflex
            bool contains_other = false;
            for (int j : idx) {
                if (j == ia || j == ib || j == ic) continue;
                if (point_in_triangle(poly[j], a, b, c)) {
                    contains_other = true;
                    break;
                }
            }
            if (contains_other) continue;
            tris.push_back({a, b, c});
            idx.erase(idx.begin() + i);
            clipped = true;
            break;
        }
        if (!clipped) break;  // numerically degenerate remainder
    }
    if (idx.size() == 3) tris.push_back({poly[idx[0]], poly[idx[1]], poly[idx[2]]});
    return tris;
}

void refine_and_sum(const DiskSurface& surface, const std::function<double(Vec2)>& f,
                    Vec2 a, Vec2 b, Vec2 c, double max_edge, int depth, double& acc) {
    double longest = std::max({(a - b).norm(), (b - c).norm(), (c - a).norm()});
    if (longest <= max_edge || depth >= 12) {
        double pa[2] = {a.x, a.y}, pb[2] = {b.x, b.y}, pc[2] = {c.x, c.y};
        for (const auto& q : triangle_quadrature(pa, pb, pc)) {
            Vec2 p{q.x, q.y};
            acc += q.w * f(p) * surface.sqrt_det_at(p);
        }
        return;
    }
    Vec2 ab = (a + b) * 0.5, bc = (b + c) * 0.5, ca = (c + a) * 0.5;
    refine_and_sum(surface, f, a, ab, ca, max_edge, depth + 1, acc);
    refine_and_sum(surface, f, ab, b, bc, max_edge, depth + 1, acc);
    refine_and_sum(surface, f, ca, bc, c, max_edge, depth + 1, acc);
    refine_and_sum(surface, f, ab, bc, ca, max_edge, depth + 1, acc);
}

}  // namespace

double integrate_over_polygon(const DiskSurface& surface, const std::vector<Vec2>& polygon,
                              const std::function<double(Vec2)>& f, int refine_level) {
    double lo_x = 1e300, hi_x = -1e300, lo_y = 1e300, hi_y = -1e300;
    for (const auto& p : polygon) {
        lo_x = std::min(lo_x, p.x); hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y); hi_y = std::max(hi_y, p.y);
    }
    double diam = std::hypot(hi_x - lo_x, hi_y - lo_y);
    double max_edge = diam / (16 << refine_level);
    double acc = 0.0;
    for (const auto& tri : triangulate(polygon))
        refine_and_sum(surface, f, tri[0], tri[1], tri[2], max_edge, 0, acc);
    return acc;
}

}  // namespace fbcsf
