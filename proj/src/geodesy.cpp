#include "fbcsf/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "fbcsf/errors.hpp"
#include "fbcsf/numerics.hpp"

namespace fbcsf {

namespace {

struct GeoState {
    Vec2 x, v;
};

GeoState geo_rhs(const DiskSurface& surf, const GeoState& s) {
    Vec2 acc = -surf.christoffel_at(s.x).apply(s.v, s.v);
    return {s.v, acc};
}

GeoState rk4_step(const DiskSurface& surf, const GeoState& s, double h) {
    GeoState k1 = geo_rhs(surf, s);
    GeoState s2{s.x + k1.x * (h / 2), s.v + k1.v * (h / 2)};
    GeoState k2 = geo_rhs(surf, s2);
    GeoState s3{s.x + k2.x * (h / 2), s.v + k2.v * (h / 2)};
    GeoState k3 = geo_rhs(surf, s3);
    GeoState s4{s.x + k3.x * h, s.v + k3.v * h};
    GeoState k4 = geo_rhs(surf, s4);
    return {s.x + (k1.x + k2.x * 2 + k3.x * 2 + k4.x) * (h / 6),
            s.v + (k1.v + k2.v * 2 + k3.v * 2 + k4.v) * (h / 6)};
}

}  // namespace

Vec2 GeodesicPath::position(double s) const {
    if (samples.size() < 2 || length <= 0) return samples.empty() ? Vec2{} : samples.front();
    double u = std::clamp(s / length, 0.0, 1.0) * (samples.size() - 1);
    int i = std::min(static_cast<int>(u), static_cast<int>(samples.size()) - 2);
    double f = u - i;
    return samples[i] * (1 - f) + samples[i + 1] * f;
}

Vec2 GeodesicPath::velocity(double s) const {
    if (velocities.size() < 2 || length <= 0)
        return velocities.empty() ? Vec2{} : velocities.front();
    double u = std::clamp(s / length, 0.0, 1.0) * (velocities.size() - 1);
    int i = std::min(static_cast<int>(u), static_cast<int>(velocities.size()) - 2);
    double f = u - i;
    return velocities[i] * (1 - f) + velocities[i + 1] * f;
}

GeodesicPath geodesic_shoot(const DiskSurface& surface, Vec2 p, Vec2 v, double len,
                            const ShootOptions& opts) {
    double vn = surface.norm_at(p, v);
    if (!(vn > 0)) throw GeometryError("geodesic_shoot: zero velocity");
    GeoState s{p, v / vn};
    int nsteps = std::max(8, static_cast<int>(std::ceil(len / opts.step)));
    double h = len / nsteps;
    if (!(h > 1e-300)) {
        GeodesicPath trivialp;
        trivialp.samples = {p, p};
        trivialp.velocities = {s.v, s.v};
        trivialp.length = 0.0;
        return trivialp;
    }

    GeodesicPath path;
    path.samples.push_back(s.x);
    path.velocities.push_back(s.v);
    double travelled = 0.0;
    for (int i = 0; i < nsteps; ++i) {
        GeoState next = rk4_step(surface, s, h);
        if (opts.clip_at_boundary && surface.implicit(next.x) > opts.domain_tol) {
            // bisect the substep to land on the boundary
            double lo = 0.0, hi = h;
            for (int k = 0; k < 60; ++k) {
                double mid = 0.5 * (lo + hi);
                if (surface.implicit(rk4_step(surface, s, mid).x) > 0)
                    hi = mid;
                else
                    lo = mid;
            }
            GeoState hit = rk4_step(surface, s, 0.5 * (lo + hi));
            travelled += 0.5 * (lo + hi);
            path.samples.push_back(hit.x);
            path.velocities.push_back(hit.v);
            path.length = travelled;
            path.boundary_hit = true;
            return path;
        }
        s = next;
        travelled += h;
        path.samples.push_back(s.x);
        path.velocities.push_back(s.v);
        if (std::abs(h) < 1e-16 * std::max(1.0, len))
            throw NumericError("geodesic_shoot: step underflow");
    }
    path.length = travelled;
    return path;
}

TwoPointResult connect_geodesic(const DiskSurface& surface, Vec2 p, Vec2 q,
                                const ConnectOptions& opts) {
    TwoPointResult out;
    Vec2 d = q - p;
    double chord = d.norm();
    if (chord < 1e-15) {
        out.path.samples = {p, q};
        Vec2 v{1, 0};
        out.path.velocities = {v, v};
        out.path.length = 0.0;
        out.converged = true;
        return out;
    }
    double angle = opts.init_angle.value_or(std::atan2(d.y, d.x));
    double len = opts.init_length.value_or(
        [&] {
            // metric length of the straight segment as initial guess
            double acc = 0.0;
            for (const auto& n : gl4_nodes(0.0, 1.0, 4))
                acc += n.w * surface.norm_at(p + d * n.x, d);
            return acc;
        }());

    ShootOptions shoot_opts;
    shoot_opts.step = opts.step;
    shoot_opts.clip_at_boundary = false;  // metric fields extend off-chart

    auto shoot_end = [&](double a, double l) {
        Vec2 v{std::cos(a), std::sin(a)};
        v = v / surface.norm_at(p, v);
        return geodesic_shoot(surface, p, v, l, shoot_opts);
    };

    double scale = std::max(chord, 1e-8);
    GeodesicPath path = shoot_end(angle, len);
    for (int it = 0; it < opts.max_iter; ++it) {
        Vec2 r = path.endpoint() - q;
        out.residual = r.norm();
        if (out.residual < opts.tol * std::max(1.0, scale)) {
            out.converged = true;
            break;
        }
        double ha = 1e-7, hl = 1e-7 * std::max(1.0, len);
        Vec2 ra = (shoot_end(angle + ha, len).endpoint() - path.endpoint()) / ha;
        Vec2 rl = (shoot_end(angle, len + hl).endpoint() - path.endpoint()) / hl;
        double det = ra.x * rl.y - ra.y * rl.x;
        if (std::abs(det) < 1e-30) break;
        double da = (-r.x * rl.y + r.y * rl.x) / det;
        double dl = (-ra.x * r.y + ra.y * r.x) / det;
        // damped update
        double damp = 1.0;
        for (int half = 0; half < 8; ++half) {
            GeodesicPath cand = shoot_end(angle + damp * da, len + damp * dl);
            if ((cand.endpoint() - q).norm() < out.residual) {
                angle += damp * da;
                len += damp * dl;
                path = std::move(cand);
                break;
            }
            damp *= 0.5;
            if (half == 7) {
                angle += 0.125 * da;
                len += 0.125 * dl;
                path = shoot_end(angle, len);
            }
        }
    }
    out.path = std::move(path);
    out.path.length = len;
    return out;
}

// --- eikonal fast marching -------------------------------------------------

DistanceField::DistanceField(const DiskSurface& surface, Vec2 seed, int grid_n)
    : n_(grid_n), ax_(surface.chart_a()), bx_(surface.chart_b()), surface_(surface) {
    const int n = n_;
    const double hx = 2 * ax_ / (n - 1), hy = 2 * bx_ / (n - 1);
    const double INF = 1e100;
    t_.assign(static_cast<std::size_t>(n) * n, INF);
    std::vector<char> state(static_cast<std::size_t>(n) * n, 0);  // 0 far 1 trial 2 done
    std::vector<double> slow(static_cast<std::size_t>(n) * n, 0.0);

    auto pt = [&](int i, int j) {
        return Vec2{-ax_ + hx * i, -bx_ + hy * j};
    };
    auto idx = [&](int i, int j) { return static_cast<std::size_t>(j) * n + i; };
    auto inside = [&](int i, int j) {
        return surface.implicit(pt(i, j)) <= 1e-12;
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (inside(i, j)) slow[idx(i, j)] = surface.norm_at(pt(i, j), {1, 0});

    using QE = std::pair<double, std::size_t>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> heap;

    // seed a small patch with locally flat distances
    double sphi = surface.norm_at(seed, {1, 0});
    int si = static_cast<int>(std::round((seed.x + ax_) / hx));
    int sj = static_cast<int>(std::round((seed.y + bx_) / hy));
    for (int dj = -3; dj <= 3; ++dj) {
        for (int di = -3; di <= 3; ++di) {
            int i = si + di, j = sj + dj;
            if (i < 0 || j < 0 || i >= n || j >= n || !inside(i, j)) continue;
            double w = 0.5 * (sphi + slow[idx(i, j)]);
            t_[idx(i, j)] = w * (pt(i, j) - seed).norm();
            state[idx(i, j)] = 1;
            heap.push({t_[idx(i, j)], idx(i, j)});
        }
    }

    auto update = [&](int i, int j) {
        if (i < 0 || j < 0 || i >= n || j >= n) return;
        std::size_t id = idx(i, j);
        if (state[id] == 2 || !inside(i, j)) return;
        double tx = INF, ty = INF;
        if (i > 0 && state[idx(i - 1, j)] == 2) tx = std::min(tx, t_[idx(i - 1, j)]);
        if (i + 1 < n && state[idx(i + 1, j)] == 2) tx = std::min(tx, t_[idx(i + 1, j)]);
        if (j > 0 && state[idx(i, j - 1)] == 2) ty = std::min(ty, t_[idx(i, j - 1)]);
        if (j + 1 < n && state[idx(i, j + 1)] == 2) ty = std::min(ty, t_[idx(i, j + 1)]);
        double f = slow[id];
        double cand = INF;
        if (tx < INF && ty < INF) {
            // anisotropic grid spacing: solve ((T-tx)/hx)^2 + ((T-ty)/hy)^2 = f^2
            double a = 1.0 / (hx * hx) + 1.0 / (hy * hy);
            double b = -2.0 * (tx / (hx * hx) + ty / (hy * hy));
            double c = tx * tx / (hx * hx) + ty * ty / (hy * hy) - f * f;
            double disc = b * b - 4 * a * c;
            if (disc >= 0) {
                double T = (-b + std::sqrt(disc)) / (2 * a);
                if (T >= std::max(tx, ty)) cand = T;
            }
        }
        if (cand == INF) cand = std::min(tx + hx * f, ty + hy * f);
        if (cand < t_[id]) {
            t_[id] = cand;
            state[id] = 1;
            heap.push({cand, id});
        }
    };

    while (!heap.empty()) {
        auto [tv, id] = heap.top();
        heap.pop();
        if (state[id] == 2 || tv > t_[id]) continue;
        state[id] = 2;
        int i = static_cast<int>(id % n), j = static_cast<int>(id / n);
        update(i - 1, j);
        update(i + 1, j);
        update(i, j - 1);
        update(i, j + 1);
    }
}

double DistanceField::query(Vec2 p) const {
    const int n = n_;
    const double hx = 2 * ax_ / (n - 1), hy = 2 * bx_ / (n - 1);
    double fx = (p.x + ax_) / hx, fy = (p.y + bx_) / hy;
    int i = std::clamp(static_cast<int>(fx), 0, n - 2);
    int j = std::clamp(static_cast<int>(fy), 0, n - 2);
    double u = fx - i, v = fy - j;
    double vals[4] = {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
    double wts[4] = {(1 - u) * (1 - v), u * (1 - v), (1 - u) * v, u * v};
    // ignore nodes outside the mask (huge sentinel)
    double acc = 0.0, wacc = 0.0;
    for (int k = 0; k < 4; ++k) {
        if (vals[k] < 1e90 && wts[k] > 0) {
            acc += wts[k] * vals[k];
            wacc += wts[k];
        }
    }
    if (wacc <= 0) throw NumericError("DistanceField::query: no valid nodes near point");
    return acc / wacc;
}

std::vector<double> DistanceField::boundary_values(int n) const {
    std::vector<double> out(n);
    double L = surface_.boundary_length();
    double h = 2 * ax_ / (n_ - 1);
    for (int k = 0; k < n; ++k) {
        double s = L * k / n;
        Vec2 z = surface_.boundary_point_at(s);
        Vec2 nin = surface_.boundary_inward_normal_at(s);
        Vec2 probe = z + nin * (1.5 * h / surface_.norm_at(z, nin));
        double corr = distance_correction(z, probe);
        out[k] = query(probe) + corr;
    }
    return out;
}

// metric length of the short straight probe segment
double DistanceField::distance_correction(Vec2 z, Vec2 probe) const {
    Vec2 d = z - probe;
    double acc = 0.0;
    for (const auto& g : gl4_nodes(0.0, 1.0, 1))
        acc += g.w * surface_.norm_at(probe + d * g.x, d);
    return acc;
}

// --- distance dispatch ------------------------------------------------------

namespace {

double straight_length(const DiskSurface& surf, Vec2 p, Vec2 q, int panels = 8) {
    Vec2 d = q - p;
    double acc = 0.0;
    for (const auto& n : gl4_nodes(0.0, 1.0, panels))
        acc += n.w * surf.norm_at(p + d * n.x, d);
    return acc;
}

bool path_stays_inside(const DiskSurface& surf, const GeodesicPath& path, double tol) {
    for (const auto& s : path.samples)
        if (surf.implicit(s) > tol) return false;
    return true;
}

}  // namespace

double distance(const DiskSurface& surface, Vec2 p, Vec2 q, const DistanceOptions& opts) {
    if (surface.implicit(p) > 1e-9 || surface.implicit(q) > 1e-9)
        throw DomainError("distance: point outside chart domain");
    if (surface.kind() == MetricKind::Flat) return (q - p).norm();

    TwoPointResult r = connect_geodesic(surface, p, q);
    if (r.converged && path_stays_inside(surface, r.path, 1e-7)) return r.path.length;

    if (!opts.allow_field_fallback)
        throw NumericError("distance: shooting failed, residual " +
                           std::to_string(r.residual));
    DistanceField field(surface, p, opts.eikonal_grid);
    double est = field.query(q);
    ConnectOptions copts;
    copts.init_length = est;
    TwoPointResult r2 = connect_geodesic(surface, p, q, copts);
    if (r2.converged && path_stays_inside(surface, r2.path, 1e-7)) return r2.path.length;
    return est;
}

ReflectedResult reflected_distance(const DiskSurface& surface, Vec2 p, Vec2 q,
                                   const ReflectOptions& opts) {
    const double L = surface.boundary_length();
    const int m = opts.boundary_samples;

    ReflectedResult out;
    auto sum_at = [&](double s) {
        Vec2 z = surface.boundary_point_at(s);
        return distance(surface, p, z, opts.dist) + distance(surface, q, z, opts.dist);
    };

    // coarse scan; for conformal metrics one eikonal field per endpoint feeds it
    double best = 1e300;
    double best_s = 0.0;
    if (surface.kind() == MetricKind::Flat) {
        for (int k = 0; k < m; ++k) {
            double s = L * k / m;
            Vec2 z = surface.boundary_point_at(s);
            double v = (z - p).norm() + (z - q).norm();
            if (v < best - 1e-15) {
                best = v;
                best_s = s;
            }
        }
    } else {
        DistanceField fp(surface, p, opts.dist.eikonal_grid);
        DistanceField fq(surface, q, opts.dist.eikonal_grid);
        auto bp = fp.boundary_values(m);
        auto bq = fq.boundary_values(m);
        for (int k = 0; k < m; ++k) {
            double v = bp[k] + bq[k];
            if (v < best - 1e-15) {
                best = v;
                best_s = L * k / m;
            }
        }
    }
    double span = L / m;
    double s_star = golden_section_min([&](double s) { return sum_at(s); }, best_s - span,
                                       best_s + span, 1e-12 * L);
    // keep ties deterministic: smallest arclength within tolerance
    if (s_star < 0) s_star += L;
    if (s_star >= L) s_star -= L;
    out.z_arclength = s_star;
    out.z = surface.boundary_point_at(s_star);
    out.value = sum_at(s_star);

    if (opts.with_legs) {
        if (surface.kind() == MetricKind::Flat) {
            auto make_leg = [&](Vec2 from) {
                GeodesicPath leg;
                int ns = 64;
                Vec2 d = out.z - from;
                for (int i = 0; i <= ns; ++i) {
                    leg.samples.push_back(from + d * (static_cast<double>(i) / ns));
                    leg.velocities.push_back(d.norm() > 0 ? d / d.norm() : Vec2{1, 0});
                }
                leg.length = d.norm();
                return leg;
            };
            out.leg_x = make_leg(p);
            out.leg_y = make_leg(q);
        } else {
            out.leg_x = connect_geodesic(surface, p, out.z).path;
            out.leg_y = connect_geodesic(surface, q, out.z).path;
        }
        // reflection-law angle: common cosine of the legs against the boundary tangent
        Vec2 tb = surface.boundary_tangent_at(s_star);
        Vec2 vin = out.leg_x.end_velocity();   // arriving at z from x
        Vec2 vout = out.leg_y.end_velocity();  // arriving at z from y
        double c1 = std::abs(surface.inner_at(out.z, vin, tb));
        double c2 = std::abs(surface.inner_at(out.z, vout, tb));
        out.theta0 = std::acos(std::clamp(0.5 * (c1 + c2), -1.0, 1.0));
    }
    return out;
}

double completed_distance(const DiskSurface& surface, CompletedPoint x, CompletedPoint y,
                          const Chord& gamma, const DistanceOptions& opts) {
    Vec2 px = gamma.position(x.s), py = gamma.position(y.s);
    if (x.sign == y.sign) return distance(surface, px, py, opts);
    ReflectOptions ro;
    ro.with_legs = false;
    ro.dist = opts;
    return reflected_distance(surface, px, py, ro).value;
}

std::vector<Vec2> parallel_transport(const DiskSurface& surface, const GeodesicPath& path,
                                     Vec2 v0) {
    const auto& xs = path.samples;
    if (xs.size() < 2) return {v0};
    std::vector<Vec2> out;
    out.reserve(xs.size());
    out.push_back(v0);
    Vec2 v = v0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        Vec2 dx = xs[i + 1] - xs[i];
        // RK4 on V' = -Gamma(x'(t)) V with t in [0,1] along the segment
        auto rhs = [&](double f, Vec2 vv) {
            Vec2 pos = xs[i] + dx * f;
            return -surface.christoffel_at(pos).apply(dx, vv);
        };
        Vec2 k1 = rhs(0.0, v);
        Vec2 k2 = rhs(0.5, v + k1 * 0.5);
        Vec2 k3 = rhs(0.5, v + k2 * 0.5);
        Vec2 k4 = rhs(1.0, v + k3);
        v = v + (k1 + k2 * 2 + k3 * 2 + k4) * (1.0 / 6.0);
        out.push_back(v);
    }
    return out;
}

double curvature_integral_along(const DiskSurface& surface, const GeodesicPath& path) {
    const auto& xs = path.samples;
    if (xs.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        Vec2 d = xs[i + 1] - xs[i];
        for (const auto& n : gl4_nodes(0.0, 1.0, 1)) {
            Vec2 pos = xs[i] + d * n.x;
            acc += n.w * surface.gaussian_curvature(pos) * surface.norm_at(pos, d);
        }
    }
    return acc;
}

}  // namespace fbcsf
