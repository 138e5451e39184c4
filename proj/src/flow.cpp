#include "fbcsf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

#include "fbcsf/errors.hpp"
#include "fbcsf/numerics.hpp"

namespace fbcsf {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec2 end_tangent_estimate(const std::vector<Vec2>& X, double h, bool start) {
    const std::size_t m = X.size();
    if (start)
        return (X[0] * (-11.0) + X[1] * 18.0 + X[2] * (-9.0) + X[3] * 2.0) / (6 * h);
    return (X[m - 1] * 11.0 + X[m - 2] * (-18.0) + X[m - 3] * 9.0 + X[m - 4] * (-2.0)) /
           (6 * h);
}

double array_end_defect(const DiskSurface& surf, const std::vector<Vec2>& X, double h,
                        bool start, double s_boundary) {
    Vec2 T = end_tangent_estimate(X, h, start);
    Vec2 p = start ? X.front() : X.back();
    double tn = surf.norm_at(p, T);
    Vec2 tb = surf.boundary_tangent_at(s_boundary);
    double c = surf.inner_at(p, T / tn, tb);
    return std::asin(std::clamp(c, -1.0, 1.0));
}

// Newton slide of one endpoint along the boundary so the 4-point one-sided
// tangent defect lands on `target` (compensating the spline-estimator offset).
double slide_endpoint(const DiskSurface& surf, std::vector<Vec2>& X, double h, bool start,
                      double s_init, double target = 0.0) {
    double Lb = surf.boundary_length();
    double s = s_init;
    auto set_end = [&](double sv) {
        if (start)
            X.front() = surf.boundary_point_at(sv);
        else
            X.back() = surf.boundary_point_at(sv);
    };
    for (int it = 0; it < 6; ++it) {
        set_end(s);
        double d = array_end_defect(surf, X, h, start, s) - target;
        if (std::abs(d) < 1e-13) break;
        double hs = 1e-7 * Lb;
        set_end(s + hs);
        double d2 = array_end_defect(surf, X, h, start, s + hs) - target;
        double deriv = (d2 - d) / hs;
        if (std::abs(deriv) < 1e-14) break;
        double step = -d / deriv;
        double cap = 0.05 * Lb;
        step = std::clamp(step, -cap, cap);
        s += step;
        if (s < 0) s += Lb;
        if (s >= Lb) s -= Lb;
    }
    set_end(s);
    return s;
}

// Endpoint slides against the spline defect of the built chord; small capped
// Newton steps so the resample never sees a large kink.
Chord slide_polish(const DiskSurface& surface, Chord cur, double tol, int max_iter) {
    double Lb = surface.boundary_length();
    auto [s0, s1] = cur.endpoint_boundary_arclengths();
    double cap = 0.75 * cur.length() / (cur.size() - 1.0);
    for (int it = 0; it < max_iter; ++it) {
        auto [e0, e1] = cur.orthogonality_defect();
        if (std::abs(e0) < tol && std::abs(e1) < tol) break;
        auto rebuilt = [&](double sa, double sbv) {
            std::vector<Vec2> pts = cur.samples();
            pts.front() = surface.boundary_point_at(sa);
            pts.back() = surface.boundary_point_at(sbv);
            return Chord::from_points(surface, pts, cur.size());
        };
        double hs = 1e-7 * Lb;
        const double damp = 0.8;
        if (std::abs(e0) >= tol) {
            double g = (rebuilt(s0 + hs, s1).orthogonality_defect().first - e0) / hs;
            if (std::abs(g) > 1e-14) s0 -= std::clamp(damp * e0 / g, -cap, cap);
        }
        if (std::abs(e1) >= tol) {
            double g = (rebuilt(s0, s1 + hs).orthogonality_defect().second - e1) / hs;
            if (std::abs(g) > 1e-14) s1 -= std::clamp(damp * e1 / g, -cap, cap);
        }
        cur = rebuilt(s0, s1);
    }
    return cur;
}

int target_sample_count(double length, double initial_length, const FlowOptions& opts) {
    if (!opts.adaptive_n) return opts.n_target;
    double h_target = initial_length / (opts.n_target - 1);
    int n = static_cast<int>(std::lround(length / h_target)) + 1;
    return std::clamp(n, opts.n_min, opts.n_target);
}

struct StepAttempt {
    Chord chord;
    double s0 = 0, s1 = 0;
    bool ok = false;
    std::string why;
};

StepAttempt try_step(const DiskSurface& surf, const FlowState& st, double dt,
                     const FlowOptions& opts, const std::vector<Vec2>& gamma_now,
                     const std::vector<Vec2>& gamma_extrap, double slide_target0,
                     double slide_target1) {
    StepAttempt out;
    const auto& X = st.curve.samples();
    const int m = static_cast<int>(X.size());
    const double L = st.curve.length();
    const double h = L / (m - 1);
    auto [sb0, sb1] = st.curve.endpoint_boundary_arclengths();

    Vec2 E0 = X.front(), E1 = X.back();
    std::vector<Vec2> cand(X.begin(), X.end());
    const int k = m - 2;
    const double lam = dt / (2 * h * h);

    for (int sweep = 0; sweep < opts.coupling_sweeps; ++sweep) {
        std::vector<double> sub(k - 1, -lam), diag(k, 1 + 2 * lam), sup(k - 1, -lam);
        for (int comp = 0; comp < 2; ++comp) {
            std::vector<double> rhs(k);
            for (int i = 1; i <= k; ++i) {
                double xi = comp == 0 ? X[i].x : X[i].y;
                double xm = comp == 0 ? X[i - 1].x : X[i - 1].y;
                double xp = comp == 0 ? X[i + 1].x : X[i + 1].y;
                double g = comp == 0 ? gamma_extrap[i].x : gamma_extrap[i].y;
                rhs[i - 1] = xi + lam * (xp - 2 * xi + xm) + dt * g;
            }
            rhs[0] += lam * (comp == 0 ? E0.x : E0.y);
            rhs[k - 1] += lam * (comp == 0 ? E1.x : E1.y);
            auto sol = solve_tridiagonal(sub, diag, sup, rhs);
            for (int i = 1; i <= k; ++i)
                (comp == 0 ? cand[i].x : cand[i].y) = sol[i - 1];
        }
        cand.front() = E0;
        cand.back() = E1;
        sb0 = slide_endpoint(surf, cand, h, true, sb0, slide_target0);
        sb1 = slide_endpoint(surf, cand, h, false, sb1, slide_target1);
        E0 = cand.front();
        E1 = cand.back();
    }

    for (int i = 1; i + 1 < m; ++i) {
        if (surf.implicit(cand[i]) >= -1e-14) {
            out.why = "interior sample reached the boundary";
            return out;
        }
    }

    double Lnew = 0.0;
    for (int i = 0; i + 1 < m; ++i) Lnew += (cand[i + 1] - cand[i]).norm();
    int n_new = target_sample_count(Lnew, st.initial_length, opts);
    if (std::abs(n_new - m) < 8) n_new = m;

    try {
        out.chord = Chord::from_points(surf, cand, n_new);
        auto [p0, p1] = out.chord.orthogonality_defect();
        if (getenv("FBCSF_DBG")) fprintf(stderr, "post-slide defect %.3e %.3e (targets %.3e %.3e)\n", p0, p1, slide_target0, slide_target1);
        if (std::max(std::abs(p0), std::abs(p1)) > 0.8 * opts.orth_tol)
            out.chord = slide_polish(surf, out.chord, 0.4 * opts.orth_tol, 14);
    } catch (const std::exception& e) {
        out.why = e.what();
        return out;
    }
    out.s0 = sb0;
    out.s1 = sb1;
    out.ok = true;
    return out;
}

}  // namespace

double distance_to_boundary(const DiskSurface& surface, Vec2 p) {
    if (surface.kind() == MetricKind::Flat && surface.chart_a() == surface.chart_b())
        return surface.chart_a() - p.norm();
    double sb = surface.nearest_boundary_arclength(p);
    if (surface.kind() == MetricKind::Flat)
        return (p - surface.boundary_point_at(sb)).norm();
    // straight-probe minimum over boundary points (conformal charts)
    auto probe = [&](double s) {
        Vec2 z = surface.boundary_point_at(s);
        Vec2 d = z - p;
        double acc = 0.0;
        for (const auto& n : gl4_nodes(0.0, 1.0, 2)) acc += n.w * surface.norm_at(p + d * n.x, d);
        return acc;
    };
    double L = surface.boundary_length();
    double best = 1e300, best_s = sb;
    for (int i = 0; i < 64; ++i) {
        double s = L * i / 64.0;
        double v = probe(s);
        if (v < best) {
            best = v;
            best_s = s;
        }
    }
    double s_star = golden_section_min(probe, best_s - L / 64, best_s + L / 64, 1e-10 * L);
    return probe(s_star);
}

Chord enforce_orthogonality(const DiskSurface& surface, const Chord& chord, double tol,
                            double window) {
    double L = chord.length();
    double w = window > 0 ? window : std::min(0.05 * L, 0.1);
    int n = chord.size();
    Chord cur = chord;

    // Rotate the near-end portion of the curve about its endpoint until the
    // spline tangent meets the boundary orthogonally. Angles are conformally
    // invariant, so a chart rotation fixes the metric angle as well.
    auto rotate_pass = [&](Chord c, double target, int attempts) {
        for (int attempt = 0; attempt < attempts; ++attempt) {
            auto [d0, d1] = c.orthogonality_defect();
            if (std::max(std::abs(d0), std::abs(d1)) < target) return c;
            std::vector<Vec2> pts(n);
            double Lc = c.length();
            for (int i = 0; i < n; ++i) pts[i] = c.position(Lc * i / (n - 1.0));

            auto apply_rotation = [&](bool start, double alpha) {
                Vec2 E = start ? pts.front() : pts.back();
                for (int i = 0; i < n; ++i) {
                    double sigma = start ? Lc * i / (n - 1.0) : Lc - Lc * i / (n - 1.0);
                    if (sigma >= w) continue;
                    double a = alpha * smoothstep_down(sigma / w);
                    double ca = std::cos(a), sa = std::sin(a);
                    Vec2 d = pts[i] - E;
                    pts[i] = E + Vec2{ca * d.x - sa * d.y, sa * d.x + ca * d.y};
                }
            };
            // secant in the rotation angle per endpoint
            auto defect_of = [&](const std::vector<Vec2>& ps, bool start) {
                Chord t = Chord::from_points(surface, ps, n, true);
                auto dd = t.orthogonality_defect();
                return start ? dd.first : dd.second;
            };
            for (int side = 0; side < 2; ++side) {
                bool start = side == 0;
                double dv = start ? d0 : d1;
                if (std::abs(dv) < target) continue;
                const double eps = 0.01;
                auto saved = pts;
                apply_rotation(start, eps);
                double d_eps;
                try {
                    d_eps = defect_of(pts, start);
                } catch (const std::exception&) {
                    pts = saved;
                    continue;
                }
                pts = saved;
                double slope = (d_eps - dv) / eps;
                if (std::abs(slope) < 1e-9) continue;
                double alpha = std::clamp(-dv / slope, -1.2, 1.2);
                apply_rotation(start, alpha);
            }
            try {
                c = Chord::from_points(surface, pts, n, true);
            } catch (const std::exception&) {
                return c;  // keep the last valid curve
            }
        }
        return c;
    };
    cur = rotate_pass(cur, 0.02, 3);
    cur = slide_polish(surface, cur, std::max(tol, 1e-4), 12);
    cur = rotate_pass(cur, std::max(tol, 1e-9), 8);
    auto [f0, f1] = cur.orthogonality_defect();
    if (std::max(std::abs(f0), std::abs(f1)) >= tol)
        cur = slide_polish(surface, cur, tol, 20);
    return cur;
}

FlowState flow_init(const DiskSurface& surface, const Chord& gamma0,
                    const FlowOptions& opts) {
    if (!gamma0.is_embedded()) throw GeometryError("flow_init: curve not embedded");
    FlowState st;
    Chord start = gamma0;
    if (start.size() != opts.n_target)
        start = Chord::from_points(surface, start.samples(), opts.n_target);
    auto [d0, d1] = start.orthogonality_defect();
    if (std::max(std::abs(d0), std::abs(d1)) > opts.weak_start_tol)
        start = enforce_orthogonality(surface, start, opts.weak_start_tol * 0.1);
    st.curve = start;
    st.initial_length = start.length();
    double h = st.initial_length / (start.size() - 1);
    double dt_max = opts.dt_safety * h * h;
    st.dt = opts.dt_init > 0 ? opts.dt_init : dt_max;
    return st;
}

FlowStats flow_step(const DiskSurface& surface, FlowState& state, const FlowOptions& opts) {
    const Chord& cur = state.curve;
    const auto& X = cur.samples();
    const int m = static_cast<int>(X.size());
    const double L = cur.length();
    const double h = L / (m - 1);
    const double dt_max = opts.dt_safety * h * h;
    if (!opts.fixed_dt) state.dt = std::min(state.dt, dt_max);

    // current curvature data (also reported)
    std::vector<double> kabs(m);
    double max_kappa = 0.0;
    for (int i = 0; i < m; ++i) {
        kabs[i] = cur.curvature(cur.arclengths()[i]);
        max_kappa = std::max(max_kappa, std::abs(kabs[i]));
    }
    double kappa_sq = cur.integrate([&](double s) {
        double kv = cur.curvature(s);
        return kv * kv;
    });

    // Gamma(T, T) on the current mesh, with variable-step extrapolation
    std::vector<Vec2> gnow(m, Vec2{});
    for (int i = 1; i + 1 < m; ++i) {
        Vec2 T = (X[i + 1] - X[i - 1]) / (2 * h);
        gnow[i] = surface.christoffel_at(X[i]).apply(T, T);
    }
    std::vector<Vec2> gext = gnow;
    if (state.prev_gamma_term.size() == gnow.size() && state.prev_dt > 0) {
        double r = state.dt / state.prev_dt;
        for (int i = 0; i < m; ++i)
            gext[i] = gnow[i] * (1 + r / 2) - state.prev_gamma_term[i] * (r / 2);
    }

    // The cheap 4-point endpoint estimator carries an O(h^3) offset against the
    // spline defect; sliding to the compensated target keeps the built chord
    // orthogonal without per-step polish.
    double slide_target0 = 0.0, slide_target1 = 0.0;
    {
        auto [sp0, sp1] = cur.orthogonality_defect();
        auto [b0, b1] = cur.endpoint_boundary_arclengths();
        std::vector<Vec2> tmp(X.begin(), X.end());
        double f0 = array_end_defect(surface, tmp, h, true, b0);
        double f1 = array_end_defect(surface, tmp, h, false, b1);
        slide_target0 = f0 - sp0;
        slide_target1 = f1 - sp1;
    }

    const double dt_floor = 1e-13 * opts.dt_safety *
                            (state.initial_length / (opts.n_target - 1)) *
                            (state.initial_length / (opts.n_target - 1));
    while (true) {
        double dt = state.dt;
        if (max_kappa * dt > opts.curvature_step_cap) {
            state.dt = 0.5 * state.dt;
            if (state.dt < dt_floor) {
                state.singular = true;
                break;
            }
            continue;
        }
        StepAttempt att = try_step(surface, state, dt, opts, gnow, gext, slide_target0, slide_target1);
        bool ok = att.ok;
        if (!ok) state.last_reject = att.why;
        double def0 = 0, def1 = 0, Lnew = 0, maxk_new = 0;
        if (ok) {
            Lnew = att.chord.length();
            auto [a0, a1] = att.chord.orthogonality_defect();
            def0 = a0;
            def1 = a1;
            maxk_new = att.chord.max_abs_curvature();
            if (Lnew > L + 1e-10 * dt) { ok = false; state.last_reject = "length increased"; }
            if (std::max(std::abs(a0), std::abs(a1)) > opts.orth_tol) {
                ok = false;
                state.last_reject = "orthogonality defect " +
                                    std::to_string(std::max(std::abs(a0), std::abs(a1)));
            }
            if (maxk_new * dt > opts.curvature_step_cap) { ok = false; state.last_reject = "curvature step cap"; }
            if (ok && !att.chord.is_embedded()) { ok = false; state.last_reject = "embeddedness"; }
        }
        if (!ok) {
            state.dt = 0.5 * state.dt;
            if (state.dt < dt_floor || opts.fixed_dt) {
                state.singular = true;
                break;
            }
            continue;
        }

        FlowStats stats;
        stats.t = state.t + dt;
        stats.dt = dt;
        stats.length = Lnew;
        stats.max_kappa = maxk_new;
        stats.defect0 = def0;
        stats.defect1 = def1;
        stats.kappa_sq = kappa_sq;
        stats.dissipation_ratio = kappa_sq > 0 ? ((Lnew - L) / dt) / (-kappa_sq) : 1.0;

        state.t += dt;
        state.curve = att.chord;
        state.prev_gamma_term = std::move(gnow);
        state.prev_dt = dt;
        ++state.consecutive_accepts;
        if (!opts.fixed_dt && state.consecutive_accepts >= 8) {
            double hn = Lnew / (att.chord.size() - 1);
            state.dt = std::min(state.dt * 1.4, opts.dt_safety * hn * hn);
            state.consecutive_accepts = 0;
        }
        return stats;
    }

    FlowStats stats;  // singular exit; report current state
    stats.t = state.t;
    stats.dt = state.dt;
    stats.length = L;
    stats.max_kappa = max_kappa;
    stats.kappa_sq = kappa_sq;
    return stats;
}

FlowRun evolve_classify(const DiskSurface& surface, const Chord& gamma0, double t_max,
                        double eps_geo, const FlowOptions& opts) {
    FlowRun run;
    FlowState st = flow_init(surface, gamma0, opts);
    run.initial_length = st.initial_length;
    const double eps_len = opts.eps_len_rel * st.initial_length;

    double snap_threshold = st.initial_length;
    const double snap_ratio = std::pow(2.0, -1.0 / 8.0);
    std::deque<std::pair<double, Chord>> ring;

    run.snapshots.push_back({0.0, st.curve});
    auto ball_check = [&](const Chord& c) {
        Vec2 mid = c.position(0.5 * c.length());
        Vec2 zc = surface.project_to_boundary(mid);
        for (const auto& p : c.samples())
            if ((p - zc).norm() > 5 * eps_len) return false;
        return true;
    };

    int guard = 0;
    const int guard_max = 4000000;
    while (guard++ < guard_max) {
        FlowStats stats = flow_step(surface, st, opts);
        if (st.singular) {
            if (st.curve.length() < 10 * eps_len && ball_check(st.curve)) {
                run.outcome = FlowOutcome::HalfPoint;
                Vec2 mid = st.curve.position(0.5 * st.curve.length());
                run.half_point = surface.project_to_boundary(mid);
                double Lb = 2 * st.curve.length();
                run.extinction_time = st.t + Lb * Lb / (8 * kPi * kPi);
            } else {
                run.outcome = FlowOutcome::Anomaly;
                run.anomaly = "step-size underflow away from boundary extinction";
            }
            break;
        }
        run.stats.push_back(stats);
        if (st.curve.length() <= snap_threshold * snap_ratio) {
            run.snapshots.push_back({st.t, st.curve});
            snap_threshold = st.curve.length();
        }
        ring.push_back({st.t, st.curve});
        if (ring.size() > 32) ring.pop_front();

        double defect = std::max(std::abs(stats.defect0), std::abs(stats.defect1));
        if (stats.max_kappa < eps_geo && defect < eps_geo) {
            run.outcome = FlowOutcome::Geodesic;
            break;
        }
        if (st.curve.length() < eps_len && ball_check(st.curve)) {
            run.outcome = FlowOutcome::HalfPoint;
            Vec2 mid = st.curve.position(0.5 * st.curve.length());
            run.half_point = surface.project_to_boundary(mid);
            double Lb = 2 * st.curve.length();
            run.extinction_time = st.t + Lb * Lb / (8 * kPi * kPi);
            break;
        }
        if (st.t >= t_max) {
            run.outcome = FlowOutcome::Timeout;
            break;
        }
    }
    if (guard >= guard_max) {
        run.outcome = FlowOutcome::Anomaly;
        run.anomaly = "step budget exhausted";
    }

    // merge the dense pre-terminal ring into the snapshot list
    double last_t = run.snapshots.back().first;
    for (const auto& e : ring)
        if (e.first > last_t) run.snapshots.push_back(e);
    run.final_curve = st.curve;
    if (run.snapshots.back().first < st.t) run.snapshots.push_back({st.t, st.curve});
    return run;
}

BlowupReport blowup_profile(const DiskSurface& surface, const FlowRun& run) {
    BlowupReport rep;
    if (run.outcome != FlowOutcome::HalfPoint)
        throw NumericError("blowup_profile: run did not end at a half-point");
    if (run.snapshots.size() < 3)
        throw ResolutionError("blowup_profile: not enough snapshots");
    const double T = run.extinction_time;
    const Vec2 z = run.half_point;
    double sb = surface.nearest_boundary_arclength(z);
    Vec2 tb = surface.boundary_tangent_at(sb);
    Vec2 nb = surface.boundary_inward_normal_at(sb);
    double det = tb.x * nb.y - tb.y * nb.x;

    auto to_frame = [&](Vec2 p) {
        Vec2 d = p - z;
        return Vec2{(d.x * nb.y - d.y * nb.x) / det, (tb.x * d.y - tb.y * d.x) / det};
    };

    int count = 0;
    for (auto it = run.snapshots.rbegin(); it != run.snapshots.rend() && count < 12; ++it) {
        double t = it->first;
        if (T - t <= 0) continue;
        double scale = 1.0 / std::sqrt(2.0 * (T - t));
        const Chord& c = it->second;
        std::vector<Vec2> w;
        w.reserve(c.samples().size());
        for (const auto& p : c.samples()) w.push_back(to_frame(p) * scale);

        double devA = 0.0;
        for (const auto& q : w) {
            double d;
            if (q.y >= 0)
                d = std::abs(q.norm() - 1.0);
            else
                d = std::min((q - Vec2{1, 0}).norm(), (q - Vec2{-1, 0}).norm());
            devA = std::max(devA, d);
        }
        double devB = 0.0;
        for (int k = 0; k <= 128; ++k) {
            Vec2 arc{std::cos(kPi * k / 128.0), std::sin(kPi * k / 128.0)};
            double best = 1e300;
            for (std::size_t i = 0; i + 1 < w.size(); ++i) {
                Vec2 a = w[i], b = w[i + 1], ab = b - a;
                double tproj = ab.norm2() > 0
                                   ? std::clamp((arc - a).dot(ab) / ab.norm2(), 0.0, 1.0)
                                   : 0.0;
                best = std::min(best, (a + ab * tproj - arc).norm());
            }
            devB = std::max(devB, best);
        }
        rep.times.push_back(t);
        rep.deviations.push_back(std::max(devA, devB));
        ++count;
    }
    std::reverse(rep.times.begin(), rep.times.end());
    std::reverse(rep.deviations.begin(), rep.deviations.end());
    if (rep.deviations.empty()) throw ResolutionError("blowup_profile: no usable snapshots");
    rep.final_deviation = rep.deviations.back();
    return rep;
}

AvoidanceReport boundary_avoidance_audit(const DiskSurface& surface, const FlowRun& run,
                                         double delta) {
    AvoidanceReport rep;
    rep.delta = delta;
    double global = 1e300;
    bool any = false;
    for (const auto& [t, c] : run.snapshots) {
        double local = 1e300;
        const auto& arcs = c.arclengths();
        for (std::size_t i = 0; i < arcs.size(); ++i) {
            if (nearer_endpoint_arclength(c, arcs[i]) <= delta) continue;
            any = true;
            local = std::min(local, distance_to_boundary(surface, c.samples()[i]));
        }
        rep.per_time.push_back({t, local});
        global = std::min(global, local);
    }
    rep.vacuous = !any;
    rep.eps_obs = rep.vacuous ? std::numeric_limits<double>::infinity() : global;
    return rep;
}

}  // namespace fbcsf
