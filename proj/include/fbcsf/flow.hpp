#pragma once
#include <string>
#include <utility>
#include <vector>

#include "fbcsf/curve.hpp"
#include "fbcsf/geodesy.hpp"

namespace fbcsf {

struct FlowOptions {
    int n_target = 256;          // samples at the initial length
    bool adaptive_n = true;      // shrink sample count with the curve
    int n_min = 48;
    double dt_safety = 0.4;      // dt_max = dt_safety * spacing^2
    double curvature_step_cap = 0.2;  // reject when max|kappa| dt exceeds this
    double orth_tol = 1e-6;      // post-step orthogonality requirement
    bool fixed_dt = false;       // keep dt constant (convergence studies)
    double dt_init = 0.0;        // 0 -> dt_max
    double eps_len_rel = 1e-3;   // extinction threshold relative to L(0)
    int coupling_sweeps = 2;     // interior-solve / endpoint-slide passes
    double weak_start_tol = 1e-6;
};

struct FlowStats {
    double t = 0, dt = 0, length = 0, max_kappa = 0;
    double defect0 = 0, defect1 = 0;
    double kappa_sq = 0;          // int kappa^2 ds
    double dissipation_ratio = 0; // (dL/dt) / (-int kappa^2 ds)
};

struct FlowState {
    double t = 0;
    double dt = 0;
    Chord curve;
    double initial_length = 0;
    std::vector<Vec2> prev_gamma_term;  // for variable-step extrapolation
    double prev_dt = 0;
    int consecutive_accepts = 0;
    bool singular = false;
    std::string last_reject;
};

// Prepares a state; curves violating the orthogonal boundary condition get the
// weak-start regularization (local boundary-angle correction) first.
FlowState flow_init(const DiskSurface& surface, const Chord& gamma0,
                    const FlowOptions& opts = {});

// One accepted semi-implicit step (rejections and dt halving happen inside).
// Returns the stats of the accepted step; sets state.singular on dt underflow.
FlowStats flow_step(const DiskSurface& surface, FlowState& state,
                    const FlowOptions& opts = {});

enum class FlowOutcome { Geodesic, HalfPoint, Timeout, Anomaly };

struct FlowRun {
    FlowOutcome outcome = FlowOutcome::Timeout;
    Chord final_curve;
    Vec2 half_point;             // HalfPoint only
    double extinction_time = 0;  // HalfPoint only
    double initial_length = 0;
    std::vector<FlowStats> stats;
    std::vector<std::pair<double, Chord>> snapshots;  // (t, curve), increasing t
    std::string anomaly;
};

FlowRun evolve_classify(const DiskSurface& surface, const Chord& gamma0, double t_max,
                        double eps_geo, const FlowOptions& opts = {});

// Rescales late snapshots by 1/sqrt(2(T-t)) in a metric-orthonormal frame at
// the extinction point and measures Hausdorff distance to the unit semicircle.
struct BlowupReport {
    std::vector<double> times;
    std::vector<double> deviations;
    double final_deviation = 0;
};
BlowupReport blowup_profile(const DiskSurface& surface, const FlowRun& run);

// Over all stored times, the least boundary distance among samples with
// nearer-endpoint arclength above delta. Vacuous quantifiers report +inf.
struct AvoidanceReport {
    double delta = 0;
    double eps_obs = 0;
    bool vacuous = false;
    std::vector<std::pair<double, double>> per_time;  // (t, min distance)
};
AvoidanceReport boundary_avoidance_audit(const DiskSurface& surface, const FlowRun& run,
                                         double delta);

// Weak-start utility: local C0-small deformation near the endpoints followed
// by endpoint sliding until both angle defects are below tol.
Chord enforce_orthogonality(const DiskSurface& surface, const Chord& chord, double tol,
                            double window = 0.0);

// Chart-level distance from p to the boundary (straight-probe minimum; exact
// on flat charts).
double distance_to_boundary(const DiskSurface& surface, Vec2 p);

}  // namespace fbcsf
