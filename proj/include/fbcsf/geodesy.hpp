#pragma once
#include <memory>
#include <optional>
#include <vector>

#include "fbcsf/curve.hpp"
#include "fbcsf/surface.hpp"

namespace fbcsf {

// Geodesic solved by arclength with positions and velocities at uniform
// parameter steps. `broken_at` marks the corner of a reflected path.
struct GeodesicPath {
    std::vector<Vec2> samples;
    std::vector<Vec2> velocities;  // g-unit
    double length = 0.0;
    bool boundary_hit = false;
    std::optional<double> broken_at_s;  // arclength of the boundary corner
    std::optional<Vec2> broken_at;

    Vec2 endpoint() const { return samples.back(); }
    Vec2 start_velocity() const { return velocities.front(); }
    Vec2 end_velocity() const { return velocities.back(); }
    // Position/velocity at arclength s by linear interpolation of the dense samples.
    Vec2 position(double s) const;
    Vec2 velocity(double s) const;
};

struct ShootOptions {
    double step = 1.0 / 256.0;   // arclength step before RK4 substepping
    bool clip_at_boundary = true;
    double domain_tol = 1e-12;
};

// Integrates the geodesic equation from p with g-unit velocity v for length
// len. With clipping enabled the path stops on the boundary (boundary_hit).
GeodesicPath geodesic_shoot(const DiskSurface& surface, Vec2 p, Vec2 v, double len,
                            const ShootOptions& opts = {});

struct ConnectOptions {
    std::optional<double> init_angle;
    std::optional<double> init_length;
    double tol = 1e-11;
    int max_iter = 40;
    double step = 1.0 / 256.0;
};

struct TwoPointResult {
    GeodesicPath path;
    bool converged = false;
    double residual = 0.0;
};

// Two-point geodesic by shooting; Newton on launch angle and length. The
// integration ignores the boundary, so callers on convex charts get the
// interior minimizing geodesic.
TwoPointResult connect_geodesic(const DiskSurface& surface, Vec2 p, Vec2 q,
                                const ConnectOptions& opts = {});

// First-arrival field of the eikonal solve seeded at one point (conformal
// metrics). Query by bilinear interpolation.
class DistanceField {
public:
    DistanceField() = default;
    DistanceField(const DiskSurface& surface, Vec2 seed, int grid_n);
    double query(Vec2 p) const;
    // Distances to n boundary points at arclengths i * |dN| / n.
    std::vector<double> boundary_values(int n) const;
    bool valid() const { return n_ > 0; }

private:
    double node(int i, int j) const { return t_[static_cast<std::size_t>(j) * n_ + i]; }
    double distance_correction(Vec2 z, Vec2 probe) const;
    int n_ = 0;
    double ax_ = 1, bx_ = 1;  // chart semi-axes
    std::vector<double> t_;
    DiskSurface surface_;
};

struct DistanceOptions {
    int eikonal_grid = 513;
    bool allow_field_fallback = true;
};

// Intrinsic distance in N. Flat charts use exact segment lengths (convexity
// keeps segments inside); conformal metrics shoot a two-point geodesic with a
// straight-line seed and fall back to the eikonal field when shooting fails.
double distance(const DiskSurface& surface, Vec2 p, Vec2 q,
                const DistanceOptions& opts = {});

struct ReflectedResult {
    double value = 0.0;
    double z_arclength = 0.0;
    Vec2 z;
    GeodesicPath leg_x, leg_y;  // from x (resp. y) to z
    double theta0 = 0.0;        // common angle of the reflection law
};

struct ReflectOptions {
    int boundary_samples = 1024;
    bool with_legs = true;
    DistanceOptions dist;
};

// min over z in dN of d(p,z) + d(q,z); scan plus golden-section refinement.
// Ties resolve to the smallest boundary arclength.
ReflectedResult reflected_distance(const DiskSurface& surface, Vec2 p, Vec2 q,
                                   const ReflectOptions& opts = {});

// Completed distance on the formal double of gamma.
double completed_distance(const DiskSurface& surface, CompletedPoint x, CompletedPoint y,
                          const Chord& gamma, const DistanceOptions& opts = {});

// Solves nabla_{alpha'} V = 0 along the path; returns V at every path sample.
std::vector<Vec2> parallel_transport(const DiskSurface& surface, const GeodesicPath& path,
                                     Vec2 v0);

// Integral of the Gaussian curvature along a path (arclength measure),
// broken paths handled leg-wise.
double curvature_integral_along(const DiskSurface& surface, const GeodesicPath& path);

}  // namespace fbcsf
