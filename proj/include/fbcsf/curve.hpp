#pragma once
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "fbcsf/numerics.hpp"
#include "fbcsf/surface.hpp"

namespace fbcsf {

// A point of the formal double of a chord: arclength plus copy label.
// Boundary points (s = 0 or s = L) are identified across labels.
struct CompletedPoint {
    double s = 0.0;
    int sign = +1;
};

// Properly embedded curve with endpoints on the boundary, stored as
// arclength-uniform samples with cubic-spline evaluation between them.
// Immutable snapshot; copies are cheap and thread-safe to share.
class Chord {
public:
    Chord() = default;

    // Builds from ordered chart points (endpoints on the boundary). Resamples
    // to `n` uniform-arclength samples. Set project_endpoints to snap endpoint
    // inputs onto the boundary first.
    static Chord from_points(const DiskSurface& surface, const std::vector<Vec2>& points,
                             int n = 256, bool project_endpoints = false);
    // Straight chart segment between two boundary points given by arclength.
    static Chord straight_between(const DiskSurface& surface, double s0, double s1,
                                  int n = 256);

    bool valid() const { return impl_ != nullptr; }
    const DiskSurface& surface() const;
    const std::vector<Vec2>& samples() const;
    const std::vector<double>& arclengths() const;
    double length() const;
    int size() const;

    Vec2 position(double s) const;
    Vec2 velocity(double s) const;    // d/ds of the spline (approximately g-unit)
    Vec2 tangent(double s) const;     // g-unit
    Vec2 normal(double s) const;      // nu with gamma' = J nu
    double curvature(double s) const; // geodesic curvature w.r.t. nu
    double max_abs_curvature() const;

    // Signed angle defects between the curve and boundary-orthogonality at the
    // two endpoints; (0, 0) iff the free-boundary condition holds.
    std::pair<double, double> orthogonality_defect() const;

    // Boundary arclengths of the two endpoints.
    std::pair<double, double> endpoint_boundary_arclengths() const;

    bool is_embedded() const;  // segment-pair sweep

    // Integral of f(s) ds with spline accuracy.
    double integrate(const std::function<double(double)>& f) const;

    struct Impl;

private:
    std::shared_ptr<const Impl> impl_;
};

// |s_x - s_y| for same-sign pairs, min(s_x + s_y, 2L - s_x - s_y) otherwise.
double completed_arclength(const Chord& c, CompletedPoint x, CompletedPoint y);

// lambda(s) = min(s, L - s)
double nearer_endpoint_arclength(const Chord& c, double s);

void write_curve_csv(std::ostream& os, const Chord& c);
std::string curve_to_csv(const Chord& c);
Chord curve_from_csv(const DiskSurface& surface, std::istream& is, int n = 0);

}  // namespace fbcsf
