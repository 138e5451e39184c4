#pragma once
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fbcsf/geometry.hpp"
#include "fbcsf/scalar_field.hpp"

namespace fbcsf {

enum class MetricKind { Flat, Conformal, General };

// Christoffel symbols of the second kind; gamma[k] is the 2x2 matrix Gamma^k_{ij}.
struct Christoffel {
    Mat2 gamma[2];
    Vec2 apply(const Vec2& u, const Vec2& v) const {
        return {inner(gamma[0], u, v), inner(gamma[1], u, v)};
    }
};

// General metric given by entry fields with analytic derivatives.
struct TensorField {
    std::function<Mat2(Vec2)> value;
    std::function<Mat2(Vec2, int)> d1;       // d(g)/dx_k
    std::function<Mat2(Vec2, int, int)> d2;  // d2(g)/dx_k dx_l
};

struct IsoperimetricConstants {
    double L0;      // boundary-length threshold for disk-type regions
    double Cprime;  // |A| <= Cprime |dA|^2 for such regions
};

// Riemannian 2-disk with strictly convex boundary on an ellipse chart
// {(x/a)^2 + (y/b)^2 <= 1}. Immutable; copies share state and all queries
// are safe to call concurrently.
class DiskSurface {
public:
    DiskSurface() = default;  // invalid until assigned from a factory
    bool valid() const { return impl_ != nullptr; }

    static DiskSurface flat_disk(double radius = 1.0);
    static DiskSurface flat_ellipse(double a, double b);
    static DiskSurface conformal(ScalarField phi, double a = 1.0, double b = 1.0);
    static DiskSurface general(TensorField g, double a = 1.0, double b = 1.0);

    MetricKind kind() const;
    double chart_a() const;
    double chart_b() const;
    const ScalarField& conformal_factor() const;  // empty field unless Conformal

    // (x/a)^2 + (y/b)^2 - 1; negative strictly inside.
    double implicit(Vec2 p) const;
    bool contains(Vec2 p, double tol = 1e-12) const;

    Mat2 metric_at(Vec2 p) const;  // DomainError outside the chart
    Mat2 metric_inverse_at(Vec2 p) const;
    double sqrt_det_at(Vec2 p) const;
    Christoffel christoffel_at(Vec2 p) const;
    double gaussian_curvature(Vec2 p) const;

    double inner_at(Vec2 p, Vec2 u, Vec2 v) const;
    double norm_at(Vec2 p, Vec2 v) const;
    // Metric rotation J by +pi/2 (the complex structure of g).
    Vec2 rotate_ccw(Vec2 p, Vec2 v) const;

    // --- boundary, parametrized by metric arclength s in [0, boundary_length) ---
    double boundary_length() const;
    double boundary_param_of_arclength(double s) const;  // ellipse angle t(s)
    double boundary_arclength_of_param(double t) const;
    Vec2 boundary_point_at(double s) const;
    Vec2 boundary_tangent_at(double s) const;        // g-unit, counterclockwise
    Vec2 boundary_inward_normal_at(double s) const;  // g-unit
    double boundary_geodesic_curvature(double s) const;
    // Arclength of the boundary point closest to p in chart distance.
    double nearest_boundary_arclength(Vec2 p) const;
    // Arclength of a point already on the boundary (from its ellipse angle).
    double boundary_arclength_of_point(Vec2 p) const;
    Vec2 project_to_boundary(Vec2 p) const;

    // --- derived constants (grid sups inflated by 5%) ---
    double curvature_sup() const;                  // K0
    double boundary_curvature_sup() const;         // C, global
    double boundary_curvature_sup_near(Vec2 p, double radius) const;
    IsoperimetricConstants isoperimetric() const;

    // New surface with metric e^{2 phi} g. Emits a convexity warning record
    // (retrievable via convexity_warning) instead of failing when the deformed
    // boundary loses positivity somewhere.
    DiskSurface conformally_deformed(ScalarField phi) const;
    std::optional<std::string> convexity_warning() const;

    // Gauss-Bonnet check on the full disk; returns |int K dA + int kappa ds - 2 pi|.
    double gauss_bonnet_residual(int refine_level = 0) const;

    std::string describe() const;

    struct Impl;

private:
    explicit DiskSurface(std::shared_ptr<const Impl> impl);
    std::shared_ptr<const Impl> impl_;
};

// Area integral of f over the region enclosed by a simple polygon (chart
// coordinates), with respect to the metric area element. The polygon is
// ear-clipped once and each triangle is refined 4-ways `refine_level` times.
double integrate_over_polygon(const DiskSurface& surface, const std::vector<Vec2>& polygon,
                              const std::function<double(Vec2)>& f, int refine_level = 0);

}  // namespace fbcsf
