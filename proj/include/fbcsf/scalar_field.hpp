#pragma once
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fbcsf/geometry.hpp"

namespace fbcsf {

// Conformal factor fields on the chart. Presets carry analytic derivatives;
// the generic constructor falls back to central differences.
class ScalarField {
public:
    struct Impl;

    ScalarField() = default;

    double value(Vec2 p) const;
    Vec2 gradient(Vec2 p) const;
    Mat2 hessian(Vec2 p) const;
    double laplacian(Vec2 p) const;
    bool empty() const { return impl_ == nullptr; }

    // phi(u) = c |u|^2
    static ScalarField quadratic(double c);
    // phi(u) = ln(2 / (1 + |u|^2)), the spherical-cap factor with K = 1
    static ScalarField log_cap();
    // phi(u) = c * u.x^2 (axis-anisotropic)
    static ScalarField aniso_x(double c);
    // phi(u) = c * exp(-|u - center|^2 / (2 sigma^2))
    static ScalarField gaussian_bump(double c, Vec2 center, double sigma);
    // phi(u) = (strength/2) * cutoff(|w|/width) * w^2 with w the offset from the
    // line through `origin` with unit direction `axis`; cutoff is C2 and equals 1
    // on |w| <= half the width. Normal derivative vanishes where the band meets
    // a boundary orthogonal to the axis at w = 0.
    static ScalarField normal_band(Vec2 origin, Vec2 axis, double strength, double width);
    static ScalarField sum(ScalarField a, ScalarField b);
    static ScalarField scaled(ScalarField a, double c);
    static ScalarField custom(std::function<double(Vec2)> f, double fd_step = 1e-5);

    std::string describe() const;

    explicit ScalarField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<const Impl> impl_;
};

}  // namespace fbcsf
