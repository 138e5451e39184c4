#include "fbcsf/scalar_field.hpp"

#include <cmath>
#include <utility>

namespace fbcsf {

struct ScalarField::Impl {
    virtual ~Impl() = default;
    virtual double value(Vec2 p) const = 0;
    virtual Vec2 gradient(Vec2 p) const = 0;
    virtual Mat2 hessian(Vec2 p) const = 0;
    virtual std::string describe() const = 0;
};

double ScalarField::value(Vec2 p) const { return impl_ ? impl_->value(p) : 0.0; }
Vec2 ScalarField::gradient(Vec2 p) const { return impl_ ? impl_->gradient(p) : Vec2{}; }
Mat2 ScalarField::hessian(Vec2 p) const {
    return impl_ ? impl_->hessian(p) : Mat2{0, 0, 0, 0};
}
double ScalarField::laplacian(Vec2 p) const {
    Mat2 h = hessian(p);
    return h.a11 + h.a22;
}
std::string ScalarField::describe() const { return impl_ ? impl_->describe() : "zero"; }

namespace {

struct Quadratic final : ScalarField::Impl {
    double c;
    explicit Quadratic(double c_) : c(c_) {}
    double value(Vec2 p) const override { return c * p.norm2(); }
    Vec2 gradient(Vec2 p) const override { return p * (2 * c); }
    Mat2 hessian(Vec2) const override { return Mat2::diag(2 * c, 2 * c); }
    std::string describe() const override { return "quadratic(" + std::to_string(c) + ")"; }
};

struct LogCap final : ScalarField::Impl {
    double value(Vec2 p) const override { return std::log(2.0 / (1.0 + p.norm2())); }
    Vec2 gradient(Vec2 p) const override {
        double q = 1.0 + p.norm2();
        return p * (-2.0 / q);
    }
    Mat2 hessian(Vec2 p) const override {
        double q = 1.0 + p.norm2();
        double c1 = -2.0 / q, c2 = 4.0 / (q * q);
        return {c1 + c2 * p.x * p.x, c2 * p.x * p.y, c2 * p.x * p.y, c1 + c2 * p.y * p.y};
    }
    std::string describe() const override { return "log-cap"; }
};

struct AnisoX final : ScalarField::Impl {
    double c;
    explicit AnisoX(double c_) : c(c_) {}
    double value(Vec2 p) const override { return c * p.x * p.x; }
    Vec2 gradient(Vec2 p) const override { return {2 * c * p.x, 0.0}; }
    Mat2 hessian(Vec2) const override { return Mat2::diag(2 * c, 0.0); }
    std::string describe() const override { return "aniso-x(" + std::to_string(c) + ")"; }
};

struct GaussBump final : ScalarField::Impl {
    double c, s2;
    Vec2 u0;
    GaussBump(double c_, Vec2 u0_, double sigma) : c(c_), s2(sigma * sigma), u0(u0_) {}
    double value(Vec2 p) const override {
        return c * std::exp(-(p - u0).norm2() / (2 * s2));
    }
    Vec2 gradient(Vec2 p) const override {
        Vec2 d = p - u0;
        return d * (-value(p) / s2);
    }
    Mat2 hessian(Vec2 p) const override {
        Vec2 d = p - u0;
        double v = value(p);
        double f = v / (s2 * s2);
        return {f * d.x * d.x - v / s2, f * d.x * d.y, f * d.x * d.y, f * d.y * d.y - v / s2};
    }
    std::string describe() const override { return "bump"; }
};

// C2 quintic cutoff and derivatives, 1 for t<=0, 0 for t>=1.
inline void cutoff(double t, double& c, double& c1, double& c2) {
    if (t <= 0) { c = 1; c1 = 0; c2 = 0; return; }
    if (t >= 1) { c = 0; c1 = 0; c2 = 0; return; }
    double t2 = t * t, t3 = t2 * t;
    c = 1.0 - t3 * (t * (t * 6 - 15) + 10);
    c1 = -(30 * t2 * t2 - 60 * t3 + 30 * t2);
    c2 = -(120 * t3 - 180 * t2 + 60 * t);
}

struct NormalBand final : ScalarField::Impl {
    Vec2 origin, axis, n;  // n = unit normal of the band axis
    double strength, width;
    NormalBand(Vec2 o, Vec2 a, double s, double w)
        : origin(o), axis(a.normalized()), strength(s), width(w) {
        n = axis.perp();
    }
    // phi = (strength/2) * chi(|w|) * w^2, w = <p - origin, n>
    double value(Vec2 p) const override {
        double w = (p - origin).dot(n);
        double c, c1, c2;
        cutoff((std::abs(w) - 0.5 * width) / (0.5 * width), c, c1, c2);
        return 0.5 * strength * c * w * w;
    }
    Vec2 gradient(Vec2 p) const override {
        double w = (p - origin).dot(n);
        double aw = std::abs(w), h = 0.5 * width;
        double c, c1, c2;
        cutoff((aw - h) / h, c, c1, c2);
        double sgn = (w >= 0) ? 1.0 : -1.0;
        double dphi_dw = strength * (c * w + 0.5 * w * w * c1 * sgn / h);
        return n * dphi_dw;
    }
    Mat2 hessian(Vec2 p) const override {
        double w = (p - origin).dot(n);
        double aw = std::abs(w), h = 0.5 * width;
        double c, c1, c2;
        cutoff((aw - h) / h, c, c1, c2);
        double d2 = strength * (c + 2.0 * aw * c1 / h + 0.5 * w * w * c2 / (h * h));
        return {d2 * n.x * n.x, d2 * n.x * n.y, d2 * n.x * n.y, d2 * n.y * n.y};
    }
    std::string describe() const override { return "normal-band"; }
};

struct Sum final : ScalarField::Impl {
    ScalarField a, b;
    Sum(ScalarField a_, ScalarField b_) : a(std::move(a_)), b(std::move(b_)) {}
    double value(Vec2 p) const override { return a.value(p) + b.value(p); }
    Vec2 gradient(Vec2 p) const override { return a.gradient(p) + b.gradient(p); }
    Mat2 hessian(Vec2 p) const override { return a.hessian(p) + b.hessian(p); }
    std::string describe() const override {
        return a.describe() + " + " + b.describe();
    }
};

struct Scaled final : ScalarField::Impl {
    ScalarField a;
    double c;
    Scaled(ScalarField a_, double c_) : a(std::move(a_)), c(c_) {}
    double value(Vec2 p) const override { return c * a.value(p); }
    Vec2 gradient(Vec2 p) const override { return a.gradient(p) * c; }
    Mat2 hessian(Vec2 p) const override { return a.hessian(p) * c; }
    std::string describe() const override { return "scaled " + a.describe(); }
};

struct Custom final : ScalarField::Impl {
    std::function<double(Vec2)> f;
    double h;
    Custom(std::function<double(Vec2)> f_, double h_) : f(std::move(f_)), h(h_) {}
    double value(Vec2 p) const override { return f(p); }
    Vec2 gradient(Vec2 p) const override {
        return {(f({p.x + h, p.y}) - f({p.x - h, p.y})) / (2 * h),
                (f({p.x, p.y + h}) - f({p.x, p.y - h})) / (2 * h)};
    }
    Mat2 hessian(Vec2 p) const override {
        double fxx = (f({p.x + h, p.y}) - 2 * f(p) + f({p.x - h, p.y})) / (h * h);
        double fyy = (f({p.x, p.y + h}) - 2 * f(p) + f({p.x, p.y - h})) / (h * h);
        double fxy = (f({p.x + h, p.y + h}) - f({p.x + h, p.y - h}) - f({p.x - h, p.y + h}) +
                      f({p.x - h, p.y - h})) /
                     (4 * h * h);
        return {fxx, fxy, fxy, fyy};
    }
    std::string describe() const override { return "custom"; }
};

template <class T, class... A>
ScalarField make(A&&... args) {
    return ScalarField{std::make_shared<const T>(std::forward<A>(args)...)};
}

}  // namespace

ScalarField ScalarField::quadratic(double c) { return make<Quadratic>(c); }
ScalarField ScalarField::log_cap() { return make<LogCap>(); }
ScalarField ScalarField::aniso_x(double c) { return make<AnisoX>(c); }
ScalarField ScalarField::gaussian_bump(double c, Vec2 center, double sigma) {
    return make<GaussBump>(c, center, sigma);
}
ScalarField ScalarField::normal_band(Vec2 origin, Vec2 axis, double strength, double width) {
    return make<NormalBand>(origin, axis, strength, width);
}
ScalarField ScalarField::sum(ScalarField a, ScalarField b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    return make<Sum>(std::move(a), std::move(b));
}
ScalarField ScalarField::scaled(ScalarField a, double c) { return make<Scaled>(std::move(a), c); }
ScalarField ScalarField::custom(std::function<double(Vec2)> f, double fd_step) {
    return make<Custom>(std::move(f), fd_step);
}

}  // namespace fbcsf
