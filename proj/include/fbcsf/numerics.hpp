#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fbcsf {

// Thomas algorithm. a = subdiagonal (n-1), b = diagonal (n), c = superdiagonal (n-1).
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                      std::vector<double> c, std::vector<double> d);

// Cubic spline with not-a-knot ends over strictly increasing knots (n >= 4).
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> knots, std::vector<double> values);

    double eval(double x) const;
    double deriv(double x) const;
    double deriv2(double x) const;
    double integral() const;  // over the full knot range

    const std::vector<double>& knots() const { return x_; }
    bool valid() const { return !x_.empty(); }

private:
    int segment(double x) const;
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

// Minimizes a unimodal function on [a, b]; returns argmin.
double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_iter = 200);

// Root of f on a bracketing interval [a, b] with f(a) f(b) <= 0.
double bisect_root(const std::function<double(double)>& f, double a, double b,
                   double tol, int max_iter = 200);

// Composite Gauss-Legendre quadrature of fixed order 4.
double integrate_gl4(const std::function<double(double)>& f, double a, double b,
                     int panels);

struct GLNode {
    double x, w;
};
// Order-4 nodes/weights mapped to [a, b].
std::vector<GLNode> gl4_nodes(double a, double b, int panels);

// Degree-4 quadrature rule on a triangle (6 points), weights summing to the area.
struct TriPoint {
    double x, y, w;
};
std::vector<TriPoint> triangle_quadrature(const double* xa, const double* xb, const double* xc);

// C2 cutoff: 1 for t <= 0, 0 for t >= 1.
double smoothstep_down(double t);

std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t fnv1a64(const std::string& s);

// Shortest-17-significant-digit float formatting (deterministic output).
std::string format_double(double v);

}  // namespace fbcsf
