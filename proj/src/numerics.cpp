#include "fbcsf/numerics.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fbcsf {

std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                      std::vector<double> c, std::vector<double> d) {
    const std::size_t n = b.size();
    assert(a.size() == n - 1 && c.size() == n - 1 && d.size() == n);
    for (std::size_t i = 1; i < n; ++i) {
        double w = a[i - 1] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
    }
    return x;
}

CubicSpline::CubicSpline(std::vector<double> knots, std::vector<double> values)
    : x_(std::move(knots)), y_(std::move(values)) {
    const std::size_t n = x_.size();
    if (n < 4 || y_.size() != n)
        throw std::invalid_argument("CubicSpline: need >= 4 knots");
    std::vector<double> h(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x_[i + 1] - x_[i];
        if (!(h[i] > 0)) throw std::invalid_argument("CubicSpline: knots not increasing");
    }
    // Continuity rows for the interior second derivatives m_1..m_{n-2}; the
    // not-a-knot conditions express m_0 and m_{n-1} through their neighbours:
    //   m_0 = (1+r0) m_1 - r0 m_2,          r0 = h_0 / h_1
    //   m_{n-1} = (1+r1) m_{n-2} - r1 m_{n-3},  r1 = h_{n-2} / h_{n-3}
    const std::size_t k = n - 2;  // unknown count
    std::vector<double> sub(k - 1, 0.0), diag(k, 0.0), sup(k - 1, 0.0), rhs(k, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double ai = h[i - 1] / 6.0, bi = (h[i - 1] + h[i]) / 3.0, ci = h[i] / 6.0;
        double di = (y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1];
        std::size_t r = i - 1;  // row index in the reduced system
        diag[r] = bi;
        rhs[r] = di;
        if (i == 1) {
            double r0 = h[0] / h[1];
            diag[r] += ai * (1.0 + r0);
            if (k > 1) sup[r] = ci - ai * r0;
        } else if (i + 2 < n) {
            sub[r - 1] = ai;
            sup[r] = ci;
        }
        if (i + 2 == n) {
            double r1 = h[n - 2] / h[n - 3];
            diag[r] += ci * (1.0 + r1);
            if (i > 1) sub[r - 1] = ai - ci * r1;
        }
    }
    std::vector<double> mi = solve_tridiagonal(sub, diag, sup, rhs);
    m_.assign(n, 0.0);
    for (std::size_t i = 0; i < k; ++i) m_[i + 1] = mi[i];
    {
        double r0 = h[0] / h[1];
        m_[0] = (1.0 + r0) * m_[1] - r0 * m_[2];
        double r1 = h[n - 2] / h[n - 3];
        m_[n - 1] = (1.0 + r1) * m_[n - 2] - r1 * m_[n - 3];
    }
}

int CubicSpline::segment(double x) const {
    const auto& xs = x_;
    if (x <= xs.front()) return 0;
    if (x >= xs.back()) return static_cast<int>(xs.size()) - 2;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    return static_cast<int>(it - xs.begin()) - 1;
}

double CubicSpline::eval(double x) const {
    int i = segment(x);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * y_[i] + B * y_[i + 1] +
           ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
}

double CubicSpline::deriv(double x) const {
    int i = segment(x);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return (y_[i + 1] - y_[i]) / h +
           h / 6.0 * ((3 * B * B - 1) * m_[i + 1] - (3 * A * A - 1) * m_[i]);
}

double CubicSpline::deriv2(double x) const {
    int i = segment(x);
    double h = x_[i + 1] - x_[i];
    double A = (x_[i + 1] - x) / h, B = (x - x_[i]) / h;
    return A * m_[i] + B * m_[i + 1];
}

double CubicSpline::integral() const {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < x_.size(); ++i) {
        double h = x_[i + 1] - x_[i];
        total += 0.5 * h * (y_[i] + y_[i + 1]) - h * h * h / 24.0 * (m_[i] + m_[i + 1]);
    }
    return total;
}

double golden_section_min(const std::function<double(double)>& f, double a, double b,
                          double tol, int max_iter) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

double bisect_root(const std::function<double(double)>& f, double a, double b, double tol,
                   int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0) throw std::invalid_argument("bisect_root: no sign change");
    for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
        double m = 0.5 * (a + b), fm = f(m);
        if (fm == 0) return m;
        if (fa * fm < 0) {
            b = m; fb = fm;
        } else {
            a = m; fa = fm;
        }
    }
    return 0.5 * (a + b);
}

namespace {
// 4-point Gauss-Legendre on [-1, 1].
constexpr double kGL4X[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                             0.8611363115940526};
constexpr double kGL4W[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                             0.3478548451374538};
}  // namespace

std::vector<GLNode> gl4_nodes(double a, double b, int panels) {
    std::vector<GLNode> out;
    out.reserve(4 * panels);
    double hp = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        double lo = a + p * hp, mid = lo + 0.5 * hp;
        for (int k = 0; k < 4; ++k)
            out.push_back({mid + 0.5 * hp * kGL4X[k], 0.5 * hp * kGL4W[k]});
    }
    return out;
}

double integrate_gl4(const std::function<double(double)>& f, double a, double b, int panels) {
    double s = 0.0;
    for (const auto& n : gl4_nodes(a, b, panels)) s += n.w * f(n.x);
    return s;
}

std::vector<TriPoint> triangle_quadrature(const double* xa, const double* xb, const double* xc) {
    // 6-point degree-4 rule in barycentric form.
    static const double w1 = 0.223381589678011, w2 = 0.109951743655322;
    static const double a1 = 0.445948490915965, a2 = 0.091576213509771;
    struct B {
        double l1, l2, l3, w;
    };
    static const B bary[6] = {
        {a1, a1, 1 - 2 * a1, w1}, {a1, 1 - 2 * a1, a1, w1}, {1 - 2 * a1, a1, a1, w1},
        {a2, a2, 1 - 2 * a2, w2}, {a2, 1 - 2 * a2, a2, w2}, {1 - 2 * a2, a2, a2, w2}};
    double area2 = std::abs((xb[0] - xa[0]) * (xc[1] - xa[1]) -
                            (xc[0] - xa[0]) * (xb[1] - xa[1]));
    std::vector<TriPoint> out;
    out.reserve(6);
    for (const auto& b : bary) {
        TriPoint p;
        p.x = b.l1 * xa[0] + b.l2 * xb[0] + b.l3 * xc[0];
        p.y = b.l1 * xa[1] + b.l2 * xb[1] + b.l3 * xc[1];
        p.w = b.w * 0.5 * area2;
        out.push_back(p);
    }
    return out;
}

double smoothstep_down(double t) {
    if (t <= 0) return 1.0;
    if (t >= 1) return 0.0;
    double s = t * t * t * (t * (t * 6 - 15) + 10);
    return 1.0 - s;
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace fbcsf
