#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wkh/exec.hpp"
#include "wkh/vec3.hpp"

namespace wkh {

inline constexpr double pi = 3.14159265358979323846;

struct Rule1D {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

// Gauss-Legendre rule on [-1,1]. Nodes are computed by Newton iteration on
// P_n and stored exactly symmetric about 0 (the mirror half is the negation
// of the computed half).
inline Rule1D gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    Rule1D r;
    r.nodes.resize(n);
    r.weights.resize(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        if (n % 2 == 1 && i == m - 1) x = 0.0;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -std::abs(x);
        r.nodes[n - 1 - i] = std::abs(x);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}

inline Rule1D mapped(const Rule1D& base, double a, double b) {
    Rule1D r = base;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r.nodes[i] = mid + half * base.nodes[i];
        r.weights[i] = half * base.weights[i];
    }
    return r;
}

// Product rule on S^2: Gauss-Legendre in cos(theta) x uniform midpoints in
// phi. Weights sum to 4*pi. With an even phi count the node set is closed
// under sigma -> -sigma and the pairing is exact by construction: the
// antipode of node (i, j) is node (n_theta-1-i, (j + n_phi/2) % n_phi),
// built from negated trig values rather than re-evaluated ones.
struct SphereRule {
    std::vector<Vec3> nodes;
    std::vector<double> weights;
    std::vector<std::size_t> antipode; // empty unless antipodal
    bool antipodal = false;

    std::size_t size() const { return nodes.size(); }

    static SphereRule product(int n_theta, int n_phi) {
        if (n_theta < 1 || n_phi < 1) throw std::invalid_argument("SphereRule: counts must be >= 1");
        SphereRule s;
        const Rule1D gl = gauss_legendre(n_theta);
        std::vector<double> cphi(n_phi), sphi(n_phi);
        const bool even = (n_phi % 2 == 0);
        const int half = even ? n_phi / 2 : n_phi;
        for (int j = 0; j < half; ++j) {
            const double phi = 2.0 * pi * (j + 0.5) / n_phi;
            cphi[j] = std::cos(phi);
            sphi[j] = std::sin(phi);
            if (even) {
                cphi[j + half] = -cphi[j];
                sphi[j + half] = -sphi[j];
            }
        }
        const double wphi = 2.0 * pi / n_phi;
        s.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
        s.weights.reserve(s.nodes.capacity());
        for (int i = 0; i < n_theta; ++i) {
            const double c = gl.nodes[i];
            const double st = std::sqrt(std::max(0.0, (1.0 - c) * (1.0 + c)));
            for (int j = 0; j < n_phi; ++j) {
                s.nodes.push_back({st * cphi[j], st * sphi[j], c});
                s.weights.push_back(gl.weights[i] * wphi);
            }
        }
        if (even) {
            s.antipodal = true;
            s.antipode.resize(s.size());
            for (int i = 0; i < n_theta; ++i)
                for (int j = 0; j < n_phi; ++j) {
                    const std::size_t a = static_cast<std::size_t>(i) * n_phi + j;
                    const std::size_t b =
                        static_cast<std::size_t>(n_theta - 1 - i) * n_phi + (j + half) % n_phi;
                    s.antipode[a] = b;
                }
        }
        return s;
    }
};

template <class F>
double integrate_sphere(const SphereRule& s, F&& f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += s.weights[i] * f(s.nodes[i]);
    return acc;
}

// Tensor Gauss-Legendre rule on the cube [-extent, extent]^3.
struct BoxRule {
    double extent = 1.0;
    Rule1D axis;

    static BoxRule cube(int n_per_axis, double extent) {
        if (!(extent > 0.0)) throw std::invalid_argument("BoxRule: extent must be > 0");
        BoxRule b;
        b.extent = extent;
        b.axis = mapped(gauss_legendre(n_per_axis), -extent, extent);
        return b;
    }

    std::size_t size() const { return axis.size() * axis.size() * axis.size(); }

    Vec3 node(std::size_t flat) const {
        const std::size_t n = axis.size();
        return {axis.nodes[flat / (n * n)], axis.nodes[(flat / n) % n], axis.nodes[flat % n]};
    }
    double weight(std::size_t flat) const {
        const std::size_t n = axis.size();
        return axis.weights[flat / (n * n)] * axis.weights[(flat / n) % n] * axis.weights[flat % n];
    }
};

template <class F>
double integrate_box(const BoxRule& b, F&& f, const ExecPolicy& exec = {}) {
    return parallel_sum(b.size(), exec, [&](std::size_t i) { return b.weight(i) * f(b.node(i)); });
}

enum class PanelLayout { Uniform, Geometric };

// Composite Gauss-Legendre rule on [0, t]. The geometric layout halves the
// panel widths toward 0 and is meant for long horizons where the integrand
// decays; panel k of P spans [t*2^(k-P), t*2^(k+1-P)] with the first panel
// closed at 0.
struct TimeRule {
    int panels = 8;
    int nodes_per_panel = 4;
    PanelLayout layout = PanelLayout::Uniform;

    std::vector<double> boundaries(double t) const {
        std::vector<double> b(panels + 1);
        b[0] = 0.0;
        b[panels] = t;
        for (int k = 1; k < panels; ++k)
            b[k] = layout == PanelLayout::Uniform ? t * k / panels
                                                  : t * std::ldexp(1.0, k - panels);
        return b;
    }

    Rule1D rule(double t) const {
        if (!(t >= 0.0)) throw std::invalid_argument("TimeRule: t must be >= 0");
        Rule1D out;
        if (t == 0.0) return out;
        const Rule1D base = gauss_legendre(nodes_per_panel);
        const auto b = boundaries(t);
        for (int k = 0; k < panels; ++k) {
            const Rule1D panel = mapped(base, b[k], b[k + 1]);
            out.nodes.insert(out.nodes.end(), panel.nodes.begin(), panel.nodes.end());
            out.weights.insert(out.weights.end(), panel.weights.begin(), panel.weights.end());
        }
        return out;
    }
};

template <class F>
double integrate_time(const TimeRule& tr, double t, F&& f) {
    const Rule1D r = tr.rule(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) acc += r.weights[i] * f(r.nodes[i]);
    return acc;
}

// Improper integrals over R or [0, inf) via the tangent map s = scale*tan(u)
// with composite Gauss-Legendre in u. Absolutely integrable integrands with
// algebraic decay become bounded in u, e.g. <s>^-p for p > 1.
struct LineRule {
    int panels = 16;
    int nodes_per_panel = 8;
    double scale = 1.0;

    template <class F>
    double integrate_real_line(F&& f) const {
        return integrate_u(-0.5 * pi, 0.5 * pi, f);
    }

    template <class F>
    double integrate_half_line(F&& f) const {
        return integrate_u(0.0, 0.5 * pi, f);
    }

private:
    template <class F>
    double integrate_u(double lo, double hi, F&& f) const {
        const Rule1D base = gauss_legendre(nodes_per_panel);
        double acc = 0.0;
        for (int k = 0; k < panels; ++k) {
            const double a = lo + (hi - lo) * k / panels;
            const double b = lo + (hi - lo) * (k + 1) / panels;
            const Rule1D panel = mapped(base, a, b);
            for (std::size_t i = 0; i < panel.size(); ++i) {
                const double u = panel.nodes[i];
                const double c = std::cos(u);
                const double jac = scale / (c * c);
                acc += panel.weights[i] * jac * f(scale * std::tan(u));
            }
        }
        return acc;
    }
};

// Radial rule for integrals over R^3 in spherical form around a center:
// integral f = int_0^inf r^2 int_S2 f(c + r sigma) dsigma dr, with the
// radial half-line handled by LineRule's tangent map.
template <class F>
double integrate_radial_sphere(const LineRule& radial, const SphereRule& sph, const Vec3& center,
                               F&& f) {
    return radial.integrate_half_line([&](double r) {
        return r * r * integrate_sphere(sph, [&](const Vec3& sigma) { return f(center + r * sigma, r, sigma); });
    });
}

} // namespace wkh
