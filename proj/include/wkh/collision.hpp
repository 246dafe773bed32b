#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

#include "wkh/exec.hpp"
#include "wkh/field.hpp"
#include "wkh/quadrature.hpp"
#include "wkh/vec3.hpp"

namespace wkh {

// Quadrature configuration for the collision integrals: after the sphere
// parametrization of the two delta constraints, every term is
//   2^-3 int_box dv1 int_S2 dsigma |v - v1| * (product of three sections)
// with v2 = (v+v1)/2 + (|v-v1|/2) sigma and v3 its antipodal partner.
struct CollisionQuad {
    BoxRule box;
    SphereRule sphere;

    static CollisionQuad make(int n_box, double extent, int n_theta, int n_phi) {
        return {BoxRule::cube(n_box, extent), SphereRule::product(n_theta, n_phi)};
    }
};

enum class LTerm { L0, L1, L2, L3 };

inline constexpr double collision_prefactor = 0.125; // 2^-d at d = 3

// L_j(g, h, l)(v) for single-particle velocity profiles g, h, l. The four
// argument patterns, all integrated against the same parametrized measure:
//   L0: g(v1) h(v2) l(v3)    L1: g(v) h(v2) l(v3)
//   L2: g(v) h(v1) l(v3)     L3: g(v) h(v1) l(v2)
template <class G, class H, class L>
double eval_L(LTerm j, G&& g, H&& h, L&& l, const Vec3& v, const CollisionQuad& q) {
    const double gv = (j == LTerm::L0) ? 0.0 : g(v);
    double acc = 0.0;
    for (std::size_t bi = 0; bi < q.box.size(); ++bi) {
        const Vec3 v1 = q.box.node(bi);
        const double kern = q.box.weight(bi) * norm(v - v1);
        if (kern == 0.0) continue;
        const Vec3 mid = 0.5 * (v + v1);
        const double r = 0.5 * norm(v - v1);
        double inner = 0.0;
        switch (j) {
        case LTerm::L0:
            for (std::size_t si = 0; si < q.sphere.size(); ++si) {
                const Vec3 half = r * q.sphere.nodes[si];
                inner += q.sphere.weights[si] * h(mid + half) * l(mid - half);
            }
            inner *= g(v1);
            break;
        case LTerm::L1:
            for (std::size_t si = 0; si < q.sphere.size(); ++si) {
                const Vec3 half = r * q.sphere.nodes[si];
                inner += q.sphere.weights[si] * h(mid + half) * l(mid - half);
            }
            inner *= gv;
            break;
        case LTerm::L2: {
            double lsum = 0.0;
            for (std::size_t si = 0; si < q.sphere.size(); ++si)
                lsum += q.sphere.weights[si] * l(mid - r * q.sphere.nodes[si]);
            inner = gv * h(v1) * lsum;
            break;
        }
        case LTerm::L3: {
            double lsum = 0.0;
            for (std::size_t si = 0; si < q.sphere.size(); ++si)
                lsum += q.sphere.weights[si] * l(mid + r * q.sphere.nodes[si]);
            inner = gv * h(v1) * lsum;
            break;
        }
        }
        acc += kern * inner;
    }
    return collision_prefactor * acc;
}

// Velocity profile overload: fields are evaluated at x = 0, which is the
// whole story for formula profiles of v and for homogeneous (nx = 1) grids.
inline double eval_L(LTerm j, const DistributionField& g, const DistributionField& h,
                     const DistributionField& l, const Vec3& v, const CollisionQuad& q) {
    auto sec = [](const DistributionField& f) {
        return [&f](const Vec3& w) { return f(Vec3{}, w); };
    };
    return eval_L(j, sec(g), sec(h), sec(l), v, q);
}

struct CollisionValue {
    double value = 0.0;    // L0 + L1 - L2 - L3
    double gain_mag = 0.0; // integral of |L0 integrand| + |L1 integrand|
};

// Full collision operator on a velocity section, in one pass over the
// quadrature so the gain/loss cancellation happens pointwise per node:
//   f2 f3 (f0 + f1) - f0 f1 (f2 + f3).
// In this grouping an equilibrium section annihilates to roundoff relative
// to gain_mag, node by node.
template <class F>
CollisionValue eval_C_section(F&& f, const Vec3& v, const CollisionQuad& q) {
    const double f0 = f(v);
    double acc = 0.0, mag = 0.0;
    for (std::size_t bi = 0; bi < q.box.size(); ++bi) {
        const Vec3 v1 = q.box.node(bi);
        const double kern = q.box.weight(bi) * norm(v - v1);
        if (kern == 0.0) continue;
        const double f1 = f(v1);
        const Vec3 mid = 0.5 * (v + v1);
        const double r = 0.5 * norm(v - v1);
        double inner = 0.0, inner_mag = 0.0;
        for (std::size_t si = 0; si < q.sphere.size(); ++si) {
            const Vec3 half = r * q.sphere.nodes[si];
            const double f2 = f(mid + half);
            const double f3 = f(mid - half);
            const double w = q.sphere.weights[si];
            inner += w * (f2 * f3 * (f0 + f1) - f0 * f1 * (f2 + f3));
            inner_mag += w * std::abs(f2 * f3) * (std::abs(f0) + std::abs(f1));
        }
        acc += kern * inner;
        mag += kern * inner_mag;
    }
    return {collision_prefactor * acc, collision_prefactor * mag};
}

inline CollisionValue eval_C_with_gain(const DistributionField& f, const Vec3& x, const Vec3& v,
                                       const CollisionQuad& q) {
    return eval_C_section([&](const Vec3& w) { return f(x, w); }, v, q);
}

inline double eval_C(const DistributionField& f, const Vec3& x, const Vec3& v,
                     const CollisionQuad& q) {
    return eval_C_with_gain(f, x, v, q).value;
}

// Weak form of the collision operator against a velocity test function:
//   int C[f] phi dv = (1/4) int int int (parametrized measure)
//                     [f2 f3 (f0+f1) - f0 f1 (f2+f3)] (phi0 + phi1 - phi2 - phi3).
// The outer v integral reuses the box rule. For phi in the span of
// {1, v, |v|^2} the last factor vanishes pointwise at the quadrature nodes
// up to roundoff, so the value is exactly the conservation defect.
struct WeakFormValue {
    double value = 0.0;
    double scale = 0.0; // same integral with |integrand| factors, for relative tolerances
};

template <class F, class Phi>
WeakFormValue weak_form_section(F&& f, Phi&& phi, const CollisionQuad& q) {
    double acc = 0.0, mag = 0.0;
    for (std::size_t oi = 0; oi < q.box.size(); ++oi) {
        const Vec3 v = q.box.node(oi);
        const double wv = q.box.weight(oi);
        const double f0 = f(v);
        const double phi0 = phi(v);
        double mid_acc = 0.0, mid_mag = 0.0;
        for (std::size_t bi = 0; bi < q.box.size(); ++bi) {
            const Vec3 v1 = q.box.node(bi);
            const double kern = q.box.weight(bi) * norm(v - v1);
            if (kern == 0.0) continue;
            const double f1 = f(v1);
            const double phi1 = phi(v1);
            const Vec3 mid = 0.5 * (v + v1);
            const double r = 0.5 * norm(v - v1);
            double inner = 0.0, inner_mag = 0.0;
            for (std::size_t si = 0; si < q.sphere.size(); ++si) {
                const Vec3 half = r * q.sphere.nodes[si];
                const Vec3 v2 = mid + half;
                const Vec3 v3 = mid - half;
                const double f2 = f(v2);
                const double f3 = f(v3);
                const double bracket_f = f2 * f3 * (f0 + f1) - f0 * f1 * (f2 + f3);
                const double bracket_phi = (phi0 + phi1) - (phi(v2) + phi(v3));
                const double mag_f = std::abs(f2 * f3) * (std::abs(f0) + std::abs(f1)) +
                                     std::abs(f0 * f1) * (std::abs(f2) + std::abs(f3));
                const double mag_phi =
                    std::abs(phi0) + std::abs(phi1) + std::abs(phi(v2)) + std::abs(phi(v3));
                inner += q.sphere.weights[si] * bracket_f * bracket_phi;
                inner_mag += q.sphere.weights[si] * mag_f * mag_phi;
            }
            mid_acc += kern * inner;
            mid_mag += kern * inner_mag;
        }
        acc += wv * mid_acc;
        mag += wv * mid_mag;
    }
    return {0.25 * collision_prefactor * acc, 0.25 * collision_prefactor * mag};
}

inline double weak_form_average(const DistributionField& f, const Vec3& x,
                                const std::function<double(const Vec3&)>& phi,
                                const CollisionQuad& q) {
    return weak_form_section([&](const Vec3& w) { return f(x, w); }, phi, q).value;
}

// C[f] sampled on the nodes of out_spec as a grid-backed field. Each node
// value is a self-contained quadrature, so the result does not depend on
// the execution policy beyond scheduling.
inline DistributionField collision_field(const DistributionField& f, const GridSpec& out_spec,
                                         const CollisionQuad& q, const ExecPolicy& exec = {}) {
    out_spec.validate();
    std::vector<double> vals(out_spec.node_count());
    const std::size_t nvc = out_spec.v_count();
    parallel_for(out_spec.x_count(), exec, [&](std::size_t xi) {
        const Vec3 x = out_spec.x_point(xi);
        auto sec = [&](const Vec3& w) { return f(x, w); };
        for (std::size_t vi = 0; vi < nvc; ++vi)
            vals[xi * nvc + vi] = eval_C_section(sec, out_spec.v_point(vi), q).value;
    });
    return DistributionField::grid(out_spec, std::move(vals));
}

} // namespace wkh
