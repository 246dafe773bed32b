#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "wkh/collision.hpp"
#include "wkh/exec.hpp"
#include "wkh/field.hpp"
#include "wkh/norm.hpp"
#include "wkh/quadrature.hpp"
#include "wkh/weights.hpp"

namespace wkh {

// Picard iteration for the mild form in the transported frame,
//   g(t) = f0 + int_0^t T^{-s} C[T^s g(s)] ds,   g = T^{-t} f(t).
// States hold grid-backed slices of g at the panel boundaries of the time
// rule; inside a panel g is interpolated linearly in time. With nx = 1 the
// slices are x-independent and transport drops out.
struct SolverConfig {
    WeightParams weights;
    GridSpec grid;
    CollisionQuad quad;
    TimeRule time{4, 2, PanelLayout::Uniform};
    double t_final = 1.0;
    double tol = 1e-6;
    int max_iter = 25;
    double ball_radius = 0.0; // M; 0 disables the ball checks
    int norm_samples = 2000;
    std::uint64_t norm_seed = 1;
    ExecPolicy exec;

    SupSampler sampler() const { return {grid, norm_samples, norm_seed}; }
};

struct PicardState {
    std::vector<double> times;
    std::vector<DistributionField> slices; // transported-frame g(times[i])

    bool empty() const { return slices.empty(); }

    // linear interpolation in time between stored slices
    double eval(double t, const Vec3& x, const Vec3& v) const {
        const auto [i, th] = locate(t);
        if (th == 0.0) return slices[i](x, v);
        return (1.0 - th) * slices[i](x, v) + th * slices[i + 1](x, v);
    }

    std::pair<std::size_t, double> locate(double t) const {
        if (times.empty()) throw std::logic_error("PicardState: empty state");
        if (t <= times.front()) return {0, 0.0};
        if (t >= times.back()) return {times.size() - 1, 0.0};
        std::size_t i = 1;
        while (times[i] < t) ++i;
        const double dt = times[i] - times[i - 1];
        return {i - 1, dt > 0.0 ? (t - times[i - 1]) / dt : 0.0};
    }
};

namespace detail {

inline std::vector<double> blend_values(const PicardState& s, double t) {
    const auto [i, th] = s.locate(t);
    std::vector<double> out = s.slices[i].values();
    if (th != 0.0) {
        const auto& hi = s.slices[i + 1].values();
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - th) * out[k] + th * hi[k];
    }
    return out;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace detail

inline PicardState zero_state(const SolverConfig& cfg) {
    PicardState st;
    st.times = cfg.time.boundaries(cfg.t_final);
    const std::vector<double> zeros(cfg.grid.node_count(), 0.0);
    for (std::size_t i = 0; i < st.times.size(); ++i)
        st.slices.push_back(DistributionField::grid(cfg.grid, zeros));
    return st;
}

// One application of the Picard map. The Duhamel integral accumulates panel
// by panel, so slice i receives exactly the quadrature of [0, times[i]].
inline PicardState phi_map(const PicardState& g, const DistributionField& f0,
                           const SolverConfig& cfg) {
    cfg.grid.validate();
    const std::vector<double> bounds = cfg.time.boundaries(cfg.t_final);
    if (g.times != bounds) throw std::invalid_argument("phi_map: state does not match time rule");

    const DistributionField f0g =
        f0.is_grid() && f0.spec() == cfg.grid
            ? f0
            : DistributionField::sample(
                  cfg.grid, [&](const Vec3& x, const Vec3& v) { return f0(x, v); });

    PicardState out;
    out.times = bounds;
    std::vector<double> running = f0g.values();
    out.slices.push_back(DistributionField::grid(cfg.grid, running));

    const Rule1D panel_base = gauss_legendre(cfg.time.nodes_per_panel);
    const std::size_t nvc = cfg.grid.v_count();
    for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
        const Rule1D panel = mapped(panel_base, bounds[k], bounds[k + 1]);
        for (std::size_t m = 0; m < panel.size(); ++m) {
            const double s = panel.nodes[m];
            const double w = panel.weights[m];
            const std::vector<double> blend = detail::blend_values(g, s);
            if (detail::max_abs(blend) == 0.0) continue;
            const DistributionField gs = DistributionField::grid(cfg.grid, blend);
            const auto* gd = gs.grid_data();
            parallel_for(cfg.grid.x_count(), cfg.exec, [&](std::size_t xi) {
                const Vec3 x = cfg.grid.x_point(xi);
                for (std::size_t vi = 0; vi < nvc; ++vi) {
                    const Vec3 v = cfg.grid.v_point(vi);
                    const Vec3 y = x + s * v;
                    auto section = [&](const Vec3& u) { return gd->interpolate(y - s * u, u); };
                    running[xi * nvc + vi] +=
                        w * eval_C_section(section, v, cfg.quad).value;
                }
            });
        }
        out.slices.push_back(DistributionField::grid(cfg.grid, running));
    }
    return out;
}

inline double state_distance(const PicardState& a, const PicardState& b, const SolverConfig& cfg) {
    if (a.times != b.times) throw std::invalid_argument("state_distance: mismatched time slices");
    double best = 0.0;
    for (std::size_t i = 0; i < a.slices.size(); ++i) {
        std::vector<double> diff = a.slices[i].values();
        const auto& bv = b.slices[i].values();
        for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= bv[k];
        best = std::max(
            best, weighted_norm(DistributionField::grid(cfg.grid, std::move(diff)), cfg.weights,
                                cfg.sampler()));
    }
    return best;
}

inline double state_norm(const PicardState& a, const SolverConfig& cfg) {
    double best = 0.0;
    for (const auto& sl : a.slices)
        best = std::max(best, weighted_norm(sl, cfg.weights, cfg.sampler()));
    return best;
}

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    std::vector<double> increments;
    double kappa_hat = 0.0; // max ratio of successive increments past the first
    double max_slice_norm = 0.0;
    double data_norm = 0.0;
};

// Picard iteration from the zero state. kappa_hat is the empirical
// contraction factor; in the small-data regime it stays below 1 and the
// increments collapse geometrically.
inline SolveReport picard_solve(PicardState& state, const DistributionField& f0,
                                const SolverConfig& cfg) {
    cfg.weights.validate();
    SolveReport rep;
    const DistributionField f0g =
        f0.is_grid() && f0.spec() == cfg.grid
            ? f0
            : DistributionField::sample(
                  cfg.grid, [&](const Vec3& x, const Vec3& v) { return f0(x, v); });
    rep.data_norm = weighted_norm(f0g, cfg.weights, cfg.sampler());
    if (cfg.ball_radius > 0.0 && rep.data_norm > 0.5 * cfg.ball_radius * (1.0 + 1e-12))
        throw std::invalid_argument("picard_solve: data norm exceeds half the contraction ball");

    state = zero_state(cfg);
    for (int it = 0; it < cfg.max_iter; ++it) {
        PicardState next = phi_map(state, f0g, cfg);
        const double inc = state_distance(next, state, cfg);
        rep.increments.push_back(inc);
        state = std::move(next);
        ++rep.iterations;
        rep.max_slice_norm = std::max(rep.max_slice_norm, state_norm(state, cfg));
        if (inc <= cfg.tol) {
            rep.converged = true;
            break;
        }
    }
    for (std::size_t i = 2; i < rep.increments.size(); ++i)
        if (rep.increments[i - 1] > 0.0)
            rep.kappa_hat = std::max(rep.kappa_hat, rep.increments[i] / rep.increments[i - 1]);
    return rep;
}

// Defect of the converged state in the mild equation, re-deriving the
// Duhamel integral with the same quadrature.
inline double mild_residual(const PicardState& state, const DistributionField& f0,
                            const SolverConfig& cfg) {
    const PicardState mapped_state = phi_map(state, f0, cfg);
    return state_distance(mapped_state, state, cfg);
}

struct ConservationReport {
    std::vector<double> times;
    std::vector<double> mass, energy;
    std::vector<Vec3> momentum;
    double mass_drift = 0.0, momentum_drift = 0.0, energy_drift = 0.0; // relative

    double max_drift() const { return std::max(mass_drift, std::max(momentum_drift, energy_drift)); }
};

// Moments of the transported-frame slices over the truncated box, by
// trapezoidal weights on the grid nodes (the exact integral of the
// interpolant along each axis). In the transported frame the x-integral of
// f(t) over all space equals that of g(t), so these are the global moments
// up to the box truncation.
inline ConservationReport conservation_report(const PicardState& state, const SolverConfig& cfg) {
    ConservationReport rep;
    rep.times = state.times;
    const GridSpec& gr = cfg.grid;
    auto axis_w = [](int n, double extent, int i) {
        if (n == 1) return 1.0;
        const double h = 2.0 * extent / (n - 1);
        return (i == 0 || i == n - 1) ? 0.5 * h : h;
    };
    std::vector<double> wx(gr.nx), wv(gr.nv);
    for (int i = 0; i < gr.nx; ++i) wx[i] = axis_w(gr.nx, gr.x_max, i);
    for (int i = 0; i < gr.nv; ++i) wv[i] = axis_w(gr.nv, gr.v_max, i);

    for (const auto& sl : state.slices) {
        double mass = 0.0, energy = 0.0;
        Vec3 mom{};
        const auto& vals = sl.values();
        const std::size_t nvc = gr.v_count();
        for (std::size_t xi = 0; xi < gr.x_count(); ++xi) {
            const std::size_t a = xi / (gr.nx * gr.nx), b = (xi / gr.nx) % gr.nx, c = xi % gr.nx;
            const double wxx = wx[a] * wx[b] * wx[c];
            for (std::size_t vi = 0; vi < nvc; ++vi) {
                const std::size_t d = vi / (gr.nv * gr.nv), e = (vi / gr.nv) % gr.nv,
                                  f = vi % gr.nv;
                const double w = wxx * wv[d] * wv[e] * wv[f];
                const double val = vals[xi * nvc + vi];
                const Vec3 v = gr.v_point(vi);
                mass += w * val;
                mom += (w * val) * v;
                energy += w * val * norm2(v);
            }
        }
        rep.mass.push_back(mass);
        rep.momentum.push_back(mom);
        rep.energy.push_back(energy);
    }
    const double m0 = std::abs(rep.mass.front());
    const double e0 = std::abs(rep.energy.front());
    const double vscale = m0 > 0.0 && e0 > 0.0 ? std::sqrt(e0 / m0) : 1.0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
        if (m0 > 0.0)
            rep.mass_drift = std::max(rep.mass_drift, std::abs(rep.mass[i] - rep.mass[0]) / m0);
        if (e0 > 0.0)
            rep.energy_drift =
                std::max(rep.energy_drift, std::abs(rep.energy[i] - rep.energy[0]) / e0);
        if (m0 > 0.0)
            rep.momentum_drift = std::max(
                rep.momentum_drift, norm(rep.momentum[i] - rep.momentum[0]) / (m0 * vscale));
    }
    return rep;
}

struct StabilityReport {
    double data_distance = 0.0;
    double solution_distance = 0.0;
    double ratio = 0.0; // 0 by convention when the data coincide
    SolveReport first, second;
};

inline StabilityReport stability_compare(const DistributionField& f0, const DistributionField& g0,
                                         const SolverConfig& cfg) {
    StabilityReport rep;
    PicardState a, b;
    rep.first = picard_solve(a, f0, cfg);
    rep.second = picard_solve(b, g0, cfg);
    std::vector<double> d0 = DistributionField::sample(cfg.grid, [&](const Vec3& x, const Vec3& v) {
                                 return f0(x, v) - g0(x, v);
                             }).values();
    rep.data_distance = weighted_norm(DistributionField::grid(cfg.grid, std::move(d0)),
                                      cfg.weights, cfg.sampler());
    rep.solution_distance = state_distance(a, b, cfg);
    rep.ratio = rep.data_distance > 0.0 ? rep.solution_distance / rep.data_distance : 0.0;
    return rep;
}

} // namespace wkh
