#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkh/bounds.hpp"
#include "wkh/collision.hpp"
#include "wkh/marginal.hpp"
#include "wkh/norm.hpp"
#include "wkh/quadrature.hpp"
#include "wkh/solver.hpp"

namespace wkh {

// Coupling operator of the finite hierarchy: C^lambda_{j,k+2} maps an
// order-(k+2) marginal to a function of k particles. The marginal sees
// positions (X_k, x_j, x_j) and the lambda-specific velocity list, with
// (v_j, v_{k+1}) in the (v, v1) roles of the sphere parametrization:
//   L0: slot j <- v_{k+1}, appended (v2, v3)     L1: appended (v2, v3)
//   L2: appended (v_{k+1}, v3)                   L3: appended (v_{k+1}, v2)
template <class M>
double hierarchy_collision_fn(LTerm lam, int j, int order, M&& m, std::span<const Vec3> X,
                              std::span<const Vec3> V, const CollisionQuad& q) {
    const int k = order - 2;
    if (k < 1) throw std::invalid_argument("hierarchy_collision: order must be >= 3");
    if (j < 1 || j > k) throw std::invalid_argument("hierarchy_collision: slot out of range");
    if (static_cast<int>(X.size()) != k || static_cast<int>(V.size()) != k)
        throw std::invalid_argument("hierarchy_collision: argument count does not match order");
    std::vector<Vec3> XA(static_cast<std::size_t>(order)), VA(static_cast<std::size_t>(order));
    std::copy(X.begin(), X.end(), XA.begin());
    std::copy(V.begin(), V.end(), VA.begin());
    XA[static_cast<std::size_t>(k)] = XA[static_cast<std::size_t>(k + 1)] =
        X[static_cast<std::size_t>(j - 1)];
    const Vec3 vj = V[static_cast<std::size_t>(j - 1)];
    const std::size_t sj = static_cast<std::size_t>(j - 1);
    const std::size_t sk = static_cast<std::size_t>(k);
    double acc = 0.0;
    for (std::size_t bi = 0; bi < q.box.size(); ++bi) {
        const Vec3 u = q.box.node(bi);
        const double kern = q.box.weight(bi) * norm(vj - u);
        if (kern == 0.0) continue;
        const Vec3 mid = 0.5 * (vj + u);
        const double r = 0.5 * norm(vj - u);
        double inner = 0.0;
        for (std::size_t si = 0; si < q.sphere.size(); ++si) {
            const Vec3 half = r * q.sphere.nodes[si];
            const Vec3 v2 = mid + half;
            const Vec3 v3 = mid - half;
            switch (lam) {
            case LTerm::L0: VA[sj] = u;  VA[sk] = v2; VA[sk + 1] = v3; break;
            case LTerm::L1: VA[sj] = vj; VA[sk] = v2; VA[sk + 1] = v3; break;
            case LTerm::L2: VA[sj] = vj; VA[sk] = u;  VA[sk + 1] = v3; break;
            case LTerm::L3: VA[sj] = vj; VA[sk] = u;  VA[sk + 1] = v2; break;
            }
            inner += q.sphere.weights[si] * m(std::span<const Vec3>(XA), std::span<const Vec3>(VA));
        }
        acc += kern * inner;
    }
    return collision_prefactor * acc;
}

inline double hierarchy_collision(LTerm lam, int j, const Marginal& m, std::span<const Vec3> X,
                                  std::span<const Vec3> V, const CollisionQuad& q) {
    return hierarchy_collision_fn(
        lam, j, m.order(), [&m](std::span<const Vec3> XX, std::span<const Vec3> VV) { return m(XX, VV); },
        X, V, q);
}

struct GainLoss {
    double gain = 0.0; // L0 + L1
    double loss = 0.0; // L2 + L3
};

inline GainLoss hierarchy_slot_split(int j, const Marginal& m, std::span<const Vec3> X,
                                     std::span<const Vec3> V, const CollisionQuad& q) {
    return {hierarchy_collision(LTerm::L0, j, m, X, V, q) +
                hierarchy_collision(LTerm::L1, j, m, X, V, q),
            hierarchy_collision(LTerm::L2, j, m, X, V, q) +
                hierarchy_collision(LTerm::L3, j, m, X, V, q)};
}

// Full coupling C^{k+2} = sum_j (gain_j - loss_j). Built from the same
// per-term evaluations as hierarchy_slot_split, so the gain/loss regrouping
// is the identical floating-point expression.
inline double hierarchy_collision_sum(const Marginal& m, std::span<const Vec3> X,
                                      std::span<const Vec3> V, const CollisionQuad& q) {
    const int k = m.order() - 2;
    double acc = 0.0;
    for (int j = 1; j <= k; ++j) {
        const GainLoss s = hierarchy_slot_split(j, m, X, V, q);
        acc += s.gain - s.loss;
    }
    return acc;
}

namespace detail {

inline auto section_of(const DistributionField& f, const Vec3& x) {
    return [&f, x](const Vec3& w) { return f(x, w); };
}

// Signed one-particle bracket of three sections at a point; collapses to the
// pointwise-cancelling grouping when all three share a payload.
inline double section_bracket(const DistributionField& g, const DistributionField& h,
                              const DistributionField& l, const Vec3& x, const Vec3& v,
                              const CollisionQuad& q) {
    if (g.shares_payload(h) && g.shares_payload(l))
        return eval_C_section(section_of(g, x), v, q).value;
    const auto sg = section_of(g, x), sh = section_of(h, x), sl = section_of(l, x);
    return eval_L(LTerm::L0, sg, sh, sl, v, q) + eval_L(LTerm::L1, sg, sh, sl, v, q) -
           eval_L(LTerm::L2, sg, sh, sl, v, q) - eval_L(LTerm::L3, sg, sh, sl, v, q);
}

} // namespace detail

// Product form on labeled components: the factors not at slot j come out of
// the integral, and what remains is the one-particle L-term of the slot-j
// and the two appended sections at x_j. Agrees with the direct quadrature on
// shared nodes up to reassociation.
inline double hierarchy_collision_factored(LTerm lam, int j, const Marginal& m,
                                           std::span<const Vec3> X, std::span<const Vec3> V,
                                           const CollisionQuad& q) {
    const int k = m.order() - 2;
    if (k < 1) throw std::invalid_argument("hierarchy_collision: order must be >= 3");
    if (j < 1 || j > k) throw std::invalid_argument("hierarchy_collision: slot out of range");
    if (static_cast<int>(X.size()) != k || static_cast<int>(V.size()) != k)
        throw std::invalid_argument("hierarchy_collision: argument count does not match order");
    double acc = 0.0;
    for (const auto& c : m.parts()) {
        double spectator = c.weight;
        for (int i = 1; i <= k && spectator != 0.0; ++i)
            if (i != j)
                spectator *= c.factors[static_cast<std::size_t>(i - 1)](
                    X[static_cast<std::size_t>(i - 1)], V[static_cast<std::size_t>(i - 1)]);
        if (spectator == 0.0) continue;
        const Vec3 xj = X[static_cast<std::size_t>(j - 1)];
        const auto sg = detail::section_of(c.factors[static_cast<std::size_t>(j - 1)], xj);
        const auto sh = detail::section_of(c.factors[static_cast<std::size_t>(k)], xj);
        const auto sl = detail::section_of(c.factors[static_cast<std::size_t>(k + 1)], xj);
        acc += spectator * eval_L(lam, sg, sh, sl, V[static_cast<std::size_t>(j - 1)], q);
    }
    return acc;
}

// Signed slot bracket (gain - loss at one j) through the product form.
inline double hierarchy_slot_sum_factored(int j, const Marginal& m, std::span<const Vec3> X,
                                          std::span<const Vec3> V, const CollisionQuad& q) {
    const int k = m.order() - 2;
    if (k < 1) throw std::invalid_argument("hierarchy_collision: order must be >= 3");
    if (j < 1 || j > k) throw std::invalid_argument("hierarchy_collision: slot out of range");
    if (static_cast<int>(X.size()) != k || static_cast<int>(V.size()) != k)
        throw std::invalid_argument("hierarchy_collision: argument count does not match order");
    double acc = 0.0;
    for (const auto& c : m.parts()) {
        double spectator = c.weight;
        for (int i = 1; i <= k && spectator != 0.0; ++i)
            if (i != j)
                spectator *= c.factors[static_cast<std::size_t>(i - 1)](
                    X[static_cast<std::size_t>(i - 1)], V[static_cast<std::size_t>(i - 1)]);
        if (spectator == 0.0) continue;
        acc += spectator * detail::section_bracket(
                               c.factors[static_cast<std::size_t>(j - 1)],
                               c.factors[static_cast<std::size_t>(k)],
                               c.factors[static_cast<std::size_t>(k + 1)],
                               X[static_cast<std::size_t>(j - 1)],
                               V[static_cast<std::size_t>(j - 1)], q);
    }
    return acc;
}

// Full coupling through the product form, order-(k+2) marginal to a new
// order-k marginal whose slot-j factor wraps the signed section bracket.
// Used by the nested Duhamel evaluations, where the contracted marginal is
// transported and contracted again.
inline Marginal hierarchy_contract(int j, const Marginal& m, const CollisionQuad& q) {
    const int k = m.order() - 2;
    if (k < 1) throw std::invalid_argument("hierarchy_contract: order must be >= 3");
    if (j < 1 || j > k) throw std::invalid_argument("hierarchy_contract: slot out of range");
    std::vector<Marginal::Component> parts;
    parts.reserve(m.parts().size());
    for (const auto& c : m.parts()) {
        std::vector<DistributionField> factors(c.factors.begin(), c.factors.begin() + k);
        const DistributionField g = c.factors[static_cast<std::size_t>(j - 1)];
        const DistributionField h = c.factors[static_cast<std::size_t>(k)];
        const DistributionField l = c.factors[static_cast<std::size_t>(k + 1)];
        factors[static_cast<std::size_t>(j - 1)] =
            DistributionField::formula([g, h, l, q](const Vec3& x, const Vec3& v) {
                return detail::section_bracket(g, h, l, x, v, q);
            });
        parts.push_back({c.weight, std::move(factors)});
    }
    return Marginal::assemble(std::move(parts));
}

// Mild-hierarchy data at one level pair: f^(k)(t), f^(k+2)(t) and the datum.
struct HierarchyEvolution {
    int k = 1;
    std::function<Marginal(double)> level_k;
    std::function<Marginal(double)> level_kp2;
    Marginal initial;
};

struct ResidualConfig {
    CollisionQuad quad = CollisionQuad::make(6, 3.5, 4, 4);
    TimeRule time{4, 3, PanelLayout::Uniform};
    WeightParams weights{};
    GridSpec probe_box{1.0, 3.5, 2, 4, NodeLayout::Uniform};
    int probes = 8;
    int time_samples = 3;
    std::uint64_t seed = 0;
};

// Weighted sup over probe tuples and report times of the mild-hierarchy
// defect  T_k^{-t} f^(k)(t) - f_0^(k) - int_0^t T_k^{-s} C^{k+2} f^(k+2)(s) ds.
inline double duhamel_residual(const HierarchyEvolution& evo, double t_final,
                               const ResidualConfig& cfg) {
    if (evo.k < 1) throw std::invalid_argument("duhamel_residual: k must be >= 1");
    if (!evo.level_k || !evo.level_kp2)
        throw std::invalid_argument("duhamel_residual: missing level evaluators");
    if (evo.initial.order() != evo.k || evo.level_k(0.0).order() != evo.k ||
        evo.level_kp2(0.0).order() != evo.k + 2)
        throw std::invalid_argument("duhamel_residual: inconsistent marginal orders");
    const auto probes = sample_tuples(cfg.probe_box, evo.k, cfg.probes, cfg.seed);
    const std::size_t np = probes.size();
    std::vector<Vec3> xs(static_cast<std::size_t>(evo.k));
    double worst = 0.0;
    for (int ti = 1; ti <= cfg.time_samples; ++ti) {
        const double t = t_final * ti / cfg.time_samples;
        std::vector<double> integral(np, 0.0);
        const Rule1D r = cfg.time.rule(t);
        for (std::size_t si = 0; si < r.size(); ++si) {
            const double s = r.nodes[si];
            const Marginal ms = evo.level_kp2(s);
            for (std::size_t p = 0; p < np; ++p) {
                for (int i = 0; i < evo.k; ++i)
                    xs[static_cast<std::size_t>(i)] = probes[p].X[static_cast<std::size_t>(i)] +
                                                      s * probes[p].V[static_cast<std::size_t>(i)];
                double bracket = 0.0;
                for (int j = 1; j <= evo.k; ++j)
                    bracket += hierarchy_slot_sum_factored(j, ms, xs, probes[p].V, cfg.quad);
                integral[p] += r.weights[si] * bracket;
            }
        }
        const Marginal mt = evo.level_k(t);
        for (std::size_t p = 0; p < np; ++p) {
            for (int i = 0; i < evo.k; ++i)
                xs[static_cast<std::size_t>(i)] = probes[p].X[static_cast<std::size_t>(i)] +
                                                  t * probes[p].V[static_cast<std::size_t>(i)];
            const double defect =
                mt(xs, probes[p].V) - evo.initial(probes[p].X, probes[p].V) - integral[p];
            const double val =
                std::abs(defect) * tuple_weight(cfg.weights, probes[p].X, probes[p].V);
            if (val > worst) worst = val;
        }
    }
    return worst;
}

// Grid field at an intermediate time, linearly blended between the stored
// transported-frame slices.
inline DistributionField state_field_at(const PicardState& s, double t) {
    if (s.empty()) throw std::logic_error("state_field_at: empty state");
    return DistributionField::grid(s.slices.front().spec(), detail::blend_values(s, t));
}

struct MixtureSolveConfig {
    SolverConfig base;
    double mu = 0.0; // 0: minimal admissible for the weight constant, plus margin
    int norm_probes = 32;
    std::uint64_t seed = 0;
};

// Per-component solutions assembled into hierarchy marginals
// F^(k)(t) = sum_i w_i h_i(t)^{tensor k}.
struct MixtureSolution {
    std::vector<double> weights;
    std::vector<PicardState> components;
    std::vector<SolveReport> reports;
    std::vector<double> times;
    double mu = 0.0;
    double mu_prime = 0.0;
    double transported_bound = 0.0; // max over k, t, probes of e^{mu k} (weighted value)

    // physical one-particle solution h_i(t)
    DistributionField component_at(std::size_t i, double t) const {
        return transport(state_field_at(components.at(i), t), t);
    }

    // physical k-particle marginal at time t
    Marginal level(int k, double t) const {
        std::vector<DistributionField> fields;
        fields.reserve(components.size());
        for (std::size_t i = 0; i < components.size(); ++i) fields.push_back(component_at(i, t));
        return Marginal::mixture(weights, fields, k);
    }
};

inline MixtureSolution mixture_solution(const MixtureData& mix, int k_max,
                                        const MixtureSolveConfig& cfg) {
    mix.validate();
    if (k_max < 1) throw std::invalid_argument("mixture_solution: k_max must be >= 1");
    const double C = constant_C(cfg.base.weights);
    const double mu = cfg.mu != 0.0 ? cfg.mu : 0.5 * std::log(32.0 * C) + 0.01;
    if (!(std::exp(2.0 * mu) > 32.0 * C))
        throw std::invalid_argument("mixture_solution: need e^{2 mu} > 32 C");
    const double mu_prime = mu + std::log(2.0);
    const double cap = std::exp(-mu_prime);
    const auto sampler = cfg.base.sampler();
    for (const auto& h : mix.components) {
        // the solver evolves the grid projection, so the regime gate must
        // measure the projection, not the formula
        const DistributionField hg = DistributionField::sample(
            cfg.base.grid, [&](const Vec3& x, const Vec3& v) { return h(x, v); });
        const double nh = weighted_norm(hg, cfg.base.weights, sampler);
        if (nh > cap * (1.0 + 1e-12))
            throw std::invalid_argument("mixture_solution: component outside the solver regime");
    }
    MixtureSolution out;
    out.weights = mix.weights;
    out.mu = mu;
    out.mu_prime = mu_prime;
    SolverConfig sc = cfg.base;
    sc.ball_radius = std::exp(-mu);
    for (const auto& h : mix.components) {
        PicardState st = zero_state(sc);
        out.reports.push_back(picard_solve(st, h, sc));
        out.components.push_back(std::move(st));
    }
    out.times = out.components.front().times;

    // transported-frame bound: T_k^{-t} F^(k)(t) is the mixture of stored
    // slices, so the e^{mu k}-scaled weighted values must stay below 1
    for (int k = 1; k <= k_max; ++k) {
        const auto tuples = sample_tuples(cfg.base.grid, k, cfg.norm_probes, cfg.seed + k);
        for (double t : out.times) {
            std::vector<DistributionField> fields;
            fields.reserve(out.components.size());
            for (const auto& st : out.components) fields.push_back(state_field_at(st, t));
            const Marginal g = Marginal::mixture(out.weights, fields, k);
            const double val =
                std::exp(mu * k) * marginal_norm(g, cfg.base.weights, tuples);
            if (val > out.transported_bound) out.transported_bound = val;
        }
    }
    if (out.transported_bound > 1.0)
        throw std::runtime_error("mixture_solution: transported hierarchy bound exceeded 1");
    return out;
}

struct AdmissibilityConfig {
    double x_extent = 4.0;
    double v_extent = 4.0;
    int nodes = 12; // per-axis Gauss-Legendre nodes of each 3d factor
    int probes = 4;
    int samples = 200;
    std::uint64_t seed = 0;
    double tol = 1e-6;
};

struct AdmissibilityReport {
    double min_value = 0.0;
    double symmetry_gap = 0.0;
    double mass_defect = 0.0;
    std::vector<double> consistency; // per k < K, relative to the level-k scale
    double tol = 0.0;
    bool pass = false;
};

// Admissibility of a marginal sequence g^(1..K): nonnegativity and symmetry
// spot checks, unit mass of g^(1) on the truncated box, and the consistency
// identity  int g^(k+1) dx_{k+1} dv_{k+1} = g^(k)  by quadrature.
inline AdmissibilityReport admissibility_check(const std::vector<Marginal>& seq,
                                               const AdmissibilityConfig& cfg) {
    if (seq.size() < 2) throw std::invalid_argument("admissibility_check: need K >= 2 levels");
    for (std::size_t i = 0; i < seq.size(); ++i)
        if (seq[i].order() != static_cast<int>(i) + 1)
            throw std::invalid_argument("admissibility_check: orders must be 1..K in sequence");
    const int K = static_cast<int>(seq.size());
    AdmissibilityReport rep;
    rep.tol = cfg.tol;

    const BoxRule xr = BoxRule::cube(cfg.nodes, cfg.x_extent);
    const BoxRule vr = BoxRule::cube(cfg.nodes, cfg.v_extent);

    double mass = 0.0;
    for (std::size_t xi = 0; xi < xr.size(); ++xi) {
        const Vec3 x = xr.node(xi);
        double inner = 0.0;
        for (std::size_t vi = 0; vi < vr.size(); ++vi) {
            const Vec3 v = vr.node(vi);
            inner += vr.weight(vi) * seq[0]({&x, 1}, {&v, 1});
        }
        mass += xr.weight(xi) * inner;
    }
    rep.mass_defect = std::abs(mass - 1.0);

    const GridSpec box{cfg.x_extent, cfg.v_extent, 2, 2, NodeLayout::Uniform};
    for (int k = 1; k < K; ++k) {
        const auto probes = sample_tuples(box, k, cfg.probes, cfg.seed + static_cast<std::uint64_t>(k));
        double gap = 0.0, scale = 0.0;
        for (const auto& p : probes) {
            std::vector<Vec3> X(p.X), V(p.V);
            X.push_back({});
            V.push_back({});
            double integral = 0.0;
            for (std::size_t xi = 0; xi < xr.size(); ++xi) {
                X.back() = xr.node(xi);
                double inner = 0.0;
                for (std::size_t vi = 0; vi < vr.size(); ++vi) {
                    V.back() = vr.node(vi);
                    inner += vr.weight(vi) * seq[static_cast<std::size_t>(k)](X, V);
                }
                integral += xr.weight(xi) * inner;
            }
            const double base = seq[static_cast<std::size_t>(k - 1)](p.X, p.V);
            gap = std::max(gap, std::abs(integral - base));
            scale = std::max(scale, std::abs(base));
        }
        rep.consistency.push_back(scale > 0.0 ? gap / scale : gap);
    }

    const auto spots = sample_tuples(box, K, cfg.samples, cfg.seed + 101);
    for (const auto& p : spots) {
        const double val = seq.back()(p.X, p.V);
        rep.min_value = std::min(rep.min_value, val);
        if (K >= 2) {
            std::vector<Vec3> X(p.X), V(p.V);
            std::swap(X[0], X[1]);
            std::swap(V[0], V[1]);
            const double ex = seq.back()(X, V);
            const double scale = std::max({std::abs(val), std::abs(ex), 1e-300});
            rep.symmetry_gap = std::max(rep.symmetry_gap, std::abs(val - ex) / scale);
        }
    }

    bool ok = rep.mass_defect <= cfg.tol && rep.min_value >= -cfg.tol &&
              rep.symmetry_gap <= cfg.tol;
    for (double c : rep.consistency) ok = ok && c <= cfg.tol;
    rep.pass = ok;
    return rep;
}

struct AprioriHierConfig {
    CollisionQuad quad = CollisionQuad::make(8, 6.0, 6, 6);
    TimeRule time{4, 4, PanelLayout::Uniform};
    GridSpec sample_box{3.0, 6.0, 3, 7, NodeLayout::Uniform};
    int norm_tuples = 4000;
    int probes = 12;
    std::uint64_t seed = 0;
};

// A priori estimate at hierarchy level k, one coupling term: the weighted
// time integral of T_k^{-s} C^lambda_{j,k+2} g^(k+2)(s) at probe tuples
// against  C_{p,q,alpha,beta} |||T_{k+2}^{-(.)} g^(k+2)|||.  The datum is
// fed in as the transported family g(s) = T_{k+2}^s m, whose transported
// norm is the norm of m itself.
inline BoundReport verify_apriori_hierarchy(int k, int j, LTerm lam, const Marginal& m,
                                            const WeightParams& w, double T,
                                            const AprioriHierConfig& cfg = {}) {
    if (m.order() != k + 2)
        throw std::invalid_argument("verify_apriori_hierarchy: marginal order must be k + 2");
    BoundReport rep;
    rep.lemma = "apriori hierarchy";
    const auto norm_tuples = diagonal_tuples(cfg.sample_box, k + 2, cfg.norm_tuples, cfg.seed);
    const double rhs = constant_C(w) * marginal_norm(m, w, norm_tuples);
    const auto probes = sample_tuples(cfg.sample_box, k, cfg.probes, cfg.seed + 1);
    const Rule1D r = cfg.time.rule(T);
    std::vector<std::vector<Vec3>> shifted(probes.size());
    std::vector<double> acc(probes.size(), 0.0);
    for (std::size_t si = 0; si < r.size(); ++si) {
        const double s = r.nodes[si];
        const Marginal ms = m.transported(s);
        for (std::size_t p = 0; p < probes.size(); ++p) {
            auto& xs = shifted[p];
            xs = probes[p].X;
            for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = xs[i] + s * probes[p].V[i];
            acc[p] += r.weights[si] *
                      hierarchy_collision_factored(lam, j, ms, xs, probes[p].V, cfg.quad);
        }
    }
    for (std::size_t p = 0; p < probes.size(); ++p) {
        const double lhs =
            std::abs(acc[p]) * tuple_weight(w, probes[p].X, probes[p].V);
        rep.note(lhs, rhs, detail::describe("k=%d j=%d lam=%d probe=%zu", k, j,
                                            static_cast<int>(lam), p));
    }
    rep.finalize();
    return rep;
}

} // namespace wkh
