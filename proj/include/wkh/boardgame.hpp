#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wkh/hierarchy.hpp"
#include "wkh/marginal.hpp"
#include "wkh/quadrature.hpp"

namespace wkh {

// History map mu: {k+2, k+4, ..., k+2n} -> positive integers with
// mu(j) < j - 1: which earlier particle each expansion step attaches to.
struct HistoryMap {
    int k = 1;
    int n = 2;
    std::vector<int> values; // values[i] = mu(k + 2(i+1))

    int domain(int i) const { return k + 2 * (i + 1); }

    int index_of(int j) const {
        if (j < k + 2 || j > k + 2 * n || (j - k) % 2 != 0)
            throw std::invalid_argument("HistoryMap: level outside the domain");
        return (j - k - 2) / 2;
    }

    int at(int j) const { return values[static_cast<std::size_t>(index_of(j))]; }

    void validate() const {
        if (k < 1 || n < 2) throw std::invalid_argument("HistoryMap: need k >= 1 and n >= 2");
        if (static_cast<int>(values.size()) != n)
            throw std::invalid_argument("HistoryMap: value count does not match n");
        for (int i = 0; i < n; ++i) {
            const int j = domain(i);
            const int v = values[static_cast<std::size_t>(i)];
            if (v < 1 || v >= j - 1)
                throw std::invalid_argument("HistoryMap: mu(j) must lie in [1, j-2]");
        }
    }

    auto operator<=>(const HistoryMap&) const = default;
};

inline bool is_echelon(const HistoryMap& mu) {
    for (int i = 0; i + 1 < mu.n; ++i)
        if (mu.values[static_cast<std::size_t>(i)] > mu.values[static_cast<std::size_t>(i + 1)])
            return false;
    return true;
}

// Board position: a history map together with the permutation sigma of the
// level set that tracks the time-simplex reshuffling.
struct BoardState {
    HistoryMap mu;
    std::vector<int> sigma; // sigma[i] = sigma(k + 2(i+1)), a permutation of the levels

    static BoardState initial(HistoryMap m) {
        BoardState s;
        s.sigma.resize(static_cast<std::size_t>(m.n));
        for (int i = 0; i < m.n; ++i) s.sigma[static_cast<std::size_t>(i)] = m.domain(i);
        s.mu = std::move(m);
        return s;
    }

    void validate() const {
        mu.validate();
        if (sigma.size() != mu.values.size())
            throw std::invalid_argument("BoardState: sigma size does not match n");
        std::vector<int> sorted(sigma);
        std::sort(sorted.begin(), sorted.end());
        for (int i = 0; i < mu.n; ++i)
            if (sorted[static_cast<std::size_t>(i)] != mu.domain(i))
                throw std::invalid_argument("BoardState: sigma is not a permutation of the levels");
    }

    auto operator<=>(const BoardState&) const = default;
};

inline std::int64_t history_count(int k, int n) {
    std::int64_t c = 1;
    for (int l = 1; l <= n; ++l) c *= k + 2 * l - 2;
    return c;
}

inline std::vector<HistoryMap> enumerate_histories(int k, int n,
                                                   std::int64_t cap = 2'000'000) {
    if (k < 1 || n < 2) throw std::invalid_argument("enumerate_histories: need k >= 1 and n >= 2");
    const std::int64_t total = history_count(k, n);
    if (total > cap) throw std::length_error("enumerate_histories: cap exceeded");
    std::vector<HistoryMap> out;
    out.reserve(static_cast<std::size_t>(total));
    HistoryMap mu{k, n, std::vector<int>(static_cast<std::size_t>(n), 1)};
    for (;;) {
        out.push_back(mu);
        int i = n - 1;
        for (; i >= 0; --i) {
            const int top = mu.domain(i) - 2; // largest admissible mu at this level
            if (mu.values[static_cast<std::size_t>(i)] < top) {
                ++mu.values[static_cast<std::size_t>(i)];
                break;
            }
            mu.values[static_cast<std::size_t>(i)] = 1;
        }
        if (i < 0) break;
    }
    return out;
}

// Levels j with mu(j+2) < mu(j): positions where the acceptable move applies.
inline std::vector<int> applicable_moves(const BoardState& s) {
    s.validate();
    std::vector<int> out;
    for (int i = 0; i + 1 < s.mu.n; ++i)
        if (s.mu.values[static_cast<std::size_t>(i + 1)] < s.mu.values[static_cast<std::size_t>(i)])
            out.push_back(s.mu.domain(i));
    return out;
}

namespace detail {

// value action of (j-1, j+1) o (j, j+2)
inline int move_value_map(int v, int j) {
    if (v == j) return j + 2;
    if (v == j + 2) return j;
    if (v == j - 1) return j + 1;
    if (v == j + 1) return j - 1;
    return v;
}

} // namespace detail

// One acceptable move at level j: mu' = (j-1,j+1) o (j,j+2) o mu o (j,j+2),
// sigma' = (j,j+2) o sigma. Explicitly, mu' exchanges the values at j and
// j+2 and conjugates every other value.
inline BoardState apply_move(const BoardState& s, int j) {
    const auto moves = applicable_moves(s);
    if (std::find(moves.begin(), moves.end(), j) == moves.end())
        throw std::invalid_argument("apply_move: move not applicable at this level");
    BoardState out = s;
    const int i = s.mu.index_of(j);
    for (int l = 0; l < s.mu.n; ++l) {
        const std::size_t sl = static_cast<std::size_t>(l);
        if (l == i)
            out.mu.values[sl] = s.mu.values[sl + 1];
        else if (l == i + 1)
            out.mu.values[sl] = s.mu.values[sl - 1];
        else
            out.mu.values[sl] = detail::move_value_map(s.mu.values[sl], j);
        out.sigma[sl] = detail::move_value_map(s.sigma[sl], j);
    }
    out.validate();
    return out;
}

struct ReductionResult {
    HistoryMap echelon;
    BoardState final_state;
    std::vector<int> trace; // levels at which moves were applied, in order
};

// Repeated smallest applicable move. The step cap guards against an
// implementation bug; the lexicographic measure strictly decreases, so the
// reduction terminates well before it.
inline ReductionResult reduce_to_echelon(const BoardState& s, std::int64_t cap = 0) {
    if (cap <= 0) {
        const std::int64_t m = history_count(s.mu.k, s.mu.n);
        cap = m * m;
    }
    ReductionResult out;
    out.final_state = s;
    out.final_state.validate();
    while (true) {
        const auto moves = applicable_moves(out.final_state);
        if (moves.empty()) break;
        if (static_cast<std::int64_t>(out.trace.size()) >= cap)
            throw std::runtime_error("reduce_to_echelon: step cap exceeded");
        out.trace.push_back(moves.front());
        out.final_state = apply_move(out.final_state, moves.front());
    }
    out.echelon = out.final_state.mu;
    return out;
}

// Histories grouped by the echelon form their sigma-identity reduction
// reaches. Classes are disjoint by construction; covering is checked by the
// caller against the enumeration count.
inline std::map<HistoryMap, std::vector<HistoryMap>> partition_classes(int k, int n) {
    std::map<HistoryMap, std::vector<HistoryMap>> classes;
    for (const auto& mu : enumerate_histories(k, n))
        classes[reduce_to_echelon(BoardState::initial(mu)).echelon].push_back(mu);
    return classes;
}

inline std::int64_t count_echelon(int k, int n) {
    std::int64_t c = 0;
    for (const auto& mu : enumerate_histories(k, n))
        if (is_echelon(mu)) ++c;
    const std::int64_t bound = std::int64_t{1} << (k + 3 * n - 2);
    if (c > bound) throw std::logic_error("count_echelon: monotone count exceeds 2^(k+3n-2)");
    return c;
}

inline Marginal swap_apply(const Marginal& f, int j) { return f.swapped(j); }

// Two-sided equality report: per-entry relative gap.
struct GapReport {
    std::string name;
    int samples = 0;
    double max_gap = 0.0;
    double tol = 0.0;
    bool pass = false;
    std::string worst;

    void note(double a, double b, const std::string& desc) {
        ++samples;
        const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
        const double gap = std::abs(a - b) / scale;
        if (gap >= max_gap) {
            max_gap = gap;
            worst = desc;
        }
    }

    void finalize() { pass = max_gap <= tol; }
};

namespace detail {

// argument permutation of S_{j,j+2} (1-based slots: j-1 <-> j+1, j <-> j+2)
inline void swap_args(std::vector<Vec3>& a, int j) {
    std::swap(a[static_cast<std::size_t>(j - 2)], a[static_cast<std::size_t>(j)]);
    std::swap(a[static_cast<std::size_t>(j - 1)], a[static_cast<std::size_t>(j + 1)]);
}

} // namespace detail

// Commutation of the pair swap past one coupling term:
//   S_{j,j+2} C^lam_{nu(mu_l), l} = C^lam_{mu_l, l} S_{j,j+2},
// nu = (j-1,j+1) o (j,j+2), evaluated with the same quadrature on both
// sides. The output order l-2 must exceed j+1 for the swap to act.
inline GapReport verify_identity_swap(LTerm lam, int ell, int j, int mu_ell, const Marginal& f,
                                      int probes, const CollisionQuad& q,
                                      const GridSpec& box = {2.0, 3.0, 2, 2, NodeLayout::Uniform},
                                      std::uint64_t seed = 0) {
    if (f.order() != ell) throw std::invalid_argument("verify_identity_swap: order mismatch");
    if (j < 2 || ell < j + 4)
        throw std::invalid_argument("verify_identity_swap: need ell >= j + 4 and j >= 2");
    if (mu_ell < 1 || mu_ell > ell - 2)
        throw std::invalid_argument("verify_identity_swap: mu(ell) out of range");
    GapReport rep;
    rep.name = "identity swap";
    rep.tol = 1e-12;
    const int slot_lhs = detail::move_value_map(mu_ell, j);
    const Marginal swapped_f = f.swapped(j);
    const auto tuples = sample_tuples(box, ell - 2, probes, seed);
    for (std::size_t p = 0; p < tuples.size(); ++p) {
        std::vector<Vec3> SX = tuples[p].X, SV = tuples[p].V;
        detail::swap_args(SX, j);
        detail::swap_args(SV, j);
        const double lhs = hierarchy_collision(lam, slot_lhs, f, SX, SV, q);
        const double rhs = hierarchy_collision(lam, mu_ell, swapped_f, tuples[p].X, tuples[p].V, q);
        rep.note(lhs, rhs, detail::describe("ell=%d j=%d mu=%d probe=%zu", ell, j, mu_ell, p));
    }
    rep.finalize();
    return rep;
}

// J_{n,k}(t_; mu) f, with the datum fed in as the transported family
// f(s) = T^s f0, evaluated at (X_k, V_k). times holds (t_{k+2}, ..., t_{k+2n}).
inline double history_value(const HistoryMap& mu, const Marginal& f0, std::span<const double> times,
                            std::span<const Vec3> X, std::span<const Vec3> V,
                            const CollisionQuad& q) {
    mu.validate();
    if (static_cast<int>(times.size()) != mu.n)
        throw std::invalid_argument("history_value: time count does not match n");
    if (f0.order() != mu.k + 2 * mu.n)
        throw std::invalid_argument("history_value: datum order must be k + 2n");
    Marginal cur = f0.transported(times[static_cast<std::size_t>(mu.n - 1)]);
    for (int i = mu.n - 1; i >= 1; --i) {
        cur = hierarchy_contract(mu.values[static_cast<std::size_t>(i)], cur, q);
        cur = cur.transported(times[static_cast<std::size_t>(i - 1)] -
                              times[static_cast<std::size_t>(i)]);
    }
    cur = hierarchy_contract(mu.values[0], cur, q);
    std::vector<Vec3> xs(X.begin(), X.end());
    for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = xs[i] + times[0] * V[i];
    return cur(xs, V);
}

struct InvarianceConfig {
    CollisionQuad quad = CollisionQuad::make(4, 3.0, 2, 2);
    int time_outer = 6;
    int time_inner = 6;
    GridSpec probe_box{1.0, 2.0, 2, 2, NodeLayout::Uniform};
    int probes = 8;
    std::uint64_t seed = 0;
    double tol = 1e-10;
};

// I_{n,k}(mu, sigma) f at one probe for n = 2: the time simplex
// {t >= t_{sigma(k+2)} >= t_{sigma(k+4)} >= 0} discretized with the outer
// Gauss-Legendre variable on the higher-ranked time, so that the sigma and
// sigma' regions use mirror images of one node set.
inline double duhamel_pair_value(const BoardState& s, const Marginal& f0, double t,
                                 std::span<const Vec3> X, std::span<const Vec3> V,
                                 const InvarianceConfig& cfg) {
    if (s.mu.n != 2) throw std::invalid_argument("duhamel_pair_value: implemented for n = 2");
    const std::size_t hi = static_cast<std::size_t>(s.mu.index_of(s.sigma[0]));
    const std::size_t lo = static_cast<std::size_t>(s.mu.index_of(s.sigma[1]));
    const Rule1D outer = mapped(gauss_legendre(cfg.time_outer), 0.0, t);
    const Rule1D base_inner = gauss_legendre(cfg.time_inner);
    double times[2];
    double acc = 0.0;
    for (std::size_t a = 0; a < outer.size(); ++a) {
        const double u = outer.nodes[a];
        const Rule1D inner = mapped(base_inner, 0.0, u);
        double row = 0.0;
        for (std::size_t b = 0; b < inner.size(); ++b) {
            times[hi] = u;
            times[lo] = inner.nodes[b];
            row += inner.weights[b] * history_value(s.mu, f0, {times, 2}, X, V, cfg.quad);
        }
        acc += outer.weights[a] * row;
    }
    return acc;
}

// Move invariance I(mu, sigma) = I(mu', sigma') on the minimal instance:
// both nested Duhamel integrals over identical node sets, where the
// antipodally paired sphere rule makes the proof's change of variables a
// relabeling of quadrature nodes. A state with no applicable move is
// compared to itself.
inline GapReport verify_move_invariance(const BoardState& s, const Marginal& f0, double t,
                                        const InvarianceConfig& cfg = {}) {
    if (!cfg.quad.sphere.antipodal)
        throw std::invalid_argument(
            "verify_move_invariance: antipodally symmetric sphere rule required");
    s.validate();
    const auto moves = applicable_moves(s);
    const BoardState other = moves.empty() ? s : apply_move(s, moves.front());
    if (!moves.empty()) {
        // the identity needs a datum symmetric under the pair swap at the
        // move level; spot-check before paying for the nested integrals
        const int j = moves.front();
        const auto spots = sample_tuples(cfg.probe_box, f0.order(), 4, cfg.seed + 17);
        for (const auto& tp : spots) {
            std::vector<Vec3> SX = tp.X, SV = tp.V;
            detail::swap_args(SX, j);
            detail::swap_args(SV, j);
            const double base = f0(tp.X, tp.V);
            const double mirrored = f0(SX, SV);
            const double scale = std::max({std::abs(base), std::abs(mirrored), 1e-300});
            if (std::abs(base - mirrored) > 1e-10 * scale)
                throw std::invalid_argument(
                    "verify_move_invariance: datum must be symmetric under the pair swap");
        }
    }
    GapReport rep;
    rep.name = "move invariance";
    rep.tol = cfg.tol;
    const auto tuples = sample_tuples(cfg.probe_box, s.mu.k, cfg.probes, cfg.seed);
    for (std::size_t p = 0; p < tuples.size(); ++p) {
        const double a = duhamel_pair_value(s, f0, t, tuples[p].X, tuples[p].V, cfg);
        const double b = duhamel_pair_value(other, f0, t, tuples[p].X, tuples[p].V, cfg);
        rep.note(a, b, detail::describe("probe=%zu", p));
    }
    rep.finalize();
    return rep;
}

} // namespace wkh
