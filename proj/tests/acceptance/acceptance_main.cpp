// End-to-end acceptance gate. Each criterion runs the shipped interfaces the
// way a user would and prints one PASS/FAIL line with its key measurements
// and runtime. Exit code 0 means every selected criterion passed.
//
//   acceptance              run everything
//   acceptance --criterion 5 --criterion 6
//   acceptance --list

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "wkh/boardgame.hpp"
#include "wkh/bounds.hpp"
#include "wkh/collision.hpp"
#include "wkh/hierarchy.hpp"
#include "wkh/marginal.hpp"
#include "wkh/norm.hpp"
#include "wkh/quadrature.hpp"
#include "wkh/resonance.hpp"
#include "wkh/sampling.hpp"
#include "wkh/solver.hpp"

namespace {

using namespace wkh;

constexpr double pi = std::numbers::pi;

template <class... Args>
std::string fmt(const char* f, Args... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

struct Gate {
    bool pass = true;
    std::vector<std::string> notes;

    void check(bool ok, std::string what) {
        if (!ok) {
            pass = false;
            notes.push_back("FAIL " + std::move(what));
        }
    }
    void info(std::string what) { notes.push_back(std::move(what)); }

    std::string detail() const {
        std::string out;
        for (const auto& n : notes) {
            if (!out.empty()) out += "; ";
            out += n;
        }
        return out;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// shared fixtures

DistributionField gaussian(double amp, double ax, double av, Vec3 vc = {}) {
    return DistributionField::formula([=](const Vec3& x, const Vec3& v) {
        return amp * std::exp(-ax * norm2(x) - av * norm2(v - vc));
    });
}

// one factor per slot, all widths distinct so slot mixups change the value
std::vector<DistributionField> distinct_factors(int count) {
    std::vector<DistributionField> out;
    for (int i = 0; i < count; ++i)
        out.push_back(gaussian(0.5 + 0.1 * i, 0.6 + 0.05 * i, 0.8 + 0.07 * i,
                               {0.05 * i, -0.03 * i, 0.02 * i}));
    return out;
}

// the cross-checked two-Gaussian mixture and its one-particle density
const Marginal& reference_mixture() {
    static const Marginal m = Marginal::mixture(
        {0.6, 0.4}, {gaussian(0.8, 1.0, 1.0), gaussian(0.5, 0.5, 0.8, {0.3, -0.2, 0.1})}, 4);
    return m;
}

DistributionField reference_field() {
    return DistributionField::formula([](const Vec3& x, const Vec3& v) {
        return 0.6 * 0.8 * std::exp(-norm2(x) - norm2(v)) +
               0.4 * 0.5 * std::exp(-0.5 * norm2(x) - 0.8 * norm2(v - Vec3{0.3, -0.2, 0.1}));
    });
}

const std::vector<Vec3>& probe_X() {
    static const std::vector<Vec3> X{{0.2, -0.1, 0.3}, {-0.4, 0.2, 0.0}};
    return X;
}
const std::vector<Vec3>& probe_V() {
    static const std::vector<Vec3> V{{0.5, 0.1, -0.3}, {-0.2, 0.4, 0.6}};
    return V;
}

double contraction_ball() {
    static const double M = 0.9 / std::sqrt(24.0 * constant_C(WeightParams{}));
    return M;
}

// amplitude for a datum amp * shape with weighted norm equal to target,
// measured with the same sampler the solver uses
double calibrate_amp(const SolverConfig& cfg, const std::function<double(const Vec3&, const Vec3&)>& shape,
                     double target) {
    const DistributionField unit = DistributionField::sample(cfg.grid, shape);
    const double unit_norm = weighted_norm(unit, cfg.weights, cfg.sampler());
    return target / unit_norm;
}

// kinetic solve on the 1 x nv^3 grid at the contraction-threshold data size,
// shared between the contraction and conservation criteria
struct HomogRun {
    SolverConfig cfg;
    DistributionField f0 = DistributionField::formula([](const Vec3&, const Vec3&) { return 0.0; });
    PicardState state;
    SolveReport report;
    double mild = 0.0;
    double seconds = 0.0;
};

const HomogRun& homog_run(int nv) {
    static std::map<int, HomogRun> cache;
    auto it = cache.find(nv);
    if (it != cache.end()) return it->second;

    const auto t0 = std::chrono::steady_clock::now();
    HomogRun r;
    r.cfg.grid = {1.0, 3.5, 1, nv, NodeLayout::Uniform};
    r.cfg.quad = CollisionQuad::make(8, 3.5, 4, 4);
    r.cfg.time = {4, 2, PanelLayout::Uniform};
    r.cfg.t_final = 1.0;
    r.cfg.tol = 1e-9;
    r.cfg.max_iter = 30;
    r.cfg.ball_radius = contraction_ball();
    r.cfg.norm_samples = 2000;
    r.cfg.norm_seed = 1;

    const double amp = calibrate_amp(
        r.cfg, [](const Vec3&, const Vec3& v) { return std::exp(-norm2(v)); },
        0.5 * r.cfg.ball_radius);
    r.f0 = DistributionField::formula(
        [amp](const Vec3&, const Vec3& v) { return amp * std::exp(-norm2(v)); });
    r.report = picard_solve(r.state, r.f0, r.cfg);
    r.mild = mild_residual(r.state, r.f0, r.cfg);
    r.seconds = seconds_since(t0);
    return cache.emplace(nv, std::move(r)).first->second;
}

// ---------------------------------------------------------------------------
// 1. resonant quadruple geometry

void c1_resonance(Gate& g) {
    QuasiRandom<8> qr(1);
    const int n = 1'000'000;
    double w_mom = 0.0, w_en = 0.0, w_geom = 0.0, w_min = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto u = qr.next();
        const Vec3 v = box_point({u[0], u[1], u[2]}, 3.0);
        const Vec3 v1 = box_point({u[3], u[4], u[5]}, 3.0);
        const Vec3 sig = sphere_point(u[6], u[7]);
        const auto [v2, v3] = post_collision(v, v1, sig);
        const ResonantQuadruple r{v, v1, v2, v3};

        const Vec3 dp = (v + v1) - (v2 + v3);
        w_mom = std::max(w_mom, norm(dp) / std::max(1.0, norm(v) + norm(v1) + norm(v2) + norm(v3)));
        const double de = std::abs(norm2(v) + norm2(v1) - norm2(v2) - norm2(v3));
        w_en = std::max(w_en, de / std::max(1.0, norm2(v) + norm2(v1) + norm2(v2) + norm2(v3)));
        w_geom = std::max(w_geom, manifold_identities(r).max_residual());
        const double deficit = -min_estimate_slack(r) / std::max(1.0, norm2(r.w01()));
        w_min = std::max(w_min, deficit);
    }
    g.check(w_mom <= 1e-11, fmt("momentum residual %.2e", w_mom));
    g.check(w_en <= 1e-11, fmt("energy residual %.2e", w_en));
    g.check(w_geom <= 1e-11, fmt("manifold identity residual %.2e", w_geom));
    g.check(w_min <= 1e-11, fmt("min-difference deficit %.2e", w_min));
    g.info(fmt("1e6 draws, worst: mom %.1e en %.1e geom %.1e min %.1e", w_mom, w_en, w_geom,
               w_min));
}

// ---------------------------------------------------------------------------
// 2. stationary shape annihilation

void c2_annihilation(Gate& g) {
    const WeightParams w{};
    const DistributionField f = DistributionField::formula([w](const Vec3& x, const Vec3& v) {
        return 0.4 / (w.space_weight(x) * (1.0 + norm2(v)));
    });
    const GridSpec grid{1.0, 3.5, 2, 6, NodeLayout::Uniform};
    const auto q = CollisionQuad::make(8, 3.5, 6, 6);

    double worst = 0.0;
    double min_gain = std::numeric_limits<double>::infinity();
    for (std::size_t xi = 0; xi < grid.x_count(); ++xi) {
        const Vec3 x = grid.x_point(xi);
        for (std::size_t vi = 0; vi < grid.v_count(); ++vi) {
            const CollisionValue cv = eval_C_with_gain(f, x, grid.v_point(vi), q);
            min_gain = std::min(min_gain, cv.gain_mag);
            if (cv.gain_mag > 0.0) worst = std::max(worst, std::abs(cv.value) / cv.gain_mag);
        }
    }
    g.check(min_gain > 0.0, "gain magnitude positive at every node");
    g.check(worst <= 1e-12, fmt("annihilation ratio %.2e", worst));
    g.info(fmt("%zu nodes, worst |C|/gain %.1e", grid.node_count(), worst));
}

// ---------------------------------------------------------------------------
// 3. collision invariants

void c3_invariants(Gate& g) {
    const DistributionField f = reference_field();
    const std::vector<std::function<double(const Vec3&)>> phis = {
        [](const Vec3&) { return 1.0; },    [](const Vec3& v) { return v.x; },
        [](const Vec3& v) { return v.y; },  [](const Vec3& v) { return v.z; },
        [](const Vec3& v) { return norm2(v); }};

    // symmetrized weak form: the averages vanish at the quadrature level
    const auto qw = CollisionQuad::make(6, 3.5, 4, 4);
    double worst_rel = 0.0;
    for (const Vec3& x : probe_X()) {
        auto section = [&f, x](const Vec3& u) { return f(x, u); };
        for (const auto& phi : phis) {
            const WeakFormValue wf = weak_form_section(section, phi, qw);
            g.check(wf.scale > 0.0, "weak form scale positive");
            worst_rel = std::max(worst_rel, std::abs(wf.value) / wf.scale);
        }
    }
    g.check(worst_rel <= 1e-13, fmt("weak-form residual %.2e", worst_rel));

    // strong form: x-local moments of C[f] against a resolved reference;
    // each velocity-grid doubling must shrink the error by at least 1.8
    const auto qs = CollisionQuad::make(5, 3.5, 2, 2);
    const Vec3 x0 = probe_X()[0];
    auto moments = [&](int nv) {
        const GridSpec gv{1.0, 3.5, 1, nv, NodeLayout::Uniform};
        const double h = 2.0 * gv.v_max / (nv - 1);
        auto axis_w = [&](int i) { return (i == 0 || i == nv - 1) ? 0.5 * h : h; };
        std::array<double, 5> m{};
        for (std::size_t vi = 0; vi < gv.v_count(); ++vi) {
            const Vec3 v = gv.v_point(vi);
            const std::size_t nn = static_cast<std::size_t>(nv);
            const double wv = axis_w(static_cast<int>(vi / (nn * nn))) *
                              axis_w(static_cast<int>((vi / nn) % nn)) *
                              axis_w(static_cast<int>(vi % nn));
            const double c = eval_C(f, x0, v, qs);
            for (std::size_t p = 0; p < phis.size(); ++p) m[p] += wv * phis[p](v) * c;
        }
        return m;
    };
    const auto ref = moments(32);
    auto err = [&](int nv) {
        const auto m = moments(nv);
        double e = 0.0;
        for (std::size_t p = 0; p < m.size(); ++p) e = std::max(e, std::abs(m[p] - ref[p]));
        return e;
    };
    const double e4 = err(4), e8 = err(8), e16 = err(16);
    g.check(e8 > 0.0 && e16 > 0.0, "moment errors nonzero");
    g.check(e4 >= 1.8 * e8, fmt("moment error ratio 4->8 is %.2f", e4 / e8));
    g.check(e8 >= 1.8 * e16, fmt("moment error ratio 8->16 is %.2f", e8 / e16));
    g.info(fmt("weak %.1e; moment errors %.1e -> %.1e -> %.1e (ratios %.1f, %.1f)", worst_rel, e4,
               e8, e16, e4 / e8, e8 / e16));
}

// ---------------------------------------------------------------------------
// 4. quadrature vs Monte Carlo

void c4_oracles(Gate& g) {
    const Marginal& m = reference_mixture();
    const auto& X = probe_X();
    const auto& V = probe_V();
    const auto q = CollisionQuad::make(16, 3.5, 8, 8);

    // frozen references from a 4e7-sample run over the box x sphere measure
    struct Frozen {
        LTerm lam;
        int j;
        double mean, se;
    };
    const Frozen frozen[] = {{LTerm::L0, 1, 1.925044982754e-01, 1.963e-04},
                             {LTerm::L2, 2, 2.766306285081e-01, 2.239e-04}};
    for (const auto& fr : frozen) {
        const double quad = hierarchy_collision(fr.lam, fr.j, m, X, V, q);
        const double gap = std::abs(quad - fr.mean);
        g.check(gap <= 3.0 * fr.se,
                fmt("frozen term %d/%d off by %.2f se", static_cast<int>(fr.lam), fr.j,
                    gap / fr.se));
    }

    // three more coupling terms against a live sampler of the same measure
    struct Live {
        LTerm lam;
        int j;
    };
    const Live live[] = {{LTerm::L1, 1}, {LTerm::L3, 2}, {LTerm::L0, 2}};
    const double extent = 3.5, vol = 8.0 * extent * extent * extent, area = 4.0 * pi;
    std::mt19937_64 rng(9157);
    std::uniform_real_distribution<double> ub(-extent, extent), uc(-1.0, 1.0), up(0.0, 2.0 * pi);
    const long N = 10'000'000;
    double sum[3] = {}, sumsq[3] = {};
    std::vector<Vec3> XA(4), VA(4);
    for (long i = 0; i < N; ++i) {
        const Vec3 u{ub(rng), ub(rng), ub(rng)};
        const double ct = uc(rng), st = std::sqrt(std::max(0.0, 1.0 - ct * ct)), ph = up(rng);
        const Vec3 sig{st * std::cos(ph), st * std::sin(ph), ct};
        for (int c = 0; c < 3; ++c) {
            const int j = live[c].j;
            const Vec3 vj = V[static_cast<std::size_t>(j - 1)];
            const double r = norm(vj - u);
            const Vec3 mid = 0.5 * (vj + u), half = (0.5 * r) * sig;
            const Vec3 v2 = mid + half, v3 = mid - half;
            XA[0] = X[0];
            XA[1] = X[1];
            XA[2] = XA[3] = X[static_cast<std::size_t>(j - 1)];
            VA[0] = V[0];
            VA[1] = V[1];
            switch (live[c].lam) {
            case LTerm::L0: VA[static_cast<std::size_t>(j - 1)] = u; VA[2] = v2; VA[3] = v3; break;
            case LTerm::L1: VA[2] = v2; VA[3] = v3; break;
            case LTerm::L2: VA[2] = u; VA[3] = v3; break;
            case LTerm::L3: VA[2] = u; VA[3] = v2; break;
            }
            const double val = vol * area * 0.125 * r * m(XA, VA);
            sum[c] += val;
            sumsq[c] += val * val;
        }
    }
    std::string sigmas;
    for (int c = 0; c < 3; ++c) {
        const double mean = sum[c] / static_cast<double>(N);
        const double var = (sumsq[c] / static_cast<double>(N) - mean * mean) /
                           static_cast<double>(N - 1);
        const double se = std::sqrt(var);
        const double quad = hierarchy_collision(live[c].lam, live[c].j, m, X, V, q);
        const double gap = std::abs(quad - mean);
        g.check(gap <= 3.0 * se, fmt("live term %d/%d off by %.2f se",
                                     static_cast<int>(live[c].lam), live[c].j, gap / se));
        sigmas += fmt("%s%.2f", c ? "/" : "", gap / se);
    }
    g.info("5 configs within 3 se (live gaps " + sigmas + " se, 1e7 samples)");
}

// ---------------------------------------------------------------------------
// 5. contraction and stability

void c5_contraction(Gate& g) {
    const auto t0 = std::chrono::steady_clock::now();
    const HomogRun& h = homog_run(12);
    g.check(h.report.converged, "space-homogeneous solve converged");
    g.check(h.report.kappa_hat > 0.0 && h.report.kappa_hat < 1.0,
            fmt("contraction rate estimate %.2e", h.report.kappa_hat));
    g.check(h.mild <= 2.0 * h.cfg.tol, fmt("mild-equation residual %.2e", h.mild));
    g.check(h.report.max_slice_norm <= h.cfg.ball_radius,
            fmt("solution norm %.3e inside ball %.3e", h.report.max_slice_norm,
                h.cfg.ball_radius));

    // stability under a 10 percent data rescaling, reusing the base solve
    const DistributionField& f0 = h.f0;
    const DistributionField g0 = DistributionField::formula(
        [&f0](const Vec3& x, const Vec3& v) { return 0.9 * f0(x, v); });
    PicardState sb;
    const SolveReport rb = picard_solve(sb, g0, h.cfg);
    g.check(rb.converged, "perturbed solve converged");
    std::vector<double> dv = DistributionField::sample(h.cfg.grid, [&](const Vec3& x,
                                                                       const Vec3& v) {
                                 return f0(x, v) - g0(x, v);
                             }).values();
    const double d0 = weighted_norm(DistributionField::grid(h.cfg.grid, std::move(dv)),
                                    h.cfg.weights, h.cfg.sampler());
    const double ds = state_distance(h.state, sb, h.cfg);
    const double ratio = d0 > 0.0 ? ds / d0 : 0.0;
    g.check(ratio > 0.0 && ratio <= 2.05, fmt("stability ratio %.3f", ratio));
    const double homog_secs = seconds_since(t0) + h.seconds;
    g.check(homog_secs <= 300.0, fmt("homogeneous stage took %.0fs", homog_secs));

    // coarse transport-coupled run
    const auto t1 = std::chrono::steady_clock::now();
    SolverConfig ic;
    ic.grid = {1.0, 3.5, 4, 12, NodeLayout::Uniform};
    ic.quad = CollisionQuad::make(6, 3.5, 2, 2);
    ic.time = {4, 1, PanelLayout::Uniform};
    ic.t_final = 1.0;
    ic.tol = 1e-9;
    ic.max_iter = 12;
    ic.ball_radius = contraction_ball();
    ic.norm_samples = 2000;
    ic.norm_seed = 1;
    const double amp = calibrate_amp(
        ic, [](const Vec3& x, const Vec3& v) { return std::exp(-norm2(x) - norm2(v)); },
        0.5 * ic.ball_radius);
    const DistributionField fi = DistributionField::formula(
        [amp](const Vec3& x, const Vec3& v) { return amp * std::exp(-norm2(x) - norm2(v)); });
    PicardState si;
    const SolveReport ri = picard_solve(si, fi, ic);
    g.check(ri.converged, "transport-coupled solve converged");
    g.check(ri.kappa_hat < 1.0, fmt("transport-coupled rate estimate %.2e", ri.kappa_hat));
    const double mild_i = mild_residual(si, fi, ic);
    g.check(mild_i <= 2.0 * ic.tol, fmt("transport-coupled mild residual %.2e", mild_i));
    const double inhom_secs = seconds_since(t1);
    g.check(inhom_secs <= 1800.0, fmt("transport-coupled stage took %.0fs", inhom_secs));
    g.info(fmt("rate %.1e, mild %.1e, stability %.2f; coupled rate %.1e, mild %.1e (%.0fs + %.0fs)",
               h.report.kappa_hat, h.mild, ratio, ri.kappa_hat, mild_i, homog_secs, inhom_secs));
}

// ---------------------------------------------------------------------------
// 6. conservation drift halving

void c6_conservation(Gate& g) {
    const HomogRun& coarse = homog_run(6);
    const HomogRun& fine = homog_run(12);
    g.check(coarse.report.converged && fine.report.converged, "both solves converged");
    const ConservationReport ca = conservation_report(coarse.state, coarse.cfg);
    const ConservationReport cb = conservation_report(fine.state, fine.cfg);
    g.check(ca.max_drift() <= 1e-3, fmt("coarse drift %.2e", ca.max_drift()));
    g.check(cb.max_drift() <= 1e-3, fmt("fine drift %.2e", cb.max_drift()));
    g.check(ca.max_drift() >= 2.0 * cb.max_drift(),
            fmt("drift ratio %.2f under grid doubling", ca.max_drift() / cb.max_drift()));
    g.info(fmt("drift %.2e -> %.2e (ratio %.1f); mass/mom/energy fine %.1e/%.1e/%.1e",
               ca.max_drift(), cb.max_drift(), ca.max_drift() / cb.max_drift(), cb.mass_drift,
               cb.momentum_drift, cb.energy_drift));
}

// ---------------------------------------------------------------------------
// 7. integral bound sweeps

void c7_bounds(Gate& g) {
    BoundSweepConfig cfg;
    cfg.samples = 1000;
    cfg.seed = 0;
    const std::vector<std::pair<const char*, BoundReport>> reps = {
        {"one bracket", verify_one_bracket(cfg)},
        {"time integral", verify_time_integral(cfg)},
        {"convolution", verify_convolution(cfg)},
        {"delta convolution", verify_delta_convolution(cfg)},
        {"velocity weight", verify_velocity_weight(cfg)},
    };
    std::string ratios;
    for (const auto& [name, rep] : reps) {
        g.check(rep.pass, fmt("%s sweep (max ratio %.6f at %s)", name, rep.max_ratio,
                              rep.worst.c_str()));
        ratios += fmt("%s%.3f", ratios.empty() ? "" : "/", rep.max_ratio);
    }

    // closed-form spot check: the line integral of <s>^-2 equals pi (< 4),
    // on geometrically growing panels so the tail is resolved
    const Rule1D gl = gauss_legendre(12);
    double half = 0.0, a = 0.0, b = 1.0;
    for (int p = 0; p < 34; ++p) {
        const Rule1D panel = mapped(gl, a, b);
        for (std::size_t i = 0; i < panel.size(); ++i)
            half += panel.weights[i] / (1.0 + panel.nodes[i] * panel.nodes[i]);
        a = b;
        b *= 2.0;
    }
    const double I = 2.0 * half;
    g.check(std::abs(I - pi) <= 1e-8, fmt("line integral %.12f vs pi", I));
    g.check(I <= 4.0, "line integral below 4");
    g.info(fmt("sweep ratios %s; |integral - pi| = %.1e", ratios.c_str(), std::abs(I - pi)));
}

// ---------------------------------------------------------------------------
// 8. time-integrated estimates

void c8_apriori(Gate& g) {
    const WeightParams w{};
    const auto ga = gaussian(0.8, 1.0, 1.0);
    const auto hb = gaussian(0.5, 0.5, 0.8, {0.3, -0.2, 0.1});
    const auto lc = gaussian(0.7, 0.8, 1.2, {-0.2, 0.1, 0.0});
    const BoundReport eq = verify_apriori_equation(ga, hb, lc, w, 2.0);
    g.check(eq.pass && eq.max_ratio > 0.0,
            fmt("single-level estimate (max ratio %.4f at %s)", eq.max_ratio, eq.worst.c_str()));

    const Marginal m3 = Marginal::mixture({0.6, 0.4}, {ga, hb}, 3);
    double worst = 0.0;
    for (LTerm lam : {LTerm::L0, LTerm::L1, LTerm::L2, LTerm::L3}) {
        const BoundReport hr = verify_apriori_hierarchy(1, 1, lam, m3, w, 2.0);
        g.check(hr.pass && hr.max_ratio > 0.0,
                fmt("level-one coupling term %d (max ratio %.4f)", static_cast<int>(lam),
                    hr.max_ratio));
        worst = std::max(worst, hr.max_ratio);
    }
    g.info(fmt("single-level max ratio %.4f; level-one max ratio %.4f", eq.max_ratio, worst));
}

// ---------------------------------------------------------------------------
// 9. history combinatorics

void c9_boardgame(Gate& g) {
    const struct {
        int k, n;
        std::int64_t want;
    } counts[] = {{1, 2, 3}, {2, 2, 8}, {1, 3, 15}};
    for (const auto& c : counts) {
        const std::int64_t got = history_count(c.k, c.n);
        const auto all = enumerate_histories(c.k, c.n);
        g.check(got == c.want && static_cast<std::int64_t>(all.size()) == c.want,
                fmt("|M_{%d,%d}| = %lld, want %lld", c.k, c.n, static_cast<long long>(got),
                    static_cast<long long>(c.want)));
    }

    // echelon forms stay under 2^(k + 3n - 2)
    for (int k = 1; k <= 3; ++k)
        for (int n = 2; n <= 4; ++n) {
            const std::int64_t ec = count_echelon(k, n);
            const std::int64_t bound = static_cast<std::int64_t>(std::ldexp(1.0, k + 3 * n - 2));
            g.check(ec <= bound, fmt("echelon count %lld over bound %lld at k=%d n=%d",
                                     static_cast<long long>(ec), static_cast<long long>(bound), k,
                                     n));
        }

    // every reduction terminates on an echelon form with no moves left
    int reduced = 0;
    bool all_ok = true;
    for (int k = 1; k <= 3 && all_ok; ++k)
        for (int n = 2; n <= 3 && all_ok; ++n)
            for (const auto& mu : enumerate_histories(k, n)) {
                const ReductionResult r = reduce_to_echelon(BoardState::initial(mu));
                ++reduced;
                if (!is_echelon(r.echelon) || !applicable_moves(r.final_state).empty() ||
                    r.final_state.mu.values != r.echelon.values) {
                    all_ok = false;
                    g.check(false, fmt("reduction broken at k=%d n=%d", k, n));
                    break;
                }
            }
    g.check(all_ok, "reductions terminate on echelon forms");

    // classes partition the history set
    for (const auto [k, n] : std::vector<std::pair<int, int>>{{1, 2}, {2, 2}, {1, 3}, {2, 3}}) {
        const auto classes = partition_classes(k, n);
        std::int64_t total = 0;
        bool consistent = true;
        for (const auto& [ech, members] : classes) {
            total += static_cast<std::int64_t>(members.size());
            if (!is_echelon(ech)) consistent = false;
            for (const auto& mu : members)
                if (reduce_to_echelon(BoardState::initial(mu)).echelon.values != ech.values)
                    consistent = false;
        }
        g.check(consistent && total == history_count(k, n),
                fmt("classes partition M_{%d,%d}", k, n));
    }
    g.check(partition_classes(2, 2).size() == 7,
            fmt("%zu classes at k=2 n=2, want 7", partition_classes(2, 2).size()));
    g.info(fmt("counts 3/8/15, %d reductions terminated, 7 classes at k=2 n=2", reduced));
}

// ---------------------------------------------------------------------------
// 10. move and swap invariance

void c10_invariance(Gate& g) {
    InvarianceConfig cfg;
    cfg.quad = CollisionQuad::make(4, 3.0, 2, 2);
    cfg.time_outer = 6;
    cfg.time_inner = 6;
    cfg.probe_box = {1.0, 2.0, 2, 2, NodeLayout::Uniform};
    cfg.probes = 8;
    cfg.seed = 0;
    cfg.tol = 1e-10;
    const Marginal f0 = Marginal::tensor_power(gaussian(0.55, 0.8, 1.0), 6);
    const auto movable = BoardState::initial(HistoryMap{2, 2, {2, 1}});
    const GapReport mv = verify_move_invariance(movable, f0, 0.5, cfg);
    g.check(mv.pass && mv.max_gap <= cfg.tol,
            fmt("move invariance gap %.2e (%s)", mv.max_gap, mv.worst.c_str()));

    // slot-swap identity across every placement of the last constraint
    const Marginal f7 = Marginal::labeled(distinct_factors(7));
    const auto q = CollisionQuad::make(4, 3.0, 2, 2);
    double worst = 0.0;
    bool all = true;
    int cases = 0;
    for (LTerm lam : {LTerm::L0, LTerm::L1, LTerm::L2, LTerm::L3})
        for (int mu_ell = 1; mu_ell <= 5; ++mu_ell) {
            const GapReport sw = verify_identity_swap(lam, 7, 3, mu_ell, f7, 3, q,
                                                      {2.0, 3.0, 2, 2, NodeLayout::Uniform}, 3);
            all = all && sw.pass && sw.max_gap <= 1e-12;
            worst = std::max(worst, sw.max_gap);
            ++cases;
        }
    g.check(all, fmt("swap identity gap %.2e over %d cases", worst, cases));
    g.info(fmt("move gap %.1e; swap gap %.1e over %d cases", mv.max_gap, worst, cases));
}

// ---------------------------------------------------------------------------
// 11. hierarchy consistency

void c11_hierarchy(Gate& g) {
    // factored evaluation agrees with the generic one on labeled data
    const auto q = CollisionQuad::make(4, 3.0, 2, 2);
    const GridSpec box{1.5, 2.5, 2, 3, NodeLayout::Uniform};
    double worst_fac = 0.0;
    for (int k = 1; k <= 3; ++k) {
        const Marginal m = Marginal::labeled(distinct_factors(k + 2));
        for (const auto& tp : sample_tuples(box, k, 4, 40 + static_cast<std::uint64_t>(k)))
            for (int j = 1; j <= k; ++j)
                for (LTerm lam : {LTerm::L0, LTerm::L1, LTerm::L2, LTerm::L3}) {
                    const double a = hierarchy_collision(lam, j, m, tp.X, tp.V, q);
                    const double b = hierarchy_collision_factored(lam, j, m, tp.X, tp.V, q);
                    worst_fac = std::max(worst_fac,
                                         std::abs(a - b) / std::max(1e-300, std::abs(b)));
                }
    }
    g.check(worst_fac <= 1e-12, fmt("factored evaluation gap %.2e", worst_fac));

    // tensor powers of a solved field satisfy the nested mild equation
    SolverConfig sc;
    sc.grid = {1.0, 3.5, 1, 7, NodeLayout::Uniform};
    sc.quad = CollisionQuad::make(5, 3.5, 2, 2);
    sc.time = {2, 2, PanelLayout::Uniform};
    sc.t_final = 0.5;
    sc.tol = 1e-9;
    sc.max_iter = 40;
    sc.norm_samples = 400;
    const DistributionField f0 = gaussian(1e-3, 0.0, 1.0);
    PicardState st;
    const SolveReport rep = picard_solve(st, f0, sc);
    g.check(rep.converged, "base solve converged");
    const DistributionField f0g = DistributionField::sample(
        sc.grid, [&](const Vec3& x, const Vec3& v) { return f0(x, v); });
    auto physical = [&](double s) { return transport(state_field_at(st, s), s); };

    ResidualConfig rc;
    rc.quad = sc.quad;
    rc.time = {2, 3, PanelLayout::Uniform};
    rc.probe_box = {1.0, 3.0, 2, 4, NodeLayout::Uniform};
    rc.probes = 6;
    rc.time_samples = 2;
    rc.seed = 5;
    double est = 0.0;
    for (const auto& tp : sample_tuples(rc.probe_box, 1, rc.probes, rc.seed)) {
        const double gap = std::abs(f0(tp.X[0], tp.V[0]) - f0g(tp.X[0], tp.V[0]));
        est = std::max(est, gap * rc.weights.weight(tp.X[0], tp.V[0]));
    }
    HierarchyEvolution evo;
    evo.k = 1;
    evo.initial = Marginal::tensor_power(f0g, 1);
    evo.level_k = [&](double t) { return Marginal::tensor_power(physical(t), 1); };
    evo.level_kp2 = [&](double t) { return Marginal::tensor_power(physical(t), 3); };
    const double res1 = duhamel_residual(evo, sc.t_final, rc);
    g.check(res1 <= 2.0 * (sc.tol + est), fmt("level-1 residual %.2e vs %.2e", res1,
                                              2.0 * (sc.tol + est)));
    HierarchyEvolution evo2;
    evo2.k = 2;
    evo2.initial = Marginal::tensor_power(f0g, 2);
    evo2.level_k = [&](double t) { return Marginal::tensor_power(physical(t), 2); };
    evo2.level_kp2 = [&](double t) { return Marginal::tensor_power(physical(t), 4); };
    const double res2 = duhamel_residual(evo2, sc.t_final, rc);
    g.check(res2 <= 3.0 * res1 + 1e-12, fmt("level-2 residual %.2e vs %.2e", res2,
                                            3.0 * res1 + 1e-12));

    // admissibility: unit-mass mixtures pass, a 90 percent component is flagged
    AdmissibilityConfig ac;
    ac.nodes = 8;
    ac.probes = 3;
    ac.samples = 80;
    ac.seed = 2;
    auto box_mass = [&](const DistributionField& f) {
        const BoxRule xr = BoxRule::cube(ac.nodes, ac.x_extent);
        const BoxRule vr = BoxRule::cube(ac.nodes, ac.v_extent);
        double mass = 0.0;
        for (std::size_t xi = 0; xi < xr.size(); ++xi) {
            double inner = 0.0;
            for (std::size_t vi = 0; vi < vr.size(); ++vi)
                inner += vr.weight(vi) * f(xr.node(xi), vr.node(vi));
            mass += xr.weight(xi) * inner;
        }
        return mass;
    };
    const auto raw1 = gaussian(1.0, 0.5, 0.6);
    const auto raw2 = gaussian(1.0, 0.8, 0.9, {0.2, -0.1, 0.1});
    const auto h1 = gaussian(1.0 / box_mass(raw1), 0.5, 0.6);
    const auto h2 = gaussian(1.0 / box_mass(raw2), 0.8, 0.9, {0.2, -0.1, 0.1});
    auto level = [&](const DistributionField& a, const DistributionField& b, int k) {
        return Marginal::mixture({0.6, 0.4}, {a, b}, k);
    };
    const AdmissibilityReport ok = admissibility_check({level(h1, h2, 1), level(h1, h2, 2)}, ac);
    g.check(ok.pass, fmt("unit-mass mixture flagged (mass defect %.2e)", ok.mass_defect));

    const auto h2_low = gaussian(0.9 / box_mass(raw2), 0.8, 0.9, {0.2, -0.1, 0.1});
    const AdmissibilityReport bad =
        admissibility_check({level(h1, h2_low, 1), level(h1, h2_low, 2)}, ac);
    g.check(!bad.pass && std::abs(bad.mass_defect - 0.04) <= 1e-6,
            fmt("reduced-mass component not flagged (defect %.4f)", bad.mass_defect));
    g.info(fmt("factored gap %.1e; residuals %.1e, %.1e; mass defects %.1e / %.3f", worst_fac,
               res1, res2, ok.mass_defect, bad.mass_defect));
}

// ---------------------------------------------------------------------------
// 12. deterministic reports

std::string serialize_solve_run() {
    SolverConfig cfg;
    cfg.grid = {1.0, 3.0, 1, 6, NodeLayout::Uniform};
    cfg.quad = CollisionQuad::make(4, 3.0, 2, 2);
    cfg.time = {2, 2, PanelLayout::Uniform};
    cfg.t_final = 0.5;
    cfg.tol = 1e-8;
    cfg.max_iter = 20;
    cfg.ball_radius = contraction_ball();
    cfg.norm_samples = 500;
    cfg.norm_seed = 1;
    const DistributionField f0 = gaussian(1e-3, 0.0, 1.0);
    PicardState st;
    const SolveReport rep = picard_solve(st, f0, cfg);
    const ConservationReport cons = conservation_report(st, cfg);

    std::string out;
    auto put = [&out](double x) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g\n", x);
        out += buf;
    };
    put(rep.converged ? 1.0 : 0.0);
    put(static_cast<double>(rep.iterations));
    put(rep.data_norm);
    put(rep.kappa_hat);
    put(rep.max_slice_norm);
    for (double v : rep.increments) put(v);
    for (double v : cons.mass) put(v);
    for (double v : cons.energy) put(v);
    for (const Vec3& v : cons.momentum) {
        put(v.x);
        put(v.y);
        put(v.z);
    }
    for (const auto& sl : st.slices)
        for (double v : sl.values()) put(v);
    return out;
}

void c12_determinism(Gate& g) {
    const std::string a = serialize_solve_run();
    const std::string b = serialize_solve_run();
    g.check(!a.empty() && a == b, "in-process reports byte-identical across runs");

#ifndef WKH_CLI_PATH
    g.check(false, "tool path not provided at build time");
#else
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "wkh-acceptance-determinism";
    std::error_code ec;
    fs::remove_all(base, ec);
    fs::create_directories(base / "a");
    fs::create_directories(base / "b");

    const fs::path solve_cfg = base / "solve.cfg";
    {
        std::ofstream out(solve_cfg);
        out << "[grid]\nx_max = 1.0\nv_max = 3.0\nnx = 1\nnv = 5\n"
               "[quad]\nnodes = 4\nextent = 3.0\ntheta = 2\nphi = 2\n"
               "[time]\npanels = 2\nnodes = 1\n"
               "[solve]\nt_final = 0.25\ntol = 1e-6\nmax_iter = 10\nnorm_samples = 500\n";
    }
    const fs::path verify_cfg = base / "verify.cfg";
    {
        std::ofstream out(verify_cfg);
        out << "[verify]\nsamples = 200\n";
    }

    auto run_cli = [&](const fs::path& dir) {
        const std::string common = std::string("\"") + WKH_CLI_PATH + "\" --seed 7 --sequential";
        const std::string solve = common + " --config \"" + solve_cfg.string() + "\" --out \"" +
                                  (dir / "solve").string() + "\" solve > /dev/null 2>&1";
        const std::string sweep = common + " --config \"" + verify_cfg.string() + "\" --out \"" +
                                  (dir / "verify").string() +
                                  "\" verify one_bracket > /dev/null 2>&1";
        return std::system(solve.c_str()) == 0 && std::system(sweep.c_str()) == 0;
    };
    const bool ran = run_cli(base / "a") && run_cli(base / "b");
    g.check(ran, "command-line runs completed");

    if (ran) {
        auto listing = [&](const fs::path& root) {
            std::vector<std::string> rel;
            for (const auto& e : fs::recursive_directory_iterator(root))
                if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), root).string());
            std::sort(rel.begin(), rel.end());
            return rel;
        };
        auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in),
                               std::istreambuf_iterator<char>());
        };
        const auto la = listing(base / "a"), lb = listing(base / "b");
        g.check(la == lb && !la.empty(), "same report files on both runs");
        bool identical = la == lb && !la.empty();
        std::string first_diff;
        if (identical)
            for (const auto& r : la)
                if (slurp(base / "a" / r) != slurp(base / "b" / r)) {
                    identical = false;
                    first_diff = r;
                    break;
                }
        g.check(identical, "report bytes differ at " + first_diff);
        if (identical) g.info(fmt("%zu command-line report files byte-identical", la.size()));
    }
    fs::remove_all(base, ec);
#endif
}

// ---------------------------------------------------------------------------

struct Criterion {
    int id;
    const char* name;
    void (*run)(Gate&);
    double budget; // seconds; 0 means unbudgeted
};

const Criterion criteria[] = {
    {1, "resonant quadruple geometry", c1_resonance, 10.0},
    {2, "stationary shape annihilation", c2_annihilation, 60.0},
    {3, "collision invariants", c3_invariants, 0.0},
    {4, "quadrature vs Monte Carlo", c4_oracles, 0.0},
    {5, "contraction and stability", c5_contraction, 0.0},
    {6, "conservation drift halving", c6_conservation, 0.0},
    {7, "integral bound sweeps", c7_bounds, 300.0},
    {8, "time-integrated estimates", c8_apriori, 0.0},
    {9, "history combinatorics", c9_boardgame, 10.0},
    {10, "move and swap invariance", c10_invariance, 600.0},
    {11, "hierarchy consistency", c11_hierarchy, 0.0},
    {12, "deterministic reports", c12_determinism, 0.0},
};

} // namespace

int main(int argc, char** argv) {
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--list") {
            for (const auto& c : criteria) std::printf("%2d  %s\n", c.id, c.name);
            return 0;
        }
        if (arg == "--criterion" && i + 1 < argc) {
            const int id = std::atoi(argv[++i]);
            if (id < 1 || id > static_cast<int>(std::size(criteria))) {
                std::fprintf(stderr, "unknown criterion %s\n", argv[i]);
                return 2;
            }
            selected.insert(id);
            continue;
        }
        std::fprintf(stderr, "usage: %s [--list] [--criterion N]...\n", argv[0]);
        return 2;
    }

    bool all_pass = true;
    int ran = 0;
    const auto t_all = std::chrono::steady_clock::now();
    for (const auto& c : criteria) {
        if (!selected.empty() && !selected.count(c.id)) continue;
        ++ran;
        Gate gate;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(gate);
        } catch (const std::exception& e) {
            gate.pass = false;
            gate.notes.push_back(std::string("unhandled error: ") + e.what());
        }
        const double secs = seconds_since(t0);
        if (c.budget > 0.0 && secs > c.budget)
            gate.check(false, fmt("runtime %.1fs over budget %.0fs", secs, c.budget));
        all_pass = all_pass && gate.pass;
        std::printf("C%02d %-34s %s %8.1fs  %s\n", c.id, c.name, gate.pass ? "PASS" : "FAIL",
                    secs, gate.detail().c_str());
        std::fflush(stdout);
    }
    std::printf("%d criteria, %s, %.0fs total\n", ran, all_pass ? "all passed" : "FAILURES",
                seconds_since(t_all));
    return all_pass ? 0 : 1;
}
