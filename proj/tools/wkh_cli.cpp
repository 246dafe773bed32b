// Command-line front end. Subcommands cover the mild solver, pointwise
// collision evaluation, the bound verifiers, the history board game, and the
// marginal hierarchy. Reports are JSON with insertion-ordered keys, tables
// are CSV, checkpoints use the binary field format; identical config and
// seed reproduce every report byte for byte in sequential mode.
//
// Exit codes: 0 success, 1 a checked assertion failed (the report says
// which), 2 configuration or usage error.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wkh/boardgame.hpp"
#include "wkh/bounds.hpp"
#include "wkh/collision.hpp"
#include "wkh/field.hpp"
#include "wkh/grid.hpp"
#include "wkh/hierarchy.hpp"
#include "wkh/io.hpp"
#include "wkh/marginal.hpp"
#include "wkh/norm.hpp"
#include "wkh/quadrature.hpp"
#include "wkh/sampling.hpp"
#include "wkh/solver.hpp"
#include "wkh/vec3.hpp"
#include "wkh/weights.hpp"

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace wkh;

// ---------------------------------------------------------------------------
// settings file: flat key = value lines grouped by [section] headers

std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

class Settings {
public:
    static Settings load(const std::string& path) {
        Settings out;
        if (path.empty()) return out;
        std::ifstream is(path);
        if (!is) throw std::invalid_argument("config: cannot open " + path);
        std::string line, section;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
            line = trim(line);
            if (line.empty()) continue;
            const std::string where = path + ":" + std::to_string(lineno);
            if (line.front() == '[') {
                if (line.back() != ']' || line.size() < 3)
                    throw std::invalid_argument("config: bad section header at " + where);
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument("config: expected key = value at " + where);
            const std::string key = trim(line.substr(0, eq));
            const std::string val = trim(line.substr(eq + 1));
            if (key.empty() || val.empty())
                throw std::invalid_argument("config: empty key or value at " + where);
            const std::string full = section.empty() ? key : section + "." + key;
            if (!kv_of(out).emplace(full, val).second)
                throw std::invalid_argument("config: duplicate key " + full + " at " + where);
        }
        return out;
    }

    double num(const std::string& key, double fallback) {
        double v = fallback;
        if (const std::string* s = raw(key)) {
            const char* b = s->data();
            const char* e = b + s->size();
            const auto r = std::from_chars(b, e, v);
            if (r.ec != std::errc{} || r.ptr != e)
                throw std::invalid_argument("config: bad number for " + key + ": " + *s);
        }
        echo[key] = v;
        return v;
    }

    int whole(const std::string& key, int fallback) {
        int v = fallback;
        if (const std::string* s = raw(key)) {
            const char* b = s->data();
            const char* e = b + s->size();
            const auto r = std::from_chars(b, e, v);
            if (r.ec != std::errc{} || r.ptr != e)
                throw std::invalid_argument("config: bad integer for " + key + ": " + *s);
        }
        echo[key] = v;
        return v;
    }

    bool flag(const std::string& key, bool fallback) {
        bool v = fallback;
        if (const std::string* s = raw(key)) {
            if (*s == "1" || *s == "true" || *s == "yes")
                v = true;
            else if (*s == "0" || *s == "false" || *s == "no")
                v = false;
            else
                throw std::invalid_argument("config: bad flag for " + key + ": " + *s);
        }
        echo[key] = v;
        return v;
    }

    std::string word(const std::string& key, const std::string& fallback) {
        std::string v = fallback;
        if (const std::string* s = raw(key)) v = *s;
        echo[key] = v;
        return v;
    }

    std::vector<int> int_list(const std::string& key, const std::vector<int>& fallback) {
        std::vector<int> v = fallback;
        if (const std::string* s = raw(key)) {
            v.clear();
            std::istringstream is(*s);
            std::string tok;
            while (is >> tok) {
                int n = 0;
                const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), n);
                if (r.ec != std::errc{} || r.ptr != tok.data() + tok.size())
                    throw std::invalid_argument("config: bad integer list for " + key + ": " + *s);
                v.push_back(n);
            }
            if (v.empty())
                throw std::invalid_argument("config: empty integer list for " + key);
        }
        echo[key] = v;
        return v;
    }

    // every key in the file must have been consumed by the command
    void reject_unknown() const {
        for (const auto& [k, v] : kv_)
            if (!used_.count(k))
                throw std::invalid_argument("config: key " + k + " is not used by this command");
    }

    json echo = json::object(); // effective values, in read order

private:
    static std::map<std::string, std::string>& kv_of(Settings& s) { return s.kv_; }

    const std::string* raw(const std::string& key) {
        used_.insert(key);
        const auto it = kv_.find(key);
        return it == kv_.end() ? nullptr : &it->second;
    }

    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// shared helpers

// splitmix step; distinct salts give independent per-task streams from the
// single named seed
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

struct RunContext {
    Settings settings;
    std::uint64_t seed = 0;
    fs::path out;
    ExecPolicy exec;
};

json report_base(const char* command, const RunContext& rc) {
    json r;
    r["command"] = command;
    r["seed"] = rc.seed;
    r["sequential"] = rc.exec.sequential;
    return r;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

json history_json(const HistoryMap& m) {
    return json{{"k", m.k}, {"n", m.n}, {"values", m.values}};
}

json bound_json(const BoundReport& r) {
    return json{{"lemma", r.lemma},     {"samples", r.samples}, {"max_ratio", r.max_ratio},
                {"slack", r.slack},     {"pass", r.pass},       {"worst", r.worst}};
}

json gap_json(const GapReport& r) {
    return json{{"name", r.name}, {"samples", r.samples}, {"max_gap", r.max_gap},
                {"tol", r.tol},   {"pass", r.pass},       {"worst", r.worst}};
}

std::string join_ints(const std::vector<int>& v, char sep = ' ') {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += sep;
        out += std::to_string(v[i]);
    }
    return out;
}

NodeLayout layout_from_word(const std::string& w, const std::string& key) {
    if (w == "uniform") return NodeLayout::Uniform;
    if (w == "cell") return NodeLayout::CellCentered;
    throw std::invalid_argument("config: " + key + " must be uniform or cell, got " + w);
}

WeightParams weights_from(Settings& st) {
    WeightParams w;
    w.p = st.num("weights.p", w.p);
    w.q = st.num("weights.q", w.q);
    w.alpha = st.num("weights.alpha", w.alpha);
    w.beta = st.num("weights.beta", w.beta);
    w.mu = st.num("weights.mu", w.mu);
    w.validate();
    return w;
}

GridSpec grid_from(Settings& st, const std::string& sec, const GridSpec& def) {
    GridSpec g;
    g.x_max = st.num(sec + ".x_max", def.x_max);
    g.v_max = st.num(sec + ".v_max", def.v_max);
    g.nx = st.whole(sec + ".nx", def.nx);
    g.nv = st.whole(sec + ".nv", def.nv);
    const char* defw = def.layout == NodeLayout::Uniform ? "uniform" : "cell";
    g.layout = layout_from_word(st.word(sec + ".layout", defw), sec + ".layout");
    g.validate();
    return g;
}

CollisionQuad quad_from(Settings& st, int n_box, double extent, int n_theta, int n_phi) {
    return CollisionQuad::make(st.whole("quad.nodes", n_box), st.num("quad.extent", extent),
                               st.whole("quad.theta", n_theta), st.whole("quad.phi", n_phi));
}

TimeRule time_from(Settings& st, const TimeRule& def) {
    TimeRule t;
    t.panels = st.whole("time.panels", def.panels);
    t.nodes_per_panel = st.whole("time.nodes", def.nodes_per_panel);
    const char* defw = def.layout == PanelLayout::Uniform ? "uniform" : "geometric";
    const std::string w = st.word("time.layout", defw);
    if (w == "uniform")
        t.layout = PanelLayout::Uniform;
    else if (w == "geometric")
        t.layout = PanelLayout::Geometric;
    else
        throw std::invalid_argument("config: time.layout must be uniform or geometric, got " + w);
    return t;
}

// one-particle component densities available to the presets and to mixture
// files: an anisotropic Gaussian bump and the stationary shape whose spatial
// factor inverts the weight
struct FieldSpec {
    std::string preset = "gaussian";
    double amp = 1.0;
    double width_x = 1.0;
    double width_v = 1.0;
    Vec3 center{};
};

DistributionField make_component(const FieldSpec& fs, const WeightParams& w) {
    if (fs.preset == "gaussian") {
        const double wx = fs.width_x, wv = fs.width_v, amp = fs.amp;
        const Vec3 c = fs.center;
        return DistributionField::formula([wx, wv, amp, c](const Vec3& x, const Vec3& v) {
            return amp * std::exp(-wx * norm2(x) - wv * norm2(v - c));
        });
    }
    if (fs.preset == "equilibrium") {
        const double amp = fs.amp;
        return DistributionField::formula([amp, w](const Vec3& x, const Vec3& v) {
            return amp / (w.space_weight(x) * (1.0 + norm2(v)));
        });
    }
    throw std::invalid_argument("config: unknown data preset " + fs.preset);
}

FieldSpec field_spec_from(Settings& st, const std::string& sec, double def_amp) {
    FieldSpec fs;
    fs.preset = st.word(sec + ".preset", "gaussian");
    fs.amp = st.num(sec + ".amp", def_amp);
    fs.width_x = st.num(sec + ".width_x", 1.0);
    fs.width_v = st.num(sec + ".width_v", 1.0);
    fs.center = {st.num(sec + ".center_x", 0.0), st.num(sec + ".center_y", 0.0),
                 st.num(sec + ".center_z", 0.0)};
    if (fs.preset != "gaussian" && fs.preset != "equilibrium")
        throw std::invalid_argument("config: unknown data preset " + fs.preset);
    return fs;
}

MixtureData mixture_from_file(const fs::path& path, const WeightParams& w) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::invalid_argument("mixture file: cannot open " + path.string());
    json j;
    MixtureData mix;
    try {
        is >> j;
        mix.weights = j.at("weights").get<std::vector<double>>();
        for (const auto& c : j.at("components")) {
            FieldSpec fs;
            fs.preset = c.at("type").get<std::string>();
            fs.amp = c.value("amp", 1.0);
            fs.width_x = c.value("width_x", 1.0);
            fs.width_v = c.value("width_v", 1.0);
            if (c.contains("center")) {
                const auto ctr = c.at("center").get<std::vector<double>>();
                if (ctr.size() != 3)
                    throw std::invalid_argument("mixture file: center must have 3 entries");
                fs.center = {ctr[0], ctr[1], ctr[2]};
            }
            mix.components.push_back(make_component(fs, w));
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument("mixture file: " + path.string() + ": " + e.what());
    }
    mix.validate();
    return mix;
}

double grid_weighted_norm(const DistributionField& f, const SolverConfig& sc) {
    const DistributionField g = DistributionField::sample(
        sc.grid, [&](const Vec3& x, const Vec3& v) { return f(x, v); });
    return weighted_norm(g, sc.weights, sc.sampler());
}

// ---------------------------------------------------------------------------
// solve

int cmd_solve(RunContext& rc) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    SolverConfig sc;
    sc.weights = w;
    sc.grid = grid_from(st, "grid", GridSpec{1.0, 3.5, 1, 8, NodeLayout::Uniform});
    sc.quad = quad_from(st, 6, 3.5, 4, 4);
    sc.time = time_from(st, TimeRule{4, 2, PanelLayout::Uniform});
    sc.t_final = st.num("solve.t_final", 1.0);
    sc.tol = st.num("solve.tol", 1e-6);
    sc.max_iter = st.whole("solve.max_iter", 25);
    sc.norm_samples = st.whole("solve.norm_samples", 2000);
    sc.norm_seed = derive_seed(rc.seed, 1);
    sc.exec = rc.exec;

    const double C = constant_C(w);
    const double regime_max = std::pow(24.0 * C, -0.5);
    double ball = st.num("solve.ball", 0.0);
    if (ball <= 0.0) ball = 0.9 * regime_max;
    sc.ball_radius = ball;

    FieldSpec fsp = field_spec_from(st, "data", 0.0);
    st.reject_unknown();

    if (ball > regime_max * (1.0 + 1e-12)) {
        std::fprintf(stderr,
                     "contraction regime violated: ball radius %.6g exceeds (24 C)^(-1/2) = %.6g\n",
                     ball, regime_max);
        return 2;
    }

    // amplitudes are calibrated against the projected data actually fed to
    // the solver; amp <= 0 asks for 90 percent of the admissible half ball
    FieldSpec unit = fsp;
    unit.amp = 1.0;
    const double unit_norm = grid_weighted_norm(make_component(unit, w), sc);
    if (!(unit_norm > 0.0)) {
        std::fprintf(stderr, "config error: data preset vanishes on the grid\n");
        return 2;
    }
    const double amp = fsp.amp > 0.0 ? fsp.amp : 0.45 * ball / unit_norm;
    const double data_norm = amp * unit_norm;
    if (data_norm > 0.5 * ball * (1.0 + 1e-9)) {
        std::fprintf(stderr,
                     "contraction regime violated: data norm %.6g exceeds half the ball %.6g\n",
                     data_norm, 0.5 * ball);
        return 2;
    }
    fsp.amp = amp;
    const DistributionField f0 = make_component(fsp, w);
    const DistributionField f0g = DistributionField::sample(
        sc.grid, [&](const Vec3& x, const Vec3& v) { return f0(x, v); });

    PicardState state;
    SolveReport rep;
    try {
        rep = picard_solve(state, f0g, sc);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "contraction regime violated: %s\n", e.what());
        return 2;
    }
    const double mild = mild_residual(state, f0g, sc);
    const ConservationReport cons = conservation_report(state, sc);

    const fs::path ckpt = rc.out / "checkpoints";
    fs::create_directories(ckpt);
    write_state(ckpt, state, w);

    {
        std::ofstream os(rc.out / "conservation.csv", std::ios::binary);
        os << "time,mass,momentum_x,momentum_y,momentum_z,energy\n";
        for (std::size_t i = 0; i < cons.times.size(); ++i)
            os << fmt_g(cons.times[i]) << ',' << fmt_g(cons.mass[i]) << ','
               << fmt_g(cons.momentum[i].x) << ',' << fmt_g(cons.momentum[i].y) << ','
               << fmt_g(cons.momentum[i].z) << ',' << fmt_g(cons.energy[i]) << '\n';
    }

    json r = report_base("solve", rc);
    r["config"] = st.echo;
    r["regime"] = {{"constant_C", C},
                   {"ball_radius", ball},
                   {"ball_max", regime_max},
                   {"amplitude", amp},
                   {"data_norm", rep.data_norm}};
    r["solve"] = {{"converged", rep.converged},
                  {"iterations", rep.iterations},
                  {"kappa_hat", rep.kappa_hat},
                  {"increments", rep.increments},
                  {"max_slice_norm", rep.max_slice_norm},
                  {"mild_residual", mild},
                  {"tol", sc.tol}};
    json cj;
    cj["mass_drift"] = cons.mass_drift;
    cj["momentum_drift"] = cons.momentum_drift;
    cj["energy_drift"] = cons.energy_drift;
    cj["times"] = cons.times;
    cj["mass"] = cons.mass;
    cj["energy"] = cons.energy;
    json mom = json::array();
    for (const auto& m : cons.momentum) mom.push_back(vec_json(m));
    cj["momentum"] = mom;
    r["conservation"] = cj;
    write_json(rc.out / "solve_report.json", r);

    std::printf("converged: %s (%d iterations), kappa_hat = %.6g\n", rep.converged ? "yes" : "no",
                rep.iterations, rep.kappa_hat);
    std::printf("mild residual = %.6g (tol %.6g)\n", mild, sc.tol);
    std::printf("drift: mass %.6g, momentum %.6g, energy %.6g\n", cons.mass_drift,
                cons.momentum_drift, cons.energy_drift);
    std::printf("checkpoints: %s (%zu slices)\n", ckpt.string().c_str(), state.slices.size());
    std::printf("report: %s\n", (rc.out / "solve_report.json").string().c_str());

    const bool ok = rep.converged && mild <= 2.0 * sc.tol;
    if (!ok) std::fprintf(stderr, "solve check failed: see solve_report.json\n");
    return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// collision-eval

int cmd_collision_eval(RunContext& rc) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    const CollisionQuad q = quad_from(st, 8, 3.5, 6, 6);
    FieldSpec fsp = field_spec_from(st, "data", 1.0);
    const int probes = st.whole("eval.probes", 5);
    const double px = st.num("eval.x_max", 1.0);
    const double pv = st.num("eval.v_max", 2.5);
    const bool write_grid = st.flag("eval.write_grid", false);
    const GridSpec out_grid = grid_from(st, "grid", GridSpec{1.0, 3.5, 2, 6, NodeLayout::Uniform});
    st.reject_unknown();
    if (probes < 1) throw std::invalid_argument("config: eval.probes must be >= 1");

    const DistributionField f = make_component(fsp, w);

    QuasiRandom<6> qr(derive_seed(rc.seed, 2));
    json points = json::array();
    json weak = json::array();
    bool finite = true;
    double max_weak = 0.0;
    {
        std::ofstream os(rc.out / "collision_eval.csv", std::ios::binary);
        os << "x0,x1,x2,v0,v1,v2,value,gain\n";
        for (int i = 0; i < probes; ++i) {
            const auto u = qr.next();
            const Vec3 x = box_point({u[0], u[1], u[2]}, px);
            const Vec3 v = box_point({u[3], u[4], u[5]}, pv);
            const CollisionValue cv = eval_C_with_gain(f, x, v, q);
            finite = finite && std::isfinite(cv.value) && std::isfinite(cv.gain_mag);
            points.push_back(json{{"x", vec_json(x)},
                                  {"v", vec_json(v)},
                                  {"value", cv.value},
                                  {"gain", cv.gain_mag}});
            os << fmt_g(x.x) << ',' << fmt_g(x.y) << ',' << fmt_g(x.z) << ',' << fmt_g(v.x) << ','
               << fmt_g(v.y) << ',' << fmt_g(v.z) << ',' << fmt_g(cv.value) << ','
               << fmt_g(cv.gain_mag) << '\n';

            // weak-form averages against the collision invariants; the
            // symmetrized measure makes these vanish up to quadrature error
            const double m0 = weak_form_average(f, x, [](const Vec3&) { return 1.0; }, q);
            const Vec3 m1{weak_form_average(f, x, [](const Vec3& u1) { return u1.x; }, q),
                          weak_form_average(f, x, [](const Vec3& u1) { return u1.y; }, q),
                          weak_form_average(f, x, [](const Vec3& u1) { return u1.z; }, q)};
            const double m2 = weak_form_average(f, x, [](const Vec3& u1) { return norm2(u1); }, q);
            for (double a : {m0, m1.x, m1.y, m1.z, m2}) max_weak = std::max(max_weak, std::abs(a));
            weak.push_back(json{{"x", vec_json(x)},
                                {"mass", m0},
                                {"momentum", vec_json(m1)},
                                {"energy", m2}});
        }
    }

    json r = report_base("collision-eval", rc);
    r["config"] = st.echo;
    r["points"] = points;
    r["weak_form"] = weak;
    r["max_weak_form"] = max_weak;
    if (write_grid) {
        const DistributionField cf = collision_field(f, out_grid, q, rc.exec);
        write_field(rc.out / "collision_grid.wkh", cf);
        r["grid_output"] = (rc.out / "collision_grid.wkh").string();
    }
    write_json(rc.out / "collision_eval_report.json", r);

    std::printf("evaluated %d probes, max |weak-form invariant average| = %.6g\n", probes,
                max_weak);
    std::printf("report: %s\n", (rc.out / "collision_eval_report.json").string().c_str());
    if (!finite) std::fprintf(stderr, "collision evaluation produced non-finite values\n");
    return finite ? 0 : 1;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(RunContext& rc, const std::string& selector) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    BoundSweepConfig bc;
    bc.samples = st.whole("verify.samples", 1000);
    bc.seed = derive_seed(rc.seed, 3);
    bc.exec = rc.exec;
    const double horizon = st.num("verify.horizon", 1e3);
    const double T = st.num("verify.t_final", 2.0);
    const int probes = st.whole("verify.probes", 12);
    const int level = st.whole("verify.level", 1);
    const double amp = st.num("data.amp", 0.8);

    const auto want = [&](const char* name) { return selector == "all" || selector == name; };
    std::vector<BoundReport> reports;

    if (want("one_bracket")) reports.push_back(verify_one_bracket(bc));
    if (want("time_integral")) reports.push_back(verify_time_integral(bc, horizon));
    if (want("convolution")) reports.push_back(verify_convolution(bc));
    if (want("delta_convolution")) reports.push_back(verify_delta_convolution(bc));
    if (want("velocity_weight")) reports.push_back(verify_velocity_weight(bc));
    if (want("apriori_equation")) {
        AprioriEqConfig ac;
        ac.probes = probes;
        ac.seed = derive_seed(rc.seed, 4);
        const auto g = make_component({"gaussian", amp, 1.0, 1.0, {}}, w);
        const auto h = make_component({"gaussian", 0.6 * amp, 0.7, 1.2, Vec3{0.4, -0.3, 0.2}}, w);
        const auto l = make_component({"gaussian", 0.9 * amp, 1.1, 0.8, Vec3{-0.2, 0.5, -0.4}}, w);
        reports.push_back(verify_apriori_equation(g, h, l, w, T, ac));
    }
    if (want("apriori_hierarchy")) {
        AprioriHierConfig hc;
        hc.probes = probes;
        hc.seed = derive_seed(rc.seed, 5);
        const auto h1 = make_component({"gaussian", amp, 1.0, 1.0, {}}, w);
        const auto h2 =
            make_component({"gaussian", 0.5 * amp, 0.8, 1.1, Vec3{0.3, -0.2, 0.1}}, w);
        const Marginal m = Marginal::mixture({0.6, 0.4}, {h1, h2}, level + 2);
        const char* names[] = {"L0", "L1", "L2", "L3"};
        for (LTerm lam : {LTerm::L0, LTerm::L1, LTerm::L2, LTerm::L3}) {
            BoundReport rep = verify_apriori_hierarchy(level, 1, lam, m, w, T, hc);
            rep.lemma = std::string("apriori_hierarchy_") + names[static_cast<int>(lam)];
            reports.push_back(std::move(rep));
        }
    }
    st.reject_unknown();

    bool all_pass = true;
    json arr = json::array();
    for (const auto& rep : reports) {
        all_pass = all_pass && rep.pass;
        arr.push_back(bound_json(rep));
        std::printf("%s  %-28s max_ratio = %.12g  samples = %zu\n", rep.pass ? "PASS" : "FAIL",
                    rep.lemma.c_str(), rep.max_ratio, rep.samples);
    }

    json r = report_base("verify", rc);
    r["selector"] = selector;
    r["config"] = st.echo;
    r["results"] = arr;
    r["pass"] = all_pass;
    write_json(rc.out / "verify_report.json", r);
    std::printf("report: %s\n", (rc.out / "verify_report.json").string().c_str());
    return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// boardgame

int cmd_board_enumerate(RunContext& rc) {
    Settings& st = rc.settings;
    const int k = st.whole("board.k", 1);
    const int n = st.whole("board.n", 2);
    const int cap = st.whole("board.cap", 0);
    st.reject_unknown();

    const auto hists =
        cap > 0 ? enumerate_histories(k, n, cap) : enumerate_histories(k, n);

    {
        std::ofstream os(rc.out / "histories.csv", std::ios::binary);
        os << "index";
        for (int i = 0; i < n; ++i) os << ",mu_" << (k + 2 * (i + 1));
        os << '\n';
        for (std::size_t i = 0; i < hists.size(); ++i) {
            os << i;
            for (int v : hists[i].values) os << ',' << v;
            os << '\n';
        }
    }

    json r = report_base("boardgame enumerate", rc);
    r["config"] = st.echo;
    r["count"] = hists.size();
    write_json(rc.out / "boardgame_enumerate.json", r);
    std::printf("histories: %zu\n", hists.size());
    std::printf("table: %s\n", (rc.out / "histories.csv").string().c_str());
    return 0;
}

int cmd_board_count(RunContext& rc) {
    Settings& st = rc.settings;
    const int k = st.whole("board.k", 1);
    const int n = st.whole("board.n", 2);
    st.reject_unknown();

    const std::int64_t total = history_count(k, n);
    const std::int64_t echelon = count_echelon(k, n);
    const double bound = std::ldexp(1.0, k + 3 * n - 2);
    const auto classes = partition_classes(k, n);

    {
        std::ofstream os(rc.out / "counts.csv", std::ios::binary);
        os << "k,n,histories,echelon_forms,echelon_bound,classes\n";
        os << k << ',' << n << ',' << total << ',' << echelon << ',' << fmt_g(bound) << ','
           << classes.size() << '\n';
    }
    json class_arr = json::array();
    {
        std::ofstream os(rc.out / "classes.csv", std::ios::binary);
        os << "class,echelon,size,members\n";
        std::size_t ci = 0;
        for (const auto& [ech, members] : classes) {
            std::string mlist;
            json mj = json::array();
            for (std::size_t i = 0; i < members.size(); ++i) {
                if (i) mlist += ';';
                mlist += join_ints(members[i].values);
                mj.push_back(members[i].values);
            }
            os << ci << ',' << join_ints(ech.values) << ',' << members.size() << ',' << mlist
               << '\n';
            class_arr.push_back(
                json{{"echelon", ech.values}, {"size", members.size()}, {"members", mj}});
            ++ci;
        }
    }

    json r = report_base("boardgame count", rc);
    r["config"] = st.echo;
    r["histories"] = total;
    r["echelon_forms"] = echelon;
    r["echelon_bound"] = bound;
    r["classes"] = class_arr;
    write_json(rc.out / "boardgame_count.json", r);

    std::printf("histories: %lld\n", static_cast<long long>(total));
    std::printf("echelon forms: %lld (bound %.0f)\n", static_cast<long long>(echelon), bound);
    std::printf("classes: %zu\n", classes.size());
    std::printf("tables: %s, %s\n", (rc.out / "counts.csv").string().c_str(),
                (rc.out / "classes.csv").string().c_str());
    return 0;
}

int cmd_board_reduce(RunContext& rc) {
    Settings& st = rc.settings;
    const int k = st.whole("board.k", 2);
    const int n = st.whole("board.n", 3);
    st.reject_unknown();

    const auto hists = enumerate_histories(k, n);
    const std::size_t idx =
        static_cast<std::size_t>(derive_seed(rc.seed, 6) % hists.size());
    const BoardState start = BoardState::initial(hists[idx]);
    const ReductionResult red = reduce_to_echelon(start);

    json r = report_base("boardgame reduce", rc);
    r["config"] = st.echo;
    r["initial"] = {{"mu", history_json(start.mu)}, {"sigma", start.sigma}};
    r["moves"] = red.trace;
    r["final"] = {{"mu", history_json(red.final_state.mu)}, {"sigma", red.final_state.sigma}};
    r["echelon"] = red.echelon.values;
    r["steps"] = red.trace.size();
    write_json(rc.out / "boardgame_trace.json", r);

    std::printf("initial history: (%s), reduced in %zu moves to echelon (%s)\n",
                join_ints(start.mu.values).c_str(), red.trace.size(),
                join_ints(red.echelon.values).c_str());
    std::printf("report: %s\n", (rc.out / "boardgame_trace.json").string().c_str());

    const bool ok = is_echelon(red.echelon) && applicable_moves(red.final_state).empty() &&
                    red.final_state.mu == red.echelon;
    if (!ok) std::fprintf(stderr, "reduction did not reach a stable echelon form\n");
    return ok ? 0 : 1;
}

int cmd_board_invariance(RunContext& rc) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    const int k = st.whole("board.k", 2);
    const int n = st.whole("board.n", 2);
    const std::vector<int> mu_values = st.int_list("board.mu", {2, 1});

    InvarianceConfig ic;
    ic.quad = quad_from(st, 4, 3.0, 2, 2);
    ic.time_outer = st.whole("invariance.outer", 6);
    ic.time_inner = st.whole("invariance.inner", 6);
    ic.probe_box = {st.num("invariance.x_max", 1.0), st.num("invariance.v_max", 2.0), 2, 2,
                    NodeLayout::Uniform};
    ic.probes = st.whole("invariance.probes", 8);
    ic.seed = derive_seed(rc.seed, 7);
    ic.tol = st.num("invariance.tol", 1e-10);
    const double t = st.num("invariance.t_final", 0.5);

    FieldSpec fsp = field_spec_from(st, "data", 0.5);
    const int swap_order = st.whole("swap.order", 7);
    const int swap_slot = st.whole("swap.slot", 3);
    const int swap_probes = st.whole("swap.probes", 3);
    const double swap_tol = st.num("swap.tol", 1e-12);
    st.reject_unknown();

    HistoryMap m;
    m.k = k;
    m.n = n;
    m.values = mu_values;
    m.validate();
    const BoardState s = BoardState::initial(m);

    // the datum must be symmetric under the pair swap; a tensor power is
    const DistributionField h = make_component(fsp, w);
    const Marginal f0 = Marginal::tensor_power(h, k + 2 * n);
    const GapReport inv = verify_move_invariance(s, f0, t, ic);

    // commutation of the pair swap past one coupling term, all four terms,
    // with the output slot below, inside, and above the swapped pair
    std::vector<DistributionField> factors;
    for (int i = 0; i < swap_order; ++i)
        factors.push_back(make_component({"gaussian", 0.5 + 0.1 * i, 0.6 + 0.05 * i,
                                          0.8 + 0.07 * i,
                                          Vec3{0.05 * i, -0.03 * i, 0.02 * i}},
                                         w));
    const Marginal flab = Marginal::labeled(factors);
    const char* names[] = {"L0", "L1", "L2", "L3"};
    json swap_cases = json::array();
    double swap_max = 0.0;
    bool swap_pass = true;
    for (int mu_ell = 1; mu_ell <= swap_order - 2; ++mu_ell)
        for (LTerm lam : {LTerm::L0, LTerm::L1, LTerm::L2, LTerm::L3}) {
            const GapReport g = verify_identity_swap(lam, swap_order, swap_slot, mu_ell, flab,
                                                     swap_probes, ic.quad,
                                                     GridSpec{2.0, 3.0, 2, 2, NodeLayout::Uniform},
                                                     derive_seed(rc.seed, 8));
            swap_max = std::max(swap_max, g.max_gap);
            swap_pass = swap_pass && g.max_gap <= swap_tol;
            swap_cases.push_back(json{{"term", names[static_cast<int>(lam)]},
                                      {"mu_ell", mu_ell},
                                      {"max_gap", g.max_gap}});
        }

    json r = report_base("boardgame invariance", rc);
    r["config"] = st.echo;
    r["move_invariance"] = gap_json(inv);
    r["identity_swap"] = {{"max_gap", swap_max},
                          {"tol", swap_tol},
                          {"pass", swap_pass},
                          {"cases", swap_cases}};
    write_json(rc.out / "boardgame_invariance.json", r);

    std::printf("move invariance gap %.6g (tol %.6g): %s\n", inv.max_gap, inv.tol,
                inv.pass ? "PASS" : "FAIL");
    std::printf("identity swap gap %.6g (tol %.6g): %s\n", swap_max, swap_tol,
                swap_pass ? "PASS" : "FAIL");
    std::printf("report: %s\n", (rc.out / "boardgame_invariance.json").string().c_str());
    return inv.pass && swap_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// hierarchy

int cmd_hier_residual(RunContext& rc) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    const std::string preset = st.word("hier.preset", "tensor");
    const int level = st.whole("hier.level", 2);

    ResidualConfig rcfg;
    rcfg.quad = quad_from(st, 5, 3.5, 2, 2);
    rcfg.time = {st.whole("hier.time_panels", 2), st.whole("hier.time_nodes", 3),
                 PanelLayout::Uniform};
    rcfg.weights = w;
    rcfg.probe_box = {st.num("hier.probe_x_max", 1.0), st.num("hier.probe_v_max", 3.0), 2, 4,
                      NodeLayout::Uniform};
    rcfg.probes = st.whole("hier.probes", 6);
    rcfg.time_samples = st.whole("hier.time_samples", 2);
    rcfg.seed = derive_seed(rc.seed, 9);

    if (level < 1 || level > 2)
        throw std::invalid_argument("config: hier.level must be 1 or 2");

    if (preset == "zero") {
        const double t_final = st.num("solve.t_final", 0.5);
        st.reject_unknown();
        const DistributionField z =
            DistributionField::formula([](const Vec3&, const Vec3&) { return 0.0; });
        json levels = json::array();
        bool pass = true;
        for (int k = 1; k <= level; ++k) {
            HierarchyEvolution evo;
            evo.k = k;
            evo.initial = Marginal::tensor_power(z, k);
            evo.level_k = [&z, k](double) { return Marginal::tensor_power(z, k); };
            evo.level_kp2 = [&z, k](double) { return Marginal::tensor_power(z, k + 2); };
            const double res = duhamel_residual(evo, t_final, rcfg);
            pass = pass && res == 0.0;
            levels.push_back(json{{"k", k}, {"residual", res}, {"threshold", 0.0}});
            std::printf("level %d residual = %.6g (vacuum)\n", k, res);
        }
        json r = report_base("hierarchy residual", rc);
        r["config"] = st.echo;
        r["preset"] = preset;
        r["levels"] = levels;
        r["pass"] = pass;
        write_json(rc.out / "hierarchy_residual.json", r);
        std::printf("report: %s\n", (rc.out / "hierarchy_residual.json").string().c_str());
        return pass ? 0 : 1;
    }
    if (preset != "tensor")
        throw std::invalid_argument("config: hier.preset must be zero or tensor");

    SolverConfig sc;
    sc.weights = w;
    sc.grid = grid_from(st, "grid", GridSpec{1.0, 3.5, 1, 7, NodeLayout::Uniform});
    sc.quad = rcfg.quad;
    sc.time = time_from(st, TimeRule{2, 2, PanelLayout::Uniform});
    sc.t_final = st.num("solve.t_final", 0.5);
    sc.tol = st.num("solve.tol", 1e-9);
    sc.max_iter = st.whole("solve.max_iter", 40);
    sc.norm_samples = st.whole("solve.norm_samples", 400);
    sc.norm_seed = derive_seed(rc.seed, 1);
    sc.exec = rc.exec;
    const FieldSpec fsp = field_spec_from(st, "data", 1e-3);
    st.reject_unknown();

    const DistributionField f0 = make_component(fsp, w);
    const DistributionField f0g = DistributionField::sample(
        sc.grid, [&](const Vec3& x, const Vec3& v) { return f0(x, v); });
    PicardState state;
    const SolveReport srep = picard_solve(state, f0g, sc);
    if (!srep.converged) {
        std::fprintf(stderr, "tensor preset solve did not converge\n");
        return 1;
    }
    auto physical = [&](double s) { return transport(state_field_at(state, s), s); };

    // discretization share of the defect: weighted gap between the exact
    // data and its grid projection on the probes actually used
    double est = 0.0;
    for (const auto& tp : sample_tuples(rcfg.probe_box, 1, rcfg.probes, rcfg.seed)) {
        const double gap = std::abs(f0(tp.X[0], tp.V[0]) - f0g(tp.X[0], tp.V[0]));
        est = std::max(est, gap * w.weight(tp.X[0], tp.V[0]));
    }

    json levels = json::array();
    bool pass = true;
    double res_prev = 0.0;
    for (int k = 1; k <= level; ++k) {
        HierarchyEvolution evo;
        evo.k = k;
        evo.initial = Marginal::tensor_power(f0g, k);
        evo.level_k = [&physical, k](double s) { return Marginal::tensor_power(physical(s), k); };
        evo.level_kp2 = [&physical, k](double s) {
            return Marginal::tensor_power(physical(s), k + 2);
        };
        const double res = duhamel_residual(evo, sc.t_final, rcfg);
        // level 1 carries the solver tolerance plus the projection gap; the
        // tensor closure at level 2 scales it by the extra factors
        const double threshold = k == 1 ? 2.0 * (sc.tol + est) : 3.0 * res_prev + 1e-12;
        pass = pass && res <= threshold;
        levels.push_back(json{{"k", k}, {"residual", res}, {"threshold", threshold}});
        std::printf("level %d residual = %.6g (threshold %.6g)\n", k, res, threshold);
        res_prev = res;
    }

    json r = report_base("hierarchy residual", rc);
    r["config"] = st.echo;
    r["preset"] = preset;
    r["solve"] = {{"converged", srep.converged},
                  {"iterations", srep.iterations},
                  {"kappa_hat", srep.kappa_hat}};
    r["projection_gap"] = est;
    r["levels"] = levels;
    r["pass"] = pass;
    write_json(rc.out / "hierarchy_residual.json", r);
    std::printf("report: %s\n", (rc.out / "hierarchy_residual.json").string().c_str());
    if (!pass) std::fprintf(stderr, "hierarchy residual exceeded its threshold\n");
    return pass ? 0 : 1;
}

// two bump components normalized to unit mass on the truncated box, the
// second one scalable to plant a mass defect; unit mass is a statement about
// the admissibility quadrature, so normalize with the same rule
MixtureData admissibility_preset(Settings& st, const WeightParams& w, double mass_scale,
                                 const AdmissibilityConfig& ac) {
    const double wx1 = st.num("hier.width_x1", 1.0), wv1 = st.num("hier.width_v1", 1.0);
    const double wx2 = st.num("hier.width_x2", 1.2), wv2 = st.num("hier.width_v2", 1.5);
    const BoxRule xr = BoxRule::cube(ac.nodes, ac.x_extent);
    const BoxRule vr = BoxRule::cube(ac.nodes, ac.v_extent);
    const auto unit_amp = [&](const FieldSpec& fs) {
        const DistributionField f = make_component(fs, w);
        double mass = 0.0;
        for (std::size_t xi = 0; xi < xr.size(); ++xi) {
            double inner = 0.0;
            for (std::size_t vi = 0; vi < vr.size(); ++vi)
                inner += vr.weight(vi) * f(xr.node(xi), vr.node(vi));
            mass += xr.weight(xi) * inner;
        }
        return 1.0 / mass;
    };
    FieldSpec s1{"gaussian", 1.0, wx1, wv1, {}};
    FieldSpec s2{"gaussian", 1.0, wx2, wv2, Vec3{0.3, -0.2, 0.1}};
    s1.amp = unit_amp(s1);
    s2.amp = mass_scale * unit_amp(s2);
    MixtureData mix;
    mix.weights = {0.6, 0.4};
    mix.components = {make_component(s1, w), make_component(s2, w)};
    return mix;
}

int cmd_hier_admissibility(RunContext& rc) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    const std::string mixfile = st.word("hier.mixture", "");
    const int levels = st.whole("hier.levels", 2);
    const double mass_scale = st.num("hier.mass_scale", 1.0);

    AdmissibilityConfig ac;
    ac.x_extent = st.num("admissibility.x_extent", ac.x_extent);
    ac.v_extent = st.num("admissibility.v_extent", ac.v_extent);
    ac.nodes = st.whole("admissibility.nodes", ac.nodes);
    ac.probes = st.whole("admissibility.probes", ac.probes);
    ac.samples = st.whole("admissibility.samples", ac.samples);
    ac.seed = derive_seed(rc.seed, 10);
    ac.tol = st.num("admissibility.tol", ac.tol);

    const MixtureData mix = mixfile.empty() ? admissibility_preset(st, w, mass_scale, ac)
                                            : mixture_from_file(mixfile, w);
    st.reject_unknown();

    std::vector<Marginal> seq;
    for (int k = 1; k <= levels; ++k) seq.push_back(mix.marginal(k));
    const AdmissibilityReport rep = admissibility_check(seq, ac);

    json r = report_base("hierarchy admissibility", rc);
    r["config"] = st.echo;
    r["levels"] = levels;
    r["min_value"] = rep.min_value;
    r["symmetry_gap"] = rep.symmetry_gap;
    r["mass_defect"] = rep.mass_defect;
    r["consistency"] = rep.consistency;
    r["tol"] = rep.tol;
    r["pass"] = rep.pass;
    write_json(rc.out / "hierarchy_admissibility.json", r);

    std::printf("mass defect %.6g, symmetry gap %.6g, min value %.6g\n", rep.mass_defect,
                rep.symmetry_gap, rep.min_value);
    for (std::size_t i = 0; i < rep.consistency.size(); ++i)
        std::printf("consistency level %zu -> %zu: %.6g\n", i + 1, i + 2, rep.consistency[i]);
    std::printf("admissible: %s (tol %.6g)\n", rep.pass ? "yes" : "no", rep.tol);
    std::printf("report: %s\n", (rc.out / "hierarchy_admissibility.json").string().c_str());
    return rep.pass ? 0 : 1;
}

int cmd_hier_mixture(RunContext& rc) {
    Settings& st = rc.settings;
    const WeightParams w = weights_from(st);
    const std::string mixfile = st.word("hier.mixture", "");
    const int k_max = st.whole("hier.levels", 2);

    MixtureSolveConfig mc;
    mc.base.weights = w;
    mc.base.grid = grid_from(st, "grid", GridSpec{1.0, 3.5, 1, 7, NodeLayout::Uniform});
    mc.base.quad = quad_from(st, 5, 3.5, 2, 2);
    mc.base.time = time_from(st, TimeRule{2, 2, PanelLayout::Uniform});
    mc.base.t_final = st.num("solve.t_final", 0.5);
    mc.base.tol = st.num("solve.tol", 1e-8);
    mc.base.max_iter = st.whole("solve.max_iter", 40);
    mc.base.norm_samples = st.whole("solve.norm_samples", 400);
    mc.base.norm_seed = derive_seed(rc.seed, 1);
    mc.base.exec = rc.exec;
    mc.mu = st.num("hier.mu", 0.0);
    mc.norm_probes = st.whole("hier.norm_probes", 32);
    mc.seed = derive_seed(rc.seed, 11);
    const double amp = st.num("data.amp", 0.0);

    MixtureData mix;
    if (mixfile.empty()) {
        // scale both bumps to a fixed fraction of the per-component cap, the
        // same gate the mixture solver enforces on the grid projection
        const double C = constant_C(w);
        const double mu_eff = mc.mu != 0.0 ? mc.mu : 0.5 * std::log(32.0 * C) + 0.01;
        const double cap = 0.5 * std::exp(-mu_eff);
        FieldSpec s1{"gaussian", 1.0, 0.0, 1.0, {}};
        FieldSpec s2{"gaussian", 1.0, 0.0, 0.8, Vec3{0.2, -0.1, 0.1}};
        const double n1 = grid_weighted_norm(make_component(s1, w), mc.base);
        const double n2 = grid_weighted_norm(make_component(s2, w), mc.base);
        s1.amp = amp > 0.0 ? amp : 0.8 * cap / n1;
        s2.amp = amp > 0.0 ? amp : 0.8 * cap / n2;
        mix.weights = {0.6, 0.4};
        mix.components = {make_component(s1, w), make_component(s2, w)};
    } else {
        mix = mixture_from_file(mixfile, w);
    }
    st.reject_unknown();

    const MixtureSolution ms = mixture_solution(mix, k_max, mc);

    bool converged = true;
    json comps = json::array();
    for (std::size_t i = 0; i < ms.reports.size(); ++i) {
        converged = converged && ms.reports[i].converged;
        comps.push_back(json{{"weight", ms.weights[i]},
                             {"converged", ms.reports[i].converged},
                             {"iterations", ms.reports[i].iterations},
                             {"kappa_hat", ms.reports[i].kappa_hat},
                             {"data_norm", ms.reports[i].data_norm}});
    }
    const bool ok = converged && ms.transported_bound <= 1.0;

    json r = report_base("hierarchy mixture", rc);
    r["config"] = st.echo;
    r["k_max"] = k_max;
    r["mu"] = ms.mu;
    r["mu_prime"] = ms.mu_prime;
    r["transported_bound"] = ms.transported_bound;
    r["components"] = comps;
    r["times"] = ms.times;
    r["pass"] = ok;
    write_json(rc.out / "hierarchy_mixture.json", r);

    std::printf("components: %zu, mu = %.6g, scaled norm bound = %.6g\n", ms.reports.size(),
                ms.mu, ms.transported_bound);
    std::printf("all converged: %s\n", converged ? "yes" : "no");
    std::printf("report: %s\n", (rc.out / "hierarchy_mixture.json").string().c_str());
    if (!ok) std::fprintf(stderr, "mixture evolution left the scaled norm budget\n");
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for the wave-kinetic collision operator, its contraction"
                 " solver, and the coupling hierarchy"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::uint64_t seed = 0;
    bool sequential = false;
    app.add_option("--config", config_path, "key = value settings file with [section] headers")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "base seed; per-task streams are derived from it");
    app.add_flag("--sequential", sequential, "single worker, bit-exact reports");
    app.add_option("--out", out_dir, "output directory for reports, tables, checkpoints");

    auto* solve = app.add_subcommand(
        "solve", "Picard mild solution in the contraction regime, with conservation"
                 " diagnostics and checkpoints");
    auto* ceval = app.add_subcommand(
        "collision-eval", "collision operator values and weak-form moment averages at probes");
    auto* verify =
        app.add_subcommand("verify", "bound verifier sweeps; pick one lemma or all");
    std::string selector = "all";
    verify->add_option("lemma", selector, "lemma to check")
        ->check(CLI::IsMember({"one_bracket", "time_integral", "convolution",
                               "delta_convolution", "velocity_weight", "apriori_equation",
                               "apriori_hierarchy", "all"}));

    auto* board = app.add_subcommand("boardgame", "collision history combinatorics");
    board->require_subcommand(1);
    auto* b_enum = board->add_subcommand("enumerate", "list all histories at (k, n)");
    auto* b_count = board->add_subcommand("count", "history, echelon, and class counts");
    auto* b_reduce = board->add_subcommand("reduce", "reduce a seeded random history, with trace");
    auto* b_inv = board->add_subcommand(
        "invariance", "nested Duhamel value across one move, plus the pair-swap commutation");

    auto* hier = app.add_subcommand("hierarchy", "marginal hierarchy checks");
    hier->require_subcommand(1);
    auto* h_res = hier->add_subcommand("residual", "mild-hierarchy defect of tensor solutions");
    auto* h_adm = hier->add_subcommand("admissibility", "marginal sequence admissibility");
    auto* h_mix = hier->add_subcommand("mixture", "evolve mixture data inside the norm budget");

    for (CLI::App* s : {solve, ceval, verify, board, b_enum, b_count, b_reduce, b_inv, hier,
                        h_res, h_adm, h_mix})
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        RunContext rc;
        rc.settings = Settings::load(config_path);
        rc.seed = seed;
        rc.out = out_dir;
        const int workers = rc.settings.whole("run.workers", 0);
        rc.exec.sequential = sequential || workers <= 1;
        rc.exec.workers = workers > 0 ? static_cast<unsigned>(workers) : 0;
        fs::create_directories(rc.out);

        if (*solve)
            code = cmd_solve(rc);
        else if (*ceval)
            code = cmd_collision_eval(rc);
        else if (*verify)
            code = cmd_verify(rc, selector);
        else if (*b_enum)
            code = cmd_board_enumerate(rc);
        else if (*b_count)
            code = cmd_board_count(rc);
        else if (*b_reduce)
            code = cmd_board_reduce(rc);
        else if (*b_inv)
            code = cmd_board_invariance(rc);
        else if (*h_res)
            code = cmd_hier_residual(rc);
        else if (*h_adm)
            code = cmd_hier_admissibility(rc);
        else if (*h_mix)
            code = cmd_hier_mixture(rc);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::length_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    std::fprintf(stderr, "elapsed %.2fs\n", dt.count());
    return code;
}
