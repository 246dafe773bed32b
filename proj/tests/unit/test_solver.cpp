#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "wkh/solver.hpp"

using namespace wkh;

namespace {

SolverConfig small_config() {
    SolverConfig cfg;
    cfg.weights = {};
    cfg.grid = {1.0, 3.5, 1, 9, NodeLayout::Uniform};
    cfg.quad = CollisionQuad::make(6, 3.5, 4, 4);
    cfg.time = {2, 2, PanelLayout::Uniform};
    cfg.t_final = 0.5;
    cfg.tol = 1e-10;
    cfg.norm_samples = 500;
    return cfg;
}

DistributionField gaussian_data(double amp) {
    return DistributionField::formula(
        [amp](const Vec3&, const Vec3& v) { return amp * std::exp(-norm2(v)); });
}

} // namespace

TEST_CASE("phi_map of the zero state reproduces the data on every slice") {
    const SolverConfig cfg = small_config();
    const DistributionField f0 = gaussian_data(1.0);
    const PicardState out = phi_map(zero_state(cfg), f0, cfg);
    REQUIRE(out.slices.size() == 3);
    const auto ref = DistributionField::sample(cfg.grid, f0).values();
    for (const auto& sl : out.slices) CHECK(sl.values() == ref);
}

TEST_CASE("phi_map accumulates the Duhamel integral panel by panel") {
    const SolverConfig cfg = small_config();
    const DistributionField f0g = DistributionField::sample(cfg.grid, gaussian_data(0.1));

    // a state frozen at f0 has an s-independent integrand in homogeneous
    // mode, so slice i must equal f0 + t_i * C[f0] at every node
    PicardState frozen = zero_state(cfg);
    for (auto& sl : frozen.slices) sl = f0g;
    const PicardState out = phi_map(frozen, f0g, cfg);

    const auto* gd = f0g.grid_data();
    for (std::size_t vi = 0; vi < cfg.grid.v_count(); vi += 13) {
        const Vec3 v = cfg.grid.v_point(vi);
        auto section = [&](const Vec3& u) { return gd->interpolate(Vec3{}, u); };
        const double cv = eval_C_section(section, v, cfg.quad).value;
        for (std::size_t i = 0; i < out.times.size(); ++i) {
            const double want = f0g.values()[vi] + out.times[i] * cv;
            CHECK_THAT(out.slices[i].values()[vi],
                       Catch::Matchers::WithinRel(want, 1e-13) ||
                           Catch::Matchers::WithinAbs(want, 1e-18));
        }
    }
}

TEST_CASE("state eval interpolates linearly between slices") {
    const SolverConfig cfg = small_config();
    PicardState st = zero_state(cfg);
    st.slices[1] = DistributionField::sample(cfg.grid, gaussian_data(1.0));
    const Vec3 v{0.5, -0.25, 0.0};
    const double at_mid = st.eval(0.125, Vec3{}, v);
    CHECK_THAT(at_mid, Catch::Matchers::WithinRel(0.5 * st.slices[1](Vec3{}, v), 1e-14));
    CHECK(st.eval(-1.0, Vec3{}, v) == 0.0);
    CHECK(st.eval(10.0, Vec3{}, v) == st.slices[2](Vec3{}, v));
}

TEST_CASE("picard iteration contracts on small data and solves the mild equation") {
    SolverConfig cfg = small_config();
    const double C = 128.0 * pi * pi * pi / 3.0;
    cfg.ball_radius = 0.9 / std::sqrt(24.0 * C);
    const DistributionField f0 = gaussian_data(1.5e-3);

    PicardState state;
    const SolveReport rep = picard_solve(state, f0, cfg);
    REQUIRE(rep.converged);
    CHECK(rep.iterations <= 8);
    CHECK(rep.kappa_hat < 1.0);
    CHECK(rep.increments.front() == Catch::Approx(rep.data_norm));
    CHECK(rep.max_slice_norm <= cfg.ball_radius);

    CHECK(mild_residual(state, f0, cfg) <= 2.0 * cfg.tol);
}

TEST_CASE("picard_solve rejects data outside the contraction ball") {
    SolverConfig cfg = small_config();
    cfg.ball_radius = 0.9 / std::sqrt(24.0 * 128.0 * pi * pi * pi / 3.0);
    CHECK_THROWS_AS(
        [&] {
            PicardState st;
            return picard_solve(st, gaussian_data(0.1), cfg);
        }(),
        std::invalid_argument);
}

TEST_CASE("conserved moments stay flat along the solution") {
    SolverConfig cfg = small_config();
    const DistributionField f0 = gaussian_data(1.5e-3);
    PicardState state;
    REQUIRE(picard_solve(state, f0, cfg).converged);
    const ConservationReport rep = conservation_report(state, cfg);
    REQUIRE(rep.mass.front() > 0.0);
    CHECK(rep.max_drift() <= 1e-6);
}

TEST_CASE("stability ratio is zero for identical data and modest for nearby data") {
    SolverConfig cfg = small_config();
    const DistributionField f0 = gaussian_data(1.5e-3);
    const StabilityReport same = stability_compare(f0, f0, cfg);
    CHECK(same.data_distance == 0.0);
    CHECK(same.ratio == 0.0);

    const DistributionField g0 = DistributionField::formula([](const Vec3&, const Vec3& v) {
        return 1.4e-3 * std::exp(-norm2(v)) + 1e-4 * std::exp(-2.0 * norm2(v - Vec3{0.5, 0, 0}));
    });
    const StabilityReport near = stability_compare(f0, g0, cfg);
    REQUIRE(near.data_distance > 0.0);
    CHECK(near.ratio <= 2.05);
}
