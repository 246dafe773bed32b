// Walkthrough: solve the kinetic equation inside the contraction ball, watch
// the conserved moments sit still, confirm the stationary shape annihilates
// under the collision operator, and reduce one collision history to its
// echelon form.

#include <cmath>
#include <cstdio>

#include "wkh/boardgame.hpp"
#include "wkh/bounds.hpp"
#include "wkh/collision.hpp"
#include "wkh/norm.hpp"
#include "wkh/solver.hpp"

using namespace wkh;

int main() {
    const WeightParams w{};
    const double C = constant_C(w);
    const double ball = 0.9 / std::sqrt(24.0 * C);
    std::printf("trilinear constant C = %.6f, contraction ball radius = %.4e\n\n", C, ball);

    SolverConfig cfg;
    cfg.grid = {1.0, 3.5, 1, 10, NodeLayout::Uniform};
    cfg.quad = CollisionQuad::make(6, 3.5, 4, 4);
    cfg.time = {4, 2, PanelLayout::Uniform};
    cfg.t_final = 1.0;
    cfg.tol = 1e-9;
    cfg.ball_radius = ball;

    // scale a Gaussian so its weighted norm is half the ball radius
    const DistributionField unit = DistributionField::sample(
        cfg.grid, [](const Vec3&, const Vec3& v) { return std::exp(-norm2(v)); });
    const double amp = 0.5 * ball / weighted_norm(unit, cfg.weights, cfg.sampler());
    const DistributionField f0 = DistributionField::formula(
        [amp](const Vec3&, const Vec3& v) { return amp * std::exp(-norm2(v)); });

    PicardState state;
    const SolveReport rep = picard_solve(state, f0, cfg);
    std::printf("data norm %.4e, %d iterations, increments:", rep.data_norm, rep.iterations);
    for (double inc : rep.increments) std::printf(" %.2e", inc);
    std::printf("\nrate estimate %.2e, mild residual %.2e\n\n", rep.kappa_hat,
                mild_residual(state, f0, cfg));

    const ConservationReport cons = conservation_report(state, cfg);
    std::printf("   t        mass        momentum_x   energy\n");
    for (std::size_t i = 0; i < cons.times.size(); ++i)
        std::printf("  %.2f   %.8e   %+.2e   %.8e\n", cons.times[i], cons.mass[i],
                    cons.momentum[i].x, cons.energy[i]);
    std::printf("relative drift: mass %.1e, momentum %.1e, energy %.1e\n\n", cons.mass_drift,
                cons.momentum_drift, cons.energy_drift);

    // the stationary shape c / (<x>^p (1 + |v|^2)) annihilates node by node
    const DistributionField eq = DistributionField::formula([w](const Vec3& x, const Vec3& v) {
        return 0.4 / (w.space_weight(x) * (1.0 + norm2(v)));
    });
    double worst = 0.0;
    for (std::size_t vi = 0; vi < cfg.grid.v_count(); vi += 37) {
        const CollisionValue cv =
            eval_C_with_gain(eq, Vec3{0.3, -0.2, 0.1}, cfg.grid.v_point(vi), cfg.quad);
        worst = std::max(worst, std::abs(cv.value) / cv.gain_mag);
    }
    std::printf("stationary shape: max |C[f]| / gain over sampled nodes = %.2e\n\n", worst);

    const auto start = BoardState::initial(HistoryMap{2, 3, {2, 1, 4}});
    const ReductionResult red = reduce_to_echelon(start);
    std::printf("history (2,1,4) at k=2: %zu move%s to echelon form (", red.trace.size(),
                red.trace.size() == 1 ? "" : "s");
    for (std::size_t i = 0; i < red.echelon.values.size(); ++i)
        std::printf("%s%d", i ? "," : "", red.echelon.values[i]);
    std::printf("), %lld echelon classes among %lld histories\n",
                static_cast<long long>(count_echelon(2, 3)),
                static_cast<long long>(history_count(2, 3)));
    return 0;
}
