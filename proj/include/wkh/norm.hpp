#pragma once

#include <cmath>
#include <cstdint>

#include "wkh/field.hpp"
#include "wkh/grid.hpp"
#include "wkh/sampling.hpp"
#include "wkh/weights.hpp"

namespace wkh {

// Sampling plan for the weighted sup norm: all nodes of a GridSpec plus a
// quasi-random refinement over the same box. Deterministic for a fixed
// (spec, n_random, seed).
struct SupSampler {
    GridSpec box;
    int n_random = 10000;
    std::uint64_t seed = 0;

    static SupSampler for_field(const DistributionField& f, int n_random = 10000,
                                std::uint64_t seed = 0) {
        if (!f.is_grid()) throw std::invalid_argument("SupSampler::for_field: field is not grid-backed");
        return {f.spec(), n_random, seed};
    }
};

struct SupResult {
    double value = 0.0;
    Vec3 arg_x{}, arg_v{};
};

template <class F>
SupResult weighted_sup_fn(F&& f, const WeightParams& w, const SupSampler& s) {
    s.box.validate();
    SupResult best;
    auto consider = [&](const Vec3& x, const Vec3& v) {
        const double val = std::abs(f(x, v)) * w.weight(x, v);
        if (val > best.value) best = {val, x, v};
    };
    const std::size_t nvc = s.box.v_count();
    for (std::size_t xi = 0; xi < s.box.x_count(); ++xi) {
        const Vec3 x = s.box.x_point(xi);
        for (std::size_t vi = 0; vi < nvc; ++vi) consider(x, s.box.v_point(vi));
    }
    if (s.box.nx == 1) {
        QuasiRandom<3> qr(s.seed);
        for (int i = 0; i < s.n_random; ++i) consider({}, box_point(qr.next(), s.box.v_max));
    } else {
        QuasiRandom<6> qr(s.seed);
        for (int i = 0; i < s.n_random; ++i) {
            const auto u = qr.next();
            consider(box_point({u[0], u[1], u[2]}, s.box.x_max),
                     box_point({u[3], u[4], u[5]}, s.box.v_max));
        }
    }
    return best;
}

inline SupResult weighted_sup(const DistributionField& f, const WeightParams& w,
                              const SupSampler& s) {
    if (!f) throw std::invalid_argument("weighted_sup: empty field");
    return weighted_sup_fn([&](const Vec3& x, const Vec3& v) { return f(x, v); }, w, s);
}

inline double weighted_norm(const DistributionField& f, const WeightParams& w,
                            const SupSampler& s) {
    return weighted_sup(f, w, s).value;
}

} // namespace wkh
