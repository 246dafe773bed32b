#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wkh/grid.hpp"
#include "wkh/vec3.hpp"

namespace wkh {

// One-particle distribution f(x, v), either formula-backed (a global
// evaluator on R^3 x R^3) or grid-backed (node values on a GridSpec,
// multilinear interpolation inside the box, zero outside it). Copies are
// cheap; the payload is shared and immutable.
class DistributionField {
public:
    using Formula = std::function<double(const Vec3&, const Vec3&)>;

    DistributionField() = default;

    static DistributionField formula(Formula f) {
        DistributionField out;
        out.formula_ = std::make_shared<Formula>(std::move(f));
        return out;
    }

    static DistributionField grid(GridSpec spec, std::vector<double> values) {
        spec.validate();
        if (values.size() != spec.node_count())
            throw std::invalid_argument("DistributionField: value count does not match grid");
        DistributionField out;
        out.grid_ = std::make_shared<GridData>(GridData{spec, std::move(values)});
        return out;
    }

    // Grid-backed field with node values taken from fn.
    template <class F>
    static DistributionField sample(const GridSpec& spec, F&& fn) {
        spec.validate();
        std::vector<double> vals(spec.node_count());
        const std::size_t nvc = spec.v_count();
        for (std::size_t xi = 0; xi < spec.x_count(); ++xi) {
            const Vec3 x = spec.x_point(xi);
            for (std::size_t vi = 0; vi < nvc; ++vi) vals[xi * nvc + vi] = fn(x, spec.v_point(vi));
        }
        return grid(spec, std::move(vals));
    }

    bool is_grid() const { return static_cast<bool>(grid_); }
    bool is_formula() const { return static_cast<bool>(formula_); }
    explicit operator bool() const { return is_grid() || is_formula(); }

    const GridSpec& spec() const {
        if (!grid_) throw std::logic_error("DistributionField: not grid-backed");
        return grid_->spec;
    }
    const std::vector<double>& values() const {
        if (!grid_) throw std::logic_error("DistributionField: not grid-backed");
        return grid_->values;
    }

    double operator()(const Vec3& x, const Vec3& v) const {
        if (grid_) return grid_->interpolate(x, v);
        return (*formula_)(x, v);
    }

    struct GridData {
        GridSpec spec;
        std::vector<double> values;

        double interpolate(const Vec3& x, const Vec3& v) const {
            using detail::axis_stencil;
            const auto vx = axis_stencil(v.x, spec.v_max, spec.nv, spec.layout);
            const auto vy = axis_stencil(v.y, spec.v_max, spec.nv, spec.layout);
            const auto vz = axis_stencil(v.z, spec.v_max, spec.nv, spec.layout);
            if (vx.outside || vy.outside || vz.outside) return 0.0;
            if (spec.nx == 1) return trilinear(values.data(), spec.nv, vx, vy, vz);
            const auto sx = axis_stencil(x.x, spec.x_max, spec.nx, spec.layout);
            const auto sy = axis_stencil(x.y, spec.x_max, spec.nx, spec.layout);
            const auto sz = axis_stencil(x.z, spec.x_max, spec.nx, spec.layout);
            if (sx.outside || sy.outside || sz.outside) return 0.0;
            const std::size_t nvc = spec.v_count();
            const std::size_t nx = static_cast<std::size_t>(spec.nx);
            double acc = 0.0;
            for (int dx = 0; dx < 2; ++dx) {
                const double wx = dx ? sx.t : 1.0 - sx.t;
                if (spec.nx > 1 && wx == 0.0) continue;
                for (int dy = 0; dy < 2; ++dy) {
                    const double wy = dy ? sy.t : 1.0 - sy.t;
                    if (wy == 0.0) continue;
                    for (int dz = 0; dz < 2; ++dz) {
                        const double wz = dz ? sz.t : 1.0 - sz.t;
                        if (wz == 0.0) continue;
                        const std::size_t xi =
                            (static_cast<std::size_t>(sx.i0 + dx) * nx + (sy.i0 + dy)) * nx +
                            (sz.i0 + dz);
                        acc += wx * wy * wz * trilinear(values.data() + xi * nvc, spec.nv, vx, vy, vz);
                    }
                }
            }
            return acc;
        }

        static double trilinear(const double* base, int n, const detail::AxisStencil& a,
                                const detail::AxisStencil& b, const detail::AxisStencil& c) {
            if (a.single) return base[0]; // nv == 1 along all axes
            const std::size_t nn = static_cast<std::size_t>(n);
            const double* p00 = base + (static_cast<std::size_t>(a.i0) * nn + b.i0) * nn + c.i0;
            const double* p01 = p00 + nn;       // b+1
            const double* p10 = p00 + nn * nn;  // a+1
            const double* p11 = p10 + nn;
            const double c0 = 1.0 - c.t, c1 = c.t;
            const double b0 = 1.0 - b.t, b1 = b.t;
            const double a0 = 1.0 - a.t, a1 = a.t;
            const double v00 = c0 * p00[0] + c1 * p00[1];
            const double v01 = c0 * p01[0] + c1 * p01[1];
            const double v10 = c0 * p10[0] + c1 * p10[1];
            const double v11 = c0 * p11[0] + c1 * p11[1];
            return a0 * (b0 * v00 + b1 * v01) + a1 * (b0 * v10 + b1 * v11);
        }
    };

    const GridData* grid_data() const { return grid_.get(); }

    // identity of the shared payload, not value equality
    bool shares_payload(const DistributionField& o) const {
        return grid_ == o.grid_ && formula_ == o.formula_;
    }

private:
    std::shared_ptr<const GridData> grid_;
    std::shared_ptr<const Formula> formula_;
};

// Free transport: (T^s f)(x, v) = f(x - s v, v). Grid-backed inputs are
// evaluated through interpolation; the result is formula-backed either way.
// An nx = 1 grid is x-independent, so transport leaves it unchanged.
inline DistributionField transport(const DistributionField& f, double s) {
    if (!f) throw std::invalid_argument("transport: empty field");
    if (f.is_grid() && f.spec().nx == 1) return f;
    return DistributionField::formula(
        [f, s](const Vec3& x, const Vec3& v) { return f(x - s * v, v); });
}

inline double interpolate(const DistributionField& f, const Vec3& x, const Vec3& v) {
    return f(x, v);
}

} // namespace wkh
