#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wkh/vec3.hpp"
#include "wkh/weights.hpp"

namespace wkh {

enum class NodeLayout { Uniform, CellCentered };

// Truncated phase-space box [-x_max, x_max]^3 x [-v_max, v_max]^3 with nx
// (resp. nv) nodes per spatial (velocity) axis. Uniform layout includes the
// endpoints; CellCentered puts nodes at cell midpoints. An axis with a
// single node is constant along that axis, which is how the homogeneous
// mode (nx = 1) drops the x-dependence.
struct GridSpec {
    double x_max = 1.0;
    double v_max = 1.0;
    int nx = 1;
    int nv = 8;
    NodeLayout layout = NodeLayout::Uniform;

    bool operator==(const GridSpec&) const = default;

    void validate() const {
        if (!(x_max > 0.0) || !(v_max > 0.0)) throw std::invalid_argument("GridSpec: extents must be > 0");
        if (nx < 1 || nv < 1) throw std::invalid_argument("GridSpec: node counts must be >= 1");
    }

    double axis_node(double extent, int n, int i) const {
        if (n == 1) return 0.0;
        if (layout == NodeLayout::Uniform) return -extent + (2.0 * extent) * i / (n - 1);
        return -extent + (2.0 * extent) * (i + 0.5) / n;
    }
    double x_node(int i) const { return axis_node(x_max, nx, i); }
    double v_node(int i) const { return axis_node(v_max, nv, i); }

    std::size_t x_count() const { return static_cast<std::size_t>(nx) * nx * nx; }
    std::size_t v_count() const { return static_cast<std::size_t>(nv) * nv * nv; }
    std::size_t node_count() const { return x_count() * v_count(); }

    Vec3 x_point(std::size_t flat) const {
        const std::size_t n = static_cast<std::size_t>(nx);
        return {x_node(static_cast<int>(flat / (n * n))), x_node(static_cast<int>((flat / n) % n)),
                x_node(static_cast<int>(flat % n))};
    }
    Vec3 v_point(std::size_t flat) const {
        const std::size_t n = static_cast<std::size_t>(nv);
        return {v_node(static_cast<int>(flat / (n * n))), v_node(static_cast<int>((flat / n) % n)),
                v_node(static_cast<int>(flat % n))};
    }

    // Smallest extent E with <scale*E>^-expo <= tol, used to size default
    // boxes from the weight decay.
    static double tail_extent(double scale, double expo, double tol) {
        if (!(scale > 0.0) || !(expo > 0.0) || !(tol > 0.0) || !(tol < 1.0))
            throw std::invalid_argument("tail_extent: need scale, expo > 0 and tol in (0,1)");
        const double b = std::pow(tol, -1.0 / expo); // <scale*E> = b
        return std::sqrt(b * b - 1.0) / scale;
    }
};

namespace detail {

struct AxisStencil {
    int i0 = 0;       // left node index
    double t = 0.0;   // fraction toward node i0+1
    bool outside = false;
    bool single = false;
};

inline AxisStencil axis_stencil(double c, double extent, int n, NodeLayout layout) {
    AxisStencil s;
    if (n == 1) {
        s.single = true;
        return s;
    }
    if (c < -extent || c > extent) {
        s.outside = true;
        return s;
    }
    double u;
    if (layout == NodeLayout::Uniform) {
        u = (c + extent) * (n - 1) / (2.0 * extent);
    } else {
        u = (c + extent) * n / (2.0 * extent) - 0.5; // node i sits at u = i
        if (u < 0.0) u = 0.0;                        // clamp the boundary half-cells
        if (u > n - 1.0) u = n - 1.0;
    }
    int i = static_cast<int>(u);
    if (i > n - 2) i = n - 2;
    s.i0 = i;
    s.t = u - i;
    return s;
}

} // namespace detail

} // namespace wkh
