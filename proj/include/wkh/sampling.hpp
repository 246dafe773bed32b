#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "wkh/vec3.hpp"

namespace wkh {

// Additive-recurrence (Kronecker) low-discrepancy sequence in d dimensions,
// built on the generalized golden ratio g_d solving x^(d+1) = x + 1. Fully
// deterministic; the seed enters as an index offset so distinct seeds give
// distinct but reproducible point sets.
template <int Dim>
class QuasiRandom {
public:
    explicit QuasiRandom(std::uint64_t seed = 0) : index_(seed * 7919ull) {
        double g = 1.3;
        for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (Dim + 1));
        double a = 1.0;
        for (int k = 0; k < Dim; ++k) {
            a /= g;
            alpha_[k] = a;
        }
    }

    std::array<double, Dim> next() {
        ++index_;
        std::array<double, Dim> u;
        for (int k = 0; k < Dim; ++k) {
            double t = 0.5 + alpha_[k] * static_cast<double>(index_);
            u[k] = t - std::floor(t);
        }
        return u;
    }

private:
    std::array<double, Dim> alpha_{};
    std::uint64_t index_ = 0;
};

inline Vec3 box_point(const std::array<double, 3>& u, double extent) {
    return {(2.0 * u[0] - 1.0) * extent, (2.0 * u[1] - 1.0) * extent, (2.0 * u[2] - 1.0) * extent};
}

// Unit vector from two uniforms (area-preserving cylindrical map).
inline Vec3 sphere_point(double u0, double u1) {
    const double c = 2.0 * u0 - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double phi = 2.0 * std::acos(-1.0) * u1;
    return {s * std::cos(phi), s * std::sin(phi), c};
}

} // namespace wkh
