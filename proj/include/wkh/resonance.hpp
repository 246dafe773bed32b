#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>

#include "wkh/vec3.hpp"

namespace wkh {

// Outgoing pair of the resonant quadruple. For incoming (v, v1) and a unit
// direction sigma,
//   v2 = (v+v1)/2 + (|v-v1|/2) sigma,   v3 = (v+v1)/2 - (|v-v1|/2) sigma,
// which enforces v + v1 = v2 + v3 and |v|^2 + |v1|^2 = |v2|^2 + |v3|^2
// exactly on the sphere |sigma| = 1. Flipping sigma swaps (v2, v3).
inline std::pair<Vec3, Vec3> post_collision(const Vec3& v, const Vec3& v1, const Vec3& sigma) {
    if (std::abs(norm2(sigma) - 1.0) > 1e-12)
        throw std::invalid_argument("post_collision: sigma must be a unit vector");
    const Vec3 mid = 0.5 * (v + v1);
    const Vec3 half = (0.5 * norm(v - v1)) * sigma;
    return {mid + half, mid - half};
}

// Pairwise differences W_ij = w_i - w_j of a resonant quadruple
// (w_0, w_1, w_2, w_3) = (v, v1, v2, v3).
struct ResonantQuadruple {
    Vec3 v, v1, v2, v3;

    Vec3 w01() const { return v - v1; }
    Vec3 w23() const { return v2 - v3; }
    Vec3 w02() const { return v - v2; }
    Vec3 w03() const { return v - v3; }
};

// Residuals of the algebraic identities satisfied on the resonant manifold,
// each normalized by the natural squared scale |W01|^2 so they are
// comparable across magnitudes:
//   orthogonality   W02 . W03 = 0
//   equal lengths   |W01| = |W23|
//   Pythagoras      |W02|^2 + |W03|^2 = |W01|^2
//   product         |W02| |W03| = (|W01|^2 / 2) sqrt(1 - (What01 . What23)^2)
struct ManifoldReport {
    double orthogonality = 0.0;
    double magnitude = 0.0;
    double pythagoras = 0.0;
    double product = 0.0;

    double max_residual() const {
        return std::max(std::max(orthogonality, magnitude), std::max(pythagoras, product));
    }
};

inline ManifoldReport manifold_identities(const ResonantQuadruple& r) {
    const Vec3 w01 = r.w01(), w23 = r.w23(), w02 = r.w02(), w03 = r.w03();
    const double s = norm2(w01);
    if (s == 0.0) throw std::invalid_argument("manifold_identities: degenerate quadruple (v = v1)");
    ManifoldReport rep;
    rep.orthogonality = std::abs(dot(w02, w03)) / s;
    rep.magnitude = std::abs(norm(w01) - norm(w23)) * norm(w01) / s;
    rep.pythagoras = std::abs(norm2(w02) + norm2(w03) - s) / s;
    const double cosang = dot(w01, w23) / (norm(w01) * norm(w23));
    const double rhs = 0.5 * s * std::sqrt(std::max(0.0, 1.0 - cosang * cosang));
    rep.product = std::abs(norm(w02) * norm(w03) - rhs) / s;
    return rep;
}

// Lower bound on the smaller outgoing difference:
//   min(|W02|, |W03|) >= (|W01|/2) sqrt(1 - (What01 . What23)^2).
// Returns the slack (lhs - rhs); nonnegative up to roundoff on the manifold.
inline double min_estimate_slack(const ResonantQuadruple& r) {
    const Vec3 w01 = r.w01(), w23 = r.w23();
    const double n01 = norm(w01), n23 = norm(w23);
    if (n01 == 0.0) throw std::invalid_argument("min_estimate_slack: degenerate quadruple (v = v1)");
    const double cosang = dot(w01, w23) / (n01 * n23);
    const double rhs = 0.5 * n01 * std::sqrt(std::max(0.0, 1.0 - cosang * cosang));
    const double lhs = std::min(norm(r.w02()), norm(r.w03()));
    return lhs - rhs;
}

inline bool min_estimate_check(const ResonantQuadruple& r, double tol = 1e-12) {
    return min_estimate_slack(r) >= -tol * std::max(1.0, norm2(r.w01()));
}

} // namespace wkh
