#pragma once

#include <cmath>
#include <stdexcept>

#include "wkh/vec3.hpp"

namespace wkh {

// Japanese bracket <y> = sqrt(1 + |y|^2).
inline double bracket(double y) { return std::sqrt(1.0 + y * y); }
inline double bracket(const Vec3& y) { return std::sqrt(1.0 + norm2(y)); }

// Parameters of the weighted sup norms
//   ||f|| = sup <alpha x>^p <beta v>^q |f(x,v)|,
// with mu the per-particle exponent of the hierarchy norm
//   sup_k e^{mu k} ||g^(k)||_k.
// The estimates behind the solver need p > 1 and q > 3; hierarchy runs
// additionally need e^{2 mu} above the contraction threshold, which is
// checked where the threshold's constant is available.
struct WeightParams {
    double p = 2.0;
    double q = 4.0;
    double alpha = 1.0;
    double beta = 1.0;
    double mu = 0.0;

    void validate() const {
        if (!(p > 1.0)) throw std::invalid_argument("WeightParams: p must be > 1");
        if (!(q > 3.0)) throw std::invalid_argument("WeightParams: q must be > 3");
        if (!(alpha > 0.0)) throw std::invalid_argument("WeightParams: alpha must be > 0");
        if (!(beta > 0.0)) throw std::invalid_argument("WeightParams: beta must be > 0");
    }

    double space_weight(const Vec3& x) const { return std::pow(bracket(alpha * x), p); }
    double velocity_weight(const Vec3& v) const { return std::pow(bracket(beta * v), q); }
    double weight(const Vec3& x, const Vec3& v) const { return space_weight(x) * velocity_weight(v); }
};

} // namespace wkh
