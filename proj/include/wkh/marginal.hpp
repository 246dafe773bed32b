#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wkh/field.hpp"
#include "wkh/grid.hpp"
#include "wkh/sampling.hpp"
#include "wkh/vec3.hpp"
#include "wkh/weights.hpp"

namespace wkh {

// k-particle marginal in the only representations the checks need: weighted
// sums of labeled products of one-particle fields. A tensor power is a
// labeled product with identical factors; a mixture of tensor powers covers
// the finite convex-combination data. Dense k-particle grids are
// deliberately unsupported (6k-dimensional storage).
class Marginal {
public:
    struct Component {
        double weight = 1.0;
        std::vector<DistributionField> factors; // one per particle slot
    };

    Marginal() = default;

    static Marginal tensor_power(const DistributionField& h, int order) {
        if (!h) throw std::invalid_argument("Marginal::tensor_power: empty field");
        if (order < 1) throw std::invalid_argument("Marginal::tensor_power: order must be >= 1");
        Marginal m;
        m.order_ = order;
        m.parts_.push_back({1.0, std::vector<DistributionField>(static_cast<std::size_t>(order), h)});
        return m;
    }

    static Marginal labeled(std::vector<DistributionField> factors) {
        if (factors.empty()) throw std::invalid_argument("Marginal::labeled: no factors");
        for (const auto& f : factors)
            if (!f) throw std::invalid_argument("Marginal::labeled: empty factor");
        Marginal m;
        m.order_ = static_cast<int>(factors.size());
        m.parts_.push_back({1.0, std::move(factors)});
        return m;
    }

    static Marginal mixture(const std::vector<double>& weights,
                            const std::vector<DistributionField>& components, int order) {
        if (weights.size() != components.size() || weights.empty())
            throw std::invalid_argument("Marginal::mixture: weight/component mismatch");
        Marginal m;
        m.order_ = order;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            Marginal t = tensor_power(components[i], order);
            t.parts_.front().weight = weights[i];
            m.parts_.push_back(std::move(t.parts_.front()));
        }
        return m;
    }

    static Marginal assemble(std::vector<Component> parts) {
        if (parts.empty()) throw std::invalid_argument("Marginal::assemble: no components");
        Marginal m;
        m.order_ = static_cast<int>(parts.front().factors.size());
        if (m.order_ < 1) throw std::invalid_argument("Marginal::assemble: empty component");
        for (const auto& c : parts) {
            if (static_cast<int>(c.factors.size()) != m.order_)
                throw std::invalid_argument("Marginal::assemble: mixed component orders");
            for (const auto& f : c.factors)
                if (!f) throw std::invalid_argument("Marginal::assemble: empty factor");
        }
        m.parts_ = std::move(parts);
        return m;
    }

    int order() const { return order_; }
    const std::vector<Component>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }

    double operator()(std::span<const Vec3> X, std::span<const Vec3> V) const {
        if (static_cast<int>(X.size()) != order_ || static_cast<int>(V.size()) != order_)
            throw std::invalid_argument("Marginal: argument count does not match order");
        double acc = 0.0;
        for (const auto& c : parts_) {
            double prod = c.weight;
            for (int m = 0; m < order_ && prod != 0.0; ++m)
                prod *= c.factors[static_cast<std::size_t>(m)](X[static_cast<std::size_t>(m)],
                                                              V[static_cast<std::size_t>(m)]);
            acc += prod;
        }
        return acc;
    }

    // T_k^s applied factor by factor; exact for formula-backed factors.
    Marginal transported(double s) const {
        if (s == 0.0) return *this;
        Marginal out;
        out.order_ = order_;
        out.parts_.reserve(parts_.size());
        for (const auto& c : parts_) {
            Component nc{c.weight, {}};
            nc.factors.reserve(c.factors.size());
            for (const auto& f : c.factors) nc.factors.push_back(transport(f, s));
            out.parts_.push_back(std::move(nc));
        }
        return out;
    }

    // S_{j,j+2}: exchanges the argument pairs (j-1, j) and (j+1, j+2). On a
    // labeled product this is the factor permutation by the same involution.
    Marginal swapped(int j) const {
        if (j < 2) throw std::invalid_argument("Marginal::swapped: j must be >= 2");
        if (order_ <= j + 1)
            throw std::invalid_argument("Marginal::swapped: order must exceed j + 1");
        Marginal out;
        out.order_ = order_;
        out.parts_.reserve(parts_.size());
        for (const auto& c : parts_) {
            Component nc{c.weight, c.factors};
            std::swap(nc.factors[static_cast<std::size_t>(j - 2)],
                      nc.factors[static_cast<std::size_t>(j)]);
            std::swap(nc.factors[static_cast<std::size_t>(j - 1)],
                      nc.factors[static_cast<std::size_t>(j + 1)]);
            out.parts_.push_back(std::move(nc));
        }
        return out;
    }

private:
    int order_ = 0;
    std::vector<Component> parts_;
};

// Convex-combination data: weights and one-particle component densities.
// Mass normalization is a quadrature statement and lives with the
// admissibility check, not here.
struct MixtureData {
    std::vector<double> weights;
    std::vector<DistributionField> components;

    void validate() const {
        if (weights.empty() || weights.size() != components.size())
            throw std::invalid_argument("MixtureData: weight/component mismatch");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw std::invalid_argument("MixtureData: negative weight");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("MixtureData: weights must sum to 1");
        for (const auto& c : components)
            if (!c) throw std::invalid_argument("MixtureData: empty component");
    }

    Marginal marginal(int k) const {
        validate();
        return Marginal::mixture(weights, components, k);
    }
};

// Product weight over particle slots.
inline double tuple_weight(const WeightParams& w, std::span<const Vec3> X,
                           std::span<const Vec3> V) {
    double prod = 1.0;
    for (std::size_t i = 0; i < X.size(); ++i) prod *= w.weight(X[i], V[i]);
    return prod;
}

struct TuplePoint {
    std::vector<Vec3> X, V;
};

// Quasi-random k-particle sample tuples over the box of a GridSpec.
inline std::vector<TuplePoint> sample_tuples(const GridSpec& box, int k, int count,
                                             std::uint64_t seed) {
    box.validate();
    if (k < 1) throw std::invalid_argument("sample_tuples: k must be >= 1");
    std::vector<TuplePoint> out;
    out.reserve(static_cast<std::size_t>(count));
    QuasiRandom<6> qr(seed);
    for (int i = 0; i < count; ++i) {
        TuplePoint p;
        p.X.reserve(static_cast<std::size_t>(k));
        p.V.reserve(static_cast<std::size_t>(k));
        for (int m = 0; m < k; ++m) {
            const auto u = qr.next();
            p.X.push_back(box_point({u[0], u[1], u[2]}, box.x_max));
            p.V.push_back(box_point({u[3], u[4], u[5]}, box.v_max));
        }
        out.push_back(std::move(p));
    }
    return out;
}

// Tuples that repeat a single draw across all slots. On these the weighted
// sup of a tensor power factors exactly as the k-th power of the
// one-particle sup over the same draws.
inline std::vector<TuplePoint> diagonal_tuples(const GridSpec& box, int k, int count,
                                               std::uint64_t seed) {
    box.validate();
    if (k < 1) throw std::invalid_argument("diagonal_tuples: k must be >= 1");
    std::vector<TuplePoint> out;
    out.reserve(static_cast<std::size_t>(count));
    QuasiRandom<6> qr(seed);
    for (int i = 0; i < count; ++i) {
        const auto u = qr.next();
        const Vec3 x = box_point({u[0], u[1], u[2]}, box.x_max);
        const Vec3 v = box_point({u[3], u[4], u[5]}, box.v_max);
        out.push_back({std::vector<Vec3>(static_cast<std::size_t>(k), x),
                       std::vector<Vec3>(static_cast<std::size_t>(k), v)});
    }
    return out;
}

// Weighted sup of a marginal over a fixed tuple set.
inline double marginal_norm(const Marginal& m, const WeightParams& w,
                            std::span<const TuplePoint> tuples) {
    double best = 0.0;
    for (const auto& p : tuples) {
        const double val = std::abs(m(p.X, p.V)) * tuple_weight(w, p.X, p.V);
        if (val > best) best = val;
    }
    return best;
}

} // namespace wkh
