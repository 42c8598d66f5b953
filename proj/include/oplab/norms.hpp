#pragma once

#include <cmath>
#include <vector>

#include "oplab/domain.hpp"
#include "oplab/errors.hpp"

namespace oplab {

enum class NormKind { H10Energy, H1Full, W1q, Lp, Linf };

struct NormSpec {
    NormKind which = NormKind::H10Energy;
    double exponent = 0;  // only for W1q / Lp

    static NormSpec h10() { return {NormKind::H10Energy, 0}; }
    static NormSpec h1() { return {NormKind::H1Full, 0}; }
    static NormSpec w1q(double q) {
        if (!(q > 1)) throw Error("W1q exponent must exceed 1");
        return {NormKind::W1q, q};
    }
    static NormSpec lp(double p) {
        if (!(p > 1)) throw Error("Lp exponent must exceed 1");
        return {NormKind::Lp, p};
    }
    static NormSpec linf() { return {NormKind::Linf, 0}; }
};

namespace detail {

inline void require_finite(const std::vector<double>& field) {
    for (double v : field)
        if (!std::isfinite(v)) throw InfiniteField("field has non-finite nodal values");
}

}  // namespace detail

/// Discrete gradient seminorm squared with unit coefficient: the face-sum
/// sum_f vol_f |du/dn|^2.  Coincides with u^T K u for zero-boundary fields.
inline double h10_energy_squared(const DiscreteDomain& dom, const std::vector<double>& field) {
    double acc = 0;
    for_each_face(dom, [&](int a, int b, double vol, double dist) {
        const double g = (field[b] - field[a]) / dist;
        acc += vol * g * g;
    });
    return acc;
}

inline double norm(const std::vector<double>& field, const NormSpec& spec,
                   const DiscreteDomain& dom) {
    detail::require_finite(field);
    switch (spec.which) {
        case NormKind::H10Energy:
            return std::sqrt(h10_energy_squared(dom, field));
        case NormKind::H1Full: {
            double mass = 0;
            for (int i = 0; i < dom.node_count(); ++i)
                mass += field[i] * field[i] * dom.control_volume[i];
            return std::sqrt(h10_energy_squared(dom, field) + mass);
        }
        case NormKind::W1q: {
            const double q = spec.exponent;
            double grad = 0;
            for_each_face(dom, [&](int a, int b, double vol, double dist) {
                grad += vol * std::pow(std::abs(field[b] - field[a]) / dist, q);
            });
            double lq = 0;
            for (int i = 0; i < dom.node_count(); ++i)
                lq += std::pow(std::abs(field[i]), q) * dom.control_volume[i];
            return std::pow(grad, 1.0 / q) + std::pow(lq, 1.0 / q);
        }
        case NormKind::Lp: {
            const double p = spec.exponent;
            double acc = 0;
            for (int i = 0; i < dom.node_count(); ++i)
                acc += std::pow(std::abs(field[i]), p) * dom.control_volume[i];
            return std::pow(acc, 1.0 / p);
        }
        case NormKind::Linf: {
            double m = 0;
            for (double v : field) m = std::max(m, std::abs(v));
            return m;
        }
    }
    return 0;
}

inline double norm(const std::vector<double>& field, const NormSpec& spec, const DomainPtr& dom) {
    return norm(field, spec, *dom);
}

}  // namespace oplab
