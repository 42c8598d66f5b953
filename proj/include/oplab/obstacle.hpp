#pragma once

#include <optional>
#include <vector>

#include "oplab/linear.hpp"
#include "oplab/measure.hpp"

namespace oplab {

/// Extended-real nodal obstacle.  kUnconstrained (-inf) disables the
/// constraint at a node; arithmetic helpers keep the sentinel intact.
/// An optional certificate is a measure rho whose potential dominates the
/// obstacle, validated when it is attached.
struct Obstacle {
    DomainPtr dom;
    std::vector<double> values;
    std::optional<DiscreteMeasure> certificate;

    bool constrained(int node) const { return values[node] != kUnconstrained; }
};

/// Boundary feasibility: psi may not exceed the boundary datum at boundary
/// nodes (0 for the homogeneous problem).
inline Obstacle make_obstacle(const DomainPtr& dom, std::vector<double> values,
                              const std::vector<double>* boundary_datum = nullptr) {
    if (static_cast<int>(values.size()) != dom->node_count())
        throw Error("obstacle size does not match mesh");
    for (int n = 0; n < dom->node_count(); ++n) {
        if (dom->is_interior(n)) continue;
        const double cap = boundary_datum ? (*boundary_datum)[n] : 0.0;
        if (values[n] != kUnconstrained && values[n] > cap + 1e-12 * (1 + std::abs(cap)))
            throw InfeasibleObstacle("obstacle exceeds boundary datum");
    }
    Obstacle psi;
    psi.dom = dom;
    psi.values = std::move(values);
    return psi;
}

inline Obstacle unconstrained_obstacle(const DomainPtr& dom) {
    return make_obstacle(dom, std::vector<double>(dom->node_count(), kUnconstrained));
}

inline Obstacle constant_obstacle(const DomainPtr& dom, double level) {
    if (level > 0) throw InfeasibleObstacle("constant obstacle above the boundary datum");
    return make_obstacle(dom, std::vector<double>(dom->node_count(), level));
}

/// Checks u_rho >= psi - 1e-8 at every interior node before storing rho.
inline void attach_certificate(Obstacle& psi, const EllipticOperator& op,
                               const DiscreteMeasure& rho) {
    const auto u_rho = solve_linear(op, rho);
    for (int n = 0; n < psi.dom->node_count(); ++n) {
        if (!psi.dom->is_interior(n) || !psi.constrained(n)) continue;
        if (u_rho[n] < psi.values[n] - 1e-8)
            throw CertificateInvalid("certificate potential lies below the obstacle");
    }
    psi.certificate = rho;
}

/// psi - w nodewise, leaving unconstrained nodes unconstrained.
inline Obstacle obstacle_minus_field(const Obstacle& psi, const std::vector<double>& w) {
    Obstacle out;
    out.dom = psi.dom;
    out.values.resize(psi.values.size());
    for (size_t i = 0; i < psi.values.size(); ++i)
        out.values[i] = psi.constrained(static_cast<int>(i)) ? psi.values[i] - w[i] : kUnconstrained;
    out.certificate = psi.certificate;
    return out;
}

inline Obstacle obstacle_plus_field(const Obstacle& psi, const std::vector<double>& w) {
    std::vector<double> neg(w.size());
    for (size_t i = 0; i < w.size(); ++i) neg[i] = -w[i];
    return obstacle_minus_field(psi, neg);
}

}  // namespace oplab
