#pragma once

#include <vector>

#include "oplab/measure.hpp"
#include "oplab/operator.hpp"

namespace oplab {

/// Boundary values, stored on all nodes; only boundary entries are read.
struct BoundaryData {
    std::vector<double> values;

    static BoundaryData constant(const DomainPtr& dom, double c) {
        return {std::vector<double>(dom->node_count(), c)};
    }
    static BoundaryData zero(const DomainPtr& dom) { return constant(dom, 0.0); }
};

inline Eigen::VectorXd interior_loads(const EllipticOperator& op, const DiscreteMeasure& mu) {
    const auto& dom = *op.dom;
    Eigen::VectorXd b(dom.interior_count());
    for (int k = 0; k < dom.interior_count(); ++k) b[k] = mu.loads[dom.interior_nodes[k]];
    return b;
}

inline std::vector<double> scatter_interior(const DiscreteDomain& dom, const Eigen::VectorXd& ui,
                                            double boundary_value = 0.0) {
    std::vector<double> f(dom.node_count(), boundary_value);
    for (int k = 0; k < dom.interior_count(); ++k) f[dom.interior_nodes[k]] = ui[k];
    return f;
}

/// Direct solve of K u = loads with zero boundary values.  Every nodal load
/// vector is admissible data at fixed mesh size, so no regularization step is
/// needed before solving.
inline std::vector<double> solve_linear(const EllipticOperator& op, const DiscreteMeasure& mu) {
    if (!same_mesh(op.dom, mu.dom)) throw Error("operator and measure live on different meshes");
    Eigen::VectorXd u = op.cholesky().solve(interior_loads(op, mu));
    return scatter_interior(*op.dom, u);
}

inline std::vector<double> solve_linear_loads(const EllipticOperator& op,
                                              const std::vector<double>& nodal_loads) {
    const auto& dom = *op.dom;
    Eigen::VectorXd b(dom.interior_count());
    for (int k = 0; k < dom.interior_count(); ++k) b[k] = nodal_loads[dom.interior_nodes[k]];
    Eigen::VectorXd u = op.cholesky().solve(b);
    return scatter_interior(dom, u);
}

/// Solves K u = 0 on the interior with prescribed boundary values.  The
/// M-matrix structure gives the discrete maximum principle
/// min g <= u <= max g.
inline std::vector<double> harmonic_lift(const EllipticOperator& op, const BoundaryData& g) {
    const auto& dom = *op.dom;
    const int ni = dom.interior_count();
    Eigen::VectorXd gb(dom.node_count() - ni);
    {
        int b = 0;
        for (int n = 0; n < dom.node_count(); ++n)
            if (!dom.is_interior(n)) {
                if (!std::isfinite(g.values[n]))
                    throw InfiniteField("boundary data must be finite");
                gb[b++] = g.values[n];
            }
    }
    Eigen::VectorXd rhs = -(op.boundary_coupling * gb);
    Eigen::VectorXd ui = op.cholesky().solve(rhs);
    std::vector<double> out(dom.node_count());
    {
        int b = 0;
        for (int n = 0; n < dom.node_count(); ++n)
            out[n] = dom.is_interior(n) ? ui[dom.interior_index[n]] : gb[b++];
    }
    return out;
}

}  // namespace oplab
