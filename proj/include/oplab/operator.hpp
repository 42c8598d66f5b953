#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <mutex>
#include <vector>

#include "oplab/domain.hpp"
#include "oplab/errors.hpp"

namespace oplab {

using SpMatRow = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using SpMatCol = Eigen::SparseMatrix<double, Eigen::ColMajor>;

using CoefficientField = std::function<double(double, double)>;

inline CoefficientField constant_coefficient(double value) {
    return [value](double, double) { return value; };
}

/// Finite-volume discretization of -div(a grad u) with homogeneous Dirichlet
/// conditions, split into the interior block and the interior/boundary
/// coupling.  The sign pattern is an M-matrix: positive diagonal, nonpositive
/// off-diagonal, weakly diagonally dominant rows.
struct EllipticOperator {
    DomainPtr dom;
    SpMatRow interior;           // stiffness restricted to interior nodes
    SpMatRow boundary_coupling;  // interior rows x boundary columns
    double gamma = 1;            // smallest face coefficient value
    double continuity = 1;       // largest face coefficient value

    struct Factorization {
        std::once_flag once;
        Eigen::SimplicialLLT<SpMatCol> llt;
        bool ok = false;
    };
    std::shared_ptr<Factorization> factor_cache = std::make_shared<Factorization>();

    const Eigen::SimplicialLLT<SpMatCol>& cholesky() const {
        std::call_once(factor_cache->once, [this] {
            SpMatCol k = interior;
            factor_cache->llt.compute(k);
            factor_cache->ok = factor_cache->llt.info() == Eigen::Success;
        });
        if (!factor_cache->ok) throw SingularSystem("stiffness factorization failed");
        return factor_cache->llt;
    }
};

/// Assembles the operator from face transmissibilities.  Radial and interval
/// meshes sample a at face midpoints; the tensor grid uses the harmonic mean
/// of the two node samples per face.
inline EllipticOperator assemble_operator(const DomainPtr& dom, const CoefficientField& a) {
    EllipticOperator op;
    op.dom = dom;
    const int ni = dom->interior_count();
    const int nb = dom->node_count() - ni;
    std::vector<int> boundary_index(dom->node_count(), -1);
    {
        int b = 0;
        for (int n = 0; n < dom->node_count(); ++n)
            if (!dom->is_interior(n)) boundary_index[n] = b++;
    }

    double amin = std::numeric_limits<double>::infinity();
    double amax = 0;
    std::vector<Eigen::Triplet<double>> tk, tb;
    auto add_face = [&](int na, int nb_node, double face_vol, double dist, double aface) {
        if (!(aface > 0)) throw NonEllipticCoefficient("coefficient must be positive");
        amin = std::min(amin, aface);
        amax = std::max(amax, aface);
        const double c = aface * face_vol / (dist * dist);
        const int ia = dom->interior_index[na];
        const int ib = dom->interior_index[nb_node];
        if (ia >= 0) {
            tk.emplace_back(ia, ia, c);
            if (ib >= 0)
                tk.emplace_back(ia, ib, -c);
            else
                tb.emplace_back(ia, boundary_index[nb_node], -c);
        }
        if (ib >= 0) {
            tk.emplace_back(ib, ib, c);
            if (ia >= 0)
                tk.emplace_back(ib, ia, -c);
            else
                tb.emplace_back(ib, boundary_index[na], -c);
        }
    };

    for_each_face(*dom, [&](int na, int nb_node, double face_vol, double dist) {
        double aface;
        if (dom->kind == MeshKind::Grid2d) {
            const double a1 = a(dom->coord_x(na), dom->coord_y(na));
            const double a2 = a(dom->coord_x(nb_node), dom->coord_y(nb_node));
            if (!(a1 > 0) || !(a2 > 0)) throw NonEllipticCoefficient("coefficient must be positive");
            aface = 2.0 * a1 * a2 / (a1 + a2);
        } else {
            aface = a(0.5 * (dom->coord_x(na) + dom->coord_x(nb_node)), 0.0);
        }
        add_face(na, nb_node, face_vol, dist, aface);
    });

    op.interior.resize(ni, ni);
    op.interior.setFromTriplets(tk.begin(), tk.end());
    op.boundary_coupling.resize(ni, nb);
    op.boundary_coupling.setFromTriplets(tb.begin(), tb.end());
    op.gamma = amin;
    op.continuity = amax;
    return op;
}

/// Residual K u - loads over interior nodes for a field given on all nodes,
/// honoring the field's boundary values through the coupling block.
inline Eigen::VectorXd operator_residual(const EllipticOperator& op,
                                         const std::vector<double>& field,
                                         const Eigen::VectorXd& interior_loads) {
    const auto& dom = *op.dom;
    const int ni = dom.interior_count();
    Eigen::VectorXd ui(ni);
    for (int k = 0; k < ni; ++k) ui[k] = field[dom.interior_nodes[k]];
    Eigen::VectorXd ub(dom.node_count() - ni);
    {
        int b = 0;
        for (int n = 0; n < dom.node_count(); ++n)
            if (!dom.is_interior(n)) ub[b++] = field[n];
    }
    return op.interior * ui + op.boundary_coupling * ub - interior_loads;
}

}  // namespace oplab
