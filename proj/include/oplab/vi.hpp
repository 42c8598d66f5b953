#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>
#include <vector>

#include "oplab/linear.hpp"
#include "oplab/obstacle.hpp"
#include "oplab/operator.hpp"

namespace oplab {

struct SolverConfig {
    double omega = 0;      // 0 -> 1.5 on 1-D kinds, 1.8 on grids
    double tolerance = 0;  // 0 -> 1e-10 * (1 + l1 of loads)
    long max_sweeps = 0;   // 0 -> 200 * unknown count

    double omega_for(const DiscreteDomain& dom) const {
        if (omega != 0 && !(omega > 0 && omega < 2))
            throw Error("relaxation factor must lie in (0, 2)");
        if (omega > 0) return omega;
        return dom.kind == MeshKind::Grid2d ? 1.8 : 1.5;
    }
    double tolerance_for(double load_l1) const {
        return tolerance > 0 ? tolerance : 1e-10 * (1.0 + load_l1);
    }
    long sweeps_for(int unknowns) const {
        return max_sweeps > 0 ? max_sweeps : 200L * unknowns;
    }
};

/// Mesh-adapted relaxation factor for fine meshes, where the default omega
/// would need more than the allotted sweep budget.
inline SolverConfig tuned_config(const DiscreteDomain& dom) {
    SolverConfig cfg;
    const double extent =
        dom.kind == MeshKind::Grid2d ? std::min(dom.length_x, dom.length_y) : dom.length_x;
    cfg.omega = 2.0 / (1.0 + std::sin(std::numbers::pi_v<double> * dom.min_spacing() / extent));
    return cfg;
}

struct VISolution {
    std::vector<double> u;       // all nodes, zero on the boundary
    std::vector<double> lambda;  // obstacle reaction per node (zero at boundary)
    double residual = 0;         // final complementarity residual
    long iterations = 0;         // PSOR sweeps
    std::vector<int> active_set; // nodes with u - psi below the activation tolerance
    double scale = 1;            // 1 + l1 of the loads + sup of the solution
};

inline double reaction_norm(const VISolution& sol) {
    double s = 0;
    for (double v : sol.lambda) s += std::abs(v);
    return s;
}

/// Componentwise (-k) v (u ^ k).
inline std::vector<double> truncate(const std::vector<double>& field, double k) {
    if (k < 0) throw Error("truncation level must be nonnegative");
    std::vector<double> out(field.size());
    for (size_t i = 0; i < field.size(); ++i)
        out[i] = std::max(-k, std::min(field[i], k));
    return out;
}

namespace detail {

struct LcpResult {
    Eigen::VectorXd x;
    Eigen::VectorXd lambda;
    double residual = 0;
    long sweeps = 0;
};

inline double complementarity_residual(const Eigen::VectorXd& r, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& lower) {
    double worst = 0;
    for (int i = 0; i < x.size(); ++i) {
        double ri;
        if (std::isfinite(lower[i]))
            ri = std::abs(std::min(r[i], x[i] - lower[i]));
        else
            ri = std::abs(r[i]);
        worst = std::max(worst, ri);
    }
    return worst;
}

/// Projected SOR for A x >= b, x >= lower, (x - lower) . (A x - b) = 0 with a
/// symmetric M-matrix A.  Sweeps run in fixed index order, so results are
/// bit-reproducible.  The iterate stays feasible; the limit is the least
/// element of the feasible set.
inline LcpResult psor(const SpMatRow& A, const Eigen::VectorXd& b, const Eigen::VectorXd& lower,
                      double omega, double tol, long max_sweeps) {
    const int n = static_cast<int>(A.rows());
    Eigen::VectorXd diag(n);
    double max_diag = 0;
    for (int i = 0; i < n; ++i) {
        diag[i] = A.coeff(i, i);
        max_diag = std::max(max_diag, diag[i]);
    }
    // the residual evaluation rounds at this level; requesting less keeps
    // sweeping forever
    const double eps_floor = 64 * std::numeric_limits<double>::epsilon() * max_diag;

    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i)
        x[i] = std::isfinite(lower[i]) ? std::max(lower[i], 0.0) : 0.0;

    LcpResult res;
    for (long sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int i = 0; i < n; ++i) {
            double acc = b[i];
            for (SpMatRow::InnerIterator it(A, i); it; ++it)
                if (it.col() != i) acc -= it.value() * x[it.col()];
            double xi = (1 - omega) * x[i] + omega * acc / diag[i];
            if (std::isfinite(lower[i]) && xi < lower[i]) xi = lower[i];
            x[i] = xi;
        }
        Eigen::VectorXd r = A * x - b;
        const double c = complementarity_residual(r, x, lower);
        const double tol_eff =
            std::max(tol, eps_floor * (1 + x.lpNorm<Eigen::Infinity>()));
        if (c < tol_eff || sweep == max_sweeps) {
            res.x = std::move(x);
            res.lambda = std::move(r);
            res.residual = c;
            res.sweeps = sweep;
            if (c >= tol_eff) throw NotConverged("projected SOR hit the sweep limit");
            return res;
        }
    }
    throw NotConverged("projected SOR hit the sweep limit");
}

inline Eigen::VectorXd interior_lower(const DiscreteDomain& dom, const Obstacle& psi) {
    Eigen::VectorXd lower(dom.interior_count());
    for (int k = 0; k < dom.interior_count(); ++k) {
        const int node = dom.interior_nodes[k];
        lower[k] = psi.values[node];
        if (lower[k] == kUnconstrained) lower[k] = -std::numeric_limits<double>::infinity();
    }
    return lower;
}

inline void check_boundary_feasible(const DiscreteDomain& dom, const Obstacle& psi,
                                    const std::vector<double>* datum = nullptr) {
    for (int n = 0; n < dom.node_count(); ++n) {
        if (dom.is_interior(n) || !psi.constrained(n)) continue;
        const double cap = datum ? (*datum)[n] : 0.0;
        if (psi.values[n] > cap + 1e-12 * (1 + std::abs(cap)))
            throw InfeasibleObstacle("obstacle exceeds the boundary datum");
    }
}

}  // namespace detail

/// Least supersolution above psi: projected SOR on the symmetric LCP
///   K u = loads + lambda, lambda >= 0, u >= psi, lambda . (u - psi) = 0.
inline VISolution solve_vi(const EllipticOperator& op, const DiscreteMeasure& mu,
                           const Obstacle& psi, const SolverConfig& cfg = {}) {
    const auto& dom = *op.dom;
    if (!same_mesh(op.dom, mu.dom) || !same_mesh(op.dom, psi.dom))
        throw Error("operator, measure and obstacle live on different meshes");
    detail::check_boundary_feasible(dom, psi);

    const Eigen::VectorXd b = interior_loads(op, mu);
    const double load_l1 = b.lpNorm<1>();
    const double tol = cfg.tolerance_for(load_l1);
    auto r = detail::psor(op.interior, b, detail::interior_lower(dom, psi),
                          cfg.omega_for(dom), tol, cfg.sweeps_for(dom.interior_count()));

    VISolution sol;
    sol.u = scatter_interior(dom, r.x);
    sol.lambda = scatter_interior(dom, r.lambda);
    sol.residual = r.residual;
    sol.iterations = r.sweeps;
    sol.scale = 1.0 + load_l1 + r.x.lpNorm<Eigen::Infinity>();
    const double act = 1e-7 * sol.scale;
    for (int k = 0; k < dom.interior_count(); ++k) {
        const int node = dom.interior_nodes[k];
        if (psi.constrained(node) && sol.u[node] - psi.values[node] <= act)
            sol.active_set.push_back(node);
    }
    return sol;
}

/// Direct primal active-set solve for small instances; used as an
/// independent cross-check of the PSOR path.
inline VISolution active_set_solve(const EllipticOperator& op, const DiscreteMeasure& mu,
                                   const Obstacle& psi) {
    const auto& dom = *op.dom;
    const int n = dom.interior_count();
    if (n > 2000) throw Error("active-set cross-check is limited to 2000 unknowns");
    const Eigen::VectorXd b = interior_loads(op, mu);
    const Eigen::VectorXd lower = detail::interior_lower(dom, psi);
    const double eps = 1e-12 * (1.0 + b.lpNorm<1>());

    std::vector<char> active(n, 0);
    Eigen::VectorXd x(n), lambda(n);
    for (long pass = 0; pass <= 2L * n + 8; ++pass) {
        std::vector<int> free_ids;
        for (int i = 0; i < n; ++i)
            if (!active[i]) free_ids.push_back(i);
        const int nf = static_cast<int>(free_ids.size());
        std::vector<int> where(n, -1);
        for (int k = 0; k < nf; ++k) where[free_ids[k]] = k;

        std::vector<Eigen::Triplet<double>> t;
        Eigen::VectorXd rhs(nf);
        for (int k = 0; k < nf; ++k) {
            const int i = free_ids[k];
            double acc = b[i];
            for (SpMatRow::InnerIterator it(op.interior, i); it; ++it) {
                const int j = static_cast<int>(it.col());
                if (active[j])
                    acc -= it.value() * lower[j];
                else
                    t.emplace_back(k, where[j], it.value());
            }
            rhs[k] = acc;
        }
        SpMatCol kff(nf, nf);
        kff.setFromTriplets(t.begin(), t.end());
        Eigen::SimplicialLLT<SpMatCol> llt(kff);
        if (llt.info() != Eigen::Success) throw SingularSystem("active-set subsystem");
        Eigen::VectorXd xf = llt.solve(rhs);

        for (int i = 0; i < n; ++i) x[i] = active[i] ? lower[i] : 0.0;
        for (int k = 0; k < nf; ++k) x[free_ids[k]] = xf[k];
        lambda = op.interior * x - b;

        bool changed = false;
        for (int i = 0; i < n; ++i) {
            if (!active[i] && std::isfinite(lower[i]) && x[i] < lower[i] - eps) {
                active[i] = 1;
                changed = true;
            } else if (active[i] && lambda[i] < -eps) {
                active[i] = 0;
                changed = true;
            }
        }
        if (!changed) break;
    }

    VISolution sol;
    sol.u = scatter_interior(dom, x);
    sol.lambda = scatter_interior(dom, lambda);
    sol.residual = detail::complementarity_residual(lambda, x, lower);
    sol.iterations = 0;
    sol.scale = 1.0 + b.lpNorm<1>() + x.lpNorm<Eigen::Infinity>();
    return sol;
}

/// Exact load-shift identity: the solve with datum mu+nu and obstacle psi
/// coincides with u_nu plus the solve with datum mu and obstacle psi - u_nu.
/// Returns (direct, shifted-and-lifted-back); the two u fields agree to
/// solver accuracy.
inline std::pair<VISolution, VISolution> shift_solve(const EllipticOperator& op,
                                                     const DiscreteMeasure& mu,
                                                     const DiscreteMeasure& nu,
                                                     const Obstacle& psi,
                                                     const SolverConfig& cfg = {}) {
    VISolution direct = solve_vi(op, add_measures(mu, nu), psi, cfg);
    const auto u_nu = solve_linear(op, nu);
    VISolution inner = solve_vi(op, mu, obstacle_minus_field(psi, u_nu), cfg);
    VISolution shifted = inner;
    for (size_t i = 0; i < shifted.u.size(); ++i) {
        shifted.u[i] = inner.u[i] + u_nu[i];
        shifted.scale = std::max(shifted.scale, 1.0 + std::abs(shifted.u[i]));
    }
    return {std::move(direct), std::move(shifted)};
}

/// Obstacle problem with boundary datum g: lift harmonically, solve against
/// the lowered obstacle, add the lift back.  The reaction does not depend on
/// g.
inline VISolution solve_op_g(const EllipticOperator& op, const DiscreteMeasure& mu,
                             const BoundaryData& g, const Obstacle& psi,
                             const SolverConfig& cfg = {}) {
    const auto& dom = *op.dom;
    detail::check_boundary_feasible(dom, psi, &g.values);
    const auto lift = harmonic_lift(op, g);
    VISolution inner = solve_vi(op, mu, obstacle_minus_field(psi, lift), cfg);
    VISolution sol = inner;
    for (size_t i = 0; i < sol.u.size(); ++i) {
        sol.u[i] = inner.u[i] + lift[i];
        sol.scale = std::max(sol.scale, 1.0 + std::abs(sol.u[i]));
    }
    sol.active_set.clear();
    const double act = 1e-7 * sol.scale;
    for (int k = 0; k < dom.interior_count(); ++k) {
        const int node = dom.interior_nodes[k];
        if (psi.constrained(node) && sol.u[node] - psi.values[node] <= act)
            sol.active_set.push_back(node);
    }
    return sol;
}

/// Componentwise minimum of two discrete supersolutions.  With an M-matrix
/// the minimum is again a supersolution; the residual of the result is
/// checked against 10x the admission tolerance.
inline std::vector<double> lattice_min(const std::vector<double>& u, const std::vector<double>& v,
                                       const EllipticOperator& op, const DiscreteMeasure& mu) {
    const Eigen::VectorXd b = interior_loads(op, mu);
    const double tol = 1e-9 * (1.0 + b.lpNorm<1>());
    const Eigen::VectorXd ru = operator_residual(op, u, b);
    const Eigen::VectorXd rv = operator_residual(op, v, b);
    if (ru.minCoeff() < -tol || rv.minCoeff() < -tol)
        throw NotSupersolution("input field is not a discrete supersolution");

    std::vector<double> m(u.size());
    for (size_t i = 0; i < u.size(); ++i) m[i] = std::min(u[i], v[i]);
    const Eigen::VectorXd rm = operator_residual(op, m, b);
    if (rm.minCoeff() < -10 * tol)
        throw Error("lattice property violated beyond tolerance");
    return m;
}

}  // namespace oplab
