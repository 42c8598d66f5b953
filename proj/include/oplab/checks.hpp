#pragma once

#include <random>
#include <string>
#include <vector>

#include "oplab/capacity.hpp"
#include "oplab/norms.hpp"
#include "oplab/vi.hpp"

namespace oplab {

struct CheckRow {
    std::string name;
    bool pass = false;
    double value = 0;
    double limit = 0;
};

inline bool all_pass(const std::vector<CheckRow>& rows) {
    for (const auto& r : rows)
        if (!r.pass) return false;
    return true;
}

/// Per-solution invariants: feasibility, sign of the reaction, componentwise
/// complementarity, the truncation energy bound for the linear part, and the
/// reaction-mass bound when the obstacle carries a certificate.
inline std::vector<CheckRow> check_solution_invariants(const EllipticOperator& op,
                                                       const DiscreteMeasure& mu,
                                                       const Obstacle& psi,
                                                       const VISolution& sol) {
    std::vector<CheckRow> rows;
    const auto& dom = *op.dom;
    const double scale = sol.scale;

    double worst_feas = 0, worst_lambda = 0, worst_comp = 0, max_gap = 0;
    for (int k = 0; k < dom.interior_count(); ++k) {
        const int n = dom.interior_nodes[k];
        worst_lambda = std::min(worst_lambda, sol.lambda[n]);
        if (!psi.constrained(n)) continue;
        const double gap = sol.u[n] - psi.values[n];
        worst_feas = std::min(worst_feas, gap);
        max_gap = std::max(max_gap, gap);
        worst_comp = std::max(worst_comp, std::abs(sol.lambda[n] * gap));
    }
    rows.push_back({"feasibility", worst_feas >= -1e-9 * scale, worst_feas, -1e-9 * scale});
    rows.push_back({"reaction-sign", worst_lambda >= -1e-9 * scale, worst_lambda, -1e-9 * scale});
    const double comp_limit = 1e-8 * scale * (1 + max_gap);
    rows.push_back({"complementarity", worst_comp <= comp_limit, worst_comp, comp_limit});

    // truncation energy of the linear part: gamma |D T_k u|^2 <= k |mu|
    {
        const auto u_lin = solve_linear(op, mu);
        double umax = 0;
        for (double v : u_lin) umax = std::max(umax, std::abs(v));
        const double mass = mu.load_l1();
        bool ok = true;
        double worst_ratio = 0;
        for (double frac : {0.1, 0.3, 0.5, 0.9, 1.0}) {
            const double k = frac * umax;
            if (k <= 0) continue;
            const double lhs = op.gamma * h10_energy_squared(dom, truncate(u_lin, k));
            const double rhs = 1.01 * k * mass + 1e-12;
            worst_ratio = std::max(worst_ratio, lhs / rhs);
            ok = ok && lhs <= rhs;
        }
        rows.push_back({"truncation-energy", ok, worst_ratio, 1.0});
    }

    if (psi.certificate) {
        const double bound =
            negative_part_mass(mu.loads, psi.certificate->loads) * (1 + 1e-6) + 10e-10 * scale;
        const double mass = reaction_norm(sol);
        rows.push_back({"reaction-bound", mass <= bound, mass, bound});
    }
    return rows;
}

/// Comparison principles on one instance: ordered loads give ordered linear
/// and obstacle solutions, and a lowered obstacle never raises the solution.
inline std::vector<CheckRow> check_comparison(const EllipticOperator& op,
                                              const DiscreteMeasure& mu, const Obstacle& psi,
                                              const SolverConfig& cfg = {}) {
    std::vector<CheckRow> rows;
    const auto& dom = *op.dom;
    DiscreteMeasure bump = discretize_measure(
        op.dom, {}, make_density("bump", {{"amp", 0.5}, {"lx", dom.length_x},
                                          {"ly", dom.kind == MeshKind::Grid2d ? dom.length_y : 0}}));
    DiscreteMeasure mu2 = add_measures(mu, bump);

    const auto u1 = solve_linear(op, mu);
    const auto u2 = solve_linear(op, mu2);
    double worst = 0;
    for (size_t i = 0; i < u1.size(); ++i) worst = std::max(worst, u1[i] - u2[i]);
    rows.push_back({"comparison-linear", worst <= 1e-10 * (1 + mu.load_l1()), worst,
                    1e-10 * (1 + mu.load_l1())});

    const auto v1 = solve_vi(op, mu, psi, cfg);
    const auto v2 = solve_vi(op, mu2, psi, cfg);
    const double tol10 = 10 * cfg.tolerance_for(mu2.load_l1());
    worst = 0;
    for (size_t i = 0; i < v1.u.size(); ++i) worst = std::max(worst, v1.u[i] - v2.u[i]);
    rows.push_back({"comparison-vi-loads", worst <= tol10, worst, tol10});

    Obstacle lower = psi;
    for (size_t i = 0; i < lower.values.size(); ++i)
        if (lower.values[i] != kUnconstrained) lower.values[i] -= 0.25;
    const auto v0 = solve_vi(op, mu, lower, cfg);
    worst = 0;
    for (size_t i = 0; i < v0.u.size(); ++i) worst = std::max(worst, v0.u[i] - v1.u[i]);
    rows.push_back({"comparison-vi-obstacle", worst <= tol10, worst, tol10});
    return rows;
}

/// ||u1 - u2||_inf <= ||psi1 - psi2||_inf, exact discretely up to solver
/// tolerance; the perturbation must vanish where the obstacle is absent.
inline CheckRow check_uniform_stability(const EllipticOperator& op, const DiscreteMeasure& mu,
                                        const Obstacle& psi, const std::vector<double>& bounded_osc,
                                        double amplitude, const SolverConfig& cfg = {}) {
    Obstacle psi2 = psi;
    double c = 0;
    for (size_t i = 0; i < psi2.values.size(); ++i) {
        if (psi2.values[i] == kUnconstrained || !op.dom->is_interior(static_cast<int>(i)))
            continue;
        psi2.values[i] += amplitude * bounded_osc[i];
        c = std::max(c, std::abs(amplitude * bounded_osc[i]));
    }
    const auto s1 = solve_vi(op, mu, psi, cfg);
    const auto s2 = solve_vi(op, mu, psi2, cfg);
    double diff = 0;
    for (size_t i = 0; i < s1.u.size(); ++i) diff = std::max(diff, std::abs(s1.u[i] - s2.u[i]));
    const double limit = c + 10 * cfg.tolerance_for(mu.load_l1());
    return {"uniform-stability", diff <= limit, diff, limit};
}

/// Energy-norm stability under obstacle perturbations vanishing on the
/// boundary: ||u1-u2||_{H10} <= (C/gamma) ||psi1-psi2||_{H10}.
inline CheckRow check_energy_stability(const EllipticOperator& op, const DiscreteMeasure& mu,
                                       const Obstacle& psi, const std::vector<double>& pert,
                                       const SolverConfig& cfg = {}) {
    Obstacle psi2 = psi;
    for (size_t i = 0; i < psi2.values.size(); ++i)
        if (psi2.values[i] != kUnconstrained && op.dom->is_interior(static_cast<int>(i)))
            psi2.values[i] += pert[i];
    const auto s1 = solve_vi(op, mu, psi, cfg);
    const auto s2 = solve_vi(op, mu, psi2, cfg);
    std::vector<double> diff(s1.u.size());
    for (size_t i = 0; i < diff.size(); ++i) diff[i] = s1.u[i] - s2.u[i];
    const double num = std::sqrt(h10_energy_squared(*op.dom, diff));
    const double den = std::sqrt(h10_energy_squared(*op.dom, pert));
    const double ratio = den > 0 ? num / den : 0;
    const double limit = (op.continuity / op.gamma) * (1 + 1e-6);
    return {"energy-stability", ratio <= limit, ratio, limit};
}

// ---------------------------------------------------------------------------
// Random instance generation shared by the invariant CLI suite and the tests.

struct RandomInstance {
    DomainPtr dom;
    EllipticOperator op;
    DiscreteMeasure mu;
    Obstacle psi;
};

inline RandomInstance random_instance(std::mt19937_64& rng, bool variable_coefficient = false) {
    std::uniform_int_distribution<int> kind_pick(0, 2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    RandomInstance inst;
    const int kind = kind_pick(rng);
    if (kind == 0) {
        inst.dom = build_interval(1.0, 16 + static_cast<int>(unit(rng) * 32));
    } else if (kind == 1) {
        const int n = unit(rng) < 0.5 ? 2 : 3;
        inst.dom = build_radial_mesh(n, 1.0, 16 + static_cast<int>(unit(rng) * 32));
    } else {
        inst.dom = build_grid2d(1.0, 1.0, 6 + static_cast<int>(unit(rng) * 8),
                                6 + static_cast<int>(unit(rng) * 8));
    }
    CoefficientField a = constant_coefficient(1.0);
    if (variable_coefficient && unit(rng) < 0.5) {
        const double split = 0.25 + 0.5 * unit(rng);
        const double hi = 1.0 + 3.0 * unit(rng);
        const double lx = inst.dom->length_x;
        a = [split, hi, lx](double x, double) { return x < split * lx ? 1.0 : hi; };
    }
    inst.op = assemble_operator(inst.dom, a);

    std::vector<Atom> atoms;
    const int n_atoms = static_cast<int>(unit(rng) * 3);
    for (int k = 0; k < n_atoms; ++k) {
        Atom at;
        at.x = (0.1 + 0.8 * unit(rng)) * inst.dom->length_x;
        at.y = inst.dom->kind == MeshKind::Grid2d ? (0.1 + 0.8 * unit(rng)) * inst.dom->length_y
                                                  : 0.0;
        at.mass = 2.0 * unit(rng) - 1.0;
        at.singular = unit(rng) < 0.3;
        atoms.push_back(at);
    }
    DensitySpec dens = make_density(
        "fourier", {{"amp", 2.0 * unit(rng) - 1.0},
                    {"kx", 1.0 + std::floor(3 * unit(rng))},
                    {"ky", 1.0 + std::floor(3 * unit(rng))},
                    {"lx", inst.dom->length_x},
                    {"ly", inst.dom->kind == MeshKind::Grid2d ? inst.dom->length_y : 1.0},
                    {"phase", unit(rng)}});
    inst.mu = discretize_measure(inst.dom, atoms, dens);

    std::vector<double> psi_vals(inst.dom->node_count());
    const double depth = 0.05 + 0.5 * unit(rng);
    const double wob = 0.2 * unit(rng);
    for (int n = 0; n < inst.dom->node_count(); ++n) {
        const double x = inst.dom->coord_x(n), y = inst.dom->coord_y(n);
        psi_vals[n] = -depth + wob * std::sin(7 * x + 3 * y);
        if (psi_vals[n] > -1e-3) psi_vals[n] = -1e-3;
        if (unit(rng) < 0.08) psi_vals[n] = kUnconstrained;
    }
    inst.psi = make_obstacle(inst.dom, psi_vals);
    return inst;
}

}  // namespace oplab
