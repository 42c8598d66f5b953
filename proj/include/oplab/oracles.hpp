#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "oplab/domain.hpp"
#include "oplab/errors.hpp"

namespace oplab {

namespace detail {

inline double simpson_rule(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson_rule(a, m, fa, flm, fm);
    const double right = simpson_rule(m, b, fm, frm, fb);
    if (depth <= 0) throw QuadratureFailure("adaptive quadrature depth exhausted");
    if (std::abs(left + right - whole) <= 15 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 48) {
    if (a == b) return 0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = detail::simpson_rule(a, b, fa, fm, fb);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Fundamental solution of the Laplacian on the ball B_R(0) in dimension
/// N >= 3 with a unit point mass at the origin:
///   G(r) = c_N (r^{2-N} - R^{2-N}),  c_N = 1 / ((N-2) sigma_{N-1}).
struct GreenBall {
    int dim = 3;
    double radius = 1;

    GreenBall(int n, double r) : dim(n), radius(r) {
        if (n < 3) throw Error("ball kernel needs dimension >= 3");
        if (!(r > 0)) throw Error("ball radius must be positive");
    }

    double constant() const { return 1.0 / ((dim - 2) * unit_sphere_area(dim)); }

    double value(double r) const {
        if (r <= 0) throw PoleEvaluation("kernel evaluated at the pole");
        if (r > radius * (1 + 1e-12)) throw Error("kernel evaluated outside the ball");
        return constant() * (std::pow(r, 2 - dim) - std::pow(radius, 2 - dim));
    }
};

/// Radii (a_n, b_n) at which the two-layer obstacle
///   -G/2 on r < a_n, -n on a_n < r < b_n, -G on r > b_n
/// is continuous: G(a_n) = 2n and G(b_n) = n, found by bisection.
inline std::pair<double, double> sandwich_radii(int n, const GreenBall& gb) {
    if (n < 1) throw Error("level must be at least 1");
    auto solve = [&](double target) {
        double lo = gb.radius * 1e-14, hi = gb.radius;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (gb.value(mid) > target)
                lo = mid;
            else
                hi = mid;
            if (hi - lo <= 1e-12 * hi) break;
        }
        return 0.5 * (lo + hi);
    };
    const double a = solve(2.0 * n);
    const double b = solve(1.0 * n);
    return {a, b};
}

struct SandwichObstacle {
    int level = 1;
    double inner_radius = 0;
    double outer_radius = 0;
};

inline SandwichObstacle make_sandwich(int n, const GreenBall& gb) {
    auto [a, b] = sandwich_radii(n, gb);
    return {n, a, b};
}

/// Nodal obstacle values of the two-layer profile built on a discrete kernel
/// field (finite at the pole).
inline std::vector<double> sandwich_field(const DiscreteDomain& dom, const SandwichObstacle& sw,
                                          const std::vector<double>& kernel_field) {
    std::vector<double> psi(dom.node_count());
    for (int i = 0; i < dom.node_count(); ++i) {
        const double r = dom.coord_x(i);
        if (r < sw.inner_radius)
            psi[i] = -0.5 * kernel_field[i];
        else if (r < sw.outer_radius)
            psi[i] = -static_cast<double>(sw.level);
        else
            psi[i] = -kernel_field[i];
    }
    return psi;
}

/// Radial datum  f(x) = |x|^{-N} (-log|x|)^{-theta}  on the ball of radius
/// 1/2, with f(0) = 0.  Integrable for theta > 1 but outside H^{-1}; its
/// potential leaves W^{1,N/(N-1)}.
struct OrsinaDatum {
    double theta = 1.5;
    int dim = 3;
    double radius = 0.5;

    OrsinaDatum(double t, int n, double r = 0.5) : theta(t), dim(n), radius(r) {
        if (!(theta > 1)) throw InvalidTheta("theta must exceed 1");
        if (dim < 3) throw Error("datum needs dimension >= 3");
        if (!(radius > 0) || radius >= 1) throw Error("radius must lie in (0,1)");
    }

    double density(double r) const {
        if (r <= 0) return 0;
        return std::pow(r, -dim) * std::pow(-std::log(r), -theta);
    }

    /// Mass of the ball B_r: the radial mass integrand s^{N-1} f(s) has
    /// antiderivative (-log s)^{1-theta} / (theta-1) after substituting
    /// s = e^{-w}, so the cumulative mass is exact.
    double mass_in_ball(double r) const {
        if (r <= 0) return 0;
        return unit_sphere_area(dim) * std::pow(-std::log(r), 1 - theta) / (theta - 1);
    }

    double total_mass() const { return mass_in_ball(radius); }
};

struct OrsinaField {
    std::vector<double> density_values;  // per node, pole cell sampled at r = h/2
    std::vector<double> reference;       // quadrature solution of the radial problem
};

namespace detail {

/// u(r) = int_r^R mass(B_t) / (sigma t^{N-1}) dt, accumulated from the outer
/// boundary inward on a refined grid; the value kept for the pole node stops
/// at half the fine spacing.
inline std::vector<double> radial_potential_from_mass(
    const DiscreteDomain& dom, const std::function<double(double)>& mass_in_ball,
    int refine = 10) {
    const double sigma = unit_sphere_area(dom.dim);
    const int M = dom.cells_x;
    const double hf = dom.hx / refine;
    auto integrand = [&](double t) {
        return mass_in_ball(t) / (sigma * std::pow(t, dom.dim - 1));
    };
    // fine-grid breakpoints from R down to hf/2
    std::vector<double> breaks;
    for (int k = M * refine; k >= 1; --k) breaks.push_back(k * hf);
    breaks.push_back(0.5 * hf);

    std::vector<double> acc(breaks.size(), 0.0);
    for (size_t k = 1; k < breaks.size(); ++k) {
        const double hi = breaks[k - 1], lo = breaks[k];
        acc[k] = acc[k - 1] + adaptive_simpson(integrand, lo, hi, 1e-13 * (1 + acc[k - 1]), 40);
    }
    std::vector<double> u(dom.node_count(), 0.0);
    for (int i = M; i >= 1; --i) u[i] = acc[(M - i) * refine];
    u[0] = acc.back();
    return u;
}

}  // namespace detail

/// Density samples plus the quadrature reference potential on a 10x refined
/// radial grid.
inline OrsinaField orsina_field(const OrsinaDatum& od, const DiscreteDomain& dom) {
    if (dom.kind != MeshKind::Radial || dom.dim != od.dim ||
        std::abs(dom.length_x - od.radius) > 1e-12)
        throw Error("datum and mesh disagree");
    OrsinaField out;
    out.density_values.assign(dom.node_count(), 0.0);
    for (int i = 0; i < dom.node_count(); ++i) {
        const double r = (i == 0) ? 0.5 * dom.hx : dom.coord_x(i);
        out.density_values[i] = od.density(r);
    }
    out.reference = detail::radial_potential_from_mass(
        dom, [&](double t) { return od.mass_in_ball(std::min(t, od.radius)); });
    return out;
}

/// Independent reference solve of the radial problem
///   -(r^{N-1} u')' = r^{N-1} (datum),  u(R) = 0,  bounded flux at the pole,
/// by double quadrature.  The callable version integrates a continuum
/// cumulative-mass function; the loads version integrates the step cumulative
/// of assembled nodal loads piecewise exactly and is an independent route
/// against the finite-volume solve.
inline std::vector<double> radial_ode_oracle(const DiscreteDomain& dom,
                                             const std::function<double(double)>& mass_in_ball) {
    if (dom.kind != MeshKind::Radial) throw Error("radial oracle needs a radial mesh");
    return detail::radial_potential_from_mass(dom, mass_in_ball);
}

inline std::vector<double> radial_ode_oracle_loads(const DiscreteDomain& dom,
                                                   const std::vector<double>& nodal_loads) {
    if (dom.kind != MeshKind::Radial) throw Error("radial oracle needs a radial mesh");
    const double sigma = unit_sphere_area(dom.dim);
    const int M = dom.cells_x;
    const int N = dom.dim;
    // cumulative mass is constant between node radii; integrate t^{1-N}
    // exactly on each piece
    auto segment = [&](double lo, double hi) {
        if (N == 2) return std::log(hi / lo);
        return (std::pow(hi, 2 - N) - std::pow(lo, 2 - N)) / (2 - N);
    };
    std::vector<double> u(dom.node_count(), 0.0);
    double acc = 0;
    // walk inward: between r_i and r_{i+1} the mass inside is sum_{j<=i} loads
    std::vector<double> inside(M + 1, 0.0);
    inside[0] = nodal_loads[0];
    for (int i = 1; i <= M; ++i) inside[i] = inside[i - 1] + nodal_loads[i];
    for (int i = M - 1; i >= 1; --i) {
        acc += inside[i] / sigma * segment(dom.coord_x(i), dom.coord_x(i + 1));
        u[i] = acc;
    }
    // pole value: integrate down to half a spacing of the 10x refined grid
    const double rmin = dom.hx / 20.0;
    u[0] = acc + inside[0] / sigma * segment(rmin, dom.coord_x(1));
    return u;
}

}  // namespace oplab
