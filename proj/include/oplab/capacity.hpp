#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oplab/obstacle.hpp"
#include "oplab/operator.hpp"
#include "oplab/vi.hpp"

namespace oplab {

struct CapacityResult {
    double value = 0;
    std::vector<double> potential;  // all nodes, zero on the boundary
    long iterations = 0;
};

namespace detail {

/// Full H1 matrix with unit coefficient: stiffness plus lumped mass over
/// interior nodes.
inline SpMatRow h1_matrix(const DomainPtr& dom) {
    EllipticOperator unit = assemble_operator(dom, constant_coefficient(1.0));
    SpMatRow a = unit.interior;
    for (int k = 0; k < dom->interior_count(); ++k)
        a.coeffRef(k, k) += dom->control_volume[dom->interior_nodes[k]];
    return a;
}

inline double capacity_omega(const DiscreteDomain& dom) {
    const double extent = dom.kind == MeshKind::Grid2d ? std::min(dom.length_x, dom.length_y)
                                                       : dom.length_x;
    const double t = std::numbers::pi_v<double> * dom.min_spacing() / extent;
    return 2.0 / (1.0 + std::sin(t));
}

}  // namespace detail

/// Reusable context so families of capacity solves share the H1 matrix and a
/// cache keyed by target node set.
struct CapacityContext {
    DomainPtr dom;
    SpMatRow a;
    double tolerance;
    mutable std::map<std::vector<int>, double> cache;

    explicit CapacityContext(const DomainPtr& d, double tol = 1e-13)
        : dom(d), a(detail::h1_matrix(d)), tolerance(tol) {}
};

/// Capacity of a node set: minimum of the full discrete H1 norm squared over
/// potentials that vanish on the boundary and dominate 1 on the set.  Solved
/// as an obstacle problem with indicator obstacle; the minimizer satisfies
/// 0 <= z <= 1.
inline CapacityResult capacity(const CapacityContext& ctx, const std::vector<int>& target) {
    CapacityResult res;
    res.potential.assign(ctx.dom->node_count(), 0.0);
    if (target.empty()) return res;

    const auto& dom = *ctx.dom;
    const int ni = dom.interior_count();
    Eigen::VectorXd lower =
        Eigen::VectorXd::Constant(ni, -std::numeric_limits<double>::infinity());
    for (int node : target) {
        const int k = dom.interior_index[node];
        if (k < 0) throw Error("capacity target must consist of interior nodes");
        lower[k] = 1.0;
    }
    auto r = detail::psor(ctx.a, Eigen::VectorXd::Zero(ni), lower,
                          detail::capacity_omega(dom), ctx.tolerance, 400L * ni + 20000);
    res.potential = scatter_interior(dom, r.x);
    res.value = r.x.dot(ctx.a * r.x);
    res.iterations = r.sweeps;
    return res;
}

inline CapacityResult capacity(const DomainPtr& dom, const std::vector<int>& target) {
    return capacity(CapacityContext(dom), target);
}

inline double cached_capacity(const CapacityContext& ctx, std::vector<int> target) {
    std::sort(target.begin(), target.end());
    auto it = ctx.cache.find(target);
    if (it != ctx.cache.end()) return it->second;
    const double v = capacity(ctx, target).value;
    ctx.cache.emplace(std::move(target), v);
    return v;
}

/// Interior nodes inside the box whose value exceeds t.  Unconstrained
/// sentinel values never qualify.
inline std::vector<int> level_set(const DiscreteDomain& dom, const std::vector<double>& values,
                                  double t, const Box& box) {
    if (!std::isfinite(t)) throw InvalidLevel("level must be finite");
    std::vector<int> out;
    for (int n = 0; n < dom.node_count(); ++n) {
        if (!dom.is_interior(n)) continue;
        if (values[n] == kUnconstrained) continue;
        if (values[n] > t && box.contains(dom, n)) out.push_back(n);
    }
    return out;
}

inline std::vector<int> level_set(const Obstacle& psi, double t, const Box& box) {
    return level_set(*psi.dom, psi.values, t, box);
}

/// Probe for the level-set convergence test: levels t with paired lower
/// levels s < t, and strictly nested box pairs with at least two mesh
/// spacings of margin.
struct LevelSetProbe {
    std::vector<double> levels;
    std::vector<double> lower_levels;
    std::vector<std::pair<Box, Box>> box_pairs;
    double eps_rel = 0.05;
};

namespace detail {

inline std::vector<std::pair<Box, Box>> default_box_pairs(const DiscreteDomain& dom) {
    std::vector<std::pair<Box, Box>> pairs;
    const double m = 2 * dom.min_spacing();
    if (dom.kind == MeshKind::Radial) {
        // outer box keeps a margin to the boundary even on coarse meshes
        for (double frac : {0.35, 0.55, 0.75}) {
            const double c = std::min(frac * dom.length_x, dom.length_x - 2 * m);
            pairs.push_back({Box{0, c, 0, 0}, Box{0, c + m, 0, 0}});
        }
    } else if (dom.kind == MeshKind::Interval) {
        const double mid = 0.5 * dom.length_x;
        for (double frac : {0.35, 0.55, 0.75}) {
            const double w =
                std::min(0.5 * frac * dom.length_x, 0.5 * dom.length_x - 2 * m);
            pairs.push_back({Box{mid - w, mid + w, 0, 0}, Box{mid - w - m, mid + w + m, 0, 0}});
        }
    } else {
        const double cx = 0.5 * dom.length_x, cy = 0.5 * dom.length_y;
        for (double frac : {0.35, 0.55, 0.75}) {
            const double wx = std::min(0.5 * frac * dom.length_x, cx - 2 * m);
            const double wy = std::min(0.5 * frac * dom.length_y, cy - 2 * m);
            pairs.push_back({Box{cx - wx, cx + wx, cy - wy, cy + wy},
                             Box{cx - wx - m, cx + wx + m, cy - wy - m, cy + wy + m}});
        }
    }
    return pairs;
}

inline std::pair<double, double> finite_range(const std::vector<double>& values,
                                              const DiscreteDomain& dom, bool interior_only) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int n = 0; n < dom.node_count(); ++n) {
        if (interior_only && !dom.is_interior(n)) continue;
        const double v = values[n];
        if (!std::isfinite(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {lo, hi};
}

}  // namespace detail

/// Nine levels spanning the finite range of the limit obstacle (falling back
/// to the family's range when the limit is entirely unconstrained), gap equal
/// to the level spacing, three nested box pairs, 5% capacity slack.
inline LevelSetProbe default_probe(const DiscreteDomain& dom,
                                   const std::vector<std::vector<double>>& family,
                                   const std::vector<double>& limit) {
    auto [lo, hi] = detail::finite_range(limit, dom, true);
    if (!std::isfinite(lo)) {
        // fully unconstrained limit: calibrate the levels on the first half of
        // the family, so the tail is probed where the early members lived
        lo = std::numeric_limits<double>::infinity();
        hi = -std::numeric_limits<double>::infinity();
        const size_t head = std::max<size_t>(1, family.size() / 2);
        for (size_t k = 0; k < head; ++k) {
            auto [l, h] = detail::finite_range(family[k], dom, true);
            lo = std::min(lo, l);
            hi = std::max(hi, h);
        }
    }
    LevelSetProbe probe;
    probe.box_pairs = detail::default_box_pairs(dom);
    if (!std::isfinite(lo)) return probe;  // nothing constrained anywhere
    if (hi - lo < 1e-9) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double step = (hi - lo) / 10.0;
    for (int k = 1; k <= 9; ++k) {
        probe.levels.push_back(lo + k * step);
        probe.lower_levels.push_back(lo + (k - 1) * step);
    }
    return probe;
}

enum class LevelSetVerdict { Converges, FailsLiminf, FailsLimsup, ConvergesToMinusInfinity };

inline std::string to_string(LevelSetVerdict v) {
    switch (v) {
        case LevelSetVerdict::Converges: return "converges";
        case LevelSetVerdict::FailsLiminf: return "fails-liminf";
        case LevelSetVerdict::FailsLimsup: return "fails-limsup";
        case LevelSetVerdict::ConvergesToMinusInfinity: return "converges-to-minus-infinity";
    }
    return "";
}

struct ConvergenceVerdict {
    LevelSetVerdict verdict = LevelSetVerdict::Converges;
    bool limit_unconstrained = false;

    struct ProbeEntry {
        double t = 0, s = 0;
        int box = 0;
        double cap_limit_t_inner = 0;   // cap({psi > t} ^ B)
        double cap_limit_s_outer = 0;   // cap({psi > s} ^ B')
        std::vector<double> family_t_inner;
        std::vector<double> family_s_outer;
        bool liminf_ok = true;
        bool limsup_ok = true;
        bool trace_ok = true;  // plain capacity-trace convergence at fixed (t, B)
    };
    std::vector<ProbeEntry> entries;

    bool passes() const {
        return verdict == LevelSetVerdict::Converges ||
               verdict == LevelSetVerdict::ConvergesToMinusInfinity;
    }
    bool trace_test_passes() const {
        for (const auto& e : entries)
            if (!e.trace_ok) return false;
        return true;
    }
};

/// Empirical two-sided level-set convergence test over a finite family.
/// The lower inequality compares the limit's inner-box capacity at level t
/// with the tail minimum of the family's outer-box capacities at the lower
/// level s; the upper inequality is the mirror image.  Tail = last half of
/// the family.  When the limit is unconstrained everywhere the family's
/// tail level sets must be capacity-negligible at probe resolution.
inline ConvergenceVerdict check_levelset_convergence(
    const DomainPtr& dom, const std::vector<std::vector<double>>& family,
    const std::vector<double>& limit, const LevelSetProbe& probe) {
    if (family.size() < 4) throw InsufficientFamily("need at least 4 family members");
    const size_t tail_begin = family.size() / 2;
    CapacityContext ctx(dom);

    ConvergenceVerdict out;
    auto [flo, fhi] = detail::finite_range(limit, *dom, true);
    out.limit_unconstrained = !std::isfinite(flo);
    (void)fhi;

    bool liminf_all = true, limsup_all = true, vanish_all = true;
    for (size_t it = 0; it < probe.levels.size(); ++it) {
        const double t = probe.levels[it];
        const double s = it < probe.lower_levels.size() ? probe.lower_levels[it] : t;
        for (size_t ib = 0; ib < probe.box_pairs.size(); ++ib) {
            const Box& inner = probe.box_pairs[ib].first;
            const Box& outer = probe.box_pairs[ib].second;
            ConvergenceVerdict::ProbeEntry e;
            e.t = t;
            e.s = s;
            e.box = static_cast<int>(ib);
            e.cap_limit_t_inner = cached_capacity(ctx, level_set(*dom, limit, t, inner));
            e.cap_limit_s_outer = cached_capacity(ctx, level_set(*dom, limit, s, outer));
            for (const auto& member : family) {
                e.family_t_inner.push_back(cached_capacity(ctx, level_set(*dom, member, t, inner)));
                e.family_s_outer.push_back(cached_capacity(ctx, level_set(*dom, member, s, outer)));
            }
            double tail_min_outer = std::numeric_limits<double>::infinity();
            double tail_max_inner = 0;
            double tail_max_dev = 0;
            for (size_t n = tail_begin; n < family.size(); ++n) {
                tail_min_outer = std::min(tail_min_outer, e.family_s_outer[n]);
                tail_max_inner = std::max(tail_max_inner, e.family_t_inner[n]);
                tail_max_dev = std::max(tail_max_dev,
                                        std::abs(e.family_t_inner[n] - e.cap_limit_t_inner));
            }
            const double eps_lo =
                probe.eps_rel * std::max(e.cap_limit_t_inner, tail_min_outer) + 1e-12;
            const double eps_hi =
                probe.eps_rel * std::max(tail_max_inner, e.cap_limit_s_outer) + 1e-12;
            e.liminf_ok = e.cap_limit_t_inner <= tail_min_outer + eps_lo;
            e.limsup_ok = tail_max_inner <= e.cap_limit_s_outer + eps_hi;
            e.trace_ok = tail_max_dev <=
                         probe.eps_rel * std::max(tail_max_inner, e.cap_limit_t_inner) + 1e-12;
            if (out.limit_unconstrained) {
                // eventual emptiness up to capacity below probe resolution:
                // compare against the capacity of the full inner box
                std::vector<int> full_box;
                for (int n = 0; n < dom->node_count(); ++n)
                    if (dom->is_interior(n) && inner.contains(*dom, n)) full_box.push_back(n);
                const double cap_box = cached_capacity(ctx, full_box);
                if (tail_max_inner > probe.eps_rel * cap_box + 1e-12) vanish_all = false;
                e.liminf_ok = true;
                e.limsup_ok = tail_max_inner <= probe.eps_rel * cap_box + 1e-12;
            }
            liminf_all = liminf_all && e.liminf_ok;
            limsup_all = limsup_all && e.limsup_ok;
            out.entries.push_back(std::move(e));
        }
    }

    if (out.limit_unconstrained)
        out.verdict = vanish_all ? LevelSetVerdict::ConvergesToMinusInfinity
                                 : LevelSetVerdict::FailsLimsup;
    else if (!liminf_all)
        out.verdict = LevelSetVerdict::FailsLiminf;
    else if (!limsup_all)
        out.verdict = LevelSetVerdict::FailsLimsup;
    else
        out.verdict = LevelSetVerdict::Converges;
    return out;
}

inline ConvergenceVerdict check_levelset_convergence(const DomainPtr& dom,
                                                     const std::vector<Obstacle>& family,
                                                     const Obstacle& limit,
                                                     const LevelSetProbe& probe) {
    std::vector<std::vector<double>> values;
    for (const auto& o : family) values.push_back(o.values);
    return check_levelset_convergence(dom, values, limit.values, probe);
}

/// Monotone nondecreasing continuous scalar map applied nodewise.  The map is
/// screened on a sample grid; the sentinel maps to the map's lower limit,
/// kept as the sentinel when the map is unbounded below.
struct MonotoneMap {
    std::function<double(double)> fn;
};

inline std::vector<std::vector<double>> map_obstacle(
    const std::vector<std::vector<double>>& family, const MonotoneMap& phi,
    double sample_lo = -100, double sample_hi = 100) {
    const int samples = 257;
    double prev = phi.fn(sample_lo);
    for (int k = 1; k < samples; ++k) {
        const double x = sample_lo + (sample_hi - sample_lo) * k / (samples - 1);
        const double v = phi.fn(x);
        if (v < prev - 1e-12 * (1 + std::abs(prev)))
            throw NotMonotone("map decreases on the sample grid");
        prev = v;
    }
    // probe the lower limit: flat tails map the sentinel to their limit value
    const double far = sample_lo - 1e6 * (1 + std::abs(sample_lo));
    const double farther = far - 1e6;
    const double vfar = phi.fn(far), vfarther = phi.fn(farther);
    const bool flat_bottom = std::abs(vfar - vfarther) <= 1e-12 * (1 + std::abs(vfar));

    std::vector<std::vector<double>> out;
    for (const auto& member : family) {
        std::vector<double> mapped(member.size());
        for (size_t i = 0; i < member.size(); ++i) {
            if (member[i] == kUnconstrained)
                mapped[i] = flat_bottom ? vfar : kUnconstrained;
            else
                mapped[i] = phi.fn(member[i]);
        }
        out.push_back(std::move(mapped));
    }
    return out;
}

inline LevelSetProbe map_probe(const LevelSetProbe& probe, const MonotoneMap& phi) {
    LevelSetProbe out = probe;
    for (size_t i = 0; i < probe.levels.size(); ++i) {
        out.levels[i] = phi.fn(probe.levels[i]);
        out.lower_levels[i] = phi.fn(probe.lower_levels[i]);
    }
    return out;
}

}  // namespace oplab
