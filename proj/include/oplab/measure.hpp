#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "oplab/domain.hpp"
#include "oplab/errors.hpp"

namespace oplab {

/// Point mass.  The singular flag marks atoms that play the role of the part
/// of the datum concentrated on capacity-zero sets; scenarios drop or keep
/// them explicitly.
struct Atom {
    double x = 0;
    double y = 0;
    double mass = 0;
    bool singular = false;
};

using DensityParams = std::map<std::string, double>;

/// Named density so measures serialize by (name, params) and rebuild
/// deterministically.  fn(x, y) evaluates pointwise away from singular spots;
/// radial meshes sample the pole cell at its outer face radius h/2.
struct DensitySpec {
    std::string name = "none";
    DensityParams params;
    std::function<double(double, double)> fn;

    bool empty() const { return !fn; }
};

inline DensitySpec no_density() { return {}; }

inline DensitySpec make_density(const std::string& name, const DensityParams& params = {}) {
    DensitySpec d;
    d.name = name;
    d.params = params;
    if (name == "none") {
        return d;
    } else if (name == "constant") {
        const double v = params.count("value") ? params.at("value") : 1.0;
        d.fn = [v](double, double) { return v; };
    } else if (name == "orsina") {
        // scale * |x|^{-N} (-log|x|)^{-theta}, zero at the origin
        const double theta = params.at("theta");
        const int dim = static_cast<int>(params.at("dim"));
        const double scale = params.count("scale") ? params.at("scale") : 1.0;
        if (!(theta > 1)) throw InvalidTheta("orsina density needs theta > 1");
        d.fn = [theta, dim, scale](double r, double) {
            if (r <= 0) return 0.0;
            return scale * std::pow(r, -dim) * std::pow(-std::log(r), -theta);
        };
    } else if (name == "fourier") {
        // small deterministic trig bump, parameterized by integer modes
        const double amp = params.count("amp") ? params.at("amp") : 1.0;
        const double kx = params.count("kx") ? params.at("kx") : 1.0;
        const double ky = params.count("ky") ? params.at("ky") : 1.0;
        const double lx = params.count("lx") ? params.at("lx") : 1.0;
        const double ly = params.count("ly") ? params.at("ly") : 1.0;
        const double phase = params.count("phase") ? params.at("phase") : 0.0;
        d.fn = [=](double x, double y) {
            return amp * std::sin(kx * std::numbers::pi_v<double> * x / lx + phase) *
                   std::cos(ky * std::numbers::pi_v<double> * y / ly);
        };
    } else if (name == "bump") {
        // product sine bump, vanishing on the boundary of [0,lx]x[0,ly]
        const double amp = params.count("amp") ? params.at("amp") : 1.0;
        const double lx = params.count("lx") ? params.at("lx") : 1.0;
        const double ly = params.count("ly") ? params.at("ly") : 1.0;
        d.fn = [=](double x, double y) {
            double s = amp * std::sin(std::numbers::pi_v<double> * x / lx);
            return ly > 0 ? s * std::sin(std::numbers::pi_v<double> * y / ly) : s;
        };
    } else {
        throw Error("unknown density name: " + name);
    }
    return d;
}

/// Signed nodal measure: tagged atoms plus a density, assembled onto nodes in
/// a mass-preserving way.  Positive and negative parts are assembled
/// componentwise so that their nodal l1 mass always equals the total
/// variation of the inputs.
struct DiscreteMeasure {
    DomainPtr dom;
    std::vector<Atom> atoms;
    DensitySpec density;
    std::vector<double> density_values;  // sampled per node (empty when no density)
    std::vector<double> loads;           // signed nodal loads
    std::vector<double> loads_pos;       // componentwise positive part
    std::vector<double> loads_neg;       // componentwise negative part

    double total_variation() const {
        double tv = 0;
        for (const auto& a : atoms) tv += std::abs(a.mass);
        for (size_t i = 0; i < density_values.size(); ++i)
            tv += std::abs(density_values[i]) * dom->control_volume[i];
        return tv;
    }

    /// l1 mass of the assembled (positive, negative) nodal pair.
    double load_l1() const {
        double s = 0;
        for (size_t i = 0; i < loads.size(); ++i) s += loads_pos[i] + loads_neg[i];
        return s;
    }

    bool has_singular_atoms() const {
        for (const auto& a : atoms)
            if (a.singular) return true;
        return false;
    }
};

namespace detail {

inline void spread_atom(const DiscreteDomain& dom, const Atom& a,
                        std::vector<double>& pos, std::vector<double>& neg) {
    auto deposit = [&](int node, double w) {
        if (w == 0) return;
        const double m = a.mass * w;
        if (m >= 0)
            pos[node] += m;
        else
            neg[node] -= m;
    };
    if (dom.kind == MeshKind::Grid2d) {
        double sx = a.x / dom.hx, sy = a.y / dom.hy;
        int i = std::min(static_cast<int>(sx), dom.cells_x - 1);
        int j = std::min(static_cast<int>(sy), dom.cells_y - 1);
        double tx = sx - i, ty = sy - j;
        deposit(dom.node_id(i, j), (1 - tx) * (1 - ty));
        deposit(dom.node_id(i + 1, j), tx * (1 - ty));
        deposit(dom.node_id(i, j + 1), (1 - tx) * ty);
        deposit(dom.node_id(i + 1, j + 1), tx * ty);
    } else {
        double s = a.x / dom.hx;
        int i = std::min(static_cast<int>(s), dom.cells_x - 1);
        double t = s - i;
        deposit(i, 1 - t);
        deposit(i + 1, t);
    }
}

inline void check_atom_inside(const DiscreteDomain& dom, const Atom& a) {
    bool ok = true;
    switch (dom.kind) {
        case MeshKind::Interval: ok = a.x > 0 && a.x < dom.length_x; break;
        case MeshKind::Radial: ok = a.x >= 0 && a.x < dom.length_x; break;
        case MeshKind::Grid2d:
            ok = a.x > 0 && a.x < dom.length_x && a.y > 0 && a.y < dom.length_y;
            break;
    }
    if (!ok) throw AtomOutsideDomain("atom location outside the open domain");
}

}  // namespace detail

inline DiscreteMeasure discretize_measure(const DomainPtr& dom, std::vector<Atom> atoms,
                                          DensitySpec density = no_density()) {
    DiscreteMeasure mu;
    mu.dom = dom;
    mu.atoms = std::move(atoms);
    mu.density = std::move(density);
    const int n = dom->node_count();
    mu.loads_pos.assign(n, 0.0);
    mu.loads_neg.assign(n, 0.0);
    for (const auto& a : mu.atoms) {
        detail::check_atom_inside(*dom, a);
        detail::spread_atom(*dom, a, mu.loads_pos, mu.loads_neg);
    }
    if (!mu.density.empty()) {
        mu.density_values.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            double x = dom->coord_x(i), y = dom->coord_y(i);
            if (dom->kind == MeshKind::Radial && i == 0) x = 0.5 * dom->hx;
            const double v = mu.density.fn(x, y);
            mu.density_values[i] = v;
            const double m = v * dom->control_volume[i];
            if (m >= 0)
                mu.loads_pos[i] += m;
            else
                mu.loads_neg[i] -= m;
        }
    }
    mu.loads.assign(n, 0.0);
    for (int i = 0; i < n; ++i) mu.loads[i] = mu.loads_pos[i] - mu.loads_neg[i];
    return mu;
}

inline DiscreteMeasure zero_measure(const DomainPtr& dom) {
    return discretize_measure(dom, {});
}

inline DiscreteMeasure atom_at(const DomainPtr& dom, double x, double mass,
                               bool singular = false, double y = 0) {
    return discretize_measure(dom, {Atom{x, y, mass, singular}});
}

inline DiscreteMeasure scale_measure(const DiscreteMeasure& mu, double c) {
    DiscreteMeasure out = mu;
    for (auto& a : out.atoms) a.mass *= c;
    for (auto& v : out.density_values) v *= c;
    if (!out.density.empty()) {
        auto base = mu.density.fn;
        out.density.name = "custom";
        out.density.fn = [base, c](double x, double y) { return c * base(x, y); };
    }
    for (size_t i = 0; i < out.loads.size(); ++i) {
        out.loads[i] = c * mu.loads[i];
        const double p = c >= 0 ? c * mu.loads_pos[i] : -c * mu.loads_neg[i];
        const double q = c >= 0 ? c * mu.loads_neg[i] : -c * mu.loads_pos[i];
        out.loads_pos[i] = p;
        out.loads_neg[i] = q;
    }
    return out;
}

inline DiscreteMeasure add_measures(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (!same_mesh(a.dom, b.dom)) throw Error("cannot add measures on different meshes");
    DiscreteMeasure out = a;
    out.atoms.insert(out.atoms.end(), b.atoms.begin(), b.atoms.end());
    if (!b.density.empty()) {
        if (out.density.empty()) {
            out.density = b.density;
            out.density_values = b.density_values;
        } else {
            auto f = a.density.fn, g = b.density.fn;
            out.density.name = "custom";
            out.density.fn = [f, g](double x, double y) { return f(x, y) + g(x, y); };
            out.density_values.resize(a.dom->node_count(), 0.0);
            for (size_t i = 0; i < out.density_values.size(); ++i)
                out.density_values[i] =
                    (i < a.density_values.size() ? a.density_values[i] : 0.0) +
                    (i < b.density_values.size() ? b.density_values[i] : 0.0);
        }
    }
    for (size_t i = 0; i < out.loads.size(); ++i) {
        out.loads[i] = a.loads[i] + b.loads[i];
        out.loads_pos[i] = a.loads_pos[i] + b.loads_pos[i];
        out.loads_neg[i] = a.loads_neg[i] + b.loads_neg[i];
    }
    return out;
}

inline DiscreteMeasure negate_measure(const DiscreteMeasure& mu) { return scale_measure(mu, -1.0); }

/// Removes the negative singular-tagged atoms, i.e. keeps mu+ - mu-_a.
inline DiscreteMeasure drop_singular_negative(const DiscreteMeasure& mu) {
    std::vector<Atom> kept;
    for (const auto& a : mu.atoms)
        if (!(a.singular && a.mass < 0)) kept.push_back(a);
    return discretize_measure(mu.dom, kept, mu.density);
}

/// Jordan negative part of the difference of two nodal load vectors.
inline double negative_part_mass(const std::vector<double>& loads_a,
                                 const std::vector<double>& loads_b) {
    double s = 0;
    for (size_t i = 0; i < loads_a.size(); ++i) {
        const double d = loads_a[i] - (i < loads_b.size() ? loads_b[i] : 0.0);
        if (d < 0) s -= d;
    }
    return s;
}

}  // namespace oplab
