#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "oplab/errors.hpp"

namespace oplab {

enum class MeshKind { Interval, Radial, Grid2d };

enum class NodeClass { Interior, Boundary };

inline constexpr double kUnconstrained = -std::numeric_limits<double>::infinity();

inline double unit_ball_volume(int dim) {
    return std::pow(std::numbers::pi_v<double>, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
}

/// Surface area of the unit sphere S^{dim-1} in R^dim.
inline double unit_sphere_area(int dim) {
    return dim * unit_ball_volume(dim);
}

/// A 1-D segment, a radially reduced ball in dimension N, or a 2-D tensor grid.
/// Nodes are classified interior/boundary and carry positive control volumes
/// that partition the domain measure.  Radial meshes keep the pole r=0 as an
/// interior node; its control volume is the ball of radius h/2.
struct DiscreteDomain {
    MeshKind kind = MeshKind::Interval;
    int dim = 1;           // ambient dimension N
    double length_x = 1;   // interval length, radial outer radius R, grid x extent
    double length_y = 0;   // grid y extent
    int cells_x = 0;       // subdivisions along x (or r)
    int cells_y = 0;
    double hx = 0;
    double hy = 0;
    std::vector<NodeClass> node_class;
    std::vector<double> control_volume;
    std::vector<int> interior_index;  // node -> index among interior nodes, -1 for boundary
    std::vector<int> interior_nodes;  // interior index -> node

    int nodes_x() const { return cells_x + 1; }
    int nodes_y() const { return kind == MeshKind::Grid2d ? cells_y + 1 : 1; }
    int node_count() const { return static_cast<int>(node_class.size()); }
    int interior_count() const { return static_cast<int>(interior_nodes.size()); }

    int node_id(int i, int j) const { return j * nodes_x() + i; }
    int ix(int node) const { return node % nodes_x(); }
    int iy(int node) const { return node / nodes_x(); }

    double coord_x(int node) const { return ix(node) * hx; }
    double coord_y(int node) const { return kind == MeshKind::Grid2d ? iy(node) * hy : 0.0; }

    bool is_interior(int node) const { return node_class[node] == NodeClass::Interior; }

    double domain_measure() const {
        switch (kind) {
            case MeshKind::Interval: return length_x;
            case MeshKind::Radial: return unit_ball_volume(dim) * std::pow(length_x, dim);
            case MeshKind::Grid2d: return length_x * length_y;
        }
        return 0;
    }

    double min_spacing() const { return kind == MeshKind::Grid2d ? std::min(hx, hy) : hx; }
};

using DomainPtr = std::shared_ptr<const DiscreteDomain>;

inline bool same_mesh(const DiscreteDomain& a, const DiscreteDomain& b) {
    return a.kind == b.kind && a.dim == b.dim && a.cells_x == b.cells_x &&
           a.cells_y == b.cells_y && a.length_x == b.length_x && a.length_y == b.length_y;
}

inline bool same_mesh(const DomainPtr& a, const DomainPtr& b) {
    return a == b || same_mesh(*a, *b);
}

namespace detail {

inline void classify_and_index(DiscreteDomain& dom) {
    dom.interior_index.assign(dom.node_count(), -1);
    for (int n = 0; n < dom.node_count(); ++n) {
        if (dom.node_class[n] == NodeClass::Interior) {
            dom.interior_index[n] = static_cast<int>(dom.interior_nodes.size());
            dom.interior_nodes.push_back(n);
        }
    }
}

}  // namespace detail

inline DomainPtr build_interval(double length, int cells) {
    if (!(length > 0)) throw InvalidMesh("interval length must be positive");
    if (cells < 2) throw InvalidMesh("interval needs at least 2 cells");
    auto dom = std::make_shared<DiscreteDomain>();
    dom->kind = MeshKind::Interval;
    dom->dim = 1;
    dom->length_x = length;
    dom->cells_x = cells;
    dom->hx = length / cells;
    const int n = cells + 1;
    dom->node_class.assign(n, NodeClass::Interior);
    dom->node_class[0] = dom->node_class[n - 1] = NodeClass::Boundary;
    dom->control_volume.assign(n, dom->hx);
    dom->control_volume[0] = dom->control_volume[n - 1] = 0.5 * dom->hx;
    detail::classify_and_index(*dom);
    return dom;
}

inline DomainPtr build_radial_mesh(int dim, double radius, int cells) {
    if (dim < 2) throw InvalidMesh("radial mesh needs ambient dimension >= 2");
    if (!(radius > 0)) throw InvalidMesh("radius must be positive");
    if (cells < 8) throw InvalidMesh("radial mesh needs at least 8 cells");
    auto dom = std::make_shared<DiscreteDomain>();
    dom->kind = MeshKind::Radial;
    dom->dim = dim;
    dom->length_x = radius;
    dom->cells_x = cells;
    const double h = radius / cells;
    dom->hx = h;
    const int n = cells + 1;
    dom->node_class.assign(n, NodeClass::Interior);
    dom->node_class[n - 1] = NodeClass::Boundary;
    dom->control_volume.assign(n, 0.0);
    const double omega = unit_ball_volume(dim);
    // shell [r-h/2, r+h/2] clipped to [0, R]
    for (int i = 0; i < n; ++i) {
        const double lo = std::max(0.0, i * h - 0.5 * h);
        const double hi = std::min(radius, i * h + 0.5 * h);
        dom->control_volume[i] = omega * (std::pow(hi, dim) - std::pow(lo, dim));
    }
    detail::classify_and_index(*dom);
    return dom;
}

inline DomainPtr build_grid2d(double extent_x, double extent_y, int nx, int ny) {
    if (!(extent_x > 0) || !(extent_y > 0)) throw InvalidMesh("extents must be positive");
    if (nx < 4 || ny < 4) throw InvalidMesh("grid needs at least 4 cells per axis");
    auto dom = std::make_shared<DiscreteDomain>();
    dom->kind = MeshKind::Grid2d;
    dom->dim = 2;
    dom->length_x = extent_x;
    dom->length_y = extent_y;
    dom->cells_x = nx;
    dom->cells_y = ny;
    dom->hx = extent_x / nx;
    dom->hy = extent_y / ny;
    const int n = (nx + 1) * (ny + 1);
    dom->node_class.assign(n, NodeClass::Interior);
    dom->control_volume.assign(n, 0.0);
    for (int j = 0; j <= ny; ++j) {
        const double wy = dom->hy * ((j == 0 || j == ny) ? 0.5 : 1.0);
        for (int i = 0; i <= nx; ++i) {
            const double wx = dom->hx * ((i == 0 || i == nx) ? 0.5 : 1.0);
            const int id = dom->node_id(i, j);
            dom->control_volume[id] = wx * wy;
            if (i == 0 || i == nx || j == 0 || j == ny)
                dom->node_class[id] = NodeClass::Boundary;
        }
    }
    detail::classify_and_index(*dom);
    return dom;
}

/// Axis-aligned closed box used for level-set probes.  For 1-D kinds only the
/// x-range matters.
struct Box {
    double xlo = 0, xhi = 0;
    double ylo = 0, yhi = 0;

    bool contains(const DiscreteDomain& dom, int node) const {
        const double x = dom.coord_x(node);
        if (x < xlo || x > xhi) return false;
        if (dom.kind == MeshKind::Grid2d) {
            const double y = dom.coord_y(node);
            if (y < ylo || y > yhi) return false;
        }
        return true;
    }
};

/// Visits every mesh face as fn(nodeA, nodeB, faceVolume, distance).
/// Face volumes partition N * |domain| per axis direction and are the weights
/// of the discrete gradient quadrature; distance is the node separation.
template <class F>
inline void for_each_face(const DiscreteDomain& dom, F&& fn) {
    switch (dom.kind) {
        case MeshKind::Interval: {
            for (int i = 0; i < dom.cells_x; ++i) fn(i, i + 1, dom.hx, dom.hx);
            break;
        }
        case MeshKind::Radial: {
            const double sigma = unit_sphere_area(dom.dim);
            for (int i = 0; i < dom.cells_x; ++i) {
                const double rf = (i + 0.5) * dom.hx;
                fn(i, i + 1, sigma * std::pow(rf, dom.dim - 1) * dom.hx, dom.hx);
            }
            break;
        }
        case MeshKind::Grid2d: {
            const int nx = dom.cells_x, ny = dom.cells_y;
            for (int j = 0; j <= ny; ++j) {
                const double wy = dom.hy * ((j == 0 || j == ny) ? 0.5 : 1.0);
                for (int i = 0; i < nx; ++i)
                    fn(dom.node_id(i, j), dom.node_id(i + 1, j), dom.hx * wy, dom.hx);
            }
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i <= nx; ++i) {
                    const double wx = dom.hx * ((i == 0 || i == nx) ? 0.5 : 1.0);
                    fn(dom.node_id(i, j), dom.node_id(i, j + 1), dom.hy * wx, dom.hy);
                }
            }
            break;
        }
    }
}

/// Linear (1-D kinds) or bilinear (grid) interpolation of a nodal field at a
/// physical point.  Points are clamped to the domain.
inline double interpolate(const DiscreteDomain& dom, const std::vector<double>& field,
                          double x, double y = 0.0) {
    auto clamp01 = [](double t) { return t < 0 ? 0.0 : (t > 1 ? 1.0 : t); };
    if (dom.kind == MeshKind::Grid2d) {
        double sx = clamp01(x / dom.length_x) * dom.cells_x;
        double sy = clamp01(y / dom.length_y) * dom.cells_y;
        int i = std::min(static_cast<int>(sx), dom.cells_x - 1);
        int j = std::min(static_cast<int>(sy), dom.cells_y - 1);
        double tx = sx - i, ty = sy - j;
        return (1 - tx) * (1 - ty) * field[dom.node_id(i, j)] +
               tx * (1 - ty) * field[dom.node_id(i + 1, j)] +
               (1 - tx) * ty * field[dom.node_id(i, j + 1)] +
               tx * ty * field[dom.node_id(i + 1, j + 1)];
    }
    double s = clamp01(x / dom.length_x) * dom.cells_x;
    int i = std::min(static_cast<int>(s), dom.cells_x - 1);
    double t = s - i;
    return (1 - t) * field[i] + t * field[i + 1];
}

}  // namespace oplab
