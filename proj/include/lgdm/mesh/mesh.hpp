/**
 * @file mesh.hpp
 * @brief Structured two-field meshes on boxes, with optional edge slits.
 *
 * Every element carries two coincident interpolations: a displacement element
 * (line3 / quad8 / hex8) and a micro-strain element (line2 / quad4 / hex8).
 * Lattice nodes are numbered with x varying fastest, then y, then z. Nodes
 * duplicated by carve_notch() are appended after the lattice nodes.
 */
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "lgdm/core/error.hpp"
#include "lgdm/fem/geometry.hpp"
#include "lgdm/fem/quadrature.hpp"
#include "lgdm/fem/shape_functions.hpp"

namespace lgdm {

using Point = std::array<double, 3>;

struct Mesh {
    int dim = 0;
    ElementFamily family_u = ElementFamily::line3;
    ElementFamily family_e = ElementFamily::line2;
    std::vector<Point> nodes_u;
    std::vector<Point> nodes_e;
    std::vector<int> conn_u; ///< element_count x nen_u, row-major
    std::vector<int> conn_e; ///< element_count x nen_e, row-major
    int element_count = 0;
    Point extents{0.0, 0.0, 0.0};
    std::array<int, 3> divisions{1, 1, 1};

    int nen_u() const { return node_count(family_u); }
    int nen_e() const { return node_count(family_e); }

    std::span<const int> element_u(int e) const {
        return {conn_u.data() + static_cast<std::size_t>(e) * nen_u(), static_cast<std::size_t>(nen_u())};
    }
    std::span<const int> element_e(int e) const {
        return {conn_e.data() + static_cast<std::size_t>(e) * nen_e(), static_cast<std::size_t>(nen_e())};
    }

    /// Mean of the element's corner coordinates.
    Point centroid(int e) const {
        Point c{0.0, 0.0, 0.0};
        const auto nodes = element_e(e);
        for (int n : nodes)
            for (int d = 0; d < 3; ++d) c[d] += nodes_e[n][d];
        for (double& v : c) v /= static_cast<double>(nodes.size());
        return c;
    }

    double spacing(int axis) const { return extents[axis] / divisions[axis]; }
};

namespace detail {

inline constexpr double kLatticeTol = 1e-9;

/// Index of the lattice line closest to `x` with spacing `h`, or -1 when `x`
/// is not on a lattice line.
inline int lattice_index(double x, double h) {
    const double r = x / h;
    const double k = std::round(r);
    if (std::abs(r - k) > kLatticeTol) return -1;
    return static_cast<int>(k);
}

inline void validate_box(int dim, std::span<const double> extents, std::span<const int> divisions) {
    if (dim < 1 || dim > 3) throw InvalidArgument("mesh dimension must be 1, 2 or 3");
    if (static_cast<int>(extents.size()) < dim || static_cast<int>(divisions.size()) < dim)
        throw InvalidArgument("need one extent and one division count per axis");
    for (int d = 0; d < dim; ++d) {
        if (!(extents[d] > 0.0)) throw InvalidArgument("mesh extents must be positive");
        if (divisions[d] < 1) throw InvalidArgument("mesh divisions must be >= 1");
    }
}

} // namespace detail

inline Mesh build_structured_mesh(int dim, std::span<const double> extents,
                                  std::span<const int> divisions) {
    detail::validate_box(dim, extents, divisions);
    Mesh m;
    m.dim = dim;
    for (int d = 0; d < dim; ++d) {
        m.extents[d] = extents[d];
        m.divisions[d] = divisions[d];
    }
    const int nx = m.divisions[0], ny = m.divisions[1], nz = m.divisions[2];
    const double hx = m.spacing(0);

    if (dim == 1) {
        m.family_u = ElementFamily::line3;
        m.family_e = ElementFamily::line2;
        m.element_count = nx;
        for (int i = 0; i <= 2 * nx; ++i) m.nodes_u.push_back({0.5 * hx * i, 0.0, 0.0});
        for (int i = 0; i <= nx; ++i) m.nodes_e.push_back({hx * i, 0.0, 0.0});
        for (int e = 0; e < nx; ++e) {
            m.conn_u.insert(m.conn_u.end(), {2 * e, 2 * e + 1, 2 * e + 2});
            m.conn_e.insert(m.conn_e.end(), {e, e + 1});
        }
        return m;
    }

    const double hy = m.spacing(1);
    if (dim == 2) {
        m.family_u = ElementFamily::quad8;
        m.family_e = ElementFamily::quad4;
        m.element_count = nx * ny;
        // Refined lattice (2nx+1) x (2ny+1) without element centres.
        const int rx = 2 * nx + 1, ry = 2 * ny + 1;
        std::vector<int> id(static_cast<std::size_t>(rx) * ry, -1);
        for (int j = 0; j < ry; ++j)
            for (int i = 0; i < rx; ++i) {
                if (i % 2 == 1 && j % 2 == 1) continue;
                id[j * rx + i] = static_cast<int>(m.nodes_u.size());
                m.nodes_u.push_back({0.5 * hx * i, 0.5 * hy * j, 0.0});
            }
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) m.nodes_e.push_back({hx * i, hy * j, 0.0});
        auto u = [&](int i, int j) { return id[j * rx + i]; };
        auto e = [&](int i, int j) { return j * (nx + 1) + i; };
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int x0 = 2 * i, y0 = 2 * j;
                m.conn_u.insert(m.conn_u.end(),
                                {u(x0, y0), u(x0 + 2, y0), u(x0 + 2, y0 + 2), u(x0, y0 + 2),
                                 u(x0 + 1, y0), u(x0 + 2, y0 + 1), u(x0 + 1, y0 + 2), u(x0, y0 + 1)});
                m.conn_e.insert(m.conn_e.end(), {e(i, j), e(i + 1, j), e(i + 1, j + 1), e(i, j + 1)});
            }
        return m;
    }

    const double hz = m.spacing(2);
    m.family_u = ElementFamily::hex8;
    m.family_e = ElementFamily::hex8;
    m.element_count = nx * ny * nz;
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i <= nx; ++i) m.nodes_u.push_back({hx * i, hy * j, hz * k});
    m.nodes_e = m.nodes_u;
    auto n = [&](int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::array<int, 8> c{n(i, j, k),         n(i + 1, j, k),
                                           n(i + 1, j + 1, k), n(i, j + 1, k),
                                           n(i, j, k + 1),     n(i + 1, j, k + 1),
                                           n(i + 1, j + 1, k + 1), n(i, j + 1, k + 1)};
                m.conn_u.insert(m.conn_u.end(), c.begin(), c.end());
            }
    m.conn_e = m.conn_u;
    return m;
}

/// Straight, axis-aligned slit. It starts at `anchor`, runs `length` mm along
/// `axis` in direction `sign`, and its faces are normal to `normal_axis`. In
/// 3D the slit spans the full extent of the remaining axis.
struct NotchSpec {
    Point anchor{0.0, 0.0, 0.0};
    int axis = 0;
    int sign = 1;
    int normal_axis = 1;
    double length = 0.0;
};

namespace detail {

/// Duplicates `field` nodes on the slit and rewires elements above it.
inline void split_field(const Mesh& m, const NotchSpec& s, double s0, double s1, bool open0,
                        bool open1, std::vector<Point>& nodes, std::vector<int>& conn, int nen) {
    const double tol = kLatticeTol * std::max(m.extents[s.axis], m.extents[s.normal_axis]);
    const std::size_t n_lattice = nodes.size();
    std::map<int, int> copy_of;
    for (std::size_t i = 0; i < n_lattice; ++i) {
        const Point& p = nodes[i];
        if (std::abs(p[s.normal_axis] - s.anchor[s.normal_axis]) > tol) continue;
        const double x = p[s.axis];
        if (x < s0 - tol || x > s1 + tol) continue;
        if (!open0 && std::abs(x - s0) <= tol) continue;
        if (!open1 && std::abs(x - s1) <= tol) continue;
        copy_of[static_cast<int>(i)] = -1;
    }
    for (auto& [orig, dup] : copy_of) {
        dup = static_cast<int>(nodes.size());
        nodes.push_back(nodes[orig]);
    }
    for (int e = 0; e < m.element_count; ++e) {
        if (m.centroid(e)[s.normal_axis] <= s.anchor[s.normal_axis]) continue;
        for (int a = 0; a < nen; ++a) {
            int& node = conn[static_cast<std::size_t>(e) * nen + a];
            if (auto it = copy_of.find(node); it != copy_of.end()) node = it->second;
        }
    }
}

} // namespace detail

/// Opens a sharp slit by duplicating the nodes on its faces (both fields).
/// Slit end points in the interior are crack tips and stay shared.
inline Mesh carve_notch(const Mesh& mesh, const NotchSpec& spec) {
    if (spec.length < 0.0) throw InvalidArgument("notch length must be non-negative");
    if (spec.length == 0.0) return mesh;
    if (mesh.dim < 2) throw UnsupportedGeometry("slits need a 2D or 3D mesh");
    if (spec.axis < 0 || spec.axis >= mesh.dim || spec.normal_axis < 0 ||
        spec.normal_axis >= mesh.dim || spec.axis == spec.normal_axis)
        throw UnsupportedGeometry("slit axis and normal axis must be distinct mesh axes");
    if (spec.sign != 1 && spec.sign != -1) throw InvalidArgument("slit sign must be +1 or -1");

    const int k_normal = detail::lattice_index(spec.anchor[spec.normal_axis], mesh.spacing(spec.normal_axis));
    if (k_normal <= 0 || k_normal >= mesh.divisions[spec.normal_axis])
        throw UnsupportedGeometry("slit plane is not an interior mesh line");
    const double tip = spec.anchor[spec.axis] + spec.sign * spec.length;
    const int k_start = detail::lattice_index(spec.anchor[spec.axis], mesh.spacing(spec.axis));
    const int k_tip = detail::lattice_index(tip, mesh.spacing(spec.axis));
    const int n_axis = mesh.divisions[spec.axis];
    if (k_start < 0 || k_tip < 0 || k_start > n_axis || k_tip > n_axis)
        throw UnsupportedGeometry("slit end points are not on mesh lines inside the domain");
    const int k0 = std::min(k_start, k_tip), k1 = std::max(k_start, k_tip);
    if (k0 == 0 && k1 == n_axis) throw UnsupportedGeometry("slit would disconnect the mesh");

    const double h = mesh.spacing(spec.axis);
    Mesh out = mesh;
    detail::split_field(mesh, spec, k0 * h, k1 * h, k0 == 0, k1 == n_axis, out.nodes_u, out.conn_u,
                        mesh.nen_u());
    detail::split_field(mesh, spec, k0 * h, k1 * h, k0 == 0, k1 == n_axis, out.nodes_e, out.conn_e,
                        mesh.nen_e());
    return out;
}

/// Corner coordinates of the u-element in a fixed-size matrix.
template <int Dim, int Nodes>
Eigen::Matrix<double, Nodes, Dim> element_coords(const std::vector<Point>& nodes,
                                                 std::span<const int> conn) {
    Eigen::Matrix<double, Nodes, Dim> x;
    for (int a = 0; a < Nodes; ++a)
        for (int d = 0; d < Dim; ++d) x(a, d) = nodes[conn[a]][d];
    return x;
}

/// Quadrature rule shared by both fields of an element (the displacement rule).
inline QuadratureRule element_rule(const Mesh& mesh) { return gauss_rule(mesh.family_u); }

/// Checks connectivity ranges, matching element counts and det J > 0 at every
/// quadrature point of both fields.
inline void validate_mesh(const Mesh& mesh) {
    if (mesh.conn_u.size() != static_cast<std::size_t>(mesh.element_count) * mesh.nen_u() ||
        mesh.conn_e.size() != static_cast<std::size_t>(mesh.element_count) * mesh.nen_e())
        throw InvalidArgument("connectivity size does not match element count");
    for (int n : mesh.conn_u)
        if (n < 0 || n >= static_cast<int>(mesh.nodes_u.size()))
            throw InvalidArgument("u connectivity index out of range");
    for (int n : mesh.conn_e)
        if (n < 0 || n >= static_cast<int>(mesh.nodes_e.size()))
            throw InvalidArgument("micro-strain connectivity index out of range");
    const QuadratureRule rule = element_rule(mesh);
    for (int e = 0; e < mesh.element_count; ++e) {
        for (auto [family, nodes, conn] :
             {std::tuple{mesh.family_u, &mesh.nodes_u, mesh.element_u(e)},
              std::tuple{mesh.family_e, &mesh.nodes_e, mesh.element_e(e)}}) {
            Eigen::MatrixXd x(conn.size(), mesh.dim);
            for (std::size_t a = 0; a < conn.size(); ++a)
                for (int d = 0; d < mesh.dim; ++d) x(a, d) = (*nodes)[conn[a]][d];
            for (const auto& q : rule.points) {
                const ShapeEval s = shape_functions(family, q.xi);
                geometry_map(x, s.dN_dxi, e);
            }
        }
    }
}

/// Sum over elements of the integral of det J (u-field geometry).
inline double mesh_volume(const Mesh& mesh) {
    const QuadratureRule rule = element_rule(mesh);
    double vol = 0.0;
    for (int e = 0; e < mesh.element_count; ++e) {
        const auto conn = mesh.element_u(e);
        Eigen::MatrixXd x(conn.size(), mesh.dim);
        for (std::size_t a = 0; a < conn.size(); ++a)
            for (int d = 0; d < mesh.dim; ++d) x(a, d) = mesh.nodes_u[conn[a]][d];
        for (const auto& q : rule.points) {
            const ShapeEval s = shape_functions(mesh.family_u, q.xi);
            vol += q.weight * geometry_map(x, s.dN_dxi, e).second;
        }
    }
    return vol;
}

/// Lattice nodes of `nodes` lying on the plane x[axis] == value.
inline std::vector<int> nodes_on_plane(const std::vector<Point>& nodes, int axis, double value,
                                       double tol = 1e-9) {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (std::abs(nodes[i][axis] - value) <= tol) out.push_back(static_cast<int>(i));
    return out;
}

} // namespace lgdm
