/**
 * @file model.hpp
 * @brief A discretized boundary-value problem and its Gauss-point state.
 */
#pragma once

#include <vector>

#include "lgdm/fem/quadrature.hpp"
#include "lgdm/material/constitutive.hpp"
#include "lgdm/mesh/dof_map.hpp"
#include "lgdm/mesh/mesh.hpp"

namespace lgdm {

/// Mesh, DOF layout, material and displacement boundary conditions. Gauss
/// points are numbered element-major: point q of element e is e * ngp + q.
struct Model {
    Mesh mesh;
    DofMap dofs;
    MaterialParams params;
    QuadratureRule rule;
    std::vector<double> kappa0; ///< damage threshold per Gauss point (defects)
    std::vector<Constraint> constraints;

    int dim() const { return mesh.dim; }
    int ngp() const { return rule.size(); }
    int gp_count() const { return mesh.element_count * rule.size(); }
};

/// Physical coordinates of every Gauss point, element-major.
inline std::vector<Point> gauss_point_coordinates(const Mesh& mesh, const QuadratureRule& rule) {
    std::vector<Point> out;
    out.reserve(static_cast<std::size_t>(mesh.element_count) * rule.size());
    for (int e = 0; e < mesh.element_count; ++e) {
        const auto conn = mesh.element_u(e);
        for (const auto& q : rule.points) {
            const ShapeEval s = shape_functions(mesh.family_u, q.xi);
            Point x{0.0, 0.0, 0.0};
            for (std::size_t a = 0; a < conn.size(); ++a)
                for (int d = 0; d < mesh.dim; ++d) x[d] += s.N(a) * mesh.nodes_u[conn[a]][d];
            out.push_back(x);
        }
    }
    return out;
}

/// Builds a model with a uniform threshold kappa0 = params.kappa0.
inline Model make_model(Mesh mesh, const MaterialParams& params, std::vector<Constraint> constraints = {}) {
    params.validate();
    validate_mesh(mesh);
    Model m;
    m.dofs = build_dof_map(mesh);
    m.rule = element_rule(mesh);
    m.mesh = std::move(mesh);
    m.params = params;
    m.kappa0.assign(static_cast<std::size_t>(m.gp_count()), params.kappa0);
    for (const Constraint& c : constraints)
        if (c.dof < 0 || c.dof >= m.dofs.ndof_u)
            throw UnsupportedConstraint("constraints may only act on displacement DOFs");
    m.constraints = std::move(constraints);
    return m;
}

/**
 * Solution-dependent variables at every Gauss point, stored as flat arrays of
 * length gp_count (times the component count where noted).
 */
struct GpState {
    int dim = 0;
    int nv = 0; ///< Voigt size
    int points = 0;
    std::vector<double> strain;    ///< points x nv
    std::vector<double> eps_eq;    ///< local equivalent strain
    std::vector<double> deps_eq;   ///< points x nv, d eeq / d strain
    std::vector<double> d2eps_eq;  ///< points x nv x nv
    std::vector<double> ebar;      ///< micro-equivalent strain interpolated at the point
    std::vector<double> grad_ebar; ///< points x dim
    std::vector<double> kappa;     ///< trial history
    std::vector<double> loading;   ///< 1 when kappa follows ebar in this iteration, else 0
    std::vector<double> damage;
    std::vector<double> ddamage;   ///< dD / dkappa
    std::vector<double> g;
    std::vector<double> dg;        ///< dg / dD
    std::vector<double> stress;    ///< points x nv

    static GpState sized(int dim, int points) {
        GpState s;
        s.dim = dim;
        s.nv = voigt_size(dim);
        s.points = points;
        const auto n = static_cast<std::size_t>(points);
        s.strain.assign(n * s.nv, 0.0);
        s.eps_eq.assign(n, 0.0);
        s.deps_eq.assign(n * s.nv, 0.0);
        s.d2eps_eq.assign(n * s.nv * s.nv, 0.0);
        s.ebar.assign(n, 0.0);
        s.grad_ebar.assign(n * dim, 0.0);
        s.kappa.assign(n, 0.0);
        s.loading.assign(n, 0.0);
        s.damage.assign(n, 0.0);
        s.ddamage.assign(n, 0.0);
        s.g.assign(n, 1.0);
        s.dg.assign(n, 0.0);
        s.stress.assign(n * s.nv, 0.0);
        return s;
    }

    /// Throws InvalidState unless every array matches `expected_points`.
    void check(int expected_dim, int expected_points) const {
        const auto n = static_cast<std::size_t>(expected_points);
        const auto v = static_cast<std::size_t>(voigt_size(expected_dim));
        const bool ok = dim == expected_dim && points == expected_points && strain.size() == n * v &&
                        eps_eq.size() == n && deps_eq.size() == n * v && d2eps_eq.size() == n * v * v &&
                        ebar.size() == n && grad_ebar.size() == n * expected_dim && kappa.size() == n &&
                        loading.size() == n && damage.size() == n && ddamage.size() == n &&
                        g.size() == n && dg.size() == n && stress.size() == n * v;
        if (!ok) throw InvalidState("Gauss-point state does not match the mesh (" + std::to_string(points) +
                                    " points, expected " + std::to_string(expected_points) + ")");
    }

    bool operator==(const GpState&) const = default;
};

} // namespace lgdm
