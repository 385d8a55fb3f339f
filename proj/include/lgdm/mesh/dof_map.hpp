/**
 * @file dof_map.hpp
 * @brief Global DOF layout: all displacement DOFs first, then all micro-strain DOFs.
 */
#pragma once

#include <span>
#include <vector>

#include "lgdm/mesh/mesh.hpp"

namespace lgdm {

struct DofMap {
    int dim = 0;
    int ndof_u = 0;
    int ndof_e = 0;
    int element_dofs_u = 0; ///< dim * nen_u
    int element_dofs_e = 0; ///< nen_e
    std::vector<int> gather_u; ///< element_count x element_dofs_u
    std::vector<int> gather_e; ///< element_count x element_dofs_e, already offset by ndof_u

    int size() const { return ndof_u + ndof_e; }

    std::span<const int> element_u(int e) const {
        return {gather_u.data() + static_cast<std::size_t>(e) * element_dofs_u,
                static_cast<std::size_t>(element_dofs_u)};
    }
    std::span<const int> element_e(int e) const {
        return {gather_e.data() + static_cast<std::size_t>(e) * element_dofs_e,
                static_cast<std::size_t>(element_dofs_e)};
    }

    int u_dof(int node, int component) const { return dim * node + component; }
    int e_dof(int node) const { return ndof_u + node; }
};

inline DofMap build_dof_map(const Mesh& mesh) {
    if (mesh.dim < 1 || mesh.dim > 3) throw InvalidArgument("build_dof_map: invalid mesh dimension");
    DofMap map;
    map.dim = mesh.dim;
    map.ndof_u = mesh.dim * static_cast<int>(mesh.nodes_u.size());
    map.ndof_e = static_cast<int>(mesh.nodes_e.size());
    map.element_dofs_u = mesh.dim * mesh.nen_u();
    map.element_dofs_e = mesh.nen_e();
    map.gather_u.reserve(static_cast<std::size_t>(mesh.element_count) * map.element_dofs_u);
    map.gather_e.reserve(static_cast<std::size_t>(mesh.element_count) * map.element_dofs_e);
    for (int e = 0; e < mesh.element_count; ++e) {
        for (int n : mesh.element_u(e))
            for (int d = 0; d < mesh.dim; ++d) map.gather_u.push_back(map.u_dof(n, d));
        for (int n : mesh.element_e(e)) map.gather_e.push_back(map.e_dof(n));
    }
    return map;
}

inline DofMap build_dof_map(const Mesh& mesh, int dim) {
    if (dim != mesh.dim) throw InvalidArgument("build_dof_map: dim does not match the mesh");
    return build_dof_map(mesh);
}

enum class ConstraintKind { fixed, driven };

/// Displacement boundary condition on one u-DOF. `step_increment` is the
/// prescribed change per load step (zero for fixed DOFs).
struct Constraint {
    int dof = 0;
    ConstraintKind kind = ConstraintKind::fixed;
    double step_increment = 0.0;

    double total_at(int step) const { return step_increment * step; }
};

} // namespace lgdm
