/**
 * @file geometry.hpp
 * @brief Isoparametric mapping and strain-displacement operators.
 *
 * Voigt ordering with engineering shear:
 *   1D: eps11
 *   2D: eps11, eps22, gamma12
 *   3D: eps11, eps22, eps33, gamma12, gamma23, gamma13
 * Displacement DOFs are interleaved per node: (u_x, u_y, u_z) of node 0, then node 1, ...
 */
#pragma once

#include <utility>

#include <Eigen/Dense>

#include "lgdm/core/error.hpp"

namespace lgdm {

constexpr int voigt_size(int dim) { return dim == 1 ? 1 : (dim == 2 ? 3 : 6); }

/// Maps dN/dxi to dN/dx for one element; returns det J. Throws
/// InvertedElement when det J <= 0.
template <int Dim, int Nodes>
double map_gradients(const Eigen::Matrix<double, Nodes, Dim>& coords,
                     const Eigen::Matrix<double, Nodes, Dim>& dn_dxi,
                     Eigen::Matrix<double, Nodes, Dim>& dn_dx, long element = -1) {
    // J(i, j) = d x_i / d xi_j
    const Eigen::Matrix<double, Dim, Dim> jac = coords.transpose() * dn_dxi;
    const double det = jac.determinant();
    if (!(det > 0.0)) throw InvertedElement(element, det);
    dn_dx.noalias() = dn_dxi * jac.inverse();
    return det;
}

/// Runtime-size geometry map: returns (dN_dx, detJ).
inline std::pair<Eigen::MatrixXd, double> geometry_map(const Eigen::MatrixXd& node_coords,
                                                       const Eigen::MatrixXd& dn_dxi,
                                                       long element = -1) {
    if (node_coords.rows() != dn_dxi.rows() || node_coords.cols() != dn_dxi.cols())
        throw InvalidArgument("geometry_map: coordinate and gradient shapes differ");
    const Eigen::MatrixXd jac = node_coords.transpose() * dn_dxi;
    const double det = jac.determinant();
    if (!(det > 0.0)) throw InvertedElement(element, det);
    return {dn_dxi * jac.inverse(), det};
}

/// Fills the strain-displacement matrix for a fixed-size element.
template <int Dim, int Nodes>
void fill_b_matrix(const Eigen::Matrix<double, Nodes, Dim>& dn_dx,
                   Eigen::Matrix<double, voigt_size(Dim), Dim * Nodes>& b) {
    b.setZero();
    for (int a = 0; a < Nodes; ++a) {
        const int c = Dim * a;
        if constexpr (Dim == 1) {
            b(0, c) = dn_dx(a, 0);
        } else if constexpr (Dim == 2) {
            b(0, c) = dn_dx(a, 0);
            b(1, c + 1) = dn_dx(a, 1);
            b(2, c) = dn_dx(a, 1);
            b(2, c + 1) = dn_dx(a, 0);
        } else {
            b(0, c) = dn_dx(a, 0);
            b(1, c + 1) = dn_dx(a, 1);
            b(2, c + 2) = dn_dx(a, 2);
            b(3, c) = dn_dx(a, 1);
            b(3, c + 1) = dn_dx(a, 0);
            b(4, c + 1) = dn_dx(a, 2);
            b(4, c + 2) = dn_dx(a, 1);
            b(5, c) = dn_dx(a, 2);
            b(5, c + 2) = dn_dx(a, 0);
        }
    }
}

/// Runtime-size strain-displacement matrix.
inline Eigen::MatrixXd b_matrix(const Eigen::MatrixXd& dn_dx, int dim) {
    if (dim < 1 || dim > 3 || dn_dx.cols() != dim)
        throw InvalidArgument("b_matrix: gradient columns must equal dim (1..3)");
    const int nodes = static_cast<int>(dn_dx.rows());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(voigt_size(dim), dim * nodes);
    for (int a = 0; a < nodes; ++a) {
        const int c = dim * a;
        if (dim == 1) {
            b(0, c) = dn_dx(a, 0);
        } else if (dim == 2) {
            b(0, c) = dn_dx(a, 0);
            b(1, c + 1) = dn_dx(a, 1);
            b(2, c) = dn_dx(a, 1);
            b(2, c + 1) = dn_dx(a, 0);
        } else {
            b(0, c) = dn_dx(a, 0);
            b(1, c + 1) = dn_dx(a, 1);
            b(2, c + 2) = dn_dx(a, 2);
            b(3, c) = dn_dx(a, 1);
            b(3, c + 1) = dn_dx(a, 0);
            b(4, c + 1) = dn_dx(a, 2);
            b(4, c + 2) = dn_dx(a, 1);
            b(5, c) = dn_dx(a, 2);
            b(5, c + 2) = dn_dx(a, 0);
        }
    }
    return b;
}

} // namespace lgdm
