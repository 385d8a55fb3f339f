/**
 * @file shape_functions.hpp
 * @brief Isoparametric shape functions for the element families used by the
 *        two-field discretization.
 *
 * Node orderings (reference coordinates):
 *  - line2: -1, +1
 *  - line3: -1, 0, +1 (mid node is local node 1)
 *  - quad4: counter-clockwise corners starting at (-1,-1)
 *  - quad8: quad4 corners, then mid-side nodes of edges 0-1, 1-2, 2-3, 3-0
 *  - hex8:  bottom face (zeta = -1) counter-clockwise, then top face
 *
 * The displacement-field element always lists its corner nodes first, in the
 * same order as the micro-strain element of the same cell.
 */
#pragma once

#include <array>
#include <span>
#include <string_view>

#include <Eigen/Dense>

#include "lgdm/core/error.hpp"

namespace lgdm {

enum class ElementFamily { line2, line3, quad4, quad8, hex8 };

constexpr int node_count(ElementFamily f) {
    switch (f) {
    case ElementFamily::line2: return 2;
    case ElementFamily::line3: return 3;
    case ElementFamily::quad4: return 4;
    case ElementFamily::quad8: return 8;
    case ElementFamily::hex8: return 8;
    }
    return 0;
}

constexpr int family_dim(ElementFamily f) {
    switch (f) {
    case ElementFamily::line2:
    case ElementFamily::line3: return 1;
    case ElementFamily::quad4:
    case ElementFamily::quad8: return 2;
    case ElementFamily::hex8: return 3;
    }
    return 0;
}

constexpr std::string_view family_name(ElementFamily f) {
    switch (f) {
    case ElementFamily::line2: return "line2";
    case ElementFamily::line3: return "line3";
    case ElementFamily::quad4: return "quad4";
    case ElementFamily::quad8: return "quad8";
    case ElementFamily::hex8: return "hex8";
    }
    return "?";
}

template <ElementFamily F>
struct ElementTraits;

template <>
struct ElementTraits<ElementFamily::line2> {
    static constexpr int dim = 1;
    static constexpr int nodes = 2;
    using Values = Eigen::Matrix<double, nodes, 1>;
    using Grads = Eigen::Matrix<double, nodes, dim>;
    static constexpr std::array<std::array<double, 3>, nodes> reference_nodes{{{-1, 0, 0}, {1, 0, 0}}};

    static void eval(const double* xi, Values& n, Grads& dn) {
        const double x = xi[0];
        n << 0.5 * (1 - x), 0.5 * (1 + x);
        dn << -0.5, 0.5;
    }
};

template <>
struct ElementTraits<ElementFamily::line3> {
    static constexpr int dim = 1;
    static constexpr int nodes = 3;
    using Values = Eigen::Matrix<double, nodes, 1>;
    using Grads = Eigen::Matrix<double, nodes, dim>;
    static constexpr std::array<std::array<double, 3>, nodes> reference_nodes{
        {{-1, 0, 0}, {0, 0, 0}, {1, 0, 0}}};

    static void eval(const double* xi, Values& n, Grads& dn) {
        const double x = xi[0];
        n << 0.5 * x * (x - 1), 1 - x * x, 0.5 * x * (x + 1);
        dn << x - 0.5, -2 * x, x + 0.5;
    }
};

template <>
struct ElementTraits<ElementFamily::quad4> {
    static constexpr int dim = 2;
    static constexpr int nodes = 4;
    using Values = Eigen::Matrix<double, nodes, 1>;
    using Grads = Eigen::Matrix<double, nodes, dim>;
    static constexpr std::array<std::array<double, 3>, nodes> reference_nodes{
        {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0}}};

    static void eval(const double* xi, Values& n, Grads& dn) {
        for (int a = 0; a < nodes; ++a) {
            const double xa = reference_nodes[a][0];
            const double ya = reference_nodes[a][1];
            n(a) = 0.25 * (1 + xa * xi[0]) * (1 + ya * xi[1]);
            dn(a, 0) = 0.25 * xa * (1 + ya * xi[1]);
            dn(a, 1) = 0.25 * ya * (1 + xa * xi[0]);
        }
    }
};

/// 8-node serendipity quadrilateral.
template <>
struct ElementTraits<ElementFamily::quad8> {
    static constexpr int dim = 2;
    static constexpr int nodes = 8;
    using Values = Eigen::Matrix<double, nodes, 1>;
    using Grads = Eigen::Matrix<double, nodes, dim>;
    static constexpr std::array<std::array<double, 3>, nodes> reference_nodes{
        {{-1, -1, 0}, {1, -1, 0}, {1, 1, 0}, {-1, 1, 0},
         {0, -1, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}}};

    static void eval(const double* xi, Values& n, Grads& dn) {
        const double x = xi[0];
        const double y = xi[1];
        for (int a = 0; a < 4; ++a) {
            const double xa = reference_nodes[a][0];
            const double ya = reference_nodes[a][1];
            n(a) = 0.25 * (1 + xa * x) * (1 + ya * y) * (xa * x + ya * y - 1);
            dn(a, 0) = 0.25 * xa * (1 + ya * y) * (2 * xa * x + ya * y);
            dn(a, 1) = 0.25 * ya * (1 + xa * x) * (xa * x + 2 * ya * y);
        }
        for (int a = 4; a < 8; ++a) {
            const double xa = reference_nodes[a][0];
            const double ya = reference_nodes[a][1];
            if (xa == 0) {
                n(a) = 0.5 * (1 - x * x) * (1 + ya * y);
                dn(a, 0) = -x * (1 + ya * y);
                dn(a, 1) = 0.5 * ya * (1 - x * x);
            } else {
                n(a) = 0.5 * (1 + xa * x) * (1 - y * y);
                dn(a, 0) = 0.5 * xa * (1 - y * y);
                dn(a, 1) = -y * (1 + xa * x);
            }
        }
    }
};

template <>
struct ElementTraits<ElementFamily::hex8> {
    static constexpr int dim = 3;
    static constexpr int nodes = 8;
    using Values = Eigen::Matrix<double, nodes, 1>;
    using Grads = Eigen::Matrix<double, nodes, dim>;
    static constexpr std::array<std::array<double, 3>, nodes> reference_nodes{
        {{-1, -1, -1}, {1, -1, -1}, {1, 1, -1}, {-1, 1, -1},
         {-1, -1, 1}, {1, -1, 1}, {1, 1, 1}, {-1, 1, 1}}};

    static void eval(const double* xi, Values& n, Grads& dn) {
        for (int a = 0; a < nodes; ++a) {
            const double xa = reference_nodes[a][0];
            const double ya = reference_nodes[a][1];
            const double za = reference_nodes[a][2];
            const double fx = 1 + xa * xi[0];
            const double fy = 1 + ya * xi[1];
            const double fz = 1 + za * xi[2];
            n(a) = 0.125 * fx * fy * fz;
            dn(a, 0) = 0.125 * xa * fy * fz;
            dn(a, 1) = 0.125 * ya * fx * fz;
            dn(a, 2) = 0.125 * za * fx * fy;
        }
    }
};

/// Shape values and derivatives at one point. dN_dx and detJ are filled by
/// geometry_map().
struct ShapeEval {
    Eigen::VectorXd N;
    Eigen::MatrixXd dN_dxi;
    Eigen::MatrixXd dN_dx;
    double detJ = 0.0;
};

namespace detail {
template <ElementFamily F>
ShapeEval eval_dynamic(std::span<const double> xi) {
    using T = ElementTraits<F>;
    typename T::Values n;
    typename T::Grads dn;
    T::eval(xi.data(), n, dn);
    ShapeEval out;
    out.N = n;
    out.dN_dxi = dn;
    return out;
}
} // namespace detail

/// Runtime-dispatched evaluation of N and dN/dxi.
inline ShapeEval shape_functions(ElementFamily family, std::span<const double> xi) {
    if (static_cast<int>(xi.size()) < family_dim(family))
        throw InvalidArgument("shape_functions: local coordinate has too few components");
    switch (family) {
    case ElementFamily::line2: return detail::eval_dynamic<ElementFamily::line2>(xi);
    case ElementFamily::line3: return detail::eval_dynamic<ElementFamily::line3>(xi);
    case ElementFamily::quad4: return detail::eval_dynamic<ElementFamily::quad4>(xi);
    case ElementFamily::quad8: return detail::eval_dynamic<ElementFamily::quad8>(xi);
    case ElementFamily::hex8: return detail::eval_dynamic<ElementFamily::hex8>(xi);
    }
    throw InvalidArgument("shape_functions: unknown family");
}

/// Reference coordinates of node `a` of a family.
inline std::array<double, 3> reference_node(ElementFamily family, int a) {
    switch (family) {
    case ElementFamily::line2: return ElementTraits<ElementFamily::line2>::reference_nodes.at(a);
    case ElementFamily::line3: return ElementTraits<ElementFamily::line3>::reference_nodes.at(a);
    case ElementFamily::quad4: return ElementTraits<ElementFamily::quad4>::reference_nodes.at(a);
    case ElementFamily::quad8: return ElementTraits<ElementFamily::quad8>::reference_nodes.at(a);
    case ElementFamily::hex8: return ElementTraits<ElementFamily::hex8>::reference_nodes.at(a);
    }
    throw InvalidArgument("reference_node: unknown family");
}

} // namespace lgdm
