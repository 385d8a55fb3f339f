/**
 * @file quadrature.hpp
 * @brief Tensor-product Gauss-Legendre rules on the reference line, square and cube.
 */
#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "lgdm/fem/shape_functions.hpp"

namespace lgdm {

struct QuadraturePoint {
    std::array<double, 3> xi{0.0, 0.0, 0.0};
    double weight = 0.0;
};

struct QuadratureRule {
    int dim = 0;
    std::vector<QuadraturePoint> points;

    int size() const { return static_cast<int>(points.size()); }
};

namespace detail {
inline void gauss_1d(int n, std::vector<double>& x, std::vector<double>& w) {
    switch (n) {
    case 1:
        x = {0.0};
        w = {2.0};
        return;
    case 2: {
        const double a = 1.0 / std::sqrt(3.0);
        x = {-a, a};
        w = {1.0, 1.0};
        return;
    }
    case 3: {
        const double a = std::sqrt(3.0 / 5.0);
        x = {-a, 0.0, a};
        w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
        return;
    }
    default: throw InvalidArgument("gauss_1d: only 1..3 points are tabulated");
    }
}
} // namespace detail

/// Product rule with `n` points per direction; the first axis varies fastest.
inline QuadratureRule tensor_gauss_rule(int dim, int n) {
    std::vector<double> x, w;
    detail::gauss_1d(n, x, w);
    QuadratureRule rule;
    rule.dim = dim;
    const int nz = dim > 2 ? n : 1;
    const int ny = dim > 1 ? n : 1;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < n; ++i) {
                QuadraturePoint p;
                p.xi[0] = x[i];
                p.weight = w[i];
                if (dim > 1) {
                    p.xi[1] = x[j];
                    p.weight *= w[j];
                }
                if (dim > 2) {
                    p.xi[2] = x[k];
                    p.weight *= w[k];
                }
                rule.points.push_back(p);
            }
    return rule;
}

/// Points per direction used for each family (full integration).
constexpr int gauss_points_per_direction(ElementFamily family) {
    switch (family) {
    case ElementFamily::line2: return 2;
    case ElementFamily::line3: return 3;
    case ElementFamily::quad4: return 2;
    case ElementFamily::quad8: return 3;
    case ElementFamily::hex8: return 2;
    }
    return 0;
}

inline QuadratureRule gauss_rule(ElementFamily family) {
    return tensor_gauss_rule(family_dim(family), gauss_points_per_direction(family));
}

} // namespace lgdm
