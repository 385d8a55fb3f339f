#pragma once

#include <random>
#include <vector>

#include "lgdm/solver/newton.hpp"

namespace lgdm::test {

inline Mesh box(int dim, std::vector<int> div, std::vector<double> ext = {1.0, 1.0, 1.0}) {
    ext.resize(3, 1.0);
    div.resize(3, 1);
    return build_structured_mesh(dim, std::span<const double>(ext.data(), dim), std::span<const int>(div.data(), dim));
}

inline Eigen::MatrixXd node_matrix(const std::vector<Point>& nodes, std::span<const int> conn, int dim) {
    Eigen::MatrixXd x(conn.size(), dim);
    for (std::size_t a = 0; a < conn.size(); ++a)
        for (int d = 0; d < dim; ++d) x(a, d) = nodes[conn[a]][d];
    return x;
}

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Random solution vector with small strains and a positive micro-strain field.
inline Eigen::VectorXd random_solution(const Model& m, std::mt19937& rng, double scale = 1e-3) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(m.dofs.size());
    for (int i = 0; i < x.size(); ++i)
        x(i) = i < m.dofs.ndof_u ? scale * u(rng) : scale * (1.5 + 0.5 * u(rng));
    return x;
}

/// Committed history that leaves each point clearly loading or clearly unloading.
inline std::vector<double> generic_history(const Model& m, const GpState& s) {
    std::vector<double> h(static_cast<std::size_t>(s.points));
    for (int q = 0; q < s.points; ++q)
        h[q] = q % 3 == 0 ? 1.3 * s.ebar[q] : std::max(1.2 * m.kappa0[q], 0.7 * s.ebar[q]);
    return h;
}

inline Eigen::MatrixXd dense(const SparseSystem& s) { return Eigen::MatrixXd(s.K); }

} // namespace lgdm::test
