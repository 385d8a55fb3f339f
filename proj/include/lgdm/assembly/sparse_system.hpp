/**
 * @file sparse_system.hpp
 * @brief Global tangent / right-hand side pair and the backend interface.
 */
#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Sparse>

#include "lgdm/assembly/model.hpp"

namespace lgdm {

/// K delta = F with the displacement block first and the micro-strain block
/// second. F is the negative residual, so a Newton update is x += delta.
struct SparseSystem {
    using Matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

    Matrix K;
    Eigen::VectorXd F;
    int ndof_u = 0;

    int size() const { return static_cast<int>(F.size()); }

    std::vector<Eigen::Triplet<double, int>> triplets() const {
        std::vector<Eigen::Triplet<double, int>> out;
        out.reserve(static_cast<std::size_t>(K.nonZeros()));
        for (int col = 0; col < K.outerSize(); ++col)
            for (Matrix::InnerIterator it(K, col); it; ++it) out.emplace_back(it.row(), it.col(), it.value());
        return out;
    }
};

enum class BackendKind { loop, batched };

constexpr std::string_view backend_name(BackendKind k) { return k == BackendKind::loop ? "loop" : "batched"; }

/// Assembly and Gauss-point update for one model. Implementations may cache
/// geometry and sparsity, so instances are bound to the model they were built for.
class AssemblyBackend {
public:
    virtual ~AssemblyBackend() = default;

    virtual BackendKind kind() const = 0;

    /// Tangent and right-hand side at the given state, without boundary conditions.
    virtual SparseSystem assemble(const GpState& state) = 0;

    /// Recomputes every Gauss-point variable from the total solution `x`
    /// (u block then micro-strain block). The history is measured against
    /// `committed_kappa`, the values accepted at the end of the previous step.
    virtual GpState update_state(const Eigen::VectorXd& x, const std::vector<double>& committed_kappa) = 0;
};

} // namespace lgdm
