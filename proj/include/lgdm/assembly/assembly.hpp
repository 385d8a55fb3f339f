/**
 * @file assembly.hpp
 * @brief Backend factory, Dirichlet elimination and reaction recovery.
 */
#pragma once

#include <memory>
#include <vector>

#include "lgdm/assembly/batched_backend.hpp"
#include "lgdm/assembly/loop_backend.hpp"

namespace lgdm {

inline std::unique_ptr<AssemblyBackend> make_backend(BackendKind kind, const Model& model) {
    if (kind == BackendKind::loop) return std::make_unique<LoopBackend>(model);
    switch (model.dim()) {
    case 1: return std::make_unique<BatchedBackend<1>>(model);
    case 2: return std::make_unique<BatchedBackend<2>>(model);
    case 3: return std::make_unique<BatchedBackend<3>>(model);
    default: throw InvalidArgument("make_backend: unsupported dimension");
    }
}

/// One-shot assembly. Drivers that assemble repeatedly should keep a backend.
inline SparseSystem assemble(const Model& model, const GpState& state, BackendKind kind) {
    return make_backend(kind, model)->assemble(state);
}

/// First Newton iteration of a step prescribes the step increment on
/// constrained DOFs; later iterations prescribe zero.
enum class DirichletPhase { first, subsequent };

/**
 * Symmetric elimination in place: column contributions of prescribed values
 * move to the right-hand side, constrained rows and columns are zeroed and the
 * diagonal set to one, and F holds the prescribed increment. The sparsity
 * pattern is left unchanged.
 */
inline void apply_dirichlet(SparseSystem& sys, const std::vector<Constraint>& constraints, DirichletPhase phase) {
    if (constraints.empty()) return;
    const int n = sys.size();
    std::vector<char> fixed(static_cast<std::size_t>(n), 0);
    Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
    for (const Constraint& c : constraints) {
        if (c.dof < 0 || c.dof >= n) throw UnsupportedConstraint("constraint DOF out of range");
        if (c.dof >= sys.ndof_u) throw UnsupportedConstraint("only displacement DOFs may be constrained");
        fixed[c.dof] = 1;
        value(c.dof) = phase == DirichletPhase::first ? c.step_increment : 0.0;
    }
    SparseSystem::Matrix& k = sys.K;
    for (int col = 0; col < k.outerSize(); ++col) {
        const bool col_fixed = fixed[col] != 0;
        for (SparseSystem::Matrix::InnerIterator it(k, col); it; ++it) {
            const int row = static_cast<int>(it.row());
            if (col_fixed && !fixed[row]) sys.F(row) -= it.value() * value(col);
            if (col_fixed || fixed[row]) it.valueRef() = (row == col) ? 1.0 : 0.0;
        }
    }
    for (int i = 0; i < n; ++i)
        if (fixed[i]) {
            if (k.coeff(i, i) != 1.0) k.coeffRef(i, i) = 1.0;
            sys.F(i) = value(i);
        }
}

/// Internal force vector int Bu^T sigma over the displacement DOFs.
inline Eigen::VectorXd internal_force(const Model& model, const GpState& state) {
    state.check(model.dim(), model.gp_count());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(model.dofs.ndof_u);
    const int ngp = model.ngp();
    for (int e = 0; e < model.mesh.element_count; ++e) {
        const auto gp = gp_data(model.mesh, e, model.rule);
        const auto gu = model.dofs.element_u(e);
        for (int q = 0; q < ngp; ++q) {
            const detail::PointView pt{state, e * ngp + q};
            const Eigen::VectorXd fe = gp[q].w * gp[q].Bu.transpose() * pt.stress();
            for (std::size_t i = 0; i < gu.size(); ++i) f(gu[i]) += fe(i);
        }
    }
    return f;
}

/// Sum of the internal force over the driven DOFs (N, or N per unit area in 1D).
inline double reaction_force(const Model& model, const GpState& state, const std::vector<Constraint>& constraints) {
    const Eigen::VectorXd f = internal_force(model, state);
    double r = 0.0;
    for (const Constraint& c : constraints)
        if (c.kind == ConstraintKind::driven) r += f(c.dof);
    return r;
}

inline double reaction_force(const Model& model, const GpState& state) {
    return reaction_force(model, state, model.constraints);
}

} // namespace lgdm
