/**
 * @file newton.hpp
 * @brief Incremental-iterative Newton driver under displacement control.
 */
#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "lgdm/assembly/assembly.hpp"
#include "lgdm/solver/linear_solver.hpp"

namespace lgdm {

struct NewtonConfig {
    double tol = 1e-4;
    int max_iterations = 25;
    int steps = 1;
    /// A step is abandoned once the residual has grown three iterations in a
    /// row and stands this many times above the smallest residual of the step.
    double divergence_factor = 1e6;

    void validate() const {
        if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
        if (max_iterations < 1) throw InvalidArgument("max_iterations must be at least 1");
        if (steps < 1) throw InvalidArgument("steps must be at least 1");
        if (!(divergence_factor > 1.0)) throw InvalidArgument("divergence_factor must exceed 1");
    }

    bool operator==(const NewtonConfig&) const = default;
};

inline constexpr double kNormFloor = 1e-16;

inline double relative_change(const Eigen::Ref<const Eigen::VectorXd>& delta,
                              const Eigen::Ref<const Eigen::VectorXd>& field) {
    return delta.norm() / std::max(field.norm(), kNormFloor);
}

inline bool check_convergence(const Eigen::Ref<const Eigen::VectorXd>& du, const Eigen::Ref<const Eigen::VectorXd>& u,
                              const Eigen::Ref<const Eigen::VectorXd>& de, const Eigen::Ref<const Eigen::VectorXd>& e,
                              double tol) {
    if (du.size() != u.size() || de.size() != e.size())
        throw InvalidArgument("check_convergence: field sizes differ");
    return relative_change(du, u) <= tol && relative_change(de, e) <= tol;
}

inline GpState update_state(AssemblyBackend& backend, const Eigen::VectorXd& x, const std::vector<double>& committed) {
    return backend.update_state(x, committed);
}

/// Gauss-point state for a zero solution with virgin history.
inline GpState initial_state(const Model& model, AssemblyBackend& backend) {
    return backend.update_state(Eigen::VectorXd::Zero(model.dofs.size()), model.kappa0);
}

struct StepRecord {
    int step = 0;
    double displacement = 0.0; ///< applied on the driven boundary, mm
    double reaction = 0.0;
    int iterations = 0;

    bool operator==(const StepRecord&) const = default;
};

struct IterationRecord {
    int step = 0;
    int iteration = 0;
    double du_rel = 0.0;
    double de_rel = 0.0;
    double residual = 0.0; ///< 2-norm of the right-hand side over free DOFs
    double t_assembly = 0.0; ///< seconds
    double t_solve = 0.0;
    double t_update = 0.0;
    double t_total = 0.0;
};

struct Snapshot {
    int step = 0;
    Eigen::VectorXd u;    ///< dim components per u-node
    Eigen::VectorXd ebar; ///< one value per micro-strain node
    std::vector<double> damage;
    std::vector<double> kappa;

    bool operator==(const Snapshot& o) const {
        return step == o.step && u == o.u && ebar == o.ebar && damage == o.damage && kappa == o.kappa;
    }
};

struct SimulationResult {
    std::vector<StepRecord> steps;
    std::vector<Snapshot> snapshots;
    std::vector<IterationRecord> log;
    Eigen::VectorXd x;
    GpState state;
};

/// Passed to the iteration observer right after assembly, before constraints.
struct IterationEvent {
    int step;
    int iteration;
    const GpState& state;
    const SparseSystem& system;
};

struct RunOptions {
    int max_steps = -1;         ///< stop early after this many steps (-1: all)
    int snapshot_interval = 10; ///< 0 keeps only the final step
    std::function<void(const IterationEvent&)> observer;
};

inline Snapshot take_snapshot(int step, const Model& model, const Eigen::VectorXd& x, const GpState& s) {
    return Snapshot{step, x.head(model.dofs.ndof_u), x.tail(model.dofs.ndof_e), s.damage, s.kappa};
}

/// Displacement of the first driven DOF after `step` steps.
inline double applied_displacement(const std::vector<Constraint>& constraints, int step) {
    for (const Constraint& c : constraints)
        if (c.kind == ConstraintKind::driven) return c.total_at(step);
    return 0.0;
}

inline SimulationResult run_simulation(const Model& model, const NewtonConfig& config, AssemblyBackend& backend,
                                       const RunOptions& options = {}) {
    using clock = std::chrono::steady_clock;
    const auto seconds = [](clock::time_point a, clock::time_point b) {
        return std::chrono::duration<double>(b - a).count();
    };
    config.validate();
    const int nu = model.dofs.ndof_u, ne = model.dofs.ndof_e;
    const int last = options.max_steps >= 0 ? std::min(options.max_steps, config.steps) : config.steps;

    std::vector<char> is_fixed(static_cast<std::size_t>(model.dofs.size()), 0);
    for (const Constraint& c : model.constraints) is_fixed[c.dof] = 1;
    const auto free_norm = [&](const Eigen::VectorXd& f) {
        double s = 0.0;
        for (int i = 0; i < f.size(); ++i)
            if (!is_fixed[i]) s += f(i) * f(i);
        return std::sqrt(s);
    };

    SimulationResult out;
    out.x = Eigen::VectorXd::Zero(model.dofs.size());
    out.state = initial_state(model, backend);
    std::vector<double> committed = model.kappa0;
    SparseLU lu;

    for (int step = 1; step <= last; ++step) {
        bool converged = false;
        int it = 0;
        double du_rel = 0.0, de_rel = 0.0, residual = 0.0;
        double r_prev = std::numeric_limits<double>::infinity(), r_min = r_prev;
        int growth = 0;
        GpState trial = out.state;
        Eigen::VectorXd x = out.x;
        while (!converged && it < config.max_iterations) {
            ++it;
            IterationRecord rec{step, it};
            const auto t0 = clock::now();
            SparseSystem sys = backend.assemble(trial);
            if (options.observer) options.observer(IterationEvent{step, it, trial, sys});
            apply_dirichlet(sys, model.constraints, it == 1 ? DirichletPhase::first : DirichletPhase::subsequent);
            const auto t1 = clock::now();
            residual = free_norm(sys.F);
            if (!std::isfinite(residual)) throw StepFailure(step, it, du_rel, de_rel, residual, "non-finite residual");
            growth = residual > r_prev ? growth + 1 : 0;
            r_min = std::min(r_min, residual);
            r_prev = residual;
            if (growth >= 3 && residual > config.divergence_factor * r_min)
                throw StepFailure(step, it, du_rel, de_rel, residual, "diverging residual");
            Eigen::VectorXd delta;
            try {
                lu.factorize(sys.K);
                delta = lu.solve(sys.F);
            } catch (const SolverError& err) {
                throw StepFailure(step, it, du_rel, de_rel, residual, err.what());
            }
            const auto t2 = clock::now();
            x += delta;
            trial = backend.update_state(x, committed);
            const auto t3 = clock::now();
            du_rel = relative_change(delta.head(nu), x.head(nu));
            de_rel = relative_change(delta.tail(ne), x.tail(ne));
            converged = du_rel <= config.tol && de_rel <= config.tol;
            const auto t4 = clock::now();
            rec.du_rel = du_rel;
            rec.de_rel = de_rel;
            rec.residual = residual;
            rec.t_assembly = seconds(t0, t1);
            rec.t_solve = seconds(t1, t2);
            rec.t_update = seconds(t2, t3);
            rec.t_total = seconds(t0, t4);
            out.log.push_back(rec);
        }
        if (!converged) throw StepFailure(step, it, du_rel, de_rel, residual, "no convergence within max_iterations");

        for (int p = 0; p < trial.points; ++p)
            if (trial.kappa[p] < committed[p] || trial.damage[p] < out.state.damage[p])
                throw InvalidState("history decreased at Gauss point " + std::to_string(p) + " in step " +
                                   std::to_string(step));
        committed = trial.kappa;
        out.x = std::move(x);
        out.state = std::move(trial);
        out.steps.push_back(StepRecord{step, applied_displacement(model.constraints, step),
                                       reaction_force(model, out.state), it});
        const bool periodic = options.snapshot_interval > 0 && step % options.snapshot_interval == 0;
        if (periodic || step == last) out.snapshots.push_back(take_snapshot(step, model, out.x, out.state));
    }
    return out;
}

inline SimulationResult run_simulation(const Model& model, const NewtonConfig& config, BackendKind kind,
                                       const RunOptions& options = {}) {
    auto backend = make_backend(kind, model);
    return run_simulation(model, config, *backend, options);
}

} // namespace lgdm
