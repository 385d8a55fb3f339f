/**
 * @file linear_solver.hpp
 * @brief Sparse direct LU solve (UMFPACK) with condition and residual checks.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <umfpack.h>

#include "lgdm/assembly/sparse_system.hpp"
#include "lgdm/core/error.hpp"

namespace lgdm {

namespace detail {

/// Set once UMFPACK produced non-finite or inaccurate factors for a finite
/// matrix, which points at a defective BLAS underneath it.
inline bool& umfpack_unusable() {
    static bool flag = false;
    return flag;
}

} // namespace detail

/**
 * Sparse LU of a square compressed matrix. UMFPACK is used by default; its
 * symbolic analysis is kept while the sparsity pattern stays the same, which
 * is the case across Newton iterations of one model.
 *
 * If UMFPACK breaks down on a finite matrix (NaN pivots, or a solution that
 * fails the residual check) the process switches to Eigen's SparseLU for all
 * later factorizations.
 */
class SparseLU {
public:
    /// Factorizations with an rcond estimate below this are rejected.
    static constexpr double kMinRcond = 1e-14;

    SparseLU() {
        umfpack_di_defaults(control_);
        control_[UMFPACK_PRL] = 0;
    }
    SparseLU(const SparseLU&) = delete;
    SparseLU& operator=(const SparseLU&) = delete;
    ~SparseLU() { release_umfpack(); }

    void factorize(const SparseSystem::Matrix& k) {
        if (k.rows() != k.cols()) throw InvalidArgument("linear solve: matrix is not square");
        if (!k.isCompressed()) throw InvalidArgument("linear solve: matrix must be compressed");
        if (!Eigen::Map<const Eigen::VectorXd>(k.valuePtr(), k.nonZeros()).allFinite())
            throw SolverError("matrix has non-finite entries", 0.0);
        matrix_ = nullptr;
        if (detail::umfpack_unusable()) {
            fallback_factorize(k);
            return;
        }
        if (umfpack_factorize(k) && probe_ok(k)) return;
        // Singular, or UMFPACK misjudged a regular matrix; the fallback decides.
        fallback_factorize(k);
        detail::umfpack_unusable() = true;
    }

    Eigen::VectorXd solve(const Eigen::VectorXd& f) {
        if (!matrix_) throw InvalidState("linear solve: no factorization");
        if (f.size() != matrix_->rows()) throw InvalidArgument("linear solve: right-hand side has the wrong size");
        const SparseSystem::Matrix& k = *matrix_;
        if (numeric_) {
            Eigen::VectorXd x = umfpack_solve(f);
            if (residual_ok(k, x, f)) return x;
            detail::umfpack_unusable() = true;
            fallback_factorize(k);
        }
        const Eigen::VectorXd rhs = row_scale_.cwiseProduct(f);
        Eigen::VectorXd x = fallback_.solve(rhs);
        if (!residual_ok(k, x, f)) throw SolverError("residual check failed", rcond_);
        return x;
    }

    /// Reciprocal condition estimate of the last factorization.
    double rcond() const { return rcond_; }

private:
    struct Pattern {
        std::vector<int> outer, inner;

        bool matches(const SparseSystem::Matrix& k) const {
            const auto n = static_cast<std::size_t>(k.outerSize());
            const auto nnz = static_cast<std::size_t>(k.nonZeros());
            return outer.size() == n + 1 && inner.size() == nnz &&
                   std::equal(outer.begin(), outer.end(), k.outerIndexPtr()) &&
                   std::equal(inner.begin(), inner.end(), k.innerIndexPtr());
        }
        void assign(const SparseSystem::Matrix& k) {
            outer.assign(k.outerIndexPtr(), k.outerIndexPtr() + k.outerSize() + 1);
            inner.assign(k.innerIndexPtr(), k.innerIndexPtr() + k.nonZeros());
        }
    };

    /// Returns false when UMFPACK broke down and the fallback should be used.
    bool umfpack_factorize(const SparseSystem::Matrix& k) {
        const int n = static_cast<int>(k.rows());
        const int* ap = k.outerIndexPtr();
        const int* ai = k.innerIndexPtr();
        if (!symbolic_ || !umf_pattern_.matches(k)) {
            release_umfpack();
            int status = umfpack_di_symbolic(n, n, ap, ai, k.valuePtr(), &symbolic_, control_, info_);
            if (status != UMFPACK_OK) {
                symbolic_ = nullptr;
                throw SolverError("symbolic factorization failed (status " + std::to_string(status) + ")", 0.0);
            }
            umf_pattern_.assign(k);
        }
        free_numeric();
        int status = umfpack_di_numeric(ap, ai, k.valuePtr(), symbolic_, &numeric_, control_, info_);
        rcond_ = info_[UMFPACK_RCOND];
        if (std::isnan(rcond_) || status == UMFPACK_WARNING_singular_matrix) {
            // Either a singular matrix or a broken BLAS; the fallback decides.
            free_numeric();
            return false;
        }
        if (!(rcond_ >= kMinRcond)) {
            free_numeric();
            throw SolverError("singular or ill-conditioned system", rcond_);
        }
        if (status != UMFPACK_OK) {
            free_numeric();
            throw SolverError("numeric factorization failed (status " + std::to_string(status) + ")", rcond_);
        }
        matrix_ = &k;
        return true;
    }

    /// Solves for a fixed dense right-hand side. The pivot-based rcond can
    /// miss a rank deficiency that such a solve exposes.
    bool probe_ok(const SparseSystem::Matrix& k) const {
        Eigen::VectorXd f(k.rows());
        for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = 1.0 + std::sin(0.7 * static_cast<double>(i));
        return residual_ok(k, umfpack_solve(f), f);
    }

    Eigen::VectorXd umfpack_solve(const Eigen::VectorXd& f) const {
        const SparseSystem::Matrix& k = *matrix_;
        Eigen::VectorXd x(k.rows());
        double info[UMFPACK_INFO];
        int status = umfpack_di_solve(UMFPACK_A, k.outerIndexPtr(), k.innerIndexPtr(), k.valuePtr(), x.data(),
                                      f.data(), numeric_, control_, info);
        if (status != UMFPACK_OK && status != UMFPACK_WARNING_singular_matrix)
            throw SolverError("triangular solve failed (status " + std::to_string(status) + ")", rcond_);
        return x;
    }

    /// Row-equilibrated Eigen SparseLU. rcond is min/max |U_ii| of the scaled
    /// matrix, the same estimate UMFPACK reports.
    void fallback_factorize(const SparseSystem::Matrix& k) {
        release_umfpack();
        row_scale_ = Eigen::VectorXd::Zero(k.rows());
        for (int c = 0; c < k.outerSize(); ++c)
            for (SparseSystem::Matrix::InnerIterator it(k, c); it; ++it) row_scale_(it.row()) += std::abs(it.value());
        for (Eigen::Index i = 0; i < row_scale_.size(); ++i) {
            if (row_scale_(i) == 0.0) throw SolverError("singular system (empty row " + std::to_string(i) + ")", 0.0);
            row_scale_(i) = 1.0 / row_scale_(i);
        }
        scaled_ = row_scale_.asDiagonal() * k;
        scaled_.makeCompressed();
        if (!eigen_pattern_.matches(scaled_)) {
            fallback_.analyzePattern(scaled_);
            eigen_pattern_.assign(scaled_);
        }
        fallback_.factorize(scaled_);
        if (fallback_.info() != Eigen::Success)
            throw SolverError("singular system (" + fallback_.lastErrorMessage() + ")", 0.0);
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        const auto& l = fallback_.matrixL().m_mapL;
        for (Eigen::Index j = 0; j < l.cols(); ++j)
            for (typename std::decay_t<decltype(l)>::InnerIterator it(l, j); it; ++it)
                if (it.index() == j) {
                    lo = std::min(lo, std::abs(it.value()));
                    hi = std::max(hi, std::abs(it.value()));
                }
        rcond_ = hi > 0.0 ? lo / hi : 0.0;
        if (!(rcond_ >= kMinRcond)) throw SolverError("singular or ill-conditioned system", rcond_);
        matrix_ = &k;
    }

    static double infinity_norm(const SparseSystem::Matrix& k) {
        Eigen::VectorXd row = Eigen::VectorXd::Zero(k.rows());
        for (int c = 0; c < k.outerSize(); ++c)
            for (SparseSystem::Matrix::InnerIterator it(k, c); it; ++it) row(it.row()) += std::abs(it.value());
        return row.size() ? row.maxCoeff() : 0.0;
    }

    static bool residual_ok(const SparseSystem::Matrix& k, const Eigen::VectorXd& x, const Eigen::VectorXd& f) {
        if (!x.allFinite()) return false;
        const double res = (k * x - f).lpNorm<Eigen::Infinity>();
        const double scale = infinity_norm(k) * x.lpNorm<Eigen::Infinity>() + f.lpNorm<Eigen::Infinity>();
        return res <= 1e-9 * scale;
    }

    void free_numeric() {
        if (numeric_) umfpack_di_free_numeric(&numeric_);
        numeric_ = nullptr;
    }

    void release_umfpack() {
        free_numeric();
        if (symbolic_) umfpack_di_free_symbolic(&symbolic_);
        symbolic_ = nullptr;
        umf_pattern_ = {};
    }

    double control_[UMFPACK_CONTROL];
    double info_[UMFPACK_INFO];
    void* symbolic_ = nullptr;
    void* numeric_ = nullptr;
    Pattern umf_pattern_, eigen_pattern_;
    Eigen::SparseLU<SparseSystem::Matrix, Eigen::COLAMDOrdering<int>> fallback_;
    SparseSystem::Matrix scaled_;
    Eigen::VectorXd row_scale_;
    const SparseSystem::Matrix* matrix_ = nullptr;
    double rcond_ = std::numeric_limits<double>::quiet_NaN();
};

/// Solves K delta = F for a constrained system.
inline Eigen::VectorXd linear_solve(const SparseSystem& sys) {
    SparseLU lu;
    lu.factorize(sys.K);
    return lu.solve(sys.F);
}

} // namespace lgdm
