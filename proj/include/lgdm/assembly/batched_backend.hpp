/**
 * @file batched_backend.hpp
 * @brief Whole-model assembly and update on flat Gauss-point arrays.
 *
 * Geometry is evaluated once for all nel * ngp points. Each assembly first
 * evaluates every integrand coefficient on flat arrays, then emits the triplet
 * values of the whole model in one element-major pass into a buffer whose
 * (row, col) pattern and compressed slot were fixed at construction. The
 * update computes strains, micro-strains and their gradients for every point
 * with three sparse products and applies the pointwise laws as array passes,
 * with the history and damage branches expressed as condition flags.
 */
#pragma once

#include <algorithm>
#include <vector>

#include "lgdm/assembly/sparse_system.hpp"

namespace lgdm {

template <int Dim>
struct FieldFamilies;

template <>
struct FieldFamilies<1> {
    static constexpr ElementFamily u = ElementFamily::line3;
    static constexpr ElementFamily e = ElementFamily::line2;
};
template <>
struct FieldFamilies<2> {
    static constexpr ElementFamily u = ElementFamily::quad8;
    static constexpr ElementFamily e = ElementFamily::quad4;
};
template <>
struct FieldFamilies<3> {
    static constexpr ElementFamily u = ElementFamily::hex8;
    static constexpr ElementFamily e = ElementFamily::hex8;
};

template <int Dim>
class BatchedBackend final : public AssemblyBackend {
    using TU = ElementTraits<FieldFamilies<Dim>::u>;
    using TE = ElementTraits<FieldFamilies<Dim>::e>;
    static constexpr int nv = voigt_size(Dim);
    static constexpr int nen_u = TU::nodes;
    static constexpr int nde = TE::nodes;
    static constexpr int ndu = Dim * nen_u;
    static constexpr int nt = ndu + nde;

    using BMat = Eigen::Matrix<double, nv, ndu>;
    using NVec = Eigen::Matrix<double, nde, 1>;
    using GMat = Eigen::Matrix<double, nde, Dim>;
    using VVec = Eigen::Matrix<double, nv, 1>;
    using VMat = Eigen::Matrix<double, nv, nv>;
    using DVec = Eigen::Matrix<double, Dim, 1>;
    using RowSparse = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

public:
    explicit BatchedBackend(const Model& model) : model_(model) {
        if (model.dim() != Dim || model.mesh.family_u != FieldFamilies<Dim>::u ||
            model.mesh.family_e != FieldFamilies<Dim>::e)
            throw InvalidArgument("BatchedBackend: model does not match the backend dimension");
        ngp_ = model.ngp();
        npt_ = model.gp_count();
        c_ = elasticity_matrix<Dim>(model.params.E, model.params.nu);
        precompute_geometry();
        build_operators();
        build_pattern();
    }

    BackendKind kind() const override { return BackendKind::batched; }

    SparseSystem assemble(const GpState& s) override {
        s.check(Dim, npt_);
        const MaterialParams& mp = model_.params;
        const auto n = static_cast<std::size_t>(npt_);

        // Integrand coefficients at every point, already scaled by w.
        duu_.resize(n);
        due_.resize(n);
        deu_.resize(n);
        fu_.resize(n);
        feb_.resize(n);
        snn_.resize(n);
        sgn_.resize(n);
        sbb_.resize(n);
        fen_.resize(n);
        for (std::size_t p = 0; p < n; ++p) {
            const double w = w_[p];
            const Eigen::Map<const VVec> eps(s.strain.data() + p * nv);
            const Eigen::Map<const VVec> de(s.deps_eq.data() + p * nv);
            const Eigen::Map<const VMat> d2(s.d2eps_eq.data() + p * nv * nv);
            const Eigen::Map<const VVec> sig(s.stress.data() + p * nv);
            const Eigen::Map<const DVec> grad(s.grad_ebar.data() + p * Dim);
            const double dd = s.ddamage[p] * s.loading[p];
            const double mismatch = s.eps_eq[p] - s.ebar[p];
            duu_[p] = w * ((1 - s.damage[p]) * c_ + mp.h * (de * de.transpose() + mismatch * d2));
            due_[p] = -w * (dd * (c_ * eps) + mp.h * de);
            deu_[p] = -w * mp.h * de;
            fu_[p] = -w * sig;
            snn_[p] = w * mp.h;
            sgn_[p] = w * mp.h * mp.c * s.dg[p] * dd;
            sbb_[p] = w * s.g[p] * mp.h * mp.c;
            fen_[p] = w * mp.h * mismatch;
            feb_[p] = -w * s.g[p] * mp.h * mp.c * grad;
        }

        // One pass over all points emitting triplet values element-major.
        std::fill(vals_.begin(), vals_.end(), 0.0);
        SparseSystem sys;
        sys.ndof_u = model_.dofs.ndof_u;
        sys.F = Eigen::VectorXd::Zero(model_.dofs.size());
        for (int e = 0; e < model_.mesh.element_count; ++e) {
            Eigen::Map<Eigen::Matrix<double, nt, nt, Eigen::RowMajor>> k(vals_.data() + std::size_t(e) * nt * nt);
            Eigen::Matrix<double, nt, 1> f = Eigen::Matrix<double, nt, 1>::Zero();
            for (int q = 0; q < ngp_; ++q) {
                const std::size_t p = std::size_t(e) * ngp_ + q;
                const BMat& b = bu_[p];
                const NVec& ne = ne_[p];
                const GMat& be = be_[p];
                const Eigen::Matrix<double, nv, ndu> db = duu_[p] * b;
                k.template topLeftCorner<ndu, ndu>().noalias() += b.transpose() * db;
                k.template topRightCorner<ndu, nde>().noalias() += (b.transpose() * due_[p]) * ne.transpose();
                k.template bottomLeftCorner<nde, ndu>().noalias() += ne * (deu_[p].transpose() * b);
                const Eigen::Map<const DVec> grad(s.grad_ebar.data() + p * Dim);
                const NVec bg = be * grad;
                k.template bottomRightCorner<nde, nde>().noalias() +=
                    snn_[p] * ne * ne.transpose() + sgn_[p] * bg * ne.transpose() + sbb_[p] * be * be.transpose();
                f.template head<ndu>().noalias() += b.transpose() * fu_[p];
                f.template tail<nde>().noalias() += fen_[p] * ne + be * feb_[p];
            }
            const int* dofs = local_dofs_.data() + std::size_t(e) * nt;
            for (int r = 0; r < nt; ++r) sys.F(dofs[r]) += f(r);
        }

        sys.K = pattern_;
        double* kv = sys.K.valuePtr();
        std::fill(kv, kv + sys.K.nonZeros(), 0.0);
        for (std::size_t t = 0; t < vals_.size(); ++t) kv[slot_[t]] += vals_[t];
        return sys;
    }

    GpState update_state(const Eigen::VectorXd& x, const std::vector<double>& committed) override {
        if (x.size() != model_.dofs.size() || committed.size() != static_cast<std::size_t>(npt_))
            throw InvalidState("update_state: solution or history size does not match the model");
        const MaterialParams& mp = model_.params;
        GpState s = GpState::sized(Dim, npt_);
        const auto n = static_cast<std::size_t>(npt_);
        const int ndof_u = model_.dofs.ndof_u;
        const auto udof = x.head(ndof_u);
        const auto edof = x.tail(model_.dofs.ndof_e);

        Eigen::Map<Eigen::VectorXd>(s.strain.data(), Eigen::Index(n * nv)).noalias() = b_glob_ * udof;
        Eigen::Map<Eigen::VectorXd>(s.ebar.data(), Eigen::Index(n)).noalias() = n_glob_ * edof;
        Eigen::Map<Eigen::VectorXd>(s.grad_ebar.data(), Eigen::Index(n * Dim)).noalias() = g_glob_ * edof;

        for (std::size_t p = 0; p < n; ++p) {
            const auto eq = equivalent_strain<Dim>(Eigen::Map<const VVec>(s.strain.data() + p * nv), mp);
            s.eps_eq[p] = eq.value;
            Eigen::Map<VVec>(s.deps_eq.data() + p * nv) = eq.grad;
            Eigen::Map<VMat>(s.d2eps_eq.data() + p * nv * nv) = eq.hess;
        }
        // History: cond1 = ebar - kappa_committed > threshold.
        for (std::size_t p = 0; p < n; ++p) {
            const bool cond1 = s.ebar[p] - committed[p] > kHistoryThreshold;
            s.kappa[p] = cond1 ? s.ebar[p] : committed[p];
            s.loading[p] = cond1 ? 1.0 : 0.0;
        }
        for (std::size_t p = 0; p < n; ++p) {
            const DamageEval d = damage(s.kappa[p], model_.kappa0[p], mp.alpha, mp.beta);
            s.damage[p] = d.D;
            s.ddamage[p] = d.dD_dkappa;
        }
        for (std::size_t p = 0; p < n; ++p) {
            const InteractionEval g = interaction(s.damage[p], mp);
            s.g[p] = g.g;
            s.dg[p] = g.dg_dD;
        }
        for (std::size_t p = 0; p < n; ++p) {
            const Eigen::Map<const VVec> eps(s.strain.data() + p * nv);
            const Eigen::Map<const VVec> de(s.deps_eq.data() + p * nv);
            Eigen::Map<VVec>(s.stress.data() + p * nv) =
                stress(VVec(eps), s.damage[p], s.eps_eq[p], VVec(de), s.ebar[p], mp.h, c_);
        }
        return s;
    }

    /// Number of emitted triplets per assembly (nel * (ndu + nde)^2).
    std::size_t triplet_count() const { return vals_.size(); }

private:
    void precompute_geometry() {
        const auto n = static_cast<std::size_t>(npt_);
        bu_.resize(n);
        ne_.resize(n);
        be_.resize(n);
        w_.resize(n);
        const Mesh& m = model_.mesh;
        for (int e = 0; e < m.element_count; ++e) {
            const auto xu = element_coords<Dim, nen_u>(m.nodes_u, m.element_u(e));
            const auto xe = element_coords<Dim, nde>(m.nodes_e, m.element_e(e));
            for (int q = 0; q < ngp_; ++q) {
                const std::size_t p = std::size_t(e) * ngp_ + q;
                const double* xi = model_.rule.points[q].xi.data();
                typename TU::Values nu_vals;
                typename TU::Grads dnu, dnu_dx;
                TU::eval(xi, nu_vals, dnu);
                const double det = map_gradients<Dim, nen_u>(xu, dnu, dnu_dx, e);
                fill_b_matrix<Dim, nen_u>(dnu_dx, bu_[p]);
                typename TE::Grads dne;
                TE::eval(xi, ne_[p], dne);
                map_gradients<Dim, nde>(xe, dne, be_[p], e);
                w_[p] = model_.rule.points[q].weight * det;
            }
        }
    }

    void build_operators() {
        const DofMap& dofs = model_.dofs;
        std::vector<Eigen::Triplet<double, int>> tb, tn, tg;
        tb.reserve(std::size_t(npt_) * nv * ndu);
        tn.reserve(std::size_t(npt_) * nde);
        tg.reserve(std::size_t(npt_) * Dim * nde);
        for (int e = 0; e < model_.mesh.element_count; ++e) {
            const auto gu = dofs.element_u(e);
            const auto ge = dofs.element_e(e);
            for (int q = 0; q < ngp_; ++q) {
                const int p = e * ngp_ + q;
                for (int i = 0; i < nv; ++i)
                    for (int a = 0; a < ndu; ++a)
                        if (bu_[p](i, a) != 0.0) tb.emplace_back(p * nv + i, gu[a], bu_[p](i, a));
                for (int a = 0; a < nde; ++a) {
                    tn.emplace_back(p, ge[a] - dofs.ndof_u, ne_[p](a));
                    for (int d = 0; d < Dim; ++d) tg.emplace_back(p * Dim + d, ge[a] - dofs.ndof_u, be_[p](a, d));
                }
            }
        }
        b_glob_.resize(npt_ * nv, dofs.ndof_u);
        b_glob_.setFromTriplets(tb.begin(), tb.end());
        n_glob_.resize(npt_, dofs.ndof_e);
        n_glob_.setFromTriplets(tn.begin(), tn.end());
        g_glob_.resize(npt_ * Dim, dofs.ndof_e);
        g_glob_.setFromTriplets(tg.begin(), tg.end());
    }

    void build_pattern() {
        const DofMap& dofs = model_.dofs;
        const int nel = model_.mesh.element_count;
        local_dofs_.resize(std::size_t(nel) * nt);
        for (int e = 0; e < nel; ++e) {
            const auto gu = dofs.element_u(e);
            const auto ge = dofs.element_e(e);
            std::copy(gu.begin(), gu.end(), local_dofs_.begin() + std::size_t(e) * nt);
            std::copy(ge.begin(), ge.end(), local_dofs_.begin() + std::size_t(e) * nt + ndu);
        }
        std::vector<Eigen::Triplet<double, int>> trip;
        trip.reserve(std::size_t(nel) * nt * nt);
        for (int e = 0; e < nel; ++e) {
            const int* l = local_dofs_.data() + std::size_t(e) * nt;
            for (int r = 0; r < nt; ++r)
                for (int c = 0; c < nt; ++c) trip.emplace_back(l[r], l[c], 0.0);
        }
        pattern_.resize(dofs.size(), dofs.size());
        pattern_.setFromTriplets(trip.begin(), trip.end());
        pattern_.makeCompressed();
        slot_.resize(trip.size());
        const int* outer = pattern_.outerIndexPtr();
        const int* inner = pattern_.innerIndexPtr();
        for (std::size_t t = 0; t < trip.size(); ++t) {
            const int col = trip[t].col();
            const int* first = inner + outer[col];
            const int* last = inner + outer[col + 1];
            slot_[t] = static_cast<int>(std::lower_bound(first, last, trip[t].row()) - inner);
        }
        vals_.assign(trip.size(), 0.0);
    }

    const Model& model_;
    int ngp_ = 0;
    int npt_ = 0;
    VMat c_;

    std::vector<BMat> bu_;
    std::vector<NVec> ne_;
    std::vector<GMat> be_;
    std::vector<double> w_;

    RowSparse b_glob_, n_glob_, g_glob_;

    SparseSystem::Matrix pattern_;
    std::vector<int> local_dofs_;
    std::vector<int> slot_;
    std::vector<double> vals_;

    std::vector<VMat> duu_;
    std::vector<VVec> due_, deu_, fu_;
    std::vector<DVec> feb_;
    std::vector<double> snn_, sgn_, sbb_, fen_;
};

} // namespace lgdm
