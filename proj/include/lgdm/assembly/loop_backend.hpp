/**
 * @file loop_backend.hpp
 * @brief Reference element-by-element assembly and Gauss-point update.
 *
 * Every element recomputes its shape-function derivatives and Jacobians,
 * evaluates each block of the coupled tangent with its own Gauss loop, and
 * unrolls the local matrix into triplets that are compressed at the end. This
 * is the straightforward formulation the batched backend is checked against.
 *
 * Blocks (w = Gauss weight x det J, L = loading flag):
 *   k_uu = sum w Bu^T [(1-D) C + h (deeq deeq^T + (eeq - ebar) d2eeq)] Bu
 *   k_ue = -sum w Bu^T [C eps dD/dkappa L + h deeq] Ne^T
 *   k_eu = -sum w Ne h deeq^T Bu
 *   k_ee = sum w [h Ne Ne^T + h c dg/dD dD/dkappa L (Be grad ebar) Ne^T + g h c Be Be^T]
 *   f_u  = -sum w Bu^T sigma
 *   f_e  = sum w [Ne h (eeq - ebar) - Be g h c grad ebar]
 */
#pragma once

#include <vector>

#include "lgdm/assembly/sparse_system.hpp"

namespace lgdm {

/// Geometric data of one Gauss point of one element.
struct GpGeometry {
    Eigen::MatrixXd Bu; ///< nv x (dim * nen_u)
    Eigen::VectorXd Ne; ///< nen_e
    Eigen::MatrixXd Be; ///< nen_e x dim, micro-strain gradients
    double w = 0.0;     ///< weight x det J
};

inline std::vector<GpGeometry> gp_data(const Mesh& mesh, int e, const QuadratureRule& rule) {
    const auto cu = mesh.element_u(e);
    const auto ce = mesh.element_e(e);
    Eigen::MatrixXd xu(cu.size(), mesh.dim), xe(ce.size(), mesh.dim);
    for (std::size_t a = 0; a < cu.size(); ++a)
        for (int d = 0; d < mesh.dim; ++d) xu(a, d) = mesh.nodes_u[cu[a]][d];
    for (std::size_t a = 0; a < ce.size(); ++a)
        for (int d = 0; d < mesh.dim; ++d) xe(a, d) = mesh.nodes_e[ce[a]][d];
    std::vector<GpGeometry> out(rule.points.size());
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const auto& pt = rule.points[q];
        const ShapeEval su = shape_functions(mesh.family_u, pt.xi);
        const auto [dnu, det_u] = geometry_map(xu, su.dN_dxi, e);
        const ShapeEval se = shape_functions(mesh.family_e, pt.xi);
        const auto [dne, det_e] = geometry_map(xe, se.dN_dxi, e);
        (void)det_e;
        out[q].Bu = b_matrix(dnu, mesh.dim);
        out[q].Ne = se.N;
        out[q].Be = dne;
        out[q].w = pt.weight * det_u;
    }
    return out;
}

struct ElementBlocks {
    Eigen::MatrixXd k_uu, k_ue, k_eu, k_ee;
    Eigen::VectorXd f_u, f_e;
};

namespace detail {

/// Read-only view of one Gauss point of a GpState.
struct PointView {
    const GpState& s;
    int p;

    Eigen::Map<const Eigen::VectorXd> strain() const { return {s.strain.data() + std::size_t(p) * s.nv, s.nv}; }
    Eigen::Map<const Eigen::VectorXd> deps() const { return {s.deps_eq.data() + std::size_t(p) * s.nv, s.nv}; }
    Eigen::Map<const Eigen::MatrixXd> d2eps() const {
        return {s.d2eps_eq.data() + std::size_t(p) * s.nv * s.nv, s.nv, s.nv};
    }
    Eigen::Map<const Eigen::VectorXd> stress() const { return {s.stress.data() + std::size_t(p) * s.nv, s.nv}; }
    Eigen::Map<const Eigen::VectorXd> grad() const { return {s.grad_ebar.data() + std::size_t(p) * s.dim, s.dim}; }
    double D() const { return s.damage[p]; }
    double dD() const { return s.ddamage[p] * s.loading[p]; } ///< dD/debar
    double eeq() const { return s.eps_eq[p]; }
    double ebar() const { return s.ebar[p]; }
    double g() const { return s.g[p]; }
    double dg() const { return s.dg[p]; }
};

inline Eigen::MatrixXd build_kuu(const std::vector<GpGeometry>& gp, const GpState& s, int base,
                                 const MaterialParams& mp, const Eigen::MatrixXd& c) {
    const Eigen::Index n = gp[0].Bu.cols();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < gp.size(); ++q) {
        const PointView pt{s, base + int(q)};
        const Eigen::MatrixXd tangent = (1 - pt.D()) * c +
                                        mp.h * (pt.deps() * pt.deps().transpose() +
                                                (pt.eeq() - pt.ebar()) * pt.d2eps());
        k += gp[q].w * gp[q].Bu.transpose() * tangent * gp[q].Bu;
    }
    return k;
}

inline Eigen::MatrixXd build_kue(const std::vector<GpGeometry>& gp, const GpState& s, int base,
                                 const MaterialParams& mp, const Eigen::MatrixXd& c) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(gp[0].Bu.cols(), gp[0].Ne.size());
    for (std::size_t q = 0; q < gp.size(); ++q) {
        const PointView pt{s, base + int(q)};
        const Eigen::VectorXd v = c * pt.strain() * pt.dD() + mp.h * pt.deps();
        k -= gp[q].w * (gp[q].Bu.transpose() * v) * gp[q].Ne.transpose();
    }
    return k;
}

inline Eigen::MatrixXd build_keu(const std::vector<GpGeometry>& gp, const GpState& s, int base,
                                 const MaterialParams& mp) {
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(gp[0].Ne.size(), gp[0].Bu.cols());
    for (std::size_t q = 0; q < gp.size(); ++q) {
        const PointView pt{s, base + int(q)};
        k -= gp[q].w * mp.h * gp[q].Ne * (pt.deps().transpose() * gp[q].Bu);
    }
    return k;
}

inline Eigen::MatrixXd build_kee(const std::vector<GpGeometry>& gp, const GpState& s, int base,
                                 const MaterialParams& mp) {
    const Eigen::Index n = gp[0].Ne.size();
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t q = 0; q < gp.size(); ++q) {
        const PointView pt{s, base + int(q)};
        const auto& ne = gp[q].Ne;
        const auto& be = gp[q].Be;
        k += gp[q].w * (mp.h * ne * ne.transpose() +
                        mp.h * mp.c * pt.dg() * pt.dD() * (be * pt.grad()) * ne.transpose() +
                        pt.g() * mp.h * mp.c * be * be.transpose());
    }
    return k;
}

inline Eigen::VectorXd build_fu(const std::vector<GpGeometry>& gp, const GpState& s, int base) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(gp[0].Bu.cols());
    for (std::size_t q = 0; q < gp.size(); ++q) {
        const PointView pt{s, base + int(q)};
        f -= gp[q].w * gp[q].Bu.transpose() * pt.stress();
    }
    return f;
}

inline Eigen::VectorXd build_fe(const std::vector<GpGeometry>& gp, const GpState& s, int base,
                                const MaterialParams& mp) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(gp[0].Ne.size());
    for (std::size_t q = 0; q < gp.size(); ++q) {
        const PointView pt{s, base + int(q)};
        f += gp[q].w * (gp[q].Ne * (mp.h * (pt.eeq() - pt.ebar())) -
                        gp[q].Be * (pt.g() * mp.h * mp.c * pt.grad()));
    }
    return f;
}

} // namespace detail

/// All blocks of one element at the given (previous-iteration) state. The
/// boundary traction term is identically zero for displacement-controlled problems.
inline ElementBlocks element_blocks(const Model& model, int e, const GpState& state) {
    const auto gp = gp_data(model.mesh, e, model.rule);
    const Eigen::MatrixXd c = elasticity_matrix(model.params.E, model.params.nu, model.dim());
    const int base = e * model.ngp();
    ElementBlocks b;
    b.k_uu = detail::build_kuu(gp, state, base, model.params, c);
    b.k_ue = detail::build_kue(gp, state, base, model.params, c);
    b.k_eu = detail::build_keu(gp, state, base, model.params);
    b.k_ee = detail::build_kee(gp, state, base, model.params);
    b.f_u = detail::build_fu(gp, state, base);
    b.f_e = detail::build_fe(gp, state, base, model.params);
    return b;
}

namespace detail {

/// Pointwise constitutive update of one Gauss point.
template <int Dim>
void update_point(GpState& s, int p, const Eigen::VectorXd& strain, double ebar, const Eigen::VectorXd& grad,
                  double kappa_committed, double kappa0, const MaterialParams& mp,
                  const typename Voigt<Dim>::Mat& c) {
    constexpr int nv = Voigt<Dim>::size;
    const typename Voigt<Dim>::Vec eps = strain;
    const auto eq = equivalent_strain<Dim>(eps, mp);
    const HistoryUpdate hist = update_history(ebar, kappa_committed);
    const DamageEval dam = damage(hist.kappa, kappa0, mp.alpha, mp.beta);
    const InteractionEval inter = interaction(dam.D, mp);
    const typename Voigt<Dim>::Vec sig = stress(eps, dam.D, eq.value, eq.grad, ebar, mp.h, c);
    for (int i = 0; i < nv; ++i) {
        s.strain[std::size_t(p) * nv + i] = eps(i);
        s.deps_eq[std::size_t(p) * nv + i] = eq.grad(i);
        s.stress[std::size_t(p) * nv + i] = sig(i);
        for (int j = 0; j < nv; ++j) s.d2eps_eq[(std::size_t(p) * nv + i) * nv + j] = eq.hess(i, j);
    }
    for (int d = 0; d < Dim; ++d) s.grad_ebar[std::size_t(p) * Dim + d] = grad(d);
    s.eps_eq[p] = eq.value;
    s.ebar[p] = ebar;
    s.kappa[p] = hist.kappa;
    s.loading[p] = hist.loading ? 1.0 : 0.0;
    s.damage[p] = dam.D;
    s.ddamage[p] = dam.dD_dkappa;
    s.g[p] = inter.g;
    s.dg[p] = inter.dg_dD;
}

template <int Dim>
GpState loop_update(const Model& model, const Eigen::VectorXd& x, const std::vector<double>& committed) {
    GpState s = GpState::sized(Dim, model.gp_count());
    const auto c = elasticity_matrix<Dim>(model.params.E, model.params.nu);
    const int ngp = model.ngp();
    for (int e = 0; e < model.mesh.element_count; ++e) {
        const auto gp = gp_data(model.mesh, e, model.rule);
        const auto gu = model.dofs.element_u(e);
        const auto ge = model.dofs.element_e(e);
        Eigen::VectorXd ue(gu.size()), ee(ge.size());
        for (std::size_t i = 0; i < gu.size(); ++i) ue(i) = x(gu[i]);
        for (std::size_t i = 0; i < ge.size(); ++i) ee(i) = x(ge[i]);
        for (int q = 0; q < ngp; ++q) {
            const int p = e * ngp + q;
            const Eigen::VectorXd strain = gp[q].Bu * ue;
            const double ebar = gp[q].Ne.dot(ee);
            const Eigen::VectorXd grad = gp[q].Be.transpose() * ee;
            update_point<Dim>(s, p, strain, ebar, grad, committed[p], model.kappa0[p], model.params, c);
        }
    }
    return s;
}

} // namespace detail

class LoopBackend final : public AssemblyBackend {
public:
    explicit LoopBackend(const Model& model) : model_(model) {}

    BackendKind kind() const override { return BackendKind::loop; }

    SparseSystem assemble(const GpState& state) override {
        state.check(model_.dim(), model_.gp_count());
        const DofMap& dofs = model_.dofs;
        const int nu = dofs.element_dofs_u, ne = dofs.element_dofs_e, nt = nu + ne;
        std::vector<Eigen::Triplet<double, int>> trip;
        trip.reserve(static_cast<std::size_t>(model_.mesh.element_count) * nt * nt);
        SparseSystem sys;
        sys.ndof_u = dofs.ndof_u;
        sys.F = Eigen::VectorXd::Zero(dofs.size());
        std::vector<int> local(nt);
        for (int e = 0; e < model_.mesh.element_count; ++e) {
            const ElementBlocks b = element_blocks(model_, e, state);
            Eigen::MatrixXd k_local(nt, nt);
            k_local << b.k_uu, b.k_ue, b.k_eu, b.k_ee;
            Eigen::VectorXd f_local(nt);
            f_local << b.f_u, b.f_e;
            const auto gu = dofs.element_u(e);
            const auto ge = dofs.element_e(e);
            std::copy(gu.begin(), gu.end(), local.begin());
            std::copy(ge.begin(), ge.end(), local.begin() + nu);
            for (int r = 0; r < nt; ++r) {
                for (int cc = 0; cc < nt; ++cc) trip.emplace_back(local[r], local[cc], k_local(r, cc));
                sys.F(local[r]) += f_local(r);
            }
        }
        sys.K.resize(dofs.size(), dofs.size());
        sys.K.setFromTriplets(trip.begin(), trip.end());
        return sys;
    }

    GpState update_state(const Eigen::VectorXd& x, const std::vector<double>& committed) override {
        if (x.size() != model_.dofs.size() || committed.size() != static_cast<std::size_t>(model_.gp_count()))
            throw InvalidState("update_state: solution or history size does not match the model");
        switch (model_.dim()) {
        case 1: return detail::loop_update<1>(model_, x, committed);
        case 2: return detail::loop_update<2>(model_, x, committed);
        default: return detail::loop_update<3>(model_, x, committed);
        }
    }

private:
    const Model& model_;
};

} // namespace lgdm
