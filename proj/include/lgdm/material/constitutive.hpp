/**
 * @file constitutive.hpp
 * @brief Pointwise laws of the localizing gradient damage model.
 *
 * Free energy
 *   Psi = 1/2 (1-D) eps:C:eps + 1/2 h (eeq - ebar)^2 + 1/2 g h c |grad ebar|^2
 * with the modified von Mises equivalent strain eeq(eps), the exponential
 * damage law D(kappa), the history kappa = max over time of ebar and the
 * decaying interaction g(D).
 *
 * Strains are Voigt vectors with engineering shear. The equivalent strain is
 * always evaluated on the full 3x3 tensor: plane strain (2D) has eps33 = 0,
 * and the 1D bar is a uniaxial strain state diag(eps11, 0, 0).
 */
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "lgdm/core/error.hpp"
#include "lgdm/fem/geometry.hpp"

namespace lgdm {

/// Material constants. Units: E and h in MPa, c in mm^2, the rest dimensionless.
struct MaterialParams {
    double E = 20000.0;   ///< Young's modulus
    double nu = 0.2;      ///< Poisson's ratio
    double k = 10.0;      ///< compressive / tensile strength ratio
    double kappa0 = 1e-4; ///< damage threshold strain
    double alpha = 0.99;  ///< residual damage parameter
    double beta = 500.0;  ///< softening rate
    double h = 20000.0;   ///< coupling modulus
    double c = 4.0;       ///< gradient parameter
    double R = 0.05;      ///< residual interaction
    double n = 5.0;       ///< interaction decay exponent

    /// Name and bound of the first violated constraint, if any.
    std::optional<std::pair<std::string, std::string>> first_violation() const {
        const std::pair<bool, std::pair<const char*, const char*>> checks[] = {
            {E > 0.0, {"E", "E > 0"}},
            {nu >= 0.0 && nu < 0.5, {"nu", "0 <= nu < 0.5"}},
            {k >= 1.0, {"k", "k >= 1"}},
            {kappa0 > 0.0, {"kappa0", "kappa0 > 0"}},
            {alpha > 0.0 && alpha <= 1.0, {"alpha", "0 < alpha <= 1"}},
            {beta > 0.0, {"beta", "beta > 0"}},
            {h > 0.0, {"h", "h > 0"}},
            {c > 0.0, {"c", "c > 0"}},
            {R > 0.0 && R < 1.0, {"R", "0 < R < 1"}},
            {n > 0.0, {"n", "n > 0"}},
        };
        for (const auto& [ok, what] : checks)
            if (!ok) return std::make_pair(std::string(what.first), std::string(what.second));
        return std::nullopt;
    }

    /// Throws InvalidArgument naming the first violated bound.
    void validate() const {
        if (auto v = first_violation())
            throw InvalidArgument("material parameter out of range: " + v->second);
    }

    bool operator==(const MaterialParams&) const = default;
};

/// Strict-increase threshold of the history update and damage onset.
inline constexpr double kHistoryThreshold = 1e-10;

/// Radicand below which the square-root term of eeq is treated as zero.
inline constexpr double kRadicandFloor = 1e-30;

template <int Dim>
struct Voigt {
    static constexpr int size = voigt_size(Dim);
    using Vec = Eigen::Matrix<double, size, 1>;
    using Mat = Eigen::Matrix<double, size, size>;
    /// Position of each component in the 6-component 3D Voigt vector.
    static constexpr std::array<int, size> to3d = [] {
        std::array<int, size> m{};
        if constexpr (Dim == 1) {
            m = {0};
        } else if constexpr (Dim == 2) {
            m = {0, 1, 3};
        } else {
            m = {0, 1, 2, 3, 4, 5};
        }
        return m;
    }();
};

template <int Dim>
typename Voigt<Dim>::Mat elasticity_matrix(double E, double nu) {
    typename Voigt<Dim>::Mat c;
    if constexpr (Dim == 1) {
        c << E;
    } else {
        const double lam = E * nu / ((1 + nu) * (1 - 2 * nu));
        const double mu = E / (2 * (1 + nu));
        c.setZero();
        constexpr int normal = Dim == 2 ? 2 : 3;
        for (int i = 0; i < normal; ++i) {
            for (int j = 0; j < normal; ++j) c(i, j) = lam;
            c(i, i) = lam + 2 * mu;
        }
        for (int i = normal; i < Voigt<Dim>::size; ++i) c(i, i) = mu;
    }
    return c;
}

/// Isotropic elasticity in Voigt form; 2D is plane strain.
inline Eigen::MatrixXd elasticity_matrix(double E, double nu, int dim) {
    switch (dim) {
    case 1: return elasticity_matrix<1>(E, nu);
    case 2: return elasticity_matrix<2>(E, nu);
    case 3: return elasticity_matrix<3>(E, nu);
    default: throw InvalidArgument("elasticity_matrix: dim must be 1, 2 or 3");
    }
}

template <int Dim>
struct EquivalentStrain {
    double value = 0.0;
    typename Voigt<Dim>::Vec grad = Voigt<Dim>::Vec::Zero();
    typename Voigt<Dim>::Mat hess = Voigt<Dim>::Mat::Zero();
};

/**
 * Modified von Mises equivalent strain
 *   eeq = (k-1)/(2k(1-2nu)) I1 + 1/(2k) sqrt((k-1)^2/(1-2nu)^2 I1^2 + 2k/(1-nu)^2 J2)
 * with its gradient and Hessian with respect to the Voigt strain.
 *
 * At a vanishing radicand the square-root term contributes no curvature and,
 * in 2D/3D, no gradient. In 1D the strain space is one-dimensional and the
 * gradient of the square-root term is taken as its tensile one-sided value.
 */
template <int Dim>
EquivalentStrain<Dim> equivalent_strain(const typename Voigt<Dim>::Vec& strain, const MaterialParams& p,
                                        bool with_hessian = true) {
    using V6 = Eigen::Matrix<double, 6, 1>;
    V6 e = V6::Zero();
    for (int i = 0; i < Voigt<Dim>::size; ++i) e(Voigt<Dim>::to3d[i]) = strain(i);

    const double a = (p.k - 1) / (2 * p.k * (1 - 2 * p.nu));
    const double b2 = std::pow((p.k - 1) / (1 - 2 * p.nu), 2);
    const double gam = 2 * p.k / ((1 - p.nu) * (1 - p.nu));

    const double i1 = e(0) + e(1) + e(2);
    const double mean = i1 / 3.0;
    const double d0 = e(0) - mean, d1 = e(1) - mean, d2 = e(2) - mean;
    const double j2 = 0.5 * (d0 * d0 + d1 * d1 + d2 * d2) + 0.25 * (e(3) * e(3) + e(4) * e(4) + e(5) * e(5));
    const double q = b2 * i1 * i1 + gam * j2;

    V6 di1;
    di1 << 1, 1, 1, 0, 0, 0;
    V6 dj2;
    dj2 << d0, d1, d2, 0.5 * e(3), 0.5 * e(4), 0.5 * e(5);

    EquivalentStrain<Dim> out;
    V6 g6 = a * di1;
    Eigen::Matrix<double, 6, 6> h6 = Eigen::Matrix<double, 6, 6>::Zero();
    if (q >= kRadicandFloor) {
        const double sq = std::sqrt(q);
        out.value = a * i1 + sq / (2 * p.k);
        const V6 dq = 2 * b2 * i1 * di1 + gam * dj2;
        g6 += dq / (4 * p.k * sq);
        if (with_hessian) {
            Eigen::Matrix<double, 6, 6> d2q = 2 * b2 * di1 * di1.transpose();
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) d2q(i, j) += gam * ((i == j ? 1.0 : 0.0) - 1.0 / 3.0);
                d2q(3 + i, 3 + i) += 0.5 * gam;
            }
            h6 = (d2q / sq - dq * dq.transpose() / (2 * q * sq)) / (4 * p.k);
        }
    } else {
        out.value = a * i1;
        if constexpr (Dim == 1) g6(0) += std::sqrt(b2 + gam / 3.0) / (2 * p.k);
    }
    for (int i = 0; i < Voigt<Dim>::size; ++i) {
        out.grad(i) = g6(Voigt<Dim>::to3d[i]);
        if (with_hessian)
            for (int j = 0; j < Voigt<Dim>::size; ++j)
                out.hess(i, j) = h6(Voigt<Dim>::to3d[i], Voigt<Dim>::to3d[j]);
    }
    return out;
}

/// Runtime-dim variant returning (eeq, d eeq / d strain).
inline std::pair<double, Eigen::VectorXd> equivalent_strain(const Eigen::VectorXd& strain,
                                                            const MaterialParams& p, int dim) {
    if (strain.size() != voigt_size(dim)) throw InvalidArgument("equivalent_strain: wrong Voigt size");
    switch (dim) {
    case 1: {
        auto r = equivalent_strain<1>(strain, p, false);
        return {r.value, r.grad};
    }
    case 2: {
        auto r = equivalent_strain<2>(strain, p, false);
        return {r.value, r.grad};
    }
    default: {
        auto r = equivalent_strain<3>(strain, p, false);
        return {r.value, r.grad};
    }
    }
}

struct HistoryUpdate {
    double kappa = 0.0;
    bool loading = false; ///< d kappa / d ebar is 1 when loading, else 0
};

/// kappa = max(ebar, kappa_prev), counting only increases above 1e-10.
inline HistoryUpdate update_history(double ebar, double kappa_prev) {
    if (ebar - kappa_prev > kHistoryThreshold) return {ebar, true};
    return {kappa_prev, false};
}

/// Same, with the history floored at the point's damage threshold.
inline HistoryUpdate update_history(double ebar, double kappa_prev, double kappa0) {
    return update_history(ebar, std::max(kappa_prev, kappa0));
}

struct DamageEval {
    double D = 0.0;
    double dD_dkappa = 0.0;
};

/// Exponential softening law
///   D = 1 - (kappa0/kappa) (1 - alpha + alpha exp(-beta (kappa - kappa0)))  for kappa > kappa0.
inline DamageEval damage(double kappa, double kappa0, double alpha, double beta) {
    if (kappa - kappa0 < kHistoryThreshold) return {0.0, 0.0};
    const double ex = std::exp(-beta * (kappa - kappa0));
    const double bracket = 1 - alpha + alpha * ex;
    const double r = kappa0 / kappa;
    return {1 - r * bracket, r / kappa * bracket + r * alpha * beta * ex};
}

inline DamageEval damage(double kappa, const MaterialParams& p) {
    return damage(kappa, p.kappa0, p.alpha, p.beta);
}

struct InteractionEval {
    double g = 1.0;
    double dg_dD = 0.0;
};

/// g(D) = ((1-R) exp(-nD) + R - exp(-n)) / (1 - exp(-n)); g(0) = 1, g(1) = R.
inline InteractionEval interaction(double D, double R, double n) {
    const double en = std::exp(-n);
    const double ed = std::exp(-n * D);
    const double denom = 1 - en;
    return {((1 - R) * ed + R - en) / denom, -n * (1 - R) * ed / denom};
}

inline InteractionEval interaction(double D, const MaterialParams& p) { return interaction(D, p.R, p.n); }

/// sigma = (1-D) C eps + h (eeq - ebar) d eeq / d eps
template <typename Vec, typename Mat>
Vec stress(const Vec& strain, double D, double eeq, const Vec& deeq, double ebar, double h, const Mat& c) {
    return (1 - D) * (c * strain) + h * (eeq - ebar) * deeq;
}

struct MicroStresses {
    double sigma_bar = 0.0;
    Eigen::VectorXd xi_bar;
};

/// sigma_bar = h (eeq - ebar), xi_bar = g h c grad(ebar)
inline MicroStresses micro_stresses(double eeq, double ebar, const Eigen::VectorXd& grad_ebar, double g,
                                    const MaterialParams& p) {
    return {p.h * (eeq - ebar), g * p.h * p.c * grad_ebar};
}

template <typename Vec, typename Mat, typename Grad>
double free_energy_density(const Vec& strain, double D, double eeq, double ebar, const Grad& grad_ebar,
                           double g, const MaterialParams& p, const Mat& c) {
    return 0.5 * (1 - D) * strain.dot(c * strain) + 0.5 * p.h * (eeq - ebar) * (eeq - ebar) +
           0.5 * g * p.h * p.c * grad_ebar.squaredNorm();
}

} // namespace lgdm
