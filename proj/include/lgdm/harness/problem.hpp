/**
 * @file problem.hpp
 * @brief The three displacement-controlled benchmark problems.
 *
 * Geometry defaults are illustrative and can be overridden through the
 * configuration file.
 */
#pragma once

#include <array>
#include <string>
#include <string_view>

#include "lgdm/assembly/model.hpp"
#include "lgdm/solver/newton.hpp"

namespace lgdm {

enum class ProblemId { bar1d, sen2d, sen3d };

inline constexpr std::string_view problem_name(ProblemId id) {
    switch (id) {
    case ProblemId::bar1d: return "bar1d";
    case ProblemId::sen2d: return "sen2d";
    default: return "sen3d";
    }
}

inline ProblemId parse_problem_id(std::string_view name) {
    if (name == "bar1d") return ProblemId::bar1d;
    if (name == "sen2d") return ProblemId::sen2d;
    if (name == "sen3d") return ProblemId::sen3d;
    throw InvalidArgument("unknown problem '" + std::string(name) + "' (valid: bar1d, sen2d, sen3d)");
}

inline constexpr int problem_dim(ProblemId id) {
    return id == ProblemId::bar1d ? 1 : id == ProblemId::sen2d ? 2 : 3;
}

/// Gauss points with start <= x <= end get kappa0 scaled by `kappa0_factor`.
struct DefectSpec {
    double start = 0.0;
    double end = 0.0;
    double kappa0_factor = 1.0;

    bool operator==(const DefectSpec&) const = default;
};

/// Edge slit entering from x = 0 at height y = `height`, `length` mm long.
struct SlitSpec {
    double length = 0.0;
    double height = 0.0;

    bool operator==(const SlitSpec&) const = default;
};

struct LoadProgram {
    double total_displacement = 0.0; ///< mm, on the driven boundary
    int steps = 1;

    double increment() const { return total_displacement / steps; }
    bool operator==(const LoadProgram&) const = default;
};

/**
 * bar1d: left end fixed, right end driven along x.
 * sen2d / sen3d: bottom face fully fixed, top face driven along y.
 */
struct ProblemSpec {
    ProblemId id = ProblemId::bar1d;
    std::array<double, 3> extents{0.0, 0.0, 0.0};
    std::array<int, 3> divisions{1, 1, 1};
    MaterialParams material;
    DefectSpec defect;
    SlitSpec slit;
    LoadProgram load;

    int dim() const { return problem_dim(id); }

    void validate() const {
        for (int d = 0; d < dim(); ++d) {
            if (!(extents[d] > 0.0)) throw InvalidArgument("extents must be positive");
            if (divisions[d] < 1) throw InvalidArgument("divisions must be at least 1");
        }
        material.validate();
        if (load.steps < 1) throw InvalidArgument("load steps must be at least 1");
        if (!std::isfinite(load.total_displacement)) throw InvalidArgument("total displacement must be finite");
        if (!(defect.kappa0_factor > 0.0)) throw InvalidArgument("defect kappa0_factor must be positive");
        if (defect.end < defect.start) throw InvalidArgument("defect end lies before its start");
        if (slit.length < 0.0) throw InvalidArgument("slit length must be non-negative");
        if (id == ProblemId::bar1d && slit.length > 0.0) throw UnsupportedGeometry("bar1d has no slit");
        if (slit.length > 0.0 && !(slit.height > 0.0 && slit.height < extents[1]))
            throw UnsupportedGeometry("slit height must lie strictly inside the plate");
    }

    bool operator==(const ProblemSpec&) const = default;
};

inline ProblemSpec default_problem(ProblemId id) {
    ProblemSpec p;
    p.id = id;
    switch (id) {
    case ProblemId::bar1d:
        p.extents = {100.0, 0.0, 0.0};
        p.divisions = {1000, 1, 1};
        p.defect = {45.0, 55.0, 0.9};
        p.load = {0.02, 1000};
        p.material.kappa0 = 1e-5;
        p.material.beta = 3000.0;
        p.material.h = 50.0;
        break;
    case ProblemId::sen2d:
    case ProblemId::sen3d:
        p.extents = {100.0, 100.0, id == ProblemId::sen3d ? 10.0 : 0.0};
        p.divisions = {50, 50, id == ProblemId::sen3d ? 5 : 1};
        p.slit = {50.0, 50.0};
        p.load = {0.8, 80};
        p.material.kappa0 = 1e-3;
        p.material.beta = 15.0;
        p.material.h = 400.0;
        break;
    }
    return p;
}

inline ProblemSpec default_problem(std::string_view name) { return default_problem(parse_problem_id(name)); }

inline NewtonConfig default_newton_config(const ProblemSpec& p) {
    NewtonConfig c;
    c.steps = p.load.steps;
    return c;
}

/// Builds the mesh (with slit), boundary conditions and defect field.
inline Model build_model(const ProblemSpec& p) {
    p.validate();
    const int dim = p.dim();
    Mesh mesh = build_structured_mesh(dim, std::span<const double>(p.extents.data(), dim),
                                      std::span<const int>(p.divisions.data(), dim));
    if (p.slit.length > 0.0) {
        NotchSpec s;
        s.anchor = {0.0, p.slit.height, 0.0};
        s.axis = 0;
        s.sign = 1;
        s.normal_axis = 1;
        s.length = p.slit.length;
        mesh = carve_notch(mesh, s);
    }
    const DofMap dofs = build_dof_map(mesh);
    const double inc = p.load.increment();
    std::vector<Constraint> cs;
    if (dim == 1) {
        for (int n : nodes_on_plane(mesh.nodes_u, 0, 0.0, 1e-9 * p.extents[0]))
            cs.push_back({dofs.u_dof(n, 0), ConstraintKind::fixed, 0.0});
        for (int n : nodes_on_plane(mesh.nodes_u, 0, p.extents[0], 1e-9 * p.extents[0]))
            cs.push_back({dofs.u_dof(n, 0), ConstraintKind::driven, inc});
    } else {
        const double tol = 1e-9 * p.extents[1];
        for (int n : nodes_on_plane(mesh.nodes_u, 1, 0.0, tol))
            for (int d = 0; d < dim; ++d) cs.push_back({dofs.u_dof(n, d), ConstraintKind::fixed, 0.0});
        for (int n : nodes_on_plane(mesh.nodes_u, 1, p.extents[1], tol))
            cs.push_back({dofs.u_dof(n, 1), ConstraintKind::driven, inc});
    }
    Model model = make_model(std::move(mesh), p.material, std::move(cs));
    if (p.defect.kappa0_factor != 1.0 && p.defect.end > p.defect.start) {
        const auto xs = gauss_point_coordinates(model.mesh, model.rule);
        for (std::size_t q = 0; q < xs.size(); ++q)
            if (xs[q][0] >= p.defect.start && xs[q][0] <= p.defect.end)
                model.kappa0[q] = p.material.kappa0 * p.defect.kappa0_factor;
    }
    return model;
}

} // namespace lgdm
