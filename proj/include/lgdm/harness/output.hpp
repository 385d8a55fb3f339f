/**
 * @file output.hpp
 * @brief Result files: load-displacement CSV, legacy ASCII VTK field files
 *        and the per-iteration convergence log.
 *
 * Numbers are written with 17 significant digits so that they round-trip
 * exactly and identical results give identical bytes.
 */
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lgdm/solver/newton.hpp"

namespace lgdm {

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v); // no "-0"
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

inline int vtk_cell_type(ElementFamily f) {
    switch (f) {
    case ElementFamily::line2: return 3;
    case ElementFamily::quad4: return 9;
    case ElementFamily::hex8: return 12;
    default: throw InvalidArgument("no corner-node cell type for this element family");
    }
}

/// Local u-node index of each micro-strain element node (the shared corners).
inline std::vector<int> corner_map(const Mesh& mesh) {
    if (mesh.family_u == ElementFamily::line3) return {0, 2};
    std::vector<int> m(static_cast<std::size_t>(mesh.nen_e()));
    for (int i = 0; i < mesh.nen_e(); ++i) m[i] = i;
    return m;
}

} // namespace detail

/// Header `step,displacement,reaction,iterations`, then one row per step.
inline std::string load_displacement_csv(const SimulationResult& result) {
    std::string s = "step,displacement,reaction,iterations\n";
    for (const StepRecord& r : result.steps)
        s += std::to_string(r.step) + "," + detail::fmt(r.displacement) + "," + detail::fmt(r.reaction) + "," +
             std::to_string(r.iterations) + "\n";
    return s;
}

inline void write_load_displacement_csv(const SimulationResult& result, const std::filesystem::path& path) {
    detail::write_text(path, load_displacement_csv(result));
}

/**
 * Legacy ASCII unstructured grid on the micro-strain mesh. Point data: u
 * (taken from the coinciding corner nodes of the displacement mesh) and ebar.
 * Cell data: D and kappa averaged over each element's Gauss points.
 */
inline std::string vtk_fields(const Mesh& mesh, const Snapshot& snap) {
    const int dim = mesh.dim;
    const int npts = static_cast<int>(mesh.nodes_e.size());
    const int nel = mesh.element_count;
    const int nen = mesh.nen_e();
    if (snap.u.size() != static_cast<Eigen::Index>(dim * mesh.nodes_u.size()) || snap.ebar.size() != npts ||
        snap.damage.size() != snap.kappa.size() || nel == 0 || snap.damage.size() % static_cast<std::size_t>(nel) != 0)
        throw InvalidArgument("snapshot does not match the mesh");
    const int ngp = static_cast<int>(snap.damage.size() / static_cast<std::size_t>(nel));

    std::vector<int> u_node(static_cast<std::size_t>(npts), -1);
    const auto corners = detail::corner_map(mesh);
    for (int e = 0; e < nel; ++e) {
        const auto ce = mesh.element_e(e);
        const auto cu = mesh.element_u(e);
        for (int i = 0; i < nen; ++i) u_node[ce[i]] = cu[corners[i]];
    }

    std::ostringstream o;
    o << "# vtk DataFile Version 3.0\n";
    o << "lgdm step " << snap.step << "\n";
    o << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    o << "POINTS " << npts << " double\n";
    for (const Point& p : mesh.nodes_e) o << detail::fmt(p[0]) << " " << detail::fmt(p[1]) << " " << detail::fmt(p[2]) << "\n";
    o << "CELLS " << nel << " " << nel * (nen + 1) << "\n";
    for (int e = 0; e < nel; ++e) {
        o << nen;
        for (int n : mesh.element_e(e)) o << " " << n;
        o << "\n";
    }
    const int type = detail::vtk_cell_type(mesh.family_e);
    o << "CELL_TYPES " << nel << "\n";
    for (int e = 0; e < nel; ++e) o << type << "\n";

    o << "POINT_DATA " << npts << "\n";
    o << "VECTORS u double\n";
    for (int n = 0; n < npts; ++n) {
        const int m = u_node[n];
        for (int d = 0; d < 3; ++d) {
            const double v = (m >= 0 && d < dim) ? snap.u(dim * m + d) : 0.0;
            o << (d ? " " : "") << detail::fmt(v);
        }
        o << "\n";
    }
    o << "SCALARS ebar double 1\nLOOKUP_TABLE default\n";
    for (int n = 0; n < npts; ++n) o << detail::fmt(snap.ebar(n)) << "\n";

    o << "CELL_DATA " << nel << "\n";
    const auto cell_average = [&](const char* name, const std::vector<double>& v) {
        o << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (int e = 0; e < nel; ++e) {
            double s = 0.0;
            for (int q = 0; q < ngp; ++q) s += v[static_cast<std::size_t>(e) * ngp + q];
            o << detail::fmt(s / ngp) << "\n";
        }
    };
    cell_average("D", snap.damage);
    cell_average("kappa", snap.kappa);
    return o.str();
}

inline void write_vtk_fields(const Mesh& mesh, const Snapshot& snap, const std::filesystem::path& path) {
    detail::write_text(path, vtk_fields(mesh, snap));
}

/// One row per Newton iteration. Wall times are left out so the file is reproducible.
inline std::string convergence_log_csv(const SimulationResult& result) {
    std::string s = "step,iteration,du_rel,de_rel,residual\n";
    for (const IterationRecord& r : result.log)
        s += std::to_string(r.step) + "," + std::to_string(r.iteration) + "," + detail::fmt(r.du_rel) + "," +
             detail::fmt(r.de_rel) + "," + detail::fmt(r.residual) + "\n";
    return s;
}

/// File name of a snapshot, e.g. `fields_0080.vtk`.
inline std::string snapshot_file_name(int step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "fields_%04d.vtk", step);
    return buf;
}

/// CSV, convergence log and one VTK file per snapshot into `dir`.
inline void write_results(const Mesh& mesh, const SimulationResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
    write_load_displacement_csv(result, dir / "load_displacement.csv");
    detail::write_text(dir / "convergence.csv", convergence_log_csv(result));
    for (const Snapshot& s : result.snapshots) write_vtk_fields(mesh, s, dir / snapshot_file_name(s.step));
}

} // namespace lgdm
