#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "lgdm/harness/cli.hpp"

using namespace lgdm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lgdm_test_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
    args.insert(args.begin(), "lgdm");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return code;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

} // namespace

TEST(Problems, Defaults) {
    const ProblemSpec bar = default_problem(ProblemId::bar1d);
    EXPECT_EQ(bar.load.steps, 1000);
    EXPECT_NEAR(bar.load.increment(), 2e-5, 1e-20);
    const ProblemSpec sen = default_problem(ProblemId::sen2d);
    EXPECT_EQ(sen.load.steps, 80);
    EXPECT_NEAR(sen.load.increment(), 0.01, 1e-17);
    EXPECT_EQ(default_problem(ProblemId::sen3d).divisions[2], 5);
    EXPECT_EQ(default_problem(ProblemId::sen3d).extents[2], 10.0);
}

TEST(Problems, Sen3dFullSizeMeshHas50000Elements) {
    ProblemSpec p = default_problem(ProblemId::sen3d);
    p.divisions = {100, 100, 5};
    EXPECT_EQ(build_model(p).mesh.element_count, 50000);
}

TEST(Problems, UnknownIdListsValidIds) {
    try {
        parse_problem_id("sen4d");
        FAIL();
    } catch (const InvalidArgument& e) {
        const std::string w = e.what();
        for (const char* id : {"bar1d", "sen2d", "sen3d"}) EXPECT_NE(w.find(id), std::string::npos);
    }
}

TEST(Problems, BoundaryConditionsAndDefect) {
    for (ProblemId id : {ProblemId::bar1d, ProblemId::sen2d, ProblemId::sen3d}) {
        ProblemSpec p = default_problem(id);
        if (id != ProblemId::bar1d) p.divisions = {10, 10, 2};
        const Model m = build_model(p);
        std::set<int> fixed, driven;
        for (const Constraint& c : m.constraints) (c.kind == ConstraintKind::fixed ? fixed : driven).insert(c.dof);
        EXPECT_FALSE(fixed.empty());
        EXPECT_FALSE(driven.empty());
        for (int d : driven) EXPECT_EQ(fixed.count(d), 0u);
    }
    const ProblemSpec bar = default_problem(ProblemId::bar1d);
    const Model m = build_model(bar);
    const auto xs = gauss_point_coordinates(m.mesh, m.rule);
    for (std::size_t q = 0; q < xs.size(); ++q) {
        const bool inside = xs[q][0] >= 45.0 && xs[q][0] <= 55.0;
        EXPECT_DOUBLE_EQ(m.kappa0[q], bar.material.kappa0 * (inside ? 0.9 : 1.0));
    }
}

TEST(Problems, SlitIsCarved) {
    ProblemSpec p = default_problem(ProblemId::sen2d);
    p.divisions = {4, 4, 1};
    const Model notched = build_model(p);
    p.slit.length = 0.0;
    const Model intact = build_model(p);
    EXPECT_GT(notched.mesh.nodes_u.size(), intact.mesh.nodes_u.size());
    EXPECT_EQ(notched.mesh.element_count, intact.mesh.element_count);
}

TEST(Config, MinimalConfigResolvesDefaults) {
    const RunConfig c = parse_config(R"({"problem": "bar1d"})");
    EXPECT_EQ(c, default_config(ProblemId::bar1d));
    EXPECT_EQ(c.solver.tol, 1e-4);
    EXPECT_EQ(c.solver.max_iterations, 25);
    EXPECT_EQ(c.solver.steps, 1000);
}

TEST(Config, OverridesApply) {
    const RunConfig c = parse_config(R"({
        "problem": "sen2d",
        "mesh": {"divisions": [20, 30]},
        "material": {"E": 30000, "nu": 0.25},
        "load": {"steps": 40},
        "solver": {"tol": 1e-6},
        "output": {"backend": "loop", "snapshot_interval": 5}
    })");
    EXPECT_EQ(c.problem.divisions[0], 20);
    EXPECT_EQ(c.problem.divisions[1], 30);
    EXPECT_EQ(c.problem.material.E, 30000.0);
    EXPECT_EQ(c.problem.load.steps, 40);
    EXPECT_EQ(c.solver.steps, 40);
    EXPECT_EQ(c.solver.tol, 1e-6);
    EXPECT_EQ(c.output.backend, BackendKind::loop);
    EXPECT_EQ(c.output.snapshot_interval, 5);
}

TEST(Config, InvalidPoissonRatioNamesTheKey) {
    try {
        parse_config(R"({"problem": "sen2d", "material": {"nu": 0.6}})");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.key_path(), "material.nu");
        EXPECT_NE(std::string(e.what()).find("nu < 0.5"), std::string::npos);
    }
}

TEST(Config, ErrorsCarryKeyPaths) {
    const auto path_of = [](const std::string& text) {
        try {
            parse_config(text);
        } catch (const ParseError& e) {
            return e.key_path();
        }
        return std::string("<no error>");
    };
    EXPECT_EQ(path_of(R"({})"), "problem");
    EXPECT_EQ(path_of(R"({"problem": "bar2d"})"), "problem");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "colour": 1})"), "colour");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "material": {"E": "big"}})"), "material.E");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "material": {"young": 1}})"), "material.young");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "mesh": {"divisions": [10, 10]}})"), "mesh.divisions");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "load": {"steps": 0}})"), "load.steps");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "load": {"steps": 2.5}})"), "load.steps");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "output": {"backend": "gpu"}})"), "output.backend");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "schema_version": 2})"), "schema_version");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "solver": {"tol": -1}})"), "solver.tol");
    EXPECT_EQ(path_of(R"({"problem": "bar1d", "slit": {"length": 10, "height": 1}})"), "slit.length");
    EXPECT_EQ(path_of(R"({"problem": "bar1d",)"), "");
}

TEST(Config, EchoRoundTripIsIdempotent) {
    for (ProblemId id : {ProblemId::bar1d, ProblemId::sen2d, ProblemId::sen3d}) {
        RunConfig c = default_config(id);
        c.problem.material.beta = 1.0 / 3.0;
        c.solver.tol = 1e-7;
        const std::string echoed = echo_config(c);
        const RunConfig back = parse_config(echoed);
        EXPECT_EQ(back, c);
        EXPECT_EQ(echo_config(back), echoed);
    }
}

TEST(Csv, HeaderRowsAndPrecision) {
    SimulationResult r;
    for (int s = 1; s <= 80; ++s) r.steps.push_back({s, 0.01 * s, 1.0 / 3.0 * s, 2});
    const auto lines = lines_of(load_displacement_csv(r));
    ASSERT_EQ(lines.size(), 81u);
    EXPECT_EQ(lines[0], "step,displacement,reaction,iterations");
    EXPECT_EQ(lines[1], "1,0.01,0.33333333333333331,2");
    EXPECT_EQ(std::stod(lines[3].substr(lines[3].find(',', 2) + 1)), 1.0);
}

TEST(Csv, ZeroLoadRunHasZeroReactions) {
    ProblemSpec p = default_problem(ProblemId::bar1d);
    p.divisions[0] = 10;
    p.load = {0.0, 6};
    const SimulationResult r = run_simulation(build_model(p), default_newton_config(p), BackendKind::batched);
    const auto lines = lines_of(load_displacement_csv(r));
    ASSERT_EQ(lines.size(), 7u);
    for (std::size_t i = 1; i < lines.size(); ++i) EXPECT_EQ(lines[i], std::to_string(i) + ",0,0,1");
}

TEST(Csv, UnwritablePathIsAnIoError) {
    EXPECT_THROW(write_load_displacement_csv(SimulationResult{}, "/nonexistent-dir/x.csv"), IoError);
}

TEST(Vtk, SingleHexElement) {
    const Model m = make_model(test::box(3, {1, 1, 1}), MaterialParams{});
    auto b = make_backend(BackendKind::batched, m);
    const GpState s = initial_state(m, *b);
    const Snapshot snap = take_snapshot(0, m, Eigen::VectorXd::Zero(m.dofs.size()), s);
    const std::string text = vtk_fields(m.mesh, snap);
    const auto lines = lines_of(text);
    EXPECT_EQ(lines[0], "# vtk DataFile Version 3.0");
    EXPECT_NE(text.find("POINTS 8 double"), std::string::npos);
    EXPECT_NE(text.find("CELLS 1 9"), std::string::npos);
    EXPECT_NE(text.find("CELL_TYPES 1\n12\n"), std::string::npos);
    int arrays = 0;
    for (const auto& l : lines) arrays += l.rfind("VECTORS ", 0) == 0 || l.rfind("SCALARS ", 0) == 0;
    EXPECT_EQ(arrays, 4);
    const auto d = text.find("SCALARS D double 1\nLOOKUP_TABLE default\n");
    ASSERT_NE(d, std::string::npos);
    EXPECT_EQ(lines_of(text.substr(d))[2], "0");
}

TEST(Vtk, CellTypesAndPointDataPerDimension) {
    const int types[] = {3, 9, 12};
    for (int dim = 1; dim <= 3; ++dim) {
        const Model m = make_model(test::box(dim, {3, 2, 2}), MaterialParams{});
        std::mt19937 rng(1);
        const Eigen::VectorXd x = test::random_solution(m, rng);
        auto b = make_backend(BackendKind::batched, m);
        const Snapshot snap = take_snapshot(1, m, x, b->update_state(x, m.kappa0));
        const std::string text = vtk_fields(m.mesh, snap);
        EXPECT_NE(text.find("CELL_TYPES " + std::to_string(m.mesh.element_count) + "\n" + std::to_string(types[dim - 1])),
                  std::string::npos);
        EXPECT_NE(text.find("POINT_DATA " + std::to_string(m.mesh.nodes_e.size())), std::string::npos);
        // u of the last micro-strain node comes from the coinciding u node
        const Point& last = m.mesh.nodes_e.back();
        int un = -1;
        for (std::size_t n = 0; n < m.mesh.nodes_u.size(); ++n)
            if (m.mesh.nodes_u[n] == last) un = static_cast<int>(n);
        ASSERT_GE(un, 0);
        const auto lines = lines_of(text.substr(text.find("VECTORS u double")));
        std::istringstream row(lines[m.mesh.nodes_e.size()]);
        double ux;
        row >> ux;
        EXPECT_EQ(ux, x(dim * un));
    }
}

TEST(Vtk, MismatchedSnapshotIsRejected) {
    const Model m = make_model(test::box(2, {2, 2}), MaterialParams{});
    Snapshot s;
    s.u = Eigen::VectorXd::Zero(3);
    EXPECT_THROW(vtk_fields(m.mesh, s), InvalidArgument);
}

TEST(Benchmark, SmallRunReportsConsistentPhases) {
    RunConfig c = default_config(ProblemId::sen2d);
    c.problem.divisions = {6, 6, 1};
    const TimingReport rep = run_benchmark(c, {BackendKind::loop, BackendKind::batched}, 1, 4);
    ASSERT_EQ(rep.backends.size(), 2u);
    EXPECT_EQ(rep.steps, 4);
    for (const BackendTiming& b : rep.backends) {
        EXPECT_EQ(b.repeats, 1);
        EXPECT_GT(b.iterations, 0);
        EXPECT_LE(b.sum.assembly + b.sum.solve + b.sum.update, b.sum.total);
        EXPECT_LE(b.mean.assembly + b.mean.solve + b.mean.update, b.mean.total);
        ASSERT_EQ(b.repeat_totals.size(), 1u);
        EXPECT_LE(b.sum.total, b.repeat_totals[0]);
    }
    EXPECT_DOUBLE_EQ(rep.speedup(0), 1.0);
    const auto j = nlohmann::json::parse(rep.to_json());
    EXPECT_EQ(j["backends"].size(), 2u);
    EXPECT_EQ(j["backends"][1]["backend"], "batched");
}

TEST(Benchmark, SameBackendTwiceHasUnitSpeedup) {
    RunConfig c = default_config(ProblemId::sen2d);
    c.problem.divisions = {16, 16, 1};
    const TimingReport rep = run_benchmark(c, {BackendKind::batched, BackendKind::batched}, 3, 3);
    EXPECT_GT(rep.speedup(1), 0.5);
    EXPECT_LT(rep.speedup(1), 2.0);
}

TEST(Benchmark, InvalidRepeats) {
    EXPECT_THROW(run_benchmark(default_config(ProblemId::bar1d), {BackendKind::loop}, 0), InvalidArgument);
}

TEST(Cli, NoArgumentsPrintsUsageAndFails) {
    std::string out, err;
    EXPECT_NE(cli({}, &out, &err), 0);
    EXPECT_NE(err.find("run"), std::string::npos);
    EXPECT_NE(err.find("bench"), std::string::npos);
}

TEST(Cli, UnknownFlagOrSubcommandFails) {
    std::string err;
    EXPECT_NE(cli({"run", "--problem", "bar1d", "--frobnicate"}, nullptr, &err), 0);
    EXPECT_NE(err.find("frobnicate"), std::string::npos);
    EXPECT_NE(cli({"explode"}, nullptr, &err), 0);
    EXPECT_NE(cli({"run", "--problem", "sen5d"}, nullptr, &err), 0);
    EXPECT_NE(err.find("sen2d"), std::string::npos);
    EXPECT_NE(cli({"run", "--problem", "sen2d", "--divisions", "4"}, nullptr, &err), 0);
}

TEST(Cli, HelpDocumentsEveryFlag) {
    std::string out;
    EXPECT_EQ(cli({"--help"}, &out), 0);
    for (const char* flag : {"--problem", "--divisions", "--backend", "--config", "--out", "--snapshot-interval",
                             "--max-steps", "--repeats", "--backends"})
        EXPECT_NE(out.find(flag), std::string::npos) << flag;
}

TEST(Cli, RunWritesConfigCsvAndSnapshots) {
    const fs::path d = scratch("run_bar1d");
    ASSERT_EQ(cli({"run", "--problem", "bar1d", "--backend", "batched", "--out", d.string()}), 0);
    EXPECT_TRUE(fs::exists(d / "config.json"));
    EXPECT_TRUE(fs::exists(d / "load_displacement.csv"));
    EXPECT_TRUE(fs::exists(d / "convergence.csv"));
    EXPECT_TRUE(fs::exists(d / "fields_0010.vtk"));
    EXPECT_TRUE(fs::exists(d / "fields_1000.vtk"));
    EXPECT_EQ(lines_of(slurp(d / "load_displacement.csv")).size(), 1001u);
    EXPECT_EQ(parse_config(slurp(d / "config.json")), default_config(ProblemId::bar1d));
    fs::remove_all(d);
}

TEST(Cli, RunWithConfigFileAndOverrides) {
    const fs::path d = scratch("run_cfg");
    fs::create_directories(d);
    {
        std::ofstream cfg(d / "in.json");
        cfg << R"({"problem": "sen2d", "load": {"steps": 4}, "output": {"snapshot_interval": 2}})";
    }
    ASSERT_EQ(cli({"run", "--config", (d / "in.json").string(), "--divisions", "4,4", "--backend", "loop",
                   "--snapshot-interval", "0", "--out", (d / "o").string()}),
              0);
    const RunConfig echoed = parse_config(slurp(d / "o" / "config.json"));
    EXPECT_EQ(echoed.problem.divisions[0], 4);
    EXPECT_EQ(echoed.output.backend, BackendKind::loop);
    EXPECT_EQ(echoed.output.snapshot_interval, 0);
    EXPECT_TRUE(fs::exists(d / "o" / "fields_0004.vtk"));
    EXPECT_FALSE(fs::exists(d / "o" / "fields_0002.vtk"));
    std::string err;
    EXPECT_NE(cli({"run", "--config", (d / "in.json").string(), "--problem", "bar1d"}, nullptr, &err), 0);
    fs::remove_all(d);
}

TEST(Cli, BenchWritesOneTimingReport) {
    const fs::path d = scratch("bench");
    ASSERT_EQ(cli({"bench", "--problem", "sen2d", "--repeats", "3", "--backends", "loop,batched", "--divisions",
                   "6,6", "--max-steps", "3", "--out", d.string()}),
              0);
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d)) files.push_back(e.path());
    ASSERT_EQ(files.size(), 1u);
    const auto j = nlohmann::json::parse(slurp(files[0]));
    EXPECT_EQ(j["backends"][0]["repeats"], 3);
    EXPECT_EQ(j["backends"][0]["repeat_totals_s"].size(), 3u);
    fs::remove_all(d);
}

TEST(Output, IdenticalRunsGiveIdenticalFiles) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    for (const fs::path& d : {a, b})
        ASSERT_EQ(cli({"run", "--problem", "sen2d", "--divisions", "6,6", "--max-steps", "12", "--out", d.string()}), 0);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
        ++n;
    }
    EXPECT_EQ(n, 5u); // config, csv, convergence log, steps 10 and 12
    fs::remove_all(a);
    fs::remove_all(b);
}
