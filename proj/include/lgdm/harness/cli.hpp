/**
 * @file cli.hpp
 * @brief The `lgdm` command line: `run` and `bench` subcommands.
 */
#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lgdm/harness/benchmark.hpp"
#include "lgdm/harness/output.hpp"

namespace lgdm {

namespace detail {

struct CommonFlags {
    std::string problem;
    std::string config;
    std::vector<int> divisions;
    std::string out = "out";
    int max_steps = -1;
};

inline void add_common(CLI::App& cmd, CommonFlags& f) {
    cmd.add_option("--problem,-p", f.problem, "Benchmark problem: bar1d, sen2d or sen3d");
    cmd.add_option("--config,-c", f.config, "JSON configuration file; flags given here override it")
        ->check(CLI::ExistingFile);
    cmd.add_option("--divisions,-d", f.divisions, "Mesh divisions per axis, comma separated (e.g. 100,100)")
        ->delimiter(',');
    cmd.add_option("--out,-o", f.out, "Output directory")->capture_default_str();
    cmd.add_option("--max-steps", f.max_steps, "Stop after this many load steps (-1: all)")->capture_default_str();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline RunConfig resolve(const CommonFlags& f) {
    if (f.problem.empty() && f.config.empty()) throw InvalidArgument("either --problem or --config is required");
    RunConfig cfg;
    if (!f.config.empty()) {
        cfg = parse_config(read_file(f.config));
        if (!f.problem.empty() && parse_problem_id(f.problem) != cfg.problem.id)
            throw InvalidArgument("--problem " + f.problem + " contradicts the configuration file");
    } else {
        cfg = default_config(parse_problem_id(f.problem));
    }
    if (!f.divisions.empty()) {
        const int dim = cfg.problem.dim();
        if (static_cast<int>(f.divisions.size()) != dim)
            throw InvalidArgument("--divisions needs " + std::to_string(dim) + " values for " +
                                  std::string(problem_name(cfg.problem.id)));
        for (int d = 0; d < dim; ++d) cfg.problem.divisions[d] = f.divisions[d];
    }
    cfg.problem.validate();
    return cfg;
}

} // namespace detail

/// Returns the process exit code. Messages go to `out` and `err`.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Localizing gradient damage fracture simulations", "lgdm"};
    app.require_subcommand(1);

    detail::CommonFlags run_f;
    std::string backend;
    int snapshot_interval = -1;
    CLI::App* run = app.add_subcommand("run", "Run one simulation and write CSV, VTK and the resolved config");
    detail::add_common(*run, run_f);
    run->add_option("--backend,-b", backend, "Assembly backend: loop or batched (default batched)");
    run->add_option("--snapshot-interval", snapshot_interval, "Write fields every N steps; 0 keeps only the final step");

    detail::CommonFlags bench_f;
    int repeats = 10;
    std::vector<std::string> backends{"loop", "batched"};
    CLI::App* bench = app.add_subcommand("bench", "Time repeated runs per backend and write timing.json");
    detail::add_common(*bench, bench_f);
    bench->add_option("--repeats,-r", repeats, "Runs per backend")->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--backends", backends, "Backends to time, comma separated; the first is the reference")
        ->delimiter(',')
        ->capture_default_str();

    if (argc <= 1) {
        err << app.help();
        return 2;
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return e.get_exit_code() ? e.get_exit_code() : 2;
    }

    try {
        if (*run) {
            RunConfig cfg = detail::resolve(run_f);
            if (!backend.empty()) cfg.output.backend = parse_backend(backend);
            if (snapshot_interval >= 0) cfg.output.snapshot_interval = snapshot_interval;
            const std::filesystem::path dir(run_f.out);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
            detail::write_text(dir / "config.json", echo_config(cfg));
            const Model model = build_model(cfg.problem);
            RunOptions opts;
            opts.max_steps = run_f.max_steps;
            opts.snapshot_interval = cfg.output.snapshot_interval;
            const SimulationResult res = run_simulation(model, cfg.solver, cfg.output.backend, opts);
            write_results(model.mesh, res, dir);
            out << "completed " << res.steps.size() << " steps, " << res.log.size() << " iterations; results in "
                << dir.string() << "\n";
        } else {
            const RunConfig cfg = detail::resolve(bench_f);
            std::vector<BackendKind> kinds;
            for (const std::string& b : backends) kinds.push_back(parse_backend(b));
            const TimingReport rep = run_benchmark(cfg, kinds, repeats, bench_f.max_steps);
            const std::filesystem::path dir(bench_f.out);
            std::error_code ec;
            std::filesystem::create_directories(dir, ec);
            if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
            detail::write_text(dir / "timing.json", rep.to_json());
            for (std::size_t i = 0; i < rep.backends.size(); ++i) {
                const BackendTiming& b = rep.backends[i];
                out << backend_name(b.backend) << ": " << b.iterations << " iterations, mean per iteration "
                    << "assembly " << b.mean.assembly << " s, solve " << b.mean.solve << " s, update "
                    << b.mean.update << " s, speedup " << rep.speedup(i) << "\n";
            }
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace lgdm
