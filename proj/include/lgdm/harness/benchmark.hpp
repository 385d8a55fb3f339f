/**
 * @file benchmark.hpp
 * @brief Repeated runs per backend with per-phase wall times.
 */
#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lgdm/harness/config.hpp"

namespace lgdm {

struct PhaseTimes {
    double assembly = 0.0;
    double solve = 0.0;
    double update = 0.0;
    double total = 0.0; ///< includes driver overhead between phases

    /// The part the two backends differ in.
    double assembly_update() const { return assembly + update; }
};

struct BackendTiming {
    BackendKind backend = BackendKind::loop;
    int repeats = 0;
    int iterations = 0;                 ///< summed over repeats
    PhaseTimes sum;                     ///< seconds, summed over all iterations of all repeats
    PhaseTimes mean;                    ///< per iteration
    std::vector<double> repeat_totals; ///< wall time of each whole run
    std::vector<StepRecord> steps;      ///< from the first repeat
};

struct TimingReport {
    std::string problem;
    std::array<int, 3> divisions{1, 1, 1};
    int steps = 0;
    std::vector<BackendTiming> backends;

    /// mean assembly + update time of backends[0] over that of backends[i].
    double speedup(std::size_t i) const {
        return backends.at(0).mean.assembly_update() / backends.at(i).mean.assembly_update();
    }

    std::string to_json() const {
        using nlohmann::json;
        json j;
        j["problem"] = problem;
        j["divisions"] = divisions;
        j["steps"] = steps;
        j["reference_backend"] = backends.empty() ? "" : std::string(backend_name(backends[0].backend));
        json arr = json::array();
        for (std::size_t i = 0; i < backends.size(); ++i) {
            const BackendTiming& b = backends[i];
            const auto phases = [](const PhaseTimes& t) {
                return json{{"assembly", t.assembly}, {"solve", t.solve}, {"update", t.update}, {"total", t.total}};
            };
            arr.push_back({{"backend", std::string(backend_name(b.backend))},
                           {"repeats", b.repeats},
                           {"iterations", b.iterations},
                           {"mean_per_iteration_s", phases(b.mean)},
                           {"sum_s", phases(b.sum)},
                           {"repeat_totals_s", b.repeat_totals},
                           {"speedup_assembly_update", speedup(i)}});
        }
        j["backends"] = arr;
        return j.dump(2) + "\n";
    }
};

/// Relative tolerance on reactions when comparing backends' step histories.
inline constexpr double kBackendReactionTol = 1e-6;

/**
 * Runs `cfg` `repeats` times with each backend, one after the other. Every
 * backend's load-displacement history must agree with the first one's.
 * `max_steps` < 0 runs the whole load program.
 */
inline TimingReport run_benchmark(const RunConfig& cfg, const std::vector<BackendKind>& backends, int repeats,
                                  int max_steps = -1) {
    if (repeats < 1) throw InvalidArgument("repeats must be at least 1");
    if (backends.empty()) throw InvalidArgument("no backends to benchmark");
    const Model model = build_model(cfg.problem);
    TimingReport rep;
    rep.problem = std::string(problem_name(cfg.problem.id));
    rep.divisions = cfg.problem.divisions;

    RunOptions opts;
    opts.max_steps = max_steps;
    opts.snapshot_interval = 0;
    for (BackendKind kind : backends) {
        BackendTiming bt;
        bt.backend = kind;
        bt.repeats = repeats;
        for (int r = 0; r < repeats; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            SimulationResult res;
            try {
                res = run_simulation(model, cfg.solver, kind, opts);
            } catch (const StepFailure& e) {
                throw StepFailure(e.step(), e.iterations(), e.du_rel(), e.de_rel(), e.residual(),
                                  std::string("benchmark aborted for backend ") + std::string(backend_name(kind)) +
                                      ", repeat " + std::to_string(r + 1));
            }
            bt.repeat_totals.push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            for (const IterationRecord& it : res.log) {
                bt.sum.assembly += it.t_assembly;
                bt.sum.solve += it.t_solve;
                bt.sum.update += it.t_update;
                bt.sum.total += it.t_total;
            }
            bt.iterations += static_cast<int>(res.log.size());
            if (r == 0) bt.steps = std::move(res.steps);
        }
        const double n = std::max(bt.iterations, 1);
        bt.mean = {bt.sum.assembly / n, bt.sum.solve / n, bt.sum.update / n, bt.sum.total / n};
        rep.backends.push_back(std::move(bt));
    }
    rep.steps = static_cast<int>(rep.backends[0].steps.size());

    const auto& ref = rep.backends[0].steps;
    double scale = 0.0;
    for (const StepRecord& s : ref) scale = std::max(scale, std::abs(s.reaction));
    for (std::size_t i = 1; i < rep.backends.size(); ++i) {
        const auto& other = rep.backends[i].steps;
        if (other.size() != ref.size()) throw InvalidState("backends completed different numbers of steps");
        for (std::size_t s = 0; s < ref.size(); ++s)
            if (std::abs(other[s].reaction - ref[s].reaction) > kBackendReactionTol * std::max(scale, 1e-300))
                throw InvalidState("backend " + std::string(backend_name(rep.backends[i].backend)) +
                                   " disagrees with " + std::string(backend_name(rep.backends[0].backend)) +
                                   " at step " + std::to_string(ref[s].step));
    }
    return rep;
}

} // namespace lgdm
