// Acceptance checks. Usage: lgdm_acceptance <criterion 1-9>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "common.hpp"
#include "lgdm/harness/benchmark.hpp"
#include "lgdm/harness/output.hpp"

using namespace lgdm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double rel_max_abs(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return test::max_abs(a - b) / std::max(test::max_abs(b), 1e-300);
}

/// Number of interior local maxima; a trailing rise counts as a peak too.
int count_peaks(const std::vector<double>& r) {
    int peaks = 0;
    for (std::size_t i = 1; i < r.size(); ++i) {
        const bool rising = r[i] > r[i - 1];
        const bool falls_next = i + 1 == r.size() || r[i + 1] <= r[i];
        if (rising && falls_next) ++peaks;
    }
    return peaks;
}

std::vector<double> reactions(const SimulationResult& r) {
    std::vector<double> out;
    for (const StepRecord& s : r.steps) out.push_back(s.reaction);
    return out;
}

SimulationResult run(const ProblemSpec& p, int snapshot_interval, BackendKind kind = BackendKind::batched) {
    RunOptions o;
    o.snapshot_interval = snapshot_interval;
    return run_simulation(build_model(p), default_newton_config(p), kind, o);
}

/// Every GP's history is nondecreasing across consecutive snapshots.
bool history_monotone(const std::vector<Snapshot>& snaps, const std::vector<double>& kappa0) {
    std::vector<double> prev = kappa0;
    for (const Snapshot& s : snaps) {
        for (std::size_t q = 0; q < prev.size(); ++q)
            if (s.kappa[q] < prev[q]) return false;
        prev = s.kappa;
    }
    return true;
}

Outcome backend_equivalence() {
    double worst_k = 0.0, worst_f = 0.0;
    int checked = 0;
    for (ProblemId id : {ProblemId::bar1d, ProblemId::sen2d, ProblemId::sen3d}) {
        ProblemSpec p = default_problem(id);
        if (id == ProblemId::bar1d) p.divisions = {20, 1, 1};
        if (id == ProblemId::sen2d) p.divisions = {8, 8, 1};
        if (id == ProblemId::sen3d) p.divisions = {4, 4, 2};
        const Model m = build_model(p);
        auto batched = make_backend(BackendKind::batched, m);
        RunOptions o;
        o.max_steps = 3;
        o.snapshot_interval = 0;
        o.observer = [&](const IterationEvent& ev) {
            const SparseSystem other = batched->assemble(ev.state);
            worst_k = std::max(worst_k, rel_max_abs(test::dense(other), test::dense(ev.system)));
            const double fs = std::max(ev.system.F.cwiseAbs().maxCoeff(), 1e-300);
            worst_f = std::max(worst_f, (other.F - ev.system.F).cwiseAbs().maxCoeff() / fs);
            ++checked;
        };
        run_simulation(m, default_newton_config(p), BackendKind::loop, o);
    }
    return {worst_k <= 1e-12 && worst_f <= 1e-12 && checked > 0,
            fmt("%d iterations, max rel |dK| %.3g, |dF| %.3g", checked, worst_k, worst_f)};
}

Outcome tangent_consistency() {
    ProblemSpec p = default_problem(ProblemId::sen2d);
    p.divisions = {4, 4, 1};
    const Model m = build_model(p);
    auto b = make_backend(BackendKind::batched, m);
    std::mt19937 rng(2024);
    const Eigen::VectorXd x = test::random_solution(m, rng, 5e-3);
    const std::vector<double> hist = test::generic_history(m, b->update_state(x, m.kappa0));
    const GpState s = b->update_state(x, hist);
    int damaged = 0;
    for (double d : s.damage) damaged += d > 0.0;
    const Eigen::MatrixXd k = test::dense(b->assemble(s));
    std::normal_distribution<double> nd;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        Eigen::VectorXd d(x.size());
        for (int i = 0; i < d.size(); ++i) d(i) = nd(rng);
        const double h = 1e-7 * x.norm() / d.norm();
        const Eigen::VectorXd fp = b->assemble(b->update_state(x + h * d, hist)).F;
        const Eigen::VectorXd fm = b->assemble(b->update_state(x - h * d, hist)).F;
        const Eigen::VectorXd fd = -(fp - fm) / (2 * h);
        worst = std::max(worst, (fd - k * d).norm() / (k * d).norm());
    }
    return {worst <= 1e-5 && damaged > 0, fmt("%d damaged GPs, worst relative mismatch %.3g", damaged, worst)};
}

Outcome constitutive_suite() {
    const MaterialParams p;
    std::vector<std::string> bad;
    double prev = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double kappa = p.kappa0 * std::pow(1e3, i / 999.0);
        const double d = damage(kappa, p).D;
        if (!(d >= 0.0 && d < 1.0) || d < prev) bad.push_back(fmt("D(%.3g)=%.17g", kappa, d));
        prev = d;
    }
    if (damage(p.kappa0, p).D != 0.0) bad.push_back("D(kappa0) != 0");
    if (!(std::abs(damage(p.kappa0 * (1 + 1e-9), p).D) < 1e-6)) bad.push_back("D discontinuous at kappa0");
    if (std::abs(interaction(0.0, p).g - 1.0) > 1e-14) bad.push_back("g(0) != 1");
    if (std::abs(interaction(1.0, p).g - p.R) > 1e-14) bad.push_back("g(1) != R");

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.1, 10.0);
    double homog = 0.0, grad = 0.0, hess = 0.0, dd = 0.0, dg = 0.0;
    for (int t = 0; t < 100; ++t) {
        Eigen::Matrix<double, 6, 1> e;
        for (int i = 0; i < 6; ++i) e(i) = 1e-3 * u(rng);
        const double lam = pos(rng);
        const auto r = equivalent_strain<3>(e, p);
        homog = std::max(homog, std::abs(equivalent_strain<3>(lam * e, p).value - lam * r.value) / (lam * r.value));
        const double step = 1e-6 * e.norm();
        Eigen::Matrix<double, 6, 1> gfd;
        Eigen::Matrix<double, 6, 6> hfd;
        for (int i = 0; i < 6; ++i) {
            Eigen::Matrix<double, 6, 1> ep = e, em = e;
            ep(i) += step;
            em(i) -= step;
            const auto rp = equivalent_strain<3>(ep, p), rm = equivalent_strain<3>(em, p);
            gfd(i) = (rp.value - rm.value) / (2 * step);
            hfd.col(i) = (rp.grad - rm.grad) / (2 * step);
        }
        grad = std::max(grad, (gfd - r.grad).norm() / r.grad.norm());
        hess = std::max(hess, (hfd - r.hess).norm() / r.hess.norm());

        const double kappa = p.kappa0 * (1.0 + 20.0 * std::abs(u(rng)) + 1e-3);
        const double hk = 1e-6 * kappa;
        const double dfd = (damage(kappa + hk, p).D - damage(kappa - hk, p).D) / (2 * hk);
        dd = std::max(dd, std::abs(dfd - damage(kappa, p).dD_dkappa) / std::abs(damage(kappa, p).dD_dkappa));
        const double D = 0.5 * (u(rng) + 1.0);
        const double gfd1 = (interaction(D + 1e-6, p).g - interaction(D - 1e-6, p).g) / 2e-6;
        dg = std::max(dg, std::abs(gfd1 - interaction(D, p).dg_dD) / std::abs(interaction(D, p).dg_dD));
    }
    if (homog > 1e-12) bad.push_back(fmt("homogeneity %.3g", homog));
    for (double v : {grad, hess, dd, dg})
        if (v > 1e-6) bad.push_back(fmt("derivative mismatch %.3g", v));
    std::string detail = fmt("homogeneity %.2g, FD: grad %.2g hess %.2g dD %.2g dg %.2g", homog, grad, hess, dd, dg);
    for (const auto& s : bad) detail += "; " + s;
    return {bad.empty(), detail};
}

Outcome elastic_limit() {
    ProblemSpec p = default_problem(ProblemId::bar1d);
    p.material.kappa0 = 1e9;
    const SimulationResult r = run(p, 0);
    double worst = 0.0;
    int max_it = 0;
    for (const StepRecord& s : r.steps) {
        const double expected = p.material.E * s.displacement / p.extents[0];
        worst = std::max(worst, std::abs(s.reaction - expected) / expected);
        max_it = std::max(max_it, s.iterations);
    }
    return {worst <= 1e-3 && max_it <= 2 && r.steps.size() == 1000u,
            fmt("%zu steps, max slope deviation %.3g, max iterations %d", r.steps.size(), worst, max_it)};
}

Outcome softening_1d() {
    const ProblemSpec p = default_problem(ProblemId::bar1d);
    const Model m = build_model(p);
    RunOptions o;
    o.snapshot_interval = 1;
    const SimulationResult r = run_simulation(m, default_newton_config(p), BackendKind::batched, o);
    const std::vector<double> rs = reactions(r);
    const double peak = *std::max_element(rs.begin(), rs.end());
    const int peaks = count_peaks(rs);
    const double ratio = rs.back() / peak;

    const auto xs = gauss_point_coordinates(m.mesh, m.rule);
    const auto& dmg = r.state.damage;
    const std::size_t qmax = std::max_element(dmg.begin(), dmg.end()) - dmg.begin();
    const double xmax = xs[qmax][0];
    const bool in_defect = xmax >= p.defect.start && xmax <= p.defect.end;
    const bool monotone = history_monotone(r.snapshots, m.kappa0);

    double peaks_by_mesh[3];
    const int meshes[3] = {500, 800, 1000};
    for (int i = 0; i < 2; ++i) {
        ProblemSpec q = p;
        q.divisions[0] = meshes[i];
        const auto rq = reactions(run(q, 0));
        peaks_by_mesh[i] = *std::max_element(rq.begin(), rq.end());
    }
    peaks_by_mesh[2] = peak;
    const double d1 = std::abs(peaks_by_mesh[2] - peaks_by_mesh[1]), d0 = std::abs(peaks_by_mesh[1] - peaks_by_mesh[0]);
    return {peaks == 1 && ratio < 0.05 && in_defect && monotone && d1 < d0,
            fmt("peaks %d, P_peak %.6g, final/peak %.4f, max D %.4f at x=%.3f, kappa monotone %d, "
                "P_peak(500/800/1000) %.12g/%.12g/%.12g",
                peaks, peak, ratio, dmg[qmax], xmax, int(monotone), peaks_by_mesh[0], peaks_by_mesh[1],
                peaks_by_mesh[2])};
}

/// Largest ligament coordinate of a GP with D > 0.9 among those accepted by `keep`.
template <typename Keep>
double band_extent(const std::vector<Point>& xs, const std::vector<double>& damage, Keep keep) {
    double ext = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < xs.size(); ++q)
        if (damage[q] > 0.9 && keep(xs[q])) ext = std::max(ext, xs[q][0]);
    return ext;
}

Outcome sen_2d() {
    const ProblemSpec p = default_problem(ProblemId::sen2d);
    const Model m = build_model(p);
    RunOptions o;
    o.snapshot_interval = 1;
    const SimulationResult r = run_simulation(m, default_newton_config(p), BackendKind::batched, o);
    const auto xs = gauss_point_coordinates(m.mesh, m.rule);
    const int gpe = m.rule.size();

    // first damaged snapshot: the most damaged element must touch the slit tip
    int first = -1, elem = -1;
    for (const Snapshot& s : r.snapshots) {
        const auto it = std::max_element(s.damage.begin(), s.damage.end());
        if (*it > 0.0) {
            first = s.step;
            elem = static_cast<int>(it - s.damage.begin()) / gpe;
            break;
        }
    }
    bool at_tip = false;
    if (elem >= 0)
        for (int n : m.mesh.element_u(elem)) {
            const Point& x = m.mesh.nodes_u[n];
            at_tip = at_tip || (std::abs(x[0] - p.slit.length) < 1e-9 && std::abs(x[1] - p.slit.height) < 1e-9);
        }

    bool band_monotone = true;
    double prev = -std::numeric_limits<double>::infinity(), first_band = prev;
    for (const Snapshot& s : r.snapshots) {
        const double e = band_extent(xs, s.damage, [](const Point&) { return true; });
        if (e < prev) band_monotone = false;
        if (std::isinf(first_band) && !std::isinf(e)) first_band = e;
        prev = e;
    }
    const bool grew = !std::isinf(first_band) && prev > first_band;
    const auto rs = reactions(r);
    const int peaks = count_peaks(rs);
    const double peak = *std::max_element(rs.begin(), rs.end());
    const bool softened = rs.back() < peak;
    return {at_tip && band_monotone && grew && peaks == 1 && softened,
            fmt("first damage at step %d in element %d (touches tip %d), D>0.9 band x %.3g -> %.3g monotone %d, "
                "peaks %d, P_peak %.6g, final %.6g",
                first, elem, int(at_tip), first_band, prev, int(band_monotone), peaks, peak, rs.back())};
}

Outcome sen_3d() {
    ProblemSpec p = default_problem(ProblemId::sen3d);
    p.divisions = {20, 20, 3};
    const Model m = build_model(p);
    const SimulationResult r = run_simulation(m, default_newton_config(p), BackendKind::batched, RunOptions{-1, 0});
    const auto xs = gauss_point_coordinates(m.mesh, m.rule);
    const double t = p.extents[2], layer = t / p.divisions[2];
    const auto in_layer = [&](int k) { return [=](const Point& x) { return x[2] >= k * layer && x[2] <= (k + 1) * layer; }; };
    const double surf0 = band_extent(xs, r.state.damage, in_layer(0));
    const double mid = band_extent(xs, r.state.damage, in_layer(1));
    const double surf1 = band_extent(xs, r.state.damage, in_layer(2));
    const bool ok = r.steps.size() == static_cast<std::size_t>(p.load.steps) && !std::isinf(mid) && mid >= surf0 &&
                    mid >= surf1;
    return {ok, fmt("%zu steps converged, D>0.9 ligament extent x: surface %.4g, mid %.4g, surface %.4g",
                    r.steps.size(), surf0, mid, surf1)};
}

Outcome performance_direction() {
    RunConfig c = default_config(ProblemId::sen2d);
    c.problem.divisions = {100, 100, 1};
    const TimingReport rep = run_benchmark(c, {BackendKind::loop, BackendKind::batched}, 1, 10);
    const BackendTiming &loop = rep.backends[0], &batched = rep.backends[1];
    const double ratio = batched.mean.assembly_update() / loop.mean.assembly_update();
    return {ratio <= 0.5 && loop.iterations >= 10 && batched.iterations >= 10,
            fmt("iterations %d/%d, mean assembly+update loop %.4f s, batched %.4f s, ratio %.3f", loop.iterations,
                batched.iterations, loop.mean.assembly_update(), batched.mean.assembly_update(), ratio)};
}

std::string slurp(const fs::path& f) {
    std::ifstream in(f, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    std::vector<std::pair<ProblemSpec, int>> cases;
    cases.emplace_back(default_problem(ProblemId::bar1d), 200);
    cases.emplace_back(default_problem(ProblemId::sen2d), -1);
    cases.back().first.divisions = {10, 10, 1};
    cases.emplace_back(default_problem(ProblemId::sen3d), 20);
    cases.back().first.divisions = {4, 4, 2};
    const fs::path root = fs::temp_directory_path() / "lgdm_acceptance_determinism";
    int files = 0;
    std::string mismatch;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const Model m = build_model(cases[c].first);
        RunOptions o;
        o.max_steps = cases[c].second;
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path d = root / std::to_string(c) / std::to_string(rep);
            fs::remove_all(d);
            write_results(m.mesh, run_simulation(m, default_newton_config(cases[c].first), BackendKind::batched, o), d);
        }
        for (const auto& e : fs::directory_iterator(root / std::to_string(c) / "0")) {
            ++files;
            if (slurp(e.path()) != slurp(root / std::to_string(c) / "1" / e.path().filename()))
                mismatch += " " + e.path().filename().string();
        }
    }
    fs::remove_all(root);
    return {mismatch.empty() && files > 0, fmt("%d file pairs compared, mismatches:%s", files,
                                               mismatch.empty() ? " none" : mismatch.c_str())};
}

} // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: lgdm_acceptance <criterion 1-9>\n";
        return 2;
    }
    const int n = std::atoi(argv[1]);
    Outcome (*const checks[])() = {backend_equivalence, tangent_consistency, constitutive_suite,
                                   elastic_limit,       softening_1d,        sen_2d,
                                   sen_3d,              performance_direction, determinism};
    if (n < 1 || n > 9) {
        std::cerr << "criterion must be 1-9\n";
        return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = checks[n - 1]();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << o.detail << fmt(" [%.1f s]", secs)
              << std::endl;
    return o.pass ? 0 : 1;
}
