/**
 * @file config.hpp
 * @brief JSON run configuration: parsing with defaults, validation and echo.
 *
 * Layout (every key except "problem" is optional):
 *
 *   {
 *     "schema_version": 1,
 *     "problem": "bar1d" | "sen2d" | "sen3d",
 *     "mesh":     {"extents": [..], "divisions": [..]},
 *     "material": {"E", "nu", "k", "kappa0", "alpha", "beta", "h", "c", "R", "n"},
 *     "defect":   {"start", "end", "kappa0_factor"},
 *     "slit":     {"length", "height"},
 *     "load":     {"total_displacement", "steps"},
 *     "solver":   {"tol", "max_iterations", "divergence_factor"},
 *     "output":   {"backend": "loop" | "batched", "snapshot_interval"}
 *   }
 *
 * Unknown keys are rejected. Errors are ParseError with the offending key path.
 */
#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "lgdm/harness/problem.hpp"

namespace lgdm {

inline constexpr int kSchemaVersion = 1;

inline BackendKind parse_backend(std::string_view name) {
    if (name == "loop") return BackendKind::loop;
    if (name == "batched") return BackendKind::batched;
    throw InvalidArgument("unknown backend '" + std::string(name) + "' (valid: loop, batched)");
}

struct OutputOptions {
    BackendKind backend = BackendKind::batched;
    int snapshot_interval = 10;

    bool operator==(const OutputOptions&) const = default;
};

struct RunConfig {
    ProblemSpec problem;
    NewtonConfig solver;
    OutputOptions output;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

using json = nlohmann::json;

/// Reads typed members of one JSON object and remembers which keys were used.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ParseError(path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    void read(const std::string& key, double& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) throw ParseError(key_path(key), "expected a number");
        out = v.get<double>();
        if (!std::isfinite(out)) throw ParseError(key_path(key), "must be finite");
    }

    void read(const std::string& key, int& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer()) throw ParseError(key_path(key), "expected an integer");
        const auto x = v.get<long long>();
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            throw ParseError(key_path(key), "integer out of range");
        out = static_cast<int>(x);
    }

    void read(const std::string& key, std::string& out) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) throw ParseError(key_path(key), "expected a string");
        out = v.get<std::string>();
    }

    template <typename T, std::size_t N>
    void read_array(const std::string& key, std::array<T, N>& out, int count) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array() || static_cast<int>(v.size()) != count)
            throw ParseError(key_path(key), "expected an array of " + std::to_string(count) + " values");
        for (int i = 0; i < count; ++i) {
            const json& x = v[static_cast<std::size_t>(i)];
            const std::string p = key_path(key) + "[" + std::to_string(i) + "]";
            if constexpr (std::is_integral_v<T>) {
                if (!x.is_number_integer()) throw ParseError(p, "expected an integer");
                out[i] = x.get<T>();
            } else {
                if (!x.is_number()) throw ParseError(p, "expected a number");
                out[i] = x.get<T>();
            }
        }
    }

    Section sub(const std::string& key) {
        seen_.insert(key);
        static const json empty = json::object();
        return Section(j_.contains(key) ? j_.at(key) : empty, key_path(key));
    }

    void reject_unknown() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ParseError(key_path(it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

inline void require(bool ok, const std::string& path, const std::string& message) {
    if (!ok) throw ParseError(path, message);
}

} // namespace detail

/// Parses configuration text. Defaults come from the problem's defaults.
inline RunConfig parse_config(const std::string& text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("", std::string("malformed JSON: ") + e.what());
    }
    detail::Section top(root, "");

    int version = kSchemaVersion;
    top.read("schema_version", version);
    detail::require(version == kSchemaVersion, "schema_version",
                    "unsupported version " + std::to_string(version) + " (expected " +
                        std::to_string(kSchemaVersion) + ")");

    if (!top.has("problem")) throw ParseError("problem", "required key missing");
    std::string name;
    top.read("problem", name);
    ProblemId id;
    try {
        id = parse_problem_id(name);
    } catch (const InvalidArgument& e) {
        throw ParseError("problem", e.what());
    }

    RunConfig cfg;
    cfg.problem = default_problem(id);
    ProblemSpec& p = cfg.problem;
    const int dim = p.dim();

    {
        auto s = top.sub("mesh");
        s.read_array("extents", p.extents, dim);
        s.read_array("divisions", p.divisions, dim);
        for (int d = 0; d < dim; ++d) {
            detail::require(p.extents[d] > 0.0, s.key_path("extents"), "extents must be positive");
            detail::require(p.divisions[d] >= 1, s.key_path("divisions"), "divisions must be at least 1");
        }
        s.reject_unknown();
    }
    {
        auto s = top.sub("material");
        MaterialParams& m = p.material;
        s.read("E", m.E);
        s.read("nu", m.nu);
        s.read("k", m.k);
        s.read("kappa0", m.kappa0);
        s.read("alpha", m.alpha);
        s.read("beta", m.beta);
        s.read("h", m.h);
        s.read("c", m.c);
        s.read("R", m.R);
        s.read("n", m.n);
        s.reject_unknown();
        if (auto v = m.first_violation()) throw ParseError(s.key_path(v->first), "must satisfy " + v->second);
    }
    {
        auto s = top.sub("defect");
        s.read("start", p.defect.start);
        s.read("end", p.defect.end);
        s.read("kappa0_factor", p.defect.kappa0_factor);
        s.reject_unknown();
        detail::require(p.defect.kappa0_factor > 0.0, s.key_path("kappa0_factor"), "must be positive");
        detail::require(p.defect.end >= p.defect.start, s.key_path("end"), "must not lie before start");
    }
    {
        auto s = top.sub("slit");
        s.read("length", p.slit.length);
        s.read("height", p.slit.height);
        s.reject_unknown();
        detail::require(p.slit.length >= 0.0, s.key_path("length"), "must be non-negative");
        detail::require(!(id == ProblemId::bar1d && p.slit.length > 0.0), s.key_path("length"),
                        "bar1d has no slit");
        if (p.slit.length > 0.0) {
            detail::require(p.slit.height > 0.0 && p.slit.height < p.extents[1], s.key_path("height"),
                            "must lie strictly inside the plate");
            detail::require(p.slit.length < p.extents[0], s.key_path("length"), "slit would cut the plate in two");
        }
    }
    {
        auto s = top.sub("load");
        s.read("total_displacement", p.load.total_displacement);
        s.read("steps", p.load.steps);
        s.reject_unknown();
        detail::require(p.load.steps >= 1, s.key_path("steps"), "must be at least 1");
    }
    cfg.solver = default_newton_config(p);
    {
        auto s = top.sub("solver");
        s.read("tol", cfg.solver.tol);
        s.read("max_iterations", cfg.solver.max_iterations);
        s.read("divergence_factor", cfg.solver.divergence_factor);
        s.reject_unknown();
        detail::require(cfg.solver.tol > 0.0, s.key_path("tol"), "must be positive");
        detail::require(cfg.solver.max_iterations >= 1, s.key_path("max_iterations"), "must be at least 1");
        detail::require(cfg.solver.divergence_factor > 1.0, s.key_path("divergence_factor"), "must exceed 1");
    }
    {
        auto s = top.sub("output");
        std::string backend(backend_name(cfg.output.backend));
        s.read("backend", backend);
        try {
            cfg.output.backend = parse_backend(backend);
        } catch (const InvalidArgument& e) {
            throw ParseError(s.key_path("backend"), e.what());
        }
        s.read("snapshot_interval", cfg.output.snapshot_interval);
        s.reject_unknown();
        detail::require(cfg.output.snapshot_interval >= 0, s.key_path("snapshot_interval"), "must be non-negative");
    }
    top.reject_unknown();
    return cfg;
}

/// Fully resolved configuration as JSON; parse_config(echo_config(c)) == c.
inline std::string echo_config(const RunConfig& cfg) {
    using detail::json;
    const ProblemSpec& p = cfg.problem;
    const int dim = p.dim();
    json j;
    j["schema_version"] = kSchemaVersion;
    j["problem"] = std::string(problem_name(p.id));
    json ext = json::array(), div = json::array();
    for (int d = 0; d < dim; ++d) {
        ext.push_back(p.extents[d]);
        div.push_back(p.divisions[d]);
    }
    j["mesh"] = {{"extents", ext}, {"divisions", div}};
    const MaterialParams& m = p.material;
    j["material"] = {{"E", m.E}, {"nu", m.nu},         {"k", m.k}, {"kappa0", m.kappa0}, {"alpha", m.alpha},
                     {"beta", m.beta}, {"h", m.h}, {"c", m.c}, {"R", m.R},           {"n", m.n}};
    j["defect"] = {{"start", p.defect.start}, {"end", p.defect.end}, {"kappa0_factor", p.defect.kappa0_factor}};
    j["slit"] = {{"length", p.slit.length}, {"height", p.slit.height}};
    j["load"] = {{"total_displacement", p.load.total_displacement}, {"steps", p.load.steps}};
    j["solver"] = {{"tol", cfg.solver.tol},
                   {"max_iterations", cfg.solver.max_iterations},
                   {"divergence_factor", cfg.solver.divergence_factor}};
    j["output"] = {{"backend", std::string(backend_name(cfg.output.backend))},
                   {"snapshot_interval", cfg.output.snapshot_interval}};
    return j.dump(2) + "\n";
}

/// Defaults of one problem, as a configuration.
inline RunConfig default_config(ProblemId id) {
    RunConfig c;
    c.problem = default_problem(id);
    c.solver = default_newton_config(c.problem);
    return c;
}

} // namespace lgdm
