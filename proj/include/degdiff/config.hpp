#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "degdiff/errors.hpp"
#include "degdiff/grid_field.hpp"
#include "degdiff/monotone_graph.hpp"
#include "degdiff/oracles.hpp"
#include "degdiff/structured_text.hpp"

namespace degdiff {

struct InitialSpec {
    std::string profile = "gaussian";  // gaussian | indicator | barenblatt | csv
    double sigma = 1.0;                // gaussian
    double center = 0.0;               // gaussian
    double mass = 1.0;                 // gaussian, barenblatt
    double height = 1.0;               // indicator
    double a = -0.5, b = 0.5;          // indicator support [a, b]
    double m = 2.0;                    // barenblatt exponent
    double t0 = 0.5;                   // barenblatt starting time
    std::string path;                  // csv, resolved against the config directory
};

struct ParticleSpec {
    std::string mode = "off";  // off | coupled | selfconsistent
    std::size_t N = 10000;
    std::size_t substeps = 1;
    std::optional<double> bandwidth;
    std::uint64_t seed = 0;
    bool stratified = true;
    unsigned workers = 1;
    bool full_dump = false;
    double eps = 0.0;  // selfconsistent: beta + eps*id
    double ks_tolerance = 0.02;  // pass flag for the law comparison at the final time

    bool enabled() const { return mode != "off"; }
};

struct RunConfig {
    GraphSpec graph = GraphSpec::linear();
    double graph_eps = 0.0;
    double L = 10.0;
    std::size_t n = 1000;
    InitialSpec initial;
    double T = 1.0;
    std::size_t steps = 100;
    std::vector<double> epsilon;
    ParticleSpec particles;
    std::string output = "out";
    std::vector<double> snapshots;  // empty: initial and final time
    std::string oracle = "auto";     // auto | none | heat | barenblatt | stationary
    std::string source;              // config path, for diagnostics only

    Grid grid() const { return Grid(L, n); }
    MonotoneGraph build() const {
        const MonotoneGraph g = build_graph(graph);
        return graph_eps > 0.0 ? regularize(g, graph_eps) : g;
    }
};

namespace detail {

class ConfigReader {
public:
    explicit ConfigReader(const StructuredText& doc) : doc_(doc) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ParseError(doc_.source, doc_.line_of(key), "key '" + key + "': " + msg);
    }

    const nlohmann::ordered_json* find(const std::string& key) {
        used_.insert(key);
        const nlohmann::ordered_json* node = &doc_.root;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (!node->is_object() || !node->contains(part)) return nullptr;
            node = &(*node)[part];
            if (dot == std::string::npos) return node;
            used_.insert(key.substr(0, dot));
            start = dot + 1;
        }
    }

    bool has(const std::string& key) { return find(key) != nullptr; }

    double number(const std::string& key, double fallback) {
        const auto* v = find(key);
        if (!v) return fallback;
        if (!v->is_number()) fail(key, "expected a number");
        const double d = v->get<double>();
        if (!std::isfinite(d)) fail(key, "expected a finite number");
        return d;
    }

    double positive(const std::string& key, double fallback) {
        const double d = number(key, fallback);
        if (!(d > 0.0)) fail(key, "must be positive, got " + format_double(d));
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback, std::size_t minimum) {
        const auto* v = find(key);
        if (!v) return fallback;
        if (!v->is_number_integer()) fail(key, "expected an integer");
        const long long k = v->get<long long>();
        if (k < static_cast<long long>(minimum)) fail(key, "must be >= " + std::to_string(minimum));
        return static_cast<std::size_t>(k);
    }

    bool flag(const std::string& key, bool fallback) {
        const auto* v = find(key);
        if (!v) return fallback;
        if (!v->is_boolean()) fail(key, "expected true or false");
        return v->get<bool>();
    }

    std::string text(const std::string& key, const std::string& fallback, const std::set<std::string>& allowed = {}) {
        const auto* v = find(key);
        if (!v) return fallback;
        if (!v->is_string()) fail(key, "expected a string");
        const std::string s = v->get<std::string>();
        if (!allowed.empty() && !allowed.count(s)) {
            std::string opts;
            for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
            fail(key, "unknown value \"" + s + "\" (expected one of: " + opts + ")");
        }
        return s;
    }

    std::vector<double> numbers(const std::string& key) {
        const auto* v = find(key);
        if (!v) return {};
        if (!v->is_array()) fail(key, "expected an array of numbers");
        std::vector<double> out;
        for (const auto& e : *v) {
            if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "expected an array of finite numbers");
            out.push_back(e.get<double>());
        }
        return out;
    }

    /// Every key present in the document that nobody asked for.
    void reject_unknown() const { walk(doc_.root, ""); }

    const StructuredText& doc() const { return doc_; }

private:
    void walk(const nlohmann::ordered_json& node, const std::string& prefix) const {
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
            if (!used_.count(key)) fail(key, "unknown key");
            if (it->is_object()) walk(*it, key);
        }
    }

    const StructuredText& doc_;
    std::set<std::string> used_;
};

inline GraphSpec read_graph(ConfigReader& r, double& eps) {
    if (!r.has("graph")) r.fail("graph", "missing graph block");
    const std::string kind = r.text("graph.kind", "", {"power", "heaviside", "linear", "table"});
    if (kind.empty()) r.fail("graph.kind", "missing graph kind");
    GraphSpec spec;
    if (kind == "linear") spec = GraphSpec::linear(r.number("graph.a", 1.0));
    if (kind == "heaviside") spec = GraphSpec::heaviside(r.number("graph.e_c", 1.0));
    if (kind == "power") spec = GraphSpec::power(r.number("graph.m", 2.0));
    if (kind == "table") {
        const auto* pts = r.find("graph.points");
        if (!pts || !pts->is_array()) r.fail("graph.points", "table graph needs points = [[x, y], ...]");
        std::vector<std::pair<double, double>> points;
        for (const auto& p : *pts) {
            if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                r.fail("graph.points", "each breakpoint must be [x, y]");
            points.emplace_back(p[0].get<double>(), p[1].get<double>());
        }
        spec = GraphSpec::table(std::move(points));
    }
    try {
        spec.validate();
    } catch (const InvalidArgument& e) {
        r.fail("graph", e.what());
    }
    eps = r.number("graph.eps", 0.0);
    if (eps < 0.0) r.fail("graph.eps", "must be >= 0");
    return spec;
}

}  // namespace detail

/// Validated configuration; relative file paths resolve against `base_dir`.
inline RunConfig parse_config(const StructuredText& doc, const std::filesystem::path& base_dir = {}) {
    detail::ConfigReader r(doc);
    RunConfig c;
    c.source = doc.source;
    c.graph = detail::read_graph(r, c.graph_eps);

    c.L = r.positive("grid.L", c.L);
    c.n = r.count("grid.n", c.n, 3);

    auto& ic = c.initial;
    ic.profile = r.text("initial.profile", ic.profile, {"gaussian", "indicator", "barenblatt", "csv"});
    if (ic.profile == "gaussian") {
        ic.sigma = r.positive("initial.sigma", ic.sigma);
        ic.center = r.number("initial.center", ic.center);
        ic.mass = r.positive("initial.mass", ic.mass);
    } else if (ic.profile == "indicator") {
        ic.height = r.number("initial.height", ic.height);
        ic.a = r.number("initial.a", ic.a);
        ic.b = r.number("initial.b", ic.b);
        if (!(ic.a < ic.b)) r.fail("initial.b", "indicator needs a < b");
    } else if (ic.profile == "barenblatt") {
        ic.m = r.number("initial.m", ic.m);
        if (!(ic.m > 1.0)) r.fail("initial.m", "barenblatt exponent must be > 1");
        ic.mass = r.positive("initial.mass", ic.mass);
        ic.t0 = r.positive("initial.t0", ic.t0);
    } else {
        ic.path = r.text("initial.path", "");
        if (ic.path.empty()) r.fail("initial.path", "csv profile needs a path");
        std::filesystem::path p(ic.path);
        if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
        if (!std::filesystem::exists(p)) r.fail("initial.path", "file not found: " + p.string());
        ic.path = p.string();
    }

    c.T = r.positive("time.T", c.T);
    c.steps = r.count("time.steps", c.steps, 1);

    c.epsilon = r.numbers("epsilon");
    for (std::size_t k = 0; k < c.epsilon.size(); ++k) {
        if (!(c.epsilon[k] > 0.0)) r.fail("epsilon", "entries must be positive");
        if (k > 0 && !(c.epsilon[k] < c.epsilon[k - 1])) r.fail("epsilon", "entries must be strictly decreasing");
    }

    auto& p = c.particles;
    p.mode = r.text("particles.mode", r.has("particles") ? "coupled" : "off", {"off", "coupled", "selfconsistent"});
    p.N = r.count("particles.N", p.N, 1);
    p.substeps = r.count("particles.substeps", p.substeps, 1);
    if (r.has("particles.bandwidth")) p.bandwidth = r.positive("particles.bandwidth", 1.0);
    const auto* seed = r.find("particles.seed");
    if (seed) {
        if (!seed->is_number_integer() || seed->get<long long>() < 0)
            r.fail("particles.seed", "expected a non-negative integer");
        p.seed = static_cast<std::uint64_t>(seed->get<long long>());
    }
    p.stratified = r.flag("particles.stratified", p.stratified);
    p.workers = static_cast<unsigned>(r.count("particles.workers", p.workers, 1));
    p.full_dump = r.flag("particles.full_dump", p.full_dump);
    p.eps = r.number("particles.eps", p.eps);
    if (p.eps < 0.0) r.fail("particles.eps", "must be >= 0");
    p.ks_tolerance = r.positive("particles.ks_tolerance", p.ks_tolerance);
    if (p.mode == "selfconsistent" && p.N < 2) r.fail("particles.N", "self-consistent mode needs N >= 2");

    c.output = r.text("output", c.output);
    if (c.output.empty()) r.fail("output", "must not be empty");
    c.snapshots = r.numbers("snapshots");
    for (double t : c.snapshots)
        if (t < 0.0 || t > c.T * (1.0 + 1e-12)) r.fail("snapshots", "times must lie in [0, T], got " + format_double(t));
    c.oracle = r.text("oracle", c.oracle, {"auto", "none", "heat", "barenblatt", "stationary"});

    r.reject_unknown();
    return c;
}

inline RunConfig load_config(const std::string& path) {
    const auto doc = read_structured_text(path);
    return parse_config(doc, std::filesystem::path(path).parent_path());
}

/// Initial datum sampled on the configured grid.
inline GridField initial_field(const RunConfig& c) {
    const Grid grid = c.grid();
    const auto& ic = c.initial;
    if (ic.profile == "gaussian")
        return GridField::sample(grid, [&](double x) {
            const double z = (x - ic.center) / ic.sigma;
            return ic.mass * std::exp(-0.5 * z * z) / (ic.sigma * std::sqrt(2.0 * std::numbers::pi));
        });
    if (ic.profile == "indicator")
        return GridField::sample(grid, [&](double x) { return x >= ic.a && x <= ic.b ? ic.height : 0.0; });
    if (ic.profile == "barenblatt") {
        const Barenblatt b(ic.m, ic.mass);
        return GridField::sample(grid, [&](double x) { return b(ic.t0, x); });
    }
    return read_field_csv(ic.path, grid);
}

/// The oracle a config resolves to; "none" when nothing applies.
inline std::string resolve_oracle(const RunConfig& c, const GridField& u0) {
    if (c.oracle != "auto") return c.oracle;
    const auto& g = c.graph;
    if (c.graph_eps == 0.0 && g.kind == GraphSpec::Kind::linear && g.slope == 1.0 && c.initial.profile == "gaussian" &&
        c.initial.center == 0.0 && c.initial.mass == 1.0)
        return "heat";
    if (c.graph_eps == 0.0 && g.kind == GraphSpec::Kind::power && c.initial.profile == "barenblatt" &&
        g.exponent == c.initial.m)
        return "barenblatt";
    if (c.graph_eps == 0.0 && g.kind == GraphSpec::Kind::heaviside && linf_norm(u0) < g.threshold)
        return "stationary";
    return "none";
}

/// Exact solution as a function of run time (t = 0 is the initial datum).
inline ExactSolution oracle_solution(const RunConfig& c, const std::string& name, const GridField& u0) {
    if (name == "heat") {
        if (!(c.graph.kind == GraphSpec::Kind::linear && c.graph.slope == 1.0 && c.graph_eps == 0.0 &&
              c.initial.profile == "gaussian"))
            throw InvalidArgument("heat oracle needs graph linear(a=1) and a gaussian initial profile");
        const ExactSolution base = heat_solution(c.initial.sigma);
        const double x0 = c.initial.center, M = c.initial.mass;
        return {base.kind, base.parameters, [base, x0, M](double t, double x) { return M * base(t, x - x0); }};
    }
    if (name == "barenblatt") {
        if (!(c.graph.kind == GraphSpec::Kind::power && c.graph_eps == 0.0 && c.initial.profile == "barenblatt" &&
              c.graph.exponent == c.initial.m))
            throw InvalidArgument("barenblatt oracle needs a power graph and a barenblatt profile with the same m");
        const Barenblatt b(c.initial.m, c.initial.mass);
        const double t0 = c.initial.t0;
        return {ExactSolution::Kind::barenblatt,
                {{"m", c.initial.m}, {"mass", c.initial.mass}, {"t0", t0}},
                [b, t0](double t, double x) { return b(t0 + t, x); }};
    }
    if (name == "stationary") {
        if (!(c.graph.kind == GraphSpec::Kind::heaviside && c.graph_eps == 0.0))
            throw InvalidArgument("stationary oracle needs an unregularized heaviside graph");
        return stationary_subcritical(c.graph.threshold, u0);
    }
    throw InvalidArgument("unknown oracle '" + name + "' (expected heat, barenblatt or stationary)");
}

/// Fully resolved configuration, for the manifest.
inline nlohmann::ordered_json config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    auto& g = j["graph"];
    g["kind"] = GraphSpec::kind_name(c.graph.kind);
    switch (c.graph.kind) {
        case GraphSpec::Kind::power: g["m"] = c.graph.exponent; break;
        case GraphSpec::Kind::heaviside: g["e_c"] = c.graph.threshold; break;
        case GraphSpec::Kind::linear: g["a"] = c.graph.slope; break;
        case GraphSpec::Kind::table:
            g["points"] = nlohmann::ordered_json::array();
            for (const auto& [x, y] : c.graph.points) g["points"].push_back({x, y});
            break;
    }
    g["eps"] = c.graph_eps;
    j["grid"] = {{"L", c.L}, {"n", c.n}};
    auto& ic = j["initial"];
    ic["profile"] = c.initial.profile;
    if (c.initial.profile == "gaussian")
        ic.update({{"sigma", c.initial.sigma}, {"center", c.initial.center}, {"mass", c.initial.mass}});
    else if (c.initial.profile == "indicator")
        ic.update({{"height", c.initial.height}, {"a", c.initial.a}, {"b", c.initial.b}});
    else if (c.initial.profile == "barenblatt")
        ic.update({{"m", c.initial.m}, {"mass", c.initial.mass}, {"t0", c.initial.t0}});
    else
        ic["path"] = c.initial.path;
    j["time"] = {{"T", c.T}, {"steps", c.steps}};
    j["epsilon"] = c.epsilon;
    auto& p = j["particles"];
    p["mode"] = c.particles.mode;
    if (c.particles.enabled()) {
        p["N"] = c.particles.N;
        p["substeps"] = c.particles.substeps;
        if (c.particles.bandwidth) p["bandwidth"] = *c.particles.bandwidth;
        p["seed"] = c.particles.seed;
        p["stratified"] = c.particles.stratified;
        p["workers"] = c.particles.workers;
        p["full_dump"] = c.particles.full_dump;
        p["eps"] = c.particles.eps;
        p["ks_tolerance"] = c.particles.ks_tolerance;
    }
    j["output"] = c.output;
    j["snapshots"] = c.snapshots;
    j["oracle"] = c.oracle;
    return j;
}

}  // namespace degdiff
