#pragma once

// Batch front-end: one config in, one deterministic artifact tree out.
//
//   fields/t_<time>.csv     x,u,eta,chi at each snapshot
//   ensemble/t_<time>.csv   t,quantile,position at 999 plotting quantiles
//   report.jsonl            invariant rows per step + summary line
//   summary.json            oracle errors, continuation, particle checks, pass flags
//   manifest.json           resolved config, code version, file list
//
// Nothing time- or host-dependent is written, so identical configs give
// byte-identical trees.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "degdiff/config.hpp"
#include "degdiff/diagnostics.hpp"
#include "degdiff/format.hpp"
#include "degdiff/oracles.hpp"
#include "degdiff/particles.hpp"
#include "degdiff/semigroup.hpp"

#ifndef DEGDIFF_VERSION
#define DEGDIFF_VERSION "0.1.0"
#endif

namespace degdiff {

inline constexpr const char* kVersion = DEGDIFF_VERSION;
inline constexpr const char* kOutputRootEnv = "DEGDIFF_OUTPUT_ROOT";

enum ExitCode : int { kExitOk = 0, kExitInvariant = 1, kExitNoConvergence = 2, kExitUsage = 3 };

struct RunOptions {
    std::optional<std::uint64_t> seed;            // overrides particles.seed
    std::optional<std::filesystem::path> output_root;  // else $DEGDIFF_OUTPUT_ROOT, else cwd
};

struct RunOutcome {
    int exit_code = kExitOk;
    std::filesystem::path directory;
    nlohmann::ordered_json summary;
};

namespace detail {

inline std::filesystem::path output_directory(const RunConfig& c, const RunOptions& opt) {
    const std::filesystem::path out(c.output);
    if (out.is_absolute()) return out;
    if (opt.output_root) return *opt.output_root / out;
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) return std::filesystem::path(env) / out;
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw InvalidArgument("cannot write '" + path.string() + "'");
    os << content;
    if (!os) throw InvalidArgument("write failed for '" + path.string() + "'");
}

inline std::string time_tag(double t) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "t_%.6f", t);
    return buf;
}

/// Snapshot step indices: nearest grid time to each requested time.
inline std::vector<std::size_t> snapshot_steps(const std::vector<double>& times, double dt, std::size_t steps) {
    std::vector<std::size_t> out;
    if (times.empty()) {
        out = {0, steps};
    } else {
        for (double t : times)
            out.push_back(std::min(steps, static_cast<std::size_t>(std::llround(t / dt))));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Start steps whose lag to `last` is last/2^k, for the increment moments.
inline std::vector<std::size_t> dyadic_starts(std::size_t last) {
    std::vector<std::size_t> out;
    for (std::size_t div = 1; div <= last && last % div == 0; div *= 2) out.push_back(last - last / div);
    return out;
}

inline std::string fields_csv(const GridField& u, const GridField& w, const GridField& chi) {
    std::string out = "x,u,eta,chi\n";
    const Grid& g = u.grid();
    for (std::size_t i = 0; i < u.size(); ++i) {
        out += format_double(g.node(i));
        for (double v : {u[i], w[i], chi[i]}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline std::vector<double> plotting_quantiles(std::vector<double> sample) {
    std::sort(sample.begin(), sample.end());
    std::vector<double> out;
    const auto N = sample.size();
    for (int k = 1; k <= 999; ++k) {
        const double pos = static_cast<double>(k) / 1000.0 * static_cast<double>(N) - 0.5;
        const double clamped = std::clamp(pos, 0.0, static_cast<double>(N - 1));
        const auto lo = static_cast<std::size_t>(std::floor(clamped));
        const auto hi = std::min(lo + 1, N - 1);
        const double frac = clamped - static_cast<double>(lo);
        out.push_back(sample[lo] + frac * (sample[hi] - sample[lo]));
    }
    return out;
}

inline std::string ensemble_csv(double t, const std::vector<double>& sample) {
    std::string out = "t,quantile,position\n";
    const auto q = plotting_quantiles(sample);
    const std::string ts = format_double(t);
    for (int k = 1; k <= 999; ++k)
        out += ts + "," + format_double(static_cast<double>(k) / 1000.0) + "," + format_double(q[k - 1]) + "\n";
    return out;
}

inline std::string ensemble_full_csv(double t, const std::vector<double>& sample) {
    std::string out = "t,index,position\n";
    const std::string ts = format_double(t);
    for (std::size_t i = 0; i < sample.size(); ++i)
        out += ts + "," + std::to_string(i) + "," + format_double(sample[i]) + "\n";
    return out;
}

inline nlohmann::ordered_json oracle_block(const RunConfig& c, const std::string& name, const Trajectory& traj,
                                          const std::vector<std::size_t>& snaps) {
    nlohmann::ordered_json block;
    block["name"] = name;
    const ExactSolution exact = oracle_solution(c, name, traj.u.front());
    auto& rows = block["snapshots"] = nlohmann::ordered_json::array();
    double final_l1 = 0.0;
    for (std::size_t j : snaps) {
        const GridField ref = exact.sample(traj.grid(), traj.times[j]);
        const double l1 = l1_distance(traj.u[j], ref);
        rows.push_back({{"t", traj.times[j]}, {"l1", l1}, {"linf", linf_distance(traj.u[j], ref)}});
        final_l1 = l1;
    }
    block["final_l1"] = final_l1;
    if (name == "heat") {
        block["tolerance"] = 1e-2;
        block["pass"] = final_l1 <= 1e-2;
    } else if (name == "barenblatt") {
        block["tolerance"] = 3e-2;
        block["pass"] = final_l1 <= 3e-2;
    } else {
        double drift = 0.0, chi_max = 0.0;
        const double floor = chi_floor(traj);
        for (std::size_t j = 0; j <= traj.steps(); ++j) {
            drift = std::max(drift, l1_distance(traj.u[j], traj.u.front()));
            chi_max = std::max(chi_max, linf_norm(chi_field(traj.u[j], traj.w[j], floor)));
        }
        block["max_l1_drift"] = drift;
        block["max_chi"] = chi_max;
        block["tolerance"] = 1e-9;
        block["pass"] = drift <= 1e-9 && chi_max == 0.0;
    }
    return block;
}

inline nlohmann::ordered_json continuation_block(const RunConfig& c, const MonotoneGraph& g, const GridField& u0) {
    const auto res = epsilon_continuation(g, u0, c.T, c.steps, c.epsilon);
    nlohmann::ordered_json block;
    block["eps"] = res.eps;
    block["sup_l1_distances"] = res.sup_distances;
    auto& ratios = block["ratios"] = nlohmann::ordered_json::array();
    bool pass = res.sup_distances.size() >= 2;
    for (std::size_t k = 0; k + 1 < res.sup_distances.size(); ++k) {
        const double ratio = res.sup_distances[k + 1] / res.sup_distances[k];
        ratios.push_back(ratio);
        pass = pass && ratio <= 0.7;
    }
    block["ratio_limit"] = 0.7;
    block["pass"] = pass;
    return block;
}

struct ParticleArtifacts {
    nlohmann::ordered_json block;
    std::map<std::string, std::string> files;
};

inline ParticleArtifacts particle_block(const RunConfig& c, const MonotoneGraph& g, const Trajectory& traj,
                                        const std::vector<std::size_t>& snaps) {
    const auto& p = c.particles;
    std::vector<std::size_t> record = snaps;
    const auto dyadic = dyadic_starts(traj.steps());
    record.insert(record.end(), dyadic.begin(), dyadic.end());
    record.push_back(0);
    record.push_back(traj.steps());
    std::sort(record.begin(), record.end());
    record.erase(std::unique(record.begin(), record.end()), record.end());

    ParticleOptions popt;
    popt.stratified = p.stratified;
    popt.workers = p.workers;
    popt.record_steps = record;

    EnsemblePath path;
    if (p.mode == "coupled") {
        path = simulate_coupled(traj, p.N, p.substeps, p.seed, popt);
    } else {
        SelfConsistentOptions sopt;
        sopt.bandwidth = p.bandwidth;
        sopt.eps = p.eps;
        sopt.particles = popt;
        path = simulate_selfconsistent(g, traj.u.front(), c.T, c.steps, p.N, p.seed, sopt);
    }

    ParticleArtifacts out;
    auto& b = out.block;
    b["mode"] = p.mode;
    b["N"] = p.N;
    b["seed"] = p.seed;
    b["ks_statistical_threshold"] = 1.63 / std::sqrt(static_cast<double>(p.N));
    b["ks_tolerance"] = p.ks_tolerance;

    auto& laws = b["law"] = nlohmann::ordered_json::array();
    double final_ks = 0.0;
    for (std::size_t j : snaps) {
        const auto& y = path.at_step(j);
        const LawComparison lc = law_distance(y, traj.u[j], traj.times[j]);
        laws.push_back({{"t", lc.t}, {"ks", lc.ks}, {"wasserstein1", lc.wasserstein1},
                        {"histogram_l1", lc.histogram_l1}, {"sample_size", lc.sample_size}});
        out.files["ensemble/" + time_tag(traj.times[j]) + ".csv"] = ensemble_csv(traj.times[j], y);
        if (p.full_dump)
            out.files["ensemble/full_" + time_tag(traj.times[j]) + ".csv"] = ensemble_full_csv(traj.times[j], y);
    }
    final_ks = law_distance(path.final(), traj.u.back(), traj.final_time()).ks;
    b["final_ks"] = final_ks;

    auto& moments = b["moments"] = nlohmann::ordered_json::array();
    bool mean_ok = true;
    for (const auto& r : moment_check(path, traj)) {
        moments.push_back({{"t", r.t}, {"variance_gain", r.variance_gain}, {"eta_integral", r.eta_integral},
                           {"standard_error", r.standard_error}, {"mean_drift", r.mean_drift},
                           {"mean_bound", r.mean_bound}});
        mean_ok = mean_ok && std::abs(r.mean_drift) <= r.mean_bound;
    }

    const double c_growth = traj.graph.growth_bound(linf_norm(traj.u.front()));
    auto& incr = b["increments"] = nlohmann::ordered_json::array();
    bool bdg_ok = true;
    for (const auto& m : increment_fourth_moments(path, c_growth)) {
        incr.push_back({{"lag", m.lag}, {"fourth_moment", m.fourth_moment}, {"standard_error", m.standard_error},
                        {"bound", m.bound}});
        bdg_ok = bdg_ok && m.fourth_moment <= m.bound + 4.0 * m.standard_error;
    }
    b["growth_constant"] = c_growth;
    b["ks_pass"] = final_ks <= p.ks_tolerance;
    b["mean_pass"] = mean_ok;
    b["increment_pass"] = bdg_ok;
    b["pass"] = final_ks <= p.ks_tolerance && mean_ok && bdg_ok;
    return out;
}

}  // namespace detail

/// Executes a configuration and writes its artifact tree.
inline RunOutcome run(RunConfig config, const RunOptions& opt = {}) {
    if (opt.seed) config.particles.seed = *opt.seed;
    RunOutcome outcome;
    outcome.directory = detail::output_directory(config, opt);
    std::filesystem::create_directories(outcome.directory);
    std::map<std::string, std::string> files;

    const MonotoneGraph g = config.build();
    const GridField u0 = initial_field(config);
    std::optional<ConvergenceError> failure;
    const Trajectory traj = evolve_partial(g, u0, config.T, config.steps, {}, failure);
    const auto snaps = detail::snapshot_steps(config.snapshots, traj.dt, traj.steps());

    const DiagnosticsReport report = invariant_report(traj);
    files["report.jsonl"] = report_jsonl(report);

    auto& s = outcome.summary;
    s["version"] = kVersion;
    s["graph"] = g.describe();
    s["steps_completed"] = traj.steps();
    s["solver"] = {{"iterations", traj.solver_iterations}, {"max_residual", traj.max_residual}};
    if (failure) s["solver"]["failure"] = failure->what();
    s["invariants"] = summary_json(report);
    const auto balance = second_moment_balance(traj);
    s["second_moment"] = {{"lhs", balance.lhs}, {"rhs", balance.rhs}};

    bool chi_ok = true;
    const double floor = chi_floor(traj);
    for (std::size_t j : snaps) {
        if (j > traj.steps()) continue;
        GridField chi(traj.grid());
        try {
            chi = chi_field(traj.u[j], traj.w[j], floor);
        } catch (const InvariantViolation& e) {
            chi_ok = false;
            s["invariants"]["chi_error"] = e.what();
        }
        files["fields/" + detail::time_tag(traj.times[j]) + ".csv"] = detail::fields_csv(traj.u[j], traj.w[j], chi);
    }

    const bool complete = !failure;
    if (complete) {
        const std::string oracle = resolve_oracle(config, u0);
        if (oracle != "none") s["oracle"] = detail::oracle_block(config, oracle, traj, snaps);
        if (!config.epsilon.empty()) s["continuation"] = detail::continuation_block(config, g, u0);
        if (config.particles.enabled()) {
            auto particles = detail::particle_block(config, g, traj, snaps);
            s["particles"] = std::move(particles.block);
            files.merge(particles.files);
        }
    }

    outcome.exit_code = failure ? kExitNoConvergence : (report.ok() && chi_ok ? kExitOk : kExitInvariant);
    s["ok"] = outcome.exit_code == kExitOk;
    files["summary.json"] = s.dump(2) + "\n";

    nlohmann::ordered_json manifest;
    manifest["version"] = kVersion;
    manifest["config"] = config_json(config);
    auto& snap_list = manifest["snapshots"] = nlohmann::ordered_json::array();
    for (std::size_t j : snaps)
        if (j <= traj.steps())
            snap_list.push_back({{"step", j},
                                 {"t", traj.times[j]},
                                 {"file", "fields/" + detail::time_tag(traj.times[j]) + ".csv"}});
    auto& listing = manifest["files"] = nlohmann::ordered_json::array();
    for (const auto& [name, content] : files) listing.push_back(name);
    listing.push_back("manifest.json");
    files["manifest.json"] = manifest.dump(2) + "\n";

    for (const auto& [name, content] : files) detail::write_file(outcome.directory / name, content);
    return outcome;
}

struct CompareRow {
    std::size_t level = 0;
    std::size_t n = 0;
    std::size_t steps = 0;
    double t = 0.0;
    double l1 = 0.0;
    double linf = 0.0;
    double l1_order = std::nan("");
    double linf_order = std::nan("");
};

/// Solver against an oracle on a ladder that doubles (n, steps) `levels - 1` times.
inline std::vector<CompareRow> compare(const RunConfig& config, const std::string& oracle, std::size_t levels = 3) {
    if (levels < 1) throw InvalidArgument("compare: need at least one level");
    std::vector<CompareRow> rows;
    std::vector<CompareRow> previous;
    for (std::size_t level = 0; level < levels; ++level) {
        RunConfig c = config;
        c.n = config.n << level;
        c.steps = config.steps << level;
        const GridField u0 = initial_field(c);
        const ExactSolution exact = oracle_solution(c, oracle, u0);
        const Trajectory traj = evolve(c.build(), u0, c.T, c.steps);
        auto snaps = detail::snapshot_steps(c.snapshots, traj.dt, traj.steps());
        std::vector<CompareRow> current;
        for (std::size_t j : snaps) {
            if (j == 0) continue;
            const GridField ref = exact.sample(traj.grid(), traj.times[j]);
            CompareRow r{level, c.n, c.steps, traj.times[j], l1_distance(traj.u[j], ref),
                         linf_distance(traj.u[j], ref)};
            current.push_back(r);
        }
        for (std::size_t k = 0; k < current.size() && k < previous.size(); ++k) {
            if (current[k].l1 > 0.0 && previous[k].l1 > 0.0) current[k].l1_order = std::log2(previous[k].l1 / current[k].l1);
            if (current[k].linf > 0.0 && previous[k].linf > 0.0)
                current[k].linf_order = std::log2(previous[k].linf / current[k].linf);
        }
        rows.insert(rows.end(), current.begin(), current.end());
        previous = std::move(current);
    }
    return rows;
}

inline nlohmann::ordered_json compare_row_json(const CompareRow& r) {
    auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(v); };
    return {{"level", r.level}, {"n", r.n},   {"steps", r.steps},           {"t", r.t},
            {"l1", r.l1},       {"linf", r.linf}, {"l1_order", num(r.l1_order)}, {"linf_order", num(r.linf_order)}};
}

struct DiagnoseResult {
    DiagnosticsReport report;
    double max_inclusion_defect = 0.0;
    double max_chi_mismatch = 0.0;
    std::size_t snapshots = 0;
    bool ok() const { return report.ok() && max_inclusion_defect <= 1e-8 && max_chi_mismatch <= 1e-12; }
};

namespace detail {

inline std::vector<std::vector<double>> read_csv_columns(const std::filesystem::path& path, std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> cols(columns);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t k = 0; k < columns; ++k) {
            if (!std::getline(ss, cell, ','))
                throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": missing column");
            try {
                cols[k].push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
        }
    }
    return cols;
}

}  // namespace detail

/// Re-checks an artifact tree from its field dumps alone.
inline DiagnoseResult diagnose(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw InvalidArgument("no manifest.json in '" + dir.string() + "'");
    const auto manifest = nlohmann::ordered_json::parse(in);
    StructuredText doc;
    doc.root = manifest.at("config");
    doc.source = (dir / "manifest.json").string();
    const RunConfig config = parse_config(doc);
    const Grid grid = config.grid();
    const MonotoneGraph g = config.build();

    Trajectory traj{g, 0.0, {}, {}, {}, 0, 0.0};
    DiagnoseResult result;
    for (const auto& snap : manifest.at("snapshots")) {
        const auto cols = detail::read_csv_columns(dir / snap.at("file").get<std::string>(), 4);
        if (cols[0].size() != grid.size())
            throw InvalidArgument(snap.at("file").get<std::string>() + ": node count does not match the grid");
        for (std::size_t i = 0; i < grid.size(); ++i)
            if (std::abs(cols[0][i] - grid.node(i)) > 1e-9 * (1.0 + grid.half_width()))
                throw InvalidArgument(snap.at("file").get<std::string>() + ": nodes do not match the grid");
        GridField u(grid, cols[1]), w(grid, cols[2]), chi(grid, cols[3]);
        result.max_inclusion_defect = std::max(result.max_inclusion_defect, inclusion_defect(g, u, w));
        traj.times.push_back(snap.at("t").get<double>());
        traj.u.push_back(std::move(u));
        traj.w.push_back(std::move(w));
        const GridField recomputed = chi_field(traj.u.back(), traj.w.back(), 1e-12 * linf_norm(traj.u.front()));
        result.max_chi_mismatch = std::max(result.max_chi_mismatch, linf_distance(recomputed, chi));
    }
    if (traj.u.empty()) throw InvalidArgument("manifest lists no snapshots");
    // dt = 0: the step inequality degenerates to energy monotonicity between snapshots
    result.report = invariant_report(traj);
    result.snapshots = traj.u.size();
    return result;
}

inline nlohmann::ordered_json diagnose_json(const DiagnoseResult& r) {
    nlohmann::ordered_json j;
    j["snapshots"] = r.snapshots;
    j["max_inclusion_defect"] = r.max_inclusion_defect;
    j["max_chi_mismatch"] = r.max_chi_mismatch;
    j["invariants"] = summary_json(r.report);
    j["ok"] = r.ok();
    return j;
}

}  // namespace degdiff
