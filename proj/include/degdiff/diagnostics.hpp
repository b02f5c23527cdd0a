#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "degdiff/elliptic_resolvent.hpp"
#include "degdiff/format.hpp"
#include "degdiff/grid_field.hpp"
#include "degdiff/semigroup.hpp"

namespace degdiff {

/// Gamma_j = h * sum j(u_j), one value per snapshot.
inline std::vector<double> energy_trace(const Trajectory& traj) {
    std::vector<double> out;
    out.reserve(traj.u.size());
    for (const auto& u : traj.u) out.push_back(potential_integral(traj.graph, u));
    return out;
}

/// (dt/2) * sum_{j>=1} ∫ (w_j')^2: the discrete dissipation up to step `upto`.
inline double dissipation_integral(const Trajectory& traj, std::size_t upto) {
    double d = 0.0;
    for (std::size_t j = 1; j <= upto; ++j) d += gradient_energy(traj.w[j]);
    return 0.5 * traj.dt * d;
}

/// Gamma(T) - Gamma(0) + (1/2) ∫∫ (eta')^2. Zero for exact solutions with
/// surjective beta; never positive beyond round-off for any graph.
inline double dissipation_signed_residual(const Trajectory& traj) {
    const auto gamma = energy_trace(traj);
    return gamma.back() - gamma.front() + dissipation_integral(traj, traj.steps());
}

inline double dissipation_residual(const Trajectory& traj) {
    return std::abs(dissipation_signed_residual(traj));
}

/// max_j [Gamma_j + (dt/2) ∫(w_j')^2 - Gamma_{j-1}], which must be <= 0.
inline double max_step_energy_violation(const Trajectory& traj) {
    const auto gamma = energy_trace(traj);
    double worst = -kInf;
    for (std::size_t j = 1; j <= traj.steps(); ++j)
        worst = std::max(worst, gamma[j] + 0.5 * traj.dt * gradient_energy(traj.w[j]) - gamma[j - 1]);
    return traj.steps() ? worst : 0.0;
}

/// chi_i = sqrt(w_i / u_i) where u_i > u_floor, else 0.
inline GridField chi_field(const GridField& u, const GridField& w, double u_floor = 0.0) {
    GridField chi(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > u_floor)) continue;
        const double ratio = w[i] / u[i];
        if (ratio < -1e-10)
            throw InvariantViolation("chi_field: u*w < 0 at node " + std::to_string(i) + " (u=" +
                                     format_double(u[i]) + ", w=" + format_double(w[i]) + ")");
        chi[i] = std::sqrt(std::max(ratio, 0.0));
    }
    return chi;
}

/// u_floor = 1e-12 * ||u_0||_inf
inline double chi_floor(const Trajectory& traj) { return 1e-12 * linf_norm(traj.u.front()); }

inline GridField chi_at(const Trajectory& traj, std::size_t j) {
    return chi_field(traj.u[j], traj.w[j], chi_floor(traj));
}

inline double max_nodal_jump(const GridField& f) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) m = std::max(m, std::abs(f[i + 1] - f[i]));
    return m;
}

/// max_i |chi_{i+1} - chi_i| per snapshot.
inline std::vector<double> chi_regularity(const Trajectory& traj) {
    std::vector<double> out;
    for (std::size_t j = 0; j <= traj.steps(); ++j) out.push_back(max_nodal_jump(chi_at(traj, j)));
    return out;
}

struct MomentBalance {
    double lhs = 0.0;  // ∫ x^2 u(t) - ∫ x^2 u_0
    double rhs = 0.0;  // ∫_0^t ∫ eta_u
};

/// Second-moment identity d/dt ∫x^2 u = ∫ eta_u at snapshot j.
inline MomentBalance second_moment_balance(const Trajectory& traj, std::size_t j) {
    auto x2 = [](double x) { return x * x; };
    MomentBalance b;
    b.lhs = integrate_weighted(traj.u[j], x2) - integrate_weighted(traj.u.front(), x2);
    for (std::size_t k = 1; k <= j; ++k) b.rhs += traj.dt * integrate(traj.w[k]);
    return b;
}

inline MomentBalance second_moment_balance(const Trajectory& traj) {
    return second_moment_balance(traj, traj.steps());
}

struct ReportTolerances {
    double mass_rel = 1e-12;
    double positivity = 1e-12;
    double linf = 1e-10;
    double energy = 1e-10;
    double total_variation = 1e-8;
    double contraction = 1e-10;
};

struct SnapshotRow {
    std::size_t index = 0;
    double t = 0.0;
    double mass = 0.0;
    double linf = 0.0;
    double energy = 0.0;
    double total_variation = 0.0;
    double min_u = 0.0;
    double boundary_u = 0.0;
    double w_linf = 0.0;
    double gradient_energy = 0.0;  // ∫(w')^2, the H^1 monitor
    double chi_jump = 0.0;
    std::optional<double> pair_l1;  // ||u_j - v_j||_1 when a pair is reported
};

struct Violation {
    std::string check;
    std::size_t index = 0;
    double value = 0.0;
    double limit = 0.0;
};

struct DiagnosticsReport {
    std::vector<SnapshotRow> rows;
    double mass_drift = 0.0;
    double dissipation_residual = 0.0;  // signed: Gamma(T) - Gamma(0) + (1/2)∫∫(eta')^2
    double max_step_energy_violation = 0.0;
    double max_chi_jump = 0.0;
    double max_gradient_energy = 0.0;
    std::vector<Violation> violations;

    bool ok() const { return violations.empty(); }
};

/// Collects every checkable invariant of a run; violations are report
/// content, tagged with the first offending snapshot index.
inline DiagnosticsReport invariant_report(const Trajectory& traj, const ReportTolerances& tol = {},
                                          const Trajectory* pair = nullptr) {
    DiagnosticsReport rep;
    const auto gamma = energy_trace(traj);
    const GridField& u0 = traj.u.front();
    const double mass0 = integrate(u0);
    const double linf0 = linf_norm(u0);
    const double tv0 = total_variation(u0);
    const bool nonneg0 = u0.min() >= 0.0;
    const double growth = traj.graph.growth_bound(linf0);
    const double floor = chi_floor(traj);
    if (pair && pair->steps() != traj.steps()) throw InvalidArgument("invariant_report: pair step mismatch");

    auto flag = [&](const char* check, std::size_t j, double value, double limit) {
        for (const auto& v : rep.violations)
            if (v.check == check) return;
        rep.violations.push_back({check, j, value, limit});
    };

    for (std::size_t j = 0; j <= traj.steps(); ++j) {
        const GridField& u = traj.u[j];
        SnapshotRow row;
        row.index = j;
        row.t = traj.times[j];
        row.mass = integrate(u);
        row.linf = linf_norm(u);
        row.energy = gamma[j];
        row.total_variation = total_variation(u);
        row.min_u = u.min();
        row.boundary_u = std::max(std::abs(u[0]), std::abs(u[u.size() - 1]));
        row.w_linf = linf_norm(traj.w[j]);
        row.gradient_energy = gradient_energy(traj.w[j]);
        row.chi_jump = max_nodal_jump(chi_field(u, traj.w[j], floor));
        if (pair) row.pair_l1 = l1_distance(u, pair->u[j]);

        const double drift = std::abs(row.mass - mass0);
        rep.mass_drift = std::max(rep.mass_drift, drift);
        if (drift > tol.mass_rel * std::abs(mass0)) flag("mass", j, drift, tol.mass_rel * std::abs(mass0));
        if (nonneg0 && row.min_u < -tol.positivity) flag("positivity", j, row.min_u, -tol.positivity);
        if (row.linf > linf0 + tol.linf) flag("linf", j, row.linf, linf0 + tol.linf);
        if (row.total_variation > tv0 + tol.total_variation)
            flag("total_variation", j, row.total_variation, tv0 + tol.total_variation);
        if (j > 0 && std::isfinite(growth) && row.w_linf > growth * linf0 + tol.linf)
            flag("w_growth", j, row.w_linf, growth * linf0 + tol.linf);
        if (j > 0) {
            if (gamma[j] > gamma[j - 1] + tol.energy) flag("energy_monotone", j, gamma[j] - gamma[j - 1], tol.energy);
            const double step = gamma[j] + 0.5 * traj.dt * row.gradient_energy - gamma[j - 1];
            rep.max_step_energy_violation = std::max(rep.max_step_energy_violation, step);
            if (step > tol.energy) flag("step_energy", j, step, tol.energy);
            rep.max_chi_jump = std::max(rep.max_chi_jump, row.chi_jump);
            rep.max_gradient_energy = std::max(rep.max_gradient_energy, row.gradient_energy);
            if (pair) {
                const double prev = *rep.rows.back().pair_l1;
                if (*row.pair_l1 > prev + tol.contraction)
                    flag("contraction", j, *row.pair_l1 - prev, tol.contraction);
            }
        }
        rep.rows.push_back(row);
    }
    rep.dissipation_residual = dissipation_signed_residual(traj);
    if (rep.dissipation_residual > tol.energy)
        flag("dissipation_inequality", traj.steps(), rep.dissipation_residual, tol.energy);
    return rep;
}

inline nlohmann::ordered_json row_json(const SnapshotRow& r) {
    nlohmann::ordered_json j;
    j["index"] = r.index;
    j["t"] = r.t;
    j["mass"] = r.mass;
    j["linf"] = r.linf;
    j["energy"] = r.energy;
    j["total_variation"] = r.total_variation;
    j["min_u"] = r.min_u;
    j["boundary_u"] = r.boundary_u;
    j["w_linf"] = r.w_linf;
    j["gradient_energy"] = r.gradient_energy;
    j["chi_jump"] = r.chi_jump;
    if (r.pair_l1) j["pair_l1"] = *r.pair_l1;
    return j;
}

inline nlohmann::ordered_json summary_json(const DiagnosticsReport& rep) {
    nlohmann::ordered_json j;
    j["mass_drift"] = rep.mass_drift;
    j["dissipation_residual"] = rep.dissipation_residual;
    j["max_step_energy_violation"] = rep.max_step_energy_violation;
    j["max_chi_jump"] = rep.max_chi_jump;
    j["max_gradient_energy"] = rep.max_gradient_energy;
    j["ok"] = rep.ok();
    auto& v = j["violations"] = nlohmann::ordered_json::array();
    for (const auto& viol : rep.violations)
        v.push_back({{"check", viol.check}, {"index", viol.index}, {"value", viol.value}, {"limit", viol.limit}});
    return j;
}

/// One JSON object per snapshot followed by a `{"summary": ...}` line.
inline std::string report_jsonl(const DiagnosticsReport& rep) {
    std::string out;
    for (const auto& r : rep.rows) out += row_json(r).dump() + "\n";
    out += nlohmann::ordered_json{{"summary", summary_json(rep)}}.dump() + "\n";
    return out;
}

inline std::string report_csv(const DiagnosticsReport& rep) {
    std::string out = "index,t,mass,linf,energy,total_variation,min_u,boundary_u,w_linf,gradient_energy,chi_jump\n";
    for (const auto& r : rep.rows) {
        out += std::to_string(r.index);
        for (double v : {r.t, r.mass, r.linf, r.energy, r.total_variation, r.min_u, r.boundary_u, r.w_linf,
                         r.gradient_energy, r.chi_jump}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

}  // namespace degdiff
