#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <span>
#include <vector>

#include "degdiff/elliptic_resolvent.hpp"
#include "degdiff/grid_field.hpp"
#include "degdiff/monotone_graph.hpp"

namespace degdiff {

/// Discrete C0-solution of u_t = (1/2) beta(u)'' on the uniform time grid
/// t_j = j T / N: u_j = J_dt(u_{j-1}).
///
/// w[j] (j >= 1) is the selection from step j and is the value of eta_u on
/// (t_{j-1}, t_j]. w[0] is beta°(u_0), kept only so every snapshot has a
/// selection to show; no step uses it.
struct Trajectory {
    MonotoneGraph graph;
    double dt = 0.0;
    std::vector<double> times;
    std::vector<GridField> u;
    std::vector<GridField> w;
    long solver_iterations = 0;
    double max_residual = 0.0;

    std::size_t steps() const { return u.empty() ? 0 : u.size() - 1; }
    const Grid& grid() const { return u.front().grid(); }
    double final_time() const { return times.back(); }

    /// Index j with t in (t_{j-1}, t_j]; 0 for t <= 0.
    std::size_t step_at(double t) const {
        if (t <= 0.0) return 0;
        const auto k = static_cast<std::size_t>(std::ceil(t / dt - 1e-9));
        return std::min(k, steps());
    }
};

struct EvolveOptions {
    EllipticOptions elliptic;
};

inline GridField minimal_section_field(const MonotoneGraph& g, const GridField& u) {
    GridField w(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) w[i] = g.minimal_section(u[i]);
    return w;
}

/// Steps until T or until a solve fails; on failure the trajectory holds the
/// completed steps and `failure` the solver's error.
inline Trajectory evolve_partial(const MonotoneGraph& g, const GridField& u0, double T, std::size_t steps,
                                 const EvolveOptions& opt, std::optional<ConvergenceError>& failure) {
    if (!(T > 0.0)) throw InvalidArgument("evolve: final time T must be positive");
    if (steps < 1) throw InvalidArgument("evolve: need at least one step");
    if (!u0.all_finite()) throw InvalidArgument("evolve: initial datum must be finite");

    Trajectory traj{g, T / static_cast<double>(steps), {}, {}, {}, 0, 0.0};
    traj.times.reserve(steps + 1);
    traj.u.reserve(steps + 1);
    traj.w.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.u.push_back(u0);
    traj.w.push_back(minimal_section_field(g, u0));

    std::span<const double> warm;
    failure.reset();
    for (std::size_t j = 1; j <= steps; ++j) {
        try {
            EllipticSolution sol = solve_inclusion(g, traj.u.back(), traj.dt, 0.0, opt.elliptic, warm);
            traj.solver_iterations += sol.iterations;
            traj.max_residual = std::max(traj.max_residual, sol.residual);
            traj.times.push_back(T * static_cast<double>(j) / static_cast<double>(steps));
            traj.u.push_back(std::move(sol.u));
            traj.w.push_back(std::move(sol.w));
        } catch (const ConvergenceError& e) {
            failure = e;
            break;
        }
        warm = traj.w.back().values();
    }
    return traj;
}

inline Trajectory evolve(const MonotoneGraph& g, const GridField& u0, double T, std::size_t steps,
                         const EvolveOptions& opt = {}) {
    std::optional<ConvergenceError> failure;
    Trajectory traj = evolve_partial(g, u0, T, steps, opt, failure);
    if (failure) throw *failure;
    return traj;
}

struct ContinuationResult {
    std::vector<double> eps;
    std::vector<Trajectory> trajectories;
    /// sup_j ||u^(eps_k)_j - u^(eps_{k+1})_j||_1, one entry per consecutive pair.
    std::vector<double> sup_distances;
};

inline double sup_l1_distance(const Trajectory& a, const Trajectory& b) {
    if (a.steps() != b.steps()) throw InvalidArgument("trajectories have different step counts");
    double d = 0.0;
    for (std::size_t j = 0; j <= a.steps(); ++j) d = std::max(d, l1_distance(a.u[j], b.u[j]));
    return d;
}

/// One trajectory per eps in a decreasing list, each with beta + eps*id.
inline ContinuationResult epsilon_continuation(const MonotoneGraph& g, const GridField& u0, double T,
                                               std::size_t steps, const std::vector<double>& eps_list,
                                               const EvolveOptions& opt = {}) {
    if (eps_list.empty()) throw InvalidArgument("epsilon_continuation: empty eps list");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw InvalidArgument("epsilon_continuation: eps must be positive");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1]))
            throw InvalidArgument("epsilon_continuation: eps list must be strictly decreasing");
    }
    ContinuationResult out;
    out.eps = eps_list;
    for (double eps : eps_list) out.trajectories.push_back(evolve(regularize(g, eps), u0, T, steps, opt));
    for (std::size_t k = 0; k + 1 < out.trajectories.size(); ++k)
        out.sup_distances.push_back(sup_l1_distance(out.trajectories[k], out.trajectories[k + 1]));
    return out;
}

struct SelfConvergenceRow {
    std::size_t steps = 0;
    double error = 0.0;  // ||u_{N_k}(T) - u_{N_{k+1}}(T)||_1
    double order = 0.0;  // log2(e_{k-1} / e_k); NaN for the first row
};

/// Time-step self-convergence on a fixed grid.
inline std::vector<SelfConvergenceRow> self_convergence(const MonotoneGraph& g, const GridField& u0, double T,
                                                        const std::vector<std::size_t>& steps_list,
                                                        const EvolveOptions& opt = {}) {
    if (steps_list.size() < 2) throw InvalidArgument("self_convergence: need at least two step counts");
    for (std::size_t k = 1; k < steps_list.size(); ++k)
        if (steps_list[k] != 2 * steps_list[k - 1])
            throw InvalidArgument("self_convergence: step counts must double");
    std::vector<GridField> finals;
    for (std::size_t s : steps_list) finals.push_back(evolve(g, u0, T, s, opt).u.back());
    std::vector<SelfConvergenceRow> rows;
    for (std::size_t k = 0; k + 1 < finals.size(); ++k) {
        SelfConvergenceRow row{steps_list[k], l1_distance(finals[k], finals[k + 1]), std::nan("")};
        if (!rows.empty() && row.error > 0.0) row.order = std::log2(rows.back().error / row.error);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace degdiff
