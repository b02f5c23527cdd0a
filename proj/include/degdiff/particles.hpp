#pragma once

// Particle realization of dY = chi_u(t, Y) dW with Law(Y_0) = u_0.
//
// Randomness is counter based: the k-th Gaussian of particle i is a pure
// function of (seed, i, k), so ensembles do not depend on how particles are
// split across workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <vector>

#include "degdiff/diagnostics.hpp"
#include "degdiff/errors.hpp"
#include "degdiff/grid_field.hpp"
#include "degdiff/monotone_graph.hpp"
#include "degdiff/semigroup.hpp"

namespace degdiff {

/// SplitMix64-based stream family: draw k of stream i is mix(key(seed, i) + k*gamma).
class CounterRng {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static constexpr std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(mix(seed ^ mix(stream * kGamma + kGamma))) {}

    std::uint64_t bits(std::uint64_t counter) const { return mix(key_ + counter * kGamma); }

    /// Uniform on (0, 1).
    double uniform(std::uint64_t counter) const {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller on draws 2k and 2k+1.
    double normal(std::uint64_t k) const {
        const double u1 = uniform(2 * k);
        const double u2 = uniform(2 * k + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::uint64_t key_;
};

struct ParticleOptions {
    bool stratified = true;       // quantiles (i - 1/2)/N shuffled by seed; else i.i.d.
    unsigned workers = 1;         // parallel chunks within a substep
    std::vector<std::size_t> record_steps;  // PDE step indices to keep; empty = all
};

/// Ensemble snapshots at PDE times.
struct EnsemblePath {
    std::uint64_t seed = 0;
    std::size_t particles = 0;
    std::vector<std::size_t> steps;
    std::vector<double> times;
    std::vector<std::vector<double>> positions;

    const std::vector<double>& at_step(std::size_t step) const {
        const auto it = std::find(steps.begin(), steps.end(), step);
        if (it == steps.end()) throw InvalidArgument("ensemble: step " + std::to_string(step) + " not recorded");
        return positions[static_cast<std::size_t>(it - steps.begin())];
    }
    const std::vector<double>& final() const { return positions.back(); }
};

namespace detail {

inline double reflect(double y, double L) {
    if (y >= -L && y <= L) return y;
    // fold onto [-L, L]
    const double period = 4.0 * L;
    double z = std::fmod(y + L, period);
    if (z < 0.0) z += period;
    return z <= 2.0 * L ? z - L : 3.0 * L - z;
}

inline std::vector<double> initial_positions(const GridField& u0, std::size_t N, std::uint64_t seed,
                                             bool stratified) {
    if (!(integrate(u0) > 0.0)) throw InvalidArgument("particles: initial density has empty support");
    std::vector<double> q(N);
    const CounterRng rng(seed, ~std::uint64_t{0});
    if (stratified) {
        for (std::size_t i = 0; i < N; ++i) q[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(N);
        for (std::size_t i = N; i > 1; --i) {
            const auto k = static_cast<std::size_t>(rng.bits(i) % i);
            std::swap(q[i - 1], q[k]);
        }
    } else {
        for (std::size_t i = 0; i < N; ++i) q[i] = rng.uniform(i);
    }
    return sample_inverse_cdf(u0, q);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    if (workers <= 1 || n < 2) {
        fn(std::size_t{0}, n);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::jthread> pool;
    for (std::size_t begin = 0; begin < n; begin += chunk)
        pool.emplace_back([&fn, begin, end = std::min(n, begin + chunk)] { fn(begin, end); });
}

inline bool should_record(const ParticleOptions& opt, std::size_t step) {
    return opt.record_steps.empty() ||
           std::find(opt.record_steps.begin(), opt.record_steps.end(), step) != opt.record_steps.end();
}

}  // namespace detail

/// Euler-Maruyama with chi from the PDE trajectory, frozen on each PDE step
/// (the coefficient on (t_{j-1}, t_j] comes from (u_j, w_j)), linear in x
/// between nodes; reflection at +-L.
inline EnsemblePath simulate_coupled(const Trajectory& traj, std::size_t N, std::size_t substeps,
                                     std::uint64_t seed, const ParticleOptions& opt = {}) {
    if (N < 1) throw InvalidArgument("simulate_coupled: need at least one particle");
    if (substeps < 1) throw InvalidArgument("simulate_coupled: need at least one substep");
    const double L = traj.grid().half_width();
    std::vector<double> y = detail::initial_positions(traj.u.front(), N, seed, opt.stratified);

    EnsemblePath path{seed, N, {}, {}, {}};
    auto record = [&](std::size_t j) {
        if (!detail::should_record(opt, j)) return;
        path.steps.push_back(j);
        path.times.push_back(traj.times[j]);
        path.positions.push_back(y);
    };
    record(0);

    const double sdt = std::sqrt(traj.dt / static_cast<double>(substeps));
    for (std::size_t j = 1; j <= traj.steps(); ++j) {
        const GridField chi = chi_at(traj, j);
        detail::parallel_for(N, opt.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const CounterRng rng(seed, i);
                double yi = y[i];
                for (std::size_t s = 0; s < substeps; ++s) {
                    const std::uint64_t k = (j - 1) * substeps + s;
                    yi = detail::reflect(yi + interpolate(chi, yi) * sdt * rng.normal(k), L);
                }
                y[i] = yi;
            }
        });
        record(j);
    }
    return path;
}

/// Gaussian KDE of a sample evaluated on the grid nodes (linear binning,
/// kernel truncated at 6 bandwidths, zero-flux images ignored).
inline GridField kde_on_grid(std::span<const double> sample, const Grid& grid, double bandwidth) {
    if (!(bandwidth > 0.0)) throw InvalidArgument("kde: bandwidth must be positive");
    const std::size_t n = grid.size();
    const double h = grid.spacing();
    std::vector<double> bins(n, 0.0);
    for (double y : sample) {
        const double s = std::clamp((y - grid.node(0)) / h, 0.0, static_cast<double>(n - 1));
        const auto i = std::min(static_cast<std::size_t>(s), n - 2);
        const double t = s - static_cast<double>(i);
        bins[i] += 1.0 - t;
        bins[i + 1] += t;
    }
    const auto reach = static_cast<std::size_t>(std::ceil(6.0 * bandwidth / h));
    std::vector<double> kernel(std::min(reach, n) + 1);
    for (std::size_t d = 0; d < kernel.size(); ++d) {
        const double z = static_cast<double>(d) * h / bandwidth;
        kernel[d] = std::exp(-0.5 * z * z) / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
    }
    GridField out(grid);
    const double norm = 1.0 / static_cast<double>(sample.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (bins[i] == 0.0) continue;
        const std::size_t lo = i >= kernel.size() - 1 ? i - (kernel.size() - 1) : 0;
        const std::size_t hi = std::min(n - 1, i + kernel.size() - 1);
        for (std::size_t k = lo; k <= hi; ++k) out[k] += bins[i] * norm * kernel[k > i ? k - i : i - k];
    }
    return out;
}

/// 1.06 * std * N^{-1/5}
inline double rule_of_thumb_bandwidth(std::span<const double> sample) {
    const double n = static_cast<double>(sample.size());
    const double mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
    double ss = 0.0;
    for (double y : sample) ss += (y - mean) * (y - mean);
    const double sd = std::sqrt(ss / std::max(1.0, n - 1.0));
    return 1.06 * sd * std::pow(n, -0.2);
}

struct SelfConsistentOptions {
    std::optional<double> bandwidth;  // unset: rule of thumb, recomputed every step
    double eps = 0.0;                 // > 0: use Phi_eps via beta + eps*id
    ParticleOptions particles;
};

/// Interacting-particle version: the coefficient is Phi(û(Y)) with û the KDE
/// of the current ensemble, refreshed once per step.
inline EnsemblePath simulate_selfconsistent(const MonotoneGraph& g, const GridField& u0, double T,
                                            std::size_t steps, std::size_t N, std::uint64_t seed,
                                            const SelfConsistentOptions& opt = {}) {
    if (opt.bandwidth && !(*opt.bandwidth > 0.0))
        throw InvalidArgument("simulate_selfconsistent: bandwidth must be positive");
    if (!(T > 0.0) || steps < 1) throw InvalidArgument("simulate_selfconsistent: need T > 0 and steps >= 1");
    if (N < 2) throw InvalidArgument("simulate_selfconsistent: need at least two particles");
    const MonotoneGraph graph = opt.eps > 0.0 ? regularize(g, opt.eps) : g;
    const Grid& grid = u0.grid();
    const double L = grid.half_width();
    const double dt = T / static_cast<double>(steps);
    const double sdt = std::sqrt(dt);
    const ParticleOptions& popt = opt.particles;

    std::vector<double> y = detail::initial_positions(u0, N, seed, popt.stratified);
    EnsemblePath path{seed, N, {}, {}, {}};
    auto record = [&](std::size_t j) {
        if (!detail::should_record(popt, j)) return;
        path.steps.push_back(j);
        path.times.push_back(T * static_cast<double>(j) / static_cast<double>(steps));
        path.positions.push_back(y);
    };
    record(0);

    for (std::size_t j = 1; j <= steps; ++j) {
        const double bw = opt.bandwidth ? *opt.bandwidth : rule_of_thumb_bandwidth(y);
        const GridField density = kde_on_grid(y, grid, bw);
        detail::parallel_for(N, popt.workers, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const CounterRng rng(seed, i);
                const double coeff = graph.phi_section(interpolate(density, y[i]));
                y[i] = detail::reflect(y[i] + coeff * sdt * rng.normal(j - 1), L);
            }
        });
        record(j);
    }
    return path;
}

struct LawComparison {
    double t = 0.0;
    double ks = 0.0;
    double wasserstein1 = 0.0;
    double histogram_l1 = 0.0;
    std::size_t sample_size = 0;
};

/// Distances between an ensemble and a nodal density.
inline LawComparison law_distance(std::span<const double> sample, const GridField& density, double t = 0.0) {
    if (sample.empty()) throw InvalidArgument("law_distance: empty sample");
    std::vector<double> y(sample.begin(), sample.end());
    std::sort(y.begin(), y.end());
    const DensityCdf cdf(density);
    const auto N = static_cast<double>(y.size());
    LawComparison out{t, 0.0, 0.0, 0.0, y.size()};
    double w1 = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double F = cdf(y[i]);
        const double di = static_cast<double>(i);
        out.ks = std::max({out.ks, (di + 1.0) / N - F, F - di / N});
        w1 += std::abs(y[i] - cdf.quantile((di + 0.5) / N));
    }
    out.wasserstein1 = w1 / N;

    const Grid& g = density.grid();
    const double h = g.spacing();
    std::vector<double> counts(g.size(), 0.0);
    for (double v : y) {
        const auto cell = static_cast<long>(std::floor((v + g.half_width()) / h));
        counts[static_cast<std::size_t>(std::clamp(cell, 0L, static_cast<long>(g.size()) - 1))] += 1.0;
    }
    const double mass = cdf.total();
    double l1 = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) l1 += std::abs(counts[i] / (N * h) - std::max(density[i], 0.0) / mass);
    out.histogram_l1 = h * l1;
    return out;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(x.size()) -
                                 static_cast<double>(j) / static_cast<double>(y.size())));
    }
    return d;
}

/// W1 between two empirical laws: ∫ |F_a - F_b| dx.
inline double wasserstein1(std::span<const double> a, std::span<const double> b) {
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<double> knots(x);
    knots.insert(knots.end(), y.begin(), y.end());
    std::sort(knots.begin(), knots.end());
    double w = 0.0;
    std::size_t i = 0, j = 0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        while (i < x.size() && x[i] <= knots[k]) ++i;
        while (j < y.size() && y[j] <= knots[k]) ++j;
        const double Fa = static_cast<double>(i) / static_cast<double>(x.size());
        const double Fb = static_cast<double>(j) / static_cast<double>(y.size());
        w += std::abs(Fa - Fb) * (knots[k + 1] - knots[k]);
    }
    return w;
}

struct SampleMoments {
    double mean = 0.0;
    double variance = 0.0;
    double stddev = 0.0;
};

inline SampleMoments sample_moments(std::span<const double> y) {
    const auto n = static_cast<double>(y.size());
    SampleMoments m;
    m.mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : y) ss += (v - m.mean) * (v - m.mean);
    m.variance = ss / n;
    m.stddev = std::sqrt(m.variance);
    return m;
}

struct MomentRow {
    double t = 0.0;
    double variance_gain = 0.0;  // Var(Y_t) - Var(Y_0)
    double eta_integral = 0.0;   // ∫_0^t ∫ eta_u
    double standard_error = 0.0; // of E[Y_t^2 - Y_0^2]
    double mean_drift = 0.0;     // mean(Y_t) - mean(Y_0)
    double mean_bound = 0.0;     // 4 std(Y_t) / sqrt(N)
};

/// Variance growth of the ensemble against ∫∫eta, and the martingale mean check.
inline std::vector<MomentRow> moment_check(const EnsemblePath& path, const Trajectory& traj) {
    std::vector<MomentRow> rows;
    const auto& y0 = path.positions.front();
    const auto m0 = sample_moments(y0);
    const auto N = static_cast<double>(y0.size());
    for (std::size_t k = 0; k < path.steps.size(); ++k) {
        const auto& y = path.positions[k];
        const auto m = sample_moments(y);
        MomentRow r;
        r.t = path.times[k];
        r.variance_gain = m.variance - m0.variance;
        r.eta_integral = second_moment_balance(traj, path.steps[k]).rhs;
        std::vector<double> d(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) d[i] = y[i] * y[i] - y0[i] * y0[i];
        r.standard_error = sample_moments(d).stddev / std::sqrt(N);
        r.mean_drift = m.mean - m0.mean;
        r.mean_bound = 4.0 * m.stddev / std::sqrt(N);
        rows.push_back(r);
    }
    return rows;
}

struct IncrementMoment {
    double lag = 0.0;
    double fourth_moment = 0.0;   // E|Y_t - Y_{t-lag}|^4
    double standard_error = 0.0;
    double bound = 0.0;           // 3 c^2 lag^2 with c the growth constant
};

/// Fourth moments of increments ending at the last recorded time, for every
/// recorded start time whose lag is a dyadic fraction of the horizon.
inline std::vector<IncrementMoment> increment_fourth_moments(const EnsemblePath& path, double growth_constant) {
    std::vector<IncrementMoment> out;
    const std::size_t last = path.steps.back();
    const auto& yT = path.positions.back();
    const double T = path.times.back();
    for (std::size_t k = 0; k + 1 < path.steps.size(); ++k) {
        const std::size_t lag_steps = last - path.steps[k];
        if (lag_steps == 0 || (last % lag_steps) != 0 || ((last / lag_steps) & (last / lag_steps - 1)) != 0)
            continue;
        const auto& ys = path.positions[k];
        std::vector<double> d4(yT.size());
        for (std::size_t i = 0; i < yT.size(); ++i) {
            const double d = yT[i] - ys[i];
            d4[i] = d * d * d * d;
        }
        const auto m = sample_moments(d4);
        const double lag = T - path.times[k];
        out.push_back({lag, m.mean, m.stddev / std::sqrt(static_cast<double>(d4.size())),
                       3.0 * growth_constant * growth_constant * lag * lag});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.lag > b.lag; });
    return out;
}

}  // namespace degdiff
