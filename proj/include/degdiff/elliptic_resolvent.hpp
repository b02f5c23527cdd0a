#pragma once

// One application of J_lambda = (I + lambda A)^{-1}: the discrete inclusion
//
//   u_i + lambda*delta*w_i - (lambda / 2h^2)(w_{i+1} - 2 w_i + w_{i-1}) = f_i,
//   w_i in beta(u_i),
//
// with zero-flux ghost values (w_{-1} = w_0, w_n = w_{n-1}).
//
// Node i only sees its neighbours through r_i = f_i + kappa (w_{i-1} + w_{i+1}),
// kappa = lambda / 2h^2, and its own unknowns through the scalar inclusion
// u_i + c_i beta(u_i) ∋ r_i. We iterate on v_i = u_i + c_i w_i, from which
// (u_i, w_i) are recovered exactly by the scalar resolvent; the equation
// defect is then F_i(v) = v_i - kappa (w_{i-1} + w_{i+1}) - f_i.
//
// Nonlinear Gauss-Seidel is the plain fixed-point sweep v_i <- f_i + kappa(...).
// The default path runs a semismooth Newton iteration on F (tridiagonal
// Jacobian, backtracking on ||F||_2) and falls back to Gauss-Seidel sweeps
// whenever Newton stalls. On exit u is recomputed in flux form so that sum u = sum f holds to
// round-off when delta = 0.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "degdiff/errors.hpp"
#include "degdiff/grid_field.hpp"
#include "degdiff/monotone_graph.hpp"

namespace degdiff {

enum class EllipticMethod { newton, gauss_seidel };

struct EllipticOptions {
    double tol_abs = 1e-10;
    double tol_rel = 1e-10;
    long max_sweeps = 1'000'000;
    long max_newton = 100;
    EllipticMethod method = EllipticMethod::newton;
};

struct EllipticSolution {
    GridField u;
    GridField w;
    long iterations = 0;  // Newton steps + Gauss-Seidel sweeps
    double residual = 0.0;
};

namespace detail {

/// Thomas algorithm; sub[0] and sup[n-1] are ignored. Returns false on a zero pivot.
inline bool solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> rhs) {
    const std::size_t n = diag.size();
    std::vector<double> c(n);
    double denom = diag[0];
    if (denom == 0.0) return false;
    c[0] = sup[0] / denom;
    rhs[0] /= denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = diag[i] - sub[i] * c[i - 1];
        if (denom == 0.0 || !std::isfinite(denom)) return false;
        c[i] = i + 1 < n ? sup[i] / denom : 0.0;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
    return std::all_of(rhs.begin(), rhs.end(), [](double v) { return std::isfinite(v); });
}

class InclusionSystem {
public:
    InclusionSystem(const MonotoneGraph& g, const GridField& f, double lambda, double delta)
        : g_(g), f_(f), n_(f.size()), coeff_(n_), u_(n_), w_(n_), defect_(n_) {
        const double h = f.spacing();
        kappa_ = lambda / (2.0 * h * h);
        for (std::size_t i = 0; i < n_; ++i) {
            const double neighbours = (i == 0 || i + 1 == n_) ? 1.0 : 2.0;
            coeff_[i] = lambda * delta + kappa_ * neighbours;
        }
    }

    std::size_t size() const { return n_; }
    double kappa() const { return kappa_; }

    void recover(std::span<const double> v) {
        for (std::size_t i = 0; i < n_; ++i) {
            const ResolventPoint p = g_.resolvent(coeff_[i], v[i]);
            u_[i] = p.x;
            w_[i] = p.w;
        }
    }

    double neighbour_sum(std::size_t i) const {
        const double left = i > 0 ? w_[i - 1] : 0.0;
        const double right = i + 1 < n_ ? w_[i + 1] : 0.0;
        return left + right;
    }

    /// Updates defect_ from the current (u, w); returns max |F_i|.
    double evaluate(std::span<const double> v) {
        double worst = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            defect_[i] = v[i] - kappa_ * neighbour_sum(i) - f_[i];
            worst = std::max(worst, std::abs(defect_[i]));
        }
        return worst;
    }

    double defect_l2() const {
        double s = 0.0;
        for (double d : defect_) s += d * d;
        return std::sqrt(s);
    }

    /// One in-place Gauss-Seidel sweep over v.
    void sweep(std::span<double> v) {
        for (std::size_t i = 0; i < n_; ++i) {
            v[i] = f_[i] + kappa_ * neighbour_sum(i);
            const ResolventPoint p = g_.resolvent(coeff_[i], v[i]);
            u_[i] = p.x;
            w_[i] = p.w;
        }
    }

    /// Newton direction solving J d = -F with J = I - kappa N diag(dw/dv).
    bool newton_direction(std::span<const double> v, std::span<double> dir) const {
        std::vector<double> dw(n_), sub(n_, 0.0), diag(n_, 1.0), sup(n_, 0.0);
        for (std::size_t i = 0; i < n_; ++i)
            dw[i] = (1.0 - g_.resolvent_slope(coeff_[i], v[i])) / coeff_[i];
        for (std::size_t i = 0; i < n_; ++i) {
            if (i > 0) sub[i] = -kappa_ * dw[i - 1];
            if (i + 1 < n_) sup[i] = -kappa_ * dw[i + 1];
            dir[i] = -defect_[i];
        }
        return solve_tridiagonal(sub, diag, sup, dir);
    }

    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& w() const { return w_; }
    const std::vector<double>& coeff() const { return coeff_; }

private:
    const MonotoneGraph& g_;
    const GridField& f_;
    std::size_t n_;
    double kappa_ = 0.0;
    std::vector<double> coeff_, u_, w_, defect_;
};

}  // namespace detail

/// Solves u - (lambda/2) Δw + lambda*delta*w ∋ f, w in beta(u), zero flux at both ends.
///
/// `warm_w`, when given, is a guess for w (e.g. the previous time step).
/// Throws ConvergenceError if the defect does not drop below
/// tol_abs + tol_rel * ||f||_inf within the iteration budget.
inline EllipticSolution solve_inclusion(const MonotoneGraph& g, const GridField& f, double lambda,
                                        double delta = 0.0, const EllipticOptions& opt = {},
                                        std::span<const double> warm_w = {}) {
    if (!(lambda > 0.0)) throw InvalidArgument("solve_inclusion: lambda must be positive");
    if (!(delta >= 0.0)) throw InvalidArgument("solve_inclusion: delta must be non-negative");
    if (!f.all_finite()) throw InvalidArgument("solve_inclusion: data f must be finite");
    if (!warm_w.empty() && warm_w.size() != f.size())
        throw InvalidArgument("solve_inclusion: warm start has wrong size");

    detail::InclusionSystem sys(g, f, lambda, delta);
    const std::size_t n = sys.size();
    const double tol = opt.tol_abs + opt.tol_rel * linf_norm(f);

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        double nb = 0.0;
        if (!warm_w.empty()) {
            if (i > 0) nb += warm_w[i - 1];
            if (i + 1 < n) nb += warm_w[i + 1];
        }
        v[i] = f[i] + sys.kappa() * nb;
    }
    sys.recover(v);
    double residual = sys.evaluate(v);
    long iterations = 0;

    // Newton phases alternate with short Gauss-Seidel bursts: at kinks of the
    // resolvent the one-sided Jacobian may not give descent, and a few sweeps
    // move the iterate off the kink. Newton is pushed towards round-off level
    // (it is cheap there); only `tol` is required.
    const bool use_newton = opt.method == EllipticMethod::newton;
    const double polish = std::max(1e-4 * tol, 1e-15 * (1.0 + linf_norm(f)));
    std::vector<double> dir(use_newton ? n : 0), trial(use_newton ? n : 0);
    long sweeps = 0, newton_steps = 0;
    auto newton_phase = [&] {
        while (residual > polish && newton_steps < opt.max_newton) {
            ++newton_steps;
            ++iterations;
            if (!sys.newton_direction(v, dir)) return;
            const double merit = sys.defect_l2();
            double step = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 30 && !accepted; ++ls, step *= 0.5) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = v[i] + step * dir[i];
                sys.recover(trial);
                const double trial_res = sys.evaluate(trial);
                if (sys.defect_l2() <= (1.0 - 1e-4 * step) * merit) {
                    v.swap(trial);
                    residual = trial_res;
                    accepted = true;
                }
            }
            if (!accepted) {
                sys.recover(v);
                residual = sys.evaluate(v);
                return;
            }
        }
    };
    while (true) {
        if (use_newton) newton_phase();
        if (residual <= tol) break;
        const long burst = use_newton && newton_steps < opt.max_newton ? 8 : opt.max_sweeps;
        for (long b = 0; b < burst && residual > tol; ++b) {
            if (sweeps >= opt.max_sweeps)
                throw ConvergenceError("solve_inclusion: Gauss-Seidel did not converge", residual,
                                       iterations);
            sys.sweep(v);
            residual = sys.evaluate(v);
            ++sweeps;
            ++iterations;
        }
        if (residual <= tol) break;
    }

    // Flux form: u_i = f_i - lambda delta w_i + (F_{i+1/2} - F_{i-1/2}).
    const std::vector<double>& w = sys.w();
    std::vector<double> u(n);
    const double kappa = sys.kappa();
    for (std::size_t i = 0; i < n; ++i) {
        const double right = i + 1 < n ? kappa * (w[i + 1] - w[i]) : 0.0;
        const double left = i > 0 ? kappa * (w[i] - w[i - 1]) : 0.0;
        u[i] = f[i] - lambda * delta * w[i] + (right - left);
    }
    return EllipticSolution{GridField(f.grid(), std::move(u)), GridField(f.grid(), w), iterations,
                            residual};
}

/// Max over nodes of the distance of (u_i, w_i) from the graph, measured
/// along the resolvent ray: |u_i - J_c(u_i + c w_i)|.
inline double inclusion_defect(const MonotoneGraph& g, const GridField& u, const GridField& w,
                               double c = 1.0) {
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double x = g.resolvent(c, u[i] + c * w[i]).x;
        worst = std::max(worst, std::abs(x - u[i]));
    }
    return worst;
}

/// Max-norm defect of the discrete equation for a candidate solution.
inline double equation_defect(const GridField& f, const GridField& u, const GridField& w, double lambda,
                              double delta = 0.0) {
    const std::size_t n = f.size();
    const double h = f.spacing();
    const double kappa = lambda / (2.0 * h * h);
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double right = i + 1 < n ? w[i + 1] - w[i] : 0.0;
        const double left = i > 0 ? w[i] - w[i - 1] : 0.0;
        const double r = u[i] + lambda * delta * w[i] - kappa * (right - left) - f[i];
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

/// h * sum ((w_{i+1} - w_i)/h)^2
inline double gradient_energy(const GridField& w) {
    const double h = w.spacing();
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double d = (w[i + 1] - w[i]) / h;
        s += d * d;
    }
    return h * s;
}

/// h * sum j(v_i)
inline double potential_integral(const MonotoneGraph& g, const GridField& v) {
    std::vector<double> terms(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) terms[i] = g.potential(v[i]);
    return v.spacing() * detail::compensated_sum(terms);
}

struct EnergyCheck {
    double lhs = 0.0;  // ∫ j(u) - ∫ j(f)
    double rhs = 0.0;  // -(lambda/2) ∫ (w')^2
    bool holds(double tol) const { return lhs <= rhs + tol; }
};

inline EnergyCheck step_energy_check(const MonotoneGraph& g, const GridField& f,
                                     const EllipticSolution& sol, double lambda) {
    return {potential_integral(g, sol.u) - potential_integral(g, f),
            -0.5 * lambda * gradient_energy(sol.w)};
}

}  // namespace degdiff
