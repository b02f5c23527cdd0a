#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>

#include "degdiff/errors.hpp"
#include "degdiff/grid_field.hpp"
#include "degdiff/semigroup.hpp"

namespace degdiff {

/// Closed-form reference solution u(t, x).
struct ExactSolution {
    enum class Kind { heat, barenblatt, stationary };

    Kind kind = Kind::heat;
    std::map<std::string, double> parameters;
    std::function<double(double, double)> evaluate;

    double operator()(double t, double x) const { return evaluate(t, x); }
    GridField sample(const Grid& grid, double t) const {
        return GridField::sample(grid, [&](double x) { return evaluate(t, x); });
    }
    static const char* kind_name(Kind k) {
        switch (k) {
            case Kind::heat: return "heat";
            case Kind::barenblatt: return "barenblatt";
            case Kind::stationary: return "stationary";
        }
        return "?";
    }
};

/// Density of N(0, sigma0^2 + t): u_t = u''/2 started from N(0, sigma0^2).
inline double heat_exact(double sigma0, double t, double x) {
    if (!(sigma0 > 0.0)) throw InvalidArgument("heat_exact: sigma0 must be positive");
    const double var = sigma0 * sigma0 + t;
    return std::exp(-0.5 * x * x / var) / std::sqrt(2.0 * std::numbers::pi * var);
}

inline ExactSolution heat_solution(double sigma0) {
    if (!(sigma0 > 0.0)) throw InvalidArgument("heat_solution: sigma0 must be positive");
    return {ExactSolution::Kind::heat, {{"sigma0", sigma0}},
            [sigma0](double t, double x) { return heat_exact(sigma0, t, x); }};
}

/// Source-type solution of u_t = (1/2)(|u|^{m-1} u)'' with mass M.
///
/// In the rescaled time s = t/2 it is the classical profile
///   U(s, x) = s^{-a} (C - k x^2 s^{-2a})_+^{1/(m-1)},
///   a = 1/(m+1),  k = a (m-1) / (2m),
/// and C is fixed by  M = C^{p+1/2} k^{-1/2} B(1/2, p+1),  p = 1/(m-1).
class Barenblatt {
public:
    Barenblatt(double m, double mass) : m_(m), mass_(mass) {
        if (!(m > 1.0)) throw InvalidArgument("barenblatt: exponent m must be > 1");
        if (!(mass > 0.0)) throw InvalidArgument("barenblatt: mass must be positive");
        alpha_ = 1.0 / (m + 1.0);
        kappa_ = alpha_ * (m - 1.0) / (2.0 * m);
        p_ = 1.0 / (m - 1.0);
        const double beta_fn = std::exp(std::lgamma(0.5) + std::lgamma(p_ + 1.0) - std::lgamma(p_ + 1.5));
        constant_ = std::pow(mass * std::sqrt(kappa_) / beta_fn, 1.0 / (p_ + 0.5));
    }

    double exponent() const { return m_; }
    double mass() const { return mass_; }
    double alpha() const { return alpha_; }
    double kappa() const { return kappa_; }
    double constant() const { return constant_; }

    double operator()(double t, double x) const {
        if (!(t > 0.0)) throw InvalidArgument("barenblatt: t must be positive");
        const double s = 0.5 * t;
        const double sa = std::pow(s, alpha_);
        const double base = constant_ - kappa_ * x * x / (sa * sa);
        if (base <= 0.0) return 0.0;
        return std::pow(base, p_) / sa;
    }

    /// Position of the free boundary |x| = s^a sqrt(C/k).
    double front(double t) const { return std::pow(0.5 * t, alpha_) * std::sqrt(constant_ / kappa_); }

private:
    double m_, mass_, alpha_ = 0.0, kappa_ = 0.0, p_ = 0.0, constant_ = 0.0;
};

inline double barenblatt(double m, double mass, double t, double x) { return Barenblatt(m, mass)(t, x); }

inline ExactSolution barenblatt_solution(double m, double mass) {
    const Barenblatt b(m, mass);
    return {ExactSolution::Kind::barenblatt, {{"m", m}, {"mass", mass}},
            [b](double t, double x) { return b(t, x); }};
}

/// Data below the threshold of u H(u - e_c) do not move: beta(u0) = {0}.
inline ExactSolution stationary_subcritical(double e_c, const GridField& u0) {
    if (!(linf_norm(u0) < e_c))
        throw InvalidArgument("stationary_subcritical: need ||u0||_inf < e_c");
    return {ExactSolution::Kind::stationary, {{"e_c", e_c}},
            [u0](double, double x) { return interpolate(u0, x); }};
}

/// Samples an exact solution on the solver's time grid, with w = beta°(u),
/// so it can be fed to the diagnostics as if it were a computed run.
inline Trajectory trajectory_from_exact(const ExactSolution& exact, const MonotoneGraph& g, const Grid& grid,
                                        double t0, double T, std::size_t steps) {
    Trajectory traj{g, T / static_cast<double>(steps), {}, {}, {}, 0, 0.0};
    for (std::size_t j = 0; j <= steps; ++j) {
        const double t = T * static_cast<double>(j) / static_cast<double>(steps);
        traj.times.push_back(t);
        traj.u.push_back(exact.sample(grid, t0 + t));
        traj.w.push_back(minimal_section_field(g, traj.u.back()));
    }
    return traj;
}

}  // namespace degdiff
