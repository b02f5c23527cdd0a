#pragma once

// Generators and brute-force reference computations shared by the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "degdiff/grid_field.hpp"
#include "degdiff/monotone_graph.hpp"

namespace testing_support {

using namespace degdiff;

class Gen {
public:
    explicit Gen(std::uint64_t seed) : eng_(seed) {}

    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(eng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(eng_); }
    bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

    /// Monotone table through the origin, optionally with a filled jump at a positive x.
    GraphSpec table() {
        std::vector<std::pair<double, double>> pts;
        const int left = integer(1, 3), right = integer(1, 4);
        std::vector<double> xl, xr;
        for (int k = 0; k < left; ++k) xl.push_back(-uniform(0.1, 3.0));
        for (int k = 0; k < right; ++k) xr.push_back(uniform(0.1, 3.0));
        std::sort(xl.begin(), xl.end());
        std::sort(xr.begin(), xr.end());
        double y = 0.0;
        std::vector<double> yl(xl.size());
        for (std::size_t k = xl.size(); k-- > 0;) {
            y -= uniform(0.0, 2.0) * (k + 1 < xl.size() ? xl[k + 1] - xl[k] : -xl[k]);
            yl[k] = y;
        }
        for (std::size_t k = 0; k < xl.size(); ++k) pts.emplace_back(xl[k], yl[k]);
        pts.emplace_back(0.0, 0.0);
        y = 0.0;
        double prev = 0.0;
        const int jump_at = coin(0.6) && xr.size() > 1 ? integer(0, static_cast<int>(xr.size()) - 2) : -1;
        for (std::size_t k = 0; k < xr.size(); ++k) {
            y += uniform(0.0, 2.0) * (xr[k] - prev);
            pts.emplace_back(xr[k], y);
            if (static_cast<int>(k) == jump_at) {
                y += uniform(0.1, 1.0);
                pts.emplace_back(xr[k], y);
            }
            prev = xr[k];
        }
        // keep the outer segments non-vertical
        pts.emplace_back(pts.back().first + uniform(0.5, 2.0), pts.back().second + uniform(0.0, 2.0));
        pts.insert(pts.begin(), {pts.front().first - uniform(0.5, 2.0), pts.front().second - uniform(0.0, 2.0)});
        return GraphSpec::table(pts);
    }

    GraphSpec spec() {
        switch (integer(0, 3)) {
            case 0: return GraphSpec::linear(uniform(0.0, 3.0));
            case 1: return GraphSpec::heaviside(uniform(0.0, 2.0));
            case 2: return GraphSpec::power(uniform(1.0, 3.0));
            default: return table();
        }
    }

    MonotoneGraph graph() {
        MonotoneGraph g = build_graph(spec());
        if (coin(0.25)) g = regularize(g, uniform(0.01, 0.5));
        return g;
    }

    /// Non-negative datum made of a few bumps and plateaus.
    GridField field(const Grid& grid, double scale = 2.0) {
        const int pieces = integer(1, 4);
        std::vector<std::tuple<double, double, double, bool>> parts;
        const double L = grid.half_width();
        for (int k = 0; k < pieces; ++k)
            parts.emplace_back(uniform(-0.5 * L, 0.5 * L), uniform(0.05 * L, 0.3 * L), uniform(0.0, scale), coin());
        return GridField::sample(grid, [&](double x) {
            double v = 0.0;
            for (const auto& [c, w, h, box] : parts)
                v += box ? (std::abs(x - c) <= w ? h : 0.0) : h * std::exp(-(x - c) * (x - c) / (w * w));
            return v;
        });
    }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

/// Solves x + c*beta(x) ∋ r by plain bisection on the value intervals.
inline double brute_resolvent(const MonotoneGraph& g, double c, double r) {
    double lo = -1.0, hi = 1.0;
    while (lo + c * g.value_interval(lo).hi > r) lo *= 2.0;
    while (hi + c * g.value_interval(hi).lo < r) hi *= 2.0;
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const Interval v = g.value_interval(mid);
        if (mid + c * v.hi < r) lo = mid;
        else if (mid + c * v.lo > r) hi = mid;
        else return mid;
    }
    return 0.5 * (lo + hi);
}

/// Composite Simpson rule of the minimal section on [0, x], split at `breaks`.
inline double quadrature_potential(const MonotoneGraph& g, double x, std::vector<double> breaks = {}) {
    std::vector<double> knots{0.0, x};
    for (double b : breaks)
        if ((b > 0.0 && b < x) || (b < 0.0 && b > x)) knots.push_back(b);
    std::sort(knots.begin(), knots.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        const double a = knots[k], b = knots[k + 1];
        const int n = 2000;
        const double h = (b - a) / n;
        // interior-only evaluation keeps the endpoints of each piece off the jumps
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += g.minimal_section(a + (i + 0.5) * h);
        total += s * h;
    }
    return x >= 0.0 ? total : -total;
}

/// Dense Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A[i][k]) > std::abs(A[p][k])) p = i;
        std::swap(A[k], A[p]);
        std::swap(b[k], b[p]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A[i][k] / A[k][k];
            for (std::size_t j = k; j < n; ++j) A[i][j] -= f * A[k][j];
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < n; ++j) s -= A[k][j] * x[j];
        x[k] = s / A[k][k];
    }
    return x;
}

}  // namespace testing_support
