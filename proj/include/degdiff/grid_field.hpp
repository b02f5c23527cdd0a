#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "degdiff/errors.hpp"
#include "degdiff/format.hpp"

namespace degdiff {

/// Uniform cell-centred grid on [-L, L]: x_i = -L + (i + 1/2) h, h = 2L/n.
class Grid {
public:
    Grid(double half_width, std::size_t cells) : half_width_(half_width), cells_(cells) {
        if (!(half_width > 0.0) || !std::isfinite(half_width))
            throw InvalidArgument("grid: half-width L must be positive and finite");
        if (cells < 3) throw InvalidArgument("grid: need at least 3 cells");
        spacing_ = 2.0 * half_width / static_cast<double>(cells);
    }

    double half_width() const { return half_width_; }
    std::size_t size() const { return cells_; }
    double spacing() const { return spacing_; }
    double node(std::size_t i) const {
        return -half_width_ + (static_cast<double>(i) + 0.5) * spacing_;
    }
    std::vector<double> nodes() const {
        std::vector<double> x(cells_);
        for (std::size_t i = 0; i < cells_; ++i) x[i] = node(i);
        return x;
    }

    bool operator==(const Grid&) const = default;

private:
    double half_width_;
    std::size_t cells_;
    double spacing_;
};

/// Nodal values of a function on a Grid.
class GridField {
public:
    explicit GridField(Grid grid, double fill = 0.0) : grid_(grid), values_(grid.size(), fill) {}
    GridField(Grid grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
        if (values_.size() != grid_.size())
            throw InvalidArgument("grid field: value count does not match grid size");
        if (!all_finite()) throw InvalidArgument("grid field: values must be finite");
    }

    static GridField sample(Grid grid, const std::function<double(double)>& fn) {
        GridField f(grid);
        for (std::size_t i = 0; i < grid.size(); ++i) f[i] = fn(grid.node(i));
        return f;
    }

    const Grid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    double spacing() const { return grid_.spacing(); }

    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    const std::vector<double>& data() const { return values_; }

    bool all_finite() const {
        return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
    }
    double min() const { return *std::min_element(values_.begin(), values_.end()); }
    double max() const { return *std::max_element(values_.begin(), values_.end()); }

    bool operator==(const GridField&) const = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

namespace detail {

inline void require_same_grid(const GridField& a, const GridField& b, const char* op) {
    if (!(a.grid() == b.grid())) throw InvalidArgument(std::string(op) + ": fields live on different grids");
}

/// Neumaier-compensated sum in index order.
inline double compensated_sum(std::span<const double> v) {
    double sum = 0.0, comp = 0.0;
    for (double x : v) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) comp += (sum - t) + x;
        else comp += (x - t) + sum;
        sum = t;
    }
    return sum + comp;
}

}  // namespace detail

/// Midpoint rule h * sum v_i.
inline double integrate(const GridField& v) {
    return v.spacing() * detail::compensated_sum(v.values());
}

/// h * sum phi(x_i) v_i, e.g. moments.
inline double integrate_weighted(const GridField& v, const std::function<double(double)>& phi) {
    std::vector<double> terms(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) terms[i] = phi(v.grid().node(i)) * v[i];
    return v.spacing() * detail::compensated_sum(terms);
}

inline double total_variation(const GridField& v) {
    double tv = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) tv += std::abs(v[i + 1] - v[i]);
    return tv;
}

inline double l1_distance(const GridField& a, const GridField& b) {
    detail::require_same_grid(a, b, "l1_distance");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::abs(a[i] - b[i]);
    return a.spacing() * detail::compensated_sum(d);
}

inline double l1_norm(const GridField& a) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = std::abs(a[i]);
    return a.spacing() * detail::compensated_sum(d);
}

inline double linf_norm(const GridField& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

inline double linf_distance(const GridField& a, const GridField& b) {
    detail::require_same_grid(a, b, "linf_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline double l2_inner(const GridField& a, const GridField& b) {
    detail::require_same_grid(a, b, "l2_inner");
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) p[i] = a[i] * b[i];
    return a.spacing() * detail::compensated_sum(p);
}

/// CDF of a nodal density at the knots -L, x_0, ..., x_{n-1}, L.
///
/// The density is linear between nodes and constant on the two end
/// half-cells, so the total equals integrate(density) exactly.
class DensityCdf {
public:
    explicit DensityCdf(const GridField& density) {
        const Grid& g = density.grid();
        const std::size_t n = g.size();
        const double h = g.spacing();
        knots_.reserve(n + 2);
        cdf_.reserve(n + 2);
        knots_.push_back(-g.half_width());
        cdf_.push_back(0.0);
        auto rho = [&](std::size_t i) { return std::max(density[i], 0.0); };
        double acc = 0.5 * h * rho(0);
        knots_.push_back(g.node(0));
        cdf_.push_back(acc);
        for (std::size_t i = 1; i < n; ++i) {
            acc += 0.5 * h * (rho(i - 1) + rho(i));
            knots_.push_back(g.node(i));
            cdf_.push_back(acc);
        }
        acc += 0.5 * h * rho(n - 1);
        knots_.push_back(g.half_width());
        cdf_.push_back(acc);
        total_ = acc;
        if (!(total_ > 0.0)) throw InvalidArgument("density has non-positive total mass");
    }

    double total() const { return total_; }

    /// Normalized CDF at x, linear between knots.
    double operator()(double x) const {
        if (x <= knots_.front()) return 0.0;
        if (x >= knots_.back()) return 1.0;
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - knots_.begin());
        const double t = (x - knots_[k - 1]) / (knots_[k] - knots_[k - 1]);
        return (cdf_[k - 1] + t * (cdf_[k] - cdf_[k - 1])) / total_;
    }

    /// Piecewise-linear inverse; q = 0 gives the left support edge, q = 1 the right one.
    double quantile(double q) const {
        const double target = std::clamp(q, 0.0, 1.0) * total_;
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), target);
        if (it == cdf_.end()) {
            const auto first_full = std::lower_bound(cdf_.begin(), cdf_.end(), total_);
            return knots_[static_cast<std::size_t>(first_full - cdf_.begin())];
        }
        const std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
        if (k == 0) return knots_.front();
        const double t = (target - cdf_[k - 1]) / (cdf_[k] - cdf_[k - 1]);
        return knots_[k - 1] + t * (knots_[k] - knots_[k - 1]);
    }

    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return cdf_; }

private:
    std::vector<double> knots_, cdf_;
    double total_ = 0.0;
};

inline std::vector<double> sample_inverse_cdf(const GridField& density, std::span<const double> quantiles) {
    if (density.min() < 0.0 && density.min() < -1e-12 * linf_norm(density))
        throw InvalidArgument("sample_inverse_cdf: density has negative values");
    const DensityCdf cdf(density);
    std::vector<double> out(quantiles.size());
    for (std::size_t k = 0; k < quantiles.size(); ++k) out[k] = cdf.quantile(quantiles[k]);
    return out;
}

/// Linear interpolation of nodal values, constant on the end half-cells.
inline double interpolate(const GridField& f, double x) {
    const Grid& g = f.grid();
    const double s = (x - g.node(0)) / g.spacing();
    if (s <= 0.0) return f[0];
    const double last = static_cast<double>(g.size() - 1);
    if (s >= last) return f[g.size() - 1];
    const auto i = static_cast<std::size_t>(s);
    const double t = s - static_cast<double>(i);
    return f[i] + t * (f[i + 1] - f[i]);
}

/// CSV with header `x,value`, shortest round-trip decimals.
inline std::string field_csv(const GridField& f) {
    std::string out = "x,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out += format_double(f.grid().node(i));
        out += ',';
        out += format_double(f[i]);
        out += '\n';
    }
    return out;
}

/// Reads `x,value` rows; the nodes must match the given grid.
inline GridField read_field_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open field CSV '" + path + "'");
    std::string line;
    std::getline(in, line);
    std::vector<double> values;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected `x,value`");
        const double x = std::stod(line.substr(0, comma));
        const double v = std::stod(line.substr(comma + 1));
        const std::size_t i = values.size();
        if (i >= grid.size() || std::abs(x - grid.node(i)) > 1e-9 * (1.0 + std::abs(x)))
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": node does not match grid");
        values.push_back(v);
    }
    if (values.size() != grid.size())
        throw InvalidArgument(path + ": expected " + std::to_string(grid.size()) + " rows");
    return GridField(grid, std::move(values));
}

}  // namespace degdiff
