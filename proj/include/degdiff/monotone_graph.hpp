#pragma once

// Maximal monotone graphs on the real line and their scalar kernels.
//
// A graph is stored as a small immutable expression: one of the built-in
// kinds (linear, heaviside, power, table), optionally shifted by eps*id
// and/or inverted. Every node answers the same four questions exactly
// (value interval, resolvent, resolvent slope, potential), so everything
// downstream is written against MonotoneGraph only.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "degdiff/errors.hpp"
#include "degdiff/format.hpp"

namespace degdiff {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval [lo, hi]; empty when lo > hi.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return !(lo <= hi); }
    bool contains(double w, double tol = 0.0) const { return w >= lo - tol && w <= hi + tol; }
    double distance(double w) const {
        if (w < lo) return lo - w;
        if (w > hi) return w - hi;
        return 0.0;
    }
    /// Element of least absolute value.
    double least_abs() const {
        if (lo <= 0.0 && 0.0 <= hi) return 0.0;
        return lo > 0.0 ? lo : hi;
    }
    Interval operator+(double s) const { return {lo + s, hi + s}; }
    bool operator==(const Interval&) const = default;
};

/// Solution of x + c*w = r with w in beta(x).
struct ResolventPoint {
    double x = 0.0;
    double w = 0.0;
};

/// Serializable description of a built-in graph.
struct GraphSpec {
    enum class Kind { power, heaviside, linear, table };

    Kind kind = Kind::linear;
    double exponent = 1.0;   // power: beta(u) = |u|^(m-1) u
    double threshold = 0.0;  // heaviside: beta(u) = u H(u - e_c), odd extension
    double slope = 1.0;      // linear: beta(u) = a u
    std::vector<std::pair<double, double>> points;  // table breakpoints (x, y)

    static GraphSpec linear(double a = 1.0) {
        GraphSpec s;
        s.kind = Kind::linear;
        s.slope = a;
        return s;
    }
    static GraphSpec heaviside(double e_c) {
        GraphSpec s;
        s.kind = Kind::heaviside;
        s.threshold = e_c;
        return s;
    }
    static GraphSpec power(double m) {
        GraphSpec s;
        s.kind = Kind::power;
        s.exponent = m;
        return s;
    }
    static GraphSpec table(std::vector<std::pair<double, double>> pts) {
        GraphSpec s;
        s.kind = Kind::table;
        s.points = std::move(pts);
        return s;
    }

    static const char* kind_name(Kind k) {
        switch (k) {
            case Kind::power: return "power";
            case Kind::heaviside: return "heaviside";
            case Kind::linear: return "linear";
            case Kind::table: return "table";
        }
        return "?";
    }

    /// Throws InvalidArgument with a diagnostic when parameters are out of range.
    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        switch (kind) {
            case Kind::power:
                if (!finite(exponent) || exponent < 1.0)
                    throw InvalidArgument("power graph: exponent m must be >= 1, got " +
                                          format_double(exponent));
                break;
            case Kind::heaviside:
                if (!finite(threshold) || threshold < 0.0)
                    throw InvalidArgument("heaviside graph: threshold e_c must be >= 0, got " +
                                          format_double(threshold));
                break;
            case Kind::linear:
                if (!finite(slope) || slope < 0.0)
                    throw InvalidArgument("linear graph: slope a must be >= 0, got " +
                                          format_double(slope));
                break;
            case Kind::table: {
                if (points.size() < 2)
                    throw InvalidArgument("table graph: need at least two breakpoints");
                for (std::size_t k = 0; k < points.size(); ++k) {
                    if (!finite(points[k].first) || !finite(points[k].second))
                        throw InvalidArgument("table graph: non-finite breakpoint at index " +
                                              std::to_string(k));
                    if (k == 0) continue;
                    if (points[k].first < points[k - 1].first)
                        throw InvalidArgument("table graph: x must be non-decreasing (index " +
                                              std::to_string(k) + ")");
                    if (points[k].second < points[k - 1].second)
                        throw InvalidArgument("table graph: values must be non-decreasing (index " +
                                              std::to_string(k) + ")");
                    if (k >= 2 && points[k].first == points[k - 1].first &&
                        points[k].first == points[k - 2].first)
                        throw InvalidArgument("table graph: at most two breakpoints per x (index " +
                                              std::to_string(k) + ")");
                }
                if (points[0].first == points[1].first ||
                    points[points.size() - 1].first == points[points.size() - 2].first)
                    throw InvalidArgument("table graph: first and last segments must not be vertical");
                break;
            }
        }
    }

    /// `graph = { kind = "heaviside", e_c = 1.0 }`
    std::string to_text() const {
        std::ostringstream os;
        os << "graph = { kind = \"" << kind_name(kind) << "\"";
        switch (kind) {
            case Kind::power: os << ", m = " << format_double(exponent); break;
            case Kind::heaviside: os << ", e_c = " << format_double(threshold); break;
            case Kind::linear: os << ", a = " << format_double(slope); break;
            case Kind::table:
                os << ", points = [";
                for (std::size_t k = 0; k < points.size(); ++k) {
                    if (k) os << ", ";
                    os << "[" << format_double(points[k].first) << ", "
                       << format_double(points[k].second) << "]";
                }
                os << "]";
                break;
        }
        os << " }";
        return os.str();
    }

    bool operator==(const GraphSpec&) const = default;
};

namespace detail {

class GraphNode {
public:
    virtual ~GraphNode() = default;
    virtual Interval value_interval(double x) const = 0;
    /// x with x + c*beta(x) containing r.
    virtual double resolvent(double c, double r) const = 0;
    /// dx/dr of the resolvent (one-sided choice at kinks).
    virtual double resolvent_slope(double c, double r) const = 0;
    /// j(x) = integral of the minimal section from 0 to x.
    virtual double potential(double x) const = 0;
    /// sup |beta°(x)| / |x| over 0 < |x| <= radius.
    virtual double growth_bound(double radius) const = 0;
    /// inf beta°(x) / x over x != 0.
    virtual double coercivity() const = 0;
    /// lim beta°(x)/x as x -> 0+ (may be +inf).
    virtual double slope_at_zero() const = 0;
    virtual std::string describe() const = 0;
};

/// Bisection on the strictly increasing map x -> x + c*beta(x), stopping as
/// soon as r falls in x + c*[w-, w+] (a filled jump) or the bracket is
/// narrower than 1e-12, capped at 60 halvings.
inline double bisect_resolvent(const GraphNode& g, double c, double r) {
    double lo = std::min(0.0, r);
    double hi = std::max(0.0, r);
    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Interval iv = g.value_interval(mid);
        if (r < mid + c * iv.lo) {
            hi = mid;
        } else if (r > mid + c * iv.hi) {
            lo = mid;
        } else {
            return mid;
        }
    }
    return 0.5 * (lo + hi);
}

class LinearNode final : public GraphNode {
public:
    explicit LinearNode(double a) : a_(a) {}
    Interval value_interval(double x) const override { return {a_ * x, a_ * x}; }
    double resolvent(double c, double r) const override { return r / (1.0 + c * a_); }
    double resolvent_slope(double c, double) const override { return 1.0 / (1.0 + c * a_); }
    double potential(double x) const override { return 0.5 * a_ * x * x; }
    double growth_bound(double) const override { return a_; }
    double coercivity() const override { return a_; }
    double slope_at_zero() const override { return a_; }
    std::string describe() const override { return "linear(a=" + format_double(a_) + ")"; }

private:
    double a_;
};

// Odd extension of u H(u - e_c): zero on (-e_c, e_c), identity beyond,
// filled jumps [0, e_c] at e_c and [-e_c, 0] at -e_c.
class HeavisideNode final : public GraphNode {
public:
    explicit HeavisideNode(double e_c) : ec_(e_c) {}

    Interval value_interval(double x) const override {
        const double a = std::abs(x);
        if (a < ec_) return {0.0, 0.0};
        if (a > ec_) return {x, x};
        if (ec_ == 0.0) return {0.0, 0.0};
        return x > 0 ? Interval{0.0, ec_} : Interval{-ec_, 0.0};
    }
    double resolvent(double c, double r) const override {
        const double a = std::abs(r);
        double x;
        if (a < ec_) {
            x = a;
        } else if (a <= ec_ * (1.0 + c)) {
            x = ec_;
        } else {
            x = a / (1.0 + c);
        }
        return std::copysign(x, r);
    }
    double resolvent_slope(double c, double r) const override {
        const double a = std::abs(r);
        if (a < ec_) return 1.0;
        if (a <= ec_ * (1.0 + c) && ec_ > 0.0) return 0.0;
        return 1.0 / (1.0 + c);
    }
    double potential(double x) const override {
        const double a = std::abs(x);
        return a > ec_ ? 0.5 * (a * a - ec_ * ec_) : 0.0;
    }
    double growth_bound(double radius) const override { return radius >= ec_ ? 1.0 : 0.0; }
    double coercivity() const override { return ec_ > 0.0 ? 0.0 : 1.0; }
    double slope_at_zero() const override { return ec_ > 0.0 ? 0.0 : 1.0; }
    std::string describe() const override { return "heaviside(e_c=" + format_double(ec_) + ")"; }

private:
    double ec_;
};

// |u|^(m-1) u
class PowerNode final : public GraphNode {
public:
    explicit PowerNode(double m) : m_(m) {}

    Interval value_interval(double x) const override {
        const double v = eval(x);
        return {v, v};
    }
    double resolvent(double c, double r) const override {
        if (m_ == 1.0) return r / (1.0 + c);
        if (m_ == 2.0) {
            const double a = std::abs(r);
            return std::copysign(2.0 * a / (1.0 + std::sqrt(1.0 + 4.0 * c * a)), r);
        }
        return bisect_resolvent(*this, c, r);
    }
    double resolvent_slope(double c, double r) const override {
        const double x = resolvent(c, r);
        return 1.0 / (1.0 + c * m_ * std::pow(std::abs(x), m_ - 1.0));
    }
    double potential(double x) const override {
        return std::pow(std::abs(x), m_ + 1.0) / (m_ + 1.0);
    }
    double growth_bound(double radius) const override {
        return m_ == 1.0 ? 1.0 : std::pow(radius, m_ - 1.0);
    }
    double coercivity() const override { return m_ == 1.0 ? 1.0 : 0.0; }
    double slope_at_zero() const override { return m_ == 1.0 ? 1.0 : 0.0; }
    std::string describe() const override { return "power(m=" + format_double(m_) + ")"; }

private:
    double eval(double x) const { return std::copysign(std::pow(std::abs(x), m_), x); }
    double m_;
};

// Piecewise-linear interpolation of breakpoints; a repeated x is a filled
// jump; beyond the ends the first/last segment is extended.
class TableNode final : public GraphNode {
public:
    explicit TableNode(const std::vector<std::pair<double, double>>& pts) {
        for (const auto& [x, y] : pts) {
            xs_.push_back(x);
            ys_.push_back(y);
        }
        const std::size_t n = xs_.size();
        left_slope_ = (ys_[1] - ys_[0]) / (xs_[1] - xs_[0]);
        right_slope_ = (ys_[n - 1] - ys_[n - 2]) / (xs_[n - 1] - xs_[n - 2]);
        cumulative_.assign(n, 0.0);
        for (std::size_t k = 1; k < n; ++k)
            cumulative_[k] = cumulative_[k - 1] + 0.5 * (xs_[k] - xs_[k - 1]) * (ys_[k] + ys_[k - 1]);
        const Interval at0 = value_interval(0.0);
        if (at0.lo != 0.0 || at0.hi != 0.0)
            throw InvalidArgument("table graph: value set at 0 must be {0} (linear growth), got [" +
                                  format_double(at0.lo) + ", " + format_double(at0.hi) + "]");
        integral_at_zero_ = integral_from_left(0.0);
    }

    Interval value_interval(double x) const override {
        const std::size_t n = xs_.size();
        const auto it = std::lower_bound(xs_.begin(), xs_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs_.begin());
        if (k < n && xs_[k] == x) {
            std::size_t l = k;
            while (l + 1 < n && xs_[l + 1] == x) ++l;
            return {ys_[k], ys_[l]};
        }
        const double y = interpolate(x);
        return {y, y};
    }

    double resolvent(double c, double r) const override {
        const Located loc = locate(c, r);
        return loc.x;
    }
    double resolvent_slope(double c, double r) const override { return locate(c, r).slope; }

    double potential(double x) const override { return integral_from_left(x) - integral_at_zero_; }

    double growth_bound(double radius) const override {
        double best = 0.0;
        auto consider = [&](double x) {
            if (x == 0.0 || std::abs(x) > radius) return;
            const Interval iv = value_interval(x);
            best = std::max(best, std::max(std::abs(iv.lo), std::abs(iv.hi)) / std::abs(x));
        };
        for (double x : xs_) consider(x);
        if (std::isfinite(radius)) {
            consider(radius);
            consider(-radius);
        } else {
            best = std::max({best, left_slope_, right_slope_});
        }
        return best;
    }
    double coercivity() const override {
        double best = std::min(left_slope_, right_slope_);
        for (double x : xs_) {
            if (x == 0.0) continue;
            const double w = value_interval(x).least_abs();
            best = std::min(best, w / x);
        }
        return best;
    }
    double slope_at_zero() const override {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), 0.0);
        if (it == xs_.end()) return right_slope_;
        const double probe = 0.5 * *it;
        return interpolate(probe) / probe;
    }
    std::string describe() const override {
        return "table(" + std::to_string(xs_.size()) + " points)";
    }

private:
    struct Located {
        double x;
        double slope;
    };

    double interpolate(double x) const {
        const std::size_t n = xs_.size();
        if (x <= xs_[0]) return ys_[0] + left_slope_ * (x - xs_[0]);
        if (x >= xs_[n - 1]) return ys_[n - 1] + right_slope_ * (x - xs_[n - 1]);
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
        const double t = (x - xs_[k]) / (xs_[k + 1] - xs_[k]);
        return ys_[k] + t * (ys_[k + 1] - ys_[k]);
    }

    double integral_from_left(double x) const {
        const std::size_t n = xs_.size();
        if (x <= xs_[0]) return -0.5 * (xs_[0] - x) * (ys_[0] + interpolate(x));
        if (x >= xs_[n - 1])
            return cumulative_[n - 1] + 0.5 * (x - xs_[n - 1]) * (ys_[n - 1] + interpolate(x));
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t k = static_cast<std::size_t>(it - xs_.begin()) - 1;
        return cumulative_[k] + 0.5 * (x - xs_[k]) * (ys_[k] + interpolate(x));
    }

    // Exact solve of x + c*beta(x) = r: the knots s_k = x_k + c*y_k are
    // non-decreasing and the map is affine between them.
    Located locate(double c, double r) const {
        const std::size_t n = xs_.size();
        auto s = [&](std::size_t k) { return xs_[k] + c * ys_[k]; };
        if (r <= s(0)) {
            const double d = 1.0 + c * left_slope_;
            return {xs_[0] + (r - s(0)) / d, 1.0 / d};
        }
        if (r >= s(n - 1)) {
            const double d = 1.0 + c * right_slope_;
            return {xs_[n - 1] + (r - s(n - 1)) / d, 1.0 / d};
        }
        std::size_t lo = 0, hi = n - 1;  // s(lo) < r < s(hi)
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            if (s(mid) <= r) lo = mid; else hi = mid;
        }
        if (xs_[lo] == xs_[hi]) return {xs_[lo], 0.0};
        const double ds = s(hi) - s(lo);
        const double t = (r - s(lo)) / ds;
        return {xs_[lo] + t * (xs_[hi] - xs_[lo]), (xs_[hi] - xs_[lo]) / ds};
    }

    std::vector<double> xs_, ys_, cumulative_;
    double left_slope_ = 0.0, right_slope_ = 0.0, integral_at_zero_ = 0.0;
};

// beta + eps*id. The resolvent reduces to the inner one:
// x + c(beta(x) + eps x) = r  <=>  x + c/(1+c eps) beta(x) = r/(1+c eps).
class ShiftedNode final : public GraphNode {
public:
    ShiftedNode(std::shared_ptr<const GraphNode> inner, double eps)
        : inner_(std::move(inner)), eps_(eps) {}

    Interval value_interval(double x) const override { return inner_->value_interval(x) + eps_ * x; }
    double resolvent(double c, double r) const override {
        const double k = 1.0 + c * eps_;
        return inner_->resolvent(c / k, r / k);
    }
    double resolvent_slope(double c, double r) const override {
        const double k = 1.0 + c * eps_;
        return inner_->resolvent_slope(c / k, r / k) / k;
    }
    double potential(double x) const override { return inner_->potential(x) + 0.5 * eps_ * x * x; }
    double growth_bound(double radius) const override { return inner_->growth_bound(radius) + eps_; }
    double coercivity() const override { return inner_->coercivity() + eps_; }
    double slope_at_zero() const override { return inner_->slope_at_zero() + eps_; }
    std::string describe() const override {
        return inner_->describe() + " + " + format_double(eps_) + "*id";
    }

    const std::shared_ptr<const GraphNode>& inner() const { return inner_; }
    double eps() const { return eps_; }

private:
    std::shared_ptr<const GraphNode> inner_;
    double eps_;
};

// Graph reflection: w in inverse(x) iff x in beta(w).
class InverseNode final : public GraphNode {
public:
    explicit InverseNode(std::shared_ptr<const GraphNode> inner) : inner_(std::move(inner)) {}

    Interval value_interval(double w) const override {
        const double lo = boundary(w, true);
        const double hi = boundary(w, false);
        if (lo == kInf || hi == -kInf) return {kInf, -kInf};
        return {lo, hi};
    }
    // x + c*y = r with x in beta(y)  <=>  y + beta(y)/c = r/c
    double resolvent(double c, double r) const override {
        const double y = inner_->resolvent(1.0 / c, r / c);
        return r - c * y;
    }
    double resolvent_slope(double c, double r) const override {
        return 1.0 - inner_->resolvent_slope(1.0 / c, r / c);
    }
    // Legendre conjugate: j*(w) = u w - j(u) for any u in beta^{-1}(w).
    double potential(double w) const override {
        const Interval iv = value_interval(w);
        if (iv.empty()) return kInf;
        double u = iv.least_abs();
        if (!std::isfinite(u)) u = std::isfinite(iv.lo) ? iv.lo : iv.hi;
        return u * w - inner_->potential(u);
    }
    double growth_bound(double) const override {
        const double k = inner_->coercivity();
        return k > 0.0 ? 1.0 / k : kInf;
    }
    double coercivity() const override {
        const double g = inner_->growth_bound(kInf);
        return g > 0.0 ? 1.0 / g : kInf;
    }
    double slope_at_zero() const override {
        const double s = inner_->slope_at_zero();
        return s > 0.0 ? 1.0 / s : kInf;
    }
    std::string describe() const override { return "inverse(" + inner_->describe() + ")"; }

    const std::shared_ptr<const GraphNode>& inner() const { return inner_; }

private:
    // lower end: inf{u : sup beta(u) >= w}; upper end: sup{u : inf beta(u) <= w}
    double boundary(double w, bool lower) const {
        auto pred = [&](double u) {
            const Interval iv = inner_->value_interval(u);
            return lower ? iv.hi >= w : iv.lo > w;
        };
        // pred is monotone false -> true in u; bracket the switch point by
        // doubling, a: pred false, b: pred true
        double a = 0.0, b = 0.0;
        if (pred(0.0)) {
            a = -1.0;
            while (pred(a)) {
                b = a;
                a *= 2.0;
                if (a < -1e300) return -kInf;
            }
        } else {
            b = 1.0;
            while (!pred(b)) {
                a = b;
                b *= 2.0;
                if (b > 1e300) return kInf;
            }
        }
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            if (mid <= a || mid >= b) break;
            if (pred(mid)) b = mid; else a = mid;
        }
        return lower ? b : a;
    }

    std::shared_ptr<const GraphNode> inner_;
};

}  // namespace detail

/// Maximal monotone graph beta with 0 in beta(0). Immutable, cheap to copy.
class MonotoneGraph {
public:
    explicit MonotoneGraph(std::shared_ptr<const detail::GraphNode> node,
                           std::optional<GraphSpec> spec = std::nullopt, double eps = 0.0)
        : node_(std::move(node)), spec_(std::move(spec)), eps_(eps) {}

    Interval value_interval(double x) const { return node_->value_interval(x); }
    double minimal_section(double x) const { return node_->value_interval(x).least_abs(); }

    ResolventPoint resolvent(double c, double r) const {
        const double x = node_->resolvent(c, r);
        return {x, (r - x) / c};
    }
    double resolvent_slope(double c, double r) const { return node_->resolvent_slope(c, r); }

    double potential(double x) const { return node_->potential(x); }

    /// sqrt(beta°(x)/x) for x > 0, else 0.
    double phi_section(double x) const {
        if (!(x > 0.0)) return 0.0;
        const double w = minimal_section(x);
        return w > 0.0 ? std::sqrt(w / x) : 0.0;
    }

    double growth_bound(double radius) const { return node_->growth_bound(radius); }
    /// Global linear-growth constant c (+inf for superlinear kinds such as power m > 1).
    double growth_constant() const { return node_->growth_bound(kInf); }
    /// Diffusivity vanishes at zero density: lim_{u->0+} beta°(u)/u = 0.
    bool is_degenerate() const { return node_->slope_at_zero() == 0.0; }

    /// Built-in spec this graph came from, if it is an unmodified built-in.
    const std::optional<GraphSpec>& spec() const { return spec_; }
    /// Total eps of the eps*id regularization applied on top of spec().
    double regularization() const { return eps_; }
    std::string describe() const { return node_->describe(); }

    const std::shared_ptr<const detail::GraphNode>& node() const { return node_; }

private:
    std::shared_ptr<const detail::GraphNode> node_;
    std::optional<GraphSpec> spec_;
    double eps_ = 0.0;
};

inline MonotoneGraph build_graph(const GraphSpec& spec) {
    spec.validate();
    std::shared_ptr<const detail::GraphNode> node;
    switch (spec.kind) {
        case GraphSpec::Kind::linear: node = std::make_shared<detail::LinearNode>(spec.slope); break;
        case GraphSpec::Kind::heaviside:
            node = std::make_shared<detail::HeavisideNode>(spec.threshold);
            break;
        case GraphSpec::Kind::power: node = std::make_shared<detail::PowerNode>(spec.exponent); break;
        case GraphSpec::Kind::table: node = std::make_shared<detail::TableNode>(spec.points); break;
    }
    return MonotoneGraph(std::move(node), spec);
}

inline double minimal_section(const MonotoneGraph& g, double x) { return g.minimal_section(x); }
inline Interval value_interval(const MonotoneGraph& g, double x) { return g.value_interval(x); }
inline double potential_j(const MonotoneGraph& g, double x) { return g.potential(x); }
inline double phi_section(const MonotoneGraph& g, double x) { return g.phi_section(x); }

inline ResolventPoint resolvent_scalar(const MonotoneGraph& g, double c, double r) {
    if (!(c > 0.0)) throw InvalidArgument("resolvent_scalar: c must be positive");
    return g.resolvent(c, r);
}

/// beta + eps*id: strictly monotone, non-degenerate, surjective.
inline MonotoneGraph regularize(const MonotoneGraph& g, double eps) {
    if (!(eps > 0.0)) throw InvalidArgument("regularize: eps must be positive");
    if (const auto* shifted = dynamic_cast<const detail::ShiftedNode*>(g.node().get())) {
        const double total = shifted->eps() + eps;
        return MonotoneGraph(std::make_shared<detail::ShiftedNode>(shifted->inner(), total),
                             g.spec(), g.regularization() + eps);
    }
    return MonotoneGraph(std::make_shared<detail::ShiftedNode>(g.node(), eps), g.spec(),
                         g.regularization() + eps);
}

inline MonotoneGraph inverse_graph(const MonotoneGraph& g) {
    if (const auto* inv = dynamic_cast<const detail::InverseNode*>(g.node().get()))
        return MonotoneGraph(inv->inner());
    return MonotoneGraph(std::make_shared<detail::InverseNode>(g.node()));
}

}  // namespace degdiff
