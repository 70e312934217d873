#ifndef IGA_SPLINES_HPP
#define IGA_SPLINES_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "iga/errors.hpp"

namespace iga {

/// Clamped (open) knot vector of a one-dimensional B-spline space.
///
/// Endpoint knots are repeated degree+1 times; interior multiplicity is at
/// most degree, so the basis is at least C^0.
class knot_vector {
public:
    knot_vector() = default;

    knot_vector(int degree, std::vector<double> knots)
    : degree_{degree}, knots_{std::move(knots)} {
        validate();
        build_elements();
    }

    int degree() const noexcept { return degree_; }
    const std::vector<double>& knots() const noexcept { return knots_; }
    int n_basis() const noexcept { return static_cast<int>(knots_.size()) - degree_ - 1; }

    double lower() const noexcept { return knots_.front(); }
    double upper() const noexcept { return knots_.back(); }

    /// Number of non-degenerate knot spans.
    int n_elements() const noexcept { return static_cast<int>(element_spans_.size()); }

    /// Knot index s of element e, i.e. the element is [knots[s], knots[s+1]).
    int element_span(int e) const { return element_spans_[e]; }
    double element_lower(int e) const { return knots_[element_spans_[e]]; }
    double element_upper(int e) const { return knots_[element_spans_[e] + 1]; }

    /// Knot span containing x; the right endpoint belongs to the last element.
    int find_span(double x) const {
        if (!(x >= lower() && x <= upper())) {
            throw domain_error{"point " + std::to_string(x) + " outside knot vector domain ["
                               + std::to_string(lower()) + ", " + std::to_string(upper()) + "]"};
        }
        if (x >= upper()) {
            return element_spans_.back();
        }
        auto it = std::upper_bound(knots_.begin() + degree_, knots_.end() - degree_ - 1, x);
        return static_cast<int>(it - knots_.begin()) - 1;
    }

private:
    void validate() const {
        if (degree_ < 1) {
            throw parameter_error{"degree must be >= 1"};
        }
        const auto m = static_cast<int>(knots_.size());
        if (m < 2 * (degree_ + 1)) {
            throw parameter_error{"knot vector too short for degree " + std::to_string(degree_)};
        }
        for (int i = 1; i < m; ++i) {
            if (!(knots_[i] >= knots_[i - 1])) {
                throw parameter_error{"knots must be nondecreasing"};
            }
        }
        auto count = [&](double v) {
            return static_cast<int>(std::count(knots_.begin(), knots_.end(), v));
        };
        if (count(knots_.front()) != degree_ + 1 || count(knots_.back()) != degree_ + 1) {
            throw parameter_error{"end knots must be repeated exactly degree+1 times"};
        }
        if (!(knots_.back() > knots_.front())) {
            throw parameter_error{"knot vector has an empty domain"};
        }
        for (int i = degree_ + 1; i < m - degree_ - 1;) {
            int j = i;
            while (j < m && knots_[j] == knots_[i]) {
                ++j;
            }
            if (j - i > degree_) {
                throw parameter_error{"interior knot multiplicity exceeds degree"};
            }
            i = j;
        }
    }

    void build_elements() {
        element_spans_.clear();
        for (int s = degree_; s < n_basis(); ++s) {
            if (knots_[s + 1] > knots_[s]) {
                element_spans_.push_back(s);
            }
        }
    }

    int degree_ = 0;
    std::vector<double> knots_;
    std::vector<int> element_spans_;
};

/// Uniform open knot vector on [0, 1] with n_elements elements and the given
/// inter-element continuity (interior multiplicity degree - continuity).
inline knot_vector make_open_knot_vector(int n_elements, int degree, int continuity) {
    if (n_elements < 1) {
        throw parameter_error{"number of elements must be >= 1"};
    }
    if (degree < 1) {
        throw parameter_error{"degree must be >= 1"};
    }
    if (continuity < 0 || continuity > degree - 1) {
        throw parameter_error{"continuity must lie in [0, degree-1], got " + std::to_string(continuity)};
    }
    const int multiplicity = degree - continuity;
    std::vector<double> knots;
    knots.reserve(2 * (degree + 1) + (n_elements - 1) * multiplicity);
    knots.insert(knots.end(), degree + 1, 0.0);
    for (int e = 1; e < n_elements; ++e) {
        knots.insert(knots.end(), multiplicity, static_cast<double>(e) / n_elements);
    }
    knots.insert(knots.end(), degree + 1, 1.0);
    return knot_vector{degree, std::move(knots)};
}

/// Nonzero basis functions at a point: B_{first+a}(x) for a = 0..degree.
struct basis_eval {
    int span = 0;
    int first = 0;
    std::vector<double> values;
    std::vector<double> derivatives;
};

/// Cox-de Boor evaluation of the degree+1 nonzero basis functions and their
/// first derivatives at x.
inline basis_eval eval_basis(const knot_vector& kv, double x) {
    const int p = kv.degree();
    const int s = kv.find_span(x);
    const auto& U = kv.knots();

    // ndu[j][r]: basis values (upper triangle incl. diagonal) and knot
    // differences (lower triangle), Piegl & Tiller A2.3.
    std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
    std::vector<double> left(p + 1, 0.0);
    std::vector<double> right(p + 1, 0.0);
    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - U[s + 1 - j];
        right[j] = U[s + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }

    basis_eval out;
    out.span = s;
    out.first = s - p;
    out.values.resize(p + 1);
    out.derivatives.resize(p + 1);
    for (int r = 0; r <= p; ++r) {
        out.values[r] = ndu[r][p];
    }
    // First derivative: p * (N_{r-1,p-1}/(u_{r+p}-u_r) - N_{r,p-1}/(u_{r+p+1}-u_{r+1})).
    for (int r = 0; r <= p; ++r) {
        double d = 0.0;
        if (r >= 1) {
            d += ndu[r - 1][p - 1] / ndu[p][r - 1];
        }
        if (r <= p - 1) {
            d -= ndu[r][p - 1] / ndu[p][r];
        }
        out.derivatives[r] = p * d;
    }
    return out;
}

/// Greville abscissae: mean of knots i+1..i+p for each basis function i.
inline std::vector<double> greville_points(const knot_vector& kv) {
    const int p = kv.degree();
    const auto& U = kv.knots();
    std::vector<double> g(kv.n_basis());
    for (int i = 0; i < kv.n_basis(); ++i) {
        double sum = 0.0;
        for (int j = i + 1; j <= i + p; ++j) {
            sum += U[j];
        }
        g[i] = std::clamp(sum / p, kv.lower(), kv.upper());
    }
    return g;
}

/// Gauss-Legendre nodes and weights on [-1, 1].
inline void gauss_legendre(int q, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(q, 0.0);
    weights.assign(q, 0.0);
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (q + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if (q % 2 == 1) {
        nodes[q / 2] = 0.0;
    }
}

/// Element-wise Gauss rule over a knot vector, stored element-major.
struct quadrature_rule {
    int points_per_element = 0;
    std::vector<double> points;
    std::vector<double> weights;
    std::vector<int> element;

    std::size_t size() const noexcept { return points.size(); }
};

inline quadrature_rule gauss_rule(int q, const knot_vector& kv) {
    if (q < 1) {
        throw parameter_error{"quadrature order must be >= 1"};
    }
    std::vector<double> ref_x;
    std::vector<double> ref_w;
    gauss_legendre(q, ref_x, ref_w);

    quadrature_rule rule;
    rule.points_per_element = q;
    const int ne = kv.n_elements();
    rule.points.reserve(static_cast<std::size_t>(ne) * q);
    rule.weights.reserve(static_cast<std::size_t>(ne) * q);
    rule.element.reserve(static_cast<std::size_t>(ne) * q);
    for (int e = 0; e < ne; ++e) {
        const double a = kv.element_lower(e);
        const double b = kv.element_upper(e);
        const double half = 0.5 * (b - a);
        for (int k = 0; k < q; ++k) {
            rule.points.push_back(a + half * (ref_x[k] + 1.0));
            rule.weights.push_back(half * ref_w[k]);
            rule.element.push_back(e);
        }
    }
    return rule;
}

/// Basis values and derivatives tabulated at a list of points.
struct basis_table {
    int degree = 0;
    std::vector<double> points;
    std::vector<int> first;
    std::vector<double> values;      // points.size() x (degree+1)
    std::vector<double> derivatives; // points.size() x (degree+1)

    std::size_t size() const noexcept { return points.size(); }
    double value(std::size_t q, int a) const { return values[q * (degree + 1) + a]; }
    double derivative(std::size_t q, int a) const { return derivatives[q * (degree + 1) + a]; }
};

inline basis_table tabulate(const knot_vector& kv, const std::vector<double>& points) {
    basis_table t;
    t.degree = kv.degree();
    t.points = points;
    const int w = kv.degree() + 1;
    t.first.resize(points.size());
    t.values.resize(points.size() * w);
    t.derivatives.resize(points.size() * w);
    for (std::size_t q = 0; q < points.size(); ++q) {
        const auto b = eval_basis(kv, points[q]);
        t.first[q] = b.first;
        std::copy(b.values.begin(), b.values.end(), t.values.begin() + q * w);
        std::copy(b.derivatives.begin(), b.derivatives.end(), t.derivatives.begin() + q * w);
    }
    return t;
}

} // namespace iga

#endif // IGA_SPLINES_HPP
