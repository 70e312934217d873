#ifndef IGA_EVALUATE_HPP
#define IGA_EVALUATE_HPP

#include <array>
#include <span>
#include <vector>

#include "iga/splines.hpp"
#include "iga/tensor.hpp"

namespace iga {

/// out(.., q, ..) = sum_a B_{first(q)+a}(x_q) in(.., first(q)+a, ..) along `axis`,
/// with B replaced by B' when `derivative` is set. The axis length changes
/// from n_basis to the number of tabulated points.
inline tensor3 contract_along(const basis_table& table, bool derivative, const tensor3& in, int axis) {
    dims3 d = in.dims();
    const int nq = static_cast<int>(table.size());
    dims3 od = d;
    od[axis] = nq;
    tensor3 out{od};
    const int w = table.degree + 1;
    const auto& coef = derivative ? table.derivatives : table.values;

    if (axis == 0) {
        const long m = static_cast<long>(d[1]) * d[2];
        for (int q = 0; q < nq; ++q) {
            double* y = out.data() + q * m;
            for (int a = 0; a < w; ++a) {
                const double b = coef[static_cast<std::size_t>(q) * w + a];
                const double* x = in.data() + static_cast<long>(table.first[q] + a) * m;
                for (long c = 0; c < m; ++c) {
                    y[c] += b * x[c];
                }
            }
        }
    } else if (axis == 1) {
        for (int i = 0; i < d[0]; ++i) {
            for (int q = 0; q < nq; ++q) {
                double* y = &out(i, q, 0);
                for (int a = 0; a < w; ++a) {
                    const double b = coef[static_cast<std::size_t>(q) * w + a];
                    const double* x = &in(i, table.first[q] + a, 0);
                    for (int k = 0; k < d[2]; ++k) {
                        y[k] += b * x[k];
                    }
                }
            }
        }
    } else {
        for (int i = 0; i < d[0]; ++i) {
            for (int j = 0; j < d[1]; ++j) {
                const double* x = &in(i, j, 0);
                double* y = &out(i, j, 0);
                for (int q = 0; q < nq; ++q) {
                    double sum = 0.0;
                    for (int a = 0; a < w; ++a) {
                        sum += coef[static_cast<std::size_t>(q) * w + a] * x[table.first[q] + a];
                    }
                    y[q] = sum;
                }
            }
        }
    }
    return out;
}

/// Transpose of contract_along with per-point weights: maps point values to
/// basis-function moments, out(.., i, ..) = sum_q w_q B_i(x_q) in(.., q, ..).
inline tensor3 integrate_along(const basis_table& table, std::span<const double> weights, int n_basis,
                               const tensor3& in, int axis) {
    dims3 d = in.dims();
    dims3 od = d;
    od[axis] = n_basis;
    tensor3 out{od};
    const int w = table.degree + 1;
    const int nq = static_cast<int>(table.size());

    if (axis == 0) {
        const long m = static_cast<long>(d[1]) * d[2];
        for (int q = 0; q < nq; ++q) {
            const double* x = in.data() + q * m;
            for (int a = 0; a < w; ++a) {
                const double b = weights[q] * table.values[static_cast<std::size_t>(q) * w + a];
                double* y = out.data() + static_cast<long>(table.first[q] + a) * m;
                for (long c = 0; c < m; ++c) {
                    y[c] += b * x[c];
                }
            }
        }
    } else if (axis == 1) {
        for (int i = 0; i < d[0]; ++i) {
            for (int q = 0; q < nq; ++q) {
                const double* x = &in(i, q, 0);
                for (int a = 0; a < w; ++a) {
                    const double b = weights[q] * table.values[static_cast<std::size_t>(q) * w + a];
                    double* y = &out(i, table.first[q] + a, 0);
                    for (int k = 0; k < d[2]; ++k) {
                        y[k] += b * x[k];
                    }
                }
            }
        }
    } else {
        for (int i = 0; i < d[0]; ++i) {
            for (int j = 0; j < d[1]; ++j) {
                const double* x = &in(i, j, 0);
                double* y = &out(i, j, 0);
                for (int q = 0; q < nq; ++q) {
                    for (int a = 0; a < w; ++a) {
                        y[table.first[q] + a] += weights[q] * table.values[static_cast<std::size_t>(q) * w + a] * x[q];
                    }
                }
            }
        }
    }
    return out;
}

/// Tensor-product point grid with basis tables per axis.
struct point_grid {
    std::array<basis_table, 3> tables;
    std::array<std::vector<double>, 3> weights; // empty for sampling grids

    dims3 dims() const {
        return {static_cast<int>(tables[0].size()), static_cast<int>(tables[1].size()),
                static_cast<int>(tables[2].size())};
    }
};

/// Gauss grid with q points per element on each axis.
inline point_grid make_quadrature_grid(const std::array<knot_vector, 3>& spaces, int q) {
    point_grid g;
    for (int a = 0; a < 3; ++a) {
        const auto rule = gauss_rule(q, spaces[a]);
        g.tables[a] = tabulate(spaces[a], rule.points);
        g.weights[a] = rule.weights;
    }
    return g;
}

/// Uniform grid with `resolution` points per axis covering the closed domain.
inline point_grid make_sampling_grid(const std::array<knot_vector, 3>& spaces, int resolution) {
    point_grid g;
    for (int a = 0; a < 3; ++a) {
        std::vector<double> pts(resolution);
        const double lo = spaces[a].lower();
        const double hi = spaces[a].upper();
        for (int s = 0; s < resolution; ++s) {
            pts[s] = resolution == 1 ? lo : lo + (hi - lo) * s / (resolution - 1);
        }
        g.tables[a] = tabulate(spaces[a], pts);
    }
    return g;
}

/// Values of the spline with coefficients `coef` (or one of its first partial
/// derivatives, derivative_axis in {0,1,2}) at every grid point.
inline tensor3 evaluate_on_grid(const tensor3& coef, const point_grid& grid, int derivative_axis = -1) {
    tensor3 t = contract_along(grid.tables[0], derivative_axis == 0, coef, 0);
    t = contract_along(grid.tables[1], derivative_axis == 1, t, 1);
    return contract_along(grid.tables[2], derivative_axis == 2, t, 2);
}

/// Load vector sum_q w_q f(x_q) B_ijk(x_q) from point values on a quadrature grid.
inline tensor3 integrate_against_basis(const tensor3& values, const point_grid& grid, const dims3& n_basis) {
    tensor3 t = integrate_along(grid.tables[2], grid.weights[2], n_basis[2], values, 2);
    t = integrate_along(grid.tables[1], grid.weights[1], n_basis[1], t, 1);
    return integrate_along(grid.tables[0], grid.weights[0], n_basis[0], t, 0);
}

} // namespace iga

#endif // IGA_EVALUATE_HPP
