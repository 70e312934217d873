#ifndef IGA_VERIFY_HPP
#define IGA_VERIFY_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "iga/errors.hpp"
#include "iga/evaluate.hpp"
#include "iga/maxwell.hpp"
#include "iga/splines.hpp"
#include "iga/tensor.hpp"

namespace iga {

/// One standing-wave mode. Family f puts the electric field in component
/// f-1, varying with sin(kappa pi x_a) sin(lambda pi x_b) over the two other
/// axes a < b.
struct manufactured_mode {
    int family = 1;
    int kappa = 1;
    int lambda = 1;
    double weight = 1.0;

    int component() const noexcept { return family - 1; }
    int kappa_axis() const noexcept { return family == 1 ? 1 : 0; }
    int lambda_axis() const noexcept { return family == 3 ? 1 : 2; }
    double omega() const noexcept { return std::sqrt(double(kappa) * kappa + double(lambda) * lambda) * std::numbers::pi; }
};

/// Exact solution for eps = mu = 1:
///   E = cos(w t) Phi,  H = -sin(w t) / w curl Phi
/// summed over modes.
struct manufactured_solution {
    std::vector<manufactured_mode> modes;

    void validate() const {
        for (const auto& m : modes) {
            if (m.family < 1 || m.family > 3) {
                throw parameter_error{"mode family must be 1, 2 or 3"};
            }
            if (m.kappa == 0 || m.lambda == 0) {
                throw parameter_error{"mode wave numbers must be nonzero"};
            }
        }
    }

    static double gamma() { return 2.0 / std::sqrt(14.0); }

    /// gamma (u1 + 2 u2 + 3 u3) with unit wave numbers; unit L2 norm at t = 0.
    static manufactured_solution preset_a() {
        const double g = gamma();
        return {{{1, 1, 1, g}, {2, 1, 1, 2 * g}, {3, 1, 1, 3 * g}}};
    }
};

namespace detail {

inline int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) {
        return 0;
    }
    return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

/// Spatial profile Phi of one mode and its curl at x.
struct mode_profile {
    vec3 phi{};
    vec3 curl{};
};

inline mode_profile profile(const manufactured_mode& m, const vec3& x) {
    const double pi = std::numbers::pi;
    const int e = m.component();
    const int a = m.kappa_axis();
    const int b = m.lambda_axis();
    const double sa = std::sin(m.kappa * pi * x[a]);
    const double ca = std::cos(m.kappa * pi * x[a]);
    const double sb = std::sin(m.lambda * pi * x[b]);
    const double cb = std::cos(m.lambda * pi * x[b]);
    mode_profile p;
    p.phi[e] = sa * sb;
    // curl(f e_e)_i = eps_{i j e} d_j f
    p.curl[b] = levi_civita(b, a, e) * m.kappa * pi * ca * sb;
    p.curl[a] = levi_civita(a, b, e) * m.lambda * pi * sa * cb;
    return p;
}

} // namespace detail

struct field_value {
    vec3 E{};
    vec3 H{};
};

inline field_value eval_manufactured(const manufactured_solution& ms, const vec3& x, double t) {
    field_value v;
    for (const auto& m : ms.modes) {
        const auto p = detail::profile(m, x);
        const double w = m.omega();
        for (int c = 0; c < 3; ++c) {
            v.E[c] += m.weight * std::cos(w * t) * p.phi[c];
            v.H[c] -= m.weight * std::sin(w * t) / w * p.curl[c];
        }
    }
    return v;
}

/// Curls of the exact E and H.
inline field_value analytic_curl(const manufactured_solution& ms, const vec3& x, double t) {
    field_value v;
    for (const auto& m : ms.modes) {
        const auto p = detail::profile(m, x);
        const double w = m.omega();
        for (int c = 0; c < 3; ++c) {
            v.E[c] += m.weight * std::cos(w * t) * p.curl[c];
            // curl curl Phi = w^2 Phi since Phi is divergence free
            v.H[c] -= m.weight * std::sin(w * t) * w * p.phi[c];
        }
    }
    return v;
}

inline field_value time_derivative(const manufactured_solution& ms, const vec3& x, double t) {
    field_value v;
    for (const auto& m : ms.modes) {
        const auto p = detail::profile(m, x);
        const double w = m.omega();
        for (int c = 0; c < 3; ++c) {
            v.E[c] -= m.weight * w * std::sin(w * t) * p.phi[c];
            v.H[c] -= m.weight * std::cos(w * t) * p.curl[c];
        }
    }
    return v;
}

inline vector_field electric_at(const manufactured_solution& ms, double t) {
    return [ms, t](const vec3& x) { return eval_manufactured(ms, x, t).E; };
}

inline vector_field magnetic_at(const manufactured_solution& ms, double t) {
    return [ms, t](const vec3& x) { return eval_manufactured(ms, x, t).H; };
}

/// Initial state: L2 projection of the exact fields at time t.
inline em_state project_manufactured(const manufactured_solution& ms, const operators& ops, double t = 0.0) {
    em_state s;
    s.E = l2_project(electric_at(ms, t), ops);
    s.H = l2_project(magnetic_at(ms, t), ops);
    s.t = t;
    return s;
}

struct error_norms {
    int step = 0;
    double t = 0.0;
    double l2_E = 0.0;
    double l2_H = 0.0;
    double hcurl_E = 0.0;
    double hcurl_H = 0.0;
};

struct error_summary {
    double l2_E = 0.0;
    double l2_H = 0.0;
    double hcurl_E = 0.0;
    double hcurl_H = 0.0;
};

struct error_report {
    std::vector<error_norms> rows;

    error_summary max_over_steps() const {
        error_summary s;
        for (const auto& r : rows) {
            s.l2_E = std::max(s.l2_E, r.l2_E);
            s.l2_H = std::max(s.l2_H, r.l2_H);
            s.hcurl_E = std::max(s.hcurl_E, r.hcurl_E);
            s.hcurl_H = std::max(s.hcurl_H, r.hcurl_H);
        }
        return s;
    }

    error_summary at_final() const {
        if (rows.empty()) {
            return {};
        }
        const auto& r = rows.back();
        return {r.l2_E, r.l2_H, r.hcurl_E, r.hcurl_H};
    }
};

/// Error norms against a manufactured solution on a fixed Gauss grid. The
/// exact fields are separable, so they are tabulated once per axis and only
/// the time factors change between calls.
class error_evaluator {
public:
    error_evaluator(const manufactured_solution& ms, const std::array<knot_vector, 3>& spaces, int points_per_element)
    : grid_{make_quadrature_grid(spaces, points_per_element)} {
        ms.validate();
        const double pi = std::numbers::pi;
        for (const auto& m : ms.modes) {
            mode_table t;
            t.mode = m;
            for (int a = 0; a < 3; ++a) {
                const auto& pts = grid_.tables[a].points;
                t.one[a].assign(pts.size(), 1.0);
                const int k = a == m.kappa_axis() ? m.kappa : m.lambda;
                t.sin[a].resize(pts.size());
                t.cos[a].resize(pts.size());
                for (std::size_t q = 0; q < pts.size(); ++q) {
                    t.sin[a][q] = std::sin(k * pi * pts[q]);
                    t.cos[a][q] = std::cos(k * pi * pts[q]);
                }
            }
            modes_.push_back(std::move(t));
        }
    }

    const point_grid& grid() const noexcept { return grid_; }

    error_norms operator()(const em_state& s) const {
        const int c1[3] = {1, 2, 0};
        const int c2[3] = {2, 0, 1};
        std::array<tensor3, 3> e_val;
        std::array<tensor3, 3> h_val;
        std::array<tensor3, 3> e_curl;
        std::array<tensor3, 3> h_curl;
        for (int c = 0; c < 3; ++c) {
            e_val[c] = evaluate_on_grid(s.E[c], grid_);
            h_val[c] = evaluate_on_grid(s.H[c], grid_);
        }
        for (int i = 0; i < 3; ++i) {
            // (curl u)_i = d_j u_k - d_k u_j with (i, j, k) cyclic
            const int j = c1[i];
            const int k = c2[i];
            e_curl[i] = evaluate_on_grid(s.E[k], grid_, j) - evaluate_on_grid(s.E[j], grid_, k);
            h_curl[i] = evaluate_on_grid(s.H[k], grid_, j) - evaluate_on_grid(s.H[j], grid_, k);
        }

        // Exact values: each mode contributes products of 1D factors.
        struct term {
            int component;
            double scale;
            std::array<const std::vector<double>*, 3> f;
        };
        std::vector<term> ex_E, ex_H, ex_cE, ex_cH;
        for (const auto& mt : modes_) {
            const auto& m = mt.mode;
            const double w = m.omega();
            const double pi = std::numbers::pi;
            const int e = m.component();
            const int a = m.kappa_axis();
            const int b = m.lambda_axis();
            std::array<const std::vector<double>*, 3> phi{};
            phi[e] = &mt.one[e];
            phi[a] = &mt.sin[a];
            phi[b] = &mt.sin[b];
            std::array<const std::vector<double>*, 3> curl_b = phi;
            curl_b[a] = &mt.cos[a];
            std::array<const std::vector<double>*, 3> curl_a = phi;
            curl_a[b] = &mt.cos[b];
            const double kb = detail::levi_civita(b, a, e) * m.kappa * pi;
            const double ka = detail::levi_civita(a, b, e) * m.lambda * pi;
            const double cs = std::cos(w * s.t);
            const double sn = std::sin(w * s.t);
            ex_E.push_back({e, m.weight * cs, phi});
            ex_H.push_back({b, -m.weight * sn / w * kb, curl_b});
            ex_H.push_back({a, -m.weight * sn / w * ka, curl_a});
            ex_cE.push_back({b, m.weight * cs * kb, curl_b});
            ex_cE.push_back({a, m.weight * cs * ka, curl_a});
            ex_cH.push_back({e, -m.weight * sn * w, phi});
        }

        auto sq_error = [&](const std::array<tensor3, 3>& vals, const std::vector<term>& exact) {
            const auto d = grid_.dims();
            double total = 0.0;
            std::array<double, 3> u{};
            for (int i = 0; i < d[0]; ++i) {
                for (int j = 0; j < d[1]; ++j) {
                    const double wij = grid_.weights[0][i] * grid_.weights[1][j];
                    double row = 0.0;
                    for (int k = 0; k < d[2]; ++k) {
                        u = {vals[0](i, j, k), vals[1](i, j, k), vals[2](i, j, k)};
                        for (const auto& tm : exact) {
                            u[tm.component] -= tm.scale * (*tm.f[0])[i] * (*tm.f[1])[j] * (*tm.f[2])[k];
                        }
                        row += grid_.weights[2][k] * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
                    }
                    total += wij * row;
                }
            }
            return total;
        };

        const double e2 = sq_error(e_val, ex_E);
        const double h2 = sq_error(h_val, ex_H);
        const double ce2 = sq_error(e_curl, ex_cE);
        const double ch2 = sq_error(h_curl, ex_cH);
        error_norms r;
        r.t = s.t;
        r.l2_E = std::sqrt(e2);
        r.l2_H = std::sqrt(h2);
        r.hcurl_E = std::sqrt(e2 + ce2);
        r.hcurl_H = std::sqrt(h2 + ch2);
        return r;
    }

private:
    struct mode_table {
        manufactured_mode mode;
        std::array<std::vector<double>, 3> one, sin, cos;
    };

    point_grid grid_;
    std::vector<mode_table> modes_;
};

/// L2 norm of a vector field by Gauss quadrature with q points per element.
inline double l2_norm(const vector_field& f, const std::array<knot_vector, 3>& spaces, int q) {
    const auto grid = make_quadrature_grid(spaces, q);
    const auto d = grid.dims();
    double sum = 0.0;
    for (int i = 0; i < d[0]; ++i) {
        for (int j = 0; j < d[1]; ++j) {
            for (int k = 0; k < d[2]; ++k) {
                const auto v = f({grid.tables[0].points[i], grid.tables[1].points[j], grid.tables[2].points[k]});
                sum += grid.weights[0][i] * grid.weights[1][j] * grid.weights[2][k]
                     * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
            }
        }
    }
    return std::sqrt(sum);
}

/// Runs the scheme from the projected exact data and records the error
/// after every step, including step 0.
inline error_report run_manufactured(const scheme_config& cfg, const manufactured_solution& ms,
                                     const std::function<void(const em_state&, const error_norms&)>& on_step = {}) {
    const auto ops = assemble_operators(cfg);
    const error_evaluator errors{ms, cfg.spaces, cfg.spaces[0].degree() + 2};
    em_state s = project_manufactured(ms, ops, 0.0);
    error_report report;
    for (int n = 0;; ++n) {
        auto row = errors(s);
        row.step = n;
        if (!s.all_finite()) {
            throw singular_error{"non-finite field values at step " + std::to_string(n), -1};
        }
        report.rows.push_back(row);
        if (on_step) {
            on_step(s, row);
        }
        if (n == cfg.n_steps) {
            break;
        }
        s = step(s, ops);
        s.t = (n + 1) * cfg.tau;
    }
    return report;
}

// ---------------------------------------------------------------------------
// Dense reference: the discrete systems assembled as explicit matrices.

using dense_matrix = Eigen::MatrixXd;
using dense_vector = Eigen::VectorXd;

inline constexpr long dense_oracle_limit = 2000;

/// 1D Galerkin matrices assembled densely, point by point from eval_basis.
struct dense_1d {
    dense_matrix M, S, A, B;
};

inline dense_1d dense_assemble(const knot_vector& kv) {
    const int n = kv.n_basis();
    const int q = kv.degree() + 1;
    std::vector<double> nodes, weights;
    gauss_legendre(q, nodes, weights);
    dense_1d d{dense_matrix::Zero(n, n), dense_matrix::Zero(n, n), dense_matrix::Zero(n, n), dense_matrix::Zero(n, n)};
    for (int e = 0; e < kv.n_elements(); ++e) {
        const double lo = kv.element_lower(e);
        const double hi = kv.element_upper(e);
        for (int g = 0; g < q; ++g) {
            // nodes on [-1, 1]
            const double x = lo + 0.5 * (nodes[g] + 1.0) * (hi - lo);
            const double w = 0.5 * weights[g] * (hi - lo);
            const auto b = eval_basis(kv, x);
            const int p1 = static_cast<int>(b.values.size());
            for (int i = 0; i < p1; ++i) {
                for (int l = 0; l < p1; ++l) {
                    const int r = b.first + i;
                    const int c = b.first + l;
                    d.M(r, c) += w * b.values[i] * b.values[l];
                    d.S(r, c) += w * b.derivatives[i] * b.derivatives[l];
                    d.A(r, c) += w * b.values[i] * b.derivatives[l];
                    d.B(r, c) += w * b.derivatives[i] * b.values[l];
                }
            }
        }
    }
    return d;
}

inline dense_matrix dense_kron(const dense_matrix& a, const dense_matrix& b) {
    dense_matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

inline dense_matrix dense_kron(const dense_matrix& a, const dense_matrix& b, const dense_matrix& c) {
    return dense_kron(a, dense_kron(b, c));
}

inline dense_vector to_dense(const tensor3& t) { return Eigen::Map<const dense_vector>(t.data(), static_cast<Eigen::Index>(t.size())); }

inline tensor3 from_dense(const dense_vector& v, const dims3& dims) {
    tensor3 t{dims};
    std::copy(v.data(), v.data() + v.size(), t.data());
    return t;
}

/// One block row of a 3x3 block operator: column index and matrix per
/// nonzero block.
struct dense_block {
    int column;
    dense_matrix matrix;
};

/// One full step assembled from explicit block matrices and solved with
/// dense LU. Independent of the sweep machinery.
inline em_state dense_oracle_step(const scheme_config& cfg, const em_state& state) {
    const dims3 dims = cfg.dims();
    const long n = static_cast<long>(dims[0]) * dims[1] * dims[2];
    if (n > dense_oracle_limit) {
        throw size_guard_error{"dense oracle refuses " + std::to_string(n) + " unknowns per component (limit "
                               + std::to_string(dense_oracle_limit) + ")"};
    }
    const double tau = cfg.tau;
    const auto x = dense_assemble(cfg.spaces[0]);
    const auto y = dense_assemble(cfg.spaces[1]);
    const auto z = dense_assemble(cfg.spaces[2]);

    // Row scales a = tau/(2 eps), b = tau^2/(4 eps mu), h = tau/(2 mu).
    dense_vector a(n), b(n), h(n);
    if (const auto* s = std::get_if<scalar_material>(&cfg.material)) {
        a.setConstant(tau / (2 * s->epsilon));
        b.setConstant(tau * tau / (4 * s->epsilon * s->mu));
        h.setConstant(tau / (2 * s->mu));
    } else {
        const auto& f = std::get<coefficient_field>(cfg.material);
        for (long r = 0; r < n; ++r) {
            const double eps = f.epsilon.data()[r];
            const double mu = f.mu.data()[r];
            a[r] = tau / (2 * eps);
            b[r] = tau * tau / (4 * eps * mu);
            h[r] = tau / (2 * mu);
        }
    }

    const dense_matrix M = dense_kron(x.M, y.M, z.M);
    const std::array<dense_matrix, 3> K1{dense_kron(x.M, y.S, z.M), dense_kron(x.M, y.M, z.S), dense_kron(x.S, y.M, z.M)};
    const std::array<dense_matrix, 3> K2{dense_kron(x.M, y.M, z.S), dense_kron(x.S, y.M, z.M), dense_kron(x.M, y.S, z.M)};
    const std::array<dense_block, 3> R1{{{1, dense_kron(x.A, y.B, z.M)},
                                         {2, dense_kron(x.M, y.A, z.B)},
                                         {0, dense_kron(x.B, y.M, z.A)}}};
    const std::array<dense_block, 3> R2{{{2, dense_kron(x.A, y.M, z.B)},
                                         {0, dense_kron(x.B, y.A, z.M)},
                                         {1, dense_kron(x.M, y.B, z.A)}}};
    const std::array<dense_block, 3> C1{{{2, dense_kron(x.M, y.A, z.M)},
                                         {0, dense_kron(x.M, y.M, z.A)},
                                         {1, dense_kron(x.A, y.M, z.M)}}};
    const std::array<dense_block, 3> C2{{{1, dense_kron(x.M, y.M, z.A)},
                                         {2, dense_kron(x.A, y.M, z.M)},
                                         {0, dense_kron(x.M, y.A, z.M)}}};

    // Rows of eliminated boundary functions in the tangential mode.
    auto boundary_row = [&](int r, long row) {
        if (cfg.boundary != boundary_mode::tangential_dirichlet) {
            return false;
        }
        const std::array<long, 3> idx{row / (static_cast<long>(dims[1]) * dims[2]), (row / dims[2]) % dims[1],
                                      row % dims[2]};
        for (int ax = 0; ax < 3; ++ax) {
            if (ax != r && (idx[ax] == 0 || idx[ax] == dims[ax] - 1)) {
                return true;
            }
        }
        return false;
    };

    std::array<dense_vector, 3> E, H;
    for (int c = 0; c < 3; ++c) {
        E[c] = to_dense(state.E[c]);
        H[c] = to_dense(state.H[c]);
    }
    const Eigen::PartialPivLU<dense_matrix> mass_lu(M);

    auto e_substep = [&](const std::array<dense_matrix, 3>& K, const std::array<dense_block, 3>& R,
                         const std::array<dense_vector, 3>& e, const std::array<dense_vector, 3>& hf) {
        std::array<dense_vector, 3> out;
        for (int r = 0; r < 3; ++r) {
            dense_matrix lhs = M + b.asDiagonal() * K[r];
            dense_vector ch = C1[r].matrix * hf[C1[r].column] - C2[r].matrix * hf[C2[r].column];
            dense_vector rhs = M * e[r] + a.cwiseProduct(ch) + b.cwiseProduct(R[r].matrix * e[R[r].column]);
            for (long row = 0; row < n; ++row) {
                if (boundary_row(r, row)) {
                    lhs.row(row).setZero();
                    lhs(row, row) = 1.0;
                    rhs[row] = 0.0;
                }
            }
            out[r] = Eigen::PartialPivLU<dense_matrix>(lhs).solve(rhs);
        }
        return out;
    };

    // Substep 1
    const auto E_half = e_substep(K1, R1, E, H);
    std::array<dense_vector, 3> H_half;
    for (int r = 0; r < 3; ++r) {
        const dense_vector rhs = M * H[r]
                               - h.cwiseProduct(C1[r].matrix * E[C1[r].column])
                               + h.cwiseProduct(C2[r].matrix * E_half[C2[r].column]);
        H_half[r] = mass_lu.solve(rhs);
    }
    // Substep 2
    const auto E_next = e_substep(K2, R2, E_half, H_half);
    std::array<dense_vector, 3> H_next;
    for (int r = 0; r < 3; ++r) {
        const dense_vector rhs = M * H_half[r]
                               + h.cwiseProduct(C2[r].matrix * E_half[C2[r].column])
                               - h.cwiseProduct(C1[r].matrix * E_next[C1[r].column]);
        H_next[r] = mass_lu.solve(rhs);
    }

    em_state out;
    for (int c = 0; c < 3; ++c) {
        out.E[c] = from_dense(E_next[c], dims);
        out.H[c] = from_dense(H_next[c], dims);
    }
    out.t = state.t + tau;
    return out;
}

/// Least-squares slope of log(y) against log(x).
inline double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw parameter_error{"slope fit needs at least two points"};
    }
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw parameter_error{"slope fit needs positive data"};
        }
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

struct convergence_row {
    double tau = 0.0;
    int n_steps = 0;
    error_summary final;
    error_summary max;
};

struct convergence_table {
    std::vector<convergence_row> rows;
    // Fitted orders of the errors at the final time; NaN with fewer than two rows.
    double order_l2_E = std::nan("");
    double order_l2_H = std::nan("");
    double order_hcurl_E = std::nan("");
    double order_hcurl_H = std::nan("");
};

inline convergence_table convergence_study(const scheme_config& base, const manufactured_solution& ms,
                                           const std::vector<double>& taus) {
    convergence_table table;
    for (std::size_t i = 0; i < taus.size(); ++i) {
        if (i > 0 && !(taus[i] < taus[i - 1])) {
            throw parameter_error{"time steps must be strictly descending"};
        }
        scheme_config cfg = base;
        cfg.tau = taus[i];
        cfg.n_steps = static_cast<int>(std::lround(base.final_time / taus[i]));
        cfg.validate();
        const auto report = run_manufactured(cfg, ms);
        table.rows.push_back({cfg.tau, cfg.n_steps, report.at_final(), report.max_over_steps()});
    }
    if (table.rows.size() >= 2) {
        std::vector<double> t, e, h, ce, ch;
        for (const auto& r : table.rows) {
            t.push_back(r.tau);
            e.push_back(r.final.l2_E);
            h.push_back(r.final.l2_H);
            ce.push_back(r.final.hcurl_E);
            ch.push_back(r.final.hcurl_H);
        }
        table.order_l2_E = fit_slope(t, e);
        table.order_l2_H = fit_slope(t, h);
        table.order_hcurl_E = fit_slope(t, ce);
        table.order_hcurl_H = fit_slope(t, ch);
    }
    return table;
}

struct scaling_row {
    int n_elements = 0;
    long unknowns = 0; // per field component
    double seconds_per_step = 0.0;
    double ratio = std::nan(""); // against the previous row
};

/// Wall time per step for each mesh size. One warmup step is excluded; each
/// timed batch runs at least `steps` steps and at least `min_batch_seconds`,
/// and the fastest of `repeats` batches is kept.
inline std::vector<scaling_row> scaling_study(const std::vector<int>& n_elements, int degree, double tau, int steps,
                                              int repeats = 1,
                                              const std::function<material_data(const std::array<knot_vector, 3>&)>&
                                                  material = {},
                                              double min_batch_seconds = 0.0) {
    using clock = std::chrono::steady_clock;
    std::vector<scaling_row> rows;
    for (std::size_t i = 0; i < n_elements.size(); ++i) {
        if (i > 0 && !(n_elements[i] > n_elements[i - 1])) {
            throw parameter_error{"mesh sizes must be ascending"};
        }
        const auto spaces = uniform_spaces(n_elements[i], degree, degree - 1);
        const auto ops = assemble_operators(spaces, tau, material ? material(spaces) : material_data{scalar_material{}});
        em_state s = project_manufactured(manufactured_solution::preset_a(), ops);
        s = step(s, ops);
        double best = std::numeric_limits<double>::infinity();
        for (int rep = 0; rep < std::max(1, repeats); ++rep) {
            const auto t0 = clock::now();
            int done = 0;
            double elapsed = 0.0;
            while (done < std::max(1, steps) || elapsed < min_batch_seconds) {
                s = step(s, ops);
                ++done;
                elapsed = std::chrono::duration<double>(clock::now() - t0).count();
            }
            best = std::min(best, elapsed / done);
        }
        scaling_row r;
        r.n_elements = n_elements[i];
        const auto d = ops.dims();
        r.unknowns = static_cast<long>(d[0]) * d[1] * d[2];
        r.seconds_per_step = best;
        if (!rows.empty()) {
            r.ratio = best / rows.back().seconds_per_step;
        }
        rows.push_back(r);
    }
    return rows;
}

} // namespace iga

#endif // IGA_VERIFY_HPP
