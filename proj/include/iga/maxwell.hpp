#ifndef IGA_MAXWELL_HPP
#define IGA_MAXWELL_HPP

#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "iga/banded.hpp"
#include "iga/errors.hpp"
#include "iga/evaluate.hpp"
#include "iga/materials.hpp"
#include "iga/splines.hpp"
#include "iga/tensor.hpp"

namespace iga {

using vec3 = std::array<double, 3>;
using field3 = std::array<tensor3, 3>;

/// Electric and magnetic B-spline coefficients at one time level.
struct em_state {
    field3 E;
    field3 H;
    double t = 0.0;

    static em_state zero(const dims3& dims) {
        return {{tensor3{dims}, tensor3{dims}, tensor3{dims}}, {tensor3{dims}, tensor3{dims}, tensor3{dims}}, 0.0};
    }

    bool all_finite() const {
        for (int c = 0; c < 3; ++c) {
            if (!E[c].all_finite() || !H[c].all_finite()) {
                return false;
            }
        }
        return true;
    }
};

struct scalar_material {
    double epsilon = 1.0;
    double mu = 1.0;
};

using material_data = std::variant<scalar_material, coefficient_field>;

enum class boundary_mode {
    natural,              // nothing imposed strongly
    tangential_dirichlet, // boundary B-splines of tangential E components eliminated
};

struct scheme_config {
    std::array<knot_vector, 3> spaces;
    double tau = 0.1;
    double final_time = 1.0;
    int n_steps = 10;
    material_data material = scalar_material{};
    boundary_mode boundary = boundary_mode::tangential_dirichlet;
    double delta = 0.0; // lower bound on epsilon and mu

    dims3 dims() const { return {spaces[0].n_basis(), spaces[1].n_basis(), spaces[2].n_basis()}; }

    void validate() const {
        if (!(tau > 0.0) || !std::isfinite(tau)) {
            throw parameter_error{"time step must be positive"};
        }
        if (n_steps < 0) {
            throw parameter_error{"step count must be nonnegative"};
        }
        if (std::abs(n_steps * tau - final_time) > 1e-12 * std::max(1.0, std::abs(final_time))) {
            throw parameter_error{"n_steps * tau must equal the final time"};
        }
        if (const auto* s = std::get_if<scalar_material>(&material)) {
            if (!(s->epsilon > delta) || !(s->mu > delta) || !std::isfinite(s->epsilon) || !std::isfinite(s->mu)) {
                throw parameter_error{"epsilon and mu must be positive"};
            }
        } else {
            const auto& f = std::get<coefficient_field>(material);
            if (f.dims() != dims()) {
                throw parameter_error{"coefficient field does not match the spline spaces"};
            }
            f.validate(delta);
        }
    }
};

/// Builds a configuration with n_steps = round(final_time / tau).
inline scheme_config make_scheme_config(std::array<knot_vector, 3> spaces, double tau, double final_time,
                                        material_data material = scalar_material{},
                                        boundary_mode boundary = boundary_mode::tangential_dirichlet) {
    scheme_config cfg;
    cfg.boundary = boundary;
    cfg.spaces = std::move(spaces);
    cfg.tau = tau;
    cfg.final_time = final_time;
    cfg.n_steps = tau > 0.0 ? static_cast<int>(std::lround(final_time / tau)) : 0;
    cfg.material = std::move(material);
    cfg.validate();
    return cfg;
}

inline std::array<knot_vector, 3> uniform_spaces(int n_elements, int degree, int continuity) {
    const auto kv = make_open_knot_vector(n_elements, degree, continuity);
    return {kv, kv, kv};
}

/// One entry per row of a curl half: row r of the operator is d/dx_axis
/// acting on component `source`.
struct curl_entry {
    int source;
    int axis;
};

/// Positive half of the curl split, rows (d2 E3, d3 E1, d1 E2).
inline constexpr std::array<curl_entry, 3> curl_first{{{2, 1}, {0, 2}, {1, 0}}};
/// Negative half of the curl split, rows (d3 E2, d1 E3, d2 E1).
inline constexpr std::array<curl_entry, 3> curl_second{{{1, 2}, {2, 0}, {0, 1}}};

/// Axis carrying the stiffness term of component r in the given substep:
/// substep 1 (E1: y, E2: z, E3: x), substep 2 (E1: z, E2: x, E3: y).
inline constexpr int stiffened_axis(int substep, int component) {
    return substep == 1 ? curl_first[component].axis : curl_second[component].axis;
}

/// A material-dependent scale per equation row: uniform or one value per
/// test function.
class row_scale {
public:
    row_scale() = default;
    explicit row_scale(double v) : uniform_{v} { }
    explicit row_scale(tensor3 field) : field_{std::move(field)} { }

    bool is_uniform() const noexcept { return !field_.has_value(); }
    double uniform() const noexcept { return uniform_; }
    const tensor3& field() const { return *field_; }

    /// t := scale ⊙ t
    void apply(tensor3& t) const {
        if (field_) {
            t *= *field_;
        } else {
            t *= uniform_;
        }
    }

    /// Value for test function (r, s, t).
    double at(int r, int s, int t) const { return field_ ? (*field_)(r, s, t) : uniform_; }

private:
    double uniform_ = 0.0;
    std::optional<tensor3> field_;
};

struct axis_matrices {
    banded_matrix mass;
    banded_matrix stiffness;
    banded_matrix adv_trial; // derivative on the trial (column) function
    banded_matrix adv_test;  // derivative on the test (row) function
};

/// Everything a time step needs: 1D matrices, material row scales and the
/// sweep plans for each substep and component. Immutable after assembly.
class operators {
public:
    std::array<knot_vector, 3> spaces;
    double tau = 0.0;
    boundary_mode boundary = boundary_mode::tangential_dirichlet;
    std::array<axis_matrices, 3> axes;

    row_scale e_curl;  // tau / (2 eps)
    row_scale stiff;   // tau^2 / (4 eps mu)
    row_scale h_curl;  // tau / (2 mu)

    std::array<sweep_plan, 3> mass_plans;
    std::array<std::array<std::array<sweep_plan, 3>, 3>, 2> e_plans; // [substep-1][component][axis]

    dims3 dims() const { return {spaces[0].n_basis(), spaces[1].n_basis(), spaces[2].n_basis()}; }

    bool variable_material() const noexcept { return !stiff.is_uniform(); }

    /// Whether component r has its boundary B-splines along `axis` eliminated.
    bool constrained(int component, int axis) const noexcept {
        return boundary == boundary_mode::tangential_dirichlet && component != axis;
    }

    /// Kronecker operator with mass factors except on the listed axes, where
    /// the trial and/or test function is differentiated.
    tensor3 apply(const tensor3& u, int trial_deriv_axis = -1, int test_deriv_axis = -1) const {
        std::array<kron_factor, 3> f;
        for (int a = 0; a < 3; ++a) {
            const bool trial = a == trial_deriv_axis;
            const bool test = a == test_deriv_axis;
            const auto& m = axes[a];
            f[a] = trial && test ? kron_factor{m.stiffness}
                 : trial         ? kron_factor{m.adv_trial}
                 : test          ? kron_factor{m.adv_test}
                                 : kron_factor{m.mass};
        }
        return kron_apply(f[0], f[1], f[2], u);
    }

    /// Inverse of the 3D mass matrix.
    tensor3 mass_solve(const tensor3& rhs) const { return adi_solve_block(mass_plans, rhs); }

    /// Zeroes the entries of eliminated boundary B-splines of component r.
    void zero_constrained(int component, tensor3& t) const {
        if (boundary != boundary_mode::tangential_dirichlet) {
            return;
        }
        const auto d = t.dims();
        for (int i = 0; i < d[0]; ++i) {
            for (int j = 0; j < d[1]; ++j) {
                for (int k = 0; k < d[2]; ++k) {
                    const std::array<int, 3> idx{i, j, k};
                    for (int a = 0; a < 3; ++a) {
                        if (constrained(component, a) && (idx[a] == 0 || idx[a] == d[a] - 1)) {
                            t(i, j, k) = 0.0;
                        }
                    }
                }
            }
        }
    }
};

inline operators assemble_operators(const std::array<knot_vector, 3>& spaces, double tau,
                                    const material_data& material,
                                    boundary_mode boundary = boundary_mode::tangential_dirichlet) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw parameter_error{"time step must be nonnegative"};
    }
    operators ops;
    ops.spaces = spaces;
    ops.tau = tau;
    ops.boundary = boundary;
    for (int a = 0; a < 3; ++a) {
        const auto rule = gauss_rule(spaces[a].degree() + 1, spaces[a]);
        auto& m = ops.axes[a];
        m.mass = assemble_1d(spaces[a], matrix_kind::mass, rule);
        m.stiffness = assemble_1d(spaces[a], matrix_kind::stiffness, rule);
        m.adv_trial = assemble_1d(spaces[a], matrix_kind::advection_trial_deriv, rule);
        m.adv_test = assemble_1d(spaces[a], matrix_kind::advection_test_deriv, rule);
        ops.mass_plans[a] = sweep_plan::constant(a, std::make_shared<const banded_lu>(m.mass));
    }
    const dims3 dims = ops.dims();

    // LHS 1D matrix along `axis` for component r: mass or mass + c stiffness,
    // with boundary rows fixed when the component is constrained there.
    auto lhs_1d = [&](int r, int axis, std::optional<double> c) {
        const auto& m = ops.axes[axis];
        banded_matrix A = c ? combine_mass_plus_scaled_stiffness(m.mass, m.stiffness, *c) : m.mass;
        return ops.constrained(r, axis) ? with_fixed_ends(std::move(A)) : A;
    };

    if (const auto* s = std::get_if<scalar_material>(&material)) {
        if (!(s->epsilon > 0.0) || !(s->mu > 0.0)) {
            throw parameter_error{"epsilon and mu must be positive"};
        }
        ops.e_curl = row_scale{tau / (2.0 * s->epsilon)};
        ops.stiff = row_scale{tau * tau / (4.0 * s->epsilon * s->mu)};
        ops.h_curl = row_scale{tau / (2.0 * s->mu)};
        const double c = ops.stiff.uniform();

        for (int sub = 1; sub <= 2; ++sub) {
            for (int r = 0; r < 3; ++r) {
                auto& plans = ops.e_plans[sub - 1][r];
                for (int a = 0; a < 3; ++a) {
                    const bool stiffened = a == stiffened_axis(sub, r);
                    if (!stiffened && !ops.constrained(r, a)) {
                        plans[a] = ops.mass_plans[a];
                        continue;
                    }
                    auto A = lhs_1d(r, a, stiffened ? std::optional<double>{c} : std::nullopt);
                    try {
                        plans[a] = sweep_plan::constant(a, std::make_shared<const banded_lu>(A));
                    } catch (const singular_error& e) {
                        throw singular_error{std::string{e.what()} + " (axis " + std::to_string(a) + ")", e.row(), a};
                    }
                }
            }
        }
        return ops;
    }

    const auto& field = std::get<coefficient_field>(material);
    if (field.dims() != dims) {
        throw parameter_error{"coefficient field does not match the spline spaces"};
    }
    field.validate();
    tensor3 e_curl{dims};
    tensor3 stiff{dims};
    tensor3 h_curl{dims};
    for (std::size_t n = 0; n < e_curl.size(); ++n) {
        const double eps = field.epsilon.data()[n];
        const double mu = field.mu.data()[n];
        e_curl.data()[n] = tau / (2.0 * eps);
        stiff.data()[n] = tau * tau / (4.0 * eps * mu);
        h_curl.data()[n] = tau / (2.0 * mu);
    }

    // One cache per (axis, constrained) pair; components sharing a
    // stiffened axis share factorizations.
    std::array<std::array<std::shared_ptr<factorization_cache>, 2>, 3> caches;
    for (int a = 0; a < 3; ++a) {
        const auto& m = ops.axes[a];
        caches[a][0] = std::make_shared<factorization_cache>(m.mass, m.stiffness);
        if (boundary == boundary_mode::tangential_dirichlet) {
            caches[a][1] = std::make_shared<factorization_cache>(m.mass, m.stiffness, true);
        }
    }
    for (int sub = 1; sub <= 2; ++sub) {
        for (int r = 0; r < 3; ++r) {
            auto& plans = ops.e_plans[sub - 1][r];
            for (int a = 0; a < 3; ++a) {
                if (a == stiffened_axis(sub, r)) {
                    plans[a] = sweep_plan::variable(a, caches[a][ops.constrained(r, a) ? 1 : 0], stiff);
                } else if (ops.constrained(r, a)) {
                    plans[a] = sweep_plan::constant(a, std::make_shared<const banded_lu>(lhs_1d(r, a, std::nullopt)));
                } else {
                    plans[a] = ops.mass_plans[a];
                }
            }
        }
    }
    ops.e_curl = row_scale{std::move(e_curl)};
    ops.stiff = row_scale{std::move(stiff)};
    ops.h_curl = row_scale{std::move(h_curl)};
    return ops;
}

inline operators assemble_operators(const scheme_config& cfg) {
    cfg.validate();
    return assemble_operators(cfg.spaces, cfg.tau, cfg.material, cfg.boundary);
}

/// Right-hand sides of the E systems of one substep:
///   M E_r + a ⊙ [(C1 - C2) H]_r + b ⊙ [R E]_r
/// with R the mixed-derivative block of the substep (C1 C1 in substep 1,
/// C2 C2 in substep 2, after integration by parts).
inline field3 rhs_substep(const em_state& state, const operators& ops, int substep) {
    if (substep != 1 && substep != 2) {
        throw parameter_error{"substep must be 1 or 2"};
    }
    const auto& outer = substep == 1 ? curl_first : curl_second;
    field3 rhs;
    for (int r = 0; r < 3; ++r) {
        tensor3 b = ops.apply(state.E[r]);

        const auto c1 = curl_first[r];
        const auto c2 = curl_second[r];
        tensor3 curl = ops.apply(state.H[c1.source], c1.axis);
        curl -= ops.apply(state.H[c2.source], c2.axis);
        ops.e_curl.apply(curl);
        b += curl;

        // (d_in E_src, d_out V_r): trial derivative from the inner operator,
        // test derivative from the outer one.
        const auto out = outer[r];
        const auto in = outer[out.source];
        tensor3 mixed = ops.apply(state.E[in.source], in.axis, out.axis);
        ops.stiff.apply(mixed);
        b += mixed;

        ops.zero_constrained(r, b);
        rhs[r] = std::move(b);
    }
    return rhs;
}

inline field3 rhs_substep1(const em_state& state, const operators& ops) { return rhs_substep(state, ops, 1); }
inline field3 rhs_substep2(const em_state& state, const operators& ops) { return rhs_substep(state, ops, 2); }

/// (M + b K_s)^{-1} rhs, component by component.
inline field3 solve_E(const field3& rhs, const operators& ops, int substep) {
    if (substep != 1 && substep != 2) {
        throw parameter_error{"substep must be 1 or 2"};
    }
    field3 e;
    for (int r = 0; r < 3; ++r) {
        e[r] = adi_solve_block(ops.e_plans[substep - 1][r], rhs[r]);
    }
    return e;
}

/// Magnetic update of one substep; state.E is the electric field at the
/// start of the substep and e_new the one just solved for.
///   substep 1: M H' = M H - c ⊙ C1 E + c ⊙ C2 E'
///   substep 2: M H' = M H + c ⊙ C2 E - c ⊙ C1 E'
inline field3 update_H(const em_state& state, const field3& e_new, const operators& ops, int substep) {
    if (substep != 1 && substep != 2) {
        throw parameter_error{"substep must be 1 or 2"};
    }
    const field3& first_src = substep == 1 ? state.E : e_new;  // C1 operand
    const field3& second_src = substep == 1 ? e_new : state.E; // C2 operand
    field3 h;
    for (int r = 0; r < 3; ++r) {
        const auto c1 = curl_first[r];
        const auto c2 = curl_second[r];
        tensor3 inc = ops.apply(second_src[c2.source], c2.axis);
        inc -= ops.apply(first_src[c1.source], c1.axis);
        ops.h_curl.apply(inc);
        h[r] = state.H[r] + ops.mass_solve(inc);
    }
    return h;
}

/// One full time step: two substeps, each implicit in one half of the curl.
inline em_state step(const em_state& state, const operators& ops) {
    em_state half;
    half.E = solve_E(rhs_substep(state, ops, 1), ops, 1);
    half.H = update_H(state, half.E, ops, 1);
    half.t = state.t + 0.5 * ops.tau;

    em_state next;
    next.E = solve_E(rhs_substep(half, ops, 2), ops, 2);
    next.H = update_H(half, next.E, ops, 2);
    next.t = state.t + ops.tau;
    return next;
}

using vector_field = std::function<vec3(const vec3&)>;

/// L2 projection of a vector field onto the spline space, one mass solve per
/// component. Quadrature uses degree+2 points per element.
inline field3 l2_project(const vector_field& f, const operators& ops) {
    const auto grid = make_quadrature_grid(ops.spaces, ops.spaces[0].degree() + 2);
    const dims3 qd = grid.dims();
    field3 values{tensor3{qd}, tensor3{qd}, tensor3{qd}};
    for (int i = 0; i < qd[0]; ++i) {
        for (int j = 0; j < qd[1]; ++j) {
            for (int k = 0; k < qd[2]; ++k) {
                const vec3 x{grid.tables[0].points[i], grid.tables[1].points[j], grid.tables[2].points[k]};
                const vec3 v = f(x);
                for (int c = 0; c < 3; ++c) {
                    values[c](i, j, k) = v[c];
                }
            }
        }
    }
    field3 out;
    for (int c = 0; c < 3; ++c) {
        out[c] = ops.mass_solve(integrate_against_basis(values[c], grid, ops.dims()));
    }
    return out;
}

/// L2 norm of the divergence of a discrete vector field (diagnostic only).
inline double divergence_norm(const field3& f, const point_grid& quad) {
    tensor3 div = evaluate_on_grid(f[0], quad, 0);
    div += evaluate_on_grid(f[1], quad, 1);
    div += evaluate_on_grid(f[2], quad, 2);
    const auto d = div.dims();
    double sum = 0.0;
    for (int i = 0; i < d[0]; ++i) {
        for (int j = 0; j < d[1]; ++j) {
            const double wij = quad.weights[0][i] * quad.weights[1][j];
            for (int k = 0; k < d[2]; ++k) {
                sum += wij * quad.weights[2][k] * div(i, j, k) * div(i, j, k);
            }
        }
    }
    return std::sqrt(sum);
}

} // namespace iga

#endif // IGA_MAXWELL_HPP
